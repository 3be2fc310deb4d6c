use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use poincare_lab::lab::proof::monomial_ratio_table;
use poincare_lab::lab::{
    cell_seed, estimate_constant, sample_nth, sweep_cell, verify_embedding, verify_higher,
    verify_poincare, SamplerConfig, SearchConfig, SignMode, SweepCell,
};
use poincare_lab::norm::exact::{rational_from_f64, rational_string};
use poincare_lab::norm::{
    integrate_power_mc, power_integral, triple_stroke_norm, EvalOptions, Method, QuadConfig,
    SobolevParams,
};
use poincare_lab::poly::{from_json_str, to_json_string, Polynomial};
use poincare_lab::report::{
    envelope, kind_of, read_jsonl, write_monomial_csv, write_plot_data, JsonlWriter, RunInfo,
    RunRecord,
};
use poincare_lab::{Error, Result};

/// Exit code when some sweep cells failed.
const PARTIAL_FAILURE: u8 = 5;

#[derive(Parser)]
#[command(name = "poincare-lab", version, about = "Triple-stroke norms and Poincaré-type ratio checks for polynomials on the unit cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a polynomial into constant, positive and negative parts.
    Decompose(DecomposeArgs),
    /// Triple-stroke L^q norm of a polynomial.
    Norm(NormArgs),
    /// CSV table of monomial ratios over the box 0 <= alpha_j <= K.
    MonomialTable(TableArgs),
    /// Ratio reports for sampled (or given) polynomials, as JSONL.
    Verify(VerifyArgs),
    /// Empirical best constant for one parameter cell.
    SearchConstant(SearchArgs),
    /// Constant search over a grid of cells, as JSONL.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Auto,
    Quad,
    Mc,
    Exact,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Theorem {
    /// First-order inequality.
    #[value(alias = "1.3")]
    Poincare,
    /// Order-m inequality.
    #[value(alias = "1.4")]
    Higher,
    /// Embedding inequality.
    #[value(alias = "1.6")]
    Embedding,
}

#[derive(Args, Clone, Debug, Serialize)]
struct EvalArgs {
    /// Integration method; `auto` uses closed forms, exact rationals or quadrature.
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Sample count for `--method mc`.
    #[arg(long, default_value_t = 100_000)]
    mc_samples: u64,
}

impl EvalArgs {
    fn options(&self, seed: u64) -> Result<EvalOptions> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("--tol must be positive, got {}", self.tol)));
        }
        let method = match self.method {
            MethodArg::Auto => Method::Auto,
            MethodArg::Quad => Method::Quadrature,
            MethodArg::Exact => Method::Exact,
            MethodArg::Mc => Method::MonteCarlo {
                samples: self.mc_samples,
                seed,
            },
        };
        Ok(EvalOptions {
            method,
            quad: QuadConfig::with_tol(self.tol),
        })
    }
}

#[derive(Args, Clone, Debug, Serialize)]
struct SearchFlags {
    /// Maximum total degree of sampled polynomials.
    #[arg(long, default_value_t = 4)]
    degree: u32,
    /// Number of monomials per sampled polynomial.
    #[arg(long, default_value_t = 3)]
    support: usize,
    #[arg(long, default_value_t = 200)]
    random_budget: u64,
    #[arg(long, default_value_t = 200)]
    climb_budget: u64,
    /// Sample mixed-sign polynomials instead of positive-only ones.
    #[arg(long)]
    mixed: bool,
    /// Skip scoring the monomials of the degree window.
    #[arg(long)]
    no_monomials: bool,
}

impl SearchFlags {
    fn config(&self, dim: usize, seed: u64, eval: EvalOptions) -> SearchConfig {
        let mut cfg = SearchConfig::new(dim, self.degree, self.support, seed);
        cfg.random_budget = self.random_budget;
        cfg.climb_budget = self.climb_budget;
        cfg.include_monomials = !self.no_monomials;
        if self.mixed {
            cfg.sampler.sign_mode = SignMode::Mixed;
        }
        cfg.eval = eval;
        cfg
    }
}

#[derive(Args, Debug, Serialize)]
struct DecomposeArgs {
    /// Polynomial JSON file.
    poly: PathBuf,
    /// Write a run record here.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct NormArgs {
    poly: PathBuf,
    #[arg(long)]
    q: f64,
    #[arg(long, env = "POINCARE_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TableArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    p: f64,
    /// Box limit K.
    #[arg(long, default_value_t = 30)]
    k: u32,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "poincare")]
    theorem: Theorem,
    /// Dimension; defaults to the dimension of `--poly`.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, default_value_t = 100)]
    samples: u64,
    #[arg(long, env = "POINCARE_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    degree: u32,
    #[arg(long, default_value_t = 4)]
    support: usize,
    /// Sample positive-only polynomials.
    #[arg(long)]
    positive_only: bool,
    /// Monte Carlo points per oracle check of a left-side integral (0 disables).
    #[arg(long, default_value_t = 4096)]
    oracle_samples: u64,
    /// Score this polynomial file instead of sampling.
    #[arg(long)]
    poly: Option<PathBuf>,
    #[command(flatten)]
    eval: EvalArgs,
    /// JSONL output path (stdout if omitted).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, env = "POINCARE_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    search: SearchFlags,
    #[command(flatten)]
    eval: EvalArgs,
    /// Run record output path.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Write the witness polynomial here.
    #[arg(long)]
    #[serde(skip)]
    witness_out: Option<PathBuf>,
    /// Two-column plot data (p, estimate).
    #[arg(long)]
    #[serde(skip)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    /// Dimensions of the grid.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    dims: Vec<usize>,
    /// Exponents per dimension: numbers, `lower` (= N/(N+1)) or `lower+<d>`.
    #[arg(long, value_delimiter = ',', default_value = "lower+0.01,0.9,0.97")]
    ps: Vec<String>,
    #[arg(long, default_value_t = 1)]
    m: u32,
    /// Master seed; cell i uses a seed derived from (seed, i).
    #[arg(long, env = "POINCARE_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    search: SearchFlags,
    #[command(flatten)]
    eval: EvalArgs,
    /// Evaluate cells in parallel (output is identical either way).
    #[arg(long)]
    #[serde(skip)]
    parallel: bool,
    /// JSONL output path (stdout if omitted).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// Keep completed cells of an existing `--out` file.
    #[arg(long, requires = "out")]
    #[serde(skip)]
    resume: bool,
    #[arg(long)]
    #[serde(skip)]
    plot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Norm(a) => cmd_norm(a),
        Command::MonomialTable(a) => cmd_monomial_table(a),
        Command::Verify(a) => cmd_verify(a),
        Command::SearchConstant(a) => cmd_search_constant(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_poly(path: &Path) -> Result<Polynomial> {
    let text = std::fs::read_to_string(path)?;
    from_json_str(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_run_record(path: &Path, command: &str, args: &impl Serialize, payloads: Vec<Value>) -> Result<()> {
    let rec = RunRecord::new(RunInfo::new(command, serde_json::to_value(args)?), payloads);
    let mut w = create(path)?;
    writeln!(w, "{}", rec.to_json_pretty()?)?;
    w.flush()?;
    Ok(())
}

fn print_json(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_decompose(args: DecomposeArgs) -> Result<u8> {
    let poly = read_poly(&args.poly)?;
    let d = poly.decompose();
    let payload = envelope(
        "decomposition",
        &json!({
            "p0": Polynomial::constant(poly.dim(), d.p0),
            "plus": d.plus,
            "minus": d.minus,
        }),
    )?;
    print_json(&payload)?;
    if let Some(out) = &args.out {
        write_run_record(out, "decompose", &args, vec![payload])?;
    }
    Ok(0)
}

fn cmd_norm(args: NormArgs) -> Result<u8> {
    let poly = read_poly(&args.poly)?;
    let opts = args.eval.options(args.seed)?;
    let n = triple_stroke_norm(&poly, args.q, &opts)?;
    let mut body = json!({
        "q": args.q,
        "total": n.total,
        "constant": n.constant,
        "plus": n.plus,
        "minus": n.minus,
        "eval": opts,
    });
    // At q = 1 every part is an integral, so exact parts add up exactly.
    if args.q == 1.0 {
        let exact = |s: &Option<String>| s.as_deref().and_then(|s| BigRational::from_str(s).ok());
        if let (Some(a), Some(b)) = (exact(&n.plus.integral_exact), exact(&n.minus.integral_exact)) {
            let total = rational_from_f64(n.constant).abs() + a + b;
            body["total_exact"] = json!(rational_string(&total));
        }
    }
    let payload = envelope("norm", &body)?;
    print_json(&payload)?;
    if let Some(out) = &args.out {
        write_run_record(out, "norm", &args, vec![payload])?;
    }
    Ok(0)
}

fn cmd_monomial_table(args: TableArgs) -> Result<u8> {
    let params = SobolevParams::in_window(args.dim, args.p, 1)?;
    if args.k == 0 {
        return Err(Error::InvalidParameter("--k must be >= 1".into()));
    }
    let (rows, sup) = monomial_ratio_table(&params, args.k)?;
    let mut w = sink(args.out.as_deref())?;
    write_monomial_csv(&rows, &sup, &mut w)?;
    w.flush()?;
    Ok(0)
}

/// Window check for the selected inequality, done before any sampling.
fn verify_params(theorem: Theorem, dim: usize, p: f64, m: u32) -> Result<SobolevParams> {
    if !matches!(theorem, Theorem::Higher) && m != 1 {
        return Err(Error::InvalidParameter(format!(
            "--theorem {theorem:?} is first order; use --m 1 or --theorem higher"
        )));
    }
    SobolevParams::in_window(dim, p, m)
}

#[derive(Default, Serialize)]
struct OracleStats {
    samples: u64,
    checked: u64,
    within_3se: u64,
}

#[derive(Serialize)]
struct VerifyStats {
    samples: u64,
    records: u64,
    degenerate: u64,
    max_ratio: Option<f64>,
    argmax_index: Option<u64>,
    argmax_poly_id: Option<String>,
    /// Embedding runs: records where both constant-term identities hold.
    #[serde(skip_serializing_if = "Option::is_none")]
    sub_identities_hold: Option<u64>,
    oracle: OracleStats,
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let given = args.poly.as_deref().map(read_poly).transpose()?;
    let dim = match (args.dim, &given) {
        (Some(d), _) => d,
        (None, Some(p)) => p.dim(),
        (None, None) => return Err(Error::InvalidParameter("--dim is required without --poly".into())),
    };
    let params = verify_params(args.theorem, dim, args.p, args.m)?;
    let opts = args.eval.options(args.seed)?;
    let mut sampler = SamplerConfig::new(dim, args.degree, args.support, args.seed);
    if args.positive_only {
        sampler.sign_mode = SignMode::PositiveOnly;
    }
    if given.is_none() && args.samples > 0 {
        sampler.validate()?;
    }
    let info = RunInfo::new("verify", serde_json::to_value(&args)?);
    let mut w = JsonlWriter::new(sink(args.out.as_deref())?);
    let mut stats = VerifyStats {
        samples: if given.is_some() { 1 } else { args.samples },
        records: 0,
        degenerate: 0,
        max_ratio: None,
        argmax_index: None,
        argmax_poly_id: None,
        sub_identities_hold: matches!(args.theorem, Theorem::Embedding).then_some(0),
        oracle: OracleStats {
            samples: args.oracle_samples,
            ..Default::default()
        },
    };
    for i in 0..stats.samples {
        let step = (|| -> Result<Value> {
            let poly = match &given {
                Some(p) => p.clone(),
                None => sample_nth(&sampler, i)?,
            };
            let mut record = verify_one(args.theorem, &poly, &params, &opts, &mut stats)?;
            oracle_check(&poly, &params, &opts, args.oracle_samples, cell_seed(args.seed, i), &mut stats.oracle)?;
            record["index"] = json!(i);
            record["seed"] = json!(args.seed);
            record["sampled"] = json!(given.is_none());
            record["poly"] = serde_json::to_value(&poly)?;
            record["eval"] = serde_json::to_value(&opts)?;
            let ratio = record["ratio"].as_f64();
            if let Some(r) = ratio {
                if stats.max_ratio.is_none_or(|m| r > m) {
                    stats.max_ratio = Some(r);
                    stats.argmax_index = Some(i);
                    stats.argmax_poly_id = record["poly_id"].as_str().map(String::from);
                }
            } else {
                stats.degenerate += 1;
            }
            Ok(record)
        })();
        match step.and_then(|rec| w.write_value(&rec)) {
            Ok(()) => stats.records += 1,
            Err(e) => {
                let _ = w.truncate(&info, &e);
                return Err(e);
            }
        }
    }
    w.summary(&info, &stats)?.flush()?;
    Ok(0)
}

fn verify_one(
    theorem: Theorem,
    poly: &Polynomial,
    params: &SobolevParams,
    opts: &EvalOptions,
    stats: &mut VerifyStats,
) -> Result<Value> {
    match theorem {
        Theorem::Poincare => envelope("ratio", &verify_poincare(poly, params, opts)?),
        Theorem::Higher => envelope("ratio", &verify_higher(poly, params, opts)?),
        Theorem::Embedding => {
            let r = verify_embedding(poly, params, opts)?;
            if r.constant_norm_equal && r.constant_dominated {
                if let Some(n) = stats.sub_identities_hold.as_mut() {
                    *n += 1;
                }
            }
            envelope("embedding", &r)
        }
    }
}

/// Monte Carlo cross-check of each nonzero left-side power integral.
fn oracle_check(
    poly: &Polynomial,
    params: &SobolevParams,
    opts: &EvalOptions,
    n: u64,
    seed: u64,
    stats: &mut OracleStats,
) -> Result<()> {
    if n < 2 {
        return Ok(());
    }
    let (_, rest) = poly.truncate_degree(params.m)?;
    let d = rest.decompose();
    for part in [&d.plus, &d.minus] {
        if part.is_zero() {
            continue;
        }
        let reference = power_integral(part, params.p_star, opts)?;
        let mc = integrate_power_mc(part, params.p_star, n, seed)?;
        stats.checked += 1;
        if (reference.value - mc.value).abs() <= 3.0 * mc.err_estimate {
            stats.within_3se += 1;
        }
    }
    Ok(())
}

fn cmd_search_constant(args: SearchArgs) -> Result<u8> {
    let params = SobolevParams::in_window(args.dim, args.p, args.m)?;
    let opts = args.eval.options(args.seed)?;
    let cfg = args.search.config(args.dim, args.seed, opts);
    let est = estimate_constant(&params, &cfg)?;
    let payload = envelope("constant-estimate", &est)?;
    print_json(&payload)?;
    if let Some(path) = &args.witness_out {
        let mut w = create(path)?;
        writeln!(w, "{}", to_json_string(&est.witness))?;
        w.flush()?;
    }
    if let Some(path) = &args.plot {
        write_plot_data(&[(params.dim, params.p, est.value)], create(path)?)?;
    }
    if let Some(out) = &args.out {
        write_run_record(out, "search-constant", &args, vec![payload])?;
    }
    Ok(0)
}

fn parse_p(token: &str, dim: usize) -> Result<f64> {
    let lower = dim as f64 / (dim as f64 + 1.0);
    let t = token.trim();
    let bad = || Error::InvalidParameter(format!("cannot parse exponent {t:?}"));
    if t == "lower" {
        Ok(lower)
    } else if let Some(d) = t.strip_prefix("lower+") {
        Ok(lower + d.parse::<f64>().map_err(|_| bad())?)
    } else {
        t.parse::<f64>().map_err(|_| bad())
    }
}

fn sweep_grid(args: &SweepArgs) -> Result<Vec<SobolevParams>> {
    let mut grid = Vec::new();
    for &dim in &args.dims {
        for token in &args.ps {
            grid.push(SobolevParams::in_window(dim, parse_p(token, dim)?, args.m)?);
        }
    }
    Ok(grid)
}

/// Completed cells of an earlier run with identical parameters.
fn resumable_cells(path: &Path, info: &RunInfo, grid: &[SobolevParams], seed: u64) -> Result<Vec<Option<SweepCell>>> {
    let mut done = vec![None; grid.len()];
    if !path.exists() {
        return Ok(done);
    }
    let records = read_jsonl(BufReader::new(File::open(path)?))?;
    let header = records
        .iter()
        .find(|r| kind_of(r) == Some("run"))
        .ok_or_else(|| Error::Parse(format!("{}: no run header to resume from", path.display())))?;
    if header["params"] != info.params {
        return Err(Error::InvalidParameter(format!(
            "{} was written with different parameters; refusing to resume",
            path.display()
        )));
    }
    for r in records.iter().filter(|r| kind_of(r) == Some("cell")) {
        let cell: SweepCell = serde_json::from_value(r.clone())?;
        let i = cell.index;
        if i < grid.len() && cell.params == grid[i] && cell.seed == cell_seed(seed, i as u64) && cell.estimate.is_some() {
            done[i] = Some(cell);
        }
    }
    Ok(done)
}

fn cmd_sweep(args: SweepArgs) -> Result<u8> {
    let grid = sweep_grid(&args)?;
    let opts = args.eval.options(args.seed)?;
    // the sampler dimension is set per cell
    let cfg = args.search.config(1, args.seed, opts);
    let info = RunInfo::new("sweep", serde_json::to_value(&args)?);
    let mut cells = match (&args.out, args.resume) {
        (Some(path), true) => resumable_cells(path, &info, &grid, args.seed)?,
        _ => vec![None; grid.len()],
    };
    let resumed = cells.iter().filter(|c| c.is_some()).count();
    if resumed > 0 {
        eprintln!("resuming: {resumed} of {} cells already complete", grid.len());
    }
    if args.parallel {
        let fresh: Vec<(usize, SweepCell)> = (0..grid.len())
            .into_par_iter()
            .filter(|&i| cells[i].is_none())
            .map(|i| (i, sweep_cell(i, &grid[i], &cfg, args.seed)))
            .collect();
        for (i, c) in fresh {
            cells[i] = Some(c);
        }
    }
    let mut w = JsonlWriter::new(sink(args.out.as_deref())?);
    w.write_value(&envelope("run", &info)?)?;
    let mut failed = 0u64;
    let mut points = Vec::new();
    for (i, slot) in cells.into_iter().enumerate() {
        let cell = slot.unwrap_or_else(|| sweep_cell(i, &grid[i], &cfg, args.seed));
        match &cell.estimate {
            Some(e) => points.push((cell.params.dim, cell.params.p, e.value)),
            None => failed += 1,
        }
        w.write("cell", &cell)?;
    }
    let stats = json!({"cells": grid.len(), "completed": grid.len() as u64 - failed, "failed": failed});
    w.summary(&info, &stats)?.flush()?;
    if let Some(path) = &args.plot {
        let mut f = create(path)?;
        write_plot_data(&points, &mut f)?;
        f.flush()?;
    }
    Ok(if failed > 0 { PARTIAL_FAILURE } else { 0 })
}
