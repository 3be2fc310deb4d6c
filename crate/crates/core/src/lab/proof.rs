//! Monomial-level quantities: the norm ratio `||x^α||_{p*} / ||∇x^α||_p`, its
//! per-coordinate factors, and the elementary mean inequalities that bound it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::closed::gradient_sum;
use crate::norm::{monomial_gradient_norm_closed, monomial_norm_closed, SobolevParams};
use crate::poly::MultiIndex;

fn require_first_order(params: &SobolevParams) -> Result<()> {
    if params.m != 1 {
        return Err(Error::InvalidParameter(format!(
            "monomial ratio is defined for m = 1, got m = {}",
            params.m
        )));
    }
    Ok(())
}

/// `||x^α||_{L^{p*}} / ||∇x^α||_{L^p}` from the closed forms.
pub fn monomial_ratio(alpha: &MultiIndex, params: &SobolevParams) -> Result<f64> {
    require_first_order(params)?;
    if alpha.is_zero() {
        return Err(Error::InvalidParameter(
            "ratio undefined for the constant monomial".into(),
        ));
    }
    if alpha.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            got: alpha.dim(),
        });
    }
    Ok(monomial_norm_closed(alpha, params.p_star) / monomial_gradient_norm_closed(alpha, params.p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialRow {
    pub alpha: MultiIndex,
    pub lp_star_norm: f64,
    pub grad_lp_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialSup {
    pub sup: f64,
    pub argmax: MultiIndex,
    pub scanned: u64,
}

/// Per-coordinate lookup tables so the box scan costs two `powf` per entry.
/// Every value is formed exactly as the closed forms form it, so each ratio is
/// bit-identical to [`monomial_ratio`].
struct Tables {
    p: f64,
    p_star: f64,
    star_int: Vec<f64>,
    p_int: Vec<f64>,
    gsum: Vec<f64>,
}

impl Tables {
    fn new(params: &SobolevParams, k: u32) -> Self {
        let (p, ps) = (params.p, params.p_star);
        let mut star_int = Vec::with_capacity(k as usize + 1);
        let mut p_int = Vec::with_capacity(k as usize + 1);
        let mut gsum = Vec::with_capacity(k as usize + 1);
        for a in 0..=k {
            let single = MultiIndex::new(vec![a]);
            star_int.push(crate::norm::monomial_power_integral(&single, ps));
            p_int.push(crate::norm::monomial_power_integral(&single, p));
            gsum.push(gradient_sum(&single, p));
        }
        Tables {
            p,
            p_star: ps,
            star_int,
            p_int,
            gsum,
        }
    }

    fn row(&self, alpha: &[u32]) -> (f64, f64) {
        let mut si = 1.0;
        let mut pi = 1.0;
        let mut g = 0.0;
        for &a in alpha.iter().filter(|&&a| a > 0) {
            let a = a as usize;
            si *= self.star_int[a];
            pi *= self.p_int[a];
            g += self.gsum[a];
        }
        let lhs = si.powf(1.0 / self.p_star);
        let rhs = (g * pi).powf(1.0 / self.p);
        (lhs, rhs)
    }
}

/// Visits every `α ∈ {0..=k}^N \ {0}` in odometer order (last coordinate fastest).
fn scan_box(params: &SobolevParams, k: u32, mut visit: impl FnMut(&[u32], f64, f64)) {
    let tables = Tables::new(params, k);
    let n = params.dim;
    let mut alpha = vec![0u32; n];
    loop {
        // advance odometer
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if alpha[j] < k {
                alpha[j] += 1;
                break;
            }
            alpha[j] = 0;
        }
        let (lhs, rhs) = tables.row(&alpha);
        visit(&alpha, lhs, rhs);
    }
}

/// Supremum of the monomial ratio over the box `{0..=k}^N` (skipping `α = 0`).
pub fn monomial_ratio_sup(params: &SobolevParams, k: u32) -> Result<MonomialSup> {
    require_first_order(params)?;
    if k == 0 {
        return Err(Error::InvalidParameter("box limit must be at least 1".into()));
    }
    let mut best = f64::NEG_INFINITY;
    let mut argmax = vec![0u32; params.dim];
    let mut scanned = 0u64;
    scan_box(params, k, |alpha, lhs, rhs| {
        scanned += 1;
        let r = lhs / rhs;
        if r > best {
            best = r;
            argmax.copy_from_slice(alpha);
        }
    });
    Ok(MonomialSup {
        sup: best,
        argmax: MultiIndex::new(argmax),
        scanned,
    })
}

/// Full table of the box scan, in the same order as [`monomial_ratio_sup`].
pub fn monomial_ratio_table(params: &SobolevParams, k: u32) -> Result<(Vec<MonomialRow>, MonomialSup)> {
    let sup = monomial_ratio_sup(params, k)?;
    let mut rows = Vec::new();
    scan_box(params, k, |alpha, lhs, rhs| {
        rows.push(MonomialRow {
            alpha: MultiIndex::new(alpha.to_vec()),
            lp_star_norm: lhs,
            grad_lp_norm: rhs,
            ratio: lhs / rhs,
        })
    });
    Ok((rows, sup))
}

/// `(a p + 1)^{1/p} / (p* a + 1)^{1/p*}`, one coordinate's share of the ratio
/// of the `∏_j` parts of the two closed forms.
pub fn proof_factor(a: u32, params: &SobolevParams) -> Result<f64> {
    require_first_order(params)?;
    let a = a as f64;
    Ok((a * params.p + 1.0).powf(1.0 / params.p)
        / (params.p_star * a + 1.0).powf(1.0 / params.p_star))
}

/// `1/p − 1/p*`, which equals `m/N`; for `m = 1` this is the `a^{1/N}` growth
/// rate of [`proof_factor`].
pub fn exponent_gap(params: &SobolevParams) -> f64 {
    1.0 / params.p - 1.0 / params.p_star
}

/// `[Σ_{j: α_j≥1} α_j^p (pα_j+1)/(p(α_j−1)+1)]^{−1/p}`; bounded by `||α||_{ℓ^p}^{-1}`
/// since every correction multiplier exceeds 1.
pub fn second_factor(alpha: &MultiIndex, p: f64) -> Result<f64> {
    if alpha.is_zero() {
        return Err(Error::InvalidParameter(
            "second factor undefined for the zero multi-index".into(),
        ));
    }
    Ok(gradient_sum(alpha, p).powf(-1.0 / p))
}

/// `(Σ_j |v_j|^q)^{1/q}`, computed as `max · (Σ (v_j/max)^q)^{1/q}` so a single
/// nonzero entry returns that entry exactly.
pub fn lq_norm(v: &[f64], q: f64) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x.abs() / max).powf(q)).sum();
    max * s.powf(1.0 / q)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanChecks {
    pub arithmetic_mean: f64,
    pub geometric_mean: f64,
    /// AM − GM over `max(α_j, 1)`.
    pub am_gm_margin: f64,
    pub l1: f64,
    pub lp: f64,
    /// `||α||_{ℓ^p} − ||α||_{ℓ¹}`, nonnegative for `p ≤ 1`.
    pub lq_margin: f64,
}

impl MeanChecks {
    pub fn am_gm_holds(&self) -> bool {
        self.am_gm_margin >= 0.0
    }

    pub fn lq_holds(&self) -> bool {
        self.lq_margin >= 0.0
    }
}

/// Geometric/arithmetic mean of `max(α_j, 1)` and the `ℓ¹ ≤ ℓ^p` comparison.
pub fn mean_inequality_checks(alpha: &MultiIndex, p: f64) -> Result<MeanChecks> {
    if alpha.is_zero() {
        return Err(Error::InvalidParameter(
            "mean checks need a nonzero multi-index".into(),
        ));
    }
    let n = alpha.dim() as f64;
    let lifted: Vec<f64> = alpha.entries().iter().map(|&a| a.max(1) as f64).collect();
    let max = lifted.iter().cloned().fold(0.0, f64::max);
    let am = lifted.iter().sum::<f64>() / n;
    let gm = max * lifted.iter().map(|x| (x / max).powf(1.0 / n)).product::<f64>();
    let raw: Vec<f64> = alpha.entries().iter().map(|&a| a as f64).collect();
    let l1: f64 = raw.iter().sum();
    let lp = lq_norm(&raw, p);
    Ok(MeanChecks {
        arithmetic_mean: am,
        geometric_mean: gm,
        am_gm_margin: am - gm,
        l1,
        lp,
        lq_margin: lp - l1,
    })
}
