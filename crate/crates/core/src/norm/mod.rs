//! `L^q` quasi-norms of sign-definite polynomials on `(0,1)^N` and the
//! triple-stroke norms built from them.
//!
//! The triple-stroke norm of `P = p0 + P⊕ + P⊖` is
//! `|p0| + ||P⊕||_q + ||P⊖||_q`: each sign part is normed separately so
//! monomials of opposite sign never cancel. Derivative norms are taken on the
//! sign parts before differentiating, `||∇^m P⊕||_p + ||∇^m P⊖||_p`, so every
//! integrand stays sign-definite.

pub mod closed;
pub mod exact;
mod gauss;
pub mod montecarlo;
pub mod params;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Polynomial, Sign};

pub use closed::{monomial_gradient_norm_closed, monomial_norm_closed, monomial_power_integral};
pub use exact::integrate_exact_integer;
pub use gauss::GaussLegendre;
pub use montecarlo::integrate_power_mc;
pub use params::{sobolev_exponent, sobolev_exponent_exact, SobolevParams, WindowCheck};
pub use quadrature::{integrate_power, QuadConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadMethod {
    GradedQuadrature,
    MonteCarlo,
    ExactRational,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub algorithm: String,
    pub seed: u64,
}

/// Value of `∫_{Q₀} |f|^q` with its provenance.
///
/// `err_estimate` is the last inter-level difference for quadrature, one
/// standard error for Monte Carlo, and zero for exact and closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub method: QuadMethod,
    pub work: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rng: Option<RngProvenance>,
}

impl QuadResult {
    pub fn zero(method: QuadMethod) -> Self {
        QuadResult {
            value: 0.0,
            err_estimate: 0.0,
            method,
            work: 0,
            rng: None,
        }
    }
}

/// How a power integral is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Method {
    /// Closed form for monomials, exact rationals for `q ∈ {1,2,3}`,
    /// graded quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
    MonteCarlo { samples: u64, seed: u64 },
    Exact,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub method: Method,
    pub quad: QuadConfig,
}

impl EvalOptions {
    pub fn with_method(method: Method) -> Self {
        EvalOptions {
            method,
            ..Default::default()
        }
    }

    pub fn with_tol(tol: f64) -> Self {
        EvalOptions {
            method: Method::Auto,
            quad: QuadConfig::with_tol(tol),
        }
    }
}

/// Integer exponent in `1..=3`, if `q` is one.
fn small_integer(q: f64) -> Option<u32> {
    [1u32, 2, 3].into_iter().find(|&k| q == k as f64)
}

fn exact_result(f: &Polynomial, k: u32) -> Result<(QuadResult, String)> {
    let g = if f.sign() == Sign::Negative {
        f.neg()
    } else {
        f.clone()
    };
    let r = integrate_exact_integer(&g, k)?;
    Ok((
        QuadResult {
            value: exact::rational_to_f64(&r),
            err_estimate: 0.0,
            method: QuadMethod::ExactRational,
            work: g.len() as u64,
            rng: None,
        },
        exact::rational_string(&r),
    ))
}

/// `∫_{Q₀} |f|^q` for sign-definite `f`, dispatched per `opts.method`.
pub fn power_integral(f: &Polynomial, q: f64, opts: &EvalOptions) -> Result<QuadResult> {
    power_integral_detailed(f, q, opts).map(|(r, _)| r)
}

/// As [`power_integral`], also returning the exact `num/den` value when the
/// exact path was taken.
pub fn power_integral_detailed(
    f: &Polynomial,
    q: f64,
    opts: &EvalOptions,
) -> Result<(QuadResult, Option<String>)> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent q={q} must be positive")));
    }
    match f.sign() {
        Sign::Mixed => return Err(Error::MixedSigns),
        Sign::Zero => return Ok((QuadResult::zero(QuadMethod::ClosedForm), Some("0/1".into()))),
        _ => {}
    }
    match opts.method {
        Method::Auto => {
            if let Some((alpha, c)) = f.as_monomial() {
                return Ok((
                    QuadResult {
                        value: c.abs().powf(q) * monomial_power_integral(alpha, q),
                        err_estimate: 0.0,
                        method: QuadMethod::ClosedForm,
                        work: 1,
                        rng: None,
                    },
                    None,
                ));
            }
            if let Some(k) = small_integer(q) {
                let (r, s) = exact_result(f, k)?;
                return Ok((r, Some(s)));
            }
            Ok((integrate_power(f, q, &opts.quad)?, None))
        }
        Method::Quadrature => Ok((integrate_power(f, q, &opts.quad)?, None)),
        Method::MonteCarlo { samples, seed } => {
            Ok((integrate_power_mc(f, q, samples, seed)?, None))
        }
        Method::Exact => {
            let k = small_integer(q).ok_or_else(|| {
                Error::InvalidParameter(format!("exact method needs q in {{1,2,3}}, got {q}"))
            })?;
            let (r, s) = exact_result(f, k)?;
            Ok((r, Some(s)))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub integral: QuadResult,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub integral_exact: Option<String>,
}

/// `||f||_{L^q(Q₀)} = (∫ |f|^q)^{1/q}` for sign-definite `f`.
pub fn lq_quasinorm(f: &Polynomial, q: f64, opts: &EvalOptions) -> Result<NormValue> {
    let (integral, integral_exact) = power_integral_detailed(f, q, opts)?;
    Ok(NormValue {
        value: integral.value.powf(1.0 / q),
        integral,
        integral_exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleNorm {
    pub total: f64,
    pub constant: f64,
    pub plus: NormValue,
    pub minus: NormValue,
}

/// `|||P|||_q = |p0| + ||P⊕||_q + ||P⊖||_q`; the constant contributes `|p0|`
/// for every `q` because the cube has unit volume.
pub fn triple_stroke_norm(p: &Polynomial, q: f64, opts: &EvalOptions) -> Result<TripleNorm> {
    let d = p.decompose();
    let plus = lq_quasinorm(&d.plus, q, opts)?;
    let minus = lq_quasinorm(&d.minus, q, opts)?;
    let constant = d.p0.abs();
    Ok(TripleNorm {
        total: constant + plus.value + minus.value,
        constant,
        plus,
        minus,
    })
}

/// `||∇^m Q||_{L^p} = (Σ_{|β|=m} ∫ |D^β Q|^p)^{1/p}` for one sign part `Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeNorm {
    pub value: f64,
    /// `Σ_β ∫ |D^β Q|^p`.
    pub integral: f64,
    pub components: usize,
    pub work: u64,
}

fn derivative_norm(
    components: impl IntoIterator<Item = Polynomial>,
    p: f64,
    opts: &EvalOptions,
) -> Result<DerivativeNorm> {
    let mut integral = 0.0;
    let mut work = 0;
    let mut count = 0;
    for d in components {
        let r = power_integral(&d, p, opts)?;
        integral += r.value;
        work += r.work;
        count += 1;
    }
    Ok(DerivativeNorm {
        value: integral.powf(1.0 / p),
        integral,
        components: count,
        work,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientTripleNorm {
    pub total: f64,
    pub plus: DerivativeNorm,
    pub minus: DerivativeNorm,
}

/// `||∇P⊕||_p + ||∇P⊖||_p`.
pub fn gradient_triple_norm(
    p: &Polynomial,
    exponent: f64,
    opts: &EvalOptions,
) -> Result<GradientTripleNorm> {
    let d = p.decompose();
    let plus = derivative_norm(d.plus.gradient(), exponent, opts)?;
    let minus = derivative_norm(d.minus.gradient(), exponent, opts)?;
    Ok(GradientTripleNorm {
        total: plus.value + minus.value,
        plus,
        minus,
    })
}

/// `||∇^m P⊕||_p + ||∇^m P⊖||_p` over the unordered derivatives `|β| = m`.
pub fn m_gradient_triple_norm(
    p: &Polynomial,
    exponent: f64,
    m: u32,
    opts: &EvalOptions,
) -> Result<GradientTripleNorm> {
    let d = p.decompose();
    let plus = derivative_norm(d.plus.higher_gradient(m)?.into_values(), exponent, opts)?;
    let minus = derivative_norm(d.minus.higher_gradient(m)?.into_values(), exponent, opts)?;
    Ok(GradientTripleNorm {
        total: plus.value + minus.value,
        plus,
        minus,
    })
}
