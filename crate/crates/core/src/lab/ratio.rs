//! Both sides of the three inequalities for a single polynomial.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::norm::{
    gradient_triple_norm, lq_quasinorm, m_gradient_triple_norm, triple_stroke_norm, EvalOptions,
    SobolevParams,
};
use crate::poly::{to_json_string, Polynomial};

/// Left side, right side and their ratio for one polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub params: SobolevParams,
    pub poly_id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` exactly when the report is degenerate (`rhs = 0`).
    pub ratio: Option<f64>,
    pub degenerate: bool,
    /// Whether the parameters lie in the hypothesis window; runs outside it
    /// are exploratory.
    pub in_window: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parts: Option<SignParts>,
}

/// Contributions of the positive and negative parts to each side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignParts {
    pub lhs_plus: f64,
    pub lhs_minus: f64,
    pub rhs_plus: f64,
    pub rhs_minus: f64,
}

impl SignParts {
    pub fn ratio_plus(&self) -> Option<f64> {
        (self.rhs_plus > 0.0).then(|| self.lhs_plus / self.rhs_plus)
    }

    pub fn ratio_minus(&self) -> Option<f64> {
        (self.rhs_minus > 0.0).then(|| self.lhs_minus / self.rhs_minus)
    }
}

impl RatioReport {
    fn new(
        params: &SobolevParams,
        p: &Polynomial,
        lhs: f64,
        rhs: f64,
        parts: Option<SignParts>,
    ) -> Self {
        let degenerate = rhs == 0.0;
        RatioReport {
            params: params.clone(),
            poly_id: poly_id(p),
            lhs,
            rhs,
            ratio: (!degenerate).then(|| lhs / rhs),
            degenerate,
            in_window: params.window().in_window,
            parts,
        }
    }
}

/// Short content hash of the canonical JSON form.
pub fn poly_id(p: &Polynomial) -> String {
    let digest = Sha256::digest(to_json_string(p).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn check_dim(p: &Polynomial, params: &SobolevParams) -> Result<()> {
    if p.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            got: p.dim(),
        });
    }
    Ok(())
}

/// First-order inequality: `lhs = ||P⊕||_{p*} + ||P⊖||_{p*}` (the triple-stroke
/// norm of `P − P₀`), `rhs = ||∇P⊕||_p + ||∇P⊖||_p`.
pub fn verify_poincare(
    p: &Polynomial,
    params: &SobolevParams,
    opts: &EvalOptions,
) -> Result<RatioReport> {
    if params.m != 1 {
        return Err(Error::InvalidParameter(format!(
            "first-order check needs m = 1, got {}",
            params.m
        )));
    }
    check_dim(p, params)?;
    let d = p.decompose();
    let lhs_plus = lq_quasinorm(&d.plus, params.p_star, opts)?.value;
    let lhs_minus = lq_quasinorm(&d.minus, params.p_star, opts)?.value;
    let g = gradient_triple_norm(p, params.p, opts)?;
    let parts = SignParts {
        lhs_plus,
        lhs_minus,
        rhs_plus: g.plus.value,
        rhs_minus: g.minus.value,
    };
    Ok(RatioReport::new(
        params,
        p,
        lhs_plus + lhs_minus,
        g.total,
        Some(parts),
    ))
}

/// Order-`m` inequality: `lhs = |||P − P_{m−1}|||_{p*}`, `rhs = |||∇^m P|||_p`.
pub fn verify_higher(
    p: &Polynomial,
    params: &SobolevParams,
    opts: &EvalOptions,
) -> Result<RatioReport> {
    check_dim(p, params)?;
    let (_, rest) = p.truncate_degree(params.m)?;
    let lhs = triple_stroke_norm(&rest, params.p_star, opts)?;
    let g = m_gradient_triple_norm(p, params.p, params.m, opts)?;
    let parts = SignParts {
        lhs_plus: lhs.plus.value,
        lhs_minus: lhs.minus.value,
        rhs_plus: g.plus.value,
        rhs_minus: g.minus.value,
    };
    Ok(RatioReport::new(params, p, lhs.total, g.total, Some(parts)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    #[serde(flatten)]
    pub report: RatioReport,
    /// `|||P|||_p`, the zeroth-order part of the right side.
    pub norm_p: f64,
    /// `|||∇P|||_p`.
    pub gradient_p: f64,
    /// `|||P₀|||_{p*} = |||P₀|||_p`.
    pub constant_norm_equal: bool,
    /// `|||P₀|||_p ≤ |||P|||_p`.
    pub constant_dominated: bool,
}

/// Embedding inequality: `lhs = |||P|||_{p*}`, `rhs = |||P|||_p + |||∇P|||_p`.
pub fn verify_embedding(
    p: &Polynomial,
    params: &SobolevParams,
    opts: &EvalOptions,
) -> Result<EmbeddingReport> {
    if params.m != 1 {
        return Err(Error::InvalidParameter(format!(
            "embedding check needs m = 1, got {}",
            params.m
        )));
    }
    check_dim(p, params)?;
    let lhs = triple_stroke_norm(p, params.p_star, opts)?;
    let norm_p = triple_stroke_norm(p, params.p, opts)?;
    let grad = gradient_triple_norm(p, params.p, opts)?;
    let constant = Polynomial::constant(p.dim(), p.constant_term());
    let c_star = triple_stroke_norm(&constant, params.p_star, opts)?.total;
    let c_p = triple_stroke_norm(&constant, params.p, opts)?.total;
    Ok(EmbeddingReport {
        report: RatioReport::new(params, p, lhs.total, norm_p.total + grad.total, None),
        norm_p: norm_p.total,
        gradient_p: grad.total,
        constant_norm_equal: c_star == c_p,
        constant_dominated: c_p <= norm_p.total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediantCheck {
    pub ratio: Option<f64>,
    pub ratio_plus: Option<f64>,
    pub ratio_minus: Option<f64>,
    /// `max(ratio(P⊕), ratio(P⊖)) − ratio(P)`; `None` for constants.
    pub margin: Option<f64>,
}

/// Compares `ratio(P)` with the ratios of its sign parts, each evaluated as a
/// polynomial in its own right.
pub fn mediant_reduction_check(
    p: &Polynomial,
    params: &SobolevParams,
    opts: &EvalOptions,
) -> Result<MediantCheck> {
    let whole = verify_higher(p, params, opts)?;
    let d = p.decompose();
    let score = |q: &Polynomial| -> Result<Option<f64>> {
        if q.is_zero() {
            return Ok(None);
        }
        Ok(verify_higher(q, params, opts)?.ratio)
    };
    let ratio_plus = score(&d.plus)?;
    let ratio_minus = score(&d.minus)?;
    let best = match (ratio_plus, ratio_minus) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    let margin = match (whole.ratio, best) {
        (Some(r), Some(b)) => Some(b - r),
        _ => None,
    };
    Ok(MediantCheck {
        ratio: whole.ratio,
        ratio_plus,
        ratio_minus,
        margin,
    })
}
