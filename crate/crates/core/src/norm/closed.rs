//! Closed forms for monomials on the unit cube.

use crate::poly::MultiIndex;

/// `∫_{(0,1)^N} (x^α)^q = ∏_j 1/(q α_j + 1)`.
pub fn monomial_power_integral(alpha: &MultiIndex, q: f64) -> f64 {
    alpha
        .entries()
        .iter()
        .filter(|&&a| a > 0)
        .map(|&a| 1.0 / (q * a as f64 + 1.0))
        .product()
}

/// `||x^α||_{L^q(Q₀)} = ∏_j (q α_j + 1)^{-1/q}`; zero exponents contribute 1.
pub fn monomial_norm_closed(alpha: &MultiIndex, q: f64) -> f64 {
    monomial_power_integral(alpha, q).powf(1.0 / q)
}

/// `Σ_{j: α_j ≥ 1} α_j^p (pα_j + 1) / (p(α_j − 1) + 1)`, the gradient sum with
/// the common factor `∏_i (pα_i + 1)^{-1}` pulled out.
pub(crate) fn gradient_sum(alpha: &MultiIndex, p: f64) -> f64 {
    alpha
        .entries()
        .iter()
        .filter(|&&a| a > 0)
        .map(|&a| {
            let a = a as f64;
            a.powf(p) * (p * a + 1.0) / (p * (a - 1.0) + 1.0)
        })
        .sum()
}

/// `||∇x^α||_{L^p(Q₀)} = (Σ_j ||∂_j x^α||_p^p)^{1/p}`:
///
/// `[Σ_{j: α_j≥1} α_j^p (pα_j+1)/(p(α_j−1)+1)]^{1/p} · ∏_i (pα_i+1)^{−1/p}`.
///
/// The `j`-th summand comes from `∫ (α_j x^{α−e_j})^p`, whose `j`-th axis
/// factor is `1/(p(α_j−1)+1)`, finite also at `α_j = 1`. Returns 0 for the
/// constant monomial.
pub fn monomial_gradient_norm_closed(alpha: &MultiIndex, p: f64) -> f64 {
    if alpha.is_zero() {
        return 0.0;
    }
    (gradient_sum(alpha, p) * monomial_power_integral(alpha, p)).powf(1.0 / p)
}
