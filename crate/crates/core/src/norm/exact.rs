//! Exact rational integration of small integer powers of polynomials.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, Polynomial};

/// Largest expanded term count allowed when forming `f^k`.
pub const EXPANSION_BUDGET: usize = 200_000;

type RationalPoly = BTreeMap<MultiIndex, BigRational>;

/// Exact binary value of a finite double as a rational.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coefficient")
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `num/den` string form.
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn to_rational(f: &Polynomial) -> RationalPoly {
    f.terms()
        .map(|(a, c)| (a.clone(), rational_from_f64(c)))
        .collect()
}

fn multiply(a: &RationalPoly, b: &RationalPoly, budget: usize) -> Result<RationalPoly> {
    let bound = a.len().saturating_mul(b.len());
    if bound > budget {
        return Err(Error::ExpansionBudget {
            terms: bound,
            budget,
        });
    }
    let mut out = RationalPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ea.add(eb);
            let prod = ca * cb;
            let slot = out.entry(e).or_insert_with(BigRational::zero);
            *slot += prod;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// `∫_{(0,1)^N} x^α = ∏_j 1/(α_j + 1)`.
fn monomial_integral(alpha: &MultiIndex) -> BigRational {
    let den = alpha
        .entries()
        .iter()
        .fold(BigInt::one(), |acc, &a| acc * BigInt::from(a + 1));
    BigRational::new(BigInt::one(), den)
}

/// Exact `∫_{(0,1)^N} f^k` for `k ∈ {1, 2, 3}`, taking every coefficient at
/// its exact binary value.
pub fn integrate_exact_integer(f: &Polynomial, k: u32) -> Result<BigRational> {
    integrate_exact_integer_with_budget(f, k, EXPANSION_BUDGET)
}

pub fn integrate_exact_integer_with_budget(
    f: &Polynomial,
    k: u32,
    budget: usize,
) -> Result<BigRational> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "exact integration supports powers 1..=3, got {k}"
        )));
    }
    let base = to_rational(f);
    let mut acc = base.clone();
    for _ in 1..k {
        acc = multiply(&acc, &base, budget)?;
    }
    Ok(acc
        .iter()
        .fold(BigRational::zero(), |s, (a, c)| s + c * monomial_integral(a)))
}
