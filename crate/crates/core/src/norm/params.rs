//! Exponent bookkeeping: `p* = N p / (N − m p)` and the admissible window.
//!
//! Exponents arrive as doubles, but the window boundary `p = N/(N+1)` and the
//! identity `p* = 1` there must hold exactly. An incoming `p` is therefore read
//! as the simplest fraction (denominator at most [`MAX_SNAP_DENOMINATOR`])
//! whose nearest double is `p`, so `0.75`, `2.0/3.0` and `0.9` become `3/4`,
//! `2/3` and `9/10`. All window comparisons and `p*` are computed on that
//! fraction and only then rounded.
//!
//! Some texts write the first-order exponent as `N/(N − p)`; that expression
//! does not land in `[1, N/(N−1))` on `[N/(N+1), 1)` and is not used here.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::exact::{rational_from_f64, rational_to_f64};
use crate::error::{Error, Result};

pub const MAX_SNAP_DENOMINATOR: i64 = 1_000_000;

/// Simplest fraction with denominator `≤ MAX_SNAP_DENOMINATOR` that rounds to
/// `x`, or the exact binary value of `x` if there is none.
pub fn snap_rational(x: f64) -> BigRational {
    let exact = rational_from_f64(x);
    let limit = BigInt::from(MAX_SNAP_DENOMINATOR);
    // continued-fraction convergents h/k of the exact value
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    loop {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > limit {
            return exact;
        }
        let candidate = BigRational::new(h2.clone(), k2.clone());
        if rational_to_f64(&candidate) == x {
            return candidate;
        }
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return exact;
        }
        rest = frac.recip();
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
}

/// `p* = N p / (N − m p)` in exact arithmetic.
pub fn sobolev_exponent_exact(dim: usize, p: &BigRational, m: u32) -> Result<BigRational> {
    check_basic(dim, m)?;
    if !p.is_positive() {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    let n = BigRational::from_integer(BigInt::from(dim));
    let mr = BigRational::from_integer(BigInt::from(m));
    let den = &n - &mr * p;
    if !den.is_positive() {
        return Err(Error::OutOfWindow(format!(
            "N - m p = {den} is not positive (N={dim}, m={m}, p={p}); no Sobolev exponent"
        )));
    }
    Ok(&n * p / den)
}

/// `p* = N p / (N − m p)`, rounded once from the exact value.
pub fn sobolev_exponent(dim: usize, p: f64, m: u32) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be positive, got {p}")));
    }
    sobolev_exponent_exact(dim, &snap_rational(p), m).map(|r| rational_to_f64(&r))
}

fn check_basic(dim: usize, m: u32) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("order m must be at least 1".into()));
    }
    Ok(())
}

/// Where `(N, p, m)` sits relative to the hypothesis window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
    /// `N/(N+1)`.
    pub p_lower: f64,
    pub p_star: f64,
    pub p_star_exact: String,
    pub lower_ok: bool,
    /// `p < 1`, the strict first-order regime.
    pub below_one: bool,
    /// `p ≤ 1`, accepted for `m ≥ 2`.
    pub at_most_one: bool,
    pub p_star_at_least_one: bool,
    pub in_window: bool,
    pub notes: Vec<String>,
}

/// Validated exponent triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub dim: usize,
    pub p: f64,
    pub m: u32,
    pub p_star: f64,
}

impl SobolevParams {
    /// Requires `N ≥ 1`, `m ≥ 1`, `p > 0` and `N − m p > 0`; the admissible
    /// window itself is reported by [`SobolevParams::window`].
    pub fn new(dim: usize, p: f64, m: u32) -> Result<Self> {
        let p_star = sobolev_exponent(dim, p, m)?;
        Ok(SobolevParams { dim, p, m, p_star })
    }

    /// Like [`SobolevParams::new`] but rejects triples outside the window.
    pub fn in_window(dim: usize, p: f64, m: u32) -> Result<Self> {
        let params = SobolevParams::new(dim, p, m)?;
        let w = params.window();
        if !w.in_window {
            return Err(Error::OutOfWindow(format!(
                "(N={dim}, p={p}, m={m}) is outside the admissible window: {}",
                w.notes.join("; ")
            )));
        }
        Ok(params)
    }

    /// `p = N/(N+1)`, where `p* = 1`.
    pub fn lower_boundary(dim: usize) -> Result<Self> {
        SobolevParams::new(dim, dim as f64 / (dim as f64 + 1.0), 1)
    }

    pub fn p_rational(&self) -> BigRational {
        snap_rational(self.p)
    }

    pub fn window(&self) -> WindowCheck {
        let p = self.p_rational();
        let n = BigInt::from(self.dim);
        let lower = BigRational::new(n.clone(), n + 1);
        let one = BigRational::one();
        let p_star = sobolev_exponent_exact(self.dim, &p, self.m)
            .expect("validated at construction");
        let lower_ok = p >= lower;
        let below_one = p < one;
        let at_most_one = p <= one;
        let p_star_at_least_one = p_star >= one;
        let mut notes = Vec::new();
        if !lower_ok {
            notes.push(format!("p = {p} is below N/(N+1) = {lower}"));
        }
        let in_window = if self.m == 1 {
            if !below_one {
                notes.push(format!("p = {p} must be strictly below 1 for first order"));
            }
            lower_ok && below_one && p_star_at_least_one
        } else {
            if !at_most_one {
                notes.push(format!("p = {p} exceeds 1"));
            } else if !below_one {
                notes.push("p = 1 is outside the strict p < 1 regime".into());
            }
            lower_ok && at_most_one && p_star_at_least_one
        };
        WindowCheck {
            p_lower: rational_to_f64(&lower),
            p_star: self.p_star,
            p_star_exact: format!("{}/{}", p_star.numer(), p_star.denom()),
            lower_ok,
            below_one,
            at_most_one,
            p_star_at_least_one,
            in_window,
            notes,
        }
    }
}

impl fmt::Display for SobolevParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} p={} m={} p*={}",
            self.dim, self.p, self.m, self.p_star
        )
    }
}
