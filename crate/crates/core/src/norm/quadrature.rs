//! Graded tensor-product Gauss–Legendre quadrature of `f^q` over `(0,1)^N`
//! for polynomials `f` with nonnegative coefficients.
//!
//! The mesh starts as the unit cube. Each refinement round bisects every
//! active box along the axis where halving changes the box integral the most.
//! Because `f` can only vanish on the faces `x_j = 0`, repeated bisection of
//! the boxes touching those faces produces meshes geometrically graded (ratio
//! 1/2) toward the faces where `f^q` loses smoothness, while boxes where the
//! integrand is smooth stop refining after one round. Iteration stops once two
//! successive levels agree to the relative tolerance and the geometric tail
//! implied by the last two differences is below it as well.

use super::gauss::GaussLegendre;
use super::{QuadMethod, QuadResult};
use crate::error::{Error, Result};
use crate::poly::{Polynomial, Sign};

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    /// Gauss–Legendre points per box per axis.
    pub order: usize,
    /// Relative agreement required between successive levels.
    pub tol: f64,
    /// Budget on the number of box rule applications.
    pub max_boxes: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            order: 12,
            tol: 1e-9,
            max_boxes: 200_000,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadConfig {
            tol,
            ..Default::default()
        }
    }
}

/// Boxes whose bisection changed the integral by more than this fraction of
/// `tol * |I| / leaves` keep refining. Dividing by the leaf count keeps the sum
/// of errors left in settled boxes below the tolerance.
const ACTIVE_FRACTION: f64 = 0.1;


/// Integrand `f(x)^q` with `f` given by nonnegative terms.
struct Integrand<'a> {
    dim: usize,
    q: f64,
    coefs: Vec<f64>,
    // exponents[t][j]
    exponents: Vec<&'a [u32]>,
    max_exp: Vec<u32>,
    rule: GaussLegendre,
}

/// Per-call scratch space reused across boxes.
struct Scratch {
    // factors[j][i * terms + t] = x_{j,i}^{alpha_tj}
    factors: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    partial: Vec<Vec<f64>>,
    powers: Vec<f64>,
}

impl<'a> Integrand<'a> {
    fn new(f: &'a Polynomial, q: f64, order: usize, flip: bool) -> Self {
        let dim = f.dim();
        let mut coefs = Vec::with_capacity(f.len());
        let mut exponents = Vec::with_capacity(f.len());
        let mut max_exp = vec![0u32; dim];
        for (a, c) in f.terms() {
            coefs.push(if flip { -c } else { c });
            exponents.push(a.entries());
            for (m, &e) in max_exp.iter_mut().zip(a.entries()) {
                *m = (*m).max(e);
            }
        }
        Integrand {
            dim,
            q,
            coefs,
            exponents,
            max_exp,
            rule: GaussLegendre::new(order),
        }
    }

    fn scratch(&self) -> Scratch {
        let n = self.rule.nodes.len();
        let t = self.coefs.len();
        Scratch {
            factors: vec![vec![0.0; n * t]; self.dim],
            weights: vec![vec![0.0; n]; self.dim],
            partial: vec![vec![0.0; t]; self.dim + 1],
            powers: Vec::new(),
        }
    }

    fn evaluations_per_box(&self) -> u64 {
        (self.rule.nodes.len() as u64).pow(self.dim as u32)
    }

    /// Tensor-product rule on the box `[lo, hi]`.
    fn box_integral(&self, lo: &[f64], hi: &[f64], s: &mut Scratch) -> f64 {
        let n = self.rule.nodes.len();
        let terms = self.coefs.len();
        if terms == 1 {
            return self.separable_box_integral(lo, hi);
        }
        for j in 0..self.dim {
            let h = hi[j] - lo[j];
            let fac = &mut s.factors[j];
            for i in 0..n {
                let x = lo[j] + h * self.rule.nodes[i];
                s.weights[j][i] = h * self.rule.weights[i];
                s.powers.clear();
                let mut v = 1.0;
                s.powers.push(v);
                for _ in 0..self.max_exp[j] {
                    v *= x;
                    s.powers.push(v);
                }
                for t in 0..terms {
                    fac[i * terms + t] = s.powers[self.exponents[t][j] as usize];
                }
            }
        }
        s.partial[0].copy_from_slice(&self.coefs);
        self.sweep(0, 1.0, s)
    }

    fn sweep(&self, depth: usize, w: f64, s: &mut Scratch) -> f64 {
        let n = self.rule.nodes.len();
        let terms = self.coefs.len();
        if depth + 1 == self.dim {
            let mut acc = 0.0;
            let (head, _) = s.partial.split_at(depth + 1);
            let partial = &head[depth];
            let fac = &s.factors[depth];
            for i in 0..n {
                let row = &fac[i * terms..(i + 1) * terms];
                let f: f64 = partial.iter().zip(row).map(|(a, b)| a * b).sum();
                acc += s.weights[depth][i] * f.powf(self.q);
            }
            return w * acc;
        }
        let mut acc = 0.0;
        for i in 0..n {
            {
                let (head, tail) = s.partial.split_at_mut(depth + 1);
                let src = &head[depth];
                let dst = &mut tail[0];
                let row = &s.factors[depth][i * terms..(i + 1) * terms];
                for t in 0..terms {
                    dst[t] = src[t] * row[t];
                }
            }
            let wi = s.weights[depth][i];
            acc += self.sweep(depth + 1, w * wi, s);
        }
        acc
    }

    /// For a single term the tensor rule factorizes into one-dimensional rules.
    fn separable_box_integral(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let c = self.coefs[0];
        let mut out = c.powf(self.q);
        for j in 0..self.dim {
            let h = hi[j] - lo[j];
            let e = self.q * self.exponents[0][j] as f64;
            let s: f64 = if e == 0.0 {
                h
            } else {
                self.rule
                    .nodes
                    .iter()
                    .zip(&self.rule.weights)
                    .map(|(t, w)| w * (lo[j] + h * t).powf(e))
                    .sum::<f64>()
                    * h
            };
            out *= s;
        }
        out
    }
}

struct Leaf {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    /// Change of the parent's integral when it was bisected into this leaf
    /// and its sibling; `None` once the leaf has settled.
    split_diff: Option<f64>,
}

/// `∫_{(0,1)^N} f^q` for sign-definite `f` (negative `f` is integrated as `-f`).
pub fn integrate_power(f: &Polynomial, q: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent q={q} must be positive")));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 || cfg.order == 0 {
        return Err(Error::InvalidParameter(
            "quadrature needs tol > 0 and order >= 1".into(),
        ));
    }
    let flip = match f.sign() {
        Sign::Zero => return Ok(QuadResult::zero(QuadMethod::GradedQuadrature)),
        Sign::Positive => false,
        Sign::Negative => true,
        Sign::Mixed => return Err(Error::MixedSigns),
    };
    let integrand = Integrand::new(f, q, cfg.order, flip);
    let dim = integrand.dim;
    let per_box = if integrand.coefs.len() == 1 {
        (dim * cfg.order) as u64
    } else {
        integrand.evaluations_per_box()
    };
    let mut scratch = integrand.scratch();

    let lo = vec![0.0; dim];
    let hi = vec![1.0; dim];
    let root = integrand.box_integral(&lo, &hi, &mut scratch);
    let mut leaves = vec![Leaf {
        lo,
        hi,
        value: root,
        split_diff: Some(f64::INFINITY),
    }];
    let mut boxes = 1usize;
    let mut previous = root;
    let mut last_difference = f64::INFINITY;

    loop {
        let mut next = Vec::with_capacity(leaves.len() + 8);
        for leaf in leaves {
            if leaf.split_diff.is_none() {
                next.push(leaf);
                continue;
            }
            if boxes + 2 * dim > cfg.max_boxes {
                return Err(Error::NonConvergence {
                    boxes,
                    last_difference,
                    tol: cfg.tol,
                });
            }
            let mut best: Option<(usize, f64, f64, f64)> = None;
            for j in candidate_axes(&leaf) {
                let (left_hi, right_lo) = halves(&leaf, j);
                let l = integrand.box_integral(&leaf.lo, &left_hi, &mut scratch);
                let r = integrand.box_integral(&right_lo, &leaf.hi, &mut scratch);
                boxes += 2;
                let d = (l + r - leaf.value).abs();
                if best.is_none_or(|(_, bd, _, _)| d > bd) {
                    best = Some((j, d, l, r));
                }
            }
            let (j, d, l, r) = best.expect("dim >= 1");
            let (left_hi, right_lo) = halves(&leaf, j);
            next.push(Leaf {
                lo: leaf.lo,
                hi: left_hi,
                value: l,
                split_diff: Some(d),
            });
            next.push(Leaf {
                lo: right_lo,
                hi: leaf.hi,
                value: r,
                split_diff: Some(d),
            });
        }
        leaves = next;

        let total: f64 = leaves.iter().map(|l| l.value).sum();
        let delta = (total - previous).abs();
        let previous_difference = std::mem::replace(&mut last_difference, delta);
        if converged(delta, previous_difference, cfg.tol * total.abs()) {
            return Ok(QuadResult {
                value: total,
                err_estimate: delta,
                method: QuadMethod::GradedQuadrature,
                work: boxes as u64 * per_box,
                rng: None,
            });
        }
        previous = total;

        let threshold = ACTIVE_FRACTION * cfg.tol * total.abs() / leaves.len() as f64;
        let any_active = leaves
            .iter()
            .any(|l| l.split_diff.is_some_and(|d| d > threshold));
        for leaf in leaves.iter_mut() {
            // If every change is individually small but they add up past the
            // tolerance, the whole last generation refines again.
            leaf.split_diff = leaf
                .split_diff
                .filter(|&d| !any_active || d > threshold);
        }
    }
}

/// Successive levels agree within `bound`, and so does the remaining error
/// extrapolated from the contraction rate `r = δ_k/δ_{k−1}`, `δ_k·r/(1−r)`.
/// Graded refinement of a corner box halves one axis per round, so `r` can be
/// close to 1 and the untouched tail then exceeds the last difference.
fn converged(delta: f64, previous_delta: f64, bound: f64) -> bool {
    if delta == 0.0 {
        return true;
    }
    if delta > bound {
        return false;
    }
    let r = delta / previous_delta;
    r < 1.0 && delta * r / (1.0 - r) <= bound
}

/// Axes worth testing for a bisection: those where the box touches a face
/// `x_j = 0` (the only place `f` can vanish) and the longest edge.
fn candidate_axes(leaf: &Leaf) -> Vec<usize> {
    let mut longest = 0;
    for j in 1..leaf.lo.len() {
        if leaf.hi[j] - leaf.lo[j] > leaf.hi[longest] - leaf.lo[longest] {
            longest = j;
        }
    }
    (0..leaf.lo.len())
        .filter(|&j| j == longest || leaf.lo[j] == 0.0)
        .collect()
}

fn halves(leaf: &Leaf, j: usize) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (leaf.lo[j] + leaf.hi[j]);
    let mut left_hi = leaf.hi.clone();
    left_hi[j] = mid;
    let mut right_lo = leaf.lo.clone();
    right_lo[j] = mid;
    (left_hi, right_lo)
}
