//! Plain Monte Carlo estimate of `∫_{(0,1)^N} f^q`, used as an independent
//! check on the quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{QuadMethod, QuadResult, RngProvenance};
use crate::error::{Error, Result};
use crate::poly::{Polynomial, Sign};

/// Generator identifier recorded in provenance.
pub const GENERATOR: &str = "chacha8";

pub fn integrate_power_mc(f: &Polynomial, q: f64, n: u64, seed: u64) -> Result<QuadResult> {
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent q={q} must be positive")));
    }
    let flip = match f.sign() {
        Sign::Mixed => return Err(Error::MixedSigns),
        Sign::Negative => true,
        _ => false,
    };
    let g = if flip { f.neg() } else { f.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; f.dim()];
    // Welford running mean / variance
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        for xj in x.iter_mut() {
            *xj = rng.gen::<f64>();
        }
        let v = g.evaluate(&x)?.max(0.0).powf(q);
        let k = (i + 1) as f64;
        let d = v - mean;
        mean += d / k;
        m2 += d * (v - mean);
    }
    let var = m2 / (n - 1) as f64;
    Ok(QuadResult {
        value: mean,
        err_estimate: (var / n as f64).sqrt(),
        method: QuadMethod::MonteCarlo,
        work: n,
        rng: Some(RngProvenance {
            algorithm: GENERATOR.to_string(),
            seed,
        }),
    })
}
