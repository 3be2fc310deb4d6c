//! Seeded random polynomials.
//!
//! Sample `i` of a configuration is drawn from its own ChaCha8 stream
//! `(seed, i)`, so any sample can be regenerated without replaying earlier ones
//! and batches may be evaluated in any order.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    Mixed,
    PositiveOnly,
}

/// Distribution of coefficient magnitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CoefDist {
    /// Uniform on `[−1, 1] \ {0}` (magnitude uniform on `(0, 1]`).
    SymmetricUniform,
    /// Magnitude `10^{-u}` with `u` uniform on `[0, decades)`.
    LogUniform { decades: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub dim: usize,
    /// Smallest degree of a sampled monomial; 0 allows a constant term.
    pub min_degree: u32,
    pub max_degree: u32,
    pub support_size: usize,
    pub coefficients: CoefDist,
    pub sign_mode: SignMode,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(dim: usize, max_degree: u32, support_size: usize, seed: u64) -> Self {
        SamplerConfig {
            dim,
            min_degree: 0,
            max_degree,
            support_size,
            coefficients: CoefDist::SymmetricUniform,
            sign_mode: SignMode::Mixed,
            seed,
        }
    }

    pub fn positive_only(mut self) -> Self {
        self.sign_mode = SignMode::PositiveOnly;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("sampler dimension must be >= 1".into()));
        }
        if self.max_degree == 0 || self.min_degree > self.max_degree {
            return Err(Error::InvalidParameter(format!(
                "invalid degree window [{}, {}]",
                self.min_degree, self.max_degree
            )));
        }
        if self.support_size == 0 {
            return Err(Error::InvalidParameter("support size must be >= 1".into()));
        }
        if let CoefDist::LogUniform { decades } = self.coefficients {
            if !(decades > 0.0 && decades.is_finite()) {
                return Err(Error::InvalidParameter("decades must be positive".into()));
            }
        }
        Ok(())
    }
}

/// RNG for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sample `index` of the configuration.
pub fn sample_nth(cfg: &SamplerConfig, index: u64) -> Result<Polynomial> {
    cfg.validate()?;
    let pool = MultiIndex::all_in_degree_range(cfg.dim, cfg.min_degree, cfg.max_degree);
    let mut rng = stream_rng(cfg.seed, index);
    let amount = cfg.support_size.min(pool.len());
    let mut picks = index::sample(&mut rng, pool.len(), amount).into_vec();
    picks.sort_unstable();
    let terms = picks.into_iter().map(|k| {
        let magnitude = match cfg.coefficients {
            // 1 - U[0,1) lies in (0, 1]
            CoefDist::SymmetricUniform => 1.0 - rng.gen::<f64>(),
            CoefDist::LogUniform { decades } => 10f64.powf(-decades * rng.gen::<f64>()),
        };
        let sign = match cfg.sign_mode {
            SignMode::PositiveOnly => 1.0,
            SignMode::Mixed => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        (pool[k].clone(), sign * magnitude)
    });
    Polynomial::from_terms(cfg.dim, terms.collect::<Vec<_>>())
}

/// Sample 0 of the configuration.
pub fn sample_polynomial(cfg: &SamplerConfig) -> Result<Polynomial> {
    sample_nth(cfg, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::to_json_string;

    #[test]
    fn same_seed_same_polynomial() {
        let cfg = SamplerConfig::new(3, 6, 5, 99);
        let a = sample_nth(&cfg, 17).unwrap();
        let b = sample_nth(&cfg, 17).unwrap();
        assert_eq!(to_json_string(&a), to_json_string(&b));
        assert_ne!(a, sample_nth(&cfg, 18).unwrap());
    }

    #[test]
    fn positive_only_has_no_negative_part() {
        let cfg = SamplerConfig::new(2, 5, 6, 3).positive_only();
        for i in 0..50 {
            assert!(sample_nth(&cfg, i).unwrap().decompose().minus.is_zero());
        }
    }

    #[test]
    fn support_size_respected() {
        let cfg = SamplerConfig::new(2, 4, 7, 1);
        for i in 0..50 {
            assert_eq!(sample_nth(&cfg, i).unwrap().len(), 7);
        }
        // only 3 monomials of degree exactly 1..=1 in N=3
        let mut small = SamplerConfig::new(3, 1, 10, 1);
        small.min_degree = 1;
        assert_eq!(sample_nth(&small, 0).unwrap().len(), 3);
    }

    #[test]
    fn degree_window_and_magnitudes() {
        let mut cfg = SamplerConfig::new(2, 3, 4, 5);
        cfg.min_degree = 2;
        cfg.coefficients = CoefDist::LogUniform { decades: 3.0 };
        for i in 0..30 {
            let p = sample_nth(&cfg, i).unwrap();
            for (a, c) in p.terms() {
                assert!((2..=3).contains(&a.degree()));
                assert!(c.abs() <= 1.0 && c.abs() > 1e-3);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(sample_polynomial(&SamplerConfig::new(2, 0, 3, 1)).is_err());
        assert!(sample_polynomial(&SamplerConfig::new(2, 3, 0, 1)).is_err());
    }
}
