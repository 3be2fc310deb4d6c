//! Inequality checks, constant estimation and random polynomial generation.

pub mod proof;
pub mod ratio;
pub mod sampler;
pub mod search;

pub use ratio::{
    mediant_reduction_check, poly_id, verify_embedding, verify_higher, verify_poincare,
    EmbeddingReport, MediantCheck, RatioReport, SignParts,
};
pub use sampler::{sample_nth, sample_polynomial, CoefDist, SamplerConfig, SignMode};
pub use search::{cell_seed, estimate_constant, sweep, sweep_cell, ConstantEstimate, SearchConfig, SweepCell};
