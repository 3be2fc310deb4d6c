//! Numerical laboratory for triple-stroke quasi-norms of polynomials on the
//! unit cube `(0,1)^N` and the Poincaré / Sobolev-type inequalities they
//! satisfy for exponents `p < 1`.

pub mod error;
pub mod lab;
pub mod norm;
pub mod poly;
pub mod report;

pub use error::{Error, Result};
