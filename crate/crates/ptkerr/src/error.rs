use thiserror::Error;

use crate::params::Regime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation `{op}` is not defined in the {regime:?} regime")]
    Regime { op: &'static str, regime: Regime },

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("degenerate normalization: {0}")]
    Degenerate(String),

    #[error("truncation exceeded at t = {t}: leakage {leakage:e} above {threshold:e}")]
    Truncation { t: f64, leakage: f64, threshold: f64 },

    #[error("horizon too long for truncation: e^(2 Re(lambda) t)(|alpha|^2 + 1) = {required} > n_a/4 = {allowed}")]
    Horizon { required: f64, allowed: f64 },

    #[error("time step unstable: dt * bound = {0} > 2.5")]
    Stability(f64),

    #[error("coherent state tail mass {tail:e} too heavy for dimension {dim}")]
    TailMass { tail: f64, dim: usize },

    #[error("trajectory diverged at t = {0}")]
    Divergence(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
