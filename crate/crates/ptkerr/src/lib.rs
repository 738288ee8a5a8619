//! Quantum dynamics of two coupled waveguides with balanced gain and loss and
//! a Kerr nonlinearity in the lossy guide.
//!
//! * [`params`]: rates, regime classification, spectral constants.
//! * [`linear`]: exact linear-coupler means, commutators and noise occupations.
//! * [`nonlinear`]: reservoir-averaged closed forms for the broken regime,
//!   the first-order correction for the symmetric regime, and the D3 witness.
//! * [`meanfield`]: classical RK4 baseline.
//! * [`oracle`]: truncated-Fock Lindblad integration used as ground truth.

pub mod error;
pub mod linear;
pub mod meanfield;
pub mod moments;
pub mod nonlinear;
pub mod numerics;
pub mod oracle;
pub mod params;

pub use error::{Error, Result};
pub use moments::{MomentSet, TimeSeries};
pub use params::{derive_constants, CouplerParams, DerivedConstants, Regime};

pub use num_complex::Complex64;
