//! System parameters, regime classification and the derived spectral constants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to decide `kappa == J`.
pub const EXCEPTIONAL_TOL: f64 = 1e-12;

/// Physical rates of the coupler.
///
/// `kappa` is the balanced gain/loss rate, `j` the inter-guide coupling and
/// `chi` the Kerr coefficient of the loss channel. `kappa = 0` is accepted so
/// that the lossless coupler and the bare Kerr medium stay reachable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplerParams {
    pub kappa: f64,
    pub j: f64,
    pub chi: f64,
    pub alpha0: Complex64,
}

impl CouplerParams {
    pub fn new(kappa: f64, j: f64, chi: f64, alpha0: Complex64) -> Result<Self> {
        let p = Self { kappa, j, chi, alpha0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.kappa.is_finite()
            && self.j.is_finite()
            && self.chi.is_finite()
            && self.alpha0.re.is_finite()
            && self.alpha0.im.is_finite();
        if !finite {
            return Err(Error::InvalidParameter("non-finite value".into()));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidParameter(format!("kappa = {} < 0", self.kappa)));
        }
        if self.j < 0.0 {
            return Err(Error::InvalidParameter(format!("J = {} < 0", self.j)));
        }
        if self.chi < 0.0 {
            return Err(Error::InvalidParameter(format!("chi = {} < 0", self.chi)));
        }
        Ok(())
    }

    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `kappa < J`: fields oscillate.
    PtSymmetric,
    /// `kappa > J`: one eigenmode grows as `e^(lambda t)`.
    Broken,
    /// `kappa == J` within [`EXCEPTIONAL_TOL`].
    Exceptional,
}

pub fn classify_regime(p: &CouplerParams) -> Regime {
    classify_with_tol(p.kappa, p.j, EXCEPTIONAL_TOL)
}

pub fn classify_with_tol(kappa: f64, j: f64, tol: f64) -> Regime {
    if kappa < j * (1.0 - tol) {
        Regime::PtSymmetric
    } else if kappa > j * (1.0 + tol) {
        Regime::Broken
    } else {
        Regime::Exceptional
    }
}

/// Spectral constants of the linear propagator.
///
/// `lambda` is the principal root of `kappa^2 - J^2`: real and nonnegative when
/// the symmetry is broken, `i*Omega` with `Omega > 0` otherwise. At the
/// exceptional point the zeta coefficients are NaN and every analytic
/// operation refuses to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub kappa: f64,
    pub j: f64,
    pub lambda: Complex64,
    pub eta1: Complex64,
    pub eta2: Complex64,
    pub zeta1: Complex64,
    pub zeta2: Complex64,
    pub regime: Regime,
}

pub fn derive_constants(p: &CouplerParams) -> DerivedConstants {
    derive_from_rates(p.kappa, p.j)
}

pub fn derive_from_rates(kappa: f64, j: f64) -> DerivedConstants {
    let regime = classify_with_tol(kappa, j, EXCEPTIONAL_TOL);
    // (kappa - J)(kappa + J) avoids the cancellation in kappa^2 - J^2.
    let disc = (kappa - j) * (kappa + j);
    let lambda = if disc >= 0.0 {
        Complex64::new(disc.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-disc).sqrt())
    };
    let eta2 = lambda + kappa;
    // lambda - kappa rewritten as -J^2/(lambda + kappa): no cancellation for J << kappa.
    let eta1 = if eta2.norm() > 0.0 { -(j * j) / eta2 } else { lambda - kappa };

    let (zeta1, zeta2) = if regime == Regime::Exceptional {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        (nan, nan)
    } else {
        let four_l2 = 4.0 * lambda * lambda;
        let e1sq = eta1 * eta1;
        let z1 = (e1sq + j * j) / four_l2;
        let z2 = (kappa / lambda) * (e1sq - j * j) / four_l2;
        (z1, z2)
    };

    DerivedConstants { kappa, j, lambda, eta1, eta2, zeta1, zeta2, regime }
}

impl DerivedConstants {
    pub fn require_analytic(&self, op: &'static str) -> Result<()> {
        if self.regime == Regime::Exceptional {
            return Err(Error::Regime { op, regime: self.regime });
        }
        Ok(())
    }

    pub fn require_broken(&self, op: &'static str) -> Result<()> {
        if self.regime != Regime::Broken {
            return Err(Error::Regime { op, regime: self.regime });
        }
        Ok(())
    }

    /// Real growth rate; only meaningful in the broken regime.
    pub fn lambda_re(&self) -> f64 {
        self.lambda.re
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn decoupled_limit() {
        let dc = derive_from_rates(1.0, 0.0);
        assert_eq!(dc.regime, Regime::Broken);
        assert!(close(dc.lambda, 1.0.into(), 1e-15));
        assert_eq!(dc.eta1.norm(), 0.0);
        assert!(close(dc.eta2, 2.0.into(), 1e-15));
        assert_eq!(dc.zeta1.norm(), 0.0);
        assert_eq!(dc.zeta2.norm(), 0.0);
    }

    #[test]
    fn broken_values() {
        let dc = derive_from_rates(1.0, 0.6);
        assert!(close(dc.lambda, 0.8.into(), 1e-15));
        assert!(close(dc.eta1, (-0.2).into(), 1e-14));
        assert!(close(dc.eta2, 1.8.into(), 1e-15));
        assert!(close(dc.zeta1, 0.15625.into(), 1e-14));
        assert!(close(dc.zeta2, (-0.15625).into(), 1e-14));
        for z in [dc.lambda, dc.eta1, dc.eta2, dc.zeta1, dc.zeta2] {
            assert!(z.im.abs() < 1e-14);
        }
    }

    #[test]
    fn pt_values() {
        let dc = derive_from_rates(0.6, 1.0);
        assert_eq!(dc.regime, Regime::PtSymmetric);
        assert!(close(dc.lambda, Complex64::new(0.0, 0.8), 1e-15));
        assert!(close(dc.eta1, Complex64::new(-0.6, 0.8), 1e-14));
        assert!(close(dc.eta2, Complex64::new(0.6, 0.8), 1e-15));
        assert!(close(dc.zeta1, Complex64::new(-0.28125, 0.375), 1e-14));
        assert!(close(dc.zeta2, Complex64::new(0.28125, -0.375), 1e-14));
    }

    #[test]
    fn regimes() {
        let p = |k, j| CouplerParams::new(k, j, 0.0, 1.0.into()).unwrap();
        assert_eq!(classify_regime(&p(1.0, 0.1)), Regime::Broken);
        assert_eq!(classify_regime(&p(0.5, 1.0)), Regime::PtSymmetric);
        assert_eq!(classify_regime(&p(1.0, 1.0)), Regime::Exceptional);
        assert_eq!(classify_regime(&p(1.0, 1.0 + 1e-14)), Regime::Exceptional);
        assert_eq!(classify_regime(&p(1.0, 1.0 + 1e-9)), Regime::PtSymmetric);
    }

    #[test]
    fn exceptional_blocks_analytics() {
        let dc = derive_from_rates(1.0, 1.0);
        assert!(dc.require_analytic("x").is_err());
        assert!(dc.zeta1.re.is_nan());
    }

    #[test]
    fn rejects_negative_rates() {
        assert!(CouplerParams::new(-1.0, 0.5, 0.0, 1.0.into()).is_err());
        assert!(CouplerParams::new(1.0, -0.5, 0.0, 1.0.into()).is_err());
        assert!(CouplerParams::new(1.0, 0.5, -1e-3, 1.0.into()).is_err());
        assert!(CouplerParams::new(1.0, 0.5, f64::NAN, 1.0.into()).is_err());
    }

    #[test]
    fn bit_identical_repeat() {
        let a = derive_from_rates(0.731, 0.219);
        let b = derive_from_rates(0.731, 0.219);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
