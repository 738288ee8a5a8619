//! Exact analytics of the coupler without Kerr term.
//!
//! The propagator `G(s) = exp(M s)` with `M = [[kappa, -iJ], [-iJ, -kappa]]`
//! is written kernel by kernel as `g e^{lambda s} + d e^{-lambda s}`. Every
//! coefficient is regular at `J = 0`, so no separate limit branch is needed.
//! The reservoir enters as `sqrt(2 kappa) int G_xa xi_a^dag + G_xb xi_b`, with
//! only `<xi_a xi_a^dag> = delta` surviving at zero temperature.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::MomentSet;
use crate::numerics::{adaptive_simpson, phi1, SimpsonOptions};
use crate::params::DerivedConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    A,
    B,
}

impl Channel {
    fn idx(self) -> usize {
        match self {
            Channel::A => 0,
            Channel::B => 1,
        }
    }
}

/// `g e^{lambda s} + d e^{-lambda s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub grow: Complex64,
    pub decay: Complex64,
}

impl Kernel {
    pub fn eval(&self, lambda: Complex64, s: f64) -> Complex64 {
        self.grow * (lambda * s).exp() + self.decay * (-lambda * s).exp()
    }

    fn terms(&self, lambda: Complex64) -> [(Complex64, Complex64); 2] {
        [(self.grow, lambda), (self.decay, -lambda)]
    }
}

/// Propagator kernels `G[x][y]`, `x, y` in {A, B}.
pub fn kernels(dc: &DerivedConstants) -> [[Kernel; 2]; 2] {
    let two_l = 2.0 * dc.lambda;
    let gaa = Kernel { grow: dc.eta2 / two_l, decay: dc.eta1 / two_l };
    let ij = Complex64::new(0.0, dc.j);
    let gab = Kernel { grow: -ij / two_l, decay: ij / two_l };
    let gbb = Kernel { grow: dc.eta1 / two_l, decay: dc.eta2 / two_l };
    [[gaa, gab], [gab, gbb]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModeMeans {
    pub mean_a: Complex64,
    pub mean_b: Complex64,
}

/// Means of the gain/loss modes for a coherent input `alpha0` in channel A.
pub fn linear_mean_modes(dc: &DerivedConstants, alpha0: Complex64, t: f64) -> Result<LinearModeMeans> {
    dc.require_analytic("linear_mean_modes")?;
    let g = kernels(dc);
    Ok(LinearModeMeans {
        mean_a: g[0][0].eval(dc.lambda, t) * alpha0,
        mean_b: g[1][0].eval(dc.lambda, t) * alpha0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    /// `[A(t), A^dag(t')]`
    AA,
    /// `[A(t), B^dag(t')]`
    AB,
    /// `[B(t), B^dag(t')]`
    BB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommutatorVariant {
    Full,
    /// Only the `e^{lambda |t - t'|}` component; broken regime only.
    GrowingOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommutatorKind {
    pub pair: Pair,
    pub variant: CommutatorVariant,
}

/// `int_0^m c e^{mu1 (t - s) + mu2 (t' - s)} ds` evaluated without overflow of
/// the intermediate exponentials.
fn shifted_exp_integral(mu1: Complex64, mu2: Complex64, t: f64, tp: f64, m: f64) -> Complex64 {
    let sigma = mu1 + mu2;
    if sigma.re >= 0.0 {
        (mu1 * t + mu2 * tp).exp() * m * phi1(-sigma * m)
    } else {
        (mu1 * (t - m) + mu2 * (tp - m)).exp() * m * phi1(sigma * m)
    }
}

fn pair_rows(pair: Pair) -> (usize, usize) {
    match pair {
        Pair::AA => (0, 0),
        Pair::AB => (0, 1),
        Pair::BB => (1, 1),
    }
}

pub fn commutator(dc: &DerivedConstants, kind: CommutatorKind, t: f64, t_prime: f64) -> Result<Complex64> {
    dc.require_analytic("commutator")?;
    if t < 0.0 || t_prime < 0.0 {
        return Err(Error::InvalidParameter("negative time".into()));
    }
    match kind.variant {
        CommutatorVariant::Full => Ok(full_commutator(dc, kind.pair, t, t_prime)),
        CommutatorVariant::GrowingOnly => {
            dc.require_broken("commutator(GROWING_ONLY)")?;
            let l = dc.lambda;
            let e = (l * (t - t_prime).abs()).exp();
            let four_l2 = 4.0 * l * l;
            let j2 = dc.j * dc.j;
            let e22 = dc.eta2 * dc.eta2;
            let pref = match kind.pair {
                Pair::BB => dc.zeta1,
                // i (eta2/J) zeta1, rewritten to stay finite at J = 0
                Pair::AB => Complex64::new(0.0, dc.j) * (e22 + j2) / (four_l2 * dc.eta2),
                Pair::AA => (e22 + j2) / four_l2,
            };
            Ok(pref * e)
        }
    }
}

fn full_commutator(dc: &DerivedConstants, pair: Pair, t: f64, tp: f64) -> Complex64 {
    let g = kernels(dc);
    let l = dc.lambda;
    let (x, y) = pair_rows(pair);
    let mut c = g[x][0].eval(l, t) * g[y][0].eval(l, tp).conj() + g[x][1].eval(l, t) * g[y][1].eval(l, tp).conj();
    let m = t.min(tp);
    if m > 0.0 && dc.kappa > 0.0 {
        let mut integral = Complex64::new(0.0, 0.0);
        // [xi_a^dag, xi_a] = -delta, [xi_b, xi_b^dag] = +delta
        for (src, sign) in [(0usize, -1.0), (1usize, 1.0)] {
            for (c1, mu1) in g[x][src].terms(l) {
                for (c2, mu2) in g[y][src].terms(l) {
                    let coeff = c1 * c2.conj();
                    if coeff.norm() == 0.0 {
                        continue;
                    }
                    integral += sign * coeff * shifted_exp_integral(mu1, mu2.conj(), t, tp, m);
                }
            }
        }
        c += 2.0 * dc.kappa * integral;
    }
    c
}

/// Spontaneous-emission occupation `<dC^dag dC>(t) = 2 kappa int_0^t |G_Ca(s)|^2 ds`.
pub fn noise_occupation(dc: &DerivedConstants, channel: Channel, t: f64) -> Result<f64> {
    dc.require_analytic("noise_occupation")?;
    if t <= 0.0 || dc.kappa == 0.0 {
        return Ok(0.0);
    }
    let g = kernels(dc)[channel.idx()][0];
    let l = dc.lambda;
    let mut acc = Complex64::new(0.0, 0.0);
    for (c1, mu1) in g.terms(l) {
        for (c2, mu2) in g.terms(l) {
            let mu = mu1 + mu2.conj();
            acc += c1 * c2.conj() * t * phi1(mu * t);
        }
    }
    Ok((2.0 * dc.kappa * acc.re).max(0.0))
}

/// Quadrature evaluation of the same occupation; used to cross-check the
/// closed form.
pub fn noise_occupation_quadrature(dc: &DerivedConstants, channel: Channel, t: f64, rel_tol: f64) -> Result<f64> {
    dc.require_analytic("noise_occupation")?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let g = kernels(dc)[channel.idx()][0];
    let l = dc.lambda;
    let q = adaptive_simpson(
        |s| Complex64::new(g.eval(l, s).norm_sqr(), 0.0),
        0.0,
        t,
        SimpsonOptions { rel_tol, ..Default::default() },
    )?;
    Ok(2.0 * dc.kappa * q.value.re)
}

/// `(kappa/lambda) (J/2 lambda)^2 (e^{2 lambda tau} - 1)`; broken regime only.
pub fn sigma(dc: &DerivedConstants, tau: f64) -> Result<f64> {
    dc.require_broken("sigma")?;
    Ok(sigma_prefactor(dc) * (2.0 * dc.lambda.re * tau).exp_m1())
}

/// `(kappa/lambda)(J/2 lambda)^2`.
pub fn sigma_prefactor(dc: &DerivedConstants) -> f64 {
    let l = dc.lambda.re;
    let r = dc.j / (2.0 * l);
    dc.kappa / l * r * r
}

/// Full linear moment set: coherent means plus spontaneous occupations.
/// Reservoir cross-correlations `<dA dB>` and `<dB dB>` vanish.
pub fn linear_moments(dc: &DerivedConstants, alpha0: Complex64, t: f64) -> Result<MomentSet> {
    let m = linear_mean_modes(dc, alpha0, t)?;
    let na = noise_occupation(dc, Channel::A, t)?;
    let nb = noise_occupation(dc, Channel::B, t)?;
    let ab = m.mean_a * m.mean_b;
    Ok(MomentSet {
        mean_a: m.mean_a,
        mean_b: m.mean_b,
        n_a: m.mean_a.norm_sqr() + na,
        n_b: m.mean_b.norm_sqr() + nb,
        ab,
        adag_bdag: ab.conj(),
        bb: m.mean_b * m.mean_b,
    })
}
