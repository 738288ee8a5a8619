//! Closed-form nonlinear observables.
//!
//! In the broken regime the growing mode is written `o2 = sqrt(zeta1) c` with
//! `[c, c^dag] = 1`, so every reservoir-averaged expectation reduces to the
//! coherent-state identity `<alpha| e^{i theta n} c^m |alpha> =
//! alpha^m exp(|alpha|^2 (e^{i theta} - 1))`. Only the `e^{+lambda t}`
//! components are kept; the dropped decaying parts shrink like `e^{-2 lambda t}`.
//!
//! In the symmetric regime the Kerr term is treated to first order in `chi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{
    commutator, linear_mean_modes, noise_occupation, sigma, sigma_prefactor, Channel, CommutatorKind,
    CommutatorVariant, Pair,
};
use crate::moments::MomentSet;
use crate::numerics::{adaptive_simpson, cisi_asymptotic, expm1c, phi1, phi2, SimpsonOptions};
use crate::params::{DerivedConstants, Regime};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    /// Reservoir-averaged dynamics.
    Noisy,
    /// Non-Hermitian effective Hamiltonian plus Kerr term, noise dropped.
    Noiseless,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseFunctions {
    /// Coefficient of the number operator of the normalized growing mode.
    pub theta: f64,
    /// Scalar phase from the averaged spontaneous occupation.
    pub s_scalar: f64,
    pub variant: Variant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMode {
    pub alpha_tilde: Complex64,
    pub zeta1: f64,
}

/// Options for the broken-regime closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormOptions {
    /// Add the explicit reservoir term EB1 to the noisy mean.
    pub include_eb1: bool,
    /// Add spontaneous occupations to the photon numbers used in moment sets.
    pub noise_photons: bool,
    /// Relative tolerance of the EB1 quadrature.
    pub eb1_rel_tol: f64,
}

impl Default for ClosedFormOptions {
    fn default() -> Self {
        Self { include_eb1: true, noise_photons: true, eb1_rel_tol: 1e-8 }
    }
}

impl ClosedFormOptions {
    /// Settings of the D3 pipeline: photon numbers keep only their main terms.
    pub fn d3() -> Self {
        Self { noise_photons: false, ..Self::default() }
    }
}

/// `<alpha| e^{i theta n} c^m |alpha>` for a coherent state.
pub fn coherent_phase_moment(alpha: Complex64, theta: Complex64, m: u32) -> Complex64 {
    alpha.powu(m) * (alpha.norm_sqr() * expm1c(I * theta)).exp()
}

/// `(-iJ/2 lambda) alpha0`, the amplitude multiplying `e^{lambda t}` in `<B>`.
pub fn growing_amplitude(dc: &DerivedConstants, alpha0: Complex64) -> Complex64 {
    Complex64::new(0.0, -dc.j) / (2.0 * dc.lambda) * alpha0
}

pub fn normalized_mode(dc: &DerivedConstants, alpha0: Complex64) -> Result<NormalizedMode> {
    dc.require_broken("normalized_mode")?;
    let e2 = dc.eta2.re;
    let j = dc.j;
    // o2/sqrt(zeta1) simplified; finite at J = 0
    let alpha_tilde = Complex64::new(0.0, -1.0) * alpha0 * (e2 / (e2 * e2 + j * j).sqrt());
    Ok(NormalizedMode { alpha_tilde, zeta1: dc.zeta1.re })
}

pub fn phase_functions(dc: &DerivedConstants, chi: f64, t: f64, variant: Variant) -> Result<PhaseFunctions> {
    dc.require_broken("phase_functions")?;
    let l = dc.lambda.re;
    let z1 = dc.zeta1.re;
    let z2 = dc.zeta2.re;
    Ok(match variant {
        Variant::Noisy => {
            let z = Complex64::new(2.0 * l * t, 0.0);
            // (e^{2 lt} - 1)/(2l) = t phi1(2lt);  (e^{2lt} - 1)/(2l) - t = t z phi2(z)
            let theta = z1 * z2 * chi * t * phi1(z).re;
            let s = z2 * chi * sigma_prefactor(dc) * t * (z * phi2(z)).re;
            PhaseFunctions { theta, s_scalar: s, variant }
        }
        Variant::Noiseless => {
            let theta = -z1 * z1 * chi * t * phi1(Complex64::new(4.0 * l * t, 0.0)).re;
            PhaseFunctions { theta, s_scalar: 0.0, variant }
        }
    })
}

fn phase_factor(r: f64, theta: f64) -> Complex64 {
    (r * expm1c(Complex64::new(0.0, theta))).exp()
}

/// Main term of the noisy mean of mode b.
pub fn eb0(dc: &DerivedConstants, chi: f64, alpha0: Complex64, t: f64) -> Result<Complex64> {
    let pf = phase_functions(dc, chi, t, Variant::Noisy)?;
    let nm = normalized_mode(dc, alpha0)?;
    let grow = (dc.lambda.re * t).exp() * growing_amplitude(dc, alpha0);
    Ok(Complex64::from_polar(1.0, pf.s_scalar) * grow * phase_factor(nm.alpha_tilde.norm_sqr(), pf.theta))
}

/// `int_0^t sigma(tau) e^{i theta(tau)} d tau` together with its quadrature
/// error estimate.
///
/// With `u = e^{2 lambda tau}` the integrand becomes `(K/2 lambda)(1 - 1/u)
/// e^{i omega (u - 1)}`. The quadrature runs in `v = ln u` up to the point
/// where `|omega|(u - 1)` reaches 64 rad; past it, the remainder is the exact
/// exponential integral minus a sine/cosine-integral difference.
pub fn noise_phase_integral(dc: &DerivedConstants, chi: f64, t: f64, rel_tol: f64) -> Result<(Complex64, f64)> {
    dc.require_broken("eb1")?;
    if chi == 0.0 || t <= 0.0 || dc.j == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    let l = dc.lambda.re;
    let k = sigma_prefactor(dc);
    let omega = dc.zeta1.re * dc.zeta2.re * chi / (2.0 * l);
    let v_end = 2.0 * l * t;
    let um1 = v_end.exp_m1();
    const SPLIT: f64 = 64.0;

    let integrand = |v: f64| {
        let e = v.exp_m1();
        e * Complex64::from_polar(1.0, omega * e)
    };
    let opts = SimpsonOptions { rel_tol, ..Default::default() };
    let w = omega.abs();

    let (head, err, tail) = if w * um1 <= SPLIT || omega == 0.0 {
        let q = adaptive_simpson(integrand, 0.0, v_end, opts)?;
        (q.value, q.error, Complex64::new(0.0, 0.0))
    } else {
        let us_m1 = SPLIT / w;
        let v_s = us_m1.ln_1p();
        let q = adaptive_simpson(integrand, 0.0, v_s, opts)?;
        let u_s = 1.0 + us_m1;
        let u = 1.0 + um1;
        let span = um1 - us_m1;
        let plain = Complex64::from_polar(1.0, omega * us_m1) * span * phi1(I * omega * span);
        let recip = Complex64::from_polar(1.0, -omega) * (cisi_asymptotic(omega * u) - cisi_asymptotic(omega * u_s));
        (q.value, q.error, plain - recip)
    };
    let scale = k / (2.0 * l);
    Ok(((head + tail) * scale, err * scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eb1 {
    pub value: Complex64,
    /// `EB1/EB0 = i zeta2 chi int sigma e^{i theta}`.
    pub ratio: Complex64,
    /// Quadrature error estimate carried into `ratio`.
    pub ratio_error: f64,
}

/// Explicit reservoir correction to the noisy mean of mode b.
pub fn eb1(dc: &DerivedConstants, chi: f64, alpha0: Complex64, t: f64, rel_tol: f64) -> Result<Eb1> {
    let (integral, err) = noise_phase_integral(dc, chi, t, rel_tol)?;
    let pre = dc.zeta2.re * chi;
    let ratio = I * pre * integral;
    let value = ratio * eb0(dc, chi, alpha0, t)?;
    Ok(Eb1 { value, ratio, ratio_error: pre.abs() * err })
}

/// `<beta1(t), beta2(t)| alpha0, 0>`, the noisy phase average with `m = 0`.
pub fn overlap_factor(dc: &DerivedConstants, chi: f64, alpha0: Complex64, t: f64) -> Result<Complex64> {
    let pf = phase_functions(dc, chi, t, Variant::Noisy)?;
    let nm = normalized_mode(dc, alpha0)?;
    Ok(phase_factor(nm.alpha_tilde.norm_sqr(), pf.theta))
}

/// `|EB1/EB0 * overlap|`: reservoir-term weight after decoherence.
pub fn eb1_weight(dc: &DerivedConstants, chi: f64, alpha0: Complex64, t: f64, rel_tol: f64) -> Result<f64> {
    let (integral, _) = noise_phase_integral(dc, chi, t, rel_tol)?;
    let ov = overlap_factor(dc, chi, alpha0, t)?;
    Ok((dc.zeta2.re * chi).abs() * integral.norm() * ov.norm())
}

pub fn mean_b(
    dc: &DerivedConstants,
    chi: f64,
    alpha0: Complex64,
    t: f64,
    variant: Variant,
    opts: &ClosedFormOptions,
) -> Result<Complex64> {
    dc.require_broken("mean_b")?;
    match variant {
        Variant::Noisy => {
            let e0 = eb0(dc, chi, alpha0, t)?;
            if opts.include_eb1 {
                let (integral, _) = noise_phase_integral(dc, chi, t, opts.eb1_rel_tol)?;
                Ok(e0 * (1.0 + I * dc.zeta2.re * chi * integral))
            } else {
                Ok(e0)
            }
        }
        Variant::Noiseless => {
            let pf = phase_functions(dc, chi, t, variant)?;
            let nm = normalized_mode(dc, alpha0)?;
            let grow = (dc.lambda.re * t).exp() * growing_amplitude(dc, alpha0);
            Ok(grow * phase_factor(nm.alpha_tilde.norm_sqr(), pf.theta))
        }
    }
}

/// `i eta2/J`, the fixed ratio between the growing parts of A and B.
pub fn mode_ratio(dc: &DerivedConstants) -> Result<Complex64> {
    if dc.j == 0.0 {
        return Err(Error::InvalidParameter("mode ratio i*eta2/J undefined at J = 0".into()));
    }
    Ok(I * dc.eta2.re / dc.j)
}

pub fn mean_a(
    dc: &DerivedConstants,
    chi: f64,
    alpha0: Complex64,
    t: f64,
    variant: Variant,
    opts: &ClosedFormOptions,
) -> Result<Complex64> {
    dc.require_broken("mean_a")?;
    let r = mode_ratio(dc)?;
    Ok(r * mean_b(dc, chi, alpha0, t, variant, opts)?)
}

/// `<b b>` from commuting one phase factor through one mode operator.
pub fn second_moment_bb(dc: &DerivedConstants, chi: f64, alpha0: Complex64, t: f64, variant: Variant) -> Result<Complex64> {
    let pf = phase_functions(dc, chi, t, variant)?;
    let nm = normalized_mode(dc, alpha0)?;
    let o2 = growing_amplitude(dc, alpha0);
    let g = (2.0 * dc.lambda.re * t).exp();
    let phase = Complex64::from_polar(1.0, 2.0 * pf.s_scalar + pf.theta);
    Ok(g * phase * o2 * o2 * phase_factor(nm.alpha_tilde.norm_sqr(), 2.0 * pf.theta))
}

/// Photon number of one channel. The Kerr phase cancels in the main term; the
/// noisy variant adds the spontaneous occupation.
pub fn photon_number(
    dc: &DerivedConstants,
    chi: f64,
    alpha0: Complex64,
    channel: Channel,
    t: f64,
    variant: Variant,
) -> Result<f64> {
    photon_number_with(dc, chi, alpha0, channel, t, variant, variant == Variant::Noisy)
}

fn photon_number_with(
    dc: &DerivedConstants,
    _chi: f64,
    alpha0: Complex64,
    channel: Channel,
    t: f64,
    _variant: Variant,
    noise: bool,
) -> Result<f64> {
    dc.require_broken("photon_number")?;
    let g = (2.0 * dc.lambda.re * t).exp();
    let main = match channel {
        Channel::A => {
            let r = dc.eta2.re / (2.0 * dc.lambda.re);
            g * r * r * alpha0.norm_sqr()
        }
        Channel::B => g * growing_amplitude(dc, alpha0).norm_sqr(),
    };
    let extra = if noise { noise_occupation(dc, channel, t)? } else { 0.0 };
    Ok(main + extra)
}

/// All moments consumed by the D3 witness, from the closed forms.
pub fn closed_form_moments(
    dc: &DerivedConstants,
    chi: f64,
    alpha0: Complex64,
    t: f64,
    variant: Variant,
    opts: &ClosedFormOptions,
) -> Result<MomentSet> {
    let r = mode_ratio(dc)?;
    let b = mean_b(dc, chi, alpha0, t, variant, opts)?;
    let noise = opts.noise_photons && variant == Variant::Noisy;
    let n_a = photon_number_with(dc, chi, alpha0, Channel::A, t, variant, noise)?;
    let n_b = photon_number_with(dc, chi, alpha0, Channel::B, t, variant, noise)?;
    let bb = second_moment_bb(dc, chi, alpha0, t, variant)?;
    let ab = r * bb;
    Ok(MomentSet { mean_a: r * b, mean_b: b, n_a, n_b, ab, adag_bdag: ab.conj(), bb })
}

/// `Re(<c> e^{-i phi})`: `phi = 0` gives X, `phi = pi/2` gives P.
pub fn quadrature_mean(mean_c: Complex64, phi: f64) -> f64 {
    (mean_c * Complex64::from_polar(1.0, -phi)).re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kernels {
    /// Exact linear means, occupations and commutators.
    Full,
    /// Growing components only (`e^{lambda tau} o2`, `sigma`, GROWING_ONLY
    /// commutators); broken regime only.
    GrowingOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wick {
    /// `|<B>|^2 <B> + 2 N_b <B>`.
    Full,
    /// `|<B>|^2 <B>` only.
    CoherentOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeOptions {
    pub kernels: Kernels,
    pub wick: Wick,
    pub rel_tol: f64,
}

impl Default for PerturbativeOptions {
    fn default() -> Self {
        Self { kernels: Kernels::Full, wick: Wick::Full, rel_tol: 1e-10 }
    }
}

/// First-order Kerr correction `(d<a>, d<b>)`:
/// `d<x(t)> = -i chi int_0^t c_xb(t, tau) <B^dag B B>(tau) d tau`.
pub fn perturbative_correction(
    dc: &DerivedConstants,
    chi: f64,
    alpha0: Complex64,
    t: f64,
    opts: &PerturbativeOptions,
) -> Result<(Complex64, Complex64)> {
    dc.require_analytic("perturbative_correction")?;
    let variant = match opts.kernels {
        Kernels::Full => CommutatorVariant::Full,
        Kernels::GrowingOnly => {
            dc.require_broken("perturbative_correction(GrowingOnly)")?;
            CommutatorVariant::GrowingOnly
        }
    };
    let zero = Complex64::new(0.0, 0.0);
    if chi == 0.0 || alpha0.norm() == 0.0 || t <= 0.0 {
        return Ok((zero, zero));
    }
    let o2 = growing_amplitude(dc, alpha0);
    let source = |tau: f64| -> Complex64 {
        let (b, n) = match opts.kernels {
            Kernels::Full => (
                linear_mean_modes(dc, alpha0, tau).map(|m| m.mean_b).unwrap_or(zero),
                noise_occupation(dc, Channel::B, tau).unwrap_or(0.0),
            ),
            Kernels::GrowingOnly => ((dc.lambda.re * tau).exp() * o2, sigma(dc, tau).unwrap_or(0.0)),
        };
        let occ = match opts.wick {
            Wick::Full => b.norm_sqr() + 2.0 * n,
            Wick::CoherentOnly => b.norm_sqr(),
        };
        b * occ
    };
    let sopts = SimpsonOptions { rel_tol: opts.rel_tol, ..Default::default() };
    let mut out = [zero; 2];
    for (slot, pair) in [(0usize, Pair::AB), (1usize, Pair::BB)] {
        let kind = CommutatorKind { pair, variant };
        let q = adaptive_simpson(
            |tau| commutator(dc, kind, t, tau).unwrap_or(zero) * source(tau),
            0.0,
            t,
            sopts,
        )?;
        out[slot] = -I * chi * q.value;
    }
    Ok((out[0], out[1]))
}

/// Options for the change ratio of the loss-channel P quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeRatioOptions {
    pub closed_form: ClosedFormOptions,
    pub perturbative: PerturbativeOptions,
}

impl Default for ChangeRatioOptions {
    fn default() -> Self {
        Self { closed_form: ClosedFormOptions::default(), perturbative: PerturbativeOptions::default() }
    }
}

/// `|<X_b(pi/2)> - <X_b^0(pi/2)>| / denom`.
///
/// Broken regime: closed-form mean against its `chi = 0` growing part.
/// Symmetric regime: first-order correction over the root-mean-square of the
/// linear quadrature across one period `2 pi/Omega`, i.e.
/// `(J/Omega)|Re alpha0|/sqrt(2)`.
pub fn change_ratio(
    dc: &DerivedConstants,
    chi: f64,
    alpha0: Complex64,
    t: f64,
    variant: Variant,
    opts: &ChangeRatioOptions,
) -> Result<f64> {
    match dc.regime {
        Regime::Exceptional => Err(Error::Regime { op: "change_ratio", regime: dc.regime }),
        Regime::Broken => {
            let q = quadrature_mean(mean_b(dc, chi, alpha0, t, variant, &opts.closed_form)?, std::f64::consts::FRAC_PI_2);
            let lin = (dc.lambda.re * t).exp() * growing_amplitude(dc, alpha0);
            let q0 = quadrature_mean(lin, std::f64::consts::FRAC_PI_2);
            // a quadrature that vanishes by symmetry survives only as rounding residue
            if !(q0.abs() > 1e-12 * lin.norm()) {
                return Err(Error::Degenerate("linear quadrature vanishes".into()));
            }
            Ok((q - q0).abs() / q0.abs())
        }
        Regime::PtSymmetric => {
            let omega = dc.lambda.im;
            let denom = dc.j / omega * alpha0.re.abs() / std::f64::consts::SQRT_2;
            if !(denom >= 1e-300) {
                return Err(Error::Degenerate("root-mean-square linear quadrature vanishes".into()));
            }
            let (_, db) = perturbative_correction(dc, chi, alpha0, t, &opts.perturbative)?;
            Ok(quadrature_mean(db, std::f64::consts::FRAC_PI_2).abs() / denom)
        }
    }
}

/// D3 value with a bound on its floating-point rounding error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D3 {
    pub value: f64,
    /// Values with `|value| <= resolution` have no determined sign.
    pub resolution: f64,
}

impl D3 {
    pub fn is_negative(&self) -> bool {
        self.value < -self.resolution
    }
}

/// Normalized third-order moment determinant.
pub fn d3(m: &MomentSet) -> Result<f64> {
    d3_resolved(m).map(|d| d.value)
}

pub fn d3_resolved(m: &MomentSet) -> Result<D3> {
    const EPS: f64 = 1e-30;
    let norm = m.n_a * m.n_b;
    if !(norm > EPS) {
        return Err(Error::Degenerate(format!("n_a * n_b = {norm:e}")));
    }
    // scale each mode to unit photon number so all terms are O(1)
    let sa = m.n_a.sqrt();
    let sb = m.n_b.sqrt();
    let a = m.mean_a / sa;
    let b = m.mean_b / sb;
    let ab = m.ab / (sa * sb);
    let adbd = m.adag_bdag / (sa * sb);
    let terms = [
        Complex64::new(1.0, 0.0),
        a * b * adbd,
        a.conj() * b.conj() * ab,
        -Complex64::new(a.norm_sqr(), 0.0),
        -Complex64::new(b.norm_sqr(), 0.0),
        -Complex64::new(ab.norm_sqr(), 0.0),
    ];
    let sum: Complex64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|z| z.norm()).sum();
    if sum.im.abs() > 1e-10 * scale {
        return Err(Error::Degenerate(format!("imaginary residue {:e}", sum.im)));
    }
    Ok(D3 { value: sum.re, resolution: 16.0 * f64::EPSILON * scale })
}
