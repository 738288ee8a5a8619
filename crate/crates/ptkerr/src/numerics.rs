//! Small numerical kernels: cancellation-free exponentials, adaptive Simpson
//! quadrature and the large-argument sine/cosine integrals.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `e^z - 1` without cancellation near `z = 0`.
pub fn expm1c(z: Complex64) -> Complex64 {
    let s = (0.5 * z.im).sin();
    let re = z.re.exp_m1() * z.im.cos() - 2.0 * s * s;
    let im = z.re.exp() * z.im.sin();
    Complex64::new(re, im)
}

/// `(e^z - 1)/z`, equal to 1 at the origin.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-300 {
        return Complex64::new(1.0, 0.0);
    }
    expm1c(z) / z
}

/// `(e^z - 1 - z)/z^2`, equal to 1/2 at the origin.
pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        // sum_k z^k/(k+2)!
        let mut term = Complex64::new(0.5, 0.0);
        let mut sum = term;
        for k in 1..40 {
            term *= z / (k as f64 + 2.0);
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        return sum;
    }
    (expm1c(z) - z) / (z * z)
}

/// `exp(r (e^{i theta} - 1))`, the normal-ordered coherent-state phase average.
pub fn phase_average(r: f64, theta: f64) -> Complex64 {
    (r * expm1c(Complex64::new(0.0, theta))).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimpsonOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_evaluations: usize,
}

impl Default for SimpsonOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-300, max_depth: 48, max_evaluations: 1 << 22 }
    }
}

/// Adaptive Simpson quadrature for a complex integrand on `[a, b]`.
///
/// A 16-panel composite pass fixes the absolute tolerance from `rel_tol`; each
/// panel is then bisected until the Richardson difference is below its share.
/// Fails with the achieved estimate when the depth or evaluation cap is hit.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, opts: SimpsonOptions) -> Result<Quadrature>
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Ok(Quadrature { value: Complex64::new(0.0, 0.0), error: 0.0, evaluations: 0 });
    }
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let xs: Vec<f64> = (0..=2 * PANELS).map(|k| a + 0.5 * h * k as f64).collect();
    let fs: Vec<Complex64> = xs.iter().map(|&x| f(x)).collect();
    let mut evals = fs.len();

    let mut coarse = Complex64::new(0.0, 0.0);
    for p in 0..PANELS {
        coarse += (fs[2 * p] + 4.0 * fs[2 * p + 1] + fs[2 * p + 2]) * (h / 6.0);
    }
    let tol = (opts.rel_tol * coarse.norm()).max(opts.abs_tol);

    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut converged = true;
    // explicit stack keeps the summation order fixed
    struct Seg {
        a: f64,
        b: f64,
        fa: Complex64,
        fm: Complex64,
        fb: Complex64,
        whole: Complex64,
        tol: f64,
        depth: u32,
    }
    for p in 0..PANELS {
        let (pa, pb) = (xs[2 * p], xs[2 * p + 2]);
        let (fa, fm, fb) = (fs[2 * p], fs[2 * p + 1], fs[2 * p + 2]);
        let whole = (fa + 4.0 * fm + fb) * ((pb - pa) / 6.0);
        let mut stack = vec![Seg { a: pa, b: pb, fa, fm, fb, whole, tol: tol / PANELS as f64, depth: 0 }];
        while let Some(s) = stack.pop() {
            let m = 0.5 * (s.a + s.b);
            let lm = 0.5 * (s.a + m);
            let rm = 0.5 * (m + s.b);
            let flm = f(lm);
            let frm = f(rm);
            evals += 2;
            let left = (s.fa + 4.0 * flm + s.fm) * ((m - s.a) / 6.0);
            let right = (s.fm + 4.0 * frm + s.fb) * ((s.b - m) / 6.0);
            let diff = left + right - s.whole;
            let accept = diff.norm() <= 15.0 * s.tol;
            let capped = s.depth >= opts.max_depth || evals >= opts.max_evaluations;
            if accept || capped {
                if !accept {
                    converged = false;
                }
                total += left + right + diff / 15.0;
                err += diff.norm() / 15.0;
            } else {
                let t = 0.5 * s.tol;
                let d = s.depth + 1;
                stack.push(Seg { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right, tol: t, depth: d });
                stack.push(Seg { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left, tol: t, depth: d });
            }
        }
    }
    let out = Quadrature { value: total, error: err, evaluations: evals };
    if !converged || !total.re.is_finite() || !total.im.is_finite() {
        return Err(Error::Quadrature { estimate: total.norm(), error: err });
    }
    Ok(out)
}

/// `Ci(|x|) + i sgn(x) Si(|x|)`, an antiderivative of `e^{ix}/x`, from the
/// asymptotic auxiliary-function series. Accurate to double precision for
/// `|x| >= 32`.
pub fn cisi_asymptotic(x: f64) -> Complex64 {
    let ax = x.abs();
    debug_assert!(ax >= 32.0);
    let inv2 = 1.0 / (ax * ax);
    // f(x) ~ (1/x) sum (-1)^k (2k)!/x^{2k},  g(x) ~ (1/x^2) sum (-1)^k (2k+1)!/x^{2k}
    let mut fs = 0.0;
    let mut gs = 0.0;
    let mut tf: f64 = 1.0;
    let mut tg: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        let mag = tf.abs().max(tg.abs());
        if mag > prev || mag < 1e-18 {
            break;
        }
        prev = mag;
        fs += tf;
        gs += tg;
        let k2 = 2.0 * k as f64;
        tf *= -(k2 + 1.0) * (k2 + 2.0) * inv2;
        tg *= -(k2 + 2.0) * (k2 + 3.0) * inv2;
    }
    let f = fs / ax;
    let g = gs * inv2;
    let (s, c) = ax.sin_cos();
    let si = std::f64::consts::FRAC_PI_2 - f * c - g * s;
    let ci = f * s - g * c;
    Complex64::new(ci, x.signum() * si)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1c_small_and_large() {
        let z = Complex64::new(1e-12, -3e-13);
        let e = expm1c(z);
        assert!((e - z).norm() < 1e-23);
        let z = Complex64::new(0.7, 2.1);
        assert!((expm1c(z) - (z.exp() - 1.0)).norm() < 1e-15);
        let z = Complex64::new(0.0, 1e-9);
        assert!((expm1c(z).re + 0.5e-18).abs() < 1e-30);
    }

    #[test]
    fn phi_series_matches_direct() {
        for z in [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), Complex64::new(0.49, 0.0)] {
            let direct = (z.exp() - 1.0 - z) / (z * z);
            assert!((phi2(z) - direct).norm() < 1e-13, "{z}");
        }
        assert!((phi2(Complex64::new(0.0, 0.0)) - 0.5).norm() < 1e-16);
        assert!((phi1(Complex64::new(0.0, 0.0)) - 1.0).norm() < 1e-16);
        let z = Complex64::new(3.0, -1.0);
        assert!((phi1(z) - (z.exp() - 1.0) / z).norm() < 1e-14);
    }

    #[test]
    fn simpson_polynomial_and_oscillatory() {
        let q = adaptive_simpson(|x| Complex64::new(x * x * x, 0.0), 0.0, 2.0, SimpsonOptions::default()).unwrap();
        assert!((q.value.re - 4.0).abs() < 1e-12);
        let w = 40.0;
        let q = adaptive_simpson(
            |x| Complex64::new(0.0, w * x).exp(),
            0.0,
            3.0,
            SimpsonOptions { rel_tol: 1e-11, ..Default::default() },
        )
        .unwrap();
        let exact = (Complex64::new(0.0, w * 3.0).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((q.value - exact).norm() < 1e-10 * exact.norm());
    }

    #[test]
    fn simpson_reports_failure() {
        let opts = SimpsonOptions { rel_tol: 1e-14, max_depth: 2, ..Default::default() };
        let r = adaptive_simpson(|x| Complex64::new((50.0 * x * x).sin(), 0.0), 0.0, 5.0, opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn cisi_against_quadrature() {
        // E(b) - E(a) = int_a^b e^{ix}/x dx
        for (a, b) in [(40.0, 47.5), (64.0, 90.0), (-75.0, -33.0)] {
            let q = adaptive_simpson(
                |x: f64| Complex64::new(0.0, x).exp() / x,
                a,
                b,
                SimpsonOptions { rel_tol: 1e-13, ..Default::default() },
            )
            .unwrap();
            let d = cisi_asymptotic(b) - cisi_asymptotic(a);
            assert!((q.value - d).norm() < 1e-12, "{a} {b}: {} vs {}", q.value, d);
        }
    }

    #[test]
    fn cisi_reference_values() {
        // Si(50) = 1.5516170724859358, Ci(50) = -0.0056283863241163
        let e = cisi_asymptotic(50.0);
        assert!((e.im - 1.5516170724859358).abs() < 1e-14);
        assert!((e.re + 0.0056283863241163).abs() < 1e-14);
    }
}
