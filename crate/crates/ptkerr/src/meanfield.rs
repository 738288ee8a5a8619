//! Classical mean-field baseline: operators replaced by c-numbers,
//! `d alpha/dt = kappa alpha - i J beta`,
//! `d beta/dt = -kappa beta - i J alpha - i chi |beta|^2 beta`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CouplerParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldOptions {
    /// RK4 step; `None` means `1e-3/kappa` (or `1e-3` when `kappa = 0`).
    pub step: Option<f64>,
    pub overflow_guard: f64,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        Self { step: None, overflow_guard: 1e150 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldRun {
    pub states: Vec<MeanFieldState>,
    /// `max |y_h - y_{h/2}| / 15` over the grid, relative to `max(1, |y|)`.
    pub error_estimate: f64,
    pub step: f64,
}

fn rhs(p: &CouplerParams, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    let da = p.kappa * a - i * p.j * b;
    let db = -p.kappa * b - i * p.j * a - i * p.chi * b.norm_sqr() * b;
    (da, db)
}

fn rk4_step(p: &CouplerParams, a: Complex64, b: Complex64, h: f64) -> (Complex64, Complex64) {
    let (k1a, k1b) = rhs(p, a, b);
    let (k2a, k2b) = rhs(p, a + 0.5 * h * k1a, b + 0.5 * h * k1b);
    let (k3a, k3b) = rhs(p, a + 0.5 * h * k2a, b + 0.5 * h * k2b);
    let (k4a, k4b) = rhs(p, a + h * k3a, b + h * k3b);
    (
        a + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        b + h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
    )
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidParameter("time grid needs at least two points".into()));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::InvalidParameter("time grid must start at 0".into()));
    }
    let dt = t_grid[1] - t_grid[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("time grid must increase".into()));
    }
    for w in t_grid.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()) {
            return Err(Error::InvalidParameter("time grid is not uniform".into()));
        }
    }
    Ok(())
}

fn run(p: &CouplerParams, alpha0: Complex64, t_grid: &[f64], h: f64, guard: f64) -> Result<Vec<MeanFieldState>> {
    let mut a = alpha0;
    let mut b = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(MeanFieldState { alpha: a, beta: b, t: t_grid[0] });
    for w in t_grid.windows(2) {
        let span = w[1] - w[0];
        let n = (span / h).ceil().max(1.0) as usize;
        let hs = span / n as f64;
        for k in 0..n {
            (a, b) = rk4_step(p, a, b, hs);
            let bad = !(a.norm() <= guard && b.norm() <= guard);
            if bad {
                return Err(Error::Divergence(w[0] + hs * (k + 1) as f64));
            }
        }
        out.push(MeanFieldState { alpha: a, beta: b, t: w[1] });
    }
    Ok(out)
}

/// Fixed-step RK4 over a uniform grid starting at 0, with a step-halving
/// error estimate.
pub fn integrate_meanfield(
    params: &CouplerParams,
    alpha0: Complex64,
    t_grid: &[f64],
    opts: &MeanFieldOptions,
) -> Result<MeanFieldRun> {
    params.validate()?;
    check_grid(t_grid)?;
    let h = opts.step.unwrap_or(if params.kappa > 0.0 { 1e-3 / params.kappa } else { 1e-3 });
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let coarse = run(params, alpha0, t_grid, h, opts.overflow_guard)?;
    let fine = run(params, alpha0, t_grid, 0.5 * h, opts.overflow_guard)?;
    let mut est: f64 = 0.0;
    for (c, f) in coarse.iter().zip(&fine) {
        let d = (c.alpha - f.alpha).norm().max((c.beta - f.beta).norm());
        let scale = f.alpha.norm().max(f.beta.norm()).max(1.0);
        est = est.max(d / 15.0 / scale);
    }
    Ok(MeanFieldRun { states: fine, error_estimate: est, step: 0.5 * h })
}
