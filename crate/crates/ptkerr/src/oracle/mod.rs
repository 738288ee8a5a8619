//! Truncated-Fock Lindblad oracle.
//!
//! Master equation on `|n_a> (x) |n_b>`:
//!
//! ```text
//! d rho/dt = -i[J(a b^dag + a^dag b) + chi/2 b^dag^2 b^2, rho]
//!            - kappa (a a^dag rho + rho a a^dag - 2 a^dag rho a)
//!            - kappa (b^dag b rho + rho b^dag b - 2 b rho b^dag)
//! ```
//!
//! Operators are the truncated matrices, so `a a^dag` vanishes on the top
//! level of mode a and the trace is conserved exactly even after truncation.
//! Leakage (population of the two highest levels of a mode) is the signal that
//! the basis is too small; the trace is never renormalized.

mod sector;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{MomentSet, TimeSeries};
use crate::params::CouplerParams;

pub use sector::SectorState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockDims {
    pub n_a: usize,
    pub n_b: usize,
}

impl FockDims {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 {
            return Err(Error::InvalidParameter("Fock dimensions must be positive".into()));
        }
        Ok(Self { n_a, n_b })
    }

    pub fn total(&self) -> usize {
        self.n_a * self.n_b
    }

    pub fn index(&self, na: usize, nb: usize) -> usize {
        na * self.n_b + nb
    }
}

/// Dense density matrix, row-major over the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub dims: FockDims,
    pub entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(dims: FockDims) -> Self {
        let d = dims.total();
        Self { dims, entries: vec![Complex64::new(0.0, 0.0); d * d] }
    }

    pub fn from_pure(dims: FockDims, psi: &[Complex64]) -> Result<Self> {
        let d = dims.total();
        if psi.len() != d {
            return Err(Error::InvalidParameter("state vector length mismatch".into()));
        }
        let mut m = Self::zeros(dims);
        for i in 0..d {
            for j in 0..d {
                m.entries[i * d + j] = psi[i] * psi[j].conj();
            }
        }
        Ok(m)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dims.total() + j]
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dims.total();
        (0..d).map(|i| self.entries[i * d + i]).sum()
    }

    /// `max |rho - rho^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dims.total();
        let mut e: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                e = e.max((self.entries[i * d + j] - self.entries[j * d + i].conj()).norm());
            }
        }
        e
    }

    /// Moments via `Tr(rho O)` for the operators the analytic side predicts.
    pub fn moments(&self) -> MomentSet {
        let dims = self.dims;
        let mut m = MomentSet::coherent(0.0.into(), 0.0.into());
        for ia in 0..dims.n_a {
            for ib in 0..dims.n_b {
                let i = dims.index(ia, ib);
                let (sa, sb) = ((ia as f64).sqrt(), (ib as f64).sqrt());
                m.n_a += ia as f64 * self.get(i, i).re;
                m.n_b += ib as f64 * self.get(i, i).re;
                if ia >= 1 {
                    m.mean_a += sa * self.get(i, dims.index(ia - 1, ib));
                }
                if ib >= 1 {
                    m.mean_b += sb * self.get(i, dims.index(ia, ib - 1));
                }
                if ia >= 1 && ib >= 1 {
                    m.ab += sa * sb * self.get(i, dims.index(ia - 1, ib - 1));
                }
                if ib >= 2 {
                    m.bb += sb * ((ib - 1) as f64).sqrt() * self.get(i, dims.index(ia, ib - 2));
                }
                if ia + 1 < dims.n_a && ib + 1 < dims.n_b {
                    let c = ((ia + 1) as f64).sqrt() * ((ib + 1) as f64).sqrt();
                    m.adag_bdag += c * self.get(i, dims.index(ia + 1, ib + 1));
                }
            }
        }
        m
    }

    /// Largest population of the two top levels of either mode (modes with
    /// fewer than three levels are not monitored).
    pub fn leakage(&self) -> f64 {
        let (la, lb) = self.leakage_per_mode();
        f64::max(la, lb)
    }

    pub fn leakage_per_mode(&self) -> (f64, f64) {
        let dims = self.dims;
        let (mut la, mut lb) = (0.0, 0.0);
        for ia in 0..dims.n_a {
            for ib in 0..dims.n_b {
                let i = dims.index(ia, ib);
                let p = self.get(i, i).re;
                if dims.n_a > 2 && ia + 2 >= dims.n_a {
                    la += p;
                }
                if dims.n_b > 2 && ib + 2 >= dims.n_b {
                    lb += p;
                }
            }
        }
        (la, lb)
    }
}

/// Poisson mass of a coherent state beyond `dim - 1`.
pub fn coherent_tail_mass(alpha: Complex64, dim: usize) -> f64 {
    let r = alpha.norm_sqr();
    // log of the first omitted weight, then sum the geometric-like remainder
    let mut logw = -r + dim as f64 * r.max(1e-300).ln() - ln_factorial(dim);
    if r == 0.0 {
        return 0.0;
    }
    let mut tail = 0.0;
    let mut n = dim;
    loop {
        let w = logw.exp();
        tail += w;
        n += 1;
        logw += r.ln() - (n as f64).ln();
        if (w < 1e-30 * tail.max(1e-300) && n as f64 > r) || n > dim + 100_000 {
            break;
        }
    }
    tail
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Truncated, renormalized coherent state `e^{-|a|^2/2} a^n/sqrt(n!)`.
/// Refuses when the discarded tail mass exceeds `1e-4`.
pub fn coherent_state_vector(alpha: Complex64, dim: usize) -> Result<Vec<Complex64>> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let tail = coherent_tail_mass(alpha, dim);
    if tail > 1e-4 {
        return Err(Error::TailMass { tail, dim });
    }
    let mut v = Vec::with_capacity(dim);
    v.push(Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0));
    for n in 1..dim {
        let c = v[n - 1] * alpha / (n as f64).sqrt();
        v.push(c);
    }
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in &mut v {
        *c /= norm;
    }
    Ok(v)
}

/// `|alpha>_a (x) |beta>_b` on the product basis.
pub fn product_coherent(dims: FockDims, alpha: Complex64, beta: Complex64) -> Result<Vec<Complex64>> {
    let va = coherent_state_vector(alpha, dims.n_a)?;
    let vb = coherent_state_vector(beta, dims.n_b)?;
    let mut psi = Vec::with_capacity(dims.total());
    for a in &va {
        for b in &vb {
            psi.push(a * b);
        }
    }
    Ok(psi)
}

/// Matrix-element form of the generator, shared by the dense and sector paths.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    pub n_a: usize,
    pub n_b: usize,
    kappa: f64,
    j: f64,
    sqrt: Vec<f64>,
    kerr: Vec<f64>,
    gain_diag: Vec<f64>,
}

impl Generator {
    pub fn new(p: &CouplerParams, dims: FockDims) -> Self {
        let n = dims.n_a.max(dims.n_b) + 1;
        let sqrt = (0..n).map(|k| (k as f64).sqrt()).collect();
        let kerr = (0..dims.n_b).map(|k| 0.5 * p.chi * (k as f64) * (k as f64 - 1.0)).collect();
        let gain_diag = (0..dims.n_a).map(|k| if k + 1 < dims.n_a { (k + 1) as f64 } else { 0.0 }).collect();
        Self { n_a: dims.n_a, n_b: dims.n_b, kappa: p.kappa, j: p.j, sqrt, kerr, gain_diag }
    }

    /// `d rho_{(ia,ib),(ja,jb)}/dt`; `get(ka, kb, la, lb)` is only called with
    /// in-range indices.
    #[inline(always)]
    pub fn element<F>(&self, ia: usize, ib: usize, ja: usize, jb: usize, get: F) -> Complex64
    where
        F: Fn(usize, usize, usize, usize) -> Complex64,
    {
        let s = &self.sqrt;
        let rho = get(ia, ib, ja, jb);
        let (na, nb) = (self.n_a, self.n_b);

        let mut hop = Complex64::new(0.0, 0.0);
        if ib > 0 && ia + 1 < na {
            hop += s[ia + 1] * s[ib] * get(ia + 1, ib - 1, ja, jb);
        }
        if ia > 0 && ib + 1 < nb {
            hop += s[ia] * s[ib + 1] * get(ia - 1, ib + 1, ja, jb);
        }
        if jb > 0 && ja + 1 < na {
            hop -= s[ja + 1] * s[jb] * get(ia, ib, ja + 1, jb - 1);
        }
        if ja > 0 && jb + 1 < nb {
            hop -= s[ja] * s[jb + 1] * get(ia, ib, ja - 1, jb + 1);
        }
        let phase = self.kerr[ib] - self.kerr[jb];
        // -i (phase rho + J hop)
        let coherent = phase * rho + self.j * hop;
        let mut d = Complex64::new(coherent.im, -coherent.re);

        let decay = self.gain_diag[ia] + self.gain_diag[ja] + (ib + jb) as f64;
        d -= self.kappa * decay * rho;
        if ia > 0 && ja > 0 {
            d += 2.0 * self.kappa * s[ia] * s[ja] * get(ia - 1, ib, ja - 1, jb);
        }
        if ib + 1 < nb && jb + 1 < nb {
            d += 2.0 * self.kappa * s[ib + 1] * s[jb + 1] * get(ia, ib + 1, ja, jb + 1);
        }
        d
    }

    /// Gershgorin-style bound on the generator's spectral radius.
    pub fn rate_bound(&self) -> f64 {
        let (na, nb) = (self.n_a as f64, self.n_b as f64);
        let gain = 2.0 * (na - 1.0).max(0.0) + 2.0 * (na - 1.0).max(0.0);
        let loss = 2.0 * (nb - 1.0).max(0.0) + 2.0 * (nb - 1.0).max(0.0);
        let hop = 4.0 * self.j * (na * nb).sqrt();
        let kerr = self.kerr.iter().cloned().fold(0.0, f64::max);
        self.kappa * (gain + loss) + hop + kerr
    }
}

/// Dense right-hand side of the master equation.
pub fn lindblad_rhs(params: &CouplerParams, rho: &DensityMatrix) -> DensityMatrix {
    let g = Generator::new(params, rho.dims);
    let dims = rho.dims;
    let d = dims.total();
    let mut out = DensityMatrix::zeros(dims);
    let get = |ka: usize, kb: usize, la: usize, lb: usize| rho.entries[dims.index(ka, kb) * d + dims.index(la, lb)];
    for ia in 0..dims.n_a {
        for ib in 0..dims.n_b {
            let i = dims.index(ia, ib);
            for ja in 0..dims.n_a {
                for jb in 0..dims.n_b {
                    out.entries[i * d + dims.index(ja, jb)] = g.element(ia, ib, ja, jb, get);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub params: CouplerParams,
    pub dims: FockDims,
    pub dt: f64,
    pub t_grid: Vec<f64>,
    pub leak_threshold: f64,
    /// Budget on `n_a * n_b`.
    pub max_total_dim: usize,
    /// Apply the `e^{2 Re(lambda) t_max}(|alpha0|^2 + 1) <= n_a/4` rule.
    pub enforce_horizon: bool,
}

impl OracleRun {
    pub fn new(params: CouplerParams, dims: FockDims, dt: f64, t_grid: Vec<f64>) -> Self {
        Self { params, dims, dt, t_grid, leak_threshold: 1e-6, max_total_dim: 4096, enforce_horizon: true }
    }

    /// Checks everything that can be decided before integrating.
    pub fn precheck(&self) -> Result<Vec<usize>> {
        self.params.validate()?;
        if self.dims.total() > self.max_total_dim {
            return Err(Error::InvalidParameter(format!(
                "n_a * n_b = {} exceeds the budget {}",
                self.dims.total(),
                self.max_total_dim
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        let bound = Generator::new(&self.params, self.dims).rate_bound() * self.dt;
        if bound > 2.5 {
            return Err(Error::Stability(bound));
        }
        if self.t_grid.first() != Some(&0.0) {
            return Err(Error::InvalidParameter("time grid must start at 0".into()));
        }
        let mut steps = Vec::with_capacity(self.t_grid.len());
        let mut prev = 0usize;
        for &t in &self.t_grid {
            let k = (t / self.dt).round();
            if (k * self.dt - t).abs() > 1e-9 * self.dt.max(t) {
                return Err(Error::InvalidParameter(format!("sample time {t} is not a multiple of dt")));
            }
            let k = k as usize;
            if k < prev {
                return Err(Error::InvalidParameter("time grid must be nondecreasing".into()));
            }
            prev = k;
            steps.push(k);
        }
        if self.enforce_horizon && self.params.kappa > 0.0 {
            let t_max = *self.t_grid.last().unwrap();
            let p = &self.params;
            let re_l = ((p.kappa - p.j) * (p.kappa + p.j)).max(0.0).sqrt();
            let required = (2.0 * re_l * t_max).exp() * (p.alpha0.norm_sqr() + 1.0);
            let allowed = self.dims.n_a as f64 / 4.0;
            if required > allowed {
                return Err(Error::Horizon { required, allowed });
            }
        }
        Ok(steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics {
    pub t: f64,
    pub trace_drift: f64,
    pub leakage_a: f64,
    pub leakage_b: f64,
    /// Largest Hermiticity defect seen in the evolved blocks.
    pub hermiticity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutput {
    pub series: TimeSeries,
    pub diagnostics: Vec<SampleDiagnostics>,
    pub max_leakage: f64,
    pub max_trace_drift: f64,
}

pub enum InitialState {
    Pure(Vec<Complex64>),
    Mixed(DensityMatrix),
}

/// Fixed-step RK4 evolution of the blocks that carry the reported moments.
/// Fails with [`Error::Truncation`] at the first step whose leakage exceeds
/// the threshold.
pub fn evolve(run: &OracleRun, rho0: &InitialState) -> Result<OracleOutput> {
    let steps = run.precheck()?;
    sector::evolve_sectors(run, rho0, &steps)
}

/// Dense RK4 reference integration; practical only for small dimensions.
pub fn evolve_dense(run: &OracleRun, rho0: &DensityMatrix) -> Result<OracleOutput> {
    let steps = run.precheck()?;
    let d2 = rho0.entries.len();
    let mut rho = rho0.clone();
    let mut out = OracleOutput { series: TimeSeries::new(), diagnostics: Vec::new(), max_leakage: 0.0, max_trace_drift: 0.0 };
    let mut k = 0usize;
    let h = run.dt;
    let axpy = |base: &DensityMatrix, k: &DensityMatrix, s: f64| {
        let mut r = base.clone();
        for i in 0..d2 {
            r.entries[i] += s * k.entries[i];
        }
        r
    };
    for (idx, &target) in steps.iter().enumerate() {
        while k < target {
            let k1 = lindblad_rhs(&run.params, &rho);
            let k2 = lindblad_rhs(&run.params, &axpy(&rho, &k1, 0.5 * h));
            let k3 = lindblad_rhs(&run.params, &axpy(&rho, &k2, 0.5 * h));
            let k4 = lindblad_rhs(&run.params, &axpy(&rho, &k3, h));
            for i in 0..d2 {
                rho.entries[i] += h / 6.0 * (k1.entries[i] + 2.0 * k2.entries[i] + 2.0 * k3.entries[i] + k4.entries[i]);
            }
            k += 1;
            let leak = rho.leakage();
            out.max_leakage = out.max_leakage.max(leak);
            if leak > run.leak_threshold {
                return Err(Error::Truncation { t: k as f64 * h, leakage: leak, threshold: run.leak_threshold });
            }
        }
        let drift = (rho.trace() - 1.0).norm();
        out.max_trace_drift = out.max_trace_drift.max(drift);
        out.series.push(run.t_grid[idx], rho.moments());
        let (leakage_a, leakage_b) = rho.leakage_per_mode();
        out.diagnostics.push(SampleDiagnostics {
            t: run.t_grid[idx],
            trace_drift: drift,
            leakage_a,
            leakage_b,
            hermiticity: rho.hermiticity_error(),
        });
    }
    Ok(out)
}

/// Sensitivity of a run to halving `dt` and to enlarging both modes by 8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dt_change: f64,
    pub dims_change: f64,
    pub dt_converged: bool,
    pub truncation_limited: bool,
}

/// Largest pointwise relative difference between two series over all moments;
/// `floor` guards components that vanish identically.
pub fn max_relative_difference(a: &TimeSeries, b: &TimeSeries, floor: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (x, y) in a.moments.iter().zip(&b.moments) {
        for ((_, u), (_, v)) in x.components().iter().zip(y.components().iter()) {
            worst = worst.max((u - v).norm() / v.norm().max(floor));
        }
    }
    worst
}

pub fn convergence_check(run: &OracleRun, alpha: Complex64, beta: Complex64) -> Result<ConvergenceReport> {
    let init = |dims| product_coherent(dims, alpha, beta).map(InitialState::Pure);
    let base = evolve(run, &init(run.dims)?)?;
    let mut half = run.clone();
    half.dt *= 0.5;
    let fine = evolve(&half, &init(half.dims)?)?;
    let mut big = run.clone();
    big.dims = FockDims::new(run.dims.n_a + 8, run.dims.n_b + 8)?;
    big.max_total_dim = big.max_total_dim.max(big.dims.total());
    let large = evolve(&big, &init(big.dims)?)?;
    let dt_change = max_relative_difference(&base.series, &fine.series, 1e-12);
    let dims_change = max_relative_difference(&base.series, &large.series, 1e-12);
    Ok(ConvergenceReport { dt_change, dims_change, dt_converged: dt_change < 1e-6, truncation_limited: dims_change >= 1e-5 })
}
