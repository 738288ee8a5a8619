//! Block evolution by excitation-number difference.
//!
//! Every term of the generator conserves `(n_a + n_b)_row - (n_a + n_b)_col`,
//! so the coherences with difference 0, 1, 2 and -2 evolve independently of
//! the rest and carry all reported moments. Each block is stored as
//! `rows x n_b`: entry `(i, jb)` holds `rho_{i, (ja, jb)}` with
//! `ja = T_i - delta - jb`; entries with `ja` outside the basis stay zero.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Generator, InitialState, OracleOutput, OracleRun, SampleDiagnostics};
use crate::error::{Error, Result};
use crate::moments::{MomentSet, TimeSeries};

const DELTAS: [i64; 4] = [0, 1, 2, -2];

/// The evolved blocks of a density matrix.
#[derive(Debug, Clone)]
pub struct SectorState {
    n_a: usize,
    n_b: usize,
    data: Vec<Complex64>,
}

impl SectorState {
    fn rows(&self) -> usize {
        self.n_a * self.n_b
    }

    fn block_len(&self) -> usize {
        self.rows() * self.n_b
    }

    #[inline(always)]
    fn col_a(&self, row: usize, delta: i64, jb: usize) -> Option<usize> {
        let t = (row / self.n_b + row % self.n_b) as i64;
        let ja = t - delta - jb as i64;
        (ja >= 0 && (ja as usize) < self.n_a).then_some(ja as usize)
    }

    #[inline(always)]
    fn at(&self, s: usize, row: usize, jb: usize) -> Complex64 {
        self.data[s * self.block_len() + row * self.n_b + jb]
    }

    fn from_initial(n_a: usize, n_b: usize, init: &InitialState) -> Result<Self> {
        let d = n_a * n_b;
        let mut st = Self { n_a, n_b, data: vec![Complex64::new(0.0, 0.0); 4 * d * n_b] };
        let entry: Box<dyn Fn(usize, usize) -> Complex64> = match init {
            InitialState::Pure(psi) => {
                if psi.len() != d {
                    return Err(Error::InvalidParameter("state vector length mismatch".into()));
                }
                Box::new(move |i, j| psi[i] * psi[j].conj())
            }
            InitialState::Mixed(rho) => {
                if rho.dims.n_a != n_a || rho.dims.n_b != n_b {
                    return Err(Error::InvalidParameter("density matrix dimensions mismatch".into()));
                }
                Box::new(move |i, j| rho.get(i, j))
            }
        };
        for (s, &delta) in DELTAS.iter().enumerate() {
            for row in 0..d {
                for jb in 0..n_b {
                    if let Some(ja) = st.col_a(row, delta, jb) {
                        let k = s * d * n_b + row * n_b + jb;
                        st.data[k] = entry(row, ja * n_b + jb);
                    }
                }
            }
        }
        Ok(st)
    }

    fn rhs(&self, g: &Generator, out: &mut [Complex64]) {
        let (n_b, d) = (self.n_b, self.rows());
        let blen = self.block_len();
        out.par_chunks_mut(n_b).enumerate().for_each(|(r, chunk)| {
            let (s, row) = (r / d, r % d);
            let delta = DELTAS[s];
            let base = &self.data[s * blen..(s + 1) * blen];
            let get = |ka: usize, kb: usize, _la: usize, lb: usize| base[(ka * n_b + kb) * n_b + lb];
            let (ia, ib) = (row / n_b, row % n_b);
            for (jb, slot) in chunk.iter_mut().enumerate() {
                *slot = match self.col_a(row, delta, jb) {
                    Some(ja) => g.element(ia, ib, ja, jb, get),
                    None => Complex64::new(0.0, 0.0),
                };
            }
        });
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows()).map(|row| self.at(0, row, row % self.n_b)).sum()
    }

    /// Population of the two top levels of each mode, largest of the two.
    pub fn leakage(&self) -> f64 {
        let (la, lb) = self.leakage_per_mode();
        f64::max(la, lb)
    }

    /// Top-two-level populations of modes a and b.
    pub fn leakage_per_mode(&self) -> (f64, f64) {
        let (mut la, mut lb) = (0.0, 0.0);
        for row in 0..self.rows() {
            let (ia, ib) = (row / self.n_b, row % self.n_b);
            let p = self.at(0, row, ib).re;
            if self.n_a > 2 && ia + 2 >= self.n_a {
                la += p;
            }
            if self.n_b > 2 && ib + 2 >= self.n_b {
                lb += p;
            }
        }
        (la, lb)
    }

    pub fn moments(&self) -> MomentSet {
        let mut m = MomentSet::coherent(0.0.into(), 0.0.into());
        let sq = |k: usize| (k as f64).sqrt();
        for row in 0..self.rows() {
            let (ia, ib) = (row / self.n_b, row % self.n_b);
            let p = self.at(0, row, ib).re;
            m.n_a += ia as f64 * p;
            m.n_b += ib as f64 * p;
            if ia >= 1 {
                m.mean_a += sq(ia) * self.at(1, row, ib);
            }
            if ib >= 1 {
                m.mean_b += sq(ib) * self.at(1, row, ib - 1);
            }
            if ia >= 1 && ib >= 1 {
                m.ab += sq(ia) * sq(ib) * self.at(2, row, ib - 1);
            }
            if ib >= 2 {
                m.bb += sq(ib) * sq(ib - 1) * self.at(2, row, ib - 2);
            }
            if ia + 1 < self.n_a && ib + 1 < self.n_b {
                m.adag_bdag += sq(ia + 1) * sq(ib + 1) * self.at(3, row, ib + 1);
            }
        }
        m
    }

    /// `max |rho_ij - conj(rho_ji)|` over the diagonal block and the +-2 pair.
    pub fn hermiticity_error(&self) -> f64 {
        let n_b = self.n_b;
        let mut e: f64 = 0.0;
        for row in 0..self.rows() {
            let ib = row % n_b;
            for jb in 0..n_b {
                if let Some(ja) = self.col_a(row, 0, jb) {
                    let mirror = self.at(0, ja * n_b + jb, ib);
                    e = e.max((self.at(0, row, jb) - mirror.conj()).norm());
                }
                if let Some(ja) = self.col_a(row, 2, jb) {
                    let mirror = self.at(3, ja * n_b + jb, ib);
                    e = e.max((self.at(2, row, jb) - mirror.conj()).norm());
                }
            }
        }
        e
    }
}

pub(super) fn evolve_sectors(run: &OracleRun, init: &InitialState, steps: &[usize]) -> Result<OracleOutput> {
    let (n_a, n_b) = (run.dims.n_a, run.dims.n_b);
    let g = Generator::new(&run.params, run.dims);
    let mut y = SectorState::from_initial(n_a, n_b, init)?;
    let len = y.data.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; len], vec![zero; len], vec![zero; len], vec![zero; len]);
    let mut tmp = y.clone();
    let h = run.dt;
    let trace0 = y.trace();

    let mut out = OracleOutput { series: TimeSeries::new(), diagnostics: Vec::new(), max_leakage: 0.0, max_trace_drift: 0.0 };
    let mut k = 0usize;
    let stage = |tmp: &mut SectorState, y: &SectorState, kk: &[Complex64], s: f64| {
        tmp.data.par_iter_mut().zip(y.data.par_iter().zip(kk.par_iter())).for_each(|(t, (a, b))| *t = a + s * b);
    };
    for (idx, &target) in steps.iter().enumerate() {
        while k < target {
            y.rhs(&g, &mut k1);
            stage(&mut tmp, &y, &k1, 0.5 * h);
            tmp.rhs(&g, &mut k2);
            stage(&mut tmp, &y, &k2, 0.5 * h);
            tmp.rhs(&g, &mut k3);
            stage(&mut tmp, &y, &k3, h);
            tmp.rhs(&g, &mut k4);
            y.data
                .par_iter_mut()
                .zip(k1.par_iter().zip(k2.par_iter().zip(k3.par_iter().zip(k4.par_iter()))))
                .for_each(|(v, (a, (b, (c, d))))| *v += h / 6.0 * (a + 2.0 * b + 2.0 * c + d));
            k += 1;
            let leak = y.leakage();
            out.max_leakage = out.max_leakage.max(leak);
            if !(leak <= run.leak_threshold) {
                return Err(Error::Truncation { t: k as f64 * h, leakage: leak, threshold: run.leak_threshold });
            }
        }
        let drift = (y.trace() - trace0).norm();
        out.max_trace_drift = out.max_trace_drift.max(drift);
        out.series.push(run.t_grid[idx], y.moments());
        let (leakage_a, leakage_b) = y.leakage_per_mode();
        out.diagnostics.push(SampleDiagnostics {
            t: run.t_grid[idx],
            trace_drift: drift,
            leakage_a,
            leakage_b,
            hermiticity: y.hermiticity_error(),
        });
    }
    Ok(out)
}
