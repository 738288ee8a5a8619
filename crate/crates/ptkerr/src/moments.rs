use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// First and second moments of the two modes at one instant.
///
/// `bb` is `<b b>`; the oracle extracts it directly and the analytic modules
/// supply their closed form, so both sides of a comparison carry it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean_a: Complex64,
    pub mean_b: Complex64,
    pub n_a: f64,
    pub n_b: f64,
    pub ab: Complex64,
    pub adag_bdag: Complex64,
    pub bb: Complex64,
}

impl MomentSet {
    /// Moments of the product coherent state `|alpha>|beta>`.
    pub fn coherent(alpha: Complex64, beta: Complex64) -> Self {
        let ab = alpha * beta;
        Self {
            mean_a: alpha,
            mean_b: beta,
            n_a: alpha.norm_sqr(),
            n_b: beta.norm_sqr(),
            ab,
            adag_bdag: ab.conj(),
            bb: beta * beta,
        }
    }

    pub fn nan() -> Self {
        let z = Complex64::new(f64::NAN, f64::NAN);
        Self { mean_a: z, mean_b: z, n_a: f64::NAN, n_b: f64::NAN, ab: z, adag_bdag: z, bb: z }
    }

    /// Named components in the order used by tabular output and comparisons.
    pub fn components(&self) -> [(&'static str, Complex64); 7] {
        [
            ("a", self.mean_a),
            ("b", self.mean_b),
            ("n_a", Complex64::new(self.n_a, 0.0)),
            ("n_b", Complex64::new(self.n_b, 0.0)),
            ("ab", self.ab),
            ("adag_bdag", self.adag_bdag),
            ("bb", self.bb),
        ]
    }
}

/// Moments sampled on a uniform grid of dimensionless time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub moments: Vec<MomentSet>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self { t: Vec::new(), moments: Vec::new() }
    }

    pub fn push(&mut self, t: f64, m: MomentSet) {
        self.t.push(t);
        self.moments.push(m);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

impl Default for TimeSeries {
    fn default() -> Self {
        Self::new()
    }
}

/// `n` evenly spaced points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let step = t_max / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { t_max } else { step * k as f64 }).collect()
}
