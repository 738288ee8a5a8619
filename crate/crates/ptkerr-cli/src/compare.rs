//! Per-moment comparison of two time series on the same grid.

use std::collections::BTreeMap;

use ptkerr::TimeSeries;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Magnitudes below this are compared absolutely.
pub const RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceTable {
    pub default: f64,
    #[serde(default)]
    pub per_moment: BTreeMap<String, f64>,
}

impl ToleranceTable {
    pub fn uniform(tol: f64) -> Self {
        Self { default: tol, per_moment: BTreeMap::new() }
    }

    pub fn get(&self, name: &str) -> f64 {
        self.per_moment.get(name).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentError {
    pub moment: String,
    pub max_relative: f64,
    pub mean_relative: f64,
    /// `kappa t` of the largest error.
    pub worst_t: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub moments: Vec<MomentError>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Relative error of `candidate` against `reference`, moment by moment.
/// Moments missing (NaN) on either side at every sample are skipped.
pub fn compare(candidate: &TimeSeries, reference: &TimeSeries, tol: &ToleranceTable) -> CliResult<CompareReport> {
    if candidate.t.len() != reference.t.len() {
        return Err(CliError::GridMismatch(format!("{} vs {} samples", candidate.t.len(), reference.t.len())));
    }
    for (k, (a, b)) in candidate.t.iter().zip(&reference.t).enumerate() {
        if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1.0) {
            return Err(CliError::GridMismatch(format!("sample {k}: t = {a} vs {b}")));
        }
    }
    let names: Vec<&'static str> = match candidate.moments.first() {
        Some(m) => m.components().iter().map(|c| c.0).collect(),
        None => Vec::new(),
    };
    let mut moments = Vec::new();
    for (ci, name) in names.iter().enumerate() {
        let mut max_rel: f64 = 0.0;
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut worst_t = 0.0;
        for (k, (x, y)) in candidate.moments.iter().zip(&reference.moments).enumerate() {
            let u = x.components()[ci].1;
            let v = y.components()[ci].1;
            let finite = u.re.is_finite() && u.im.is_finite() && v.re.is_finite() && v.im.is_finite();
            if !finite {
                continue;
            }
            let r = (u - v).norm() / v.norm().max(RELATIVE_FLOOR);
            if r > max_rel || n == 0 {
                max_rel = max_rel.max(r);
                worst_t = candidate.t[k];
            }
            sum += r;
            n += 1;
        }
        if n == 0 {
            continue;
        }
        let tolerance = tol.get(name);
        moments.push(MomentError {
            moment: name.to_string(),
            max_relative: max_rel,
            mean_relative: sum / n as f64,
            worst_t,
            tolerance,
            pass: max_rel <= tolerance,
        });
    }
    let pass = moments.iter().all(|m| m.pass);
    Ok(CompareReport { moments, pass, note: None })
}
