//! Data-parallel evaluation over a `(J/kappa, kappa t)` grid.

use ptkerr::nonlinear::{change_ratio, closed_form_moments, d3_resolved, ChangeRatioOptions, ClosedFormOptions, Variant};
use ptkerr::{derive_constants, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Engine, ScenarioConfig, SweepQuantity};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

/// Why a cell holds NaN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    /// A normalizing denominator vanished, e.g. a linear quadrature that is
    /// identically zero.
    DenominatorUnderflow,
    /// The closed form or witness is undefined at this point.
    Degenerate,
    Quadrature,
    NonFinite,
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::DenominatorUnderflow => "DENOMINATOR_UNDERFLOW",
            Reason::Degenerate => "DEGENERATE",
            Reason::Quadrature => "QUADRATURE",
            Reason::NonFinite => "NON_FINITE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSurface {
    pub j_axis: Vec<f64>,
    /// `kappa t` values.
    pub t_axis: Vec<f64>,
    /// Rows follow `j_axis`.
    pub values: Vec<Vec<f64>>,
    pub reasons: Vec<Vec<Option<Reason>>>,
    pub quantity: String,
}

impl SweepSurface {
    /// Long format: one row per cell.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["j_over_kappa", "kappa_t", "value", "reason"]);
        for (i, j) in self.j_axis.iter().enumerate() {
            for (k, x) in self.t_axis.iter().enumerate() {
                let r = self.reasons[i][k].map(|r| r.code()).unwrap_or("");
                t.push(vec![Cell::Num(*j), Cell::Num(*x), Cell::Num(self.values[i][k]), r.into()]);
            }
        }
        t
    }
}

pub fn quantity_tag(q: SweepQuantity, v: Variant) -> String {
    let v = match v {
        Variant::Noisy => "NOISY",
        Variant::Noiseless => "NOISELESS",
    };
    match q {
        SweepQuantity::ChangeRatio => format!("CHANGE_RATIO/{v}"),
        SweepQuantity::D3 => format!("D3/{v}"),
    }
}

/// Closed-form variant implied by the scenario engine.
pub fn variant_of(engine: Engine) -> CliResult<Variant> {
    match engine {
        Engine::Noisy => Ok(Variant::Noisy),
        Engine::Noiseless => Ok(Variant::Noiseless),
        other => Err(CliError::Config(format!("sweeps need variant NOISY or NOISELESS, got {other:?}"))),
    }
}

/// Value of one cell, or the reason it is missing. Errors other than the
/// per-cell ones (regime, invalid parameters) abort the sweep.
pub fn cell(config: &ScenarioConfig, q: SweepQuantity, v: Variant, j_over_kappa: f64, kappa_t: f64) -> CliResult<Result<f64, Reason>> {
    let p = config.params.with_j(j_over_kappa).coupler()?;
    let dc = derive_constants(&p);
    let t = kappa_t / p.kappa;
    let r = match q {
        SweepQuantity::ChangeRatio => change_ratio(&dc, p.chi, p.alpha0, t, v, &ChangeRatioOptions::default()),
        SweepQuantity::D3 => closed_form_moments(&dc, p.chi, p.alpha0, t, v, &ClosedFormOptions::d3()).and_then(|m| d3_resolved(&m).map(|d| d.value)),
    };
    Ok(match r {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(Reason::NonFinite),
        Err(Error::Degenerate(msg)) if msg.contains("vanish") => Err(Reason::DenominatorUnderflow),
        Err(Error::Degenerate(_)) => Err(Reason::Degenerate),
        Err(Error::Quadrature { .. }) => Err(Reason::Quadrature),
        Err(e) => return Err(e.into()),
    })
}

/// Evaluates the sweep block of `config`; rows run in parallel on the current
/// rayon pool, cells are pure, so the result does not depend on the pool size.
pub fn sweep(config: &ScenarioConfig) -> CliResult<SweepSurface> {
    config.validate()?;
    let s = config.sweep.ok_or_else(|| CliError::Config("missing [sweep] block".into()))?;
    let v = variant_of(config.variant)?;
    let j_axis = s.j_axis();
    let t_axis = config.kappa_t_grid();
    let rows: Vec<CliResult<Vec<Result<f64, Reason>>>> = j_axis
        .par_iter()
        .map(|&j| t_axis.iter().map(|&x| cell(config, s.quantity, v, j, x)).collect())
        .collect();
    let mut values = Vec::with_capacity(rows.len());
    let mut reasons = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row?;
        values.push(row.iter().map(|c| c.unwrap_or(f64::NAN)).collect());
        reasons.push(row.iter().map(|c| c.err()).collect());
    }
    Ok(SweepSurface { j_axis, t_axis, values, reasons, quantity: quantity_tag(s.quantity, v) })
}
