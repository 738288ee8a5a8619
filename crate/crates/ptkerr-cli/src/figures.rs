//! Named presets that regenerate each figure's data set.

use ptkerr::linear::linear_moments;
use ptkerr::nonlinear::{closed_form_moments, d3_resolved, eb1_weight, quadrature_mean, ClosedFormOptions, D3};
use ptkerr::{derive_constants, Complex64};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::config::{Engine, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};
use crate::sweep::{sweep, variant_of, SweepSurface};

pub const FIGURES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigurePreset {
    pub name: String,
    pub description: String,
    pub scenario: ScenarioConfig,
    /// Overrides `scenario.params.j_over_kappa`, one data set per value.
    #[serde(default)]
    pub j_values: Vec<f64>,
    /// Overrides `scenario.params.chi_over_kappa`, one data set per value.
    #[serde(default)]
    pub chi_values: Vec<f64>,
    /// Overrides `scenario.variant`.
    #[serde(default)]
    pub variants: Vec<Engine>,
}

impl FigurePreset {
    pub fn load(name: &str) -> CliResult<Self> {
        let text = match name {
            "fig2" => include_str!("../presets/fig2.toml"),
            "fig3" => include_str!("../presets/fig3.toml"),
            "fig4" => include_str!("../presets/fig4.toml"),
            "fig5" => include_str!("../presets/fig5.toml"),
            "fig6" => include_str!("../presets/fig6.toml"),
            "fig7" => include_str!("../presets/fig7.toml"),
            other => return Err(CliError::Config(format!("unknown figure {other}; expected one of {FIGURES:?}"))),
        };
        let p: Self = toml::from_str(text).map_err(|e| CliError::Config(format!("preset {name}: {e}")))?;
        p.scenario.validate()?;
        Ok(p)
    }

    pub fn j_values(&self) -> Vec<f64> {
        if self.j_values.is_empty() {
            vec![self.scenario.params.j_over_kappa]
        } else {
            self.j_values.clone()
        }
    }

    pub fn chi_values(&self) -> Vec<f64> {
        if self.chi_values.is_empty() {
            vec![self.scenario.params.chi_over_kappa]
        } else {
            self.chi_values.clone()
        }
    }

    pub fn variants(&self) -> Vec<Engine> {
        if self.variants.is_empty() {
            vec![self.scenario.variant]
        } else {
            self.variants.clone()
        }
    }

    /// Scenario for one `(J, chi, variant)` combination.
    pub fn scenario_for(&self, j: f64, chi: f64, engine: Engine) -> ScenarioConfig {
        let mut s = self.scenario.clone();
        s.params.j_over_kappa = j;
        s.params.chi_over_kappa = chi;
        s.variant = engine;
        s
    }
}

/// `(X_A, P_A, X_B, P_B)` on the `kappa t` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadratures {
    pub t: Vec<f64>,
    pub x_a: Vec<f64>,
    pub p_a: Vec<f64>,
    pub x_b: Vec<f64>,
    pub p_b: Vec<f64>,
    pub abs_b: Vec<f64>,
    pub n_b: Vec<f64>,
}

impl Quadratures {
    fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self { t: v(), x_a: v(), p_a: v(), x_b: v(), p_b: v(), abs_b: v(), n_b: v() }
    }

    fn push(&mut self, t: f64, a: Complex64, b: Complex64, n_b: f64) {
        self.t.push(t);
        self.x_a.push(quadrature_mean(a, 0.0));
        self.p_a.push(quadrature_mean(a, FRAC_PI_2));
        self.x_b.push(quadrature_mean(b, 0.0));
        self.p_b.push(quadrature_mean(b, FRAC_PI_2));
        self.abs_b.push(b.norm());
        self.n_b.push(n_b);
    }
}

/// Closed-form (NOISY/NOISELESS) or exact linear (LINEAR) quadratures.
pub fn quadratures(config: &ScenarioConfig) -> CliResult<Quadratures> {
    let p = config.coupler()?;
    let dc = derive_constants(&p);
    let grid = config.kappa_t_grid();
    let mut q = Quadratures::with_capacity(grid.len());
    for x in grid {
        let t = x / p.kappa;
        let m = match config.variant {
            Engine::Linear => linear_moments(&dc, p.alpha0, t)?,
            e => closed_form_moments(&dc, p.chi, p.alpha0, t, variant_of(e)?, &ClosedFormOptions::default())?,
        };
        q.push(x, m.mean_a, m.mean_b, m.n_b);
    }
    Ok(q)
}

/// D3 with its rounding bound, from the main-term moments.
pub fn d3_series(config: &ScenarioConfig) -> CliResult<(Vec<f64>, Vec<D3>)> {
    let p = config.coupler()?;
    let dc = derive_constants(&p);
    let v = variant_of(config.variant)?;
    let grid = config.kappa_t_grid();
    let mut out = Vec::with_capacity(grid.len());
    for &x in &grid {
        let m = closed_form_moments(&dc, p.chi, p.alpha0, x / p.kappa, v, &ClosedFormOptions::d3())?;
        out.push(d3_resolved(&m)?);
    }
    Ok((grid, out))
}

pub fn eb1_weight_series(config: &ScenarioConfig) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let p = config.coupler()?;
    let dc = derive_constants(&p);
    let grid = config.kappa_t_grid();
    let tol = ClosedFormOptions::default().eb1_rel_tol;
    let w = grid.iter().map(|&x| eb1_weight(&dc, p.chi, p.alpha0, x / p.kappa, tol)).collect::<Result<Vec<_>, _>>()?;
    Ok((grid, w))
}

fn variant_label(e: Engine) -> &'static str {
    match e {
        Engine::Noisy => "NOISY",
        Engine::Noiseless => "NOISELESS",
        Engine::Linear => "LINEAR",
        Engine::Meanfield => "MEANFIELD",
        Engine::Oracle => "ORACLE",
    }
}

/// One emitted data set: a file stem suffix and its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub suffix: String,
    pub table: Table,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutput {
    pub preset: FigurePreset,
    pub tables: Vec<FigureTable>,
    pub surfaces: Vec<SweepSurface>,
}

/// Evaluates a preset. `n_samples` and `j_steps` shrink or refine the grids.
pub fn run_figure(name: &str, n_samples: Option<usize>, j_steps: Option<usize>) -> CliResult<FigureOutput> {
    let mut preset = FigurePreset::load(name)?;
    if let Some(n) = n_samples {
        preset.scenario.n_samples = n;
    }
    if let (Some(n), Some(s)) = (j_steps, preset.scenario.sweep.as_mut()) {
        s.j_steps = n;
    }
    preset.scenario.validate()?;
    let mut out = FigureOutput { preset: preset.clone(), tables: Vec::new(), surfaces: Vec::new() };
    let chi0 = preset.scenario.params.chi_over_kappa;
    let j0 = preset.scenario.params.j_over_kappa;
    match name {
        "fig2" | "fig3" => {
            for v in preset.variants() {
                let s = sweep(&preset.scenario_for(j0, chi0, v))?;
                out.tables.push(FigureTable { suffix: variant_label(v).to_lowercase(), table: s.table() });
                out.surfaces.push(s);
            }
        }
        "fig4" => {
            let nl = quadratures(&preset.scenario)?;
            let lin = quadratures(&preset.scenario_for(j0, chi0, Engine::Linear))?;
            let mut t = Table::new(&[
                "kappa_t", "x_a", "p_a", "x_b", "p_b", "x_a_linear", "p_a_linear", "x_b_linear", "p_b_linear", "n_b",
            ]);
            for k in 0..nl.t.len() {
                t.push(
                    [nl.t[k], nl.x_a[k], nl.p_a[k], nl.x_b[k], nl.p_b[k], lin.x_a[k], lin.p_a[k], lin.x_b[k], lin.p_b[k], nl.n_b[k]]
                        .into_iter()
                        .map(Cell::Num)
                        .collect(),
                );
            }
            out.tables.push(FigureTable { suffix: "quadratures".into(), table: t });
        }
        "fig5" => {
            let mut t = Table::new(&["chi_over_kappa", "kappa_t", "eb1_weight"]);
            for chi in preset.chi_values() {
                let (grid, w) = eb1_weight_series(&preset.scenario_for(j0, chi, preset.scenario.variant))?;
                for (x, y) in grid.iter().zip(&w) {
                    t.push(vec![Cell::Num(chi), Cell::Num(*x), Cell::Num(*y)]);
                }
            }
            out.tables.push(FigureTable { suffix: "eb1_weight".into(), table: t });
        }
        "fig6" => {
            let mut t = Table::new(&["j_over_kappa", "variant", "kappa_t", "x_a", "p_a", "x_b", "p_b"]);
            for j in preset.j_values() {
                for v in preset.variants() {
                    let q = quadratures(&preset.scenario_for(j, chi0, v))?;
                    for k in 0..q.t.len() {
                        t.push(vec![
                            Cell::Num(j),
                            variant_label(v).into(),
                            Cell::Num(q.t[k]),
                            Cell::Num(q.x_a[k]),
                            Cell::Num(q.p_a[k]),
                            Cell::Num(q.x_b[k]),
                            Cell::Num(q.p_b[k]),
                        ]);
                    }
                }
            }
            out.tables.push(FigureTable { suffix: "quadratures".into(), table: t });
        }
        "fig7" => {
            let mut t = Table::new(&["j_over_kappa", "variant", "kappa_t", "d3", "resolution", "negative"]);
            for j in preset.j_values() {
                for v in preset.variants() {
                    let (grid, d) = d3_series(&preset.scenario_for(j, chi0, v))?;
                    for (x, d) in grid.iter().zip(&d) {
                        t.push(vec![
                            Cell::Num(j),
                            variant_label(v).into(),
                            Cell::Num(*x),
                            Cell::Num(d.value),
                            Cell::Num(d.resolution),
                            Cell::Num(if d.is_negative() { 1.0 } else { 0.0 }),
                        ]);
                    }
                }
            }
            out.tables.push(FigureTable { suffix: "d3".into(), table: t });
        }
        _ => unreachable!("validated by FigurePreset::load"),
    }
    Ok(out)
}
