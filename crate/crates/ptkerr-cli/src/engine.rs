//! Dispatch from a scenario to one of the time-series engines.

use ptkerr::linear::linear_moments;
use ptkerr::meanfield::{integrate_meanfield, MeanFieldOptions};
use ptkerr::nonlinear::{closed_form_moments, ClosedFormOptions, Variant};
use ptkerr::oracle::{evolve, product_coherent, FockDims, InitialState, OracleRun, SampleDiagnostics};
use ptkerr::{derive_constants, Complex64, MomentSet, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::config::{Engine, ScenarioConfig};
use crate::error::{CliError, CliResult};

/// A time series on the `kappa t` grid plus whatever diagnostics the engine
/// produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRun {
    pub engine: Engine,
    pub series: TimeSeries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oracle_diagnostics: Vec<SampleDiagnostics>,
}

pub fn tolerance_note(engine: Engine, config: &ScenarioConfig) -> String {
    match engine {
        Engine::Linear => "exact closed form".into(),
        Engine::Noisy | Engine::Noiseless => {
            let o = ClosedFormOptions::default();
            format!("noise-phase quadrature rel_tol={:e}; growing components only", o.eb1_rel_tol)
        }
        Engine::Meanfield => "RK4 kappa*h=1e-3 with step-halving estimate".into(),
        Engine::Oracle => match &config.oracle {
            Some(o) => format!("RK4 kappa*dt={:e}; leak_threshold={:e}", o.dt, o.leak_threshold),
            None => String::new(),
        },
    }
}

pub fn run_series(config: &ScenarioConfig) -> CliResult<SeriesRun> {
    run_series_with(config, config.variant)
}

/// Runs `engine` on the scenario's parameters and grid.
pub fn run_series_with(config: &ScenarioConfig, engine: Engine) -> CliResult<SeriesRun> {
    config.validate()?;
    let p = config.coupler()?;
    let dc = derive_constants(&p);
    let kt = config.kappa_t_grid();
    let phys: Vec<f64> = kt.iter().map(|x| x / p.kappa).collect();
    let mut out = SeriesRun { engine, series: TimeSeries::new(), meanfield_error: None, oracle_diagnostics: Vec::new() };
    match engine {
        Engine::Linear => {
            for (&x, &t) in kt.iter().zip(&phys) {
                out.series.push(x, linear_moments(&dc, p.alpha0, t)?);
            }
        }
        Engine::Noisy | Engine::Noiseless => {
            let v = if engine == Engine::Noisy { Variant::Noisy } else { Variant::Noiseless };
            let opts = ClosedFormOptions::default();
            for (&x, &t) in kt.iter().zip(&phys) {
                out.series.push(x, closed_form_moments(&dc, p.chi, p.alpha0, t, v, &opts)?);
            }
        }
        Engine::Meanfield => {
            let opts = MeanFieldOptions { step: Some(1e-3 / p.kappa), ..Default::default() };
            let run = integrate_meanfield(&p, p.alpha0, &phys, &opts)?;
            for (&x, s) in kt.iter().zip(&run.states) {
                out.series.push(x, MomentSet::coherent(s.alpha, s.beta));
            }
            out.meanfield_error = Some(run.error_estimate);
        }
        Engine::Oracle => {
            let o = config.oracle.ok_or_else(|| CliError::Config("missing [oracle] block".into()))?;
            let dims = FockDims::new(o.n_a, o.n_b)?;
            let mut run = OracleRun::new(p, dims, o.dt / p.kappa, phys);
            run.leak_threshold = o.leak_threshold;
            run.max_total_dim = o.max_total_dim;
            let psi = product_coherent(dims, p.alpha0, Complex64::new(0.0, 0.0))?;
            let res = evolve(&run, &InitialState::Pure(psi))?;
            for (x, m) in kt.iter().zip(res.series.moments) {
                out.series.push(*x, m);
            }
            out.oracle_diagnostics = res.diagnostics;
            for d in &mut out.oracle_diagnostics {
                d.t *= p.kappa;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{OracleConfig, OutputConfig, ParamsConfig};

    fn config(engine: Engine, j: f64) -> ScenarioConfig {
        ScenarioConfig {
            params: ParamsConfig { kappa: 1.0, j_over_kappa: j, chi_over_kappa: 0.0, alpha0_re: 1.0, alpha0_im: 0.0 },
            variant: engine,
            t_max: 0.2,
            n_samples: 3,
            sweep: None,
            oracle: Some(OracleConfig { n_a: 32, n_b: 16, dt: 1e-3, leak_threshold: 1e-6, max_total_dim: 4096 }),
            output: OutputConfig::default(),
        }
    }

    #[test]
    fn engines_agree_in_the_linear_limit() {
        let lin = run_series(&config(Engine::Linear, 0.6)).unwrap();
        let mf = run_series(&config(Engine::Meanfield, 0.6)).unwrap();
        let or = run_series(&config(Engine::Oracle, 0.6)).unwrap();
        for k in 0..3 {
            let (l, m, o) = (&lin.series.moments[k], &mf.series.moments[k], &or.series.moments[k]);
            assert!((l.mean_b - m.mean_b).norm() < 1e-10);
            assert!((l.mean_b - o.mean_b).norm() < 1e-8);
            assert!((l.n_a - o.n_a).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_forms_refuse_symmetric_regime() {
        let e = run_series(&config(Engine::Noisy, 1.5)).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }

    #[test]
    fn kappa_scaling_keeps_kappa_t_grid() {
        let mut c = config(Engine::Linear, 0.6);
        let a = run_series(&c).unwrap();
        c.params.kappa = 2.5;
        let b = run_series(&c).unwrap();
        assert_eq!(a.series.t, b.series.t);
        for (x, y) in a.series.moments.iter().zip(&b.series.moments) {
            assert!((x.mean_b - y.mean_b).norm() < 1e-13);
        }
    }
}
