//! Command-line surface. Flags mirror the scenario fields and override a
//! `--config` file when both are given.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptkerr::derive_constants;

use crate::compare::{compare, ToleranceTable};
use crate::config::{Engine, OracleConfig, OutputConfig, OutputFormat, ParamsConfig, ScenarioConfig, SweepConfig, SweepQuantity};
use crate::engine::{run_series_with, tolerance_note};
use crate::error::{CliError, CliResult};
use crate::figures::run_figure;
use crate::output::{create, emit_series, header_lines, read_series_csv, write_json, write_table};
use crate::sweep::sweep;

#[derive(Debug, Parser)]
#[command(name = "ptkerr", version, about = "Gain/loss Kerr coupler: closed forms, sweeps, Lindblad oracle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print regime and spectral constants as JSON.
    Derive(ScenarioArgs),
    /// Exact linear-coupler moments.
    Linear(ScenarioArgs),
    /// Time series from the chosen engine.
    Evolve {
        #[arg(long, value_enum)]
        variant: Option<EngineArg>,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Truncated-Fock Lindblad integration.
    Oracle {
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Change ratio or D3 over a (J/kappa, kappa t) grid.
    Sweep {
        #[arg(long, value_enum)]
        variant: Option<EngineArg>,
        #[arg(long)]
        j_min: Option<f64>,
        #[arg(long)]
        j_max: Option<f64>,
        #[arg(long)]
        j_steps: Option<usize>,
        #[arg(long, value_enum)]
        quantity: Option<QuantityArg>,
        #[arg(long)]
        margin: Option<f64>,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Per-moment relative errors of CANDIDATE against REFERENCE (series CSVs).
    /// Exit 0 when every moment is within tolerance, 1 otherwise.
    Compare {
        candidate: PathBuf,
        reference: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Per-moment override, `name=value` (names: a, b, n_a, n_b).
        #[arg(long = "tol-moment", value_parser = parse_moment_tol)]
        tol_moment: Vec<(String, f64)>,
    },
    /// Regenerate one figure's data into a directory.
    Figure {
        #[arg(value_parser = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"])]
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        n_samples: Option<usize>,
        #[arg(long)]
        j_steps: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EngineArg {
    Noisy,
    Noiseless,
    Linear,
    Meanfield,
    Oracle,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Noisy => Engine::Noisy,
            EngineArg::Noiseless => Engine::Noiseless,
            EngineArg::Linear => Engine::Linear,
            EngineArg::Meanfield => Engine::Meanfield,
            EngineArg::Oracle => Engine::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QuantityArg {
    ChangeRatio,
    D3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

fn parse_moment_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s}"))?;
    let v: f64 = v.parse().map_err(|e| format!("{v}: {e}"))?;
    Ok((k.to_string(), v))
}

#[derive(Debug, Clone, Args, Default)]
pub struct ScenarioArgs {
    /// TOML scenario (JSON when the extension is .json).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// J/kappa.
    #[arg(long = "j")]
    pub j_over_kappa: Option<f64>,
    /// chi/kappa.
    #[arg(long = "chi")]
    pub chi_over_kappa: Option<f64>,
    #[arg(long)]
    pub alpha0_re: Option<f64>,
    #[arg(long)]
    pub alpha0_im: Option<f64>,
    /// Horizon in units of 1/kappa.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct OracleArgs {
    #[arg(long)]
    pub n_a: Option<usize>,
    #[arg(long)]
    pub n_b: Option<usize>,
    /// Step in units of 1/kappa.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub leak_threshold: Option<f64>,
    #[arg(long)]
    pub max_total_dim: Option<usize>,
}

impl ScenarioArgs {
    /// Config file (if any) with flag overrides applied.
    pub fn resolve(&self, default_engine: Engine) -> CliResult<ScenarioConfig> {
        let mut c = match &self.config {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig {
                params: ParamsConfig {
                    kappa: 1.0,
                    j_over_kappa: self.j_over_kappa.ok_or_else(|| CliError::Config("--j is required without --config".into()))?,
                    chi_over_kappa: 0.0,
                    alpha0_re: 0.0,
                    alpha0_im: 0.0,
                },
                variant: default_engine,
                t_max: 1.0,
                n_samples: 101,
                sweep: None,
                oracle: None,
                output: OutputConfig::default(),
            },
        };
        let p = &mut c.params;
        if let Some(v) = self.kappa {
            p.kappa = v;
        }
        if let Some(v) = self.j_over_kappa {
            p.j_over_kappa = v;
        }
        if let Some(v) = self.chi_over_kappa {
            p.chi_over_kappa = v;
        }
        if let Some(v) = self.alpha0_re {
            p.alpha0_re = v;
        }
        if let Some(v) = self.alpha0_im {
            p.alpha0_im = v;
        }
        if let Some(v) = self.t_max {
            c.t_max = v;
        }
        if let Some(v) = self.n_samples {
            c.n_samples = v;
        }
        if let Some(v) = &self.output {
            c.output.path = Some(v.clone());
        }
        if let Some(f) = self.format {
            c.output.format = match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        Ok(c)
    }
}

fn series_command(mut c: ScenarioConfig, engine: Engine) -> CliResult<i32> {
    c.variant = engine;
    c.validate()?;
    let run = run_series_with(&c, engine)?;
    let mut notes = vec![format!("engine: {engine:?}"), format!("tolerances: {}", tolerance_note(engine, &c))];
    notes.push("time column is kappa*t".into());
    if let Some(e) = run.meanfield_error {
        notes.push(format!("meanfield error estimate: {e:e}"));
    }
    if let Some(d) = run.oracle_diagnostics.last() {
        notes.push(format!("oracle final trace drift: {:e}; leakage a/b: {:e}/{:e}", d.trace_drift, d.leakage_a, d.leakage_b));
    }
    emit_series(&c, &run, &notes)?;
    Ok(0)
}

pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Derive(a) => {
            let c = a.resolve(Engine::Linear)?;
            let dc = derive_constants(&c.coupler()?);
            println!("{}", serde_json::to_string_pretty(&dc).expect("serializable"));
            Ok(0)
        }
        Command::Linear(a) => series_command(a.resolve(Engine::Linear)?, Engine::Linear),
        Command::Evolve { variant, scenario } => {
            let c = scenario.resolve(Engine::Noisy)?;
            let e = variant.map(Engine::from).unwrap_or(c.variant);
            series_command(c, e)
        }
        Command::Oracle { oracle, scenario } => {
            let mut c = scenario.resolve(Engine::Oracle)?;
            let mut o = c.oracle.unwrap_or(OracleConfig { n_a: 0, n_b: 0, dt: 1e-3, leak_threshold: 1e-6, max_total_dim: 4096 });
            if let Some(v) = oracle.n_a {
                o.n_a = v;
            }
            if let Some(v) = oracle.n_b {
                o.n_b = v;
            }
            if let Some(v) = oracle.dt {
                o.dt = v;
            }
            if let Some(v) = oracle.leak_threshold {
                o.leak_threshold = v;
            }
            if let Some(v) = oracle.max_total_dim {
                o.max_total_dim = v;
            }
            c.oracle = Some(o);
            series_command(c, Engine::Oracle)
        }
        Command::Sweep { variant, j_min, j_max, j_steps, quantity, margin, scenario } => {
            let mut c = scenario.resolve(Engine::Noisy)?;
            if let Some(v) = variant {
                c.variant = v.into();
            }
            let j0 = c.params.j_over_kappa;
            let mut s = c.sweep.unwrap_or(SweepConfig {
                j_min: j0,
                j_max: j0,
                j_steps: 1,
                quantity: SweepQuantity::ChangeRatio,
                margin: 1e-3,
            });
            if let Some(v) = j_min {
                s.j_min = v;
            }
            if let Some(v) = j_max {
                s.j_max = v;
            }
            if let Some(v) = j_steps {
                s.j_steps = v;
            }
            if let Some(q) = quantity {
                s.quantity = match q {
                    QuantityArg::ChangeRatio => SweepQuantity::ChangeRatio,
                    QuantityArg::D3 => SweepQuantity::D3,
                };
            }
            if let Some(m) = margin {
                s.margin = m;
            }
            c.sweep = Some(s);
            let surface = sweep(&c)?;
            let notes = vec![format!("quantity: {}", surface.quantity), "time column is kappa*t".into()];
            let header = header_lines(&c, &notes);
            match (&c.output.path, c.output.format) {
                (None, OutputFormat::Csv) => write_table(std::io::stdout().lock(), &header, &surface.table())?,
                (None, OutputFormat::Json) => write_json(std::io::stdout().lock(), &c, &notes, &surface)?,
                (Some(p), OutputFormat::Csv) => {
                    write_table(create(p)?, &header, &surface.table())?;
                    write_json(create(&p.with_extension("json"))?, &c, &notes, &surface)?;
                }
                (Some(p), OutputFormat::Json) => write_json(create(p)?, &c, &notes, &surface)?,
            }
            Ok(0)
        }
        Command::Compare { candidate, reference, tol, tol_moment } => {
            let read = |p: &PathBuf| -> CliResult<_> {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                read_series_csv(&text)
            };
            let a = read(&candidate)?;
            let b = read(&reference)?;
            let mut table = ToleranceTable::uniform(tol);
            table.per_moment.extend(tol_moment);
            let report = compare(&a, &b, &table)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Figure { name, out_dir, n_samples, j_steps } => {
            let fig = run_figure(&name, n_samples, j_steps)?;
            std::fs::create_dir_all(&out_dir)?;
            for (k, t) in fig.tables.iter().enumerate() {
                let path = out_dir.join(format!("{name}_{}.csv", t.suffix));
                let notes = vec![format!("figure: {name}"), fig.preset.description.clone(), "time column is kappa*t".into()];
                write_table(create(&path)?, &header_lines(&fig.preset.scenario, &notes), &t.table)?;
                if let Some(s) = fig.surfaces.get(k) {
                    write_json(create(&path.with_extension("json"))?, &fig.preset.scenario, &notes, s)?;
                }
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}
