//! Scenario configuration: physical parameters in units of `kappa`, engine
//! choice, time grid and optional sweep/oracle/output blocks.

use std::path::{Path, PathBuf};

use ptkerr::{derive_constants, Complex64, CouplerParams, Regime};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "one")]
    pub kappa: f64,
    pub j_over_kappa: f64,
    #[serde(default)]
    pub chi_over_kappa: f64,
    #[serde(default)]
    pub alpha0_re: f64,
    #[serde(default)]
    pub alpha0_im: f64,
}

fn one() -> f64 {
    1.0
}

impl ParamsConfig {
    pub fn coupler(&self) -> CliResult<CouplerParams> {
        if !(self.kappa > 0.0) {
            return Err(CliError::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        Ok(CouplerParams::new(
            self.kappa,
            self.j_over_kappa * self.kappa,
            self.chi_over_kappa * self.kappa,
            Complex64::new(self.alpha0_re, self.alpha0_im),
        )?)
    }

    pub fn with_j(mut self, j_over_kappa: f64) -> Self {
        self.j_over_kappa = j_over_kappa;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Engine {
    Noisy,
    Noiseless,
    Linear,
    Meanfield,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepQuantity {
    /// Change ratio of the loss-channel P quadrature; closed form in the
    /// broken regime, first-order correction in the symmetric regime.
    ChangeRatio,
    D3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub j_min: f64,
    pub j_max: f64,
    pub j_steps: usize,
    pub quantity: SweepQuantity,
    /// Minimum distance of every `J/kappa` from the exceptional point 1.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    1e-3
}

impl SweepConfig {
    pub fn j_axis(&self) -> Vec<f64> {
        if self.j_steps == 1 {
            return vec![self.j_min];
        }
        let h = (self.j_max - self.j_min) / (self.j_steps - 1) as f64;
        (0..self.j_steps).map(|k| if k + 1 == self.j_steps { self.j_max } else { self.j_min + h * k as f64 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub n_a: usize,
    pub n_b: usize,
    /// Step in units of `1/kappa`.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_leak")]
    pub leak_threshold: f64,
    #[serde(default = "default_budget")]
    pub max_total_dim: usize,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_leak() -> f64 {
    1e-6
}

fn default_budget() -> usize {
    4096
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// `None` writes to standard output.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: ParamsConfig,
    pub variant: Engine,
    /// Horizon in units of `1/kappa`.
    pub t_max: f64,
    pub n_samples: usize,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let c: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        self.params.coupler()?;
        if self.n_samples < 2 {
            return Err(CliError::Config(format!("n_samples must be >= 2, got {}", self.n_samples)));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(CliError::Config(format!("t_max must be positive, got {}", self.t_max)));
        }
        if let Some(s) = &self.sweep {
            if s.j_steps == 0 {
                return Err(CliError::Config("sweep needs at least one J value".into()));
            }
            if !(s.j_min >= 0.0) || !(s.j_max >= s.j_min) {
                return Err(CliError::Config(format!("bad J range [{}, {}]", s.j_min, s.j_max)));
            }
            if !(s.margin > 0.0) {
                return Err(CliError::Config("sweep margin must be positive".into()));
            }
            let below = s.j_max <= 1.0 - s.margin;
            let above = s.j_min >= 1.0 + s.margin;
            if !(below || above) {
                return Err(CliError::Config(format!(
                    "J/kappa range [{}, {}] must stay at least {} away from the exceptional point on one side",
                    s.j_min, s.j_max, s.margin
                )));
            }
        }
        if let Some(o) = &self.oracle {
            if o.n_a == 0 || o.n_b == 0 {
                return Err(CliError::Config("oracle dimensions must be positive".into()));
            }
            if !(o.dt > 0.0) {
                return Err(CliError::Config("oracle dt must be positive".into()));
            }
        }
        if self.variant == Engine::Oracle && self.oracle.is_none() {
            return Err(CliError::Config("variant ORACLE needs an [oracle] block".into()));
        }
        Ok(())
    }

    pub fn coupler(&self) -> CliResult<CouplerParams> {
        self.params.coupler()
    }

    pub fn regime(&self) -> CliResult<Regime> {
        Ok(derive_constants(&self.coupler()?).regime)
    }

    /// Sample times in units of `1/kappa`.
    pub fn kappa_t_grid(&self) -> Vec<f64> {
        ptkerr::moments::uniform_grid(self.t_max, self.n_samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            params: ParamsConfig { kappa: 1.0, j_over_kappa: 0.6, chi_over_kappa: 0.0, alpha0_re: 1.0, alpha0_im: 0.0 },
            variant: Engine::Linear,
            t_max: 2.0,
            n_samples: 5,
            sweep: None,
            oracle: None,
            output: OutputConfig::default(),
        }
    }

    #[test]
    fn toml_defaults() {
        let c = ScenarioConfig::from_toml(
            "variant = \"NOISY\"\nt_max = 3.0\nn_samples = 4\n[params]\nj_over_kappa = 0.5\nalpha0_re = 2.0\n",
        )
        .unwrap();
        assert_eq!(c.params.kappa, 1.0);
        assert_eq!(c.params.chi_over_kappa, 0.0);
        assert_eq!(c.output.format, OutputFormat::Csv);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut c = base();
        c.params.chi_over_kappa = 1e-9 / 3.0;
        c.params.alpha0_im = 0.1 + 0.2;
        let back = ScenarioConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = base();
        c.n_samples = 1;
        assert!(c.validate().is_err());
        let mut c = base();
        c.sweep = Some(SweepConfig { j_min: 0.5, j_max: 1.5, j_steps: 3, quantity: SweepQuantity::D3, margin: 1e-3 });
        assert!(c.validate().is_err());
        let mut c = base();
        c.variant = Engine::Oracle;
        assert!(c.validate().is_err());
        assert!(ScenarioConfig::from_toml("variant = \"LINEAR\"\nt_max = 1.0\nn_samples = 3\nbogus = 1\n[params]\nj_over_kappa = 0.5\n").is_err());
    }

    #[test]
    fn single_point_axis() {
        let s = SweepConfig { j_min: 0.3, j_max: 0.3, j_steps: 1, quantity: SweepQuantity::D3, margin: 1e-3 };
        assert_eq!(s.j_axis(), vec![0.3]);
    }
}
