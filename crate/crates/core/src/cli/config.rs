use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::levy::{CharacteristicModel, DriftConvention, JumpSpec, LevyTriplet};
use crate::mellin::ContourSpec;
use crate::payoffs::{ExerciseStyle, OptionSpec, PayoffKind};
use crate::pricing::{default_contour, DEFAULT_TIME_STEPS};

/// A run configuration, read from JSON. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub option: OptionConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    Gbm,
    Merton,
    Kou,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub kind: ModelType,
    pub vols: Vec<f64>,
    /// Row-major correlation matrix; identity when absent.
    #[serde(default)]
    pub corr: Option<Vec<Vec<f64>>>,
    /// One entry per asset; absent means no jumps.
    #[serde(default)]
    pub jumps: Option<Vec<JumpSpec>>,
    #[serde(default)]
    pub drift_convention: DriftConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionConfig {
    #[serde(default = "default_kind")]
    pub kind: PayoffKind,
    #[serde(default = "default_style")]
    pub style: ExerciseStyle,
    pub strike: f64,
    pub maturity: f64,
    pub spot: Vec<f64>,
    pub rate: f64,
}

fn default_kind() -> PayoffKind {
    PayoffKind::BasketPut
}

fn default_style() -> ExerciseStyle {
    ExerciseStyle::European
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    Nodes,
    TimeSteps,
}

/// Quadrature settings. Anything left out is chosen automatically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub abscissa: Option<Vec<f64>>,
    pub half_width: Option<Vec<f64>>,
    pub nodes: Option<Vec<usize>>,
    pub spacing: Option<f64>,
    #[serde(default = "default_time_steps")]
    pub time_steps: usize,
    /// Knob doubled by `converge`; time steps for American options,
    /// nodes otherwise.
    pub converge_knob: Option<Knob>,
    #[serde(default = "default_levels")]
    pub converge_levels: usize,
}

fn default_time_steps() -> usize {
    DEFAULT_TIME_STEPS
}

fn default_levels() -> usize {
    5
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            abscissa: None,
            half_width: None,
            nodes: None,
            spacing: None,
            time_steps: DEFAULT_TIME_STEPS,
            converge_knob: None,
            converge_levels: default_levels(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    BlackScholes,
    Binomial,
    MonteCarlo,
    Lsq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    /// Oracles to run; chosen from dimension and style when absent.
    pub oracles: Option<Vec<Oracle>>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_mc_steps")]
    pub steps: usize,
    #[serde(default = "default_true")]
    pub antithetic: bool,
    #[serde(default = "default_lattice_steps")]
    pub lattice_steps: usize,
    #[serde(default = "default_exercise_dates")]
    pub exercise_dates: usize,
}

fn default_paths() -> usize {
    100_000
}
fn default_seed() -> u64 {
    42
}
fn default_mc_steps() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_lattice_steps() -> usize {
    10_000
}
fn default_exercise_dates() -> usize {
    50
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            oracles: None,
            paths: default_paths(),
            seed: default_seed(),
            steps: default_mc_steps(),
            antithetic: true,
            lattice_steps: default_lattice_steps(),
            exercise_dates: default_exercise_dates(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn option_spec(&self) -> Result<OptionSpec, CliError> {
        let o = &self.option;
        let spec = OptionSpec::new(
            o.strike,
            o.maturity,
            o.style,
            o.kind,
            o.spot.clone(),
            o.rate,
        )
        .map_err(|e| CliError::Config(format!("option: {e}")))?;
        if spec.dim() != self.model.vols.len() {
            return Err(CliError::Config(format!(
                "option: {} spots but model.vols has {} entries",
                spec.dim(),
                self.model.vols.len()
            )));
        }
        Ok(spec)
    }

    pub fn model(&self) -> Result<CharacteristicModel, CliError> {
        let m = &self.model;
        let n = m.vols.len();
        let corr = match &m.corr {
            None => DMatrix::identity(n, n),
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::Config(format!(
                        "model.corr: expected a {n}x{n} matrix"
                    )));
                }
                DMatrix::from_fn(n, n, |i, j| rows[i][j])
            }
        };
        let jumps = m.jumps.clone().unwrap_or_default();
        if !jumps.is_empty() && jumps.len() != n {
            return Err(CliError::Config(format!(
                "model.jumps: expected {n} entries, got {}",
                jumps.len()
            )));
        }
        let consistent = match m.kind {
            ModelType::Gbm => jumps.iter().all(|j| matches!(j, JumpSpec::None)),
            ModelType::Merton => {
                jumps
                    .iter()
                    .all(|j| matches!(j, JumpSpec::None | JumpSpec::Merton { .. }))
                    && jumps.iter().any(|j| matches!(j, JumpSpec::Merton { .. }))
            }
            ModelType::Kou => {
                jumps
                    .iter()
                    .all(|j| matches!(j, JumpSpec::None | JumpSpec::Kou { .. }))
                    && jumps.iter().any(|j| matches!(j, JumpSpec::Kou { .. }))
            }
        };
        if !consistent {
            return Err(CliError::Config(format!(
                "model.jumps do not match model type {:?}",
                m.kind
            )));
        }
        let triplet = LevyTriplet::calibrated(
            m.vols.clone(),
            corr,
            jumps,
            self.option.rate,
            m.drift_convention,
        )
        .map_err(|e| CliError::Config(format!("model: {e}")))?;
        let name = match m.kind {
            ModelType::Gbm => "gbm",
            ModelType::Merton => "merton",
            ModelType::Kou => "kou",
        };
        Ok(CharacteristicModel::new(name, triplet))
    }

    /// The automatic contour with any fields given in `numerics` applied on
    /// top. Errors from the automatic choice are numerical, the rest are
    /// configuration errors.
    pub fn contour(
        &self,
        spec: &OptionSpec,
        model: &CharacteristicModel,
    ) -> Result<ContourSpec, CliError> {
        let num = &self.numerics;
        let n = spec.dim();
        let check_len = |name: &str, len: usize| {
            if len != n {
                Err(CliError::Config(format!(
                    "numerics.{name}: expected {n} entries, got {len}"
                )))
            } else {
                Ok(())
            }
        };
        if let Some(a) = &num.abscissa {
            check_len("abscissa", a.len())?;
        }
        if let Some(b) = &num.half_width {
            check_len("half_width", b.len())?;
        }
        if let Some(m) = &num.nodes {
            check_len("nodes", m.len())?;
        }
        let auto = default_contour(spec, model).map_err(CliError::Numerical)?;
        let abscissa = num.abscissa.clone().unwrap_or(auto.abscissa.clone());
        let half_width = num.half_width.clone().unwrap_or(auto.half_width.clone());
        let config_err = |e: crate::Error| CliError::Config(format!("numerics: {e}"));
        let contour = if let Some(nodes) = &num.nodes {
            ContourSpec::new(abscissa, half_width, nodes.clone()).map_err(config_err)?
        } else if let Some(h) = num.spacing {
            ContourSpec::with_spacing(abscissa, half_width, h).map_err(config_err)?
        } else if num.half_width.is_some() {
            let h = (0..n)
                .map(|j| auto.spacing(j))
                .fold(f64::INFINITY, f64::min);
            ContourSpec::with_spacing(abscissa, half_width, h).map_err(config_err)?
        } else {
            ContourSpec::new(abscissa, half_width, auto.nodes.clone()).map_err(config_err)?
        };
        Ok(contour)
    }
}
