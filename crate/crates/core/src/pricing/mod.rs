//! European and American basket option prices by Mellin inversion.

mod american;
mod european;
mod pide;

use serde::{Deserialize, Serialize};

pub use american::{price_american, price_american_many, solve_boundary};
pub use european::{default_contour, price_european, price_european_many};
pub use pide::{pide_residual, PriceGrid, ResidualField};

use crate::error::{Error, Result};
use crate::levy::LevyExponent;
use crate::mellin::ContourSpec;
use crate::payoffs::{ExerciseStyle, OptionSpec};

/// Largest folded quadrature grid a single inversion may use.
pub const GRID_BUDGET: u64 = 400_000_000;

/// Default number of time steps for the early-exercise integral.
pub const DEFAULT_TIME_STEPS: usize = 64;

/// Critical aggregate price `S*` against time to maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub times: Vec<f64>,
    pub s_star: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub nodes: Vec<usize>,
    pub half_width: Vec<f64>,
    pub imag_residue: f64,
    pub time_steps: usize,
    pub boundary_iterations: usize,
    pub boundary: Option<BoundaryCurve>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingResult {
    pub price: f64,
    pub european_part: f64,
    pub premium_part: f64,
    pub diagnostics: Diagnostics,
}

impl PricingResult {
    pub(crate) fn exact(value: f64, note: &str) -> Self {
        Self {
            price: value,
            european_part: value,
            premium_part: 0.0,
            diagnostics: Diagnostics {
                notes: vec![note.to_string()],
                ..Diagnostics::default()
            },
        }
    }
}

/// Prices `spec` in the style it declares.
pub fn price(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    contour: &ContourSpec,
    time_steps: usize,
) -> Result<PricingResult> {
    match spec.style {
        ExerciseStyle::European => price_european(spec, model, contour),
        ExerciseStyle::American => price_american(spec, model, contour, time_steps),
    }
}

pub(crate) fn check_budget(points: u64) -> Result<()> {
    if points > GRID_BUDGET {
        return Err(Error::GridBudget {
            points,
            budget: GRID_BUDGET,
        });
    }
    Ok(())
}

/// Strip of the pricing integrand: the payoff needs `Re w > 0`, the model
/// needs `E[e^{−w·L}]` finite.
pub(crate) fn pricing_strip(model: &dyn LevyExponent) -> Vec<(f64, f64)> {
    model
        .exp_moment_strip()
        .into_iter()
        .map(|(lo, hi)| (lo.max(0.0), hi))
        .collect()
}

pub(crate) fn check_dims(spec: &OptionSpec, model: &dyn LevyExponent) -> Result<()> {
    let n = spec.dim();
    if n == 0 || n > crate::mellin::MAX_DIM {
        return Err(Error::UnsupportedDimension {
            n,
            max: crate::mellin::MAX_DIM,
        });
    }
    if model.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "model has {} assets, option has {n}",
            model.dim()
        )));
    }
    Ok(())
}
