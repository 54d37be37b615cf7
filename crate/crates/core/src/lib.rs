//! Multi-asset option pricing under exponential Lévy models by
//! multidimensional Mellin inversion.
//!
//! Prices of European and American basket puts on `n ≤ 3` assets are written
//! as inverse Mellin transforms: the European part is the inverse of the
//! payoff transform times the characteristic function of the log-returns,
//! and the American part adds an early-exercise premium, a time integral of
//! the transformed exercise-region source term propagated by the same
//! characteristic function.
//!
//! Modules:
//! - [`levy`]: triplets, characteristic exponents, drift calibration, sampling.
//! - [`mellin`]: complex log-gamma, multinomial beta, contour quadrature.
//! - [`payoffs`]: basket payoff and its transforms.
//! - [`pricing`]: European and American pricers, exercise boundary, PIDE residual.
//! - [`oracles`]: Black–Scholes, CRR lattice, Monte Carlo and Longstaff–Schwartz.
//! - [`cli`]: JSON-configured command-line front end.

pub mod cli;
pub mod error;
pub mod levy;
pub mod mellin;
pub mod oracles;
pub mod payoffs;
pub mod pricing;

pub use error::{Error, Result};
pub use levy::{CharacteristicModel, DriftConvention, JumpSpec, LevyExponent, LevyTriplet};
pub use mellin::{ContourSpec, Window};
pub use payoffs::{ExerciseStyle, OptionSpec, PayoffKind};
pub use pricing::{BoundaryCurve, PricingResult};
