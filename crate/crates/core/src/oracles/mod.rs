//! Independent reference pricers used to validate the Mellin pricer.

mod binomial;
mod black_scholes;
mod lsq;
mod monte_carlo;

pub use binomial::{binomial_american_put, LatticeResult};
pub use black_scholes::{black_scholes_call, black_scholes_put, norm_cdf};
pub use lsq::{mc_american_lsq, LsqEstimate};
pub use monte_carlo::{mc_european, mc_functional, McConfig, McEstimate};
