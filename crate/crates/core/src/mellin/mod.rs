//! Complex special functions and numerical multidimensional inverse Mellin
//! transforms along vertical contours.
//!
//! For `f(x) = (2πi)^{−n} ∫_γ f̂(w) x^{−w} dw` with `w_j = a_j + i b_j`, the
//! integral becomes `(2π)^{−n} ∫ f̂(a + ib) x^{−a−ib} db`, which is sampled
//! with a tensor-product trapezoid rule on the truncated lines.

mod contour;
mod gamma;
mod inverse;
pub(crate) mod sum;

pub use contour::{choose_truncation, ContourSpec, Window, MAX_HALF_WIDTH};
pub(crate) use gamma::log_gamma_unchecked;
pub use gamma::{log_gamma, log_multinomial_beta, multinomial_beta};
pub use inverse::{inverse_mellin, inverse_mellin_many, MellinFunction, MellinInversion, MAX_DIM};
