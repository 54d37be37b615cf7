//! Basket payoffs in direct space and in Mellin space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::LevyExponent;
use crate::mellin::{log_gamma_unchecked, MellinFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExerciseStyle {
    European,
    American,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    BasketPut,
    BasketCallViaParity,
}

/// Contract terms. Time to maturity is `maturity` (valuation at t = 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub strike: f64,
    pub maturity: f64,
    pub style: ExerciseStyle,
    pub kind: PayoffKind,
    pub spot: Vec<f64>,
    pub rate: f64,
}

impl OptionSpec {
    pub fn new(
        strike: f64,
        maturity: f64,
        style: ExerciseStyle,
        kind: PayoffKind,
        spot: Vec<f64>,
        rate: f64,
    ) -> Result<Self> {
        let s = Self {
            strike,
            maturity,
            style,
            kind,
            spot,
            rate,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn basket_put(strike: f64, maturity: f64, spot: Vec<f64>, rate: f64) -> Result<Self> {
        Self::new(
            strike,
            maturity,
            ExerciseStyle::European,
            PayoffKind::BasketPut,
            spot,
            rate,
        )
    }

    pub fn american(mut self) -> Self {
        self.style = ExerciseStyle::American;
        self
    }

    pub fn dim(&self) -> usize {
        self.spot.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike.is_finite() && self.strike > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "strike must be positive, got {}",
                self.strike
            )));
        }
        // maturity 0 is accepted and priced as the payoff
        if !(self.maturity.is_finite() && self.maturity >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "maturity must be non-negative, got {}",
                self.maturity
            )));
        }
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate must be >= 0, got {}",
                self.rate
            )));
        }
        if self.spot.is_empty() {
            return Err(Error::InvalidArgument("spot vector is empty".into()));
        }
        for (j, s) in self.spot.iter().enumerate() {
            if !(s.is_finite() && *s > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "spot[{j}] must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn intrinsic(&self) -> f64 {
        let sum: f64 = self.spot.iter().sum();
        match self.kind {
            PayoffKind::BasketPut => (self.strike - sum).max(0.0),
            PayoffKind::BasketCallViaParity => (sum - self.strike).max(0.0),
        }
    }
}

/// A payoff usable by the Mellin pricer: direct evaluator, transform and
/// its fundamental strip. Any Lipschitz payoff with a known transform fits.
pub trait MellinPayoff: Send + Sync {
    fn name(&self) -> &'static str;
    fn direct(&self, s: &[f64]) -> f64;
    /// `ln θ̂(w)` for `w` inside the strip.
    fn log_transform(&self, w: &[Complex64]) -> Complex64;
    fn strip(&self, n: usize) -> Vec<(f64, f64)>;
}

/// `(K − Σ S_j)⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasketPut {
    pub strike: f64,
}

impl MellinPayoff for BasketPut {
    fn name(&self) -> &'static str {
        "basket_put"
    }
    fn direct(&self, s: &[f64]) -> f64 {
        (self.strike - s.iter().sum::<f64>()).max(0.0)
    }
    fn log_transform(&self, w: &[Complex64]) -> Complex64 {
        log_basket_put(w, self.strike)
    }
    fn strip(&self, n: usize) -> Vec<(f64, f64)> {
        vec![(0.0, f64::INFINITY); n]
    }
}

/// Payoff used in Mellin space for `kind`. Calls have no transform of their
/// own: they are priced through the put and put-call parity.
pub fn mellin_payoff(kind: PayoffKind, strike: f64) -> Box<dyn MellinPayoff> {
    match kind {
        PayoffKind::BasketPut | PayoffKind::BasketCallViaParity => Box::new(BasketPut { strike }),
    }
}

/// Direct payoff of `kind` at terminal prices `s`.
pub fn direct_payoff(kind: PayoffKind, strike: f64, s: &[f64]) -> f64 {
    let sum: f64 = s.iter().sum();
    match kind {
        PayoffKind::BasketPut => (strike - sum).max(0.0),
        PayoffKind::BasketCallViaParity => (sum - strike).max(0.0),
    }
}

pub fn basket_put_payoff(s: &[f64], strike: f64) -> Result<f64> {
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "strike must be positive, got {strike}"
        )));
    }
    for (j, v) in s.iter().enumerate() {
        if !(v.is_finite() && *v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "S[{j}] must be positive, got {v}"
            )));
        }
    }
    Ok(BasketPut { strike }.direct(s))
}

fn check_right_half_plane(w: &[Complex64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty Mellin argument".into()));
    }
    for (j, z) in w.iter().enumerate() {
        if !(z.re > 0.0) || !z.im.is_finite() {
            return Err(Error::Domain(format!(
                "Mellin argument w[{j}] = {z} outside the strip Re(w) > 0"
            )));
        }
    }
    Ok(())
}

fn log_beta_and_sum(w: &[Complex64]) -> (Complex64, Complex64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for z in w {
        acc += log_gamma_unchecked(*z);
        sum += z;
    }
    (acc - log_gamma_unchecked(sum), sum)
}

/// `ln[β_n(w)·K^{1+Σw} / (Σw·(1+Σw))]`.
pub(crate) fn log_basket_put(w: &[Complex64], strike: f64) -> Complex64 {
    let (lb, s) = log_beta_and_sum(w);
    lb + (1.0 + s) * strike.ln() - s.ln() - (1.0 + s).ln()
}

/// Mellin transform of `(K − Σ S_j)⁺`, analytic for `Re w_j > 0`.
pub fn basket_put_transform(w: &[Complex64], strike: f64) -> Result<Complex64> {
    check_right_half_plane(w)?;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "strike must be positive, got {strike}"
        )));
    }
    Ok(log_basket_put(w, strike).exp())
}

/// The basket put transform as a [`MellinFunction`] of dimension `n`.
pub fn basket_put_function(n: usize, strike: f64) -> MellinFunction<'static> {
    MellinFunction::new(vec![(0.0, f64::INFINITY); n], move |w: &[Complex64]| {
        log_basket_put(w, strike)
    })
}

/// `ln[β_n(w)·s*^{Σw} / Σw]`, the transform of the simplex indicator
/// `𝟙{Σ S_j ≤ s*}` without the `−rK` factor.
pub(crate) fn log_simplex_indicator(w: &[Complex64], s_star: f64) -> Complex64 {
    let (lb, s) = log_beta_and_sum(w);
    lb + s * s_star.ln() - s.ln()
}

/// Mellin transform of the early-exercise source `f(S) = −rK·𝟙{Σ S_j ≤ s*}`:
/// `−rK·β_n(w)·s*^{Σw}/Σw`.
pub fn exercise_source_transform(
    w: &[Complex64],
    strike: f64,
    rate: f64,
    s_star: f64,
) -> Result<Complex64> {
    check_right_half_plane(w)?;
    if !(s_star.is_finite() && s_star > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "critical price must be positive, got {s_star}"
        )));
    }
    if !(rate.is_finite() && rate >= 0.0) || !(strike.is_finite() && strike > 0.0) {
        return Err(Error::InvalidArgument(
            "strike must be positive and rate non-negative".into(),
        ));
    }
    if rate == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(-rate * strike * log_simplex_indicator(w, s_star).exp())
}

/// European basket call from the put by parity `C = P + Σ S_j − K e^{−rT}`.
/// Requires a martingale-calibrated model (checked through `Ψ(−i e_k) = 0`).
pub fn call_from_parity(
    put_price: f64,
    spec: &OptionSpec,
    model: &dyn LevyExponent,
) -> Result<f64> {
    spec.validate()?;
    if spec.style != ExerciseStyle::European {
        return Err(Error::UnsupportedStyle(
            "put-call parity is an inequality for American options".into(),
        ));
    }
    let n = spec.dim();
    if model.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "model has {} assets, option has {n}",
            model.dim()
        )));
    }
    for k in 0..n {
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[k] = Complex64::new(0.0, -1.0);
        let psi = model.exponent(&u)?;
        if psi.norm() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "parity needs a martingale model: Ψ(−i e_{k}) = {psi}"
            )));
        }
    }
    let forward: f64 = spec.spot.iter().sum();
    Ok(put_price + forward - spec.strike * (-spec.rate * spec.maturity).exp())
}
