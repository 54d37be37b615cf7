use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-activity jump component of a single asset's log-return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum JumpSpec {
    #[default]
    None,
    /// Compound Poisson with normally distributed jump sizes.
    Merton { intensity: f64, mean: f64, std: f64 },
    /// Compound Poisson with asymmetric double-exponential jump sizes.
    Kou {
        intensity: f64,
        p_up: f64,
        eta_up: f64,
        eta_down: f64,
    },
}

impl JumpSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            JumpSpec::None => Ok(()),
            JumpSpec::Merton {
                intensity,
                mean,
                std,
            } => {
                if !(intensity.is_finite() && intensity >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "merton intensity must be >= 0, got {intensity}"
                    )));
                }
                if !mean.is_finite() {
                    return Err(Error::InvalidArgument(
                        "merton jump mean must be finite".into(),
                    ));
                }
                if !(std.is_finite() && std > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "merton jump std must be > 0, got {std}"
                    )));
                }
                Ok(())
            }
            JumpSpec::Kou {
                intensity,
                p_up,
                eta_up,
                eta_down,
            } => {
                if !(intensity.is_finite() && intensity >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "kou intensity must be >= 0, got {intensity}"
                    )));
                }
                if !(0.0..=1.0).contains(&p_up) {
                    return Err(Error::InvalidArgument(format!(
                        "kou up-probability must lie in [0, 1], got {p_up}"
                    )));
                }
                if !eta_up.is_finite() || eta_up <= 1.0 {
                    return Err(Error::InfiniteIntegral(format!(
                        "kou up-rate must exceed 1 for a finite exponential moment, got {eta_up}"
                    )));
                }
                if !(eta_down.is_finite() && eta_down > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "kou down-rate must be > 0, got {eta_down}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn intensity(&self) -> f64 {
        match *self {
            JumpSpec::None => 0.0,
            JumpSpec::Merton { intensity, .. } | JumpSpec::Kou { intensity, .. } => intensity,
        }
    }

    /// λ·(E[e^J] − 1), the term removed from the drift to make e^L a martingale.
    pub fn compensator(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            JumpSpec::None => 0.0,
            JumpSpec::Merton {
                intensity,
                mean,
                std,
            } => intensity * ((mean + 0.5 * std * std).exp() - 1.0),
            JumpSpec::Kou {
                intensity,
                p_up,
                eta_up,
                eta_down,
            } => {
                intensity
                    * (p_up * eta_up / (eta_up - 1.0) + (1.0 - p_up) * eta_down / (eta_down + 1.0)
                        - 1.0)
            }
        })
    }

    /// Jump contribution λ·(1 − E[e^{iuJ}]) to the characteristic exponent,
    /// valid for complex `u` wherever the jump transform is finite.
    pub fn exponent(&self, asset: usize, u: Complex64) -> Result<Complex64> {
        match *self {
            JumpSpec::None => Ok(Complex64::new(0.0, 0.0)),
            JumpSpec::Merton {
                intensity,
                mean,
                std,
            } => {
                let i = Complex64::i();
                let phi = (i * u * mean - 0.5 * std * std * u * u).exp();
                Ok(intensity * (1.0 - phi))
            }
            JumpSpec::Kou {
                intensity,
                p_up,
                eta_up,
                eta_down,
            } => {
                let i = Complex64::i();
                let up = eta_up - i * u;
                let down = eta_down + i * u;
                if up.norm() == 0.0 {
                    return Err(Error::Domain(format!(
                        "kou pole in component {asset}: eta_up - i*u = 0 at u = {u}"
                    )));
                }
                if down.norm() == 0.0 {
                    return Err(Error::Domain(format!(
                        "kou pole in component {asset}: eta_down + i*u = 0 at u = {u}"
                    )));
                }
                let phi = p_up * eta_up / up + (1.0 - p_up) * eta_down / down;
                Ok(intensity * (1.0 - phi))
            }
        }
    }

    /// Open interval of Re(w) on which E[e^{-wJ}] is finite.
    pub fn exp_moment_strip(&self) -> (f64, f64) {
        match *self {
            JumpSpec::Kou {
                eta_up, eta_down, ..
            } => (-eta_up, eta_down),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Sum of `count` independent jump sizes.
    pub(crate) fn sample_sum<R: rand::Rng + ?Sized>(&self, count: u64, rng: &mut R) -> f64 {
        use rand_distr::{Distribution, Exp, StandardNormal};
        if count == 0 {
            return 0.0;
        }
        match *self {
            JumpSpec::None => 0.0,
            JumpSpec::Merton { mean, std, .. } => {
                let z: f64 = StandardNormal.sample(rng);
                count as f64 * mean + std * (count as f64).sqrt() * z
            }
            JumpSpec::Kou {
                p_up,
                eta_up,
                eta_down,
                ..
            } => {
                let up = Exp::new(eta_up).expect("validated rate");
                let down = Exp::new(eta_down).expect("validated rate");
                (0..count)
                    .map(|_| {
                        if rng.random::<f64>() < p_up {
                            up.sample(rng)
                        } else {
                            -down.sample(rng)
                        }
                    })
                    .sum()
            }
        }
    }
}
