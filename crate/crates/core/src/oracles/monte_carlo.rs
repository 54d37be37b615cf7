use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{CharacteristicModel, LevySampler};
use crate::payoffs::{direct_payoff, OptionSpec};

/// Monte Carlo settings. With `antithetic`, each pair of mirrored paths
/// counts as two paths and the standard error is computed from pair means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    #[serde(default)]
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self {
            paths,
            steps: 1,
            seed,
            antithetic: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths < 10_000 {
            return Err(Error::InvalidArgument(format!(
                "Monte Carlo needs at least 10^4 paths, got {}",
                self.paths
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument(
                "Monte Carlo needs at least one time step".into(),
            ));
        }
        if self.antithetic && self.paths % 2 != 0 {
            return Err(Error::InvalidArgument(
                "antithetic sampling needs an even path count".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    pub paths: usize,
}

/// Number of independent random streams; fixed so that results do not
/// depend on the worker count.
pub(crate) const STREAMS: usize = 64;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `count` samples into [`STREAMS`] contiguous batches.
pub(crate) fn batch_sizes(count: usize) -> Vec<usize> {
    (0..STREAMS)
        .map(|b| count / STREAMS + usize::from(b < count % STREAMS))
        .collect()
}

/// Samples `L_T` on `steps` equal sub-steps and applies `f` to it, returning
/// the sample mean and its standard error.
pub fn mc_functional<F>(
    model: &CharacteristicModel,
    t: f64,
    mc: &McConfig,
    f: F,
) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    mc.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be >= 0, got {t}"
        )));
    }
    let sampler = LevySampler::new(model.triplet());
    let n = sampler.dim();
    let dt = t / mc.steps as f64;
    let samples = if mc.antithetic {
        mc.paths / 2
    } else {
        mc.paths
    };
    let batches = batch_sizes(samples);

    let stats: Vec<(f64, f64, f64)> = batches
        .par_iter()
        .enumerate()
        .map(|(b, &count)| {
            let mut rng = stream_rng(mc.seed, b as u64);
            let mut z = vec![0.0; n];
            let mut zm = vec![0.0; n];
            let mut inc = vec![0.0; n];
            let mut l = vec![0.0; n];
            let mut lm = vec![0.0; n];
            // Welford running mean and squared deviation
            let (mut k, mut mean, mut m2) = (0.0, 0.0, 0.0);
            for _ in 0..count {
                l.iter_mut().for_each(|v| *v = 0.0);
                lm.iter_mut().for_each(|v| *v = 0.0);
                for _ in 0..mc.steps {
                    for v in z.iter_mut() {
                        *v = StandardNormal.sample(&mut rng);
                    }
                    sampler.increment(dt, &z, &mut rng, &mut inc);
                    for i in 0..n {
                        l[i] += inc[i];
                    }
                    if mc.antithetic {
                        for i in 0..n {
                            zm[i] = -z[i];
                        }
                        sampler.increment(dt, &zm, &mut rng, &mut inc);
                        for i in 0..n {
                            lm[i] += inc[i];
                        }
                    }
                }
                let y = if mc.antithetic {
                    0.5 * (f(&l) + f(&lm))
                } else {
                    f(&l)
                };
                k += 1.0;
                let d = y - mean;
                mean += d / k;
                m2 += d * (y - mean);
            }
            (k, mean, m2)
        })
        .collect();

    let (m, mean, m2) = stats
        .iter()
        .fold((0.0, 0.0, 0.0), |(na, ma, sa), &(nb, mb, sb)| {
            if nb == 0.0 {
                return (na, ma, sa);
            }
            let n = na + nb;
            let d = mb - ma;
            (n, ma + d * nb / n, sa + sb + d * d * na * nb / n)
        });
    let var = m2 / (m - 1.0);
    Ok(McEstimate {
        price: mean,
        std_error: (var / m).sqrt(),
        paths: mc.paths,
    })
}

/// Discounted expected payoff over terminal prices `S_0·exp(rT + L_T)`.
pub fn mc_european(
    spec: &OptionSpec,
    model: &CharacteristicModel,
    mc: &McConfig,
) -> Result<McEstimate> {
    spec.validate()?;
    if model.triplet().dim() != spec.dim() {
        return Err(Error::InvalidArgument(
            "model and option dimensions differ".into(),
        ));
    }
    let disc = (-spec.rate * spec.maturity).exp();
    let growth = spec.rate * spec.maturity;
    let n = spec.dim();
    mc_functional(model, spec.maturity, mc, |l| {
        let mut s = [0.0f64; 8];
        let mut sv;
        let s: &mut [f64] = if n <= 8 {
            &mut s[..n]
        } else {
            sv = vec![0.0; n];
            &mut sv
        };
        for i in 0..n {
            s[i] = spec.spot[i] * (growth + l[i]).exp();
        }
        disc * direct_payoff(spec.kind, spec.strike, s)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpSpec;
    use crate::oracles::black_scholes_put;
    use nalgebra::DMatrix;

    #[test]
    fn constant_payoff_has_zero_variance() {
        let m = CharacteristicModel::gbm(vec![0.3], DMatrix::identity(1, 1)).unwrap();
        let e = mc_functional(&m, 2.0, &McConfig::new(10_000, 1), |_| {
            (-0.05f64 * 2.0).exp()
        })
        .unwrap();
        assert!(e.std_error < 1e-15);
        assert!((e.price - (-0.1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn discounted_asset_is_a_martingale() {
        let m = CharacteristicModel::with_jumps(
            vec![0.2, 0.3],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]),
            vec![
                JumpSpec::Merton {
                    intensity: 0.5,
                    mean: -0.1,
                    std: 0.15,
                },
                JumpSpec::None,
            ],
        )
        .unwrap();
        let e = mc_functional(&m, 1.0, &McConfig::new(100_000, 9), |l| 80.0 * l[0].exp()).unwrap();
        assert!((e.price - 80.0).abs() < 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn matches_black_scholes_and_is_reproducible() {
        let m = CharacteristicModel::gbm(vec![0.2], DMatrix::identity(1, 1)).unwrap();
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![100.0], 0.05).unwrap();
        let mc = McConfig {
            paths: 200_000,
            steps: 1,
            seed: 42,
            antithetic: true,
        };
        let a = mc_european(&spec, &m, &mc).unwrap();
        let b = mc_european(&spec, &m, &mc).unwrap();
        assert_eq!(a, b);
        let bs = black_scholes_put(100.0, 100.0, 0.05, 0.2, 1.0);
        assert!((a.price - bs).abs() < 3.0 * a.std_error, "{a:?} vs {bs}");
    }

    #[test]
    fn validates_config() {
        assert!(McConfig::new(100, 0).validate().is_err());
        let mut c = McConfig::new(10_001, 0);
        c.antithetic = true;
        assert!(c.validate().is_err());
    }
}
