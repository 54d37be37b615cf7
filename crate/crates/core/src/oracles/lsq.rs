use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::monte_carlo::{batch_sizes, stream_rng, McConfig, STREAMS};
use crate::error::{Error, Result};
use crate::levy::{CharacteristicModel, LevySampler};
use crate::payoffs::{OptionSpec, PayoffKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsqEstimate {
    pub price: f64,
    pub std_error: f64,
    pub paths: usize,
    pub exercise_dates: usize,
    /// Exercise dates whose regression matrix was numerically rank deficient.
    pub reduced_rank_regressions: usize,
}

const BASIS: usize = 4;

fn basis(x: f64) -> [f64; BASIS] {
    [1.0, x, x * x, x * x * x]
}

fn basket_payoff(kind: PayoffKind, x: f64) -> f64 {
    match kind {
        PayoffKind::BasketPut => (1.0 - x).max(0.0),
        PayoffKind::BasketCallViaParity => (x - 1.0).max(0.0),
    }
}

/// Simulates `count` paths of the basket level divided by the strike at each
/// exercise date. Row-major: path `p`, date `d` at `p * dates + d`.
fn simulate(
    spec: &OptionSpec,
    model: &CharacteristicModel,
    count: usize,
    dates: usize,
    seed: u64,
    stream_offset: u64,
) -> Vec<f64> {
    let sampler = LevySampler::new(model.triplet());
    let n = sampler.dim();
    let dt = spec.maturity / dates as f64;
    batch_sizes(count)
        .par_iter()
        .enumerate()
        .map(|(b, &paths)| {
            let mut rng = stream_rng(seed, stream_offset + b as u64);
            let mut out = Vec::with_capacity(paths * dates);
            let mut z = vec![0.0; n];
            let mut inc = vec![0.0; n];
            let mut l = vec![0.0; n];
            for _ in 0..paths {
                l.iter_mut().for_each(|v| *v = 0.0);
                for d in 0..dates {
                    for v in z.iter_mut() {
                        *v = StandardNormal.sample(&mut rng);
                    }
                    sampler.increment(dt, &z, &mut rng, &mut inc);
                    let t = (d + 1) as f64 * dt;
                    let mut s = 0.0;
                    for i in 0..n {
                        l[i] += inc[i];
                        s += spec.spot[i] * (spec.rate * t + l[i]).exp();
                    }
                    out.push(s / spec.strike);
                }
            }
            out
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Least-squares Monte Carlo for an American basket option.
///
/// Continuation values are regressed on `{1, x, x^2, x^3}` with `x` the basket
/// level over the strike, using in-the-money paths only. The exercise rule is
/// fitted on one set of paths and applied to an independent set, so the
/// estimate is biased low.
pub fn mc_american_lsq(
    spec: &OptionSpec,
    model: &CharacteristicModel,
    mc: &McConfig,
    exercise_dates: usize,
) -> Result<LsqEstimate> {
    spec.validate()?;
    mc.validate()?;
    if model.triplet().dim() != spec.dim() {
        return Err(Error::InvalidArgument(
            "model and option dimensions differ".into(),
        ));
    }
    if exercise_dates == 0 {
        return Err(Error::InvalidArgument(
            "need at least one exercise date".into(),
        ));
    }
    let dates = exercise_dates;
    let dt = spec.maturity / dates as f64;
    let step_disc = (-spec.rate * dt).exp();
    let k = spec.strike;

    // fit the exercise rule
    let train = simulate(spec, model, mc.paths, dates, mc.seed, 0);
    let mut cash: Vec<f64> = (0..mc.paths)
        .map(|p| basket_payoff(spec.kind, train[p * dates + dates - 1]))
        .collect();
    let mut coeffs = vec![None; dates];
    let mut reduced = 0;
    for d in (0..dates - 1).rev() {
        cash.iter_mut().for_each(|c| *c *= step_disc);
        let itm: Vec<usize> = (0..mc.paths)
            .filter(|&p| basket_payoff(spec.kind, train[p * dates + d]) > 0.0)
            .collect();
        if itm.len() < 2 * BASIS {
            continue;
        }
        let a = DMatrix::from_fn(itm.len(), BASIS, |r, c| basis(train[itm[r] * dates + d])[c]);
        let y = DVector::from_iterator(itm.len(), itm.iter().map(|&p| cash[p]));
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        if svd.singular_values.iter().any(|&s| s <= 1e-10 * smax) {
            reduced += 1;
        }
        let beta = svd
            .solve(&y, 1e-10 * smax)
            .map_err(|e| Error::Domain(format!("regression failed at date {d}: {e}")))?;
        for &p in &itm {
            let x = train[p * dates + d];
            let cont: f64 = basis(x).iter().zip(beta.iter()).map(|(b, c)| b * c).sum();
            let ex = basket_payoff(spec.kind, x);
            if ex >= cont {
                cash[p] = ex;
            }
        }
        coeffs[d] = Some(beta);
    }
    drop(train);

    // apply it out of sample
    let price_paths = simulate(spec, model, mc.paths, dates, mc.seed, STREAMS as u64);
    let values: Vec<f64> = (0..mc.paths)
        .map(|p| {
            let row = &price_paths[p * dates..(p + 1) * dates];
            for (d, &x) in row.iter().enumerate() {
                let ex = basket_payoff(spec.kind, x);
                let last = d + 1 == dates;
                if ex <= 0.0 && !last {
                    continue;
                }
                let stop = last
                    || coeffs[d].as_ref().is_some_and(|beta| {
                        let cont: f64 = basis(x).iter().zip(beta.iter()).map(|(b, c)| b * c).sum();
                        ex >= cont
                    });
                if stop {
                    return k * ex * (-spec.rate * (d + 1) as f64 * dt).exp();
                }
            }
            0.0
        })
        .collect();

    let m = mc.paths as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    Ok(LsqEstimate {
        price: mean.max(spec.intrinsic()),
        std_error: (var / m).sqrt(),
        paths: mc.paths,
        exercise_dates: dates,
        reduced_rank_regressions: reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{binomial_american_put, black_scholes_put};

    fn gbm() -> CharacteristicModel {
        CharacteristicModel::gbm(vec![0.2], DMatrix::identity(1, 1)).unwrap()
    }

    #[test]
    fn single_date_is_european() {
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![100.0], 0.05)
            .unwrap()
            .american();
        let e = mc_american_lsq(&spec, &gbm(), &McConfig::new(100_000, 3), 1).unwrap();
        let bs = black_scholes_put(100.0, 100.0, 0.05, 0.2, 1.0);
        assert!((e.price - bs).abs() < 3.0 * e.std_error, "{e:?} vs {bs}");
    }

    #[test]
    fn close_to_lattice_and_below_it() {
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![100.0], 0.05)
            .unwrap()
            .american();
        let e = mc_american_lsq(&spec, &gbm(), &McConfig::new(100_000, 5), 50).unwrap();
        let lat = binomial_american_put(100.0, 100.0, 0.05, 0.2, 1.0, 4000).american;
        assert!(e.price < lat + 3.0 * e.std_error, "{e:?} vs {lat}");
        assert!(e.price > lat - 0.1, "{e:?} vs {lat}");
        assert_eq!(e.reduced_rank_regressions, 0);
    }

    #[test]
    fn reproducible() {
        let spec = OptionSpec::basket_put(100.0, 0.5, vec![50.0, 50.0], 0.03)
            .unwrap()
            .american();
        let m = CharacteristicModel::gbm(
            vec![0.2, 0.3],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        )
        .unwrap();
        let a = mc_american_lsq(&spec, &m, &McConfig::new(10_000, 11), 16).unwrap();
        let b = mc_american_lsq(&spec, &m, &McConfig::new(10_000, 11), 16).unwrap();
        assert_eq!(a, b);
    }
}
