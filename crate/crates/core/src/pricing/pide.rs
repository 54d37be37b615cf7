use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{CharacteristicModel, JumpSpec};
use crate::payoffs::OptionSpec;

/// Prices sampled on a rectilinear spot grid at the calendar times
/// `t − dt`, `t` and `t + dt`. Values are stored row-major, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceGrid {
    pub axes: Vec<Vec<f64>>,
    pub dt: f64,
    pub values: [Vec<f64>; 3],
}

impl PriceGrid {
    /// Samples `f(S, t)` on uniform axes `lo_j + i·h_j`, `i < count_j`.
    pub fn sample<F>(lo: &[f64], h: &[f64], count: &[usize], t: f64, dt: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64], f64) -> f64,
    {
        let n = lo.len();
        if h.len() != n || count.len() != n {
            return Err(Error::InvalidArgument(
                "grid bounds have mismatched lengths".into(),
            ));
        }
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..count[j]).map(|i| lo[j] + i as f64 * h[j]).collect())
            .collect();
        let len: usize = count.iter().product();
        let mut values: [Vec<f64>; 3] = Default::default();
        let mut s = vec![0.0; n];
        for (layer, v) in values.iter_mut().enumerate() {
            let time = t + (layer as f64 - 1.0) * dt;
            *v = (0..len)
                .map(|i| {
                    unflatten(i, count, &mut s, &axes);
                    f(&s, time)
                })
                .collect();
        }
        Ok(Self { axes, dt, values })
    }

    fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len()).collect()
    }
}

fn unflatten(mut i: usize, count: &[usize], s: &mut [f64], axes: &[Vec<f64>]) {
    for j in (0..count.len()).rev() {
        s[j] = axes[j][i % count[j]];
        i /= count[j];
    }
}

/// Pointwise residual on the interior of the grid (every axis without its
/// two end points), row-major like [`PriceGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualField {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl ResidualField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Weighted nodes `(y, w)` with `Σ w·g(y) ≈ ∫ g(y) ν(dy)/λ`.
fn jump_rule(jump: &JumpSpec) -> Vec<(f64, f64)> {
    let simpson =
        |a: f64, b: f64, intervals: usize, density: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> {
            let step = (b - a) / intervals as f64;
            (0..=intervals)
                .map(|i| {
                    let y = a + i as f64 * step;
                    let c = if i == 0 || i == intervals {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    (y, c * step / 3.0 * density(y))
                })
                .collect()
        };
    match *jump {
        JumpSpec::None => vec![],
        JumpSpec::Merton { mean, std, .. } => {
            let norm = 1.0 / (std * (2.0 * std::f64::consts::PI).sqrt());
            simpson(mean - 10.0 * std, mean + 10.0 * std, 400, &|y| {
                let z = (y - mean) / std;
                norm * (-0.5 * z * z).exp()
            })
        }
        JumpSpec::Kou {
            p_up,
            eta_up,
            eta_down,
            ..
        } => {
            // exponential tails converge slowly under Simpson; use a finer rule
            let mut rule = simpson(0.0, 40.0 / eta_up, 4000, &|y| {
                p_up * eta_up * (-eta_up * y).exp()
            });
            rule.extend(simpson(-40.0 / eta_down, 0.0, 4000, &|y| {
                (1.0 - p_up) * eta_down * (eta_down * y).exp()
            }));
            rule
        }
    }
}

/// Linear interpolation on a uniform axis, extended linearly past its ends.
fn interpolate(axis: &[f64], values: impl Fn(usize) -> f64, x: f64) -> f64 {
    let h = axis[1] - axis[0];
    let p = (x - axis[0]) / h;
    let i = (p.floor().max(0.0) as usize).min(axis.len() - 2);
    let t = p - i as f64;
    values(i) * (1.0 - t) + values(i + 1) * t
}

/// Finite-difference evaluation of
/// `∂_t V + Σ b_j S_j ∂_j V + ½ Σ Σ_jk S_j S_k ∂_jk V + Σ_j λ_j ∫ (V(S_j e^y) − V) F_j(dy) − rV`
/// with `b_j = r + μ_j + ½Σ_jj`, the drift of `S_j` under the model.
/// Central differences in space and time; the jump integral uses Simpson
/// quadrature over the jump density and linear interpolation of `V`.
pub fn pide_residual(
    spec: &OptionSpec,
    model: &CharacteristicModel,
    grid: &PriceGrid,
) -> Result<ResidualField> {
    let t = model.triplet();
    let n = t.dim();
    if n > 2 || grid.axes.len() != n {
        return Err(Error::UnsupportedDimension {
            n: grid.axes.len().max(n),
            max: 2,
        });
    }
    if spec.dim() != n {
        return Err(Error::InvalidArgument(
            "option and model dimensions differ".into(),
        ));
    }
    if !(grid.dt > 0.0) {
        return Err(Error::InvalidArgument(
            "time spacing must be positive".into(),
        ));
    }
    let counts = grid.counts();
    let len: usize = counts.iter().product();
    if grid.values.iter().any(|v| v.len() != len) {
        return Err(Error::InvalidArgument(
            "value layers do not match the axes".into(),
        ));
    }
    let mut h = vec![0.0; n];
    for (j, axis) in grid.axes.iter().enumerate() {
        if axis.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "axis {j} needs at least 3 points"
            )));
        }
        h[j] = axis[1] - axis[0];
        let uniform = axis
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h[j]).abs() <= 1e-9 * h[j].abs().max(1e-300));
        if !(h[j] > 0.0 && uniform && axis[0] > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "axis {j} must be uniform, increasing and positive"
            )));
        }
        let limit = axis[1] / 10.0;
        if h[j] > limit {
            return Err(Error::GridTooCoarse { h: h[j], limit });
        }
    }

    let r = spec.rate;
    let cov = t.covariance();
    let drift: Vec<f64> = (0..n)
        .map(|j| r + t.drift()[j] + 0.5 * cov[(j, j)])
        .collect();
    let rules: Vec<(f64, Vec<(f64, f64)>)> = t
        .jumps()
        .iter()
        .map(|j| (j.intensity(), jump_rule(j)))
        .chain(std::iter::repeat((0.0, vec![])))
        .take(n)
        .collect();

    let strides: Vec<usize> = (0..n).map(|j| counts[j + 1..].iter().product()).collect();
    let [prev, now, next] = &grid.values;
    let interior: Vec<usize> = counts.iter().map(|c| c - 2).collect();
    let total: usize = interior.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let mut s = vec![0.0; n];
    for q in 0..total {
        let mut rest = q;
        for j in (0..n).rev() {
            idx[j] = rest % interior[j] + 1;
            rest /= interior[j];
            s[j] = grid.axes[j][idx[j]];
        }
        let p: usize = (0..n).map(|j| idx[j] * strides[j]).sum();
        let v = now[p];
        let mut res = (next[p] - prev[p]) / (2.0 * grid.dt) - r * v;
        for j in 0..n {
            let (up, down) = (now[p + strides[j]], now[p - strides[j]]);
            let d1 = (up - down) / (2.0 * h[j]);
            let d2 = (up - 2.0 * v + down) / (h[j] * h[j]);
            res += drift[j] * s[j] * d1 + 0.5 * cov[(j, j)] * s[j] * s[j] * d2;

            let (lambda, rule) = &rules[j];
            if *lambda > 0.0 {
                let base = p - idx[j] * strides[j];
                let line = |i: usize| now[base + i * strides[j]];
                let integral: f64 = rule
                    .iter()
                    .map(|&(y, w)| w * (interpolate(&grid.axes[j], line, s[j] * y.exp()) - v))
                    .sum();
                res += lambda * integral;
            }
        }
        if n == 2 {
            let (a, b) = (strides[0], strides[1]);
            let cross = (now[p + a + b] - now[p + a - b] - now[p - a + b] + now[p - a - b])
                / (4.0 * h[0] * h[1]);
            res += cov[(0, 1)] * s[0] * s[1] * cross;
        }
        values.push(res);
    }
    Ok(ResidualField {
        axes: grid
            .axes
            .iter()
            .map(|a| a[1..a.len() - 1].to_vec())
            .collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::black_scholes_put;
    use nalgebra::DMatrix;

    fn merton2() -> CharacteristicModel {
        CharacteristicModel::with_jumps(
            vec![0.2, 0.3],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]),
            vec![
                JumpSpec::Merton {
                    intensity: 0.8,
                    mean: -0.1,
                    std: 0.2,
                },
                JumpSpec::Kou {
                    intensity: 0.5,
                    p_up: 0.4,
                    eta_up: 10.0,
                    eta_down: 5.0,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn constant_gives_minus_rc() {
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![50.0, 50.0], 0.05).unwrap();
        let g = PriceGrid::sample(&[40.0, 40.0], &[1.0, 1.0], &[21, 21], 0.5, 1e-3, |_, _| 7.0)
            .unwrap();
        let res = pide_residual(&spec, &merton2(), &g).unwrap();
        assert_eq!(res.values.len(), 19 * 19);
        assert!(res.values.iter().all(|v| (v + 0.05 * 7.0).abs() < 1e-12));
    }

    #[test]
    fn basket_value_is_a_solution() {
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![50.0, 50.0], 0.05).unwrap();
        let g = PriceGrid::sample(&[40.0, 40.0], &[1.0, 1.0], &[21, 21], 0.5, 1e-3, |s, _| {
            s[0] + s[1]
        })
        .unwrap();
        let res = pide_residual(&spec, &merton2(), &g).unwrap();
        assert!(res.max_abs() < 1e-8, "{}", res.max_abs());
    }

    fn bs_residual(h: f64) -> f64 {
        let (k, r, sigma, big_t) = (100.0, 0.05, 0.2, 1.0);
        let spec = OptionSpec::basket_put(k, big_t, vec![100.0], r).unwrap();
        let m = CharacteristicModel::gbm(vec![sigma], DMatrix::identity(1, 1)).unwrap();
        let count = (40.0 / h).round() as usize + 1;
        let g = PriceGrid::sample(&[80.0], &[h], &[count], 0.5, 1e-3, |s, t| {
            black_scholes_put(s[0], k, r, sigma, big_t - t)
        })
        .unwrap();
        pide_residual(&spec, &m, &g).unwrap().max_abs()
    }

    #[test]
    fn black_scholes_residual_is_second_order() {
        let e: Vec<f64> = [2.0, 1.0, 0.5].iter().map(|&h| bs_residual(h)).collect();
        assert!(e[2] < 1e-2, "{e:?}");
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 1.9, "{e:?}");
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![10.0], 0.05).unwrap();
        let m = CharacteristicModel::gbm(vec![0.2], DMatrix::identity(1, 1)).unwrap();
        let g = PriceGrid::sample(&[5.0], &[2.0], &[10], 0.5, 1e-3, |_, _| 0.0).unwrap();
        assert!(matches!(
            pide_residual(&spec, &m, &g),
            Err(Error::GridTooCoarse { .. })
        ));
    }
}
