use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::european::{log_kernel, price_european, price_european_many, specs_at};
use super::{check_budget, check_dims, pricing_strip, BoundaryCurve, PricingResult, GRID_BUDGET};
use crate::error::{Error, Result};
use crate::levy::LevyExponent;
use crate::mellin::{choose_truncation, log_gamma_unchecked, ContourSpec, MellinFunction, MAX_DIM};
use crate::payoffs::{direct_payoff, ExerciseStyle, OptionSpec, PayoffKind};

const LAG_TOL: f64 = 1e-12;
const BOUNDARY_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100;
const POINTS_PER_BLOCK: usize = 1 << 16;

/// Collapsed Mellin sums for one time lag `u`.
///
/// On the diagonal `x = (s/n, …, s/n)` the factor `x^{−w}` depends on `w`
/// only through `Σw`, and with a common node spacing `h` the values of
/// `Σ Im w_j` lie on a lattice of step `h`. Summing the grid along lattice
/// lines once turns every later evaluation, for any `s` and any critical
/// price, into a one-dimensional sum. Only lines with `Σ Im w ≥ 0` are kept;
/// the others are their conjugates, and the coefficients carry the factor 2.
struct Lag {
    sigma_start: f64,
    prob_diag: Vec<Complex64>,
    euro_diag: Vec<Complex64>,
    /// One set of line coefficients per requested spot.
    prob_spot: Vec<Vec<Complex64>>,
}

struct Engine<'a> {
    model: &'a dyn LevyExponent,
    n: usize,
    strike: f64,
    rate: f64,
    abscissa: Vec<f64>,
    sum_a: f64,
    h: f64,
    ln_spots: Vec<Vec<f64>>,
}

/// `Re Σ_j c_j·exp((Σa + iσ_j)·l)` with `σ_j = σ₀ + j·h`.
fn line_sum(c: &[Complex64], sigma_start: f64, h: f64, sum_a: f64, l: f64) -> f64 {
    let step = Complex64::from_polar(1.0, h * l);
    let mut z = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (j, cj) in c.iter().enumerate() {
        // resynchronise the rotation to keep its drift at rounding level
        if j % 64 == 0 {
            z = Complex64::from_polar(1.0, (sigma_start + j as f64 * h) * l);
        }
        acc += cj.re * z.re - cj.im * z.im;
        z *= step;
    }
    acc * (sum_a * l).exp()
}

impl Engine<'_> {
    fn log_beta(&self, w: &[Complex64]) -> Complex64 {
        if self.n == 1 {
            return Complex64::new(0.0, 0.0);
        }
        let sum: Complex64 = w.iter().sum();
        w.iter().map(|z| log_gamma_unchecked(*z)).sum::<Complex64>() - log_gamma_unchecked(sum)
    }

    /// Half-widths at which the lag-`u` integrand has decayed by `LAG_TOL`:
    /// the doubling ladder followed by a bisection inside the last octave.
    fn half_widths(&self, u: f64) -> Result<Vec<f64>> {
        let r = self.rate;
        let f = MellinFunction::new(pricing_strip(self.model), |w: &[Complex64]| {
            let sum: Complex64 = w.iter().sum();
            self.log_beta(w) + log_kernel(self.model, w, u) - u * r * sum - sum.ln()
        });
        let ladder = choose_truncation(&f, &self.abscissa, LAG_TOL)?;
        let base: Vec<Complex64> = self
            .abscissa
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect();
        let log_ref = f.log_eval(&base).re;
        let decayed = |j: usize, b: f64| {
            [1.0, -1.0].iter().all(|sign| {
                let mut w = base.clone();
                w[j] = Complex64::new(self.abscissa[j], sign * b);
                f.log_eval(&w).re - log_ref < LAG_TOL.ln()
            })
        };
        Ok(ladder
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                let (mut lo, mut hi) = (0.5 * b, b);
                for _ in 0..8 {
                    let mid = 0.5 * (lo + hi);
                    if decayed(j, mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            })
            .collect())
    }

    fn lag_nodes(&self, u: f64) -> Result<Vec<usize>> {
        Ok(self
            .half_widths(u)?
            .iter()
            .map(|b| 2 * ((b / self.h).ceil() as usize).max(8))
            .collect())
    }

    fn build(&self, u: f64, nodes: &[usize]) -> Result<Lag> {
        let n = self.n;
        let h = self.h;
        let node = |j: usize, m: usize| (m as f64 - nodes[j] as f64 / 2.0 + 0.5) * h;
        // per-dimension tables: ln Γ(w_j), and x_j^{−w_j} for every spot
        let lg_tables: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                (0..nodes[j])
                    .map(|m| {
                        if n == 1 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            log_gamma_unchecked(Complex64::new(self.abscissa[j], node(j, m)))
                        }
                    })
                    .collect()
            })
            .collect();
        let phase: Vec<Vec<Vec<Complex64>>> = self
            .ln_spots
            .iter()
            .map(|ln_x| {
                (0..n)
                    .map(|j| {
                        (0..nodes[j])
                            .map(|m| {
                                (-Complex64::new(self.abscissa[j], node(j, m)) * ln_x[j]).exp()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let spots = phase.len();
        let top: usize = nodes.iter().map(|m| m - 1).sum();
        let sigma = |l: usize| (l as f64 - top as f64 / 2.0) * h;
        let lg_sum: Vec<Complex64> = if n == 1 {
            vec![Complex64::new(0.0, 0.0); top + 1]
        } else {
            (0..=top)
                .map(|l| log_gamma_unchecked(Complex64::new(self.sum_a, sigma(l))))
                .collect()
        };

        let mut extents = [1usize; MAX_DIM];
        extents[..n].copy_from_slice(nodes);
        extents[n - 1] /= 2;
        let len: usize = extents[..n].iter().product();
        let blocks = len.div_ceil(POINTS_PER_BLOCK);

        let partial: Vec<(Vec<Complex64>, Vec<Vec<Complex64>>)> = (0..blocks)
            .into_par_iter()
            .map(|blk| {
                let mut diag = vec![Complex64::new(0.0, 0.0); top + 1];
                let mut spot = vec![vec![Complex64::new(0.0, 0.0); top + 1]; spots];
                let mut w = [Complex64::new(0.0, 0.0); MAX_DIM];
                let mut ms = [0usize; MAX_DIM];
                for i in blk * POINTS_PER_BLOCK..((blk + 1) * POINTS_PER_BLOCK).min(len) {
                    let mut rest = i;
                    let mut l = 0;
                    let mut lg = Complex64::new(0.0, 0.0);
                    for j in (0..n).rev() {
                        let mut m = rest % extents[j];
                        rest /= extents[j];
                        if j == n - 1 {
                            m += nodes[j] / 2;
                        }
                        l += m;
                        w[j] = Complex64::new(self.abscissa[j], node(j, m));
                        lg += lg_tables[j][m];
                        ms[j] = m;
                    }
                    let e = (lg - lg_sum[l] + log_kernel(self.model, &w[..n], u)).exp();
                    diag[l] += e;
                    for (acc, ph) in spot.iter_mut().zip(&phase) {
                        let mut t = e;
                        for j in 0..n {
                            t *= ph[j][ms[j]];
                        }
                        acc[l] += t;
                    }
                }
                (diag, spot)
            })
            .collect();
        let mut diag_half = vec![Complex64::new(0.0, 0.0); top + 1];
        let mut spot_half = vec![vec![Complex64::new(0.0, 0.0); top + 1]; spots];
        for (d, s) in partial {
            for l in 0..=top {
                diag_half[l] += d[l];
            }
            for (acc, sp) in spot_half.iter_mut().zip(s) {
                for l in 0..=top {
                    acc[l] += sp[l];
                }
            }
        }
        if diag_half
            .iter()
            .chain(spot_half.iter().flatten())
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Domain(format!(
                "non-finite Mellin sum at time lag {u}"
            )));
        }

        let scale = (h / (2.0 * PI)).powi(n as i32) * (-self.rate * u).exp();
        let first = top.div_ceil(2);
        let mut lag = Lag {
            sigma_start: sigma(first),
            prob_diag: Vec::with_capacity(top + 1 - first),
            euro_diag: Vec::with_capacity(top + 1 - first),
            prob_spot: vec![Vec::with_capacity(top + 1 - first); spots],
        };
        for l in first..=top {
            // full line sum: the folded half plus the conjugate of its mirror
            let d = diag_half[l] + diag_half[top - l].conj();
            let sw = Complex64::new(self.sum_a, sigma(l));
            let weight = if 2 * l == top { 1.0 } else { 2.0 };
            let common = weight * scale * (-u * self.rate * sw).exp();
            let prob = common / sw;
            let euro = prob * self.strike / (1.0 + sw);
            lag.prob_diag.push(d * prob);
            lag.euro_diag.push(d * euro);
            for (out, sp) in lag.prob_spot.iter_mut().zip(&spot_half) {
                out.push((sp[l] + sp[top - l].conj()) * prob);
            }
        }
        Ok(lag)
    }

    /// `e^{−ru}·P(Σ_j x_j e^{ru + L_{u,j}} ≤ c)` at `x = (s/n, …, s/n)`.
    fn prob_diag(&self, lag: &Lag, s: f64, c: f64) -> f64 {
        line_sum(
            &lag.prob_diag,
            lag.sigma_start,
            self.h,
            self.sum_a,
            (self.n as f64 * c / s).ln(),
        )
    }

    /// European put with time to maturity `u` at `x = (s/n, …, s/n)`.
    fn euro_diag(&self, lag: &Lag, s: f64) -> f64 {
        line_sum(
            &lag.euro_diag,
            lag.sigma_start,
            self.h,
            self.sum_a,
            (self.n as f64 * self.strike / s).ln(),
        )
    }

    fn prob_spot(&self, lag: &Lag, p: usize, c: f64) -> f64 {
        line_sum(
            &lag.prob_spot[p],
            lag.sigma_start,
            self.h,
            self.sum_a,
            c.ln(),
        )
    }
}

/// Time-quadrature layout: the lags `Δ/8, Δ/4, Δ/2` refine the interval
/// next to the current time, where the source term switches on; the lags
/// `l·Δ` carry the plain trapezoid rule.
const SUB_LAGS: [f64; 3] = [0.125, 0.25, 0.5];
const SUB_WEIGHTS: [f64; 3] = [0.125, 0.1875, 0.375];
const ZERO_WEIGHT: f64 = 0.0625;

/// Trapezoid weight (in units of `Δ`) of lag `l·Δ` at step `k`.
fn lag_weight(l: usize, k: usize) -> f64 {
    if k == 1 {
        0.25
    } else if l == 1 {
        0.75
    } else if l == k {
        0.5
    } else {
        1.0
    }
}

struct Solution {
    curve: BoundaryCurve,
    iterations: usize,
    /// Per requested spot.
    premium_at_spot: Vec<f64>,
    in_exercise_region: Vec<bool>,
    points: u64,
    max_nodes: Vec<usize>,
}

fn run(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    contour: &ContourSpec,
    time_steps: usize,
    spots: &[Vec<f64>],
) -> Result<Solution> {
    let n = spec.dim();
    contour.validate()?;
    contour.check_strip(&pricing_strip(model))?;
    if contour.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "contour has {} dimensions, option has {n}",
            contour.dim()
        )));
    }
    let h = (0..n)
        .map(|j| contour.spacing(j))
        .fold(f64::INFINITY, f64::min);
    let engine = Engine {
        model,
        n,
        strike: spec.strike,
        rate: spec.rate,
        abscissa: contour.abscissa.clone(),
        sum_a: contour.abscissa.iter().sum(),
        h,
        ln_spots: spots
            .iter()
            .map(|x| x.iter().map(|s| s.ln()).collect())
            .collect(),
    };
    let k_strike = spec.strike;
    let m_steps = time_steps;
    let delta = spec.maturity / m_steps as f64;

    let mut lag_us: Vec<f64> = SUB_LAGS.iter().map(|f| f * delta).collect();
    lag_us.extend((1..=m_steps).map(|l| l as f64 * delta));
    let node_plan: Vec<Vec<usize>> = lag_us
        .iter()
        .map(|&u| engine.lag_nodes(u))
        .collect::<Result<_>>()?;
    let points: u64 = node_plan
        .iter()
        .map(|nodes| nodes.iter().map(|&m| m as u64).product::<u64>() / 2)
        .sum();
    check_budget(points)?;
    let mut max_nodes = vec![0; n];
    for nodes in &node_plan {
        for j in 0..n {
            max_nodes[j] = max_nodes[j].max(nodes[j]);
        }
    }
    let lags: Vec<Lag> = lag_us
        .iter()
        .zip(&node_plan)
        .map(|(&u, nodes)| engine.build(u, nodes))
        .collect::<Result<_>>()?;
    let (subs, steps) = lags.split_at(SUB_LAGS.len());

    // The early-exercise source is −rK on the exercise region. In time to
    // maturity the pricing equation reads ∂_τV = (L − r)V − f, and the
    // Duhamel step integrates the propagated source against the semigroup:
    // V(τ) = e^{τ(L−r)}θ − ∫₀^τ e^{u(L−r)} f du. The minus sign cancels the
    // −rK, so the premium is +rK ∫ e^{−ru} P(S_u in the exercise region) du.
    let r = spec.rate;
    let mut s_star = vec![k_strike];
    let mut iterations = 0;
    for k in 1..=m_steps {
        let prev = s_star[k - 1];
        let fixed: Vec<(usize, f64)> = (1..=k).map(|l| (l, s_star[k - l])).collect();
        let value = |s: f64| -> f64 {
            let mut prem = ZERO_WEIGHT * 0.5;
            for (i, lag) in subs.iter().enumerate() {
                let c = s + SUB_LAGS[i] * (prev - s);
                prem += SUB_WEIGHTS[i] * engine.prob_diag(lag, s, c);
            }
            for &(l, c) in &fixed {
                prem += lag_weight(l, k) * engine.prob_diag(&steps[l - 1], s, c);
            }
            engine.euro_diag(&steps[k - 1], s) + r * k_strike * delta * prem
        };
        // value matching: V(s) = K − s
        let g = |s: f64| value(s) - (k_strike - s);
        let tau = k as f64 * delta;
        let (s, its) = solve_bracketed(&g, prev, k_strike, tau)?;
        iterations += its;
        s_star.push(s);
    }

    let last = s_star[m_steps];
    let prev = s_star[m_steps - 1];
    let mut premium_at_spot = Vec::with_capacity(spots.len());
    let mut in_exercise_region = Vec::with_capacity(spots.len());
    for (p, x) in spots.iter().enumerate() {
        let total: f64 = x.iter().sum();
        let indicator = if total < last {
            1.0
        } else if total == last {
            0.5
        } else {
            0.0
        };
        let mut prem = ZERO_WEIGHT * indicator;
        for (i, lag) in subs.iter().enumerate() {
            let c = last + SUB_LAGS[i] * (prev - last);
            prem += SUB_WEIGHTS[i] * engine.prob_spot(lag, p, c);
        }
        for l in 1..=m_steps {
            prem +=
                lag_weight(l, m_steps) * engine.prob_spot(&steps[l - 1], p, s_star[m_steps - l]);
        }
        premium_at_spot.push(r * k_strike * delta * prem);
        in_exercise_region.push(total <= last);
    }
    Ok(Solution {
        curve: BoundaryCurve {
            times: (0..=m_steps).map(|k| k as f64 * delta).collect(),
            s_star,
        },
        iterations,
        premium_at_spot,
        in_exercise_region,
        points,
        max_nodes,
    })
}

/// Root of `g` on `(0, K]` with `g > 0` at the upper end. Below the
/// boundary `g` stays close to zero, so the bracket is grown downwards in
/// steps that start at `1e-3·K` and double, which locks onto the sign change
/// nearest to `start`. The bracket is then narrowed by the Illinois variant
/// of regula falsi until it is shorter than `1e-8·K`.
fn solve_bracketed(
    g: &dyn Fn(f64) -> f64,
    start: f64,
    strike: f64,
    tau: f64,
) -> Result<(f64, usize)> {
    let mut its = 1;
    let (mut hi, mut g_hi) = (start, g(start));
    if g_hi <= 0.0 {
        hi = strike;
        g_hi = g(hi);
        its += 1;
        if g_hi <= 0.0 {
            return Err(Error::NonConvergence {
                tau,
                last: hi,
                residual: g_hi,
            });
        }
    }
    let mut step = 1e-3 * strike;
    let (mut lo, mut g_lo);
    loop {
        lo = (hi - step).max(0.5 * hi);
        g_lo = g(lo);
        its += 1;
        if g_lo < 0.0 {
            break;
        }
        if lo < 1e-6 * strike {
            return Err(Error::NonConvergence {
                tau,
                last: lo,
                residual: g_lo,
            });
        }
        hi = lo;
        g_hi = g_lo;
        step *= 2.0;
    }
    let mut side = 0;
    for _ in 0..MAX_ITERATIONS {
        if hi - lo < BOUNDARY_TOL * strike {
            return Ok((0.5 * (lo + hi), its));
        }
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x);
        its += 1;
        if gx == 0.0 {
            return Ok((x, its));
        }
        if gx < 0.0 {
            lo = x;
            g_lo = gx;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = gx;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::NonConvergence {
        tau,
        last: 0.5 * (lo + hi),
        residual: g(0.5 * (lo + hi)),
    })
}

fn check_american(spec: &OptionSpec, time_steps: usize) -> Result<()> {
    if spec.style != ExerciseStyle::American {
        return Err(Error::UnsupportedStyle(
            "expected an American option".into(),
        ));
    }
    if time_steps < 16 {
        return Err(Error::InvalidArgument(format!(
            "time_steps must be >= 16, got {time_steps}"
        )));
    }
    Ok(())
}

/// Critical aggregate price `S*` on the uniform time-to-maturity grid with
/// `time_steps` intervals. For `n ≥ 2` value matching is imposed at the
/// equal-allocation point `(s/n, …, s/n)`.
pub fn solve_boundary(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    contour: &ContourSpec,
    time_steps: usize,
) -> Result<BoundaryCurve> {
    spec.validate()?;
    check_dims(spec, model)?;
    check_american(spec, time_steps)?;
    if spec.kind != PayoffKind::BasketPut {
        return Err(Error::InvalidArgument(
            "an exercise boundary exists for puts only".into(),
        ));
    }
    if spec.rate <= 0.0 || spec.maturity <= 0.0 {
        return Err(Error::InvalidArgument(
            "the exercise boundary needs a positive rate and maturity".into(),
        ));
    }
    Ok(run(spec, model, contour, time_steps, &[])?.curve)
}

/// American price: the European price plus the early-exercise premium, a
/// trapezoid-rule time integral over `time_steps` intervals of the
/// discounted probability of the exercise region.
pub fn price_american(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    contour: &ContourSpec,
    time_steps: usize,
) -> Result<PricingResult> {
    spec.validate()?;
    let mut out = price_american_many(
        spec,
        model,
        contour,
        time_steps,
        std::slice::from_ref(&spec.spot),
    )?;
    Ok(out.remove(0))
}

/// [`price_american`] at each of `spots`. The boundary does not depend on
/// the spot, so it is solved once. The spot in `spec` is ignored.
pub fn price_american_many(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    contour: &ContourSpec,
    time_steps: usize,
    spots: &[Vec<f64>],
) -> Result<Vec<PricingResult>> {
    let specs = specs_at(spec, spots)?;
    check_dims(spec, model)?;
    check_american(spec, time_steps)?;
    if spec.maturity == 0.0 {
        return Ok(specs
            .iter()
            .map(|s| {
                PricingResult::exact(
                    direct_payoff(s.kind, s.strike, &s.spot),
                    "zero maturity: payoff returned without quadrature",
                )
            })
            .collect());
    }
    let mut euro_spec = spec.clone();
    euro_spec.style = ExerciseStyle::European;
    let mut results = if let [x] = spots {
        euro_spec.spot = x.clone();
        vec![price_european(&euro_spec, model, contour)?]
    } else {
        price_european_many(&euro_spec, model, contour, spots)?
    };
    for r in results.iter_mut() {
        r.diagnostics.time_steps = time_steps;
    }
    let skip = if spec.kind == PayoffKind::BasketCallViaParity {
        Some("no dividends: early exercise of a call is never optimal")
    } else if spec.rate == 0.0 {
        Some("zero rate: early exercise of a put is never optimal")
    } else {
        None
    };
    if let Some(note) = skip {
        for r in results.iter_mut() {
            r.diagnostics.notes.push(note.into());
        }
        return Ok(results);
    }

    let sol = run(spec, model, contour, time_steps, spots)?;
    for (p, (result, s)) in results.iter_mut().zip(&specs).enumerate() {
        let european = result.european_part;
        let intrinsic = s.intrinsic();
        let diag = &mut result.diagnostics;
        diag.boundary_iterations = sol.iterations;
        diag.notes.push(format!(
            "time-lag grids: {} points, up to {:?} nodes per dimension (budget {GRID_BUDGET})",
            sol.points, sol.max_nodes
        ));
        let mut price = european + sol.premium_at_spot[p];
        if sol.in_exercise_region[p] {
            diag.notes.push("spot lies in the exercise region".into());
            price = intrinsic;
        } else if price < intrinsic {
            diag.notes
                .push(format!("raised to intrinsic value from {price}"));
            price = intrinsic;
        }
        diag.boundary = Some(sol.curve.clone());
        result.price = price;
        result.premium_part = price - european;
    }
    Ok(results)
}
