use num_complex::Complex64;

use super::{check_budget, check_dims, pricing_strip, Diagnostics, PricingResult};
use crate::error::{Error, Result};
use crate::levy::LevyExponent;
use crate::mellin::{
    choose_truncation, inverse_mellin, inverse_mellin_many, ContourSpec, MellinFunction,
    MellinInversion, MAX_DIM, MAX_HALF_WIDTH,
};
use crate::payoffs::{
    call_from_parity, direct_payoff, log_basket_put, ExerciseStyle, OptionSpec, PayoffKind,
};

const DEFAULT_ABSCISSA: f64 = 2.0;
const DEFAULT_SPACING: f64 = 0.5;
const TRUNCATION_TOL: f64 = 1e-14;

/// `ln E[e^{−w·L_u}] = −u·Ψ(iw)`, the log of `Φ(w̄i, u)`, with `w̄i` read
/// componentwise. NaN when the exponent is undefined at `w`.
pub(crate) fn log_kernel(model: &dyn LevyExponent, w: &[Complex64], u: f64) -> Complex64 {
    let mut iw = [Complex64::new(0.0, 0.0); MAX_DIM];
    for (z, wj) in iw.iter_mut().zip(w) {
        *z = Complex64::i() * wj;
    }
    match model.exponent(&iw[..w.len()]) {
        Ok(psi) => -u * psi,
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    }
}

/// The discounted European put integrand `e^{−rτ}·θ̂(w)·E[(e^{rτ + L_τ})^{−w}]`
/// in log form, so that the inversion at `x = S` is the price.
fn european_function<'a>(spec: &OptionSpec, model: &'a dyn LevyExponent) -> MellinFunction<'a> {
    let (k, r, tau) = (spec.strike, spec.rate, spec.maturity);
    MellinFunction::new(pricing_strip(model), move |w: &[Complex64]| {
        let sum: Complex64 = w.iter().sum();
        log_basket_put(w, k) + log_kernel(model, w, tau) - r * tau * (sum + 1.0)
    })
}

fn check_exponent_at(model: &dyn LevyExponent, abscissa: &[f64]) -> Result<()> {
    let iw: Vec<Complex64> = abscissa.iter().map(|&a| Complex64::new(0.0, a)).collect();
    let psi = model.exponent(&iw)?;
    if !(psi.re.is_finite() && psi.im.is_finite()) {
        return Err(Error::Domain(format!(
            "characteristic exponent is not finite at w = {abscissa:?}"
        )));
    }
    Ok(())
}

/// A contour for `spec`: abscissa 2 (pulled inside the model strip when
/// that is narrower), node spacing 0.5, and half-widths where the integrand
/// has decayed by 1e-14 relative to the real axis.
pub fn default_contour(spec: &OptionSpec, model: &dyn LevyExponent) -> Result<ContourSpec> {
    spec.validate()?;
    check_dims(spec, model)?;
    let n = spec.dim();
    let abscissa: Vec<f64> = pricing_strip(model)
        .iter()
        .map(|&(lo, hi)| {
            if hi.is_finite() {
                DEFAULT_ABSCISSA.min(0.5 * (lo + hi))
            } else {
                DEFAULT_ABSCISSA
            }
        })
        .collect();
    if spec.maturity == 0.0 {
        return ContourSpec::with_spacing(abscissa, vec![8.0; n], DEFAULT_SPACING);
    }
    check_exponent_at(model, &abscissa)?;
    let f = european_function(spec, model);
    let half_width = match choose_truncation(&f, &abscissa, TRUNCATION_TOL) {
        Ok(b) => b,
        // very short maturities: no Gaussian decay within reach, cut hard
        Err(Error::NonDecaying { .. }) => vec![MAX_HALF_WIDTH; n],
        Err(e) => return Err(e),
    };
    ContourSpec::with_spacing(abscissa, half_width, DEFAULT_SPACING)
}

pub(crate) fn folded_points(contour: &ContourSpec) -> u64 {
    contour.nodes.iter().map(|&m| m as u64).product::<u64>() / 2
}

/// European price as `e^{−rτ}·M⁻¹{θ̂(w)·Φ(w̄i, τ)·e^{−rτΣw}}` at `x = S`.
/// Calls come from the put through parity.
pub fn price_european(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    contour: &ContourSpec,
) -> Result<PricingResult> {
    spec.validate()?;
    check_dims(spec, model)?;
    if spec.maturity == 0.0 {
        return Ok(PricingResult::exact(
            direct_payoff(spec.kind, spec.strike, &spec.spot),
            "zero maturity: payoff returned without quadrature",
        ));
    }
    contour.validate()?;
    contour.check_strip(&pricing_strip(model))?;
    check_budget(folded_points(contour))?;
    check_exponent_at(model, &contour.abscissa)?;

    let f = european_function(spec, model);
    let inv = inverse_mellin(&f, contour, &spec.spot)?;
    finish(spec, model, inv)
}

/// [`price_european`] at each of `spots`, sharing one pass over the contour.
/// The spot in `spec` is ignored.
pub fn price_european_many(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    contour: &ContourSpec,
    spots: &[Vec<f64>],
) -> Result<Vec<PricingResult>> {
    let specs = specs_at(spec, spots)?;
    check_dims(spec, model)?;
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
    contour.validate()?;
    contour.check_strip(&pricing_strip(model))?;
    check_budget(folded_points(contour))?;
    check_exponent_at(model, &contour.abscissa)?;

    let f = european_function(spec, model);
    let invs = inverse_mellin_many(&f, contour, spots)?;
    specs
        .iter()
        .zip(invs)
        .map(|(s, inv)| finish(s, model, inv))
        .collect()
}

/// `spec` moved to each of `spots`, validated.
pub(crate) fn specs_at(spec: &OptionSpec, spots: &[Vec<f64>]) -> Result<Vec<OptionSpec>> {
    spots
        .iter()
        .map(|x| {
            let mut s = spec.clone();
            s.spot = x.clone();
            s.validate()?;
            Ok(s)
        })
        .collect()
}

fn finish(
    spec: &OptionSpec,
    model: &dyn LevyExponent,
    inv: MellinInversion,
) -> Result<PricingResult> {
    if !inv.value.is_finite() {
        return Err(Error::Domain(
            "inversion produced a non-finite price".into(),
        ));
    }
    let mut notes: Vec<String> = inv.warning.into_iter().collect();
    let value = match spec.kind {
        PayoffKind::BasketPut => inv.value,
        PayoffKind::BasketCallViaParity => {
            let mut euro = spec.clone();
            euro.style = ExerciseStyle::European;
            notes.push("call priced from the put by parity".into());
            call_from_parity(inv.value, &euro, model)?
        }
    };
    Ok(PricingResult {
        price: value,
        european_part: value,
        premium_part: 0.0,
        diagnostics: Diagnostics {
            nodes: inv.nodes,
            half_width: inv.half_width,
            imag_residue: inv.imag_residue,
            notes,
            ..Diagnostics::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{CharacteristicModel, JumpSpec};
    use crate::oracles::{black_scholes_call, black_scholes_put};
    use nalgebra::DMatrix;

    fn gbm1(sigma: f64) -> CharacteristicModel {
        CharacteristicModel::gbm(vec![sigma], DMatrix::identity(1, 1)).unwrap()
    }

    fn put1(s: f64, k: f64, t: f64, r: f64) -> OptionSpec {
        OptionSpec::basket_put(k, t, vec![s], r).unwrap()
    }

    fn price(spec: &OptionSpec, model: &CharacteristicModel) -> PricingResult {
        let c = default_contour(spec, model).unwrap();
        price_european(spec, model, &c).unwrap()
    }

    #[test]
    fn gbm_kernel_expansion() {
        // Φ(w̄i, τ) = exp(−τ(w'μ − ½ w'Σw)) for GBM
        let m = CharacteristicModel::gbm(
            vec![0.2, 0.3],
            DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]),
        )
        .unwrap();
        let mu = m.triplet().drift().to_vec();
        let cov = m.triplet().covariance().clone();
        let w = [Complex64::new(1.3, 0.7), Complex64::new(0.4, -2.1)];
        let tau = 0.8;
        let lin = w[0] * mu[0] + w[1] * mu[1];
        let quad = w[0] * (cov[(0, 0)] * w[0] + cov[(0, 1)] * w[1])
            + w[1] * (cov[(1, 0)] * w[0] + cov[(1, 1)] * w[1]);
        let expected = (-tau * (lin - 0.5 * quad)).exp();
        let via_cf = m
            .char_function(&[Complex64::i() * w[0], Complex64::i() * w[1]], tau)
            .unwrap();
        let via_kernel = log_kernel(&m, &w, tau).exp();
        assert!((expected - via_cf).norm() < 1e-14);
        assert!((expected - via_kernel).norm() < 1e-14);
    }

    #[test]
    fn black_scholes_reference() {
        let p = price(&put1(100.0, 100.0, 1.0, 0.05), &gbm1(0.2));
        assert!(
            (p.price - 5.573_526_022_256_971).abs() < 1e-8,
            "{}",
            p.price
        );
        assert_eq!(p.premium_part, 0.0);
        assert!(p.diagnostics.imag_residue < 1e-8);
    }

    #[test]
    fn black_scholes_grid() {
        let mut worst: f64 = 0.0;
        for &m in &[0.5, 0.8, 1.0, 1.2, 2.0] {
            for &sigma in &[0.1, 0.2, 0.4] {
                for &t in &[0.25, 1.0, 3.0] {
                    let p = price(&put1(100.0 * m, 100.0, t, 0.05), &gbm1(sigma)).price;
                    let bs = black_scholes_put(100.0 * m, 100.0, 0.05, sigma, t);
                    worst = worst.max((p - bs).abs());
                }
            }
        }
        assert!(worst < 1e-8, "worst error {worst}");
    }

    #[test]
    fn contour_shift_invariance() {
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![45.0, 55.0], 0.05).unwrap();
        let m = CharacteristicModel::gbm(
            vec![0.2, 0.3],
            DMatrix::from_row_slice(2, 2, &[1.0, -0.5, -0.5, 1.0]),
        )
        .unwrap();
        let base = default_contour(&spec, &m).unwrap();
        let p0 = price_european(&spec, &m, &base).unwrap().price;
        for shift in [-0.5, 0.5] {
            let mut c = base.clone();
            c.abscissa = vec![2.0 + shift; 2];
            let p = price_european(&spec, &m, &c).unwrap().price;
            assert!(((p - p0) / p0).abs() < 1e-6, "{p} vs {p0}");
        }
    }

    #[test]
    fn short_maturity_returns_payoff() {
        let spec = put1(90.0, 100.0, 0.0, 0.05);
        let p = price(&spec, &gbm1(0.2));
        assert_eq!(p.price, 10.0);
        assert!(!p.diagnostics.notes.is_empty());
        let spec = put1(90.0, 100.0, 1e-8, 0.05);
        let p = price(&spec, &gbm1(0.2));
        assert!((p.price - 10.0).abs() < 1e-4, "{}", p.price);
    }

    #[test]
    fn call_by_parity() {
        let mut spec = put1(105.0, 100.0, 1.0, 0.03);
        spec.kind = PayoffKind::BasketCallViaParity;
        let p = price(&spec, &gbm1(0.25));
        let bs = black_scholes_call(105.0, 100.0, 0.03, 0.25, 1.0);
        assert!((p.price - bs).abs() < 1e-8);
    }

    #[test]
    fn merton_is_finite_and_above_intrinsic_discounted() {
        let m = CharacteristicModel::with_jumps(
            vec![0.2],
            DMatrix::identity(1, 1),
            vec![JumpSpec::Merton {
                intensity: 1.0,
                mean: -0.1,
                std: 0.2,
            }],
        )
        .unwrap();
        let p = price(&put1(100.0, 100.0, 1.0, 0.05), &m).price;
        let bs = black_scholes_put(100.0, 100.0, 0.05, 0.2, 1.0);
        assert!(p > bs, "jumps add variance: {p} vs {bs}");
    }

    #[test]
    fn rejects_out_of_strip_and_large_dimension() {
        let spec = put1(100.0, 100.0, 1.0, 0.05);
        let c = ContourSpec::uniform(1, -0.5, 32.0, 128).unwrap();
        assert!(matches!(
            price_european(&spec, &gbm1(0.2), &c),
            Err(Error::StripViolation { .. })
        ));
        let spec = OptionSpec::basket_put(100.0, 1.0, vec![25.0; 4], 0.05).unwrap();
        let m = CharacteristicModel::gbm(vec![0.2; 4], DMatrix::identity(4, 4)).unwrap();
        assert!(matches!(
            default_contour(&spec, &m),
            Err(Error::UnsupportedDimension { n: 4, .. })
        ));
    }
}
