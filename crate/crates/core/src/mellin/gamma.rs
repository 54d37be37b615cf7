use num_complex::Complex64;

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k(2k-1)), k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Complex log-gamma, the analytic continuation of `ln Γ` with the branch
/// cut on the negative real axis.
///
/// Shifts the argument by the recurrence `Γ(z+1) = zΓ(z)` until
/// `Re z ≥ 0.5` and `|z| ≥ 15`, then applies the Stirling series.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "log_gamma of non-finite {z}"
        )));
    }
    if is_pole(z) {
        return Err(Error::Domain(format!("log_gamma pole at {}", z.re)));
    }
    Ok(log_gamma_unchecked(z))
}

pub(crate) fn log_gamma_unchecked(z: Complex64) -> Complex64 {
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 0.5 || w.norm_sqr() < 225.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(STIRLING[7], 0.0);
    for c in STIRLING[..7].iter().rev() {
        series = series * inv2 + c;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + series * inv - shift
}

/// `ln β_n(w) = Σ ln Γ(w_j) − ln Γ(Σ w_j)`.
pub fn log_multinomial_beta(w: &[Complex64]) -> Result<Complex64> {
    if w.is_empty() {
        return Err(Error::InvalidArgument(
            "multinomial beta needs at least one argument".into(),
        ));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for (j, wj) in w.iter().enumerate() {
        if is_pole(*wj) {
            return Err(Error::Domain(format!(
                "multinomial beta: argument {j} = {wj} is a gamma pole"
            )));
        }
        acc += log_gamma(*wj)?;
        sum += wj;
    }
    if is_pole(sum) {
        return Err(Error::Domain(format!(
            "multinomial beta: argument sum {sum} is a gamma pole"
        )));
    }
    Ok(acc - log_gamma(sum)?)
}

/// Multinomial beta `β_n(w) = Π Γ(w_j) / Γ(Σ w_j)`, evaluated in log space.
pub fn multinomial_beta(w: &[Complex64]) -> Result<Complex64> {
    Ok(log_multinomial_beta(w)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // reference values from a 30-digit arbitrary precision loggamma
    const REFERENCE: [(f64, f64, f64, f64); 13] = [
        (0.5, 0.0, 0.572_364_942_924_700_087_07, 0.0),
        (1.0, 0.0, 0.0, 0.0),
        (5.0, 0.0, 3.178_053_830_347_945_619_6, 0.0),
        (
            2.5,
            3.0,
            -1.470_954_610_348_841_691_3,
            2.822_615_638_260_799_45,
        ),
        (
            -3.7,
            0.2,
            -1.636_433_092_562_456_417_2,
            -12.663_282_679_635_771_969,
        ),
        (
            -9.5,
            1.5,
            -16.703_227_331_835_038_669,
            -27.955_851_227_236_072_54,
        ),
        (
            0.1,
            -40.0,
            -63.388_462_569_939_019_935,
            -106.925_901_267_644_059_6,
        ),
        (
            2.0,
            500.0,
            -775.157_310_716_614_349_25,
            2609.658_077_037_265_987_6,
        ),
        (
            -10.0,
            -500.0,
            -849.733_379_796_365_747_79,
            -2590.700_529_178_314_285_1,
        ),
        (
            150.0,
            20.0,
            598.675_644_906_349_798_22,
            100.205_303_193_882_701_24,
        ),
        (
            199.5,
            -499.0,
            458.440_752_771_360_429_13,
            -2874.988_694_033_857_216_9,
        ),
        (
            0.001,
            0.002,
            6.102_456_644_104_724_468_3,
            -1.108_299_858_460_874_654_9,
        ),
        (
            -0.5,
            0.0,
            1.265_512_123_484_645_396_5,
            -std::f64::consts::PI,
        ),
    ];

    #[test]
    fn matches_reference_to_twelve_digits() {
        for &(re, im, vr, vi) in REFERENCE.iter() {
            let got = log_gamma(c(re, im)).unwrap();
            let want = c(vr, vi);
            let tol = 1e-12 * want.norm().max(1.0);
            assert!((got - want).norm() < tol, "z = {re}+{im}i: {got} vs {want}");
        }
    }

    #[test]
    fn special_values() {
        assert_eq!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-15, true);
        assert!((log_gamma(c(5.0, 0.0)).unwrap() - c(24f64.ln(), 0.0)).norm() < 1e-14);
        let half = 0.5 * std::f64::consts::PI.ln();
        assert!((log_gamma(c(0.5, 0.0)).unwrap() - c(half, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn poles_are_rejected() {
        for p in [0.0, -1.0, -7.0] {
            assert!(matches!(log_gamma(c(p, 0.0)), Err(Error::Domain(_))));
        }
        assert!(log_gamma(c(-1.0, 1e-3)).is_ok());
    }

    #[test]
    fn reflection_identity_holds_off_axis() {
        // Γ(z)Γ(1−z) = π / sin(πz)
        for z in [c(0.3, 2.0), c(-2.7, 0.8), c(4.1, -6.0)] {
            let lhs = (log_gamma(z).unwrap() + log_gamma(1.0 - z).unwrap()).exp();
            let rhs = std::f64::consts::PI / (std::f64::consts::PI * z).sin();
            assert!((lhs - rhs).norm() < 1e-11 * rhs.norm(), "{z}");
        }
    }

    #[test]
    fn multinomial_beta_values() {
        let w = c(1.7, -0.4);
        assert!((multinomial_beta(&[w]).unwrap() - 1.0).norm() < 1e-15);
        assert!((multinomial_beta(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap() - 1.0).norm() < 1e-14);
        let b = multinomial_beta(&[c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!((b - 1.0 / 12.0).norm() < 1e-15);
    }

    #[test]
    fn multinomial_beta_names_pole() {
        match multinomial_beta(&[c(1.0, 0.0), c(-2.0, 0.0)]) {
            Err(Error::Domain(msg)) => assert!(msg.contains("argument 1")),
            e => panic!("{e:?}"),
        }
        match multinomial_beta(&[c(0.5, 0.0), c(-0.5, 0.0)]) {
            Err(Error::Domain(msg)) => assert!(msg.contains("sum")),
            e => panic!("{e:?}"),
        }
    }
}
