//! Exponential Lévy models described by their characteristic triplet.
//!
//! A model is the triplet `(drift, Σ, ν)` of the log-return process `L_t`,
//! with `Σ = diag(vols)·corr·diag(vols)` and `ν` a product of independent
//! per-asset finite-activity jump measures. Asset prices follow
//! `S_t = S_0·exp(r·t + L_t)`, so the risk-neutral drift makes `E[e^{L_t}] = 1`.
//!
//! The jump part uses the zero truncation function: with finite activity
//! `Ψ(u) = −i·u'μ + ½u'Σu + Σ_k λ_k(1 − E[e^{i u_k J_k}])`.

mod jumps;
mod sampler;

pub use jumps::JumpSpec;
pub use sampler::{levy_ito_sample, LevySampler};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the drift of `L` is fixed from the volatilities, jumps and rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DriftConvention {
    /// `μ_i = −σ_i²/2 − λ_i(E e^J − 1)`: `E[e^{L_t}] = 1`.
    #[default]
    Martingale,
    /// Also subtracts the rate, `μ_i = −r − σ_i²/2 − λ_i(E e^J − 1)`.
    /// Kept for reproducing that literal formula; the discounted asset is
    /// then not a martingale and prices are biased.
    #[serde(rename = "paper_literal")]
    RateAdjusted,
}

/// Anything that can evaluate a characteristic exponent `Ψ` at complex
/// arguments. The pricer only needs this interface, so infinite-activity
/// models can plug in without touching it.
pub trait LevyExponent: Sync {
    fn dim(&self) -> usize;

    /// `Ψ(u)` with `E[e^{i u·L_t}] = e^{−tΨ(u)}`.
    fn exponent(&self, u: &[Complex64]) -> Result<Complex64>;

    /// Per-asset open interval of `Re(w)` where `E[e^{−w·L_t}]` is finite.
    fn exp_moment_strip(&self) -> Vec<(f64, f64)>;
}

/// Characteristic triplet of an n-dimensional Lévy process.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyTriplet {
    drift: Vec<f64>,
    vols: Vec<f64>,
    corr: DMatrix<f64>,
    jumps: Vec<JumpSpec>,
    cov: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl LevyTriplet {
    /// Builds a triplet with a user-supplied drift. `jumps` may be empty
    /// (no jumps on any asset) or hold one entry per asset.
    pub fn new(
        drift: Vec<f64>,
        vols: Vec<f64>,
        corr: DMatrix<f64>,
        jumps: Vec<JumpSpec>,
    ) -> Result<Self> {
        let n = vols.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "at least one asset is required".into(),
            ));
        }
        if drift.len() != n {
            return Err(Error::InvalidArgument(format!(
                "drift has length {} but there are {n} assets",
                drift.len()
            )));
        }
        for (i, d) in drift.iter().enumerate() {
            crate::error::ensure_finite(&format!("drift[{i}]"), *d)?;
        }
        let jumps = normalize_jumps(jumps, n)?;
        let (cov, chol) = covariance(&vols, &corr)?;
        Ok(Self {
            drift,
            vols,
            corr,
            jumps,
            cov,
            chol,
        })
    }

    /// Builds a triplet whose drift is fixed by [`calibrate_drift`].
    pub fn calibrated(
        vols: Vec<f64>,
        corr: DMatrix<f64>,
        jumps: Vec<JumpSpec>,
        rate: f64,
        convention: DriftConvention,
    ) -> Result<Self> {
        let jumps = normalize_jumps(jumps, vols.len())?;
        let drift = calibrate_drift(&vols, &corr, &jumps, rate, convention)?;
        Self::new(drift, vols, corr, jumps)
    }

    pub fn dim(&self) -> usize {
        self.vols.len()
    }
    pub fn drift(&self) -> &[f64] {
        &self.drift
    }
    pub fn vols(&self) -> &[f64] {
        &self.vols
    }
    pub fn corr(&self) -> &DMatrix<f64> {
        &self.corr
    }
    pub fn jumps(&self) -> &[JumpSpec] {
        &self.jumps
    }
    /// `Σ = diag(σ)·ρ·diag(σ)`.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }
    /// Lower Cholesky factor of `Σ`.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }
}

fn normalize_jumps(jumps: Vec<JumpSpec>, n: usize) -> Result<Vec<JumpSpec>> {
    let jumps = if jumps.is_empty() {
        vec![JumpSpec::None; n]
    } else {
        jumps
    };
    if jumps.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} jump specifications, got {}",
            jumps.len()
        )));
    }
    for j in &jumps {
        j.validate()?;
    }
    Ok(jumps)
}

/// Checks a correlation matrix: square, symmetric, unit diagonal, entries in
/// [-1, 1] and positive semidefinite. The error names the offending
/// eigenvalue when the last check fails.
pub fn validate_correlation(corr: &DMatrix<f64>, n: usize) -> Result<()> {
    if corr.nrows() != n || corr.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "correlation matrix must be {n}x{n}, got {}x{}",
            corr.nrows(),
            corr.ncols()
        )));
    }
    for i in 0..n {
        if (corr[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "correlation diagonal entry ({i},{i}) = {} is not 1",
                corr[(i, i)]
            )));
        }
        for j in 0..n {
            let c = corr[(i, j)];
            if !c.is_finite() || !(-1.0..=1.0).contains(&c) {
                return Err(Error::InvalidArgument(format!(
                    "correlation entry ({i},{j}) = {c} outside [-1, 1]"
                )));
            }
            if (c - corr[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "correlation matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    let eig = SymmetricEigen::new(corr.clone());
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(Error::MatrixNotPd(format!(
            "correlation matrix has negative eigenvalue {min:.6e}"
        )));
    }
    Ok(())
}

fn covariance(vols: &[f64], corr: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = vols.len();
    for (i, s) in vols.iter().enumerate() {
        if !(s.is_finite() && *s > 0.0) {
            return Err(Error::MatrixNotPd(format!(
                "volatility {i} must be > 0, got {s}"
            )));
        }
    }
    validate_correlation(corr, n)?;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(vols));
    let cov = &d * corr * &d;
    let chol = cov.clone().cholesky().ok_or_else(|| {
        Error::MatrixNotPd("covariance is rank deficient (Cholesky failed)".into())
    })?;
    Ok((cov, chol.l()))
}

/// Drift vector making each discounted asset a martingale (or, under
/// [`DriftConvention::RateAdjusted`], the same minus `r`).
pub fn calibrate_drift(
    vols: &[f64],
    corr: &DMatrix<f64>,
    jumps: &[JumpSpec],
    rate: f64,
    convention: DriftConvention,
) -> Result<Vec<f64>> {
    let n = vols.len();
    crate::error::ensure_finite("rate", rate)?;
    covariance(vols, corr)?;
    let jumps = normalize_jumps(jumps.to_vec(), n)?;
    let shift = match convention {
        DriftConvention::Martingale => 0.0,
        DriftConvention::RateAdjusted => rate,
    };
    vols.iter()
        .zip(&jumps)
        .map(|(s, j)| Ok(-shift - 0.5 * s * s - j.compensator()?))
        .collect()
}

/// A named Lévy model with closed-form characteristic exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicModel {
    name: String,
    triplet: LevyTriplet,
}

impl CharacteristicModel {
    pub fn new(name: impl Into<String>, triplet: LevyTriplet) -> Self {
        Self {
            name: name.into(),
            triplet,
        }
    }

    /// Correlated geometric Brownian motion with martingale drift.
    pub fn gbm(vols: Vec<f64>, corr: DMatrix<f64>) -> Result<Self> {
        let t = LevyTriplet::calibrated(vols, corr, vec![], 0.0, DriftConvention::Martingale)?;
        Ok(Self::new("gbm", t))
    }

    /// Diffusion plus per-asset jumps, martingale drift.
    pub fn with_jumps(vols: Vec<f64>, corr: DMatrix<f64>, jumps: Vec<JumpSpec>) -> Result<Self> {
        let name = match jumps.iter().find(|j| !matches!(j, JumpSpec::None)) {
            Some(JumpSpec::Merton { .. }) => "merton",
            Some(JumpSpec::Kou { .. }) => "kou",
            _ => "gbm",
        };
        let t = LevyTriplet::calibrated(vols, corr, jumps, 0.0, DriftConvention::Martingale)?;
        Ok(Self::new(name, t))
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn triplet(&self) -> &LevyTriplet {
        &self.triplet
    }

    /// Lévy–Khintchine exponent `Ψ(u)`, in closed form for real or complex `u`.
    pub fn char_exponent(&self, u: &[Complex64]) -> Result<Complex64> {
        let t = &self.triplet;
        let n = t.dim();
        if u.len() != n {
            return Err(Error::InvalidArgument(format!(
                "argument has length {} but model has {n} assets",
                u.len()
            )));
        }
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite argument to char_exponent".into(),
            ));
        }
        let i = Complex64::i();
        let mut drift = Complex64::new(0.0, 0.0);
        let mut quad = Complex64::new(0.0, 0.0);
        let mut jumps = Complex64::new(0.0, 0.0);
        for a in 0..n {
            drift += u[a] * t.drift[a];
            let mut row = Complex64::new(0.0, 0.0);
            for b in 0..n {
                row += t.cov[(a, b)] * u[b];
            }
            quad += u[a] * row;
            jumps += t.jumps[a].exponent(a, u[a])?;
        }
        Ok(-i * drift + 0.5 * quad + jumps)
    }

    /// `Φ(u; t) = exp(−t·Ψ(u))`; exactly 1 at `t = 0`.
    pub fn char_function(&self, u: &[Complex64], t: f64) -> Result<Complex64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time must be >= 0, got {t}"
            )));
        }
        let psi = self.char_exponent(u)?;
        if t == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let z = -t * psi;
        if z.re > 709.0 {
            return Err(Error::Overflow {
                t,
                log_modulus: z.re,
            });
        }
        Ok(z.exp())
    }
}

impl LevyExponent for CharacteristicModel {
    fn dim(&self) -> usize {
        self.triplet.dim()
    }
    fn exponent(&self, u: &[Complex64]) -> Result<Complex64> {
        self.char_exponent(u)
    }
    fn exp_moment_strip(&self) -> Vec<(f64, f64)> {
        self.triplet
            .jumps
            .iter()
            .map(|j| j.exp_moment_strip())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gbm1(sigma: f64) -> CharacteristicModel {
        CharacteristicModel::gbm(vec![sigma], DMatrix::identity(1, 1)).unwrap()
    }

    #[test]
    fn exponent_vanishes_at_origin() {
        let m = gbm1(0.2);
        assert_eq!(m.char_exponent(&[c(0.0, 0.0)]).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn gbm_exponent_hand_values() {
        let m = gbm1(0.2);
        assert!((m.triplet().drift()[0] + 0.02).abs() < 1e-15);
        let at_mi = m.char_exponent(&[c(0.0, -1.0)]).unwrap();
        assert!(at_mi.norm() < 1e-15);
        // -i*1*(-0.02) + 0.5*0.04 = 0.02 + 0.02i
        let at_one = m.char_exponent(&[c(1.0, 0.0)]).unwrap();
        assert!((at_one - c(0.02, 0.02)).norm() < 1e-15);
    }

    #[test]
    fn char_function_edge_cases() {
        let m = gbm1(0.2);
        assert_eq!(m.char_function(&[c(3.0, 1.0)], 0.0).unwrap(), c(1.0, 0.0));
        let v = m.char_function(&[c(0.0, -1.0)], 7.3).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        assert!(m.char_function(&[c(1.0, 0.0)], -1.0).is_err());
    }

    #[test]
    fn independent_marginal_matches_one_dimension() {
        let m2 = CharacteristicModel::gbm(vec![0.2, 0.35], DMatrix::identity(2, 2)).unwrap();
        let m1 = gbm1(0.2);
        let u1 = c(0.7, -0.3);
        let a = m2.char_function(&[u1, c(0.0, 0.0)], 1.5).unwrap();
        let b = m1.char_function(&[u1], 1.5).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn drift_defaults_to_minus_half_variance() {
        let mu = calibrate_drift(
            &[0.2],
            &DMatrix::identity(1, 1),
            &[],
            0.05,
            DriftConvention::Martingale,
        )
        .unwrap();
        assert!((mu[0] + 0.02).abs() < 1e-16);
        let zero = calibrate_drift(
            &[0.2],
            &DMatrix::identity(1, 1),
            &[JumpSpec::Merton {
                intensity: 0.0,
                mean: 0.3,
                std: 0.1,
            }],
            0.05,
            DriftConvention::Martingale,
        )
        .unwrap();
        assert_eq!(mu, zero);
    }

    #[test]
    fn rate_adjusted_drift_breaks_martingale_by_r() {
        let t = LevyTriplet::calibrated(
            vec![0.2],
            DMatrix::identity(1, 1),
            vec![],
            0.05,
            DriftConvention::RateAdjusted,
        )
        .unwrap();
        assert!((t.drift()[0] + 0.07).abs() < 1e-15);
        let m = CharacteristicModel::new("gbm", t);
        // Ψ(−i) = −μ − σ²/2 = r
        let psi = m.char_exponent(&[c(0.0, -1.0)]).unwrap();
        assert!((psi - c(0.05, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_correlation() {
        let corr = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        match CharacteristicModel::gbm(vec![0.2; 3], corr) {
            Err(Error::MatrixNotPd(msg)) => assert!(msg.contains("eigenvalue")),
            other => panic!("expected MatrixNotPd, got {other:?}"),
        }
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            CharacteristicModel::gbm(vec![0.2; 2], singular),
            Err(Error::MatrixNotPd(_))
        ));
        assert!(matches!(
            CharacteristicModel::gbm(vec![0.0], DMatrix::identity(1, 1)),
            Err(Error::MatrixNotPd(_))
        ));
    }

    #[test]
    fn non_finite_argument_is_rejected() {
        let m = gbm1(0.2);
        assert!(matches!(
            m.char_exponent(&[c(f64::NAN, 0.0)]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn overflow_is_reported() {
        let m = gbm1(0.2);
        // Ψ(i·w) = w·μ − ½σ²w², large real w gives a huge positive −tΨ
        let r = m.char_function(&[c(0.0, 400.0)], 10.0);
        assert!(matches!(r, Err(Error::Overflow { .. })));
    }
}
