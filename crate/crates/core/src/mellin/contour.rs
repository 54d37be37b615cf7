use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MellinFunction;
use crate::error::{Error, Result};

/// Optional taper applied to the integrand along each truncated line.
///
/// `Exponential { order: p }` multiplies by `exp(−36·(|b|/B)^{2p})`, which
/// is 1 near the real axis and below machine epsilon at the truncation
/// edge. It trades the Gibbs error of a hard cut for a smoothing error of
/// order `B^{−2p}`; use it for transforms with only algebraic decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Window {
    #[default]
    None,
    Exponential {
        order: u32,
    },
}

impl Window {
    pub(crate) fn weight(&self, b: f64, half_width: f64) -> f64 {
        match *self {
            Window::None => 1.0,
            Window::Exponential { order } => {
                let r = (b / half_width).abs().powi(2 * order as i32);
                (-36.0 * r).exp()
            }
        }
    }
}

/// Vertical contours `Re w_j = a_j`, truncated to `|Im w_j| ≤ B_j` and
/// sampled at `N_j` offset trapezoid nodes `b = −B + (m + ½)·2B/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub abscissa: Vec<f64>,
    pub half_width: Vec<f64>,
    pub nodes: Vec<usize>,
    #[serde(default)]
    pub window: Window,
}

impl ContourSpec {
    pub fn new(abscissa: Vec<f64>, half_width: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let c = Self {
            abscissa,
            half_width,
            nodes,
            window: Window::None,
        };
        c.validate()?;
        Ok(c)
    }

    /// Same contour in every one of `n` dimensions.
    pub fn uniform(n: usize, abscissa: f64, half_width: f64, nodes: usize) -> Result<Self> {
        Self::new(vec![abscissa; n], vec![half_width; n], vec![nodes; n])
    }

    /// Contour with the given node spacing and half-widths, node counts
    /// rounded up to even values of at least 16.
    pub fn with_spacing(abscissa: Vec<f64>, half_width: Vec<f64>, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "node spacing must be > 0, got {spacing}"
            )));
        }
        let nodes = half_width
            .iter()
            .map(|b| {
                let n = (2.0 * b / spacing).ceil() as usize;
                (n + n % 2).max(16)
            })
            .collect();
        let half_width = half_width
            .iter()
            .zip(&nodes)
            .map(|(_, &n)| 0.5 * n as f64 * spacing)
            .collect();
        Self::new(abscissa, half_width, nodes)
    }

    pub fn window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn dim(&self) -> usize {
        self.abscissa.len()
    }

    pub fn spacing(&self, j: usize) -> f64 {
        2.0 * self.half_width[j] / self.nodes[j] as f64
    }

    pub(crate) fn node(&self, j: usize, m: usize) -> f64 {
        -self.half_width[j] + (m as f64 + 0.5) * self.spacing(j)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.abscissa.len();
        if self.half_width.len() != n || self.nodes.len() != n {
            return Err(Error::InvalidArgument(
                "contour abscissa, half_width and nodes must have equal lengths".into(),
            ));
        }
        for j in 0..n {
            if !self.abscissa[j].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "abscissa {j} is not finite"
                )));
            }
            if !(self.half_width[j].is_finite() && self.half_width[j] > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "half_width {j} must be > 0, got {}",
                    self.half_width[j]
                )));
            }
            if self.nodes[j] < 16 || self.nodes[j] % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "nodes {j} must be even and >= 16, got {}",
                    self.nodes[j]
                )));
            }
        }
        if let Window::Exponential { order } = self.window {
            if order == 0 {
                return Err(Error::InvalidArgument("window order must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// Checks every abscissa against the open strip of `f`.
    pub fn check_strip(&self, strip: &[(f64, f64)]) -> Result<()> {
        if strip.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "contour has {} dimensions, transform has {}",
                self.dim(),
                strip.len()
            )));
        }
        for (j, (&a, &(lo, hi))) in self.abscissa.iter().zip(strip).enumerate() {
            if !(a > lo && a < hi) {
                return Err(Error::StripViolation {
                    dim: j,
                    abscissa: a,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }
}

/// Largest half-width tried before giving up.
pub const MAX_HALF_WIDTH: f64 = 16384.0;

/// Smallest half-width on the ladder 8, 16, …, 2¹⁴ at which
/// `|f(a + iB·e_j)| < tol·|f(a)|` (both signs of `B`), per dimension.
pub fn choose_truncation(f: &MellinFunction<'_>, abscissa: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let n = abscissa.len();
    if n != f.dim() {
        return Err(Error::InvalidArgument(format!(
            "abscissa has {n} entries, transform has dimension {}",
            f.dim()
        )));
    }
    let base: Vec<Complex64> = abscissa.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let log_ref = f.log_eval(&base).re;
    if !log_ref.is_finite() {
        return Err(Error::Domain(
            "transform is not finite on the real axis of the contour".into(),
        ));
    }
    let log_tol = tol.ln();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut b = 8.0;
        let found = loop {
            let mut w = base.clone();
            let mut worst = f64::NEG_INFINITY;
            for sign in [1.0, -1.0] {
                w[j] = Complex64::new(abscissa[j], sign * b);
                worst = worst.max(f.log_eval(&w).re);
            }
            if worst - log_ref < log_tol {
                break Some(b);
            }
            if b >= MAX_HALF_WIDTH {
                break None;
            }
            b *= 2.0;
        };
        match found {
            Some(b) => out.push(b),
            None => {
                return Err(Error::NonDecaying {
                    dim: j,
                    limit: MAX_HALF_WIDTH,
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(rate: f64) -> MellinFunction<'static> {
        MellinFunction::new(vec![(0.0, f64::INFINITY)], move |w: &[Complex64]| {
            0.5 * rate * w[0] * w[0]
        })
    }

    #[test]
    fn truncation_is_monotone_in_tolerance() {
        let f = gaussian(0.04);
        let loose = choose_truncation(&f, &[2.0], 1e-4).unwrap();
        let tight = choose_truncation(&f, &[2.0], 1e-8).unwrap();
        assert!(tight[0] >= loose[0]);
    }

    #[test]
    fn longer_maturity_needs_no_wider_contour() {
        // log-modulus −τσ²b²/2 along the line
        let t1 = choose_truncation(&gaussian(0.04), &[2.0], 1e-10).unwrap();
        let t2 = choose_truncation(&gaussian(0.08), &[2.0], 1e-10).unwrap();
        assert!(t2[0] <= t1[0]);
        // exp(−0.02 b²) < 1e−10 needs b > 33.9
        assert_eq!(t1[0], 64.0);
    }

    #[test]
    fn non_decaying_integrand_is_an_error() {
        let flat = MellinFunction::new(vec![(0.0, f64::INFINITY)], |_w: &[Complex64]| {
            Complex64::new(0.0, 0.0)
        });
        assert!(matches!(
            choose_truncation(&flat, &[1.0], 1e-6),
            Err(Error::NonDecaying { dim: 0, .. })
        ));
    }

    #[test]
    fn validation() {
        assert!(ContourSpec::uniform(1, 2.0, 10.0, 15).is_err());
        assert!(ContourSpec::uniform(1, 2.0, 10.0, 18).is_ok());
        assert!(ContourSpec::uniform(1, 2.0, -1.0, 18).is_err());
        let c = ContourSpec::with_spacing(vec![2.0], vec![10.2], 0.5).unwrap();
        assert_eq!(c.nodes[0], 42);
        assert!((c.spacing(0) - 0.5).abs() < 1e-15);
        let s = ContourSpec::uniform(2, 2.0, 10.0, 16).unwrap();
        assert!(matches!(
            s.check_strip(&[(0.0, f64::INFINITY), (0.0, 1.5)]),
            Err(Error::StripViolation { dim: 1, .. })
        ));
    }
}
