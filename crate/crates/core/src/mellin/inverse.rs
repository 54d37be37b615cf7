use std::f64::consts::PI;

use num_complex::Complex64;

use super::sum::{deterministic_sum, deterministic_sums};
use super::ContourSpec;
use crate::error::{Error, Result};

/// Largest dimension handled by the tensor-product rule.
pub const MAX_DIM: usize = 3;

type LogEval<'a> = dyn Fn(&[Complex64]) -> Complex64 + Send + Sync + 'a;

/// A Mellin transform `f̂(w)` known through its logarithm, together with the
/// strip `⟨a⁰_j, a^∞_j⟩` on which it is analytic.
pub struct MellinFunction<'a> {
    log_eval: Box<LogEval<'a>>,
    strip: Vec<(f64, f64)>,
}

impl<'a> MellinFunction<'a> {
    /// `log_eval` returns `ln f̂(w)`; any branch will do since only its
    /// exponential is used.
    pub fn new<F>(strip: Vec<(f64, f64)>, log_eval: F) -> Self
    where
        F: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'a,
    {
        Self {
            log_eval: Box::new(log_eval),
            strip,
        }
    }

    pub fn dim(&self) -> usize {
        self.strip.len()
    }

    pub fn strip(&self) -> &[(f64, f64)] {
        &self.strip
    }

    pub fn log_eval(&self, w: &[Complex64]) -> Complex64 {
        (self.log_eval)(w)
    }

    pub fn eval(&self, w: &[Complex64]) -> Complex64 {
        self.log_eval(w).exp()
    }
}

impl std::fmt::Debug for MellinFunction<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MellinFunction")
            .field("strip", &self.strip)
            .finish()
    }
}

/// Result of a numerical inversion with its quadrature diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MellinInversion {
    pub value: f64,
    /// Bound on the imaginary part the unfolded sum would carry, from a
    /// probe of the conjugate symmetry `f̂(w̄) = conj f̂(w)` that the fold
    /// relies on.
    pub imag_residue: f64,
    pub nodes: Vec<usize>,
    pub half_width: Vec<f64>,
    pub warning: Option<String>,
}

const PROBES: usize = 16;

/// Numerically inverts `f` at `x`. The last dimension is folded onto
/// `b_n > 0` using conjugate symmetry.
pub fn inverse_mellin(
    f: &MellinFunction<'_>,
    contour: &ContourSpec,
    x: &[f64],
) -> Result<MellinInversion> {
    let n = x.len();
    check_inputs(f, contour, x)?;

    let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let grid = FoldedGrid::new(contour);
    let integrand = integrand_fn(f, contour, &ln_x);
    let total = deterministic_sum(grid.len(), |i| {
        let mut b = [0.0; MAX_DIM];
        grid.nodes_at(i, &mut b);
        integrand(&b[..n])
    });
    let scale: f64 = (0..n).map(|j| contour.spacing(j) / (2.0 * PI)).product();
    let value = 2.0 * total.re * scale;
    let imag_residue =
        symmetry_defect(&integrand, &probe_nodes(&grid), n) * grid.len() as f64 * scale;
    Ok(MellinInversion {
        value,
        imag_residue,
        nodes: contour.nodes.clone(),
        half_width: contour.half_width.clone(),
        warning: residue_warning(value, imag_residue),
    })
}

fn check_inputs(f: &MellinFunction<'_>, contour: &ContourSpec, x: &[f64]) -> Result<()> {
    let n = x.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension { n, max: MAX_DIM });
    }
    contour.validate()?;
    if contour.dim() != n {
        return Err(Error::InvalidArgument(format!(
            "contour has {} dimensions but x has {n}",
            contour.dim()
        )));
    }
    for (j, &xj) in x.iter().enumerate() {
        if !(xj.is_finite() && xj > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "x[{j}] must be positive, got {xj}"
            )));
        }
    }
    contour.check_strip(f.strip())?;

    Ok(())
}

fn residue_warning(value: f64, imag_residue: f64) -> Option<String> {
    if !value.is_finite() {
        Some("inversion produced a non-finite value".to_string())
    } else if imag_residue > 1e-8 * (1.0 + value.abs()) {
        Some(format!(
            "imaginary residue {imag_residue:.3e} above threshold"
        ))
    } else {
        None
    }
}

/// Inverts `f` at every point of `points` with one pass over the contour
/// nodes. Each node costs one evaluation of `f` plus a few multiplications
/// per point, so this is much cheaper than repeated [`inverse_mellin`]
/// calls. `f` is exponentiated before the phase is applied, so it must stay
/// within double range on the contour.
pub fn inverse_mellin_many(
    f: &MellinFunction<'_>,
    contour: &ContourSpec,
    points: &[Vec<f64>],
) -> Result<Vec<MellinInversion>> {
    for x in points {
        check_inputs(f, contour, x)?;
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let n = contour.dim();
    let k = points.len();
    // factor[p][j][m] = x_pj^{-w_j(m)} times the taper on node m
    let factor: Vec<Vec<Vec<Complex64>>> = points
        .iter()
        .map(|x| {
            (0..n)
                .map(|j| {
                    let ln_x = x[j].ln();
                    (0..contour.nodes[j])
                        .map(|m| {
                            let b = contour.node(j, m);
                            let w = Complex64::new(contour.abscissa[j], b);
                            (-w * ln_x).exp() * contour.window.weight(b, contour.half_width[j])
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let grid = FoldedGrid::new(contour);
    let totals = deterministic_sums(grid.len(), k, |i, acc| {
        let mut m = [0usize; MAX_DIM];
        grid.indices_at(i, &mut m);
        let mut w = [Complex64::new(0.0, 0.0); MAX_DIM];
        for j in 0..n {
            w[j] = Complex64::new(contour.abscissa[j], contour.node(j, m[j]));
        }
        let g = f.log_eval(&w[..n]).exp();
        for (p, a) in acc.iter_mut().enumerate() {
            let fp = &factor[p];
            let mut t = g;
            for j in 0..n {
                t *= fp[j][m[j]];
            }
            a.add(t);
        }
    });
    let scale: f64 = (0..n).map(|j| contour.spacing(j) / (2.0 * PI)).product();
    let probe_nodes = probe_nodes(&grid);
    Ok(points
        .iter()
        .zip(totals)
        .map(|(x, total)| {
            let value = 2.0 * total.re * scale;
            let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
            let integrand = integrand_fn(f, contour, &ln_x);
            let imag_residue =
                symmetry_defect(&integrand, &probe_nodes, n) * grid.len() as f64 * scale;
            MellinInversion {
                value,
                imag_residue,
                nodes: contour.nodes.clone(),
                half_width: contour.half_width.clone(),
                warning: residue_warning(value, imag_residue),
            }
        })
        .collect())
}

fn integrand_fn<'f>(
    f: &'f MellinFunction<'_>,
    contour: &'f ContourSpec,
    ln_x: &'f [f64],
) -> impl Fn(&[f64]) -> Complex64 + Sync + 'f {
    move |b: &[f64]| -> Complex64 {
        let n = ln_x.len();
        let mut w = [Complex64::new(0.0, 0.0); MAX_DIM];
        let mut phase = Complex64::new(0.0, 0.0);
        let mut taper = 1.0;
        for j in 0..n {
            w[j] = Complex64::new(contour.abscissa[j], b[j]);
            phase -= w[j] * ln_x[j];
            taper *= contour.window.weight(b[j], contour.half_width[j]);
        }
        if taper == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (f.log_eval(&w[..n]) + phase).exp() * taper
    }
}

fn probe_nodes(grid: &FoldedGrid<'_>) -> Vec<[f64; MAX_DIM]> {
    let stride = (grid.len() / PROBES).max(1);
    (0..grid.len())
        .step_by(stride)
        .take(PROBES)
        .map(|i| {
            let mut b = [0.0; MAX_DIM];
            grid.nodes_at(i, &mut b);
            b
        })
        .collect()
}

/// Largest `|g(−b) − conj g(b)|` over the probe nodes.
fn symmetry_defect<G: Fn(&[f64]) -> Complex64>(g: &G, probes: &[[f64; MAX_DIM]], n: usize) -> f64 {
    let mut defect: f64 = 0.0;
    for b in probes {
        let mut mirror = *b;
        for v in mirror.iter_mut().take(n) {
            *v = -*v;
        }
        defect = defect.max((g(&mirror[..n]) - g(&b[..n]).conj()).norm());
    }
    defect
}

/// Tensor grid with the last dimension restricted to its positive half.
struct FoldedGrid<'c> {
    contour: &'c ContourSpec,
    extents: [usize; MAX_DIM],
    len: usize,
}

impl<'c> FoldedGrid<'c> {
    fn new(contour: &'c ContourSpec) -> Self {
        let n = contour.dim();
        let mut extents = [1usize; MAX_DIM];
        extents[..n].copy_from_slice(&contour.nodes);
        extents[n - 1] /= 2;
        let len = extents[..n].iter().product();
        Self {
            contour,
            extents,
            len,
        }
    }

    fn len(&self) -> usize {
        self.len
    }

    fn indices_at(&self, mut i: usize, m: &mut [usize; MAX_DIM]) {
        let n = self.contour.dim();
        for j in (0..n).rev() {
            m[j] = i % self.extents[j];
            i /= self.extents[j];
        }
        m[n - 1] += self.contour.nodes[n - 1] / 2;
    }

    fn nodes_at(&self, mut i: usize, b: &mut [f64; MAX_DIM]) {
        let n = self.contour.dim();
        for j in (0..n).rev() {
            let m = i % self.extents[j];
            i /= self.extents[j];
            let m = if j == n - 1 {
                m + self.contour.nodes[j] / 2
            } else {
                m
            };
            b[j] = self.contour.node(j, m);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mellin::log_gamma_unchecked;
    use crate::mellin::Window;

    fn gamma_transform() -> MellinFunction<'static> {
        MellinFunction::new(vec![(0.0, f64::INFINITY)], |w: &[Complex64]| {
            log_gamma_unchecked(w[0])
        })
    }

    #[test]
    fn inverts_gamma_to_exponential() {
        let c = ContourSpec::uniform(1, 2.0, 64.0, 512).unwrap();
        for x in [0.3, 1.0, 2.5] {
            let r = inverse_mellin(&gamma_transform(), &c, &[x]).unwrap();
            assert!(
                (r.value - (-x as f64).exp()).abs() < 1e-12,
                "x={x}: {}",
                r.value
            );
            assert!(r.warning.is_none());
        }
    }

    #[test]
    fn product_transform_inverts_to_product() {
        let f = MellinFunction::new(vec![(0.0, f64::INFINITY); 2], |w: &[Complex64]| {
            log_gamma_unchecked(w[0]) + log_gamma_unchecked(w[1])
        });
        let c = ContourSpec::uniform(2, 1.5, 48.0, 256).unwrap();
        let r = inverse_mellin(&f, &c, &[0.7, 1.9]).unwrap();
        assert!((r.value - (-(0.7f64 + 1.9)).exp()).abs() < 1e-11);
    }

    #[test]
    fn batch_matches_single_point() {
        let f = MellinFunction::new(vec![(0.0, f64::INFINITY); 2], |w: &[Complex64]| {
            log_gamma_unchecked(w[0]) + log_gamma_unchecked(w[1])
        });
        let c = ContourSpec::uniform(2, 1.5, 48.0, 128)
            .unwrap()
            .window(Window::Exponential { order: 3 });
        let points = vec![vec![0.7, 1.9], vec![2.5, 0.3], vec![1.0, 1.0]];
        let many = inverse_mellin_many(&f, &c, &points).unwrap();
        for (x, r) in points.iter().zip(&many) {
            let single = inverse_mellin(&f, &c, x).unwrap();
            assert!((r.value - single.value).abs() < 1e-14);
            assert!(r.imag_residue < 1e-12);
        }
        assert!(inverse_mellin_many(&f, &c, &[vec![1.0, -1.0]]).is_err());
        assert!(inverse_mellin_many(&f, &c, &[]).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = gamma_transform();
        let c = ContourSpec::uniform(1, -0.5, 64.0, 64).unwrap();
        assert!(matches!(
            inverse_mellin(&f, &c, &[1.0]),
            Err(Error::StripViolation { .. })
        ));
        let c = ContourSpec::uniform(1, 2.0, 64.0, 64).unwrap();
        assert!(inverse_mellin(&f, &c, &[0.0]).is_err());
        let f4 = MellinFunction::new(vec![(0.0, f64::INFINITY); 4], |_w: &[Complex64]| {
            Complex64::new(0.0, 0.0)
        });
        let c4 = ContourSpec::uniform(4, 1.0, 8.0, 16).unwrap();
        assert!(matches!(
            inverse_mellin(&f4, &c4, &[1.0; 4]),
            Err(Error::UnsupportedDimension { n: 4, .. })
        ));
    }

    #[test]
    fn error_shrinks_with_more_nodes() {
        // trapezoid aliasing error ~ e^{-2πa/h}: each doubling of the node
        // count squares it until the truncation floor.
        let f = gamma_transform();
        let exact = (-1.3f64).exp();
        let mut last = f64::INFINITY;
        for nodes in [32, 64, 128] {
            let c = ContourSpec::uniform(1, 0.5, 40.0, nodes).unwrap();
            let err = (inverse_mellin(&f, &c, &[1.3]).unwrap().value - exact).abs();
            assert!(
                err <= 0.5 * last || err < 1e-13,
                "nodes {nodes}: {err} vs {last}"
            );
            last = err;
        }
    }
}
