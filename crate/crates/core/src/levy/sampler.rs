use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::{CharacteristicModel, JumpSpec, LevyTriplet};
use crate::error::{Error, Result};

/// Exact-in-distribution increments of a finite-activity Lévy process:
/// `μ·dt + chol(Σ)·√dt·Z + Σ jumps` with Poisson jump counts.
#[derive(Debug, Clone)]
pub struct LevySampler {
    drift: Vec<f64>,
    chol: Vec<f64>,
    jumps: Vec<JumpSpec>,
    n: usize,
}

impl LevySampler {
    pub fn new(triplet: &LevyTriplet) -> Self {
        let n = triplet.dim();
        let l = triplet.cholesky();
        let mut chol = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                chol[i * n + j] = l[(i, j)];
            }
        }
        Self {
            drift: triplet.drift().to_vec(),
            chol,
            jumps: triplet.jumps().to_vec(),
            n,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn has_jumps(&self) -> bool {
        self.jumps.iter().any(|j| j.intensity() > 0.0)
    }

    /// Writes one increment over `dt` into `out`, given standard normals `z`
    /// (length n). Jumps are drawn from `rng`.
    pub fn increment<R: Rng + ?Sized>(&self, dt: f64, z: &[f64], rng: &mut R, out: &mut [f64]) {
        let sd = dt.sqrt();
        for i in 0..self.n {
            let mut g = 0.0;
            for j in 0..=i {
                g += self.chol[i * self.n + j] * z[j];
            }
            out[i] = self.drift[i] * dt + sd * g;
        }
        for (i, jump) in self.jumps.iter().enumerate() {
            let lam = jump.intensity() * dt;
            if lam > 0.0 {
                let count = Poisson::new(lam).expect("positive intensity").sample(rng) as u64;
                out[i] += jump.sample_sum(count, rng);
            }
        }
    }

    /// Convenience wrapper drawing its own normals.
    pub fn sample<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) {
        let mut z = [0.0f64; 8];
        let mut zv;
        let z: &mut [f64] = if self.n <= 8 {
            &mut z[..self.n]
        } else {
            zv = vec![0.0; self.n];
            &mut zv
        };
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        self.increment(dt, z, rng, out);
    }
}

/// Samples the increments of `L` on `[0, t]` with step `dt` (the last step is
/// shortened to land on `t`).
pub fn levy_ito_sample<R: Rng + ?Sized>(
    model: &CharacteristicModel,
    t: f64,
    dt: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    let sampler = LevySampler::new(model.triplet());
    let steps = (t / dt - 1e-12).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps);
    let mut elapsed = 0.0;
    for _ in 0..steps {
        let h = dt.min(t - elapsed);
        let mut inc = vec![0.0; sampler.dim()];
        sampler.sample(h, rng, &mut inc);
        out.push(inc);
        elapsed += h;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sample_moments_match_triplet() {
        let corr = DMatrix::from_row_slice(2, 2, &[1.0, -0.4, -0.4, 1.0]);
        let m = CharacteristicModel::gbm(vec![0.25, 0.15], corr).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dt = 0.5;
        let paths = 200_000;
        let s = LevySampler::new(m.triplet());
        let mut sum = [0.0; 2];
        let mut sq = [[0.0; 2]; 2];
        let mut x = [0.0; 2];
        for _ in 0..paths {
            s.sample(dt, &mut rng, &mut x);
            for i in 0..2 {
                sum[i] += x[i];
                for j in 0..2 {
                    sq[i][j] += x[i] * x[j];
                }
            }
        }
        let cov = m.triplet().covariance();
        for i in 0..2 {
            let mean = sum[i] / paths as f64;
            let var = cov[(i, i)] * dt;
            let se = (var / paths as f64).sqrt();
            assert!(
                (mean - m.triplet().drift()[i] * dt).abs() < 3.0 * se,
                "mean {i}"
            );
            for j in 0..2 {
                let mi = sum[i] / paths as f64;
                let mj = sum[j] / paths as f64;
                let c = sq[i][j] / paths as f64 - mi * mj;
                let target = cov[(i, j)] * dt;
                // var of a product of jointly normal variables
                let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)].powi(2)) * dt * dt
                    / paths as f64)
                    .sqrt();
                assert!((c - target).abs() < 3.0 * se, "cov {i}{j}: {c} vs {target}");
            }
        }
    }

    #[test]
    fn zero_intensity_reduces_to_gaussian_stream() {
        let plain = CharacteristicModel::gbm(vec![0.2], DMatrix::identity(1, 1)).unwrap();
        let jumpy = CharacteristicModel::with_jumps(
            vec![0.2],
            DMatrix::identity(1, 1),
            vec![JumpSpec::Merton {
                intensity: 0.0,
                mean: 0.1,
                std: 0.1,
            }],
        )
        .unwrap();
        let a = levy_ito_sample(&plain, 1.0, 0.1, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = levy_ito_sample(&jumpy, 1.0, 0.1, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
    }

    #[test]
    fn rejects_non_positive_step() {
        let m = CharacteristicModel::gbm(vec![0.2], DMatrix::identity(1, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(levy_ito_sample(&m, 1.0, 0.0, &mut rng).is_err());
    }
}
