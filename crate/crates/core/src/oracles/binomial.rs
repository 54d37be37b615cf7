/// Cox–Ross–Rubinstein lattice values and the lattice exercise boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeResult {
    pub american: f64,
    pub european: f64,
    /// `(τ, S*)` pairs: time to maturity and the highest node at which
    /// exercise is optimal, ordered by increasing τ. Steps whose nodes never
    /// reach the exercise region are omitted.
    pub boundary: Vec<(f64, f64)>,
}

/// CRR lattice for the put, with backward induction and an exercise check
/// at every node.
pub fn binomial_american_put(
    s0: f64,
    k: f64,
    r: f64,
    sigma: f64,
    t: f64,
    steps: usize,
) -> LatticeResult {
    assert!(steps > 0, "lattice needs at least one step");
    let dt = t / steps as f64;
    let u = (sigma * dt.sqrt()).exp();
    let d = 1.0 / u;
    let disc = (-r * dt).exp();
    let p = ((r * dt).exp() - d) / (u - d);
    let q = 1.0 - p;

    let node = |i: usize, j: usize| s0 * (sigma * dt.sqrt() * (2.0 * j as f64 - i as f64)).exp();
    let mut am: Vec<f64> = (0..=steps).map(|j| (k - node(steps, j)).max(0.0)).collect();
    let mut eu = am.clone();
    let mut boundary = Vec::new();
    // at expiry the boundary is K itself
    boundary.push((0.0, k));

    for i in (0..steps).rev() {
        let mut s = node(i, 0);
        let mut highest: Option<f64> = None;
        for j in 0..=i {
            let cont = disc * (p * am[j + 1] + q * am[j]);
            let ex = k - s;
            if ex > 0.0 && ex >= cont {
                am[j] = ex;
                highest = Some(s);
            } else {
                am[j] = cont;
            }
            eu[j] = disc * (p * eu[j + 1] + q * eu[j]);
            s *= u * u;
        }
        if let Some(b) = highest {
            boundary.push(((steps - i) as f64 * dt, b));
        }
    }
    LatticeResult {
        american: am[0],
        european: eu[0],
        boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::black_scholes_put;

    #[test]
    fn zero_rate_has_no_premium() {
        let l = binomial_american_put(100.0, 100.0, 0.0, 0.2, 1.0, 2000);
        assert!(l.american >= l.european - 1e-12);
        assert!((l.american - l.european).abs() < 1e-10);
    }

    #[test]
    fn converges_under_doubling() {
        let a = binomial_american_put(100.0, 100.0, 0.05, 0.2, 1.0, 5000).american;
        let b = binomial_american_put(100.0, 100.0, 0.05, 0.2, 1.0, 10_000).american;
        assert!((a - b).abs() < 1e-3);
    }

    #[test]
    fn deep_in_the_money_is_intrinsic() {
        let l = binomial_american_put(1.0, 100.0, 0.05, 0.2, 1.0, 1000);
        assert!((l.american - 99.0).abs() < 1e-9);
    }

    #[test]
    fn european_lattice_tracks_closed_form() {
        let l = binomial_american_put(100.0, 100.0, 0.05, 0.2, 1.0, 4000);
        assert!((l.european - black_scholes_put(100.0, 100.0, 0.05, 0.2, 1.0)).abs() < 2e-3);
    }

    #[test]
    fn boundary_is_below_strike_and_decreasing() {
        let l = binomial_american_put(100.0, 100.0, 0.05, 0.2, 1.0, 2000);
        let (_, b_end) = *l.boundary.last().unwrap();
        assert!(b_end < 100.0 && b_end > 70.0);
        // staircase: allow one lattice spacing between neighbouring steps
        let spacing = (2.0 * 0.2 * (1.0f64 / 2000.0).sqrt()).exp();
        for w in l.boundary.windows(2) {
            assert!(w[1].1 <= w[0].1 * spacing + 1e-9);
        }
    }
}
