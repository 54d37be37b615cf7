use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

pub(crate) const BLOCK: usize = 4096;

/// Sums `term(i)` for `i in 0..len`. Blocks of fixed size are summed in
/// parallel and then combined in index order, so the result does not depend
/// on the number of worker threads.
pub(crate) fn deterministic_sum<F>(len: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let blocks = len.div_ceil(BLOCK);
    let partial: Vec<Complex64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = CompensatedSum::default();
            for i in b * BLOCK..((b + 1) * BLOCK).min(len) {
                acc.add(term(i));
            }
            acc.value()
        })
        .collect();
    let mut acc = CompensatedSum::default();
    for p in partial {
        acc.add(p);
    }
    acc.value()
}

/// Like [`deterministic_sum`] for `k` sums at once: `term(i, acc)` adds the
/// contributions of index `i` into `acc[0..k]`.
pub(crate) fn deterministic_sums<F>(len: usize, k: usize, term: F) -> Vec<Complex64>
where
    F: Fn(usize, &mut [CompensatedSum]) + Sync,
{
    let blocks = len.div_ceil(BLOCK);
    let partial: Vec<Vec<Complex64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![CompensatedSum::default(); k];
            for i in b * BLOCK..((b + 1) * BLOCK).min(len) {
                term(i, &mut acc);
            }
            acc.iter().map(|a| a.value()).collect()
        })
        .collect();
    let mut acc = vec![CompensatedSum::default(); k];
    for p in partial {
        for (a, v) in acc.iter_mut().zip(p) {
            a.add(v);
        }
    }
    acc.iter().map(|a| a.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_result() {
        let f = |i: usize| Complex64::new((i as f64 * 0.37).sin() * 1e8, (i as f64).cos());
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| deterministic_sum(100_003, f));
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| deterministic_sum(100_003, f));
        assert_eq!(serial, parallel);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut acc = CompensatedSum::default();
        acc.add(Complex64::new(1e16, 0.0));
        for _ in 0..10 {
            acc.add(Complex64::new(1.0, 0.0));
        }
        acc.add(Complex64::new(-1e16, 0.0));
        assert_eq!(acc.value().re, 10.0);
    }
}
