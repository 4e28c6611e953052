//! Compensated summation and an order-fixed parallel reduction.

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of complex values, real and imaginary parts tracked separately.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Rows per block in [`deterministic_sum`].
pub const BLOCK_ROWS: usize = 32;

/// Sums `row(i)` for `i in 0..rows` in parallel.
///
/// Rows are grouped into fixed blocks, each block is summed with a
/// compensated accumulator and the block totals are combined in index
/// order. The grouping does not depend on the thread count, so the result
/// is bitwise identical for any pool size.
pub fn deterministic_sum<F>(rows: usize, row: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let blocks = rows.div_ceil(BLOCK_ROWS);
    let partial: Vec<Complex64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = ComplexNeumaier::new();
            let end = ((b + 1) * BLOCK_ROWS).min(rows);
            for i in b * BLOCK_ROWS..end {
                acc.add(row(i));
            }
            acc.value()
        })
        .collect();
    let mut total = ComplexNeumaier::new();
    for p in partial {
        total.add(p);
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let acc: Neumaier = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn deterministic_sum_matches_sequential() {
        let rows = 1000;
        let f = |i: usize| Complex64::new(1.0 / (i as f64 + 1.0), (i as f64).sin());
        let seq: Complex64 = (0..rows).map(f).sum();
        let par = deterministic_sum(rows, f);
        assert!((seq - par).norm() < 1e-12);
    }

    #[test]
    fn deterministic_sum_is_thread_count_independent() {
        let f = |i: usize| Complex64::new((i as f64 * 0.37).cos() * 1e-3, 1.0 / (1.0 + i as f64));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| deterministic_sum(5000, f))
        };
        let a = run(1);
        let b = run(7);
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(deterministic_sum(0, |_| Complex64::new(1.0, 1.0)), Complex64::new(0.0, 0.0));
    }
}
