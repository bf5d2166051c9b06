//! Compensated accumulation and the deterministic block reduction used by
//! every long sum in the crate.
//!
//! A range is cut into fixed-size blocks. Each block is summed sequentially
//! with Neumaier compensation, and the block partials are then combined in
//! ascending block order, again compensated. Because the block layout depends
//! only on the range and the block size, the result is bit-identical no matter
//! how many worker threads evaluate the blocks.

use std::ops::Range;

use rayon::prelude::*;

/// Default block length for [`block_sum`].
pub const DEFAULT_BLOCK: usize = 1 << 16;

/// Neumaier's improved Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Compensated sum of `f(i)` for `i` in `range`, evaluated in parallel over
/// blocks of `block` indices and reduced in ascending block order.
pub fn block_sum<F>(range: Range<usize>, block: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    assert!(block > 0, "block size must be positive");
    if range.is_empty() {
        return 0.0;
    }
    let len = range.end - range.start;
    let blocks = len.div_ceil(block);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = range.start + b * block;
            let hi = (lo + block).min(range.end);
            (lo..hi).map(&f).collect::<CompensatedSum>().value()
        })
        .collect();
    partials.into_iter().collect::<CompensatedSum>().value()
}

/// Single-threaded reference for [`block_sum`] with one compensated pass.
pub fn sequential_sum<F>(range: Range<usize>, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    range.map(f).collect::<CompensatedSum>().value()
}
