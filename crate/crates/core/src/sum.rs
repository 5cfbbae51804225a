//! Compensated summation and a block-ordered prefix-sum reducer.
//!
//! Sums are folded in a fixed order: terms inside a block left to right,
//! blocks in index order. The block grid is aligned at n = 1, so a run with
//! a smaller cutoff walks exactly the same sequence of additions and the
//! results at shared checkpoints agree bit for bit.

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
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

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

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

/// Compensated sum of complex terms (componentwise).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Block length of the reduction grid.
pub const BLOCK: u64 = 1 << 16;

/// Returns Σ_{n ≤ c} term(n) for each checkpoint c (sorted, strictly increasing, ≥ 1).
///
/// Blocks are evaluated in parallel; the fold over blocks is sequential.
pub fn prefix_sums<F>(checkpoints: &[u64], term: F) -> Vec<Complex64>
where
    F: Fn(u64) -> Complex64 + Sync,
{
    let Some(&x) = checkpoints.last() else {
        return Vec::new();
    };
    debug_assert!(checkpoints.windows(2).all(|w| w[0] < w[1]));
    let nblocks = x.div_ceil(BLOCK);
    let blocks: Vec<(ComplexSum, Vec<ComplexSum>)> = (0..nblocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK + 1;
            let hi = ((b + 1) * BLOCK).min(x);
            let inside: Vec<u64> = checkpoints
                .iter()
                .copied()
                .filter(|&c| c >= lo && c <= hi)
                .collect();
            let mut acc = ComplexSum::new();
            let mut partial = Vec::with_capacity(inside.len());
            let mut next = inside.iter().peekable();
            for n in lo..=hi {
                acc.add(term(n));
                while next.peek().is_some_and(|&&c| c == n) {
                    partial.push(acc);
                    next.next();
                }
            }
            (acc, partial)
        })
        .collect();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = ComplexSum::new();
    for (total, partial) in &blocks {
        for p in partial {
            let mut v = acc;
            v.merge(p);
            out.push(v.value());
        }
        acc.merge(total);
    }
    out
}
