//! Shared inputs for the kernel benchmarks.

use fracnorm::corpus::{reference_corpus, SampledFunction};
use fracnorm::{build_filter_bank, FilterBank, Grid};

/// A corpus function sampled on a 1-D grid of `n` points over box 16.
pub fn sample(label: &str, n: usize) -> (SampledFunction, FilterBank) {
    let mut c = reference_corpus();
    c.grid = Grid::new(1, n, 16.0).expect("valid grid");
    let f = c.get(label).expect("label in corpus");
    let bank = build_filter_bank(c.grid).expect("filter bank");
    (f, bank)
}
