//! Fixed-tree reductions.
//!
//! Every large sum goes through [`pairwise_sum`], whose association order
//! depends only on the slice length. Parallel kernels compute per-site
//! partial values into an ordered buffer and reduce that buffer here, so
//! results are bit-identical for any thread count.

use rayon::prelude::*;

const LEAF: usize = 16;

pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= LEAF {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Evaluates `f` at every index in parallel, keeping index order.
pub fn par_map<F>(len: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

/// `pairwise_sum` of `f(i)` for `i < len`, evaluated in parallel.
pub fn par_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    pairwise_sum(&par_map(len, f))
}

/// Max of `f(i)`; max is associative so any order gives the same bits.
pub fn par_max<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..len).into_par_iter().map(f).reduce(|| 0.0, f64::max)
}
