//! Data-parallel execution of independent work items with deterministic
//! merge order.
//!
//! Every parallel loop in this crate maps a fixed, index-addressed set of
//! items and collects results in index order, so floating-point reductions
//! are identical for any worker count. With the `parallel` feature disabled
//! everything runs on the calling thread.

/// Execution strategy for data-parallel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Use the rayon pool when the `parallel` feature is enabled.
    #[default]
    Auto,
    /// Force single-threaded execution.
    Sequential,
}

/// Maps `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    match exec {
        Exec::Sequential => (0..n).map(f).collect(),
        Exec::Auto => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// Splits `len` items into fixed blocks of `block` and folds each with `f`,
/// then reduces the per-block results sequentially in block order. The block
/// layout is independent of the worker count, so the reduction order (and
/// thus the floating-point result) is bit-stable.
pub fn block_reduce<T, F, G>(exec: Exec, len: usize, block: usize, f: F, mut merge: G, init: T) -> T
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
    G: FnMut(T, T) -> T,
{
    let blocks = len.div_ceil(block.max(1));
    let partials = map_indexed(exec, blocks, |b| {
        let start = b * block;
        f(start..(start + block).min(len))
    });
    partials.into_iter().fold(init, |acc, p| merge(acc, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_reduce_matches_sequential_bitwise() {
        let data: Vec<f64> = (0..100_000).map(|i| ((i * 2654435761usize) as f64).sin()).collect();
        let sum = |r: std::ops::Range<usize>| data[r].iter().sum::<f64>();
        let a = block_reduce(Exec::Auto, data.len(), 4096, sum, |x, y| x + y, 0.0);
        let b = block_reduce(Exec::Sequential, data.len(), 4096, sum, |x, y| x + y, 0.0);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
