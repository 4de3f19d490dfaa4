// Data-parallel helpers. With the `std` feature work is spread over rayon;
// without it everything runs sequentially with the same chunking, so the
// ordered reduction gives identical bits either way.

use alloc::vec::Vec;

/// Points per work unit. Fixed so ordered reductions do not depend on the
/// thread count.
pub(crate) const CHUNK: usize = 128;

#[cfg(feature = "std")]
use rayon::prelude::*;

/// Applies `f` to each row of width `d`, preserving order.
pub(crate) fn map_chunks<S, T, F>(features: &[f64], d: usize, f: F) -> Vec<T>
where
    S: Default,
    T: Send,
    F: Fn(&[f64], &mut S) -> T + Sync,
{
    let run = |chunk: &[f64]| {
        let mut st = S::default();
        chunk.chunks_exact(d).map(|p| f(p, &mut st)).collect::<Vec<T>>()
    };
    #[cfg(feature = "std")]
    let parts: Vec<Vec<T>> = features.par_chunks(d * CHUNK).map(run).collect();
    #[cfg(not(feature = "std"))]
    let parts: Vec<Vec<T>> = features.chunks(d * CHUNK).map(run).collect();
    parts.into_iter().flatten().collect()
}

/// Folds `0..n` into an accumulator.
///
/// `ordered` folds fixed chunks independently and merges the partial results
/// in chunk order, which makes the floating-point result reproducible. The
/// unordered variant lets rayon pick the reduction tree.
pub(crate) fn fold_range<A, I, F, M>(n: usize, ordered: bool, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, usize) + Sync + Send,
    M: Fn(&mut A, A) + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let run = |c: usize| {
        let mut acc = init();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            fold(&mut acc, i);
        }
        acc
    };
    #[cfg(feature = "std")]
    {
        if !ordered {
            return (0..chunks)
                .into_par_iter()
                .map(run)
                .reduce_with(|mut a, b| {
                    merge(&mut a, b);
                    a
                })
                .unwrap_or_else(&init);
        }
        let parts: Vec<A> = (0..chunks).into_par_iter().map(run).collect();
        merge_in_order(parts, init, merge)
    }
    #[cfg(not(feature = "std"))]
    {
        let _ = ordered;
        let parts: Vec<A> = (0..chunks).map(run).collect();
        merge_in_order(parts, init, merge)
    }
}

fn merge_in_order<A, I: Fn() -> A, M: Fn(&mut A, A)>(parts: Vec<A>, init: I, merge: M) -> A {
    let mut it = parts.into_iter();
    match it.next() {
        Some(mut first) => {
            for p in it {
                merge(&mut first, p);
            }
            first
        }
        None => init(),
    }
}
