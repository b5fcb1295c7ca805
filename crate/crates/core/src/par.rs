//! Deterministic data-parallel helpers.
//!
//! Scatter-style reductions are split into fixed-size chunks whose partial
//! results are merged in chunk order, so sums are bitwise identical for any
//! worker count.

use rayon::prelude::*;

/// Number of items per partial accumulator. Independent of the thread count.
pub const SCATTER_CHUNK: usize = 512;

/// Folds `items` chunk by chunk in parallel and merges the partials in order.
pub fn chunked_reduce<I, A, F, M>(items: &[I], init: impl Fn() -> A + Sync, fold: F, merge: M) -> A
where
    I: Sync,
    A: Send,
    F: Fn(&mut A, usize, &I) + Sync,
    M: Fn(&mut A, A),
{
    if items.len() <= SCATTER_CHUNK {
        let mut acc = init();
        for (i, item) in items.iter().enumerate() {
            fold(&mut acc, i, item);
        }
        return acc;
    }
    let partials: Vec<A> = items
        .par_chunks(SCATTER_CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut acc = init();
            for (k, item) in chunk.iter().enumerate() {
                fold(&mut acc, c * SCATTER_CHUNK + k, item);
            }
            acc
        })
        .collect();
    let mut iter = partials.into_iter();
    let mut acc = iter.next().unwrap_or_else(&init);
    for p in iter {
        merge(&mut acc, p);
    }
    acc
}

/// Sequential sum in index order (reductions feeding solvers stay reproducible).
pub fn ordered_dot<T: crate::Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}
