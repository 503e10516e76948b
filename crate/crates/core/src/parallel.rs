//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature these dispatch to rayon; without it they are
//! plain iterator loops. Every helper preserves input order in its result, so
//! callers get identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether this build runs data-parallel loops on rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// The result for the first item (in input order) on which `f` returns `Some`.
#[cfg(feature = "parallel")]
pub fn find_map_first<T, U, F>(items: &[T], f: F) -> Option<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
{
    items.par_iter().find_map_first(f)
}

#[cfg(not(feature = "parallel"))]
pub fn find_map_first<T, U, F>(items: &[T], f: F) -> Option<U>
where
    F: Fn(&T) -> Option<U>,
{
    items.iter().find_map(f)
}

/// Sums per-item count vectors of length `len`.
#[cfg(feature = "parallel")]
pub fn tally<T, F>(items: &[T], len: usize, f: F) -> Vec<u32>
where
    T: Sync,
    F: Fn(&T, &mut Vec<u32>) + Sync + Send,
{
    items
        .par_iter()
        .fold(
            || vec![0u32; len],
            |mut acc, item| {
                f(item, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0u32; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

#[cfg(not(feature = "parallel"))]
pub fn tally<T, F>(items: &[T], len: usize, f: F) -> Vec<u32>
where
    F: Fn(&T, &mut Vec<u32>),
{
    let mut acc = vec![0u32; len];
    for item in items {
        f(item, &mut acc);
    }
    acc
}
