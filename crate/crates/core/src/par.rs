//! Index-parallel map. Results are collected in index order either way.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Applies `f` to every `width`-sized row of `rows` (in parallel when enabled).
#[cfg(feature = "parallel")]
pub(crate) fn for_each_row<T, F>(rows: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    use rayon::prelude::*;
    if width == 0 {
        return;
    }
    rows.par_chunks_mut(width).enumerate().for_each(|(i, r)| f(i, r));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_row<T, F>(rows: &mut [T], width: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    if width == 0 {
        return;
    }
    rows.chunks_mut(width).enumerate().for_each(|(i, r)| f(i, r));
}
