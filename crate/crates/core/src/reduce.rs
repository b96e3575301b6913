//! Deterministic parallel reductions: fixed-size chunks, partial sums in
//! chunk order, then a pairwise tree. Results depend on the chunk size only.

use std::ops::{Add, Range};

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 1 << 12;

pub(crate) fn pairwise<T: Copy + Add<Output = T> + Default>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::default(),
        1 => xs[0],
        len => {
            let (a, b) = xs.split_at(len / 2);
            pairwise(a) + pairwise(b)
        }
    }
}

/// Sums `f` over `0..len` split into chunks of [`CHUNK`].
pub(crate) fn chunked_sum<T, F>(len: usize, f: F) -> T
where
    T: Copy + Add<Output = T> + Default + Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let n_chunks = len.div_ceil(CHUNK);
    let partials: Vec<T> = (0..n_chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(len)))
        .collect();
    pairwise(&partials)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_serial_for_integers() {
        let total: u64 = chunked_sum(100_003, |r| r.map(|i| i as u64).sum());
        assert_eq!(total, 100_003 * 100_002 / 2);
        assert_eq!(pairwise::<f64>(&[]), 0.0);
    }
}
