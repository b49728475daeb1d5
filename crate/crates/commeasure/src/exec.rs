//! Execution helpers for the data-parallel inner loops.
//!
//! With the `parallel` feature (default) the indexed variants fan out
//! over rayon; without it they run sequentially. Results are identical
//! either way: maps preserve index order, and reductions use only
//! commutative, associative combiners with a deterministic tie-break,
//! so nothing observable depends on scheduling. The `_seq` variants are
//! always sequential and exist as the baseline the bench suite compares
//! against.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every index in `0..n`, returning results in index
/// order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Applies `f` to every index in `0..n`, returning results in index
/// order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    map_indexed_seq(n, f)
}

/// Sequential baseline for [`map_indexed`].
pub fn map_indexed_seq<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Evaluates `f` over `0..n` and keeps the largest value; ties prefer
/// the smaller key, which makes the result independent of evaluation
/// order. Values must be non-NaN. Returns `None` for `n == 0`.
#[cfg(feature = "parallel")]
pub fn max_indexed<K: Ord + Send>(
    n: usize,
    f: impl Fn(usize) -> (f64, K) + Sync + Send,
) -> Option<(f64, K)> {
    (0..n).into_par_iter().map(f).reduce_with(pick_max)
}

/// Evaluates `f` over `0..n` and keeps the largest value; ties prefer
/// the smaller key, which makes the result independent of evaluation
/// order. Values must be non-NaN. Returns `None` for `n == 0`.
#[cfg(not(feature = "parallel"))]
pub fn max_indexed<K: Ord + Send>(
    n: usize,
    f: impl Fn(usize) -> (f64, K) + Sync + Send,
) -> Option<(f64, K)> {
    max_indexed_seq(n, f)
}

/// Sequential baseline for [`max_indexed`].
pub fn max_indexed_seq<K: Ord>(
    n: usize,
    f: impl Fn(usize) -> (f64, K),
) -> Option<(f64, K)> {
    (0..n).map(f).fold(None, |acc, item| {
        Some(match acc {
            None => item,
            Some(best) => pick_max(best, item),
        })
    })
}

fn pick_max<K: Ord>(a: (f64, K), b: (f64, K)) -> (f64, K) {
    if a.0 > b.0 {
        a
    } else if b.0 > a.0 {
        b
    } else if a.1 <= b.1 {
        a
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_index_order() {
        let out = map_indexed(100, |i| i * i);
        assert_eq!(out, map_indexed_seq(100, |i| i * i));
        assert_eq!(out[7], 49);
    }

    #[test]
    fn max_matches_sequential_and_breaks_ties_low() {
        let eval = |i: usize| ((i % 10) as f64, i);
        let par = max_indexed(1000, eval).unwrap();
        let seq = max_indexed_seq(1000, eval).unwrap();
        assert_eq!(par, seq);
        // Largest value 9.0 first occurs at index 9.
        assert_eq!(par, (9.0, 9));
        assert!(max_indexed(0, eval).is_none());
    }
}
