//! Sequential / data-parallel execution switch.
//!
//! With the `parallel` feature (default) `Execution::Parallel` fans work out
//! over rayon's pool. Without it every path runs sequentially and
//! `Execution::Parallel` is accepted but behaves like `Sequential`. Results
//! are identical either way: only independent items are distributed and every
//! reduction is order-insensitive.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Index of the largest key among `0..n`, ties broken towards the smaller
    /// index. NaN keys never win. Returns `None` when `n == 0` or every key is NaN.
    pub fn argmax<F>(self, n: usize, key: F) -> Option<usize>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        fn better(a: Option<(f64, usize)>, b: Option<(f64, usize)>) -> Option<(f64, usize)> {
            match (a, b) {
                (None, x) | (x, None) => x,
                (Some((sa, ia)), Some((sb, ib))) => {
                    if sa > sb || (sa == sb && ia < ib) {
                        Some((sa, ia))
                    } else {
                        Some((sb, ib))
                    }
                }
            }
        }
        let item = |i: usize| {
            let s = key(i);
            if s.is_nan() {
                None
            } else {
                Some((s, i))
            }
        };
        let best = match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(item).reduce(|| None, better),
            _ => (0..n).map(item).fold(None, better),
        };
        best.map(|(_, i)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_ties_go_to_smallest_index() {
        let keys = [1.0, 3.0, 2.0, 3.0, f64::NAN];
        for exec in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(exec.argmax(keys.len(), |i| keys[i]), Some(1));
            assert_eq!(exec.argmax(0, |_| 0.0), None);
            assert_eq!(exec.argmax(1, |_| f64::NAN), None);
        }
    }

    #[test]
    fn map_range_preserves_order() {
        let v = Execution::Parallel.map_range(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
