//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the parallel strategy runs on
//! the rayon global pool; without it both strategies run sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many output entries a convolution is not worth splitting.
pub const PAR_MIN_DIM: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Parallelism {
    /// Parallel when the feature is enabled and the job has at least
    /// `threshold` independent pieces.
    pub fn for_size(n: usize, threshold: usize) -> Self {
        if cfg!(feature = "parallel") && n >= threshold {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }

    pub fn is_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// `(0..n).map(f).collect()` under the chosen strategy.
pub fn map_range<T, F>(n: usize, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// `items.iter().map(f).collect()` under the chosen strategy.
pub fn map_slice<T, U, F>(items: &[T], mode: Parallelism, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}
