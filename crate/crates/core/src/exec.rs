//! Execution mode for the enumeration sweeps.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] spreads work over
//! the rayon pool. Without it every mode runs sequentially. Results never
//! depend on the mode: searches return the lowest matching index.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this mode actually runs on the rayon pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    pub fn any<F>(self, range: Range<u64>, pred: F) -> bool
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().any(pred);
        }
        range.into_iter().any(pred)
    }

    pub fn all<F>(self, range: Range<u64>, pred: F) -> bool
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        !self.any(range, |i| !pred(i))
    }

    /// Lowest index in `range` satisfying `pred`.
    pub fn find_first<F>(self, range: Range<u64>, pred: F) -> Option<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().find_first(|&i| pred(i));
        }
        range.into_iter().find(|&i| pred(i))
    }

    /// First `Some` produced over `range`, in index order.
    pub fn find_map_first<T, F>(self, range: Range<u64>, f: F) -> Option<T>
    where
        T: Send,
        F: Fn(u64) -> Option<T> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().find_map_first(f);
        }
        range.into_iter().find_map(f)
    }

    /// Indices in `range` satisfying `pred`, ascending.
    pub fn collect_where<F>(self, range: Range<u64>, pred: F) -> Vec<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return range.into_par_iter().filter(|&i| pred(i)).collect();
        }
        range.into_iter().filter(|&i| pred(i)).collect()
    }

    /// Order-preserving map over a slice.
    pub fn map<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}
