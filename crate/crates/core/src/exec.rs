//! Execution strategy for the row-parallel kernels.
//!
//! Every kernel that walks rows independently takes an [`Exec`]. Output is
//! identical under both strategies: each row is computed by the same code in
//! the same accumulation order, only the scheduling differs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How row-independent work is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exec {
    /// Plain loop on the calling thread.
    Sequential,
    /// Rows distributed over the current rayon pool.
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// All strategies compiled into this build.
    pub fn available() -> &'static [Exec] {
        #[cfg(feature = "parallel")]
        {
            &[Exec::Sequential, Exec::Parallel]
        }
        #[cfg(not(feature = "parallel"))]
        {
            &[Exec::Sequential]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Exec::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Exec::Parallel => "parallel",
        }
    }

    /// Maps `0..n` through `f`, giving each worker its own scratch state from
    /// `init`. Results come back in index order.
    pub(crate) fn map_indexed<S, T, I, F>(self, n: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => {
                let mut scratch = init();
                (0..n).map(|i| f(&mut scratch, i)).collect()
            }
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map_init(init, f).collect(),
        }
    }

    /// Applies `f` to every slice in place.
    pub(crate) fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter_mut().for_each(f),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter_mut().for_each(f),
        }
    }
}
