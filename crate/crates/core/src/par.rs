//! Execution strategy for the data-parallel scans.
//!
//! Every grid sweep and pair scan in the crate goes through these helpers.
//! With the `parallel` feature enabled they fan out over rayon's pool;
//! without it (or with [`Execution::Sequential`]) they run on the calling
//! thread. Reductions only use `max`/`min` with index tie-breaking, so both
//! strategies return bit-identical results.

/// How a scan is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential execution when the `parallel` feature is off.
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

/// Evaluates `f` on `0..n` and collects the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps over a slice, preserving order.
pub fn map_slice<A, T, F>(exec: Execution, items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// A value together with the index that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub value: f64,
    pub index: usize,
    pub payload: T,
}

fn pick_max<T>(a: Option<Extremum<T>>, b: Option<Extremum<T>>) -> Option<Extremum<T>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.value > a.value || (b.value == a.value && b.index < a.index) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

fn pick_min<T>(a: Option<Extremum<T>>, b: Option<Extremum<T>>) -> Option<Extremum<T>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.value < a.value || (b.value == a.value && b.index < a.index) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

/// Maximum of `f(i)` over `0..n`; `None` entries are skipped. Ties resolve
/// to the lowest index.
pub fn max_by_index<T, F>(exec: Execution, n: usize, f: F) -> Option<Extremum<T>>
where
    T: Send,
    F: Fn(usize) -> Option<(f64, T)> + Sync + Send,
{
    let lift = |i: usize| f(i).map(|(value, payload)| Extremum { value, index: i, payload });
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(lift).reduce(|| None, pick_max)
        }
        _ => (0..n).map(lift).fold(None, pick_max),
    }
}

/// Minimum of `f(i)` over `0..n`, ties to the lowest index.
pub fn min_by_index<T, F>(exec: Execution, n: usize, f: F) -> Option<Extremum<T>>
where
    T: Send,
    F: Fn(usize) -> Option<(f64, T)> + Sync + Send,
{
    let lift = |i: usize| f(i).map(|(value, payload)| Extremum { value, index: i, payload });
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(lift).reduce(|| None, pick_min)
        }
        _ => (0..n).map(lift).fold(None, pick_min),
    }
}

/// Whether `f(i)` holds for some `i` in `0..n`. May stop early.
pub fn any_index<F>(exec: Execution, n: usize, f: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().any(f)
        }
        _ => (0..n).any(f),
    }
}
