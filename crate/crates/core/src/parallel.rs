//! Index-ordered map used by every Monte Carlo loop.
//!
//! Results are always returned in index order and reduced sequentially by
//! the caller, so parallel and sequential execution are bit-identical.

/// How a batch of independent samples is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon work-stealing when the `parallel` feature is enabled.
    #[default]
    Parallel,
    Sequential,
}

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
