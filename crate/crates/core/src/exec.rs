//! Scheduling of independent work items (optimizer restarts, Monte-Carlo
//! samples). Every item derives its randomness from its own index, so the
//! schedule never changes a result.

/// How independent work items are executed.
///
/// `Parallel` uses the rayon thread pool when the `parallel` feature is
/// enabled and silently degrades to `Sequential` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this schedule actually runs on more than one thread in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
pub(crate) fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Sums `f(i)` over chunks of indices; the chunking is fixed so floating-point
/// sums are identical for every schedule.
pub(crate) fn chunked_sum<F>(n: usize, chunk: usize, exec: Execution, f: F) -> Vec<f64>
where
    F: Fn(std::ops::Range<usize>) -> Vec<f64> + Sync + Send,
{
    let chunks = n.div_ceil(chunk);
    let partials = map_indexed(chunks, exec, |c| f(c * chunk..((c + 1) * chunk).min(n)));
    let width = partials.first().map_or(0, Vec::len);
    let mut total = vec![0.0; width];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}
