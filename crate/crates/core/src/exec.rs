//! Execution mode for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`map_range`], which collects
//! results in index order. Reductions are then performed sequentially over the
//! collected vector, so the parallel and sequential paths are bit-identical.

/// How the data-parallel loops are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to the sequential path.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps `f` over `0..n` and returns the results in index order.
pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Splits `0..n` into `chunks` contiguous ranges of near-equal length.
pub(crate) fn chunk_bounds(n: usize, chunks: usize) -> Vec<(usize, usize)> {
    let chunks = chunks.max(1).min(n.max(1));
    let base = n / chunks;
    let extra = n % chunks;
    let mut out = Vec::with_capacity(chunks);
    let mut start = 0;
    for c in 0..chunks {
        let len = base + usize::from(c < extra);
        out.push((start, start + len));
        start += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let a = map_range(Execution::Sequential, 100, |i| (i as f64).sqrt());
        let b = map_range(Execution::Parallel, 100, |i| (i as f64).sqrt());
        assert_eq!(a, b);
    }

    #[test]
    fn chunks_cover_range() {
        let c = chunk_bounds(10, 3);
        assert_eq!(c, vec![(0, 4), (4, 7), (7, 10)]);
        assert_eq!(chunk_bounds(0, 4), vec![(0, 0)]);
    }
}
