//! Execution mode for batch and trial loops.

/// How index-parallel loops run. Results never depend on the mode: outputs
/// are collected in index order either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to sequential.
    #[default]
    Parallel,
}

impl Execution {
    /// True if this mode actually runs on the rayon pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` collected in index order.
pub(crate) fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt().to_bits();
        assert_eq!(
            map_indexed(Execution::Sequential, 1000, f),
            map_indexed(Execution::Parallel, 1000, f)
        );
    }
}
