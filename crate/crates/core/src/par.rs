//! Data-parallel map over independent work items (time points, blocks,
//! parameter sets).
//!
//! With the `parallel` feature (default) `Execution::Parallel` dispatches to
//! rayon; without it every call runs sequentially. Output order always
//! matches input order, so results are identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub fn map<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Fallible variant; the first error in input order wins.
pub fn try_map<T, R, E, F>(exec: Execution, items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(exec, items, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_preserve_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Execution::Sequential, &xs, |x| x * x);
        let b = map(Execution::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a[10], 100);
    }

    #[test]
    fn try_map_reports_first_error() {
        let xs: Vec<i32> = vec![1, -2, 3, -4];
        let r: Result<Vec<i32>, i32> =
            try_map(Execution::Parallel, &xs, |&x| if x < 0 { Err(x) } else { Ok(x) });
        assert_eq!(r, Err(-2));
    }
}
