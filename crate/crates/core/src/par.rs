//! Data-parallel helpers. With the `parallel` feature off every mode runs
//! sequentially, so callers never branch on the feature themselves.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

pub fn any<T, F>(exec: Exec, items: &[T], f: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().any(f),
        _ => items.iter().any(f),
    }
}

pub fn all<T, F>(exec: Exec, items: &[T], f: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    !any(exec, items, |x| !f(x))
}

/// `any` over an integer range without materializing it.
pub fn any_range<F>(exec: Exec, n: u64, f: F) -> bool
where
    F: Fn(u64) -> bool + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().any(f),
        _ => (0..n).any(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Exec::Parallel, &xs, |x| x * x);
        let b = map(Exec::Sequential, &xs, |x| x * x);
        assert_eq!(a, b);
        assert!(any_range(Exec::Parallel, 100, |x| x == 99));
        assert!(!any_range(Exec::Sequential, 100, |x| x == 100));
        assert!(all(Exec::Parallel, &xs, |x| *x < 1000));
    }
}
