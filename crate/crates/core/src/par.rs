//! Index-parallel helpers that fall back to plain loops without `parallel`.
//! Reductions must be associative and commutative on the values produced so
//! results do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn try_reduce<T, E, R, F>(len: usize, identity: T, reduce: R, f: F) -> Result<T, E>
where
    T: Send + Clone + Sync,
    E: Send,
    R: Fn(T, T) -> T + Send + Sync,
    F: Fn(usize) -> Result<T, E> + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .map(f)
            .try_reduce(|| identity.clone(), |a, b| Ok(reduce(a, b)))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).try_fold(identity, |a, b| Ok(reduce(a, b?)))
    }
}

pub(crate) fn try_collect<T, E, F>(len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}
