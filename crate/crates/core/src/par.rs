//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature enabled (the default) these dispatch to rayon
//! when the caller asks for it; otherwise they run sequentially. Outputs are
//! always collected in input order, so results never depend on scheduling.

/// Maps `f` over `items`, in parallel when `parallel` is set and the feature
/// is compiled in.
#[allow(unused_variables)]
pub fn map<T, U, F>(items: &[T], parallel: bool, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if parallel && items.len() > 1 {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Returns true when `pred` holds for every item.
#[allow(unused_variables)]
pub fn all<T, F>(items: &[T], parallel: bool, pred: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if parallel && items.len() > 1 {
            return items.par_iter().all(pred);
        }
    }
    items.iter().all(pred)
}

/// Whether parallel execution is compiled in.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}
