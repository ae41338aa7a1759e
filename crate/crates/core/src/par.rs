//! Data-parallel map helpers.
//!
//! [`map_collect`] fans out over rayon when the `parallel` feature is
//! enabled and falls back to a plain iterator otherwise; output order always
//! matches input order, so callers aggregating the results are oblivious to
//! the mode. [`map_collect_seq`] is the always-sequential reference path
//! used by the benchmark suite.

#[cfg(feature = "parallel")]
pub fn map_collect<I, O, F>(inputs: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    inputs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<I, O, F>(inputs: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    inputs.iter().map(f).collect()
}

/// Sequential twin of [`map_collect`], compiled in every configuration.
pub fn map_collect_seq<I, O, F>(inputs: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    inputs.iter().map(f).collect()
}
