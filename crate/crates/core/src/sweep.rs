//! Independent per-seed runs, executed in parallel when the `parallel`
//! feature is enabled. Results always come back in seed order, so
//! aggregation does not depend on scheduling.

/// Applies `f` to every seed on the calling thread.
pub fn map_seeds_seq<T, F>(seeds: &[u64], f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    seeds.iter().map(|&s| f(s)).collect()
}

/// Applies `f` to every seed on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_seeds_par<T, F>(seeds: &[u64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    seeds.par_iter().map(|&s| f(s)).collect()
}

/// Parallel when available, sequential otherwise.
pub fn map_seeds<T, F>(seeds: &[u64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_seeds_par(seeds, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seeds_seq(seeds, f)
    }
}

/// Seeds `base, base+1, …, base+n−1`.
pub fn seed_range(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| base.wrapping_add(i)).collect()
}
