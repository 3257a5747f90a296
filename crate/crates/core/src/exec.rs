//! Execution policy for the data-parallel loops.
//!
//! With the `parallel` feature (on by default) the hot loops run on the rayon
//! global pool. Without it, or when [`Exec::Sequential`] is requested, the same
//! closures run on the calling thread. Results are identical in both cases:
//! every work item is independent and outputs are collected in order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `0..len` and collects the results in index order.
    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Calls `f(index, input_chunk, output_chunk)` for every pair of
    /// `chunk`-sized windows of `input` and `output`.
    pub fn zip_chunks<F>(self, input: &[u8], output: &mut [u8], chunk: usize, f: F)
    where
        F: Fn(usize, &[u8], &mut [u8]) + Sync + Send,
    {
        debug_assert_eq!(input.len(), output.len());
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            input
                .par_chunks(chunk)
                .zip(output.par_chunks_mut(chunk))
                .enumerate()
                .for_each(|(i, (src, dst))| f(i, src, dst));
            return;
        }
        input
            .chunks(chunk)
            .zip(output.chunks_mut(chunk))
            .enumerate()
            .for_each(|(i, (src, dst))| f(i, src, dst));
    }

    /// Sums `f` over `0..len`.
    pub fn sum_range<F>(self, len: usize, f: F) -> u64
    where
        F: Fn(usize) -> u64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..len).into_par_iter().map(f).sum();
        }
        (0..len).map(f).sum()
    }
}
