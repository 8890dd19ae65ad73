//! Thin data-parallel helpers.
//!
//! With the `parallel` feature these dispatch to rayon; without it they run the
//! same closures sequentially. Every helper preserves output order, so callers
//! get identical results either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..len`, returning results in index order.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// Maps `f` over a slice, returning results in slice order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Fills `out[i] = f(i, scratch)` in chunks, giving each worker its own scratch buffer.
pub fn fill_with_scratch<T, B, I, F>(out: &mut [T], init: I, f: F)
where
    T: Send,
    B: Send,
    I: Fn() -> B + Sync + Send,
    F: Fn(usize, &mut B) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        const CHUNK: usize = 256;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let mut scratch = init();
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = f(c * CHUNK + j, &mut scratch);
            }
        });
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i, &mut scratch);
        }
    }
}

/// Number of worker threads the current pool would use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
