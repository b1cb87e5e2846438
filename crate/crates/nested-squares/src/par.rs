//! Thin switch between rayon and plain iterators. Everything data-parallel in the
//! crate goes through here so the `parallel` feature can be turned off wholesale.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over indices `0..n`, collecting in order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Map over a slice, collecting in order.
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

/// Run `f` on every chunk of `data` of length `chunk`.
pub fn for_chunks<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(&mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if data.len() / chunk >= 4 && data.len() >= 1 << 12 {
            data.par_chunks_mut(chunk).for_each(f);
            return;
        }
    }
    data.chunks_mut(chunk).for_each(f);
}

/// Run `f` on paired chunks of two equal-length buffers.
pub fn for_chunks2<T, F>(a: &mut [T], b: &[T], chunk: usize, f: F)
where
    T: Send + Sync,
    F: Fn(&mut [T], &[T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if a.len() / chunk >= 4 && a.len() >= 1 << 12 {
            a.par_chunks_mut(chunk)
                .zip(b.par_chunks(chunk))
                .for_each(|(x, y)| f(x, y));
            return;
        }
    }
    a.chunks_mut(chunk)
        .zip(b.chunks(chunk))
        .for_each(|(x, y)| f(x, y));
}

/// Block size for reductions. Blocks are fixed and summed in order, so the
/// result does not depend on how work was stolen.
const SUM_BLOCK: usize = 1 << 10;

/// Sum of `f(i)` over `0..n` for real values.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= 1 << 12 {
            let parts = map_range(n.div_ceil(SUM_BLOCK), |b| {
                (b * SUM_BLOCK..((b + 1) * SUM_BLOCK).min(n)).map(&f).sum::<f64>()
            });
            return parts.into_iter().sum();
        }
    }
    blocked(n, |lo, hi| (lo..hi).map(&f).sum::<f64>()).into_iter().sum()
}

/// Sum of complex `f(i)` over `0..n`.
pub fn csum_range<F>(n: usize, f: F) -> crate::C64
where
    F: Fn(usize) -> crate::C64 + Sync + Send,
{
    let zero = crate::C64::new(0.0, 0.0);
    #[cfg(feature = "parallel")]
    {
        if n >= 1 << 12 {
            let parts = map_range(n.div_ceil(SUM_BLOCK), |b| {
                (b * SUM_BLOCK..((b + 1) * SUM_BLOCK).min(n)).map(&f).fold(zero, |a, b| a + b)
            });
            return parts.into_iter().fold(zero, |a, b| a + b);
        }
    }
    blocked(n, |lo, hi| (lo..hi).map(&f).fold(zero, |a, b| a + b))
        .into_iter()
        .fold(zero, |a, b| a + b)
}

/// Same blocking as the parallel path so both builds give identical sums.
fn blocked<T, G: Fn(usize, usize) -> T>(n: usize, g: G) -> Vec<T> {
    (0..n.div_ceil(SUM_BLOCK))
        .map(|b| g(b * SUM_BLOCK, ((b + 1) * SUM_BLOCK).min(n)))
        .collect()
}

/// Limit the global pool. Only the first call has an effect.
pub fn init_workers(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
    }
}
