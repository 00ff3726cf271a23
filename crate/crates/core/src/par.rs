//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the work runs on the current rayon pool
//! unless the caller asks for sequential execution.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<T, R, F>(parallel: bool, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// First index (in order) for which `f` yields `Some`, with its value.
pub fn find_first<T, R, F>(parallel: bool, items: &[T], f: F) -> Option<(usize, R)>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().enumerate().filter_map(|(i, t)| f(t).map(|r| (i, r))).find_first(|_| true);
    }
    let _ = parallel;
    items.iter().enumerate().find_map(|(i, t)| f(t).map(|r| (i, r)))
}

/// Items worth handing out at once: the pool width, or 1 when sequential.
pub fn width(parallel: bool) -> usize {
    #[cfg(feature = "parallel")]
    if parallel {
        return rayon::current_num_threads();
    }
    let _ = parallel;
    1
}

/// Runs `f` inside a pool with `jobs` threads (`None` keeps the global pool).
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs.filter(|&n| n > 1) {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}

#[cfg(test)]
mod tests {
    #[test]
    fn sequential_and_parallel_agree() {
        let items: Vec<u32> = (0..100).collect();
        assert_eq!(super::map(true, &items, |x| x * 2), super::map(false, &items, |x| x * 2));
        let pick = |x: &u32| (x % 7 == 3).then_some(*x);
        assert_eq!(super::find_first(true, &items, pick), Some((3, 3)));
        assert_eq!(super::find_first(false, &items, pick), Some((3, 3)));
    }
}
