//! Serial or data-parallel evaluation of independent tasks.
//!
//! Tasks are indexed and every task derives its randomness from its index, so
//! results are identical whichever strategy runs them. Without the `parallel`
//! feature every strategy runs serially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    /// `threads: None` uses the global rayon pool.
    Parallel { threads: Option<usize> },
}

impl Execution {
    pub fn parallel() -> Self {
        Execution::Parallel { threads: None }
    }

    /// Reads a thread cap from an environment variable; unset or unparsable means serial.
    pub fn from_env(var: &str) -> Self {
        match std::env::var(var).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(0) | None => Execution::Serial,
            Some(1) => Execution::Serial,
            Some(n) => Execution::Parallel { threads: Some(n) },
        }
    }

    /// `f(0), f(1), …, f(n - 1)` in index order.
    pub fn map_indexed<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match *self {
            Execution::Serial => (0..n).map(f).collect(),
            Execution::Parallel { threads } => parallel_map(n, threads, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<R, F>(n: usize, threads: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;

    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        },
        None => (0..n).into_par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<R, F>(n: usize, _threads: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_keep_order() {
        let f = |i: usize| (i * i) as u64;
        let serial = Execution::Serial.map_indexed(100, f);
        let par = Execution::parallel().map_indexed(100, f);
        let capped = Execution::Parallel { threads: Some(3) }.map_indexed(100, f);
        assert_eq!(serial, par);
        assert_eq!(serial, capped);
        assert_eq!(serial[7], 49);
    }

    #[test]
    fn env_parsing() {
        assert_eq!(Execution::from_env("SYMVQC_TEST_UNSET_VARIABLE"), Execution::Serial);
    }
}
