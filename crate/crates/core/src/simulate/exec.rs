//! Replication scheduling and per-replication random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How replication loops are executed. Output does not depend on the choice.
/// Defaults to `Parallel` when the `parallel` feature is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Replication count, master seed and executor shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarlo {
    pub reps: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl MonteCarlo {
    pub fn new(reps: usize, seed: u64) -> Self {
        Self { reps, seed, exec: Execution::default() }
    }

    pub fn with_exec(self, exec: Execution) -> Self {
        Self { exec, ..self }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for replication `rep` of grid point `grid`.
///
/// The key depends on `(seed, grid)` and the ChaCha stream number is the
/// replication index, so every replication owns a disjoint stream no matter
/// which thread runs it.
pub fn replication_rng(seed: u64, grid: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(grid)));
    rng.set_stream(rep);
    rng
}

/// `f(rep)` for every replication, collected in replication order.
pub fn map_reps<T, F>(exec: Execution, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..reps as u64).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..reps as u64).into_par_iter().map(f).collect(),
    }
}
