//! Reproduction harness for the RANKING analysis: Monte Carlo ratio
//! estimates, the LP table and the structural-lemma sweep, plus the CLI.

pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod sweep;
pub mod table;

pub use cli::{run_cli, CommandOutcome, ExitCode};
pub use error::{ForgeError, Result};
pub use montecarlo::{exact_ratio, monte_carlo_ratio, ExactRatio, RatioEstimate};
pub use sweep::{lemma_sweep, CorpusEntry, CorpusSelector, SweepConfig, SweepReport};
pub use table::{reproduce_lp_table, LpTableRow, PUBLISHED_ALPHA};

/// Runs `f` on a pool capped at `jobs` workers (`None`: rayon's default).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(ForgeError::InvalidParameter("--jobs must be ≥ 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| ForgeError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
