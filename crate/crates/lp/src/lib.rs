//! The factor-revealing LP for bucketed RANKING: model construction in three
//! formulations, direct evaluation of price tables, MPS export, and a
//! self-contained bounded revised simplex with exact verification.

mod build;
pub mod error;
pub mod eval;
mod lu;
pub mod model;
pub mod mps;
pub mod simplex;
pub mod solve;

pub use build::{build_lp, build_lp_with};
pub use error::{LpError, Result};
pub use eval::{evaluate_price_table, BoundFamily, Evaluation};
pub use model::{ColKey, Formulation, LpModel, RowKey, Sense};
pub use mps::{export_mps, export_mps_streaming, read_mps, validate_mps, MpsDocument, MpsSummary};
pub use simplex::{solve_sparse, LpStatus, PivotRule, SolverOptions, SparseLp};
pub use solve::{
    import_solution, parse_assignment, solve, verify_solution, verify_values, LpSolution, ResidualReport,
};
