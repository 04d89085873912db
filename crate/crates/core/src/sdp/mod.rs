//! Feasibility SDPs over Hermitian PSD blocks and nonnegative scalars.

mod bisect;
mod problem;
mod solver;

pub use bisect::{bisect_max, bisect_max_parallel, BisectOutcome};
pub use problem::{Block, BlockId, BlockKind, Constraint, LinearMap, SdpProblem};
pub use solver::{
    certificate_gap, solve_feasibility, verify_witness, BlockValue, Certificate, Status, Verdict,
    WitnessCheck,
};
