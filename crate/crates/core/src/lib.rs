//! Energy-minimal scheduling of independent tasks on restricted parallel
//! processors with per-processor speed scaling and a common deadline.
//!
//! A processor running load `L` for the whole deadline `C` spends
//! `L^alpha / C^(alpha - 1)`. The crate provides an exact algorithm for equal
//! task works, a convex relaxation with a forest rounding for general works,
//! greedy baselines, exhaustive oracles and an experiment harness.

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod harness;
pub mod model;
pub mod relax;
pub mod rounding;
pub mod uniform;

pub use baselines::{brute_force_minmax, brute_force_opt, lfj, lfm, OracleBudget};
pub use error::{Error, Result};
pub use model::{
    check_feasibility, energy, energy_of_loads, load_vector, speeds, validate_instance,
    Assignment, Instance, LoadVector, Task, Violation, CAPACITY_TOL,
};
pub use relax::{solve_relaxation, FractionalAssignment, RelaxReport};
pub use rounding::{
    approximation_bound, break_cycles, build_support_graph, fdr, round_forest, smax_guarantee,
    FdrSolution, SupportGraph,
};
pub use uniform::{bs_algo, ecsemrpp, MinMaxResult};
