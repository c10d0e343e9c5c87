//! LP and MIP solvers, the primal heuristic and spatial branch and cut.

mod bnb;
mod gap;
mod lp;
mod mip;
mod primal;

pub use bnb::{branch_and_cut, cut_loop, json_number, BranchAndCutOptions, CutRound, SolveReport, SolveStatus};
pub use gap::{relative_gap, GapSpec, GAP_EPSILON};
pub use lp::{solve_lp, Basis, BasisStatus, LpProblem, LpResult, LpStatus};
pub use mip::{solve_mip, MipResult, MipStatus};
pub use primal::{heuristic_gap_spec, initial_primal_search, restriction_search};
