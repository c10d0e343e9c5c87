//! Global optimization of pooling problems.
//!
//! A [`Network`] describes inputs, pools and outputs. [`build_pq`] turns it into the
//! PQ-formulation, [`relax`] builds its McCormick relaxation, [`cuts`] adds pooling
//! inequalities and gradient cuts, [`restriction`] provides the MIP restriction used as
//! a primal heuristic and [`solve::branch_and_cut`] solves to global optimality.

pub mod bench;
pub mod cuts;
pub mod error;
pub mod fixtures;
pub mod model;
pub mod network;
pub mod pq;

pub use error::*;
pub use model::{BilinearTerm, Constraint, Domain, FeasibilityReport, LinearExpr, Model, Sense, VarId, Variable};
pub use network::{Capacity, Edge, Network, Node, NodeLayer};
pub use pq::{build_pq, index_set_ilj, index_sets, IndexSets, PqModel};
pub mod relaxation;
pub mod restriction;
pub mod solve;

pub use relaxation::{refresh_bounds, relax, relax_pq, EnvelopeEntry, RelaxedModel};
pub use cuts::{add_all_pooling_inequalities, add_valid_cuts, generate_valid_cuts, Cut, CutBlock, TripletParams};
pub use restriction::{derive_fractional_flows, install_restriction, uninstall_restriction, RestoredSolution, RestrictedModel, RestrictionSpec};
