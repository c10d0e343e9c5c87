use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::gap::{relative_gap, GapSpec};
use super::lp::{Basis, LpProblem, LpStatus};
use crate::error::SolveError;
use crate::model::{Domain, Model, VarId};

const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// The incumbent is optimal within the gap tolerances.
    Optimal,
    /// A limit stopped the search with an incumbent at hand.
    Feasible,
    Infeasible,
    /// A limit stopped the search before any incumbent was found.
    NoFeasibleFound,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipResult {
    pub status: MipStatus,
    /// Incumbent objective, `+inf` without incumbent.
    pub objective: f64,
    /// Proven lower bound.
    pub bound: f64,
    pub x: Option<Vec<f64>>,
    /// Nodes whose relaxation was solved, the root included.
    pub nodes: usize,
    /// Nodes that were split into children.
    pub branched: usize,
}

impl MipResult {
    pub fn gap(&self) -> f64 {
        relative_gap(self.bound, self.objective)
    }
}

struct Node {
    id: usize,
    bound: f64,
    fixings: Vec<(VarId, f64, f64)>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: the least bound, then the oldest node, comes first
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

fn most_fractional(x: &[f64], binaries: &[VarId]) -> Option<VarId> {
    let mut best = None;
    let mut best_dist = f64::INFINITY;
    for &b in binaries {
        let frac = x[b] - x[b].floor();
        if frac <= INTEGRALITY_TOL || frac >= 1.0 - INTEGRALITY_TOL {
            continue;
        }
        let dist = (frac - 0.5).abs();
        if dist < best_dist {
            best_dist = dist;
            best = Some(b);
        }
    }
    best
}

/// Branch and bound over the binary variables of a bilinear-free model: depth-first until an
/// incumbent exists, best-first afterwards.
pub fn solve_mip(model: &Model, spec: &GapSpec) -> Result<MipResult, SolveError> {
    let start = Instant::now();
    let base = LpProblem::from_model(model)?;
    let binaries: Vec<VarId> = model.variables().iter().filter(|v| v.domain == Domain::Binary).map(|v| v.id).collect();
    let mut heap = BinaryHeap::new();
    // depth-first dive until the first incumbent, best-first afterwards
    let mut dive = vec![Node { id: 0, bound: f64::NEG_INFINITY, fixings: Vec::new(), basis: None }];
    let mut next_id = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0;
    let mut branched = 0;
    let mut limited = false;

    let inc_value = |inc: &Option<(f64, Vec<f64>)>| inc.as_ref().map_or(f64::INFINITY, |i| i.0);

    loop {
        if incumbent.is_some() && !dive.is_empty() {
            heap.extend(dive.drain(..));
        }
        let Some(node) = dive.pop().or_else(|| heap.pop()) else { break };
        let upper = inc_value(&incumbent);
        if node.bound >= upper - spec.abs_tol || spec.closed(node.bound, upper) {
            heap.push(node);
            break;
        }
        if start.elapsed() >= spec.time_limit || nodes >= spec.node_limit {
            heap.push(node);
            heap.extend(dive.drain(..));
            limited = true;
            break;
        }
        let mut lp = base.clone();
        for &(v, lo, hi) in &node.fixings {
            lp.set_column_bounds(v, lo, hi);
        }
        let res = lp.solve(node.basis.as_ref())?;
        nodes += 1;
        match res.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Ok(MipResult {
                    status: MipStatus::Unbounded,
                    objective: f64::NEG_INFINITY,
                    bound: f64::NEG_INFINITY,
                    x: None,
                    nodes,
                    branched,
                });
            }
            LpStatus::Optimal => {}
        }
        let bound = res.objective.max(node.bound);
        if bound >= inc_value(&incumbent) - spec.abs_tol {
            continue;
        }
        match most_fractional(&res.x, &binaries) {
            None => {
                // re-solve with the binaries pinned to their rounded values
                let mut fixed = lp.clone();
                for &b in &binaries {
                    let v = res.x[b].round();
                    fixed.set_column_bounds(b, v, v);
                }
                let exact = fixed.solve(Some(&res.basis))?;
                let (obj, mut x) =
                    if exact.status == LpStatus::Optimal { (exact.objective, exact.x) } else { (res.objective, res.x.clone()) };
                for &b in &binaries {
                    x[b] = x[b].round();
                }
                if obj < inc_value(&incumbent) {
                    incumbent = Some((obj, x));
                }
            }
            Some(b) => {
                branched += 1;
                // the child nearer the LP value is explored first while diving
                let order = if res.x[b] >= 0.5 { [0.0, 1.0] } else { [1.0, 0.0] };
                for v in order {
                    let mut fixings = node.fixings.clone();
                    fixings.push((b, v, v));
                    let child = Node { id: next_id, bound, fixings, basis: Some(res.basis.clone()) };
                    if incumbent.is_none() {
                        dive.push(child);
                    } else {
                        heap.push(child);
                    }
                    next_id += 1;
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let upper = inc_value(&incumbent);
    let bound = open_bound.min(upper);
    let status = match (&incumbent, limited) {
        (Some(_), false) => MipStatus::Optimal,
        (Some(_), true) => MipStatus::Feasible,
        (None, false) => MipStatus::Infeasible,
        (None, true) => MipStatus::NoFeasibleFound,
    };
    let (objective, x) = match incumbent {
        Some((o, x)) => (o, Some(x)),
        None => (f64::INFINITY, None),
    };
    Ok(MipResult { status, objective, bound, x, nodes, branched })
}
