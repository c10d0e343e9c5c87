use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use serde_json::{json, Value};

use super::gap::{relative_gap, GapSpec};
use super::lp::{Basis, LpProblem, LpResult, LpStatus};
use super::primal::{heuristic_gap_spec, restriction_search};
use crate::cuts::{add_all_pooling_inequalities, add_valid_cuts, CutBlock, DEFAULT_EPSILON};
use crate::error::SolveError;
use crate::model::{VarId, FEAS_TOL};
use crate::pq::PqModel;
use crate::relaxation::{refresh_bounds, relax, relax_pq, RelaxedModel};
use crate::restriction::{derive_fractions, RestoredSolution};

const PRODUCT_TOL: f64 = 1e-9;
const IN_TREE_CUT_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchAndCutOptions {
    pub use_pooling_cuts: bool,
    pub use_primal_heuristic: bool,
    pub max_cut_rounds: usize,
    pub epsilon: f64,
}

impl Default for BranchAndCutOptions {
    fn default() -> Self {
        BranchAndCutOptions { use_pooling_cuts: false, use_primal_heuristic: false, max_cut_rounds: 20, epsilon: DEFAULT_EPSILON }
    }
}

impl BranchAndCutOptions {
    pub fn with_cuts(mut self, on: bool) -> Self {
        self.use_pooling_cuts = on;
        self
    }

    pub fn with_heuristic(mut self, on: bool) -> Self {
        self.use_primal_heuristic = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    NodeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub incumbent: Option<RestoredSolution>,
    pub lower: f64,
    pub upper: f64,
    pub rel_gap: f64,
    pub nodes: usize,
    pub cuts: usize,
    pub wall_seconds: f64,
    /// Time spent in the restriction heuristic.
    pub heuristic_seconds: f64,
    /// Time spent installing and separating pooling cuts.
    pub cut_seconds: f64,
}

/// JSON value of a possibly infinite number: non-finite values become `"inf"`, `"-inf"` or `"nan"`.
pub fn json_number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

impl SolveReport {
    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status.as_str(),
            "lower": json_number(self.lower),
            "upper": json_number(self.upper),
            "rel_gap": json_number(self.rel_gap),
            "nodes": self.nodes,
            "cuts": self.cuts,
            "wall_seconds": self.wall_seconds,
        })
    }
}

/// One round of the root cut loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutRound {
    pub iteration: usize,
    pub bound: f64,
    pub added: usize,
}

/// Alternates LP solves and cut separation until no cut is found, `max_rounds` rounds added
/// cuts or the deadline passes. Returns the rounds and the last LP result.
pub fn cut_loop(
    rm: &mut RelaxedModel,
    cb: &mut CutBlock,
    max_rounds: usize,
    epsilon: f64,
    deadline: Option<Instant>,
    mut on_round: impl FnMut(&CutRound),
) -> Result<(Vec<CutRound>, LpResult), SolveError> {
    let mut rounds = Vec::new();
    let mut basis: Option<Basis> = None;
    let mut iteration = 0;
    loop {
        let res = LpProblem::from_model(&rm.lp)?.solve(basis.as_ref())?;
        let expired = deadline.is_some_and(|d| Instant::now() >= d);
        if res.status != LpStatus::Optimal || iteration >= max_rounds || expired {
            return Ok((rounds, res));
        }
        let added = add_valid_cuts(cb, rm, &res.x, epsilon)?;
        let round = CutRound { iteration, bound: res.objective, added };
        on_round(&round);
        rounds.push(round);
        if added == 0 {
            return Ok((rounds, res));
        }
        basis = Some(res.basis);
        iteration += 1;
    }
}

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    boxes: BTreeMap<VarId, (f64, f64)>,
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
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

/// Solves the LP obtained by fixing every `q` to the given fractions and returns the point if it
/// is feasible for the PQ model.
fn fixed_fraction_candidate(pq: &PqModel, fractions: &[f64]) -> Result<Option<RestoredSolution>, SolveError> {
    let mut fixed = pq.model.clone();
    for &q in pq.q_vars().values() {
        fixed.set_bounds(q, fractions[q], fractions[q])?;
    }
    let lp = relax(&fixed)?;
    let res = LpProblem::from_model(&lp.lp)?.solve(None)?;
    if res.status != LpStatus::Optimal {
        return Ok(None);
    }
    let values = res.x[..pq.model.num_vars()].to_vec();
    if !pq.model.is_feasible(&values, FEAS_TOL)?.feasible {
        return Ok(None);
    }
    let objective = pq.model.objective_value(&values)?;
    Ok(Some(RestoredSolution { values, objective }))
}

/// Projects the `q` part of an LP point onto each pool simplex.
fn normalized_fractions(pq: &PqModel, point: &[f64]) -> Vec<f64> {
    let mut out = point[..pq.model.num_vars()].to_vec();
    let net = pq.network().clone();
    for l in net.pools() {
        let ids: Vec<VarId> = net.pool_inputs(l).iter().map(|i| pq.q(i, l).expect("fraction variable")).collect();
        let total: f64 = ids.iter().map(|&q| point[q].max(0.0)).sum();
        for &q in &ids {
            out[q] = if total > 1e-12 { point[q].max(0.0) / total } else { 1.0 / ids.len() as f64 };
        }
    }
    out
}

struct Search<'a> {
    pq: &'a PqModel,
    spec: GapSpec,
    start: Instant,
    incumbent: Option<RestoredSolution>,
}

impl Search<'_> {
    fn upper(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |s| s.objective)
    }

    fn offer(&mut self, candidate: Option<RestoredSolution>) {
        if let Some(c) = candidate {
            if c.objective < self.upper() {
                self.incumbent = Some(c);
            }
        }
    }

    fn try_incumbents(&mut self, x: &[f64]) -> Result<(), SolveError> {
        let original = &x[..self.pq.model.num_vars()];
        if self.pq.model.is_feasible(original, FEAS_TOL)?.feasible {
            let objective = self.pq.model.objective_value(original)?;
            self.offer(Some(RestoredSolution { values: original.to_vec(), objective }));
        }
        let normalized = normalized_fractions(self.pq, x);
        let candidate = fixed_fraction_candidate(self.pq, &normalized)?;
        self.offer(candidate);
        let mut derived = original.to_vec();
        derive_fractions(self.pq, &mut derived);
        let candidate = fixed_fraction_candidate(self.pq, &derived)?;
        self.offer(candidate);
        Ok(())
    }
}

/// Global minimization of a PQ model by spatial branch and cut on the McCormick relaxation.
pub fn branch_and_cut(pq: &PqModel, spec: &GapSpec, options: &BranchAndCutOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let mut search = Search { pq, spec: *spec, start, incumbent: None };
    let mut heuristic_seconds = 0.0;
    if options.use_primal_heuristic {
        let t = Instant::now();
        let limits = heuristic_gap_spec();
        let limits = limits.with_time_limit(limits.time_limit.min(spec.time_limit / 4));
        match restriction_search(pq, 1, &limits) {
            Ok(found) => search.offer(found),
            Err(SolveError::NonLinearSideConstraints(_)) => {}
            Err(e) => return Err(e),
        }
        heuristic_seconds = t.elapsed().as_secs_f64();
    }

    let mut root = relax_pq(pq)?;
    let mut cut_seconds = 0.0;
    let mut block = None;
    let mut root_basis = None;
    if options.use_pooling_cuts {
        let t = Instant::now();
        let mut cb = add_all_pooling_inequalities(&mut root, pq)?;
        let (_, last) = cut_loop(&mut root, &mut cb, options.max_cut_rounds, options.epsilon, Some(start + spec.time_limit), |_| {})?;
        cut_seconds += t.elapsed().as_secs_f64();
        root_basis = Some(last.basis);
        block = Some(cb);
    }
    let root_boxes: Vec<(f64, f64)> = root.lp.variables().iter().map(|v| (v.lower, v.upper)).collect();

    let mut heap = BinaryHeap::new();
    heap.push(Node { id: 0, depth: 0, bound: f64::NEG_INFINITY, boxes: BTreeMap::new(), basis: root_basis });
    let mut next_id = 1;
    let mut nodes = 0;
    let mut unresolved = f64::INFINITY;
    let mut status = SolveStatus::Optimal;

    while let Some(node) = heap.pop() {
        let upper = search.upper();
        if node.bound >= upper - spec.abs_tol || spec.closed(node.bound, upper) {
            heap.push(node);
            break;
        }
        if node.id > 0 && search.start.elapsed() >= search.spec.time_limit {
            status = SolveStatus::TimeLimit;
            heap.push(node);
            break;
        }
        if node.id > 0 && nodes >= spec.node_limit {
            status = SolveStatus::NodeLimit;
            heap.push(node);
            break;
        }
        nodes += 1;
        let mut rm = root.clone();
        let boxes: Vec<(VarId, f64, f64)> = node.boxes.iter().map(|(&v, &(lo, hi))| (v, lo, hi)).collect();
        refresh_bounds(&mut rm, &boxes)?;
        let mut res = LpProblem::from_model(&rm.lp)?.solve(node.basis.as_ref())?;
        if res.status == LpStatus::Infeasible {
            continue;
        }
        if res.status == LpStatus::Unbounded {
            return Err(SolveError::NumericalFailure("unbounded relaxation".into()));
        }
        if let Some(cb) = block.as_mut().filter(|_| node.depth > 0 && node.depth <= IN_TREE_CUT_DEPTH) {
            let t = Instant::now();
            for _ in 0..options.max_cut_rounds {
                if search.start.elapsed() >= spec.time_limit {
                    break;
                }
                let before = root.lp.num_constraints();
                if add_valid_cuts(cb, &mut root, &res.x, options.epsilon)? == 0 {
                    break;
                }
                for c in &root.lp.constraints()[before..] {
                    rm.lp.add_constraint(c.clone())?;
                }
                let next = LpProblem::from_model(&rm.lp)?.solve(Some(&res.basis))?;
                if next.status != LpStatus::Optimal {
                    res = next;
                    break;
                }
                res = next;
            }
            cut_seconds += t.elapsed().as_secs_f64();
            if res.status == LpStatus::Infeasible {
                continue;
            }
        }
        let bound = res.objective.max(node.bound);
        if bound >= search.upper() - spec.abs_tol {
            continue;
        }
        search.try_incumbents(&res.x)?;
        if bound >= search.upper() - spec.abs_tol || spec.closed(bound, search.upper()) {
            continue;
        }

        // branch on the factor of the worst product
        let mut worst: Option<(f64, VarId, VarId)> = None;
        for e in rm.envelopes() {
            let r = (res.x[e.aux] - res.x[e.x] * res.x[e.y]).abs();
            if worst.is_none_or(|w| r > w.0) {
                worst = Some((r, e.x, e.y));
            }
        }
        let Some((_, x, y)) = worst.filter(|w| w.0 > PRODUCT_TOL) else {
            unresolved = unresolved.min(bound);
            continue;
        };
        let rel_width = |v: VarId| {
            let var = rm.lp.var(v);
            let (lo, hi) = root_boxes[v];
            if hi > lo { (var.upper - var.lower) / (hi - lo) } else { 0.0 }
        };
        let (wx, wy) = (rel_width(x), rel_width(y));
        let var = match wx.total_cmp(&wy) {
            Ordering::Greater => x,
            Ordering::Less => y,
            Ordering::Equal => x.min(y),
        };
        let (lo, hi) = (rm.lp.var(var).lower, rm.lp.var(var).upper);
        let delta = hi - lo;
        if delta <= 0.0 {
            unresolved = unresolved.min(bound);
            continue;
        }
        let point = res.x[var].clamp(lo + 0.2 * delta, hi - 0.2 * delta);
        for (clo, chi) in [(lo, point), (point, hi)] {
            let mut boxes = node.boxes.clone();
            boxes.insert(var, (clo, chi));
            heap.push(Node { id: next_id, depth: node.depth + 1, bound, boxes, basis: Some(res.basis.clone()) });
            next_id += 1;
        }
    }

    let upper = search.upper();
    let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let lower = open.min(unresolved).min(upper);
    if search.incumbent.is_none() && heap.is_empty() && unresolved == f64::INFINITY && status == SolveStatus::Optimal {
        status = SolveStatus::Infeasible;
    }
    let cuts = block.as_ref().map_or(0, |cb| cb.cut_pool().len());
    Ok(SolveReport {
        status,
        incumbent: search.incumbent,
        lower,
        upper,
        rel_gap: relative_gap(lower, upper),
        nodes,
        cuts,
        wall_seconds: start.elapsed().as_secs_f64(),
        heuristic_seconds,
        cut_seconds,
    })
}
