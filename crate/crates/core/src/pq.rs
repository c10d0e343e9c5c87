//! PQ-formulation of the pooling problem, generated from a [`Network`].

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::BuildError;
use crate::model::{BilinearTerm, Constraint, LinearExpr, Model, Sense, VarId};
use crate::network::{Network, NodeLayer};

pub type Pair = (String, String);
pub type Triple = (String, String, String);

/// Constraint group names, as exposed through [`PqModel::group`].
pub mod groups {
    pub const PATH_DEFINITION: &str = "path_definition";
    pub const SIMPLEX: &str = "simplex";
    pub const QUALITY_UPPER: &str = "product_quality_upper_bound";
    pub const QUALITY_LOWER: &str = "product_quality_lower_bound";
    pub const INPUT_CAPACITY: &str = "input_capacity";
    pub const INPUT_CAPACITY_LOWER: &str = "input_capacity_lower";
    pub const POOL_CAPACITY: &str = "pool_capacity";
    pub const POOL_CAPACITY_LOWER: &str = "pool_capacity_lower";
    pub const OUTPUT_CAPACITY: &str = "output_capacity";
    pub const OUTPUT_CAPACITY_LOWER: &str = "output_capacity_lower";
    pub const REDUCTION_1: &str = "reduction_1";
    pub const REDUCTION_2: &str = "reduction_2";
    pub const FLOW_CAPACITY: &str = "flow_capacity";
    pub const PQ_CUT: &str = "pq_cut";
}

/// Sorted index sets of a pooling network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IndexSets {
    pub ilj: Vec<Triple>,
    pub il: Vec<Pair>,
    pub lj: Vec<Pair>,
    pub ij: Vec<Pair>,
    /// Output/quality pairs with an upper quality bound.
    pub jk: Vec<Pair>,
}

pub fn index_sets(net: &Network) -> IndexSets {
    let mut sets = IndexSets::default();
    for e in net.pq_edges() {
        let from = net.node(&e.source).map(|n| n.layer);
        let to = net.node(&e.destination).map(|n| n.layer);
        let pair = (e.source.clone(), e.destination.clone());
        match (from, to) {
            (Some(NodeLayer::Input), Some(NodeLayer::Pool)) => sets.il.push(pair),
            (Some(NodeLayer::Pool), Some(NodeLayer::Output)) => sets.lj.push(pair),
            (Some(NodeLayer::Input), Some(NodeLayer::Output)) => sets.ij.push(pair),
            _ => {}
        }
    }
    for (i, l) in &sets.il {
        for j in net.pool_outputs(l) {
            sets.ilj.push((i.clone(), l.clone(), j.to_string()));
        }
    }
    sets.ilj.sort();
    for j in net.outputs() {
        if let Some(bounds) = net.node(j).and_then(|n| n.attr.get(crate::network::QUALITY_UPPER)) {
            for k in bounds.keys() {
                sets.jk.push((j.to_string(), k.clone()));
            }
        }
    }
    sets
}

/// `(i, l, j)` triples of the path-flow variables `v`.
pub fn index_set_ilj(net: &Network) -> Vec<Triple> {
    index_sets(net).ilj
}

fn min_finite(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Effective flow bounds derived from node and edge capacities. Absent values are +inf.
#[derive(Debug, Clone, Copy)]
pub struct FlowBounds<'a> {
    net: &'a Network,
}

impl<'a> FlowBounds<'a> {
    pub fn new(net: &'a Network) -> Self {
        FlowBounds { net }
    }

    fn node_upper(&self, name: &str) -> f64 {
        self.net.node(name).map_or(f64::INFINITY, |n| n.capacity.effective_upper())
    }

    fn edge_upper(&self, a: &str, b: &str) -> f64 {
        self.net.edge(a, b).map_or(f64::INFINITY, |e| e.capacity.effective_upper())
    }

    /// `c_il = min(edge, A^U_i, S_l)`.
    pub fn input_pool(&self, i: &str, l: &str) -> f64 {
        min_finite(&[self.edge_upper(i, l), self.node_upper(i), self.node_upper(l)])
    }

    /// `c_lj = min(edge, S_l, D^U_j)`.
    pub fn pool_output(&self, l: &str, j: &str) -> f64 {
        min_finite(&[self.edge_upper(l, j), self.node_upper(l), self.node_upper(j)])
    }

    /// `c_ij = min(edge, A^U_i, D^U_j)`.
    pub fn input_output(&self, i: &str, j: &str) -> f64 {
        min_finite(&[self.edge_upper(i, j), self.node_upper(i), self.node_upper(j)])
    }

    /// Pool throughput bound: `S_l`, or the sum of outgoing `c_lj` when `S_l` is absent.
    pub fn pool(&self, l: &str) -> f64 {
        let s = self.node_upper(l);
        if s.is_finite() {
            return s;
        }
        self.net.pool_outputs(l).iter().map(|j| self.pool_output(l, j)).sum()
    }
}

fn key2(a: &str, b: &str) -> Pair {
    (a.to_string(), b.to_string())
}

/// The PQ-formulation with named handles to its variables and row groups.
#[derive(Debug, Clone, PartialEq)]
pub struct PqModel {
    pub model: Model,
    network: Arc<Network>,
    q: BTreeMap<Pair, VarId>,
    v: BTreeMap<Triple, VarId>,
    y_pool: BTreeMap<Pair, VarId>,
    y_bypass: BTreeMap<Pair, VarId>,
    groups: BTreeMap<String, Vec<String>>,
    pub(crate) restricted: bool,
}

impl PqModel {
    pub fn network(&self) -> &Arc<Network> {
        &self.network
    }

    pub fn q(&self, i: &str, l: &str) -> Option<VarId> {
        self.q.get(&key2(i, l)).copied()
    }

    pub fn v(&self, i: &str, l: &str, j: &str) -> Option<VarId> {
        self.v.get(&(i.to_string(), l.to_string(), j.to_string())).copied()
    }

    pub fn y_pool(&self, l: &str, j: &str) -> Option<VarId> {
        self.y_pool.get(&key2(l, j)).copied()
    }

    pub fn y_bypass(&self, i: &str, j: &str) -> Option<VarId> {
        self.y_bypass.get(&key2(i, j)).copied()
    }

    pub fn q_vars(&self) -> &BTreeMap<Pair, VarId> {
        &self.q
    }

    pub fn v_vars(&self) -> &BTreeMap<Triple, VarId> {
        &self.v
    }

    pub fn y_pool_vars(&self) -> &BTreeMap<Pair, VarId> {
        &self.y_pool
    }

    pub fn y_bypass_vars(&self) -> &BTreeMap<Pair, VarId> {
        &self.y_bypass
    }

    /// Constraint names of a group; empty when the group has no rows.
    pub fn group(&self, name: &str) -> &[String] {
        self.groups.get(name).map_or(&[], |v| v.as_slice())
    }

    pub fn group_names(&self) -> impl Iterator<Item = &str> {
        self.groups.keys().map(|s| s.as_str())
    }

    pub fn set_group_active(&mut self, group: &str, active: bool) {
        let names = self.groups.get(group).cloned().unwrap_or_default();
        for name in names {
            self.model.set_active(&name, active).expect("group rows exist");
        }
    }

    /// Regenerates the model from the stored network.
    pub fn rebuild(&self) -> Result<PqModel, BuildError> {
        self.rebuild_with(self.network.clone())
    }

    /// Regenerates the model from `network`, keeping the active flag of every
    /// constraint whose name survives.
    pub fn rebuild_with(&self, network: Arc<Network>) -> Result<PqModel, BuildError> {
        let mut fresh = build_pq(network)?;
        for c in self.model.constraints() {
            if fresh.model.constraint(&c.name).is_ok() {
                fresh.model.set_active(&c.name, c.active)?;
            }
        }
        Ok(fresh)
    }

    /// The all-zero flow point with uniform `q`.
    pub fn zero_flow_point(&self) -> Vec<f64> {
        let mut point = vec![0.0; self.model.num_vars()];
        for ((_, l), &id) in &self.q {
            point[id] = 1.0 / self.network.pool_inputs(l).len() as f64;
        }
        point
    }
}

struct Builder<'a> {
    net: &'a Network,
    model: Model,
    groups: BTreeMap<String, Vec<String>>,
}

impl Builder<'_> {
    fn push(&mut self, group: &str, constraint: Constraint) -> Result<(), BuildError> {
        self.groups.entry(group.to_string()).or_default().push(constraint.name.clone());
        self.model.add_constraint(constraint)?;
        Ok(())
    }

    fn cost(&self, name: &str) -> f64 {
        self.net.node(name).map_or(0.0, |n| n.cost)
    }
}

/// Builds the PQ-formulation of `net`. The `pq_cut` rows are present but inactive.
pub fn build_pq(network: Arc<Network>) -> Result<PqModel, BuildError> {
    let owner = network.clone();
    let net = owner.as_ref();
    for layer in [NodeLayer::Input, NodeLayer::Pool, NodeLayer::Output] {
        if !net.nodes().any(|n| n.layer == layer) {
            return Err(BuildError::EmptyLayer(layer));
        }
    }
    for l in net.pools() {
        if net.pool_inputs(l).is_empty() {
            return Err(BuildError::InfeasiblePool(l.to_string()));
        }
    }
    let qualities = net.qualities();
    for j in net.outputs() {
        let node = net.node(j).expect("output exists");
        for key in [crate::network::QUALITY_UPPER, crate::network::QUALITY_LOWER] {
            if let Some(bounds) = node.attr.get(key) {
                if let Some(k) = bounds.keys().find(|k| !qualities.contains(k)) {
                    return Err(BuildError::MissingQuality { output: j.to_string(), quality: k.clone() });
                }
            }
        }
    }

    let sets = index_sets(net);
    let caps = FlowBounds::new(net);
    let mut b = Builder { net, model: Model::new(), groups: BTreeMap::new() };

    let mut q = BTreeMap::new();
    for (i, l) in &sets.il {
        q.insert(key2(i, l), b.model.continuous(format!("q[{i},{l}]"), 0.0, 1.0)?);
    }
    let mut y_pool = BTreeMap::new();
    for (l, j) in &sets.lj {
        let lo = net.edge(l, j).map_or(0.0, |e| e.capacity.effective_lower());
        let id = b.model.continuous(format!("y[{l},{j}]"), lo, caps.pool_output(l, j))?;
        y_pool.insert(key2(l, j), id);
    }
    let mut y_bypass = BTreeMap::new();
    for (i, j) in &sets.ij {
        let lo = net.edge(i, j).map_or(0.0, |e| e.capacity.effective_lower());
        let id = b.model.continuous(format!("y[{i},{j}]"), lo, caps.input_output(i, j))?;
        y_bypass.insert(key2(i, j), id);
    }
    let mut v = BTreeMap::new();
    for (i, l, j) in &sets.ilj {
        let hi = caps.input_pool(i, l).min(caps.pool_output(l, j));
        let id = b.model.continuous(format!("v[{i},{l},{j}]"), 0.0, hi)?;
        v.insert((i.clone(), l.clone(), j.clone()), id);
    }

    // objective: sum c_i v_ilj - sum d_j y_lj - sum (d_j - c_i) y_ij
    let mut obj = LinearExpr::new();
    for ((i, _, _), &id) in &v {
        obj.add_term(id, b.cost(i));
    }
    for ((_, j), &id) in &y_pool {
        obj.add_term(id, -b.cost(j));
    }
    for ((i, j), &id) in &y_bypass {
        obj.add_term(id, -(b.cost(j) - b.cost(i)));
    }
    b.model.objective.linear = obj;

    for ((i, l, j), &vid) in &v {
        let c = Constraint::linear(format!("path_definition[{i},{l},{j}]"), LinearExpr::from_terms([(vid, 1.0)]), Sense::Eq, 0.0)
            .with_bilinear(BilinearTerm::new(-1.0, q[&key2(i, l)], y_pool[&key2(l, j)]));
        b.push(groups::PATH_DEFINITION, c)?;
    }

    for l in net.pools() {
        let expr = LinearExpr::from_terms(net.pool_inputs(l).into_iter().map(|i| (q[&key2(i, l)], 1.0)));
        b.push(groups::SIMPLEX, Constraint::linear(format!("simplex[{l}]"), expr, Sense::Eq, 1.0))?;
    }

    for j in net.outputs() {
        let node = net.node(j).expect("output exists");
        let inflow_pools = net.output_pools(j);
        let inflow_inputs = net.output_inputs(j);
        if inflow_pools.is_empty() && inflow_inputs.is_empty() {
            continue;
        }
        let mut rows = Vec::new();
        if let Some(upper) = node.attr.get(crate::network::QUALITY_UPPER) {
            rows.extend(upper.iter().map(|(k, &p)| (groups::QUALITY_UPPER, k, p, Sense::Le)));
        }
        if let Some(lower) = node.attr.get(crate::network::QUALITY_LOWER) {
            rows.extend(lower.iter().map(|(k, &p)| (groups::QUALITY_LOWER, k, p, Sense::Ge)));
        }
        for (group, k, bound, sense) in rows {
            let quality = |i: &str| net.node(i).and_then(|n| n.quality(k)).unwrap_or(0.0);
            let mut expr = LinearExpr::new();
            for l in &inflow_pools {
                for i in net.pool_inputs(l) {
                    expr.add_term(v[&(i.to_string(), l.to_string(), j.to_string())], quality(i));
                }
                expr.add_term(y_pool[&key2(l, j)], -bound);
            }
            for i in &inflow_inputs {
                expr.add_term(y_bypass[&key2(i, j)], quality(i) - bound);
            }
            b.push(group, Constraint::linear(format!("{group}[{j},{k}]"), expr, sense, 0.0))?;
        }
    }

    for i in net.inputs() {
        let mut expr = LinearExpr::new();
        for ((ii, _, _), &id) in &v {
            if ii == i {
                expr.add_term(id, 1.0);
            }
        }
        for j in net.successors(i, Some(NodeLayer::Output)).unwrap_or_default() {
            expr.add_term(y_bypass[&key2(i, &j.name)], 1.0);
        }
        if expr.is_empty() {
            continue;
        }
        let cap = net.node(i).expect("input exists").capacity;
        if cap.effective_upper().is_finite() {
            let row = Constraint::linear(format!("input_capacity[{i}]"), expr.clone(), Sense::Le, cap.effective_upper());
            b.push(groups::INPUT_CAPACITY, row)?;
        }
        if cap.effective_lower() > 0.0 {
            let row = Constraint::linear(format!("input_capacity_lower[{i}]"), expr, Sense::Ge, cap.effective_lower());
            b.push(groups::INPUT_CAPACITY_LOWER, row)?;
        }
    }

    for l in net.pools() {
        let outs = net.pool_outputs(l);
        if outs.is_empty() {
            continue;
        }
        let expr = LinearExpr::from_terms(outs.iter().map(|j| (y_pool[&key2(l, j)], 1.0)));
        let cap = net.node(l).expect("pool exists").capacity;
        if cap.effective_upper().is_finite() {
            let row = Constraint::linear(format!("pool_capacity[{l}]"), expr.clone(), Sense::Le, cap.effective_upper());
            b.push(groups::POOL_CAPACITY, row)?;
        }
        if cap.effective_lower() > 0.0 {
            let row = Constraint::linear(format!("pool_capacity_lower[{l}]"), expr, Sense::Ge, cap.effective_lower());
            b.push(groups::POOL_CAPACITY_LOWER, row)?;
        }
    }

    for j in net.outputs() {
        let mut expr = LinearExpr::new();
        for l in net.output_pools(j) {
            expr.add_term(y_pool[&key2(l, j)], 1.0);
        }
        for i in net.output_inputs(j) {
            expr.add_term(y_bypass[&key2(i, j)], 1.0);
        }
        if expr.is_empty() {
            continue;
        }
        let cap = net.node(j).expect("output exists").capacity;
        if cap.effective_upper().is_finite() {
            let row = Constraint::linear(format!("output_capacity[{j}]"), expr.clone(), Sense::Le, cap.effective_upper());
            b.push(groups::OUTPUT_CAPACITY, row)?;
        }
        if cap.effective_lower() > 0.0 {
            let row = Constraint::linear(format!("output_capacity_lower[{j}]"), expr, Sense::Ge, cap.effective_lower());
            b.push(groups::OUTPUT_CAPACITY_LOWER, row)?;
        }
    }

    for (l, j) in &sets.lj {
        let mut expr = LinearExpr::new();
        for i in net.pool_inputs(l) {
            expr.add_term(v[&(i.to_string(), l.clone(), j.clone())], 1.0);
        }
        expr.add_term(y_pool[&key2(l, j)], -1.0);
        b.push(groups::REDUCTION_1, Constraint::linear(format!("reduction_1[{l},{j}]"), expr, Sense::Eq, 0.0))?;
    }

    for (i, l) in &sets.il {
        let outs = net.pool_outputs(l);
        if outs.is_empty() {
            continue;
        }
        let flow = LinearExpr::from_terms(outs.iter().map(|j| (v[&(i.clone(), l.clone(), j.to_string())], 1.0)));
        let c_l = caps.pool(l);
        if c_l.is_finite() {
            let expr = flow.clone().with_term(q[&key2(i, l)], -c_l);
            b.push(groups::REDUCTION_2, Constraint::linear(format!("reduction_2[{i},{l}]"), expr, Sense::Le, 0.0))?;
        }
        let c_il = caps.input_pool(i, l);
        if c_il.is_finite() {
            b.push(groups::FLOW_CAPACITY, Constraint::linear(format!("flow_capacity[{i},{l}]"), flow, Sense::Le, c_il))?;
        }
    }

    for (l, j) in &sets.lj {
        let y = y_pool[&key2(l, j)];
        let mut c = Constraint::linear(format!("pq_cut[{l},{j}]"), LinearExpr::from_terms([(y, -1.0)]), Sense::Eq, 0.0);
        for i in net.pool_inputs(l) {
            c = c.with_bilinear(BilinearTerm::new(1.0, q[&key2(i, l)], y));
        }
        c.active = false;
        b.push(groups::PQ_CUT, c)?;
    }

    Ok(PqModel { model: b.model, network, q, v, y_pool, y_bypass, groups: b.groups, restricted: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::{Edge, Node, QUALITY, QUALITY_UPPER};

    #[test]
    fn h1_counts() {
        let pq = build_pq(Arc::new(fixtures::h1())).unwrap();
        assert_eq!(pq.q_vars().len(), 2);
        assert_eq!(pq.v_vars().len(), 4);
        assert_eq!(pq.y_pool_vars().len(), 2);
        assert_eq!(pq.y_bypass_vars().len(), 2);
        assert_eq!(pq.group(groups::SIMPLEX).len(), 1);
        assert_eq!(pq.group(groups::QUALITY_UPPER).len(), 2);
        assert_eq!(pq.group(groups::QUALITY_LOWER).len(), 0);
        assert_eq!(pq.group(groups::PATH_DEFINITION).len(), 4);
        assert!(pq.group(groups::PQ_CUT).iter().all(|n| !pq.model.constraint(n).unwrap().active));
    }

    #[test]
    fn h1_index_set() {
        let ilj = index_set_ilj(&fixtures::h1());
        let expect: Vec<Triple> = [("i1", "l1", "j1"), ("i1", "l1", "j2"), ("i2", "l1", "j1"), ("i2", "l1", "j2")]
            .iter()
            .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
            .collect();
        assert_eq!(ilj, expect);
    }

    #[test]
    fn no_pools_means_no_paths() {
        let mut net = Network::new("flat");
        net.insert_node(Node::new(NodeLayer::Input, "a").with_attr(QUALITY, &[("k", 1.0)])).unwrap();
        net.insert_node(Node::new(NodeLayer::Output, "b").with_attr(QUALITY_UPPER, &[("k", 1.0)])).unwrap();
        net.insert_edge(Edge::new("a", "b")).unwrap();
        assert!(index_set_ilj(&net).is_empty());
        assert_eq!(build_pq(Arc::new(net)).unwrap_err(), BuildError::EmptyLayer(NodeLayer::Pool));
    }

    #[test]
    fn pool_without_inputs_is_rejected() {
        let mut net = fixtures::h1();
        net.insert_node(Node::new(NodeLayer::Pool, "l9")).unwrap();
        assert_eq!(build_pq(Arc::new(net)).unwrap_err(), BuildError::InfeasiblePool("l9".into()));
    }

    #[test]
    fn missing_quality_is_rejected() {
        let mut net = fixtures::h1();
        net.insert_node(Node::new(NodeLayer::Output, "j9").with_attr(QUALITY_UPPER, &[("sulfur", 1.0)])).unwrap();
        net.insert_edge(Edge::new("l1", "j9")).unwrap();
        assert!(matches!(build_pq(Arc::new(net)), Err(BuildError::MissingQuality { .. })));
    }

    #[test]
    fn adhya4_fragment_reduction_coefficient() {
        let net = fixtures::adhya4_fragment();
        let pq = build_pq(Arc::new(net)).unwrap();
        let q = pq.q("c1", "o1").unwrap();
        assert_eq!((pq.model.var(q).lower, pq.model.var(q).upper), (0.0, 1.0));
        let row = pq.model.constraint("reduction_2[c1,o1]").unwrap();
        assert_eq!(row.linear.coef(q), -85.0);
    }

    #[test]
    fn zero_flow_point_is_feasible_with_zero_objective() {
        let pq = build_pq(Arc::new(fixtures::h1())).unwrap();
        let p = pq.zero_flow_point();
        let rep = pq.model.is_feasible(&p, 1e-9).unwrap();
        assert!(rep.feasible, "{rep:?}");
        assert_eq!(pq.model.objective_value(&p).unwrap(), 0.0);
    }

    #[test]
    fn simplex_violation_is_reported() {
        let pq = build_pq(Arc::new(fixtures::h1())).unwrap();
        let mut p = pq.zero_flow_point();
        p[pq.q("i1", "l1").unwrap()] += 0.5;
        let rep = pq.model.is_feasible(&p, 1e-6).unwrap();
        assert!(!rep.feasible);
        assert_eq!(rep.worst.as_deref(), Some("simplex[l1]"));
    }

    #[test]
    fn rebuild_keeps_deactivated_rows() {
        let mut pq = build_pq(Arc::new(fixtures::h1())).unwrap();
        assert_eq!(pq.rebuild().unwrap(), pq);
        pq.set_group_active(groups::PATH_DEFINITION, false);
        let again = pq.rebuild().unwrap();
        assert!(again.group(groups::PATH_DEFINITION).iter().all(|n| !again.model.constraint(n).unwrap().active));

        let mut net = (**pq.network()).clone();
        net.insert_node(
            Node::new(NodeLayer::Output, "j3").with_capacity(None, Some(50.0)).with_cost(12.0).with_attr(QUALITY_UPPER, &[("k", 2.0)]),
        )
        .unwrap();
        net.insert_edge(Edge::new("l1", "j3")).unwrap();
        let grown = pq.rebuild_with(Arc::new(net)).unwrap();
        assert!(grown.model.constraint("output_capacity[j3]").is_ok());
        assert!(!grown.model.constraint("path_definition[i1,l1,j1]").unwrap().active);
        assert!(grown.model.constraint("path_definition[i1,l1,j3]").unwrap().active);
    }
}
