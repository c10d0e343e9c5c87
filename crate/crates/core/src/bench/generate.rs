use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::BenchError;
use crate::network::{Edge, Network, Node, NodeLayer, QUALITY, QUALITY_UPPER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Haverly-style blocks: few pools, bypass-heavy edge mix, one or two qualities.
    SparseHaverly,
    /// Complete input-pool and pool-output layers trimmed to the requested edge count.
    DenseRand,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::SparseHaverly => "sparse_haverly",
            Family::DenseRand => "dense_rand",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sparse_haverly" => Ok(Family::SparseHaverly),
            "dense_rand" => Ok(Family::DenseRand),
            other => Err(BenchError::InfeasibleSpec(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub inputs: usize,
    pub pools: usize,
    pub outputs: usize,
    pub qualities: usize,
    pub edges: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(family: Family, inputs: usize, pools: usize, outputs: usize, qualities: usize, edges: usize, seed: u64) -> Self {
        GenSpec { family, inputs, pools, outputs, qualities, edges, seed }
    }

    pub fn max_edges(&self) -> usize {
        self.inputs * self.pools + self.inputs * self.outputs + self.pools * self.outputs
    }

    /// Every pool needs one incoming and one outgoing edge.
    pub fn min_edges(&self) -> usize {
        2 * self.pools
    }

    pub fn name(&self) -> String {
        format!(
            "{}_{}_{}_{}_{}_{}_s{}",
            self.family, self.inputs, self.pools, self.outputs, self.qualities, self.edges, self.seed
        )
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.inputs == 0 || self.pools == 0 || self.outputs == 0 || self.qualities == 0 {
            return Err(BenchError::InfeasibleSpec("all counts must be positive".into()));
        }
        if self.edges < self.min_edges() {
            return Err(BenchError::InfeasibleSpec(format!(
                "{} edges cannot connect {} pools (need at least {})",
                self.edges,
                self.pools,
                self.min_edges()
            )));
        }
        if self.edges > self.max_edges() {
            return Err(BenchError::InfeasibleSpec(format!(
                "{} edges exceed the {} possible layered edges",
                self.edges,
                self.max_edges()
            )));
        }
        Ok(())
    }
}

type Arc2 = (NodeLayer, usize, NodeLayer, usize);

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn input(i: usize) -> String {
    format!("i{}", i + 1)
}

fn pool(l: usize) -> String {
    format!("l{}", l + 1)
}

fn output(j: usize) -> String {
    format!("j{}", j + 1)
}

fn quality(k: usize) -> String {
    format!("k{}", k + 1)
}

fn all_arcs(spec: &GenSpec) -> Vec<Arc2> {
    let mut out = Vec::with_capacity(spec.max_edges());
    for i in 0..spec.inputs {
        for l in 0..spec.pools {
            out.push((NodeLayer::Input, i, NodeLayer::Pool, l));
        }
    }
    for i in 0..spec.inputs {
        for j in 0..spec.outputs {
            out.push((NodeLayer::Input, i, NodeLayer::Output, j));
        }
    }
    for l in 0..spec.pools {
        for j in 0..spec.outputs {
            out.push((NodeLayer::Pool, l, NodeLayer::Output, j));
        }
    }
    out
}

/// Pool in/out degree of an arc set.
fn pool_degrees(spec: &GenSpec, arcs: &BTreeSet<Arc2>) -> (Vec<usize>, Vec<usize>) {
    let mut ins = vec![0; spec.pools];
    let mut outs = vec![0; spec.pools];
    for &(a, x, b, y) in arcs {
        if b == NodeLayer::Pool {
            ins[y] += 1;
        }
        if a == NodeLayer::Pool {
            outs[x] += 1;
        }
    }
    (ins, outs)
}

/// Removes random arcs (bypasses first when `prefer_bypass`) down to `target`, never
/// disconnecting a pool.
fn trim(spec: &GenSpec, arcs: &mut BTreeSet<Arc2>, target: usize, prefer_bypass: bool, rng: &mut ChaCha8Rng) {
    let mut order: Vec<Arc2> = arcs.iter().copied().collect();
    order.shuffle(rng);
    if prefer_bypass {
        order.sort_by_key(|&(a, _, b, _)| !(a == NodeLayer::Input && b == NodeLayer::Output));
    }
    let (mut ins, mut outs) = pool_degrees(spec, arcs);
    for arc in order {
        if arcs.len() <= target {
            break;
        }
        let (a, x, b, y) = arc;
        if b == NodeLayer::Pool && ins[y] <= 1 || a == NodeLayer::Pool && outs[x] <= 1 {
            continue;
        }
        if b == NodeLayer::Pool {
            ins[y] -= 1;
        }
        if a == NodeLayer::Pool {
            outs[x] -= 1;
        }
        arcs.remove(&arc);
    }
}

/// Adds random unused arcs up to `target`, drawing bypasses with probability `bypass_share`.
fn fill(spec: &GenSpec, arcs: &mut BTreeSet<Arc2>, target: usize, bypass_share: f64, rng: &mut ChaCha8Rng) {
    let (mut bypass, mut other): (Vec<Arc2>, Vec<Arc2>) = all_arcs(spec)
        .into_iter()
        .filter(|a| !arcs.contains(a))
        .partition(|&(a, _, b, _)| a == NodeLayer::Input && b == NodeLayer::Output);
    bypass.shuffle(rng);
    other.shuffle(rng);
    while arcs.len() < target {
        let take_bypass = !bypass.is_empty() && (other.is_empty() || rng.gen_bool(bypass_share));
        let arc = if take_bypass { bypass.pop() } else { other.pop() };
        arcs.insert(arc.expect("target within the layered edge count"));
    }
}

fn sparse_arcs(spec: &GenSpec, rng: &mut ChaCha8Rng) -> BTreeSet<Arc2> {
    let mut arcs = BTreeSet::new();
    for l in 0..spec.pools {
        let block_inputs: Vec<usize> = (0..spec.inputs).filter(|i| i % spec.pools == l).collect();
        let block_outputs: Vec<usize> = (0..spec.outputs).filter(|j| j % spec.pools == l).collect();
        let feeders = if block_inputs.is_empty() { vec![rng.gen_range(0..spec.inputs)] } else { block_inputs.clone() };
        let (pool_feeders, bypass) = match feeders.split_last() {
            Some((last, rest)) if !rest.is_empty() => (rest.to_vec(), Some(*last)),
            _ => (feeders.clone(), None),
        };
        let targets = if block_outputs.is_empty() { vec![rng.gen_range(0..spec.outputs)] } else { block_outputs };
        for &i in &pool_feeders {
            arcs.insert((NodeLayer::Input, i, NodeLayer::Pool, l));
        }
        for &j in &targets {
            arcs.insert((NodeLayer::Pool, l, NodeLayer::Output, j));
            if let Some(i) = bypass {
                arcs.insert((NodeLayer::Input, i, NodeLayer::Output, j));
            }
        }
    }
    if arcs.len() > spec.edges {
        trim(spec, &mut arcs, spec.edges, true, rng);
    }
    fill(spec, &mut arcs, spec.edges, 0.5, rng);
    arcs
}

fn dense_arcs(spec: &GenSpec, rng: &mut ChaCha8Rng) -> BTreeSet<Arc2> {
    let mut arcs: BTreeSet<Arc2> =
        all_arcs(spec).into_iter().filter(|&(a, _, b, _)| !(a == NodeLayer::Input && b == NodeLayer::Output)).collect();
    if arcs.len() > spec.edges {
        trim(spec, &mut arcs, spec.edges, false, rng);
    }
    fill(spec, &mut arcs, spec.edges, 1.0, rng);
    arcs
}

fn arc_names(arc: &Arc2) -> (String, String) {
    let name = |layer: NodeLayer, idx: usize| match layer {
        NodeLayer::Input => input(idx),
        NodeLayer::Pool => pool(idx),
        NodeLayer::Output => output(idx),
    };
    (name(arc.0, arc.1), name(arc.2, arc.3))
}

/// Draws a seeded layered pooling network with the requested cardinalities.
pub fn generate_instance(spec: &GenSpec) -> Result<Network, BenchError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let keys: Vec<String> = (0..spec.qualities).map(quality).collect();
    let mut net = Network::new(spec.name());
    let dense = spec.family == Family::DenseRand;

    for i in 0..spec.inputs {
        let values: Vec<(String, f64)> = keys.iter().map(|k| (k.clone(), round2(rng.gen_range(0.5..3.5)))).collect();
        let refs: Vec<(&str, f64)> = values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mean = values.iter().map(|(_, v)| v).sum::<f64>() / values.len() as f64;
        let cost = round2((18.0 - 3.5 * mean + rng.gen_range(-1.5..1.5)).max(1.0));
        let supply = if dense || rng.gen_bool(0.5) { Some(round2(rng.gen_range(50.0..300.0))) } else { None };
        let node = Node::new(NodeLayer::Input, input(i)).with_cost(cost).with_capacity(None, supply).with_attr(QUALITY, &refs);
        net.insert_node(node).map_err(|e| BenchError::InfeasibleSpec(e.to_string()))?;
    }
    for l in 0..spec.pools {
        let size = if dense { Some(round2(rng.gen_range(100.0..400.0))) } else { None };
        net.insert_node(Node::new(NodeLayer::Pool, pool(l)).with_capacity(None, size))
            .map_err(|e| BenchError::InfeasibleSpec(e.to_string()))?;
    }
    for j in 0..spec.outputs {
        let values: Vec<(String, f64)> = keys.iter().map(|k| (k.clone(), round2(rng.gen_range(1.2..2.6)))).collect();
        let refs: Vec<(&str, f64)> = values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let price = round2(rng.gen_range(9.0..18.0));
        let demand = round2(rng.gen_range(50.0..250.0));
        let node =
            Node::new(NodeLayer::Output, output(j)).with_cost(price).with_capacity(None, Some(demand)).with_attr(QUALITY_UPPER, &refs);
        net.insert_node(node).map_err(|e| BenchError::InfeasibleSpec(e.to_string()))?;
    }

    let arcs = if dense { dense_arcs(spec, &mut rng) } else { sparse_arcs(spec, &mut rng) };
    for arc in &arcs {
        let (src, dst) = arc_names(arc);
        net.insert_edge(Edge::new(src, dst)).map_err(|e| BenchError::InfeasibleSpec(e.to_string()))?;
    }
    Ok(net)
}
