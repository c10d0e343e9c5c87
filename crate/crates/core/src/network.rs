//! Layered pooling network: inputs feed pools and outputs, pools feed outputs.
//!
//! The network keeps the user data exactly as given. Absent capacity bounds stay
//! absent here; they are normalised to `[0, +inf)` only when a model is built.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::NetworkError;

/// Attribute map of a node, e.g. `"quality" -> {"q1": 0.5}`.
pub type NodeAttr = BTreeMap<String, BTreeMap<String, f64>>;
/// Free-form edge attributes.
pub type EdgeAttr = BTreeMap<String, serde_json::Value>;

pub const QUALITY: &str = "quality";
pub const QUALITY_UPPER: &str = "quality_upper";
pub const QUALITY_LOWER: &str = "quality_lower";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeLayer {
    Input = 0,
    Pool = 1,
    Output = 2,
}

impl NodeLayer {
    pub fn from_index(index: u8) -> Option<Self> {
        match index {
            0 => Some(NodeLayer::Input),
            1 => Some(NodeLayer::Pool),
            2 => Some(NodeLayer::Output),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

impl Serialize for NodeLayer {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.index())
    }
}

impl<'de> Deserialize<'de> for NodeLayer {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let index = u8::deserialize(deserializer)?;
        NodeLayer::from_index(index)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown layer {index}, expected 0, 1 or 2")))
    }
}

/// Lower/upper capacity pair; `None` means "not given".
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Capacity(pub Option<f64>, pub Option<f64>);

impl Capacity {
    pub fn new(lower: Option<f64>, upper: Option<f64>) -> Self {
        Capacity(lower, upper)
    }

    pub fn lower(&self) -> Option<f64> {
        self.0
    }

    pub fn upper(&self) -> Option<f64> {
        self.1
    }

    /// Lower bound with the absent value read as 0.
    pub fn effective_lower(&self) -> f64 {
        self.0.unwrap_or(0.0)
    }

    /// Upper bound with the absent value read as +inf.
    pub fn effective_upper(&self) -> f64 {
        self.1.unwrap_or(f64::INFINITY)
    }

    fn validate(&self) -> bool {
        let lo = self.effective_lower();
        let hi = self.effective_upper();
        let finite_or_absent = |v: Option<f64>| v.is_none_or(|v| !v.is_nan() && v >= 0.0);
        finite_or_absent(self.0) && finite_or_absent(self.1) && lo.is_finite() && lo <= hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub layer: NodeLayer,
    pub capacity: Capacity,
    pub cost: f64,
    #[serde(default)]
    pub attr: NodeAttr,
}

impl Node {
    pub fn new(layer: NodeLayer, name: impl Into<String>) -> Self {
        Node { name: name.into(), layer, capacity: Capacity::default(), cost: 0.0, attr: NodeAttr::new() }
    }

    pub fn with_capacity(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.capacity = Capacity(lower, upper);
        self
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_attr(mut self, key: &str, values: &[(&str, f64)]) -> Self {
        self.attr
            .insert(key.to_string(), values.iter().map(|(k, v)| (k.to_string(), *v)).collect());
        self
    }

    fn attr_map(&self, key: &str) -> Option<&BTreeMap<String, f64>> {
        self.attr.get(key)
    }

    /// Input quality `C_ik`.
    pub fn quality(&self, k: &str) -> Option<f64> {
        self.attr_map(QUALITY).and_then(|m| m.get(k).copied())
    }

    /// Output upper quality bound `P^U_jk`.
    pub fn quality_upper(&self, k: &str) -> Option<f64> {
        self.attr_map(QUALITY_UPPER).and_then(|m| m.get(k).copied())
    }

    /// Output lower quality bound `P^L_jk`.
    pub fn quality_lower(&self, k: &str) -> Option<f64> {
        self.attr_map(QUALITY_LOWER).and_then(|m| m.get(k).copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub destination: String,
    pub capacity: Capacity,
    #[serde(default)]
    pub cost: f64,
    #[serde(default)]
    pub fixed_cost: f64,
    #[serde(default)]
    pub attr: EdgeAttr,
}

impl Edge {
    pub fn new(source: impl Into<String>, destination: impl Into<String>) -> Self {
        Edge {
            source: source.into(),
            destination: destination.into(),
            capacity: Capacity::default(),
            cost: 0.0,
            fixed_cost: 0.0,
            attr: EdgeAttr::new(),
        }
    }

    pub fn with_capacity(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.capacity = Capacity(lower, upper);
        self
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = cost;
        self
    }
}

/// Whether an edge between the two layers takes part in the PQ-formulation.
pub fn is_pq_edge(from: NodeLayer, to: NodeLayer) -> bool {
    matches!(
        (from, to),
        (NodeLayer::Input, NodeLayer::Pool) | (NodeLayer::Input, NodeLayer::Output) | (NodeLayer::Pool, NodeLayer::Output)
    )
}

/// A pooling network. Nodes and edges iterate in name order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Network {
    name: String,
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<(String, String), Edge>,
    // (destination, source) pairs
    reverse: BTreeSet<(String, String)>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl Network {
    pub fn new(name: impl Into<String>) -> Self {
        Network { name: name.into(), ..Default::default() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_node(
        &mut self,
        layer: NodeLayer,
        name: &str,
        capacity_lower: Option<f64>,
        capacity_upper: Option<f64>,
        cost: f64,
        attr: NodeAttr,
    ) -> Result<&mut Self, NetworkError> {
        let node = Node { name: name.to_string(), layer, capacity: Capacity(capacity_lower, capacity_upper), cost, attr };
        self.insert_node(node)
    }

    pub fn insert_node(&mut self, node: Node) -> Result<&mut Self, NetworkError> {
        if self.nodes.contains_key(&node.name) {
            return Err(NetworkError::DuplicateName(node.name));
        }
        if !node.capacity.validate() {
            return Err(NetworkError::InvalidBounds(node.name));
        }
        self.nodes.insert(node.name.clone(), node);
        Ok(self)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add_edge(
        &mut self,
        src: &str,
        dst: &str,
        capacity_lower: Option<f64>,
        capacity_upper: Option<f64>,
        cost: f64,
        fixed_cost: f64,
        attr: EdgeAttr,
    ) -> Result<&mut Self, NetworkError> {
        let edge = Edge {
            source: src.to_string(),
            destination: dst.to_string(),
            capacity: Capacity(capacity_lower, capacity_upper),
            cost,
            fixed_cost,
            attr,
        };
        self.insert_edge(edge)
    }

    pub fn insert_edge(&mut self, edge: Edge) -> Result<&mut Self, NetworkError> {
        for end in [&edge.source, &edge.destination] {
            if !self.nodes.contains_key(end) {
                return Err(NetworkError::UnknownNode(end.clone()));
            }
        }
        let key = (edge.source.clone(), edge.destination.clone());
        if self.edges.contains_key(&key) {
            return Err(NetworkError::DuplicateEdge(key.0, key.1));
        }
        if !edge.capacity.validate() {
            return Err(NetworkError::InvalidBounds(format!("{}->{}", key.0, key.1)));
        }
        self.reverse.insert((key.1.clone(), key.0.clone()));
        self.edges.insert(key, edge);
        Ok(self)
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.nodes.get(name)
    }

    pub fn edge(&self, src: &str, dst: &str) -> Option<&Edge> {
        self.edges.get(&(src.to_string(), dst.to_string()))
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// True when the edge connects a PQ-relevant layer pair. Other edges are kept
    /// but ignored by the formulation.
    pub fn is_pq_relevant(&self, edge: &Edge) -> bool {
        match (self.nodes.get(&edge.source), self.nodes.get(&edge.destination)) {
            (Some(a), Some(b)) => is_pq_edge(a.layer, b.layer),
            _ => false,
        }
    }

    pub fn pq_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values().filter(|e| self.is_pq_relevant(e))
    }

    pub fn ignored_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values().filter(|e| !self.is_pq_relevant(e))
    }

    fn filter_layer<'a>(
        &'a self,
        names: Vec<&'a str>,
        layer: Option<NodeLayer>,
    ) -> Vec<&'a Node> {
        names
            .into_iter()
            .filter_map(|n| self.nodes.get(n))
            .filter(|n| layer.is_none_or(|l| n.layer == l))
            .collect()
    }

    /// Nodes reachable through one edge from `name`, sorted by name.
    pub fn successors(&self, name: &str, layer: Option<NodeLayer>) -> Result<Vec<&Node>, NetworkError> {
        if !self.nodes.contains_key(name) {
            return Err(NetworkError::UnknownNode(name.to_string()));
        }
        let from = (name.to_string(), String::new());
        let names = self.edges.range(from..).take_while(|((s, _), _)| s == name).map(|((_, d), _)| d.as_str()).collect();
        Ok(self.filter_layer(names, layer))
    }

    /// Nodes with an edge into `name`, sorted by name.
    pub fn predecessors(&self, name: &str, layer: Option<NodeLayer>) -> Result<Vec<&Node>, NetworkError> {
        if !self.nodes.contains_key(name) {
            return Err(NetworkError::UnknownNode(name.to_string()));
        }
        let from = (name.to_string(), String::new());
        let names = self.reverse.range(from..).take_while(|(d, _)| d == name).map(|(_, s)| s.as_str()).collect();
        Ok(self.filter_layer(names, layer))
    }

    fn layer_names(&self, layer: NodeLayer) -> Vec<&str> {
        self.nodes.values().filter(|n| n.layer == layer).map(|n| n.name.as_str()).collect()
    }

    /// The input set `I`.
    pub fn inputs(&self) -> Vec<&str> {
        self.layer_names(NodeLayer::Input)
    }

    /// The pool set `L`.
    pub fn pools(&self) -> Vec<&str> {
        self.layer_names(NodeLayer::Pool)
    }

    /// The output set `J`.
    pub fn outputs(&self) -> Vec<&str> {
        self.layer_names(NodeLayer::Output)
    }

    /// The quality set `K`: sorted union of input quality keys.
    pub fn qualities(&self) -> Vec<String> {
        let mut keys = BTreeSet::new();
        for node in self.nodes.values().filter(|n| n.layer == NodeLayer::Input) {
            if let Some(q) = node.attr.get(QUALITY) {
                keys.extend(q.keys().cloned());
            }
        }
        keys.into_iter().collect()
    }

    fn neighbours(&self, name: &str, layer: NodeLayer, incoming: bool) -> Vec<&str> {
        let found = if incoming { self.predecessors(name, Some(layer)) } else { self.successors(name, Some(layer)) };
        found.map(|v| v.into_iter().map(|n| n.name.as_str()).collect()).unwrap_or_default()
    }

    /// `I_l`: inputs with an edge into pool `l`.
    pub fn pool_inputs(&self, pool: &str) -> Vec<&str> {
        self.neighbours(pool, NodeLayer::Input, true)
    }

    /// `J_l`: outputs fed by pool `l`.
    pub fn pool_outputs(&self, pool: &str) -> Vec<&str> {
        self.neighbours(pool, NodeLayer::Output, false)
    }

    /// `I_j`: inputs with a by-pass edge into output `j`.
    pub fn output_inputs(&self, output: &str) -> Vec<&str> {
        self.neighbours(output, NodeLayer::Input, true)
    }

    /// Pools with an edge into output `j`.
    pub fn output_pools(&self, output: &str) -> Vec<&str> {
        self.neighbours(output, NodeLayer::Pool, true)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let doc = NetworkDoc {
            name: self.name.clone(),
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.values().cloned().collect(),
        };
        let mut out = serde_json::to_vec_pretty(&doc).expect("network serialization is infallible");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> Result<Network, NetworkError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let doc: NetworkDoc = serde_path_to_error::deserialize(de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            NetworkError::Parse { line: inner.line(), path, message: inner.to_string() }
        })?;
        let mut net = Network::new(doc.name);
        for node in doc.nodes {
            net.insert_node(node)?;
        }
        for edge in doc.edges {
            net.insert_edge(edge)?;
        }
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adhya4_fragment() -> Network {
        let mut net = Network::new("adhya4");
        let quality = [("q1", 0.5), ("q2", 1.9), ("q3", 1.3), ("q4", 1.0)];
        net.insert_node(
            Node::new(NodeLayer::Input, "c1").with_capacity(Some(0.0), Some(85.0)).with_cost(15.0).with_attr(QUALITY, &quality),
        )
        .unwrap();
        net.insert_node(Node::new(NodeLayer::Pool, "o1").with_capacity(Some(0.0), Some(85.0))).unwrap();
        net.insert_node(
            Node::new(NodeLayer::Output, "p1")
                .with_capacity(Some(0.0), Some(15.0))
                .with_cost(10.0)
                .with_attr(QUALITY_UPPER, &[("q1", 1.2), ("q2", 1.7), ("q3", 1.4), ("q4", 1.7)]),
        )
        .unwrap();
        net.insert_edge(Edge::new("c1", "o1").with_capacity(None, Some(85.0))).unwrap();
        net
    }

    #[test]
    fn stores_input_node() {
        let net = adhya4_fragment();
        let c1 = net.node("c1").unwrap();
        assert_eq!(c1.capacity.upper(), Some(85.0));
        assert_eq!(c1.cost, 15.0);
        assert_eq!(c1.quality("q2"), Some(1.9));
        assert_eq!(net.node("o1").unwrap().cost, 0.0);
        assert!(net.successors("p1", None).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_nodes() {
        let mut net = adhya4_fragment();
        let err = net.add_node(NodeLayer::Pool, "x", Some(5.0), Some(3.0), 0.0, NodeAttr::new()).unwrap_err();
        assert!(matches!(err, NetworkError::InvalidBounds(_)));
        let err = net.add_node(NodeLayer::Pool, "o1", None, None, 0.0, NodeAttr::new()).unwrap_err();
        assert!(matches!(err, NetworkError::DuplicateName(_)));
    }

    #[test]
    fn edges_flags_and_errors() {
        let mut net = adhya4_fragment();
        net.add_node(NodeLayer::Pool, "o2", None, None, 0.0, NodeAttr::new()).unwrap();
        net.add_edge("o1", "o2", None, None, 0.0, 0.0, EdgeAttr::new()).unwrap();
        assert!(net.is_pq_relevant(net.edge("c1", "o1").unwrap()));
        assert!(!net.is_pq_relevant(net.edge("o1", "o2").unwrap()));
        assert_eq!(net.ignored_edges().count(), 1);
        let err = net.add_edge("c1", "missing", None, None, 0.0, 0.0, EdgeAttr::new()).unwrap_err();
        assert!(matches!(err, NetworkError::UnknownNode(n) if n == "missing"));
        let err = net.add_edge("c1", "o1", None, None, 0.0, 0.0, EdgeAttr::new()).unwrap_err();
        assert!(matches!(err, NetworkError::DuplicateEdge(..)));
    }

    #[test]
    fn json_round_trip_keeps_absent_capacity() {
        let net = adhya4_fragment();
        let text = String::from_utf8(net.to_json()).unwrap();
        assert!(text.contains("null"));
        let back = Network::from_json(text.as_bytes()).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.edge("c1", "o1").unwrap().capacity.lower(), None);
    }

    #[test]
    fn parse_error_names_missing_field() {
        let doc = r#"{"name": "x", "nodes": [{"name": "a", "capacity": [null, null], "cost": 1.0}], "edges": []}"#;
        let err = Network::from_json(doc.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("layer"), "{msg}");
        assert!(msg.contains("nodes[0]"), "{msg}");
    }
}
