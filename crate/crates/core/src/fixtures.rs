//! Small reference networks used by tests, examples and the CLI.

use crate::network::{Edge, Network, Node, NodeLayer, QUALITY, QUALITY_UPPER};

/// Haverly's first pooling instance. Its global optimum is -400.
pub fn h1() -> Network {
    let mut net = Network::new("h1");
    let inputs = [("i1", 3.0, 6.0), ("i2", 1.0, 16.0), ("i3", 2.0, 10.0)];
    for (name, quality, cost) in inputs {
        net.insert_node(Node::new(NodeLayer::Input, name).with_cost(cost).with_attr(QUALITY, &[("k", quality)]))
            .expect("fresh name");
    }
    net.insert_node(Node::new(NodeLayer::Pool, "l1")).expect("fresh name");
    let outputs = [("j1", 2.5, 9.0, 100.0), ("j2", 1.5, 15.0, 200.0)];
    for (name, bound, price, demand) in outputs {
        net.insert_node(
            Node::new(NodeLayer::Output, name)
                .with_capacity(None, Some(demand))
                .with_cost(price)
                .with_attr(QUALITY_UPPER, &[("k", bound)]),
        )
        .expect("fresh name");
    }
    for (a, b) in [("i1", "l1"), ("i2", "l1"), ("l1", "j1"), ("l1", "j2"), ("i3", "j1"), ("i3", "j2")] {
        net.insert_edge(Edge::new(a, b)).expect("endpoints exist");
    }
    net
}

/// A three-node slice of the adhya4 instance: crude `c1` feeding pool `o1` feeding product `p1`.
pub fn adhya4_fragment() -> Network {
    let mut net = Network::new("adhya4");
    let quality = [("q1", 0.5), ("q2", 1.9), ("q3", 1.3), ("q4", 1.0)];
    net.insert_node(
        Node::new(NodeLayer::Input, "c1").with_capacity(Some(0.0), Some(85.0)).with_cost(15.0).with_attr(QUALITY, &quality),
    )
    .expect("fresh name");
    net.insert_node(Node::new(NodeLayer::Pool, "o1").with_capacity(Some(0.0), Some(85.0))).expect("fresh name");
    net.insert_node(
        Node::new(NodeLayer::Output, "p1")
            .with_capacity(Some(0.0), Some(15.0))
            .with_cost(10.0)
            .with_attr(QUALITY_UPPER, &[("q1", 1.2), ("q2", 1.7), ("q3", 1.4), ("q4", 1.7)]),
    )
    .expect("fresh name");
    net.insert_edge(Edge::new("c1", "o1").with_capacity(None, Some(85.0))).expect("endpoints exist");
    net.insert_edge(Edge::new("o1", "p1")).expect("endpoints exist");
    net
}
