//! Seeded random instances.

use flowcore::heap::{Heap, HeapValue, Record, State};
use flowcore::{FlowDomain, FlowGraph, FlowValue, Inflow, InflowedGraph, NodeId, NodeLabel};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct Shape {
    pub max_nodes: usize,
    pub max_sinks: usize,
    pub dag: bool,
    /// Probability of each possible edge.
    pub density: f64,
    /// Probability that a node receives inflow.
    pub inflow_rate: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_nodes: 8,
            max_sinks: 2,
            dag: false,
            density: 0.25,
            inflow_rate: 0.3,
        }
    }
}

pub fn node(i: usize) -> NodeId {
    NodeId::from(format!("v{i}"))
}

pub fn sink(i: usize) -> NodeId {
    NodeId::from(format!("s{i}"))
}

/// A random graph with edge values drawn from `edges` and inflow values
/// from `inflows`. Every node carries the label `label`.
pub fn graph<R: Rng>(
    rng: &mut R,
    shape: &Shape,
    edges: &[FlowValue],
    inflows: &[FlowValue],
    label: &NodeLabel,
    d: &FlowDomain,
) -> InflowedGraph {
    let n = rng.gen_range(1..=shape.max_nodes);
    let k = rng.gen_range(0..=shape.max_sinks);
    let mut g = FlowGraph::new();
    for i in 0..n {
        g.add_node(node(i), label.clone()).expect("fresh");
    }
    for j in 0..k {
        g.add_sink(sink(j)).expect("fresh");
    }
    let targets: Vec<NodeId> = (0..n).map(node).chain((0..k).map(sink)).collect();
    for i in 0..n {
        for (j, t) in targets.iter().enumerate() {
            if shape.dag && j < n && j <= i {
                continue;
            }
            if rng.gen_bool(shape.density) {
                let v = edges.choose(rng).expect("edge values").clone();
                g.set_edge(&node(i), t, v).expect("declared");
            }
        }
    }
    let mut inflow = Inflow::new();
    for i in 0..n {
        if rng.gen_bool(shape.inflow_rate) {
            inflow.insert(node(i), inflows.choose(rng).expect("inflow values").clone());
        }
    }
    InflowedGraph::new(g, inflow, d).expect("inflow on nodes")
}

/// A random tree rooted at `v0` with unit edges and root inflow 1; some
/// leaves point to sinks, and with probability `extra` a second parent
/// edge is added to a node.
pub fn tree<R: Rng>(rng: &mut R, max_nodes: usize, max_sinks: usize, extra: f64) -> InflowedGraph {
    let n = rng.gen_range(1..=max_nodes);
    let k = rng.gen_range(0..=max_sinks);
    let mut g = FlowGraph::new();
    for i in 0..n {
        g.add_node(node(i), NodeLabel::Unit).expect("fresh");
    }
    for j in 0..k {
        g.add_sink(sink(j)).expect("fresh");
    }
    let one = FlowValue::count(1);
    for i in 1..n {
        let p = rng.gen_range(0..i);
        g.set_edge(&node(p), &node(i), one.clone()).expect("declared");
        if rng.gen_bool(extra) {
            let q = rng.gen_range(0..n);
            g.set_edge(&node(q), &node(i), one.clone()).expect("declared");
        }
    }
    for j in 0..k {
        let p = rng.gen_range(0..n);
        g.set_edge(&node(p), &sink(j), one.clone()).expect("declared");
    }
    let inflow = Inflow::from([(node(0), one)]);
    InflowedGraph::new(g, inflow, &FlowDomain::PathCount).expect("inflow on nodes")
}

/// A random subset of the nodes of `h`.
pub fn part<R: Rng>(rng: &mut R, h: &InflowedGraph) -> BTreeSet<NodeId> {
    h.graph().nodes().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}

/// Assigns every node of `h` to one of `k` parts.
pub fn partition<R: Rng>(rng: &mut R, h: &InflowedGraph, k: usize) -> Vec<BTreeSet<NodeId>> {
    let mut parts = vec![BTreeSet::new(); k];
    for n in h.graph().nodes() {
        parts[rng.gen_range(0..k)].insert(n.clone());
    }
    parts
}

/// Sets one random edge of `h` (from a node of `h` to a node, a sink, or
/// `extra_target`) to a random value in `values`, which may include zero.
pub fn mutate_edge<R: Rng>(
    rng: &mut R,
    h: &InflowedGraph,
    values: &[FlowValue],
    extra_target: Option<&NodeId>,
    d: &FlowDomain,
) -> Option<InflowedGraph> {
    let g = h.graph();
    let nodes: Vec<&NodeId> = g.nodes().collect();
    let src = (*nodes.choose(rng)?).clone();
    let mut targets: Vec<NodeId> = g.nodes().chain(g.sinks().iter()).cloned().collect();
    targets.extend(extra_target.cloned());
    let dst = targets.choose(rng)?.clone();
    let mut g2 = g.clone();
    if !g2.contains(&dst) && !g2.sinks().contains(&dst) {
        g2.add_sink(dst.clone()).ok()?;
    }
    g2.set_edge(&src, &dst, values.choose(rng)?.clone()).ok()?;
    InflowedGraph::new(g2, h.inflow().clone(), d).ok()
}

/// Adjoins a fresh node `f` with zero inflow and one edge into `h`'s
/// nodes or sinks.
pub fn add_fresh<R: Rng>(rng: &mut R, h: &InflowedGraph, f: &NodeId, v: FlowValue, d: &FlowDomain) -> InflowedGraph {
    let mut g = h.graph().clone();
    let targets: Vec<NodeId> = g.nodes().chain(g.sinks().iter()).cloned().collect();
    g.add_node(f.clone(), NodeLabel::Unit).expect("fresh node");
    if let Some(t) = targets.choose(rng) {
        g.set_edge(f, t, v).expect("declared");
    }
    InflowedGraph::new(g, h.inflow().clone(), d).expect("inflow on nodes")
}

/// `h` without sinks that no edge targets.
pub fn prune_idle_sinks(h: &InflowedGraph, d: &FlowDomain) -> InflowedGraph {
    let g = h.graph();
    let mut out = FlowGraph::new();
    for n in g.nodes() {
        out.add_node(n.clone(), g.label(n).expect("node").clone()).expect("fresh");
    }
    for (src, dst, v) in g.edges() {
        if !g.contains(dst) && !out.sinks().contains(dst) {
            out.add_sink(dst.clone()).expect("fresh");
        }
        out.set_edge(src, dst, v.clone()).expect("declared");
    }
    InflowedGraph::new(out, h.inflow().clone(), d).expect("same nodes")
}

/// A state over `h` with idle sinks removed (a state's graph only has
/// sinks that its cells point to): one cell per node, plus extra cells
/// attached to random nodes and a few unmarked cells.
pub fn state<R: Rng>(rng: &mut R, h: &InflowedGraph, d: &FlowDomain) -> State {
    let h = &prune_idle_sinks(h, d);
    let mut heap = Heap::new();
    let mut nodemap = std::collections::BTreeMap::new();
    let nodes: Vec<NodeId> = h.graph().nodes().cloned().collect();
    for (i, n) in nodes.iter().enumerate() {
        heap.insert(n.clone(), Record::from([("id".to_string(), HeapValue::Int(i as i64))]));
        nodemap.insert(n.clone(), n.clone());
    }
    for j in 0..rng.gen_range(0..=2) {
        if let Some(n) = nodes.choose(rng) {
            let c = NodeId::from(format!("c{j}"));
            heap.insert(c.clone(), Record::new());
            nodemap.insert(c, n.clone());
        }
    }
    for j in 0..rng.gen_range(0..=2) {
        heap.insert(NodeId::from(format!("u{j}")), Record::new());
    }
    State::new(heap, h.clone(), nodemap).expect("well-formed state")
}

/// Splits the cells of `s` into `k` parts, keeping each node's cells
/// together.
pub fn cell_partition<R: Rng>(rng: &mut R, s: &State, k: usize) -> Vec<BTreeSet<NodeId>> {
    let mut parts = vec![BTreeSet::new(); k];
    let mut owner = std::collections::BTreeMap::new();
    for n in s.graph().graph().nodes() {
        owner.insert(n.clone(), rng.gen_range(0..k));
    }
    for a in s.heap().keys() {
        let p = match s.nodemap().get(a) {
            Some(n) => owner[n],
            None => rng.gen_range(0..k),
        };
        parts[p].insert(a.clone());
    }
    parts
}
