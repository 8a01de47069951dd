//! Partial graphs with flow-domain edge labels, capacities, flows and the
//! flow-graph separation algebra.

use crate::algebra::{FlowDomain, FlowDomainSpec, FlowValue, NodeLabel};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Node identifier. Ordered by name, which fixes every iteration order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(Arc<str>);

impl NodeId {
    pub fn new(s: &str) -> Self {
        NodeId(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId::new(s)
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(Arc::from(s))
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn ids<'a, I: IntoIterator<Item = &'a str>>(names: I) -> BTreeSet<NodeId> {
    names.into_iter().map(NodeId::new).collect()
}

/// Sparse map from nodes to flow values; absent entries are zero.
pub type Inflow = BTreeMap<NodeId, FlowValue>;

pub type EdgeMap = BTreeMap<NodeId, FlowValue>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node {0} declared twice")]
    DuplicateNode(NodeId),
    #[error("{0} is both a node and a sink")]
    NodeIsSink(NodeId),
    #[error("edge source {0} is not a node")]
    UnknownSource(NodeId),
    #[error("edge target {0} is neither a node nor a sink")]
    UnknownTarget(NodeId),
    #[error("inflow given for {0}, which is not a node")]
    InflowOutsideGraph(NodeId),
    #[error("node sets overlap at {0:?}")]
    Overlap(Vec<NodeId>),
}

/// A partial graph `(N, N°, λ, ε)`. Edge values equal to zero are never
/// stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowGraph {
    labels: BTreeMap<NodeId, NodeLabel>,
    sinks: BTreeSet<NodeId>,
    edges: BTreeMap<NodeId, EdgeMap>,
}

impl FlowGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, n: NodeId, label: NodeLabel) -> Result<(), GraphError> {
        if self.sinks.contains(&n) {
            return Err(GraphError::NodeIsSink(n));
        }
        if self.labels.contains_key(&n) {
            return Err(GraphError::DuplicateNode(n));
        }
        self.labels.insert(n, label);
        Ok(())
    }

    pub fn add_sink(&mut self, n: NodeId) -> Result<(), GraphError> {
        if self.labels.contains_key(&n) {
            return Err(GraphError::NodeIsSink(n));
        }
        self.sinks.insert(n);
        Ok(())
    }

    /// Sets `ε(src, dst)`; a zero value removes the edge.
    pub fn set_edge(&mut self, src: &NodeId, dst: &NodeId, v: FlowValue) -> Result<(), GraphError> {
        if !self.labels.contains_key(src) {
            return Err(GraphError::UnknownSource(src.clone()));
        }
        if !self.labels.contains_key(dst) && !self.sinks.contains(dst) {
            return Err(GraphError::UnknownTarget(dst.clone()));
        }
        if v.is_zero() {
            if let Some(out) = self.edges.get_mut(src) {
                out.remove(dst);
                if out.is_empty() {
                    self.edges.remove(src);
                }
            }
        } else {
            self.edges.entry(src.clone()).or_default().insert(dst.clone(), v);
        }
        Ok(())
    }

    pub fn set_label(&mut self, n: &NodeId, label: NodeLabel) {
        if let Some(l) = self.labels.get_mut(n) {
            *l = label;
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.labels.keys()
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.labels.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty() && self.sinks.is_empty()
    }

    pub fn contains(&self, n: &NodeId) -> bool {
        self.labels.contains_key(n)
    }

    pub fn sinks(&self) -> &BTreeSet<NodeId> {
        &self.sinks
    }

    pub fn label(&self, n: &NodeId) -> Option<&NodeLabel> {
        self.labels.get(n)
    }

    pub fn labels(&self) -> &BTreeMap<NodeId, NodeLabel> {
        &self.labels
    }

    pub fn edge(&self, src: &NodeId, dst: &NodeId) -> Option<&FlowValue> {
        self.edges.get(src).and_then(|m| m.get(dst))
    }

    pub fn out_edges(&self, n: &NodeId) -> EdgeMap {
        self.edges.get(n).cloned().unwrap_or_default()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId, &FlowValue)> {
        self.edges.iter().flat_map(|(s, m)| m.iter().map(move |(t, v)| (s, t, v)))
    }

    /// `G₁ ⊎ G₂`; fails iff the node sets overlap.
    pub fn disjoint_union(&self, other: &FlowGraph) -> Result<FlowGraph, GraphError> {
        let overlap: Vec<NodeId> = self.labels.keys().filter(|n| other.contains(n)).cloned().collect();
        if !overlap.is_empty() {
            return Err(GraphError::Overlap(overlap));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().map(|(k, v)| (k.clone(), v.clone())));
        let sinks = self
            .sinks
            .iter()
            .filter(|s| !other.contains(s))
            .chain(other.sinks.iter().filter(|s| !self.contains(s)))
            .cloned()
            .collect();
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|(k, v)| (k.clone(), v.clone())));
        Ok(FlowGraph { labels, sinks, edges })
    }

    /// Splits off the subgraph on `part`: edges leaving `part` become edges
    /// to sinks. Returns `(part, rest)` with `part ⊎ rest = self`.
    ///
    /// Sinks of `self` that no edge targets stay with `rest`, unless `rest`
    /// has no nodes.
    pub fn split(&self, part: &BTreeSet<NodeId>) -> (FlowGraph, FlowGraph) {
        let targeted: BTreeSet<&NodeId> = self.edges.values().flat_map(|m| m.keys()).collect();
        let rest_nodes: BTreeSet<NodeId> = self.labels.keys().filter(|n| !part.contains(*n)).cloned().collect();
        let build = |keep: &BTreeSet<NodeId>, idle_sinks: bool| {
            let mut g = FlowGraph::new();
            for n in keep {
                if let Some(l) = self.labels.get(n) {
                    g.labels.insert(n.clone(), l.clone());
                }
                if let Some(out) = self.edges.get(n) {
                    for t in out.keys() {
                        if !keep.contains(t) {
                            g.sinks.insert(t.clone());
                        }
                    }
                    g.edges.insert(n.clone(), out.clone());
                }
            }
            if idle_sinks {
                g.sinks.extend(self.sinks.iter().filter(|s| !targeted.contains(s)).cloned());
            }
            g
        };
        let part_nodes: BTreeSet<NodeId> = part.iter().filter(|n| self.contains(n)).cloned().collect();
        let rest_empty = rest_nodes.is_empty();
        (build(&part_nodes, rest_empty), build(&rest_nodes, !rest_empty))
    }
}

/// Capacity `cap(G)` on `N × (N ∪ N°)`, sparse with zero omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Capacity {
    rows: BTreeMap<NodeId, EdgeMap>,
}

impl Capacity {
    pub fn get(&self, src: &NodeId, dst: &NodeId) -> Option<&FlowValue> {
        self.rows.get(src).and_then(|m| m.get(dst))
    }

    pub fn value(&self, d: &FlowDomain, src: &NodeId, dst: &NodeId) -> FlowValue {
        self.get(src, dst).cloned().unwrap_or_else(|| d.zero())
    }

    pub fn row(&self, src: &NodeId) -> Option<&EdgeMap> {
        self.rows.get(src)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&NodeId, &NodeId, &FlowValue)> {
        self.rows.iter().flat_map(|(s, m)| m.iter().map(move |(t, v)| (s, t, v)))
    }
}

/// Least fixpoint of `cap(n,n′) = [n=n′]·1 + Σ ε(n,n″)·cap(n″,n′)`,
/// computed with the algebraic-path elimination over nodes.
pub fn capacity(g: &FlowGraph, d: &FlowDomain) -> Capacity {
    let nodes: Vec<&NodeId> = g.labels.keys().collect();
    let idx: BTreeMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = nodes.len();
    let zero = d.zero();
    let mut a: Vec<Vec<FlowValue>> = vec![vec![zero.clone(); n]; n];
    for (s, t, v) in g.edges() {
        if let Some(&j) = idx.get(t) {
            a[idx[s]][j] = v.clone();
        }
    }
    // After step k, a[i][j] sums paths of length ≥ 1 whose interior
    // nodes all have index ≤ k.
    for k in 0..n {
        let s = d.star(&a[k][k]);
        let col: Vec<FlowValue> = (0..n).map(|i| d.times(&a[i][k], &s)).collect();
        let row = a[k].clone();
        for i in 0..n {
            if col[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if row[j].is_zero() {
                    continue;
                }
                a[i][j] = d.plus(&a[i][j], &d.times(&col[i], &row[j]));
            }
        }
    }
    let one = d.one();
    let mut rows: BTreeMap<NodeId, EdgeMap> = BTreeMap::new();
    for i in 0..n {
        let mut row = EdgeMap::new();
        for j in 0..n {
            let v = if i == j { d.plus(&one, &a[i][j]) } else { a[i][j].clone() };
            if !v.is_zero() {
                row.insert(nodes[j].clone(), v);
            }
        }
        // cap(i, sink) = Σ_m cap(i, m)·ε(m, sink)
        let mut to_sinks: EdgeMap = EdgeMap::new();
        for (m, c) in &row {
            if let Some(out) = g.edges.get(m) {
                for (t, e) in out {
                    if g.sinks.contains(t) {
                        let add = d.times(c, e);
                        let cur = to_sinks.remove(t).unwrap_or_else(|| zero.clone());
                        let v = d.plus(&cur, &add);
                        if !v.is_zero() {
                            to_sinks.insert(t.clone(), v);
                        }
                    }
                }
            }
        }
        row.extend(to_sinks);
        if !row.is_empty() {
            rows.insert(nodes[i].clone(), row);
        }
    }
    Capacity { rows }
}

fn flow_with(cap: &Capacity, inflow: &Inflow, g: &FlowGraph, d: &FlowDomain) -> Inflow {
    let mut out = Inflow::new();
    for n in g.nodes() {
        let mut acc = d.zero();
        for (src, v) in inflow {
            if let Some(c) = cap.get(src, n) {
                acc = d.plus(&acc, &d.times(v, c));
            }
        }
        if !acc.is_zero() {
            out.insert(n.clone(), acc);
        }
    }
    out
}

/// `flow(in, G)(n) = Σ in(n′)·cap(n′, n)`, sparse.
pub fn flow(inflow: &Inflow, g: &FlowGraph, d: &FlowDomain) -> Inflow {
    flow_with(&capacity(g, d), inflow, g, d)
}

/// Total flow leaving `G` into each sink.
pub fn outflow(inflow: &Inflow, g: &FlowGraph, d: &FlowDomain) -> Inflow {
    let cap = capacity(g, d);
    let mut out = Inflow::new();
    for s in g.sinks() {
        let mut acc = d.zero();
        for (src, v) in inflow {
            if let Some(c) = cap.get(src, s) {
                acc = d.plus(&acc, &d.times(v, c));
            }
        }
        if !acc.is_zero() {
            out.insert(s.clone(), acc);
        }
    }
    out
}

fn sparse(m: &Inflow) -> Inflow {
    m.iter().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Projection of `in` onto the subgraph on `sub`:
/// `in(n) + Σ_{n′ ∉ sub} flow(in,G)(n′)·ε(n′,n)`.
pub fn project_inflow(inflow: &Inflow, g: &FlowGraph, sub: &BTreeSet<NodeId>, d: &FlowDomain) -> Inflow {
    let fl = flow(inflow, g, d);
    project_with_flow(inflow, &fl, g, sub, d)
}

fn project_with_flow(inflow: &Inflow, fl: &Inflow, g: &FlowGraph, sub: &BTreeSet<NodeId>, d: &FlowDomain) -> Inflow {
    let mut out = Inflow::new();
    for n in sub.iter().filter(|n| g.contains(n)) {
        let mut acc = inflow.get(n).cloned().unwrap_or_else(|| d.zero());
        for (src, f) in fl {
            if sub.contains(src) {
                continue;
            }
            if let Some(e) = g.edge(src, n) {
                acc = d.plus(&acc, &d.times(f, e));
            }
        }
        if !acc.is_zero() {
            out.insert(n.clone(), acc);
        }
    }
    out
}

/// `in1 ∼ in2` on `g`: both induce the same flow.
pub fn inflow_equiv(in1: &Inflow, in2: &Inflow, g: &FlowGraph, d: &FlowDomain) -> bool {
    let cap = capacity(g, d);
    flow_with(&cap, in1, g, d) == flow_with(&cap, in2, g, d)
}

/// A graph paired with an inflow, plus the flow they induce.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InflowedGraph {
    graph: FlowGraph,
    inflow: Inflow,
    flow: Inflow,
}

impl InflowedGraph {
    pub fn new(graph: FlowGraph, inflow: Inflow, d: &FlowDomain) -> Result<Self, GraphError> {
        if let Some(n) = inflow.keys().find(|n| !graph.contains(n)) {
            return Err(GraphError::InflowOutsideGraph(n.clone()));
        }
        let inflow = sparse(&inflow);
        let flow = flow(&inflow, &graph, d);
        Ok(InflowedGraph { graph, inflow, flow })
    }

    /// The identity element `H_e`.
    pub fn empty() -> Self {
        InflowedGraph {
            graph: FlowGraph::new(),
            inflow: Inflow::new(),
            flow: Inflow::new(),
        }
    }

    pub fn graph(&self) -> &FlowGraph {
        &self.graph
    }

    pub fn inflow(&self) -> &Inflow {
        &self.inflow
    }

    pub fn flow(&self) -> &Inflow {
        &self.flow
    }

    pub fn flow_at(&self, n: &NodeId, d: &FlowDomain) -> FlowValue {
        self.flow.get(n).cloned().unwrap_or_else(|| d.zero())
    }

    pub fn inflow_at(&self, n: &NodeId, d: &FlowDomain) -> FlowValue {
        self.inflow.get(n).cloned().unwrap_or_else(|| d.zero())
    }

    pub fn into_parts(self) -> (FlowGraph, Inflow) {
        (self.graph, self.inflow)
    }

    /// Same graph, another inflow representative.
    pub fn with_inflow(&self, inflow: Inflow, d: &FlowDomain) -> Result<Self, GraphError> {
        InflowedGraph::new(self.graph.clone(), inflow, d)
    }

    /// `h ∼ other`: same graph and inflow-equivalent.
    pub fn equiv(&self, other: &InflowedGraph) -> bool {
        self.graph == other.graph && self.flow == other.flow
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposeError {
    #[error("node sets overlap at {0:?}")]
    Overlap(Vec<NodeId>),
    #[error("no inflow completes the flow at {0}")]
    Residual(NodeId),
    #[error("no candidate composite inflow reproduces both component flows")]
    Verify,
}

/// Alternative candidates are enumerated exhaustively only up to this many
/// nodes with a second completion.
const MAX_EXHAUSTIVE_ALTERNATES: usize = 12;

/// `h1 • h2`.
///
/// The composite flow is fixed by the components' flows. At each node
/// the composite inflow must complete the flow arriving over edges to the
/// node's flow; the residual gives the canonical completion. When that
/// candidate does not reproduce the flow (a least fixpoint can undershoot
/// on cycles), nodes whose own flow is also a completion are tried as
/// alternates.
pub fn fg_compose(h1: &InflowedGraph, h2: &InflowedGraph, d: &FlowDomain) -> Result<InflowedGraph, ComposeError> {
    let g = h1.graph.disjoint_union(&h2.graph).map_err(|e| match e {
        GraphError::Overlap(v) => ComposeError::Overlap(v),
        _ => unreachable!(),
    })?;
    let mut fl = h1.flow.clone();
    fl.extend(h2.flow.iter().map(|(k, v)| (k.clone(), v.clone())));

    let mut canonical = Inflow::new();
    let mut alternates: Vec<(NodeId, FlowValue)> = Vec::new();
    for n in g.nodes() {
        let target = fl.get(n).cloned().unwrap_or_else(|| d.zero());
        let mut arriving = d.zero();
        for (src, f) in &fl {
            if let Some(e) = g.edge(src, n) {
                arriving = d.plus(&arriving, &d.times(f, e));
            }
        }
        let r = d.residual(&target, &arriving).ok_or_else(|| ComposeError::Residual(n.clone()))?;
        if r != target && d.plus(&arriving, &target) == target {
            alternates.push((n.clone(), target.clone()));
        }
        if !r.is_zero() {
            canonical.insert(n.clone(), r);
        }
    }

    let cap = capacity(&g, d);
    let n1 = h1.graph.node_set();
    let n2 = h2.graph.node_set();
    let verify = |inflow: &Inflow| -> bool {
        let f = flow_with(&cap, inflow, &g, d);
        if f != fl {
            return false;
        }
        let p1 = project_with_flow(inflow, &f, &g, &n1, d);
        let p2 = project_with_flow(inflow, &f, &g, &n2, d);
        flow(&p1, &h1.graph, d) == h1.flow && flow(&p2, &h2.graph, d) == h2.flow
    };
    let finish = |inflow: Inflow| InflowedGraph {
        graph: g.clone(),
        inflow,
        flow: fl.clone(),
    };

    if verify(&canonical) {
        return Ok(finish(canonical));
    }
    let k = alternates.len();
    let masks: Box<dyn Iterator<Item = u64>> = if k == 0 {
        Box::new(std::iter::empty())
    } else if k <= MAX_EXHAUSTIVE_ALTERNATES {
        let mut all: Vec<u64> = (1..(1u64 << k)).collect();
        all.sort_by_key(|m| (m.count_ones(), *m));
        Box::new(all.into_iter())
    } else {
        Box::new(std::iter::once((1u64 << k.min(63)) - 1))
    };
    for mask in masks {
        let mut cand = canonical.clone();
        for (i, (n, v)) in alternates.iter().enumerate() {
            if mask & (1 << i) != 0 {
                cand.insert(n.clone(), v.clone());
            }
        }
        if verify(&cand) {
            return Ok(finish(cand));
        }
    }
    Err(ComposeError::Verify)
}

/// Splits `h` at `part`, projecting the inflow onto both sides.
pub fn fg_decompose(h: &InflowedGraph, part: &BTreeSet<NodeId>, d: &FlowDomain) -> (InflowedGraph, InflowedGraph) {
    let (g1, g2) = h.graph.split(part);
    let in1 = project_with_flow(&h.inflow, &h.flow, &h.graph, &g1.node_set(), d);
    let in2 = project_with_flow(&h.inflow, &h.flow, &h.graph, &g2.node_set(), d);
    let mk = |g: FlowGraph, i: Inflow| {
        let flow = flow(&i, &g, d);
        InflowedGraph { graph: g, inflow: i, flow }
    };
    (mk(g1, in1), mk(g2, in2))
}
