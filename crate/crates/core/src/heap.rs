//! Heaps tied to flow graphs, state composition and the ghost commands.

use crate::algebra::{ExtInt, FlowDomain, LabelDomain};
use crate::conditions::GoodCondition;
use crate::graph::{fg_compose, fg_decompose, ComposeError, FlowGraph, GraphError, InflowedGraph, NodeId};
use crate::interface::{contextual_extension, interface_of, satisfies, FlowInterface, NodeViolation};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

pub type Addr = NodeId;

/// A field value. Pointers carry a mark bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeapValue {
    Null,
    Ptr { addr: Addr, marked: bool },
    Int(i64),
    Key(ExtInt),
    List(Vec<HeapValue>),
}

impl HeapValue {
    pub fn ptr(addr: impl Into<Addr>) -> Self {
        HeapValue::Ptr {
            addr: addr.into(),
            marked: false,
        }
    }

    pub fn as_ptr(&self) -> Option<&Addr> {
        match self {
            HeapValue::Ptr { addr, .. } => Some(addr),
            _ => None,
        }
    }
}

impl fmt::Display for HeapValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeapValue::Null => write!(f, "null"),
            HeapValue::Ptr { addr, marked: false } => write!(f, "&{addr}"),
            HeapValue::Ptr { addr, marked: true } => write!(f, "&{addr}*"),
            HeapValue::Int(k) => write!(f, "{k}"),
            HeapValue::Key(k) => write!(f, "{k}"),
            HeapValue::List(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(", "))
            }
        }
    }
}

pub type Record = BTreeMap<String, HeapValue>;
pub type Heap = BTreeMap<Addr, Record>;

/// `(h, H, r)`: a heap, the ghost flow graph, and the map from marked
/// cells to graph nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct State {
    heap: Heap,
    graph: InflowedGraph,
    nodemap: BTreeMap<Addr, NodeId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("graph node {0} has no heap cell")]
    NodeNotInHeap(NodeId),
    #[error("node map does not send {0} to itself")]
    NotRepresentative(NodeId),
    #[error("node map entry for {0}, which is not a heap cell")]
    CellNotInHeap(Addr),
    #[error("node map sends {0} outside the graph")]
    DanglingCell(Addr),
    #[error("heaps overlap at {0:?}")]
    HeapOverlap(Vec<Addr>),
    #[error("graphs do not compose: {0}")]
    Graph(#[from] ComposeError),
}

impl State {
    pub fn new(heap: Heap, graph: InflowedGraph, nodemap: BTreeMap<Addr, NodeId>) -> Result<Self, StateError> {
        for n in graph.graph().nodes() {
            if !heap.contains_key(n) {
                return Err(StateError::NodeNotInHeap(n.clone()));
            }
            if nodemap.get(n) != Some(n) {
                return Err(StateError::NotRepresentative(n.clone()));
            }
        }
        for (x, n) in &nodemap {
            if !heap.contains_key(x) {
                return Err(StateError::CellNotInHeap(x.clone()));
            }
            if !graph.graph().contains(n) {
                return Err(StateError::DanglingCell(x.clone()));
            }
        }
        Ok(State { heap, graph, nodemap })
    }

    /// A state where every graph node is its own single cell and every
    /// heap cell is marked.
    pub fn from_graph(heap: Heap, graph: InflowedGraph) -> Result<Self, StateError> {
        let nodemap = heap.keys().map(|a| (a.clone(), a.clone())).collect();
        State::new(heap, graph, nodemap)
    }

    /// `σ_e`.
    pub fn empty() -> Self {
        State {
            heap: Heap::new(),
            graph: InflowedGraph::empty(),
            nodemap: BTreeMap::new(),
        }
    }

    pub fn heap(&self) -> &Heap {
        &self.heap
    }

    pub fn graph(&self) -> &InflowedGraph {
        &self.graph
    }

    pub fn nodemap(&self) -> &BTreeMap<Addr, NodeId> {
        &self.nodemap
    }

    /// Heap cells of node `n`, representative first.
    pub fn cells(&self, n: &NodeId) -> Vec<(&Addr, &Record)> {
        let mut out: Vec<(&Addr, &Record)> = self.heap.get_key_value(n).into_iter().collect();
        for (x, m) in &self.nodemap {
            if m == n && x != n {
                if let Some(r) = self.heap.get(x) {
                    out.push((x, r));
                }
            }
        }
        out
    }

    pub fn read(&self, x: &Addr, field: &str) -> Result<&HeapValue, MemoryError> {
        let rec = self.heap.get(x).ok_or_else(|| MemoryError::Dangling(x.clone()))?;
        rec.get(field).ok_or_else(|| MemoryError::NoField(x.clone(), field.to_string()))
    }

    /// Writes a field. Writes never touch the ghost graph.
    pub fn write(&mut self, x: &Addr, field: &str, v: HeapValue) -> Result<(), MemoryError> {
        let rec = self.heap.get_mut(x).ok_or_else(|| MemoryError::Dangling(x.clone()))?;
        match rec.get_mut(field) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(MemoryError::NoField(x.clone(), field.to_string())),
        }
    }

    pub fn alloc(&mut self, x: Addr, rec: Record) -> Result<(), MemoryError> {
        if self.heap.contains_key(&x) {
            return Err(MemoryError::Reallocated(x));
        }
        self.heap.insert(x, rec);
        Ok(())
    }

    /// Frees an unmarked cell.
    pub fn free(&mut self, x: &Addr) -> Result<(), MemoryError> {
        if self.nodemap.contains_key(x) {
            return Err(MemoryError::FreeMarked(x.clone()));
        }
        self.heap.remove(x).map(|_| ()).ok_or_else(|| MemoryError::Dangling(x.clone()))
    }

    /// The substate on `cells`, if it is a state: graph nodes among
    /// `cells` are split off with projected inflow.
    pub fn restrict(&self, cells: &BTreeSet<Addr>, d: &FlowDomain) -> Option<State> {
        let heap: Heap = self
            .heap
            .iter()
            .filter(|(a, _)| cells.contains(*a))
            .map(|(a, r)| (a.clone(), r.clone()))
            .collect();
        let nodemap: BTreeMap<Addr, NodeId> = self
            .nodemap
            .iter()
            .filter(|(a, _)| cells.contains(*a))
            .map(|(a, n)| (a.clone(), n.clone()))
            .collect();
        let part: BTreeSet<NodeId> = self.graph.graph().nodes().filter(|n| cells.contains(*n)).cloned().collect();
        let (graph, _) = fg_decompose(&self.graph, &part, d);
        State::new(heap, graph, nodemap).ok()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemoryError {
    #[error("access to unallocated cell {0}")]
    Dangling(Addr),
    #[error("cell {0} has no field {1}")]
    NoField(Addr, String),
    #[error("cell {0} allocated twice")]
    Reallocated(Addr),
    #[error("free of marked cell {0}")]
    FreeMarked(Addr),
}

/// `σ₁ · σ₂`.
pub fn state_compose(s1: &State, s2: &State, d: &FlowDomain) -> Result<State, StateError> {
    let overlap: Vec<Addr> = s1.heap.keys().filter(|a| s2.heap.contains_key(*a)).cloned().collect();
    if !overlap.is_empty() {
        return Err(StateError::HeapOverlap(overlap));
    }
    let graph = fg_compose(&s1.graph, &s2.graph, d)?;
    let mut heap = s1.heap.clone();
    heap.extend(s2.heap.iter().map(|(a, r)| (a.clone(), r.clone())));
    let mut nodemap = s1.nodemap.clone();
    nodemap.extend(s2.nodemap.iter().map(|(a, n)| (a.clone(), n.clone())));
    State::new(heap, graph, nodemap)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbstractError {
    #[error("{0} is not an allocated cell")]
    NotInHeap(NodeId),
    #[error("cannot abstract {node}: {msg}")]
    Extract { node: NodeId, msg: String },
    #[error("graph construction failed: {0}")]
    Graph(#[from] GraphError),
}

/// Reads the graph on `region` off the heap. `hint` supplies ghost labels
/// the heap does not determine; where `γ` declares such a label opaque,
/// the hint's label and edges are taken as they are.
pub fn abstract_region(
    s: &State,
    region: &BTreeSet<NodeId>,
    gamma: &dyn GoodCondition,
    inflow: &crate::graph::Inflow,
    hint: Option<&FlowGraph>,
    d: &FlowDomain,
) -> Result<InflowedGraph, AbstractError> {
    let mut g = FlowGraph::new();
    let mut edges = Vec::new();
    for n in region {
        if !s.heap.contains_key(n) {
            return Err(AbstractError::NotInHeap(n.clone()));
        }
        let prev = hint.and_then(|h| h.label(n)).or_else(|| s.graph.graph().label(n));
        let (label, out) = match (prev, hint) {
            (Some(l), Some(h)) if gamma.opaque(l) && h.contains(n) => (l.clone(), h.out_edges(n)),
            _ => gamma
                .extract(n, &s.cells(n), prev)
                .map_err(|msg| AbstractError::Extract { node: n.clone(), msg })?,
        };
        g.add_node(n.clone(), label)?;
        edges.push((n.clone(), out));
    }
    for (_, out) in &edges {
        for t in out.keys() {
            if !region.contains(t) && !g.sinks().contains(t) {
                g.add_sink(t.clone())?;
            }
        }
    }
    for (n, out) in edges {
        for (t, v) in out {
            g.set_edge(&n, &t, v)?;
        }
    }
    Ok(InflowedGraph::new(g, inflow.clone(), d)?)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyncError {
    #[error("{0} is not a node of the current graph")]
    Region(NodeId),
    #[error("the region's interface is not contextually extended by the new one")]
    Extension,
    #[error("abstraction failed: {0}")]
    Abstraction(#[from] AbstractError),
    #[error("the abstracted region does not satisfy the new interface")]
    Denotation,
    #[error("good condition violated: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Good(Vec<NodeViolation>),
    #[error("replacement did not preserve the context's flow")]
    Replace,
}

/// Node-level `γ` violations of the region of `h`, checked against the
/// heap of `s`.
pub fn heap_violations(s: &State, h: &InflowedGraph, gamma: &dyn GoodCondition, d: &FlowDomain) -> Vec<NodeViolation> {
    let g = h.graph();
    let mut v = Vec::new();
    for (n, label) in g.labels() {
        let cells = s.cells(n);
        for clause in gamma.heap_clauses(n, &cells, &h.flow_at(n, d), label, &g.out_edges(n)) {
            v.push(NodeViolation { node: n.clone(), clause });
        }
    }
    v
}

/// `sync(I′)` over the region `dom(I′)`.
///
/// The witness graph of `i2` supplies the ghost labels. The region's heap
/// is re-abstracted, must satisfy `i2` and `γ`, and then replaces the
/// region in the global graph, which keeps its inflow.
pub fn ghost_sync(
    s: &State,
    i2: &FlowInterface,
    gamma: &dyn GoodCondition,
    d: &FlowDomain,
    a: &LabelDomain,
) -> Result<State, SyncError> {
    let region = i2.dom();
    if let Some(n) = region.iter().find(|n| !s.graph.graph().contains(n)) {
        return Err(SyncError::Region(n.clone()));
    }
    let (hr, hc) = fg_decompose(&s.graph, &region, d);
    let i = interface_of(&hr, d, a);
    if !contextual_extension(&i, i2, d) {
        return Err(SyncError::Extension);
    }
    let h2 = abstract_region(s, &region, gamma, &i2.inflow, Some(i2.witness().graph()), d)?;
    if !satisfies(&h2, i2, d, a) {
        return Err(SyncError::Denotation);
    }
    let bad = heap_violations(s, &h2, gamma, d);
    if !bad.is_empty() {
        return Err(SyncError::Good(bad));
    }
    let g = h2.graph().disjoint_union(hc.graph()).map_err(|_| SyncError::Replace)?;
    let graph = InflowedGraph::new(g, s.graph.inflow().clone(), d).map_err(|_| SyncError::Replace)?;
    let preserved = graph
        .graph()
        .nodes()
        .all(|n| graph.flow_at(n, d) == if region.contains(n) { h2.flow_at(n, d) } else { hc.flow_at(n, d) });
    if !preserved {
        return Err(SyncError::Replace);
    }
    Ok(State {
        heap: s.heap.clone(),
        graph,
        nodemap: s.nodemap.clone(),
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GhostError {
    #[error("{0} is not allocated")]
    NotAllocated(Addr),
    #[error("{0} is already marked")]
    AlreadyMarked(Addr),
    #[error("{0} is not a graph node")]
    InvalidTarget(NodeId),
    #[error("{0} is not marked")]
    NotMarked(Addr),
    #[error("{0} still has inflow")]
    HasInflow(NodeId),
    #[error("{0} still has other marked cells")]
    HasCells(NodeId),
}

/// `mark(x, y)`. With `x = y` outside the graph, adjoins a fresh node with
/// zero inflow, bottom label and no edges.
pub fn ghost_mark(s: &State, x: &Addr, y: &NodeId, d: &FlowDomain, a: &LabelDomain) -> Result<State, GhostError> {
    if !s.heap.contains_key(x) {
        return Err(GhostError::NotAllocated(x.clone()));
    }
    if s.nodemap.contains_key(x) {
        return Err(GhostError::AlreadyMarked(x.clone()));
    }
    let mut out = s.clone();
    if x == y && !s.graph.graph().contains(y) {
        let mut single = FlowGraph::new();
        single.add_node(x.clone(), a.bottom()).expect("fresh node");
        let g = s.graph.graph().disjoint_union(&single).expect("fresh node");
        out.graph = InflowedGraph::new(g, s.graph.inflow().clone(), d).expect("inflow inside graph");
    } else if !s.graph.graph().contains(y) {
        return Err(GhostError::InvalidTarget(y.clone()));
    }
    out.nodemap.insert(x.clone(), y.clone());
    Ok(out)
}

/// `unmark(x)`. Removing a representative requires zero inflow and no
/// other cells.
pub fn ghost_unmark(s: &State, x: &Addr, d: &FlowDomain) -> Result<State, GhostError> {
    let n = s.nodemap.get(x).ok_or_else(|| GhostError::NotMarked(x.clone()))?;
    let mut out = s.clone();
    if n == x {
        if s.nodemap.iter().any(|(c, m)| m == n && c != x) {
            return Err(GhostError::HasCells(n.clone()));
        }
        let (hx, rest) = fg_decompose(&s.graph, &BTreeSet::from([x.clone()]), d);
        if !hx.inflow().is_empty() {
            return Err(GhostError::HasInflow(n.clone()));
        }
        out.graph = rest;
    }
    out.nodemap.remove(x);
    Ok(out)
}

/// `σ ⊨ Gr(I)`.
pub fn eval_gr(s: &State, i: &FlowInterface, gamma: &dyn GoodCondition, d: &FlowDomain, a: &LabelDomain) -> bool {
    s.heap.keys().all(|x| s.nodemap.contains_key(x))
        && satisfies(&s.graph, i, d, a)
        && heap_violations(s, &s.graph, gamma, d).is_empty()
}

/// `σ ⊨ [φ]_I`.
pub fn eval_dirty(s: &State, i: &FlowInterface, pred: &dyn Fn(&Heap) -> bool, d: &FlowDomain, a: &LabelDomain) -> bool {
    s.heap.keys().all(|x| s.nodemap.contains_key(x)) && satisfies(&s.graph, i, d, a) && pred(&s.heap)
}
