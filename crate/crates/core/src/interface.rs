//! Flow interfaces: the abstraction `(In, a, f)` of an inflowed graph.

use crate::algebra::{standard_samples, FlowDomain, FlowValue, LabelDomain, NodeLabel};
use crate::conditions::GoodCondition;
use crate::graph::{capacity, fg_compose, flow, Capacity, ComposeError, FlowGraph, Inflow, InflowedGraph, NodeId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Capacity restricted to source × sink pairs; zero omitted.
pub type FlowMap = BTreeMap<(NodeId, NodeId), FlowValue>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowInterface {
    pub inflow: Inflow,
    pub sources: BTreeSet<NodeId>,
    pub label: NodeLabel,
    pub flowmap: FlowMap,
    witness: InflowedGraph,
    cap: Capacity,
}

fn flowmap_from(cap: &Capacity, sources: &BTreeSet<NodeId>, g: &FlowGraph) -> FlowMap {
    let mut fm = FlowMap::new();
    for s in sources {
        for t in g.sinks() {
            if let Some(v) = cap.get(s, t) {
                fm.insert((s.clone(), t.clone()), v.clone());
            }
        }
    }
    fm
}

/// The interface of `h`. Sources are the support of `h`'s inflow.
pub fn interface_of(h: &InflowedGraph, d: &FlowDomain, a: &LabelDomain) -> FlowInterface {
    let cap = capacity(h.graph(), d);
    let sources: BTreeSet<NodeId> = h.inflow().keys().cloned().collect();
    FlowInterface {
        inflow: h.inflow().clone(),
        label: a.join_all(h.graph().labels().values()),
        flowmap: flowmap_from(&cap, &sources, h.graph()),
        sources,
        witness: h.clone(),
        cap,
    }
}

impl FlowInterface {
    /// The identity interface `I_e`.
    pub fn empty(d: &FlowDomain, a: &LabelDomain) -> Self {
        interface_of(&InflowedGraph::empty(), d, a)
    }

    pub fn witness(&self) -> &InflowedGraph {
        &self.witness
    }

    pub fn dom(&self) -> BTreeSet<NodeId> {
        self.witness.graph().node_set()
    }

    pub fn sinks(&self) -> &BTreeSet<NodeId> {
        self.witness.graph().sinks()
    }

    /// `f(n, ·)` computed from the witness capacity, for any node `n`.
    fn flows_from(&self, n: &NodeId) -> BTreeMap<NodeId, FlowValue> {
        self.sinks()
            .iter()
            .filter_map(|t| self.cap.get(n, t).map(|v| (t.clone(), v.clone())))
            .collect()
    }

    /// Whether `inflow` (zero outside its support) lies in this
    /// interface's inflow class.
    pub fn admits_inflow(&self, inflow: &Inflow, d: &FlowDomain) -> bool {
        let g = self.witness.graph();
        if inflow.keys().any(|n| !g.contains(n)) {
            return false;
        }
        flow(inflow, g, d) == *self.witness.flow()
    }
}

impl fmt::Display for FlowInterface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inflow: Vec<String> = self.inflow.iter().map(|(k, v)| format!("{k}->{v}")).collect();
        let fm: Vec<String> = self.flowmap.iter().map(|((s, t), v)| format!("({s},{t})->{v}")).collect();
        write!(f, "({{{}}}, {}, {{{}}})", inflow.join(", "), self.label, fm.join(", "))
    }
}

/// Whether the inflow classes of `rep` on `g1` and on `g2` agree on a
/// probe set: `rep` with one node's value replaced by a sample value.
/// Cross-membership of representatives alone misses, for example, a
/// dropped self-loop, where flow ∞ absorbs any inflow on one side only.
fn classes_agree(rep: &Inflow, g1: &FlowGraph, g2: &FlowGraph, d: &FlowDomain) -> bool {
    if g1 == g2 {
        return true;
    }
    let (f1, f2) = (flow(rep, g1, d), flow(rep, g2, d));
    let samples = standard_samples(d);
    g1.nodes().all(|n| {
        samples.iter().all(|v| {
            let mut c = rep.clone();
            if v.is_zero() {
                c.remove(n);
            } else {
                c.insert(n.clone(), v.clone());
            }
            (flow(&c, g1, d) == f1) == (flow(&c, g2, d) == f2)
        })
    })
}

/// `h ∈ ⟦i⟧`.
pub fn satisfies(h: &InflowedGraph, i: &FlowInterface, d: &FlowDomain, a: &LabelDomain) -> bool {
    let g = h.graph();
    let w = i.witness.graph();
    if g.node_set() != w.node_set() || g.sinks() != w.sinks() {
        return false;
    }
    if a.join_all(g.labels().values()) != i.label {
        return false;
    }
    let cap = capacity(g, d);
    if flowmap_from(&cap, &i.sources, g) != i.flowmap {
        return false;
    }
    flow(&i.inflow, g, d) == *h.flow() && i.admits_inflow(h.inflow(), d) && classes_agree(&i.inflow, w, g, d)
}

/// `i1 ⊕ i2`, computed by composing the witnesses.
pub fn int_compose(
    i1: &FlowInterface,
    i2: &FlowInterface,
    d: &FlowDomain,
    a: &LabelDomain,
) -> Result<FlowInterface, ComposeError> {
    let h = fg_compose(&i1.witness, &i2.witness, d)?;
    Ok(interface_of(&h, d, a))
}

/// Interface equality: equal components, mutually admitted
/// representatives and agreeing inflow classes.
pub fn interface_eq(i1: &FlowInterface, i2: &FlowInterface, d: &FlowDomain) -> bool {
    i1.dom() == i2.dom()
        && i1.sinks() == i2.sinks()
        && i1.sources == i2.sources
        && i1.label == i2.label
        && i1.flowmap == i2.flowmap
        && i1.admits_inflow(&i2.inflow, d)
        && i2.admits_inflow(&i1.inflow, d)
        && classes_agree(&i1.inflow, i1.witness.graph(), i2.witness.graph(), d)
}

/// `i ≾ i′`: the representative of `i`, lifted by zero, lies in the class
/// of `i′`, and every source of `i` routes the same flow to every sink.
pub fn contextual_extension(i: &FlowInterface, i2: &FlowInterface, d: &FlowDomain) -> bool {
    if !i.dom().is_subset(&i2.dom()) || !i2.admits_inflow(&i.inflow, d) {
        return false;
    }
    i.sources.iter().all(|n| {
        let before: BTreeMap<NodeId, FlowValue> = i
            .flowmap
            .iter()
            .filter(|((s, _), _)| s == n)
            .map(|((_, t), v)| (t.clone(), v.clone()))
            .collect();
        before == i2.flows_from(n)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeViolation {
    pub node: NodeId,
    pub clause: String,
}

impl fmt::Display for NodeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.node, self.clause)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DenotationReport {
    pub violations: Vec<NodeViolation>,
}

impl DenotationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates `γ(n, {n ↦ flow(n)}, λ(n), ε_n)` at every node of `h`.
pub fn good_denotation_check(h: &InflowedGraph, gamma: &dyn GoodCondition, d: &FlowDomain) -> DenotationReport {
    let g = h.graph();
    let mut r = DenotationReport::default();
    for (n, label) in g.labels() {
        let fl = h.flow_at(n, d);
        for clause in gamma.flow_clauses(n, &fl, label, &g.out_edges(n)) {
            r.violations.push(NodeViolation { node: n.clone(), clause });
        }
    }
    r
}
