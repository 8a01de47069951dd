//! Per-instance property checks. Each case draws one instance from the
//! generator and returns `Ok(true)` when the property was checked,
//! `Ok(false)` when the instance did not meet the property's premise, and
//! `Err` with a description on a violation.

use crate::brute::{key_reaches, walk_count};
use crate::gen::{self, Shape};
use flowcore::conditions::TreeCondition;
use flowcore::heap::{abstract_region, Heap, HeapValue, Record};
use flowcore::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub type Check = Result<bool, String>;

pub struct Case {
    pub name: &'static str,
    pub run: fn(&mut ChaCha8Rng) -> Check,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn show(h: &InflowedGraph) -> String {
    let g = h.graph();
    let edges: Vec<String> = g.edges().map(|(s, t, v)| format!("{s}->{t}:{v}")).collect();
    let inflow: Vec<String> = h.inflow().iter().map(|(k, v)| format!("{k}:{v}")).collect();
    format!(
        "nodes {:?} sinks {:?} edges [{}] inflow [{}]",
        g.node_set(),
        g.sinks(),
        edges.join(" "),
        inflow.join(" ")
    )
}

fn unit_edges() -> Vec<FlowValue> {
    vec![FlowValue::count(1)]
}

fn count_values() -> Vec<FlowValue> {
    vec![FlowValue::count(1), FlowValue::count(2)]
}

fn count_inflows() -> Vec<FlowValue> {
    vec![FlowValue::count(1), FlowValue::count(2), FlowValue::inf()]
}

/// Domains used by the generic flow properties, with edge and inflow
/// samples.
pub fn flow_domains() -> Vec<(FlowDomain, Vec<FlowValue>)> {
    let mut out = vec![(FlowDomain::PathCount, count_values())];
    for d in [FlowDomain::KeySet, FlowDomain::LowerBound, FlowDomain::UpperBound] {
        let s = standard_samples(&d);
        out.push((d, s));
    }
    let p = product_domain(FlowDomain::PathCount, FlowDomain::LowerBound);
    let s = standard_samples(&p);
    out.push((p, s));
    out
}

fn random_domain_graph(rng: &mut ChaCha8Rng) -> (FlowDomain, InflowedGraph) {
    let doms = flow_domains();
    let (d, samples) = &doms[rng.gen_range(0..doms.len())];
    let nonzero: Vec<FlowValue> = samples.iter().filter(|v| !v.is_zero()).cloned().collect();
    let inflows = if *d == FlowDomain::PathCount { count_inflows() } else { nonzero.clone() };
    let h = gen::graph(rng, &Shape::default(), &nonzero, &inflows, &NodeLabel::Unit, d);
    (d.clone(), h)
}

fn capacity_matches_walks(h: &InflowedGraph) -> Check {
    let g = h.graph();
    let cap = capacity(g, &FlowDomain::PathCount);
    for s in g.nodes() {
        for t in g.nodes().chain(g.sinks().iter()) {
            let got = cap.value(&FlowDomain::PathCount, s, t).as_count();
            let want = walk_count(g, s, t);
            ensure(got == Some(want), || format!("cap({s},{t}) = {got:?}, paths {want}: {}", show(h)))?;
        }
    }
    Ok(true)
}

pub fn capacity_dag(rng: &mut ChaCha8Rng) -> Check {
    let shape = Shape {
        dag: true,
        density: 0.35,
        ..Shape::default()
    };
    let h = gen::graph(rng, &shape, &unit_edges(), &unit_edges(), &NodeLabel::Unit, &FlowDomain::PathCount);
    capacity_matches_walks(&h)
}

pub fn capacity_cyclic(rng: &mut ChaCha8Rng) -> Check {
    let h = gen::graph(rng, &Shape::default(), &unit_edges(), &unit_edges(), &NodeLabel::Unit, &FlowDomain::PathCount);
    capacity_matches_walks(&h)
}

pub fn keyset_reachability(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::KeySet;
    let samples: Vec<FlowValue> = standard_samples(&d).into_iter().filter(|v| !v.is_zero()).collect();
    let h = gen::graph(rng, &Shape::default(), &samples, &samples, &NodeLabel::Unit, &d);
    for n in h.graph().nodes() {
        let fl = h.flow_at(n, &d);
        let set = fl.as_keys().ok_or("keyset flow expected")?;
        for k in -3..=9 {
            let want = key_reaches(&h, k, n);
            ensure(set.contains(k) == want, || format!("key {k} at {n}: flow {fl}, reach {want}: {}", show(&h)))?;
        }
    }
    Ok(true)
}

pub fn projection_lemma(rng: &mut ChaCha8Rng) -> Check {
    let (d, h) = random_domain_graph(rng);
    let part = gen::part(rng, &h);
    let g1 = h.graph().split(&part).0;
    let projected = project_inflow(h.inflow(), h.graph(), &part, &d);
    let local = flow(&projected, &g1, &d);
    let global: Inflow = h.flow().iter().filter(|(n, _)| part.contains(*n)).map(|(k, v)| (k.clone(), v.clone())).collect();
    ensure(local == global, || format!("{d}: projection onto {part:?} gives {local:?}, want {global:?}: {}", show(&h)))?;
    Ok(true)
}

pub fn kleene_identity(rng: &mut ChaCha8Rng) -> Check {
    let (d, h) = random_domain_graph(rng);
    let g = h.graph();
    for n in g.nodes() {
        let mut rhs = h.inflow_at(n, &d);
        for m in g.nodes() {
            if let Some(e) = g.edge(m, n) {
                rhs = d.plus(&rhs, &d.times(&h.flow_at(m, &d), e));
            }
        }
        let lhs = h.flow_at(n, &d);
        ensure(lhs == rhs, || format!("{d}: flow({n}) = {lhs}, unfolding gives {rhs}: {}", show(&h)))?;
    }
    Ok(true)
}

fn compose(a: &InflowedGraph, b: &InflowedGraph, d: &FlowDomain) -> Result<InflowedGraph, String> {
    fg_compose(a, b, d).map_err(|e| format!("composition undefined ({e}): {} / {}", show(a), show(b)))
}

fn random_sa_graph(rng: &mut ChaCha8Rng) -> (FlowDomain, InflowedGraph, Vec<FlowValue>) {
    if rng.gen_bool(0.5) {
        let d = FlowDomain::PathCount;
        let h = gen::graph(rng, &Shape::default(), &count_values(), &count_inflows(), &NodeLabel::Unit, &d);
        (d, h, count_inflows())
    } else {
        let d = FlowDomain::KeySet;
        let s: Vec<FlowValue> = standard_samples(&d).into_iter().filter(|v| !v.is_zero()).collect();
        let h = gen::graph(rng, &Shape::default(), &s, &s, &NodeLabel::Unit, &d);
        (d, h, s)
    }
}

pub fn graph_separation_algebra(rng: &mut ChaCha8Rng) -> Check {
    let (d, h, inflows) = random_sa_graph(rng);
    let parts = gen::partition(rng, &h, 3);
    let (h1, rest) = fg_decompose(&h, &parts[0], &d);
    let (h2, h3) = fg_decompose(&rest, &parts[1], &d);
    let ctx = format!("{} split {parts:?}", show(&h));

    let c12 = compose(&h1, &h2, &d)?;
    let c21 = compose(&h2, &h1, &d)?;
    ensure(c12.equiv(&c21), || format!("not commutative: {ctx}"))?;
    let left = compose(&c12, &h3, &d)?;
    let c23 = compose(&h2, &h3, &d)?;
    let right = compose(&h1, &c23, &d)?;
    ensure(left.equiv(&right) && left.equiv(&h), || format!("not associative: {ctx}"))?;
    let e = InflowedGraph::empty();
    ensure(compose(&h, &e, &d)?.equiv(&h) && compose(&e, &h, &d)?.equiv(&h), || format!("identity fails: {ctx}"))?;

    // Cancellativity against a perturbed first component.
    let whole = compose(&h1, &rest, &d)?;
    let nodes: Vec<NodeId> = h1.graph().nodes().cloned().collect();
    if !nodes.is_empty() {
        let mut alt = h1.inflow().clone();
        let n = &nodes[rng.gen_range(0..nodes.len())];
        alt.insert(n.clone(), inflows[rng.gen_range(0..inflows.len())].clone());
        let h1b = h1.with_inflow(alt, &d).map_err(|e| e.to_string())?;
        if let Ok(w2) = fg_compose(&h1b, &rest, &d) {
            if w2.equiv(&whole) {
                ensure(h1b.flow() == h1.flow(), || format!("not cancellative: {ctx}"))?;
            }
        }
    }
    Ok(true)
}

fn state_eq(a: &State, b: &State) -> bool {
    a.heap() == b.heap() && a.nodemap() == b.nodemap() && a.graph().equiv(b.graph())
}

pub fn state_separation_algebra(rng: &mut ChaCha8Rng) -> Check {
    let (d, h, inflows) = random_sa_graph(rng);
    let s = gen::state(rng, &h, &d);
    let parts = gen::cell_partition(rng, &s, 3);
    let piece = |p: &BTreeSet<NodeId>| s.restrict(p, &d).ok_or_else(|| format!("restriction to {p:?} is not a state"));
    let (s1, s2, s3) = (piece(&parts[0])?, piece(&parts[1])?, piece(&parts[2])?);
    let ctx = format!("{} cells {parts:?}", show(&h));
    let sc = |a: &State, b: &State| state_compose(a, b, &d).map_err(|e| format!("undefined ({e}): {ctx}"));

    let c12 = sc(&s1, &s2)?;
    ensure(state_eq(&c12, &sc(&s2, &s1)?), || format!("not commutative: {ctx}"))?;
    let left = sc(&c12, &s3)?;
    let right = sc(&s1, &sc(&s2, &s3)?)?;
    ensure(state_eq(&left, &right) && state_eq(&left, &s), || format!("not associative: {ctx}"))?;
    let e = State::empty();
    ensure(state_eq(&sc(&s, &e)?, &s), || format!("identity fails: {ctx}"))?;
    ensure(state_compose(&s1, &s1, &d).is_err() || s1.heap().is_empty(), || format!("overlap composed: {ctx}"))?;

    let rest = sc(&s2, &s3)?;
    let nodes: Vec<NodeId> = s1.graph().graph().nodes().cloned().collect();
    if !nodes.is_empty() {
        let mut alt = s1.graph().inflow().clone();
        alt.insert(nodes[rng.gen_range(0..nodes.len())].clone(), inflows[rng.gen_range(0..inflows.len())].clone());
        let g1b = s1.graph().with_inflow(alt, &d).map_err(|e| e.to_string())?;
        let s1b = State::new(s1.heap().clone(), g1b, s1.nodemap().clone()).map_err(|e| e.to_string())?;
        if let Ok(w) = state_compose(&s1b, &rest, &d) {
            if state_eq(&w, &s) {
                ensure(state_eq(&s1b, &s1), || format!("not cancellative: {ctx}"))?;
            }
        }
    }
    Ok(true)
}

const UNIT: LabelDomain = LabelDomain::Unit;

fn iface(h: &InflowedGraph) -> FlowInterface {
    interface_of(h, &FlowDomain::PathCount, &UNIT)
}

fn good(h: &InflowedGraph) -> bool {
    good_denotation_check(h, &TreeCondition, &FlowDomain::PathCount).passed()
}

fn pc_values() -> Vec<FlowValue> {
    vec![FlowValue::count(0), FlowValue::count(1)]
}

/// Random members of `⟦interface_of(h)⟧` other than `h` itself, found by
/// single-edge edits.
fn other_members(rng: &mut ChaCha8Rng, h: &InflowedGraph, tries: usize) -> Vec<InflowedGraph> {
    let d = FlowDomain::PathCount;
    let i = iface(h);
    let mut out = Vec::new();
    for _ in 0..tries {
        if let Some(h2) = gen::mutate_edge(rng, h, &pc_values(), None, &d) {
            if h2.graph() != h.graph() && h2.graph().sinks() == h.graph().sinks() && satisfies(&h2, &i, &d, &UNIT) {
                out.push(h2);
            }
        }
    }
    out
}

fn split_tree(rng: &mut ChaCha8Rng, extra: f64, sinks: usize) -> (InflowedGraph, InflowedGraph, InflowedGraph) {
    let h = gen::tree(rng, 7, sinks, extra);
    let part = gen::part(rng, &h);
    let (h1, h2) = fg_decompose(&h, &part, &FlowDomain::PathCount);
    (h, h1, h2)
}

pub fn witness_independence(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let (_, h1, h2) = split_tree(rng, 0.3, 2);
    let alts1 = other_members(rng, &h1, 30);
    let alts2 = other_members(rng, &h2, 30);
    if alts1.is_empty() && alts2.is_empty() {
        return Ok(false);
    }
    let h1b = alts1.first().unwrap_or(&h1);
    let h2b = alts2.first().unwrap_or(&h2);
    let i12 = int_compose(&iface(&h1), &iface(&h2), &d, &UNIT).map_err(|e| e.to_string())?;
    let comp = compose(h1b, h2b, &d)?;
    ensure(satisfies(&comp, &i12, &d, &UNIT), || {
        format!("alternative witnesses leave the composite interface: {} / {}", show(h1b), show(h2b))
    })?;
    ensure(interface_eq(&iface(&comp), &i12, &d), || {
        format!("composite interfaces differ: {} / {}", show(h1b), show(h2b))
    })?;
    Ok(true)
}

pub fn good_congruence(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let (_, h1, h2) = split_tree(rng, 0.15, 2);
    let pick = |rng: &mut ChaCha8Rng, h: &InflowedGraph| -> InflowedGraph {
        let alts: Vec<InflowedGraph> = other_members(rng, h, 20).into_iter().filter(good).collect();
        alts.into_iter().next().unwrap_or_else(|| h.clone())
    };
    let (h1b, h2b) = (pick(rng, &h1), pick(rng, &h2));
    if !good(&h1b) || !good(&h2b) {
        return Ok(false);
    }
    let Ok(i12) = int_compose(&iface(&h1), &iface(&h2), &d, &UNIT) else {
        return Ok(false);
    };
    let comp = compose(&h1b, &h2b, &d)?;
    ensure(satisfies(&comp, &i12, &d, &UNIT) && good(&comp), || {
        format!("good members do not compose to a good member: {} / {}", show(&h1b), show(&h2b))
    })?;
    Ok(true)
}

/// `(h1, h2, I, I1′)` with `I1 ≾ I1′` for an edited `h1` that may gain a
/// fresh node.
fn extension_instance(
    rng: &mut ChaCha8Rng,
    sinks: usize,
) -> Option<(InflowedGraph, InflowedGraph, FlowInterface, InflowedGraph)> {
    let d = FlowDomain::PathCount;
    let (h, h1, h2) = split_tree(rng, 0.2, sinks);
    let i1 = iface(&h1);
    let fresh = NodeId::new("fresh");
    for _ in 0..40 {
        let base = if rng.gen_bool(0.3) { gen::add_fresh(rng, &h1, &fresh, FlowValue::count(1), &d) } else { h1.clone() };
        let target = base.graph().contains(&fresh).then_some(&fresh);
        let Some(h1b) = gen::mutate_edge(rng, &base, &pc_values(), target, &d) else {
            continue;
        };
        if h1b.graph() == h1.graph() || h1b.graph().sinks().iter().any(|s| !h1.graph().sinks().contains(s)) {
            continue;
        }
        if contextual_extension(&i1, &iface(&h1b), &d) {
            return Some((h1, h2, iface(&h), h1b));
        }
    }
    None
}

pub fn replacement(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let Some((h1, h2, i, h1b)) = extension_instance(rng, 2) else {
        return Ok(false);
    };
    let ib = int_compose(&iface(&h1b), &iface(&h2), &d, &UNIT)
        .map_err(|e| format!("I1' + I2 undefined ({e}): {} / {}", show(&h1b), show(&h2)))?;
    ensure(contextual_extension(&i, &ib, &d), || {
        format!("I not extended by I1' + I2: {} -> {} / {}", show(&h1), show(&h1b), show(&h2))
    })?;
    Ok(true)
}

pub fn rule_decomp(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let h = gen::tree(rng, 7, 2, 0.1);
    if !good(&h) {
        return Ok(false);
    }
    let nodes: Vec<NodeId> = h.graph().nodes().cloned().collect();
    let n = nodes[rng.gen_range(0..nodes.len())].clone();
    let (hn, hr) = fg_decompose(&h, &BTreeSet::from([n.clone()]), &d);
    let i = int_compose(&iface(&hn), &iface(&hr), &d, &UNIT).map_err(|e| e.to_string())?;
    ensure(interface_eq(&i, &iface(&h), &d) && good(&hn) && good(&hr), || {
        format!("splitting off {n} breaks the interface: {}", show(&h))
    })?;
    Ok(true)
}

pub fn rule_grcomp(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let (_, h1, h2) = split_tree(rng, 0.1, 2);
    if !good(&h1) || !good(&h2) {
        return Ok(false);
    }
    let comp = compose(&h1, &h2, &d)?;
    ensure(good(&comp), || format!("composite of good graphs is not good: {}", show(&comp)))?;
    Ok(true)
}

pub fn rule_comp(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let (h, h1, h2) = split_tree(rng, 0.3, 2);
    let i = int_compose(&iface(&h1), &iface(&h2), &d, &UNIT).map_err(|e| e.to_string())?;
    let comp = compose(&h1, &h2, &d)?;
    ensure(satisfies(&comp, &i, &d, &UNIT) && satisfies(&h, &i, &d, &UNIT), || {
        format!("H1 * H2 not in I1 + I2: {}", show(&h))
    })?;
    Ok(true)
}

/// A heap whose cells hold one pointer field per out-edge of `h`.
fn tree_heap(h: &InflowedGraph) -> Heap {
    let g = h.graph();
    g.nodes()
        .map(|n| {
            let rec: Record =
                g.out_edges(n).keys().map(|t| (format!("to_{t}"), HeapValue::ptr(t.clone()))).collect();
            (n.clone(), rec)
        })
        .collect()
}

pub fn rule_uniq(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let h = gen::tree(rng, 7, 2, 0.2);
    let s = State::from_graph(tree_heap(&h), h.clone()).map_err(|e| e.to_string())?;
    let region = gen::part(rng, &h);
    let (hr, _) = fg_decompose(&h, &region, &d);
    let a1 = abstract_region(&s, &region, &TreeCondition, hr.inflow(), None, &d).map_err(|e| e.to_string())?;
    let a2 = abstract_region(&s, &region, &TreeCondition, hr.inflow(), Some(h.graph()), &d).map_err(|e| e.to_string())?;
    ensure(a1 == a2 && a1.equiv(&hr), || format!("abstraction of {region:?} not unique: {}", show(&h)))?;
    ensure(interface_eq(&iface(&a1), &iface(&hr), &d), || format!("interfaces differ on {region:?}"))?;
    Ok(true)
}

fn fresh_interface() -> FlowInterface {
    let mut g = FlowGraph::new();
    g.add_node(NodeId::new("fresh"), UNIT.bottom()).expect("fresh");
    let h = InflowedGraph::new(g, Inflow::new(), &FlowDomain::PathCount).expect("empty inflow");
    iface(&h)
}

pub fn rule_addin(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let h = gen::tree(rng, 7, 2, 0.3);
    let i = iface(&h);
    let j = int_compose(&i, &fresh_interface(), &d, &UNIT).map_err(|e| e.to_string())?;
    ensure(j.inflow == i.inflow, || format!("inflow not lifted by zero: {}", show(&h)))?;
    Ok(true)
}

pub fn rule_addf(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let h = gen::tree(rng, 7, 0, 0.3);
    let i = iface(&h);
    if !i.flowmap.is_empty() {
        return Ok(false);
    }
    let j = int_compose(&i, &fresh_interface(), &d, &UNIT).map_err(|e| e.to_string())?;
    ensure(j.flowmap.is_empty(), || format!("flow map grew: {}", show(&h)))?;
    Ok(true)
}

pub fn rule_repl(rng: &mut ChaCha8Rng) -> Check {
    replacement(rng)
}

pub fn rule_replin(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let Some((_, h2, i, h1b)) = extension_instance(rng, 2) else {
        return Ok(false);
    };
    let ib = int_compose(&iface(&h1b), &iface(&h2), &d, &UNIT).map_err(|e| e.to_string())?;
    ensure(ib.admits_inflow(&i.inflow, &d), || format!("lifted inflow not preserved: {}", show(&h1b)))?;
    Ok(true)
}

pub fn rule_replf(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let Some((_, h2, i, h1b)) = extension_instance(rng, 0) else {
        return Ok(false);
    };
    if !i.flowmap.is_empty() {
        return Ok(false);
    }
    let ib = int_compose(&iface(&h1b), &iface(&h2), &d, &UNIT).map_err(|e| e.to_string())?;
    ensure(ib.flowmap.is_empty(), || format!("flow map no longer empty: {}", show(&h1b)))?;
    Ok(true)
}

pub fn rule_step(rng: &mut ChaCha8Rng) -> Check {
    let (h, h1, h2) = split_tree(rng, 0.3, 0);
    let i = iface(&h);
    let i1 = iface(&h1);
    if !i.flowmap.is_empty() || i1.flowmap.is_empty() {
        return Ok(false);
    }
    let dom2 = iface(&h2).dom();
    for (_, y) in i1.flowmap.keys() {
        ensure(dom2.contains(y), || format!("flow leaves to {y} outside I2: {}", show(&h)))?;
    }
    Ok(true)
}

/// Source sets are representative supports; any other member of the
/// inflow class can add sources only at nodes with infinite flow.
pub fn source_support(rng: &mut ChaCha8Rng) -> Check {
    let d = FlowDomain::PathCount;
    let shape = Shape {
        max_nodes: 4,
        max_sinks: 1,
        ..Shape::default()
    };
    let h = gen::graph(rng, &shape, &count_values(), &count_inflows(), &NodeLabel::Unit, &d);
    let nodes: Vec<NodeId> = h.graph().nodes().cloned().collect();
    let choices = [FlowValue::count(0), FlowValue::count(1), FlowValue::count(2), FlowValue::inf()];
    let mut class_support: BTreeSet<NodeId> = BTreeSet::new();
    let total = choices.len().pow(nodes.len() as u32);
    for mut code in 0..total {
        let mut cand = Inflow::new();
        for n in &nodes {
            cand.insert(n.clone(), choices[code % choices.len()].clone());
            code /= choices.len();
        }
        if inflow_equiv(&cand, h.inflow(), h.graph(), &d) {
            class_support.extend(cand.iter().filter(|(_, v)| !v.is_zero()).map(|(k, _)| k.clone()));
        }
    }
    let rep: BTreeSet<NodeId> = h.inflow().keys().cloned().collect();
    ensure(rep.is_subset(&class_support), || format!("representative outside its class: {}", show(&h)))?;
    for n in class_support.difference(&rep) {
        ensure(h.flow_at(n, &d) == FlowValue::inf(), || {
            format!("class member adds source {n} with finite flow: {}", show(&h))
        })?;
    }
    Ok(true)
}

pub fn oracle_cases() -> Vec<Case> {
    vec![
        Case { name: "capacity = path count (DAG)", run: capacity_dag },
        Case { name: "capacity = path count (cyclic)", run: capacity_cyclic },
        Case { name: "keyset flow = per-key reachability", run: keyset_reachability },
        Case { name: "projection lemma", run: projection_lemma },
        Case { name: "Kleene identity", run: kleene_identity },
    ]
}

pub fn separation_cases() -> Vec<Case> {
    vec![
        Case { name: "flow-graph composition", run: graph_separation_algebra },
        Case { name: "state composition", run: state_separation_algebra },
    ]
}

pub fn interface_cases() -> Vec<Case> {
    vec![
        Case { name: "witness independence", run: witness_independence },
        Case { name: "good congruence", run: good_congruence },
        Case { name: "replacement", run: replacement },
        Case { name: "Decomp", run: rule_decomp },
        Case { name: "GrComp", run: rule_grcomp },
        Case { name: "Comp", run: rule_comp },
        Case { name: "Uniq", run: rule_uniq },
        Case { name: "AddIn", run: rule_addin },
        Case { name: "AddF", run: rule_addf },
        Case { name: "Repl", run: rule_repl },
        Case { name: "ReplIn", run: rule_replin },
        Case { name: "ReplF", run: rule_replf },
        Case { name: "Step", run: rule_step },
    ]
}
