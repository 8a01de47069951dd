//! Brute-force oracles that do not share code with the flow computation.

use flowcore::{ExtNat, FlowGraph, FlowValue, InflowedGraph, NodeId};
use std::collections::{BTreeSet, VecDeque};

fn successors<'a>(g: &'a FlowGraph, n: &NodeId) -> Vec<NodeId> {
    g.out_edges(n).into_keys().collect()
}

/// Nodes and sinks reachable from `n` (including `n`).
fn reach(g: &FlowGraph, n: &NodeId) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::from([n.clone()]);
    let mut queue = VecDeque::from([n.clone()]);
    while let Some(x) = queue.pop_front() {
        for y in successors(g, &x) {
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

fn on_cycle(g: &FlowGraph, c: &NodeId) -> bool {
    successors(g, c).iter().any(|y| reach(g, y).contains(c))
}

/// Number of walks from `src` to `dst` in a graph whose edges all have
/// label 1, counted by enumerating simple paths; infinite when a cycle
/// lies on some walk.
pub fn walk_count(g: &FlowGraph, src: &NodeId, dst: &NodeId) -> ExtNat {
    let from_src = reach(g, src);
    for c in g.nodes() {
        if from_src.contains(c) && on_cycle(g, c) && reach(g, c).contains(dst) {
            return ExtNat::Inf;
        }
    }
    fn paths(g: &FlowGraph, cur: &NodeId, dst: &NodeId, stack: &mut Vec<NodeId>) -> u64 {
        let mut total = u64::from(cur == dst);
        for y in successors(g, cur) {
            if stack.contains(&y) {
                continue;
            }
            stack.push(y.clone());
            total += paths(g, &y, dst, stack);
            stack.pop();
        }
        total
    }
    ExtNat::Fin(paths(g, src, dst, &mut vec![src.clone()]))
}

/// Whether key `k` reaches `n`: some node whose inflow contains `k` has a
/// path to `n` along edges whose keysets all contain `k`.
pub fn key_reaches(h: &InflowedGraph, k: i64, n: &NodeId) -> bool {
    let g = h.graph();
    let mut seen: BTreeSet<NodeId> = h
        .inflow()
        .iter()
        .filter(|(_, v)| matches!(v, FlowValue::Keys(s) if s.contains(k)))
        .map(|(m, _)| m.clone())
        .collect();
    let mut queue: VecDeque<NodeId> = seen.iter().cloned().collect();
    while let Some(x) = queue.pop_front() {
        for (y, e) in g.out_edges(&x) {
            let passes = matches!(&e, FlowValue::Keys(s) if s.contains(k));
            if passes && g.contains(&y) && seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen.contains(n)
}
