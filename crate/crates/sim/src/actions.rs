//! Guarantee conformance for the dictionary: every shared-state change a
//! thread makes must be a Lock, Alloc or Sync action for that thread.

use flowcore::{
    contextual_extension, fg_decompose, interface_of, FlowDomain, KeySet, LabelDomain, LockTag, NodeId, NodeLabel, State,
};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Lock,
    Alloc,
    Sync,
}

/// Nodes whose label, out-edges, existence or heap cells differ.
pub fn changed_nodes(pre: &State, post: &State) -> BTreeSet<NodeId> {
    let (g1, g2) = (pre.graph().graph(), post.graph().graph());
    let all: BTreeSet<&NodeId> = g1.nodes().chain(g2.nodes()).collect();
    all.into_iter()
        .filter(|n| {
            g1.contains(n) != g2.contains(n)
                || g1.label(n) != g2.label(n)
                || g1.out_edges(n) != g2.out_edges(n)
                || pre.cells(n) != post.cells(n)
        })
        .cloned()
        .collect()
}

fn dict(l: Option<&NodeLabel>) -> Option<(&KeySet, &BTreeSet<LockTag>)> {
    l.and_then(|l| l.as_dict())
}

fn locks_within(l: Option<&NodeLabel>, allowed: &[LockTag]) -> bool {
    dict(l).is_some_and(|(_, ls)| ls.iter().all(|x| allowed.contains(x)))
}

/// Matches one delta of thread `t` against the three actions.
pub fn classify(pre: &State, post: &State, t: u64, d: &FlowDomain, a: &LabelDomain) -> Result<Option<Action>, String> {
    let changed = changed_nodes(pre, post);
    if changed.is_empty() {
        return Ok(None);
    }
    let (g1, g2) = (pre.graph().graph(), post.graph().graph());
    let names: Vec<String> = changed.iter().map(|n| n.to_string()).collect();
    let names = names.join(", ");
    if changed.len() == 1 {
        let n = changed.iter().next().expect("one node");
        // Lock: (C, {0}) to (C, T') with T' within {t, ~t}.
        if g1.contains(n) && g2.contains(n) {
            let before = dict(g1.label(n));
            let after = dict(g2.label(n));
            if let (Some((c1, l1)), Some((c2, l2))) = (before, after) {
                let unlocked = l1.len() == 1 && l1.contains(&LockTag::Held(0));
                let owned = !l2.is_empty() && l2.iter().all(|x| *x == LockTag::Held(t) || *x == LockTag::Dirty(t));
                if unlocked
                    && owned
                    && c1 == c2
                    && g1.out_edges(n) == g2.out_edges(n)
                    && pre.graph().flow_at(n, d) == post.graph().flow_at(n, d)
                {
                    return Ok(Some(Action::Lock));
                }
            }
        }
        // Alloc: a fresh node (∅, {~t}) with zero inflow and no edges.
        if !g1.contains(n) && g2.contains(n) {
            let fresh = NodeLabel::dict(KeySet::empty(), [LockTag::Dirty(t)]);
            if g2.label(n) == Some(&fresh) && post.graph().flow_at(n, d).is_zero() && g2.out_edges(n).is_empty() {
                return Ok(Some(Action::Alloc));
            }
            return Err(format!("allocation of {n} does not match Alloc"));
        }
    }
    // Sync over the changed region.
    let held = [LockTag::Held(t), LockTag::Dirty(t)];
    let released = [LockTag::Held(0), LockTag::Held(t), LockTag::Dirty(t)];
    for n in &changed {
        if !g1.contains(n) || !g2.contains(n) {
            return Err(format!("{{{names}}}: {n} appears or disappears outside Alloc"));
        }
        if !locks_within(g1.label(n), &held) {
            return Err(format!("{{{names}}}: {n} is not held by thread {t} before the change"));
        }
        if !locks_within(g2.label(n), &released) {
            return Err(format!("{{{names}}}: {n} ends with a lock set other than {{0}}, {{{t}}} or {{~{t}}}"));
        }
    }
    let (h1, _) = fg_decompose(pre.graph(), &changed, d);
    let (h2, _) = fg_decompose(post.graph(), &changed, d);
    if !contextual_extension(&interface_of(&h1, d, a), &interface_of(&h2, d, a), d) {
        return Err(format!("{{{names}}}: the new region interface does not contextually extend the old one"));
    }
    Ok(Some(Action::Sync))
}

/// Checks every consecutive pair of snapshots taken during one step of
/// thread `t`.
pub fn conformance(snaps: &[State], t: u64, d: &FlowDomain, a: &LabelDomain) -> Vec<String> {
    snaps
        .windows(2)
        .filter_map(|w| classify(&w[0], &w[1], t, d, a).err())
        .collect()
}
