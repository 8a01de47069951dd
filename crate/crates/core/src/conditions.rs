//! Good conditions, global invariants, and keyset analysis.

use crate::algebra::{
    product_domain, ExtInt, ExtNat, Flat, FlowDomain, FlowDomainSpec, FlowValue, KeySet, LabelDomain, LockTag, NodeLabel,
};
use crate::graph::{EdgeMap, InflowedGraph, NodeId};
use crate::heap::{Addr, HeapValue, Record};
use crate::interface::FlowInterface;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// The heap cells that make up one node, representative first.
pub type Cells<'a> = [(&'a Addr, &'a Record)];

/// A good condition `γ(n, in, a, f)`.
///
/// `flow_clauses` holds the conjuncts that only mention the flow, label
/// and out-edges; `heap_clauses` evaluates the whole predicate against
/// the node's heap cells. Both return the failed conjuncts.
pub trait GoodCondition: Send + Sync {
    fn name(&self) -> String;

    fn flow_clauses(&self, n: &NodeId, inflow: &FlowValue, label: &NodeLabel, out: &EdgeMap) -> Vec<String>;

    /// Reads a label and out-edges off the heap. `prev` is the label the
    /// node carried before, for ghost information the heap does not hold.
    fn extract(&self, n: &NodeId, cells: &Cells, prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String>;

    /// Labels under which the node's graph view is not read off the heap.
    fn opaque(&self, _label: &NodeLabel) -> bool {
        false
    }

    fn heap_clauses(
        &self,
        n: &NodeId,
        cells: &Cells,
        inflow: &FlowValue,
        label: &NodeLabel,
        out: &EdgeMap,
    ) -> Vec<String> {
        let mut v = Vec::new();
        match self.extract(n, cells, Some(label)) {
            Err(e) => v.push(format!("heap shape: {e}")),
            Ok((l, f)) => {
                if l != *label {
                    v.push(format!("label {label} does not match heap ({l})"));
                }
                if f != *out {
                    v.push("out-edges do not match heap".to_string());
                }
            }
        }
        v.extend(self.flow_clauses(n, inflow, label, out));
        v
    }
}

pub(crate) fn field<'a>(rec: &'a Record, name: &str) -> Result<&'a HeapValue, String> {
    rec.get(name).ok_or_else(|| format!("missing field {name}"))
}

pub(crate) fn ptr_field(rec: &Record, name: &str) -> Result<Option<(Addr, bool)>, String> {
    match field(rec, name)? {
        HeapValue::Null => Ok(None),
        HeapValue::Ptr { addr, marked } => Ok(Some((addr.clone(), *marked))),
        v => Err(format!("field {name} holds {v:?}, not an address")),
    }
}

pub(crate) fn int_field(rec: &Record, name: &str) -> Result<i64, String> {
    match field(rec, name)? {
        HeapValue::Int(k) => Ok(*k),
        v => Err(format!("field {name} holds {v:?}, not an integer")),
    }
}

pub(crate) fn key_field(rec: &Record, name: &str) -> Result<ExtInt, String> {
    match field(rec, name)? {
        HeapValue::Key(k) => Ok(*k),
        HeapValue::Int(k) => Ok(ExtInt::Fin(*k)),
        v => Err(format!("field {name} holds {v:?}, not a key")),
    }
}

fn single_cell<'a>(n: &NodeId, cells: &'a Cells<'a>) -> Result<&'a Record, String> {
    match cells {
        [(_, rec)] => Ok(rec),
        [] => Err(format!("node {n} has no heap cell")),
        _ => Err(format!("node {n} spans {} cells", cells.len())),
    }
}

fn add_edge(d: &FlowDomain, out: &mut EdgeMap, t: Addr, v: FlowValue) {
    let cur = out.remove(&t).unwrap_or_else(|| d.zero());
    let sum = d.plus(&cur, &v);
    if !sum.is_zero() {
        out.insert(t, sum);
    }
}

fn is_count(v: &FlowValue, n: u64) -> bool {
    *v == FlowValue::count(n)
}

/// `in(n) = 1`: every node has exactly one path from the root.
#[derive(Clone, Debug)]
pub struct TreeCondition;

impl GoodCondition for TreeCondition {
    fn name(&self) -> String {
        "tree".into()
    }

    fn flow_clauses(&self, _n: &NodeId, inflow: &FlowValue, _l: &NodeLabel, _out: &EdgeMap) -> Vec<String> {
        if is_count(inflow, 1) {
            vec![]
        } else {
            vec![format!("in(n) = 1 (flow is {inflow})")]
        }
    }

    fn extract(&self, n: &NodeId, cells: &Cells, _prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String> {
        let rec = single_cell(n, cells)?;
        let mut out = EdgeMap::new();
        fn walk(v: &HeapValue, out: &mut EdgeMap) {
            match v {
                HeapValue::Ptr { addr, .. } => add_edge(&FlowDomain::PathCount, out, addr.clone(), FlowValue::count(1)),
                HeapValue::List(items) => items.iter().for_each(|x| walk(x, out)),
                _ => {}
            }
        }
        rec.values().for_each(|v| walk(v, &mut out));
        Ok((NodeLabel::Unit, out))
    }
}

/// Singly-linked list: `in(n) = 1` and at most one unit out-edge. With a
/// terminator, the terminator has no out-edge and every other node has
/// exactly one.
#[derive(Clone, Debug)]
pub struct ListCondition {
    pub terminator: Option<NodeId>,
}

fn next_edge(n: &NodeId, cells: &Cells, v: FlowValue) -> Result<EdgeMap, String> {
    let rec = single_cell(n, cells)?;
    Ok(match ptr_field(rec, "next")? {
        Some((t, _)) => EdgeMap::from([(t, v)]),
        None => EdgeMap::new(),
    })
}

impl GoodCondition for ListCondition {
    fn name(&self) -> String {
        "list".into()
    }

    fn flow_clauses(&self, n: &NodeId, inflow: &FlowValue, _l: &NodeLabel, out: &EdgeMap) -> Vec<String> {
        let mut v = Vec::new();
        if !is_count(inflow, 1) {
            v.push(format!("in(n) = 1 (flow is {inflow})"));
        }
        let unit_edge = out.len() == 1 && out.values().all(|e| is_count(e, 1));
        match &self.terminator {
            Some(ft) if ft == n => {
                if !out.is_empty() {
                    v.push("terminator has no out-edge".into());
                }
            }
            Some(_) => {
                if !unit_edge {
                    v.push("exactly one unit out-edge".into());
                }
            }
            None => {
                if !(out.is_empty() || unit_edge) {
                    v.push("at most one unit out-edge".into());
                }
            }
        }
        v
    }

    fn extract(&self, n: &NodeId, cells: &Cells, _prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String> {
        Ok((NodeLabel::Unit, next_edge(n, cells, FlowValue::count(1))?))
    }
}

/// Cyclic list: `in(n) = ∞` and exactly one unit out-edge.
#[derive(Clone, Debug)]
pub struct CyclicListCondition;

impl GoodCondition for CyclicListCondition {
    fn name(&self) -> String {
        "cyclic_list".into()
    }

    fn flow_clauses(&self, _n: &NodeId, inflow: &FlowValue, _l: &NodeLabel, out: &EdgeMap) -> Vec<String> {
        let mut v = Vec::new();
        if *inflow != FlowValue::Count(ExtNat::Inf) {
            v.push(format!("in(n) = inf (flow is {inflow})"));
        }
        if !(out.len() == 1 && out.values().all(|e| is_count(e, 1))) {
            v.push("exactly one unit out-edge".into());
        }
        v
    }

    fn extract(&self, n: &NodeId, cells: &Cells, _prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String> {
        Ok((NodeLabel::Unit, next_edge(n, cells, FlowValue::count(1))?))
    }
}

/// Sorted list over `path_count × lower_bound`: `in(n) = (1, l)`,
/// `a = {k}`, the out-edge carries `(1, k)`, and `l ≤ k`.
#[derive(Clone, Debug)]
pub struct SortedListCondition;

impl GoodCondition for SortedListCondition {
    fn name(&self) -> String {
        "sorted_list".into()
    }

    fn flow_clauses(&self, _n: &NodeId, inflow: &FlowValue, label: &NodeLabel, out: &EdgeMap) -> Vec<String> {
        let mut v = Vec::new();
        let lower = match inflow {
            FlowValue::Pair(c, l) if is_count(c, 1) => match l.as_ref() {
                FlowValue::Lower(b) => Some(*b),
                _ => None,
            },
            _ => None,
        };
        if lower.is_none() {
            v.push(format!("in(n) = (1, l) (flow is {inflow})"));
        }
        let key = match label {
            NodeLabel::Keys(s) => match s.keys().as_deref() {
                Some([k]) => Some(*k),
                _ => None,
            },
            _ => None,
        };
        let Some(k) = key else {
            v.push(format!("a = {{k}} (label is {label})"));
            return v;
        };
        let expect = FlowValue::pair(FlowValue::count(1), FlowValue::Lower(ExtInt::Fin(k)));
        if out.len() > 1 || out.values().any(|e| *e != expect) {
            v.push(format!("out-edge labelled (1, {k})"));
        }
        if let Some(l) = lower {
            if l > ExtInt::Fin(k) {
                v.push(format!("l <= k ({l} > {k})"));
            }
        }
        v
    }

    fn extract(&self, n: &NodeId, cells: &Cells, _prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String> {
        let rec = single_cell(n, cells)?;
        let k = int_field(rec, "key")?;
        let e = FlowValue::pair(FlowValue::count(1), FlowValue::Lower(ExtInt::Fin(k)));
        Ok((NodeLabel::Keys(KeySet::singleton(k)), next_edge(n, cells, e)?))
    }
}

/// The Harris list condition over `path_count × path_count` with flat
/// thread-id labels. The first component counts paths from the main-list
/// head, the second from the free-list head.
#[derive(Clone, Debug)]
pub struct HarrisCondition {
    pub mh: NodeId,
    pub fh: NodeId,
    pub ft: NodeId,
}

fn count_pair(v: &FlowValue) -> Option<(ExtNat, ExtNat)> {
    let (a, b) = v.as_pair()?;
    Some((a.as_count()?, b.as_count()?))
}

impl HarrisCondition {
    fn heap_edges(rec: &Record) -> Result<(EdgeMap, bool), String> {
        let d = harris_domain();
        let mut out = EdgeMap::new();
        let next = ptr_field(rec, "next")?;
        let marked = next.as_ref().is_some_and(|(_, m)| *m);
        if let Some((t, _)) = next {
            add_edge(&d, &mut out, t, FlowValue::counts(1, 0));
        }
        if let Some((t, _)) = ptr_field(rec, "fnext")? {
            add_edge(&d, &mut out, t, FlowValue::counts(0, 1));
        }
        Ok((out, marked))
    }
}

pub fn harris_domain() -> FlowDomain {
    product_domain(FlowDomain::PathCount, FlowDomain::PathCount)
}

impl GoodCondition for HarrisCondition {
    fn name(&self) -> String {
        "harris".into()
    }

    fn flow_clauses(&self, n: &NodeId, inflow: &FlowValue, label: &NodeLabel, out: &EdgeMap) -> Vec<String> {
        let mut v = Vec::new();
        let a = match label {
            NodeLabel::Flat(a) => a.clone(),
            _ => Flat::Top,
        };
        if a == Flat::Top {
            v.push("a != top".into());
        }
        let Some((m, f)) = count_pair(inflow) else {
            v.push(format!("(0,0) < in(n) <= (1,1) (flow is {inflow})"));
            return v;
        };
        let (zero, one) = (ExtNat::ZERO, ExtNat::ONE);
        if (m, f) == (zero, zero) || m > one || f > one {
            v.push(format!("(0,0) < in(n) <= (1,1) (flow is {inflow})"));
        }
        if f >= one && a == Flat::Bottom {
            v.push("in(n) >= (0,1) => a != unmarked".into());
        }
        if *n == self.ft && f < one {
            v.push("n = ft => in(n) >= (0,1)".into());
        }
        let (mut mains, mut frees) = (0u64, 0u64);
        for e in out.values() {
            match count_pair(e) {
                Some((x, y)) if x <= one && y <= one && (x, y) != (zero, zero) => {
                    mains += (x == one) as u64;
                    frees += (y == one) as u64;
                }
                _ => v.push(format!("edge label {e} is not (1,0), (0,1) or (1,1)")),
            }
        }
        if mains > 1 || frees > 1 {
            v.push("at most one next and one fnext edge".into());
        }
        if f == zero && frees > 0 {
            v.push("in(n) <= (1,0) => fnext = null".into());
        }
        v
    }

    fn extract(&self, n: &NodeId, cells: &Cells, prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String> {
        let rec = single_cell(n, cells)?;
        let (out, marked) = Self::heap_edges(rec)?;
        let label = match (marked, prev) {
            (false, _) => Flat::Bottom,
            (true, Some(NodeLabel::Flat(Flat::Elem(t)))) => Flat::Elem(*t),
            // The marking thread is ghost information the heap does not
            // record; the caller must supply it.
            (true, _) => Flat::Top,
        };
        Ok((NodeLabel::Flat(label), out))
    }

    fn heap_clauses(
        &self,
        n: &NodeId,
        cells: &Cells,
        inflow: &FlowValue,
        label: &NodeLabel,
        out: &EdgeMap,
    ) -> Vec<String> {
        let mut v = Vec::new();
        match single_cell(n, cells).and_then(Self::heap_edges) {
            Err(e) => v.push(format!("heap shape: {e}")),
            Ok((f, marked)) => {
                if f != *out {
                    v.push("out-edges do not match heap".into());
                }
                let labelled = !matches!(label, NodeLabel::Flat(Flat::Bottom));
                if marked != labelled {
                    v.push("M(next) <=> a != unmarked".into());
                }
            }
        }
        v.extend(self.flow_clauses(n, inflow, label, out));
        v
    }
}

/// Node layouts for the dictionary condition's `γ_g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DictLayout {
    /// B+ tree nodes with `2B` key and pointer slots; the range equals the
    /// inset.
    BTree { b: usize },
    /// One optional key per node; `[lo, hi)` is the keyset and lies
    /// inside the inset; the single out-edge carries `[hi, ∞)`.
    SortedList,
}

/// The give-up dictionary condition over keysets and
/// `(contents, lockset)` labels.
#[derive(Clone, Debug)]
pub struct DictionaryCondition {
    pub layout: DictLayout,
}

/// Decoded B+ tree node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BTreeNode {
    pub lock: i64,
    pub range: (ExtInt, ExtInt),
    pub keys: Vec<i64>,
    pub ptrs: Vec<Addr>,
}

impl BTreeNode {
    pub fn is_leaf(&self) -> bool {
        self.ptrs.is_empty()
    }
}

pub fn decode_btree(rec: &Record, b: usize) -> Result<BTreeNode, String> {
    let lock = int_field(rec, "lock")?;
    let len = int_field(rec, "len")?;
    let cap = 2 * b;
    if len < 0 || len as usize >= cap {
        return Err(format!("0 <= len < 2B fails (len = {len})"));
    }
    let len = len as usize;
    let HeapValue::List(range) = field(rec, "range")? else {
        return Err("range is not a list".into());
    };
    let range = match range.as_slice() {
        [HeapValue::Key(a), HeapValue::Key(b)] => (*a, *b),
        _ => return Err("range is not a pair of keys".into()),
    };
    let HeapValue::List(keys) = field(rec, "keys")? else {
        return Err("keys is not a list".into());
    };
    let HeapValue::List(ptrs) = field(rec, "ptrs")? else {
        return Err("ptrs is not a list".into());
    };
    if keys.len() != cap || ptrs.len() != cap {
        return Err("keys and ptrs need 2B slots".into());
    }
    let mut ks = Vec::with_capacity(len);
    for (i, k) in keys.iter().enumerate() {
        match (i < len, k) {
            (true, HeapValue::Int(k)) => ks.push(*k),
            (false, HeapValue::Null) => {}
            _ => return Err(format!("key slot {i} inconsistent with len {len}")),
        }
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err("keys not strictly increasing".into());
    }
    let mut ps = Vec::new();
    for p in ptrs {
        match p {
            HeapValue::Ptr { addr, .. } => ps.push(Some(addr.clone())),
            HeapValue::Null => ps.push(None),
            v => return Err(format!("pointer slot holds {v:?}")),
        }
    }
    let live = ps.iter().take_while(|p| p.is_some()).count();
    if ps[live..].iter().any(|p| p.is_some()) || (live != 0 && live != len + 1) {
        return Err("pointers must be all null or exactly len+1 leading".into());
    }
    if let (Some(first), Some(last)) = (ks.first(), ks.last()) {
        if range.0 > ExtInt::Fin(*first) || ExtInt::Fin(*last) >= range.1 {
            return Err("keys outside range".into());
        }
    }
    Ok(BTreeNode {
        lock,
        range,
        keys: ks,
        ptrs: ps.into_iter().flatten().collect(),
    })
}

/// Decoded sorted-list node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListNode {
    pub lock: i64,
    pub lo: ExtInt,
    pub hi: ExtInt,
    pub key: Option<i64>,
    pub next: Option<Addr>,
}

pub fn decode_list_node(rec: &Record) -> Result<ListNode, String> {
    let lock = int_field(rec, "lock")?;
    let lo = key_field(rec, "lo")?;
    let hi = key_field(rec, "hi")?;
    let key = match field(rec, "key")? {
        HeapValue::Null => None,
        HeapValue::Int(k) => Some(*k),
        v => return Err(format!("key holds {v:?}")),
    };
    let next = ptr_field(rec, "next")?.map(|(a, _)| a);
    if lo >= hi {
        return Err("lo < hi fails".into());
    }
    if let Some(k) = key {
        if ExtInt::Fin(k) < lo || ExtInt::Fin(k) >= hi {
            return Err(format!("key {k} outside [lo, hi)"));
        }
    }
    if next.is_none() != (hi == ExtInt::PosInf) {
        return Err("next is null iff hi = inf".into());
    }
    Ok(ListNode { lock, lo, hi, key, next })
}

fn lock_owner(locks: &BTreeSet<LockTag>) -> Option<LockTag> {
    let mut it = locks.iter();
    match (it.next(), it.next()) {
        (Some(t), None) => Some(*t),
        _ => None,
    }
}

impl DictionaryCondition {
    /// Label (with a plain `Held` lock) and edges of a well-formed node,
    /// plus the range clause to check against the inset.
    fn decode(&self, rec: &Record) -> Result<(i64, KeySet, EdgeMap, KeySet), String> {
        match self.layout {
            DictLayout::BTree { b } => {
                let node = decode_btree(rec, b)?;
                let range = KeySet::interval(node.range.0, node.range.1);
                if node.is_leaf() {
                    return Ok((node.lock, KeySet::from_keys(node.keys.iter().copied()), EdgeMap::new(), range));
                }
                let mut out = EdgeMap::new();
                for (i, y) in node.ptrs.iter().enumerate() {
                    let lo = if i == 0 { ExtInt::NegInf } else { ExtInt::Fin(node.keys[i - 1]) };
                    let hi = node.keys.get(i).map_or(ExtInt::PosInf, |k| ExtInt::Fin(*k));
                    add_edge(&FlowDomain::KeySet, &mut out, y.clone(), FlowValue::Keys(KeySet::interval(lo, hi)));
                }
                Ok((node.lock, KeySet::empty(), out, range))
            }
            DictLayout::SortedList => {
                let node = decode_list_node(rec)?;
                let contents = node.key.map_or_else(KeySet::empty, KeySet::singleton);
                let mut out = EdgeMap::new();
                if let Some(y) = node.next {
                    out.insert(y, FlowValue::Keys(KeySet::interval(node.hi, ExtInt::PosInf)));
                }
                Ok((node.lock, contents, out, KeySet::interval(node.lo, node.hi)))
            }
        }
    }
}

impl GoodCondition for DictionaryCondition {
    fn name(&self) -> String {
        match self.layout {
            DictLayout::BTree { b } => format!("dictionary(bptree, B={b})"),
            DictLayout::SortedList => "dictionary(sorted_list)".into(),
        }
    }

    fn flow_clauses(&self, _n: &NodeId, inflow: &FlowValue, label: &NodeLabel, out: &EdgeMap) -> Vec<String> {
        let mut v = Vec::new();
        let Some((contents, locks)) = label.as_dict() else {
            return vec![format!("label {label} is not (contents, lockset)")];
        };
        match lock_owner(locks) {
            Some(LockTag::Held(_)) => {}
            Some(LockTag::Dirty(t)) if t != 0 => {}
            _ => v.push(format!("T = {{t}} or T = {{~t}} with t != 0 (T is {label})")),
        }
        let Some(inset) = inflow.as_keys() else {
            v.push(format!("inflow {inflow} is not a keyset"));
            return v;
        };
        if !contents.is_subset(inset) {
            v.push(format!("C subset of in(x) ({contents} vs {inset})"));
        }
        let sets: Vec<(&NodeId, &KeySet)> = out.iter().filter_map(|(y, e)| e.as_keys().map(|s| (y, s))).collect();
        if sets.len() != out.len() {
            v.push("edge labels are keysets".into());
        }
        for (y, s) in &sets {
            if !contents.is_disjoint(s) {
                v.push(format!("C disjoint from f(x,{y})"));
            }
        }
        for (i, (y1, s1)) in sets.iter().enumerate() {
            for (y2, s2) in &sets[i + 1..] {
                if !s1.is_disjoint(s2) {
                    v.push(format!("edgesets to {y1} and {y2} disjoint"));
                }
            }
        }
        v
    }

    fn extract(&self, n: &NodeId, cells: &Cells, _prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String> {
        let rec = single_cell(n, cells)?;
        let (lock, contents, out, _) = self.decode(rec)?;
        let lock = u64::try_from(lock).map_err(|_| "negative lock".to_string())?;
        Ok((NodeLabel::dict(contents, [LockTag::Held(lock)]), out))
    }

    fn opaque(&self, label: &NodeLabel) -> bool {
        matches!(label.as_dict().and_then(|(_, l)| lock_owner(l)), Some(LockTag::Dirty(_)))
    }

    fn heap_clauses(
        &self,
        n: &NodeId,
        cells: &Cells,
        inflow: &FlowValue,
        label: &NodeLabel,
        out: &EdgeMap,
    ) -> Vec<String> {
        let mut v = Vec::new();
        let owner = label.as_dict().and_then(|(_, l)| lock_owner(l));
        let rec = match single_cell(n, cells) {
            Ok(r) => r,
            Err(e) => return vec![e],
        };
        match owner {
            Some(LockTag::Dirty(t)) => match int_field(rec, "lock") {
                Ok(l) if l == t as i64 => {}
                Ok(l) => v.push(format!("dirty node holds lock {l}, expected {t}")),
                Err(e) => v.push(e),
            },
            _ => match self.decode(rec) {
                Err(e) => v.push(format!("heap shape: {e}")),
                Ok((lock, contents, f, range)) => {
                    let lock = lock.max(0) as u64;
                    if NodeLabel::dict(contents, [LockTag::Held(lock)]) != *label {
                        v.push(format!("label {label} does not match heap"));
                    }
                    if f != *out {
                        v.push("out-edges do not match heap".into());
                    }
                    let inset = inflow.as_keys().cloned().unwrap_or_default();
                    match self.layout {
                        DictLayout::BTree { .. } if range != inset => {
                            v.push(format!("in(x) = range ({inset} vs {range})"));
                        }
                        DictLayout::SortedList if !range.is_subset(&inset) => {
                            v.push(format!("range within in(x) ({range} vs {inset})"));
                        }
                        _ => {}
                    }
                }
            },
        }
        v.extend(self.flow_clauses(n, inflow, label, out));
        v
    }
}

/// Conjunction of two conditions over a product flow domain and a product
/// label domain; each component condition sees its own coordinates.
pub struct ProductCondition {
    pub first: Box<dyn GoodCondition>,
    pub second: Box<dyn GoodCondition>,
}

fn project(out: &EdgeMap, first: bool) -> EdgeMap {
    out.iter()
        .filter_map(|(t, v)| {
            let (a, b) = v.as_pair()?;
            let x = if first { a } else { b };
            (!x.is_zero()).then(|| (t.clone(), x.clone()))
        })
        .collect()
}

impl GoodCondition for ProductCondition {
    fn name(&self) -> String {
        format!("product({}, {})", self.first.name(), self.second.name())
    }

    fn flow_clauses(&self, n: &NodeId, inflow: &FlowValue, label: &NodeLabel, out: &EdgeMap) -> Vec<String> {
        let (Some((i1, i2)), NodeLabel::Pair(l1, l2)) = (inflow.as_pair(), label) else {
            return vec!["inflow and label must be pairs".into()];
        };
        let mut v = self.first.flow_clauses(n, i1, l1, &project(out, true));
        v.extend(self.second.flow_clauses(n, i2, l2, &project(out, false)));
        v
    }

    fn extract(&self, n: &NodeId, cells: &Cells, prev: Option<&NodeLabel>) -> Result<(NodeLabel, EdgeMap), String> {
        let (p1, p2) = match prev {
            Some(NodeLabel::Pair(a, b)) => (Some(a.as_ref()), Some(b.as_ref())),
            _ => (None, None),
        };
        let (l1, o1) = self.first.extract(n, cells, p1)?;
        let (l2, o2) = self.second.extract(n, cells, p2)?;
        let targets: BTreeSet<&NodeId> = o1.keys().chain(o2.keys()).collect();
        let mut out = EdgeMap::new();
        for t in targets {
            let a = o1.get(t).cloned().ok_or("product edges need both components")?;
            let b = o2.get(t).cloned().ok_or("product edges need both components")?;
            out.insert(t.clone(), FlowValue::pair(a, b));
        }
        Ok((NodeLabel::pair(l1, l2), out))
    }
}

/// A global constraint on the interface of the whole structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalInvariant {
    /// The inflow representative must equal this map, lifted by zero.
    pub required: BTreeMap<NodeId, FlowValue>,
    pub closed: bool,
    /// Nodes that must belong to the interface's domain.
    pub members: Vec<NodeId>,
}

pub fn check_global(i: &FlowInterface, inv: &GlobalInvariant) -> Vec<String> {
    let mut v = Vec::new();
    let dom = i.dom();
    let required: BTreeMap<&NodeId, &FlowValue> = inv.required.iter().filter(|(_, x)| !x.is_zero()).collect();
    let actual: BTreeMap<&NodeId, &FlowValue> = i.inflow.iter().collect();
    if required != actual || required.keys().any(|n| !dom.contains(*n)) {
        v.push(format!("inflow {} differs from required", show_map(&i.inflow)));
    }
    if inv.closed && !i.flowmap.is_empty() {
        let fm: Vec<String> = i.flowmap.keys().map(|(s, t)| format!("({s},{t})")).collect();
        v.push(format!("flow map must be empty, has {}", fm.join(", ")));
    }
    for m in &inv.members {
        if !dom.contains(m) {
            v.push(format!("{m} must be a node"));
        }
    }
    v
}

fn show_map(m: &BTreeMap<NodeId, FlowValue>) -> String {
    let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k}->{v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    Tree { root: NodeId },
    List { root: NodeId, terminator: Option<NodeId> },
    CyclicList { root: NodeId },
    SortedList { root: NodeId },
    Harris { mh: NodeId, fh: NodeId, ft: NodeId },
    Dictionary { root: NodeId, layout: DictLayout },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("unknown condition kind {0}")]
    UnknownKind(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

pub struct ConditionBundle {
    pub domain: FlowDomain,
    pub labels: LabelDomain,
    pub gamma: Box<dyn GoodCondition>,
    pub global: GlobalInvariant,
}

impl fmt::Debug for ConditionBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConditionBundle({}, {}, {:?})", self.gamma.name(), self.domain, self.global)
    }
}

pub fn builtin_condition(kind: &ConditionKind) -> Result<ConditionBundle, ConditionError> {
    let unit_root = |root: &NodeId| GlobalInvariant {
        required: BTreeMap::from([(root.clone(), FlowValue::count(1))]),
        closed: true,
        members: vec![],
    };
    Ok(match kind {
        ConditionKind::Tree { root } => ConditionBundle {
            domain: FlowDomain::PathCount,
            labels: LabelDomain::Unit,
            gamma: Box::new(TreeCondition),
            global: unit_root(root),
        },
        ConditionKind::List { root, terminator } => ConditionBundle {
            domain: FlowDomain::PathCount,
            labels: LabelDomain::Unit,
            gamma: Box::new(ListCondition {
                terminator: terminator.clone(),
            }),
            global: GlobalInvariant {
                members: terminator.iter().cloned().collect(),
                ..unit_root(root)
            },
        },
        ConditionKind::CyclicList { root } => ConditionBundle {
            domain: FlowDomain::PathCount,
            labels: LabelDomain::Unit,
            gamma: Box::new(CyclicListCondition),
            global: unit_root(root),
        },
        ConditionKind::SortedList { root } => ConditionBundle {
            domain: product_domain(FlowDomain::PathCount, FlowDomain::LowerBound),
            labels: LabelDomain::KeyPowerset,
            gamma: Box::new(SortedListCondition),
            global: GlobalInvariant {
                required: BTreeMap::from([(
                    root.clone(),
                    FlowValue::pair(FlowValue::count(1), FlowValue::Lower(ExtInt::NegInf)),
                )]),
                closed: true,
                members: vec![],
            },
        },
        ConditionKind::Harris { mh, fh, ft } => {
            if mh == fh {
                return Err(ConditionError::InvalidParameters("mh and fh must differ".into()));
            }
            ConditionBundle {
                domain: harris_domain(),
                labels: LabelDomain::Flat,
                gamma: Box::new(HarrisCondition {
                    mh: mh.clone(),
                    fh: fh.clone(),
                    ft: ft.clone(),
                }),
                global: GlobalInvariant {
                    required: BTreeMap::from([
                        (mh.clone(), FlowValue::counts(1, 0)),
                        (fh.clone(), FlowValue::counts(0, 1)),
                    ]),
                    closed: true,
                    members: vec![ft.clone()],
                },
            }
        }
        ConditionKind::Dictionary { root, layout } => {
            if let DictLayout::BTree { b } = layout {
                if *b < 2 {
                    return Err(ConditionError::InvalidParameters(format!("B must be at least 2, got {b}")));
                }
            }
            ConditionBundle {
                domain: FlowDomain::KeySet,
                labels: LabelDomain::dictionary(),
                gamma: Box::new(DictionaryCondition { layout: *layout }),
                global: GlobalInvariant {
                    required: BTreeMap::from([(root.clone(), FlowValue::Keys(KeySet::all()))]),
                    closed: true,
                    members: vec![],
                },
            }
        }
    })
}

/// Per-node keyset facts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeKeys {
    pub inset: KeySet,
    pub edgesets: BTreeMap<NodeId, KeySet>,
    pub keyset: KeySet,
    pub contents: KeySet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsViolation {
    pub rule: &'static str,
    pub nodes: Vec<NodeId>,
    pub witness: KeySet,
}

impl fmt::Display for GsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ns: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
        write!(f, "{} at {}: {}", self.rule, ns.join(","), self.witness)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgesetReport {
    pub nodes: BTreeMap<NodeId, NodeKeys>,
    pub violations: Vec<GsViolation>,
}

impl EdgesetReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("keyset analysis needs keyset flows and (contents, lockset) labels: {0}")]
pub struct DomainMismatch(pub String);

/// Insets, keysets and the GS1–GS3 checks.
pub fn edgeset_report(h: &InflowedGraph) -> Result<EdgesetReport, DomainMismatch> {
    let g = h.graph();
    let mut r = EdgesetReport::default();
    for (n, label) in g.labels() {
        let inset = match h.flow().get(n) {
            None => KeySet::empty(),
            Some(FlowValue::Keys(s)) => s.clone(),
            Some(v) => return Err(DomainMismatch(format!("flow {v} at {n}"))),
        };
        let contents = match label {
            NodeLabel::Keys(c) => c.clone(),
            _ => match label.as_dict() {
                Some((c, _)) => c.clone(),
                None => return Err(DomainMismatch(format!("label {label} at {n}"))),
            },
        };
        let mut edgesets = BTreeMap::new();
        let mut covered = KeySet::empty();
        for (t, e) in g.out_edges(n) {
            let s = e.as_keys().cloned().ok_or_else(|| DomainMismatch(format!("edge label {e}")))?;
            covered = covered.union(&s);
            edgesets.insert(t, s);
        }
        let keyset = inset.difference(&covered);
        let ivs: Vec<(&NodeId, &KeySet)> = edgesets.iter().collect();
        for (i, (y1, s1)) in ivs.iter().enumerate() {
            for (y2, s2) in &ivs[i + 1..] {
                let w = s1.intersect(s2);
                if !w.is_empty() {
                    r.violations.push(GsViolation {
                        rule: "GS3",
                        nodes: vec![n.clone(), (*y1).clone(), (*y2).clone()],
                        witness: w,
                    });
                }
            }
        }
        if !contents.is_subset(&keyset) {
            r.violations.push(GsViolation {
                rule: "GS2",
                nodes: vec![n.clone()],
                witness: contents.difference(&keyset),
            });
        }
        r.nodes.insert(
            n.clone(),
            NodeKeys {
                inset,
                edgesets,
                keyset,
                contents,
            },
        );
    }
    let all: Vec<(&NodeId, &NodeKeys)> = r.nodes.iter().collect();
    for (i, (n1, k1)) in all.iter().enumerate() {
        for (n2, k2) in &all[i + 1..] {
            let w = k1.keyset.intersect(&k2.keyset);
            if !w.is_empty() {
                r.violations.push(GsViolation {
                    rule: "GS1",
                    nodes: vec![(*n1).clone(), (*n2).clone()],
                    witness: w,
                });
            }
        }
    }
    Ok(r)
}
