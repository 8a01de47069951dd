//! The give-up dictionary template over node-level helpers.
//!
//! `dictionaryOp(k)` locks `c`, checks `inRange`, follows `findNext`, and
//! gives up to the root when the range check fails. At a node with no
//! successor for `k` it runs the decisive operation and unlocks.

use crate::actions::conformance;
use crate::lin::{lp_check, oracle_check, History, OpRecord};
use crate::monitor::{Model, Outcome, Violation};
use crate::seqspec::OpKind;
use crate::step::{Env, StepError, Tx};
use flowcore::conditions::{DictLayout, DictionaryCondition};
use flowcore::heap::heap_violations;
use flowcore::{
    builtin_condition, check_global, edgeset_report, interface_of, Addr, ConditionKind, FlowDomain, FlowGraph,
    FlowValue, GlobalInvariant, GoodCondition, Heap, HeapValue, InflowedGraph, KeySet, LabelDomain, LockTag, NodeId,
    NodeLabel, Record, State,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Per-thread scratch state of a multi-step decisive operation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Aux {
    pub stage: u8,
    pub i: usize,
    pub j: usize,
    pub n: Option<Addr>,
}

pub enum Decision {
    /// More steps follow.
    Continue(String),
    /// The operation's result is decided; this step is its linearization
    /// point.
    Done { res: bool, label: String },
    Excluded(String),
}

/// The node-level helpers a concrete structure supplies.
pub trait NodeOps: Send + Sync {
    fn layout(&self) -> DictLayout;
    fn in_range(&self, rec: &Record, k: i64) -> Result<bool, String>;
    fn find_next(&self, rec: &Record, k: i64) -> Result<Option<Addr>, String>;
    /// One atomic step of `decisiveOp(c, k)` by thread `t`.
    fn decisive(&self, tx: &mut Tx, c: &Addr, kind: OpKind, k: i64, t: u64, aux: &mut Aux) -> Result<Decision, StepError>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictMutant {
    #[default]
    None,
    /// `lock(c)` does nothing.
    SkipLock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pc {
    Lock,
    InRange,
    FindNext,
    Unlock,
    Decisive,
    Return,
    Done,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Thread {
    pub ops: Vec<(OpKind, i64)>,
    pub idx: usize,
    pub pc: Pc,
    pub c: Option<Addr>,
    pub n: Option<Addr>,
    /// `k ∈ in(c)` has been established for the current `c`.
    pub fact: bool,
    pub res: Option<bool>,
    /// Index of the current operation in the history.
    pub hist: Option<usize>,
    pub changed: bool,
    pub aux: Aux,
}

impl Thread {
    pub fn new(ops: Vec<(OpKind, i64)>) -> Self {
        Thread {
            pc: if ops.is_empty() { Pc::Done } else { Pc::Lock },
            ops,
            idx: 0,
            c: None,
            n: None,
            fact: false,
            res: None,
            hist: None,
            changed: false,
            aux: Aux::default(),
        }
    }

    fn op(&self) -> Option<(OpKind, i64)> {
        self.ops.get(self.idx).copied()
    }

    fn holds_lock(&self) -> bool {
        matches!(self.pc, Pc::InRange | Pc::FindNext | Pc::Unlock | Pc::Decisive | Pc::Return)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub s: State,
    pub threads: Vec<Thread>,
    pub history: Vec<OpRecord>,
    pub events: usize,
    /// Union of the contents of every node label.
    pub contents: BTreeSet<i64>,
}

pub struct DictModel<O: NodeOps> {
    pub ops: O,
    pub root: Addr,
    pub init: State,
    pub workload: Vec<Vec<(OpKind, i64)>>,
    pub mutant: DictMutant,
    gamma: DictionaryCondition,
    global: GlobalInvariant,
    d: FlowDomain,
    a: LabelDomain,
}

/// Builds the graph of a dictionary heap by reading every cell as a node.
pub fn state_from_heap(heap: Heap, root: &Addr, layout: DictLayout) -> Result<State, String> {
    let gamma = DictionaryCondition { layout };
    let mut g = FlowGraph::new();
    let mut edges = Vec::new();
    for (x, rec) in &heap {
        let (label, out) = gamma.extract(x, &[(x, rec)], None)?;
        g.add_node(x.clone(), label).map_err(|e| e.to_string())?;
        edges.push((x.clone(), out));
    }
    for (x, out) in edges {
        for (y, v) in out {
            g.set_edge(&x, &y, v).map_err(|e| e.to_string())?;
        }
    }
    let inflow = [(root.clone(), FlowValue::Keys(KeySet::all()))].into_iter().collect();
    let h = InflowedGraph::new(g, inflow, &FlowDomain::KeySet).map_err(|e| e.to_string())?;
    State::from_graph(heap, h).map_err(|e| e.to_string())
}

pub fn contents_of(s: &State) -> BTreeSet<i64> {
    s.graph()
        .graph()
        .labels()
        .values()
        .filter_map(|l| l.as_dict())
        .flat_map(|(c, _)| c.keys().unwrap_or_default())
        .collect()
}

impl<O: NodeOps> DictModel<O> {
    pub fn new(ops: O, root: Addr, init: State, workload: Vec<Vec<(OpKind, i64)>>, mutant: DictMutant) -> Self {
        let layout = ops.layout();
        let bundle = builtin_condition(&ConditionKind::Dictionary {
            root: root.clone(),
            layout,
        })
        .expect("valid layout");
        DictModel {
            ops,
            root,
            init,
            workload,
            mutant,
            gamma: DictionaryCondition { layout },
            global: bundle.global,
            d: FlowDomain::KeySet,
            a: LabelDomain::dictionary(),
        }
    }

    pub fn gamma(&self) -> &DictionaryCondition {
        &self.gamma
    }

    /// Φ, `γ` at every node, and GS1–GS3.
    pub fn state_violations(&self, s: &State) -> Vec<Violation> {
        let mut v = Vec::new();
        let i = interface_of(s.graph(), &self.d, &self.a);
        for msg in check_global(&i, &self.global) {
            v.push(Violation::new("phi", msg));
        }
        for nv in heap_violations(s, s.graph(), &self.gamma, &self.d) {
            v.push(Violation::new("gamma", nv.to_string()));
        }
        match edgeset_report(s.graph()) {
            Ok(r) => v.extend(r.violations.iter().map(|g| Violation::new("gs", g.to_string()))),
            Err(e) => v.push(Violation::new("gs", e.to_string())),
        }
        v
    }

    /// The per-thread facts: a thread between lock and unlock holds `c`,
    /// and `k ∈ in(c)` once `inRange` succeeded. Checked after every step
    /// of every thread.
    fn fact_violations(&self, c: &Config) -> Vec<Violation> {
        let mut v = Vec::new();
        for (ti, th) in c.threads.iter().enumerate() {
            let t = (ti + 1) as u64;
            let (Some(node), Some((_, k))) = (&th.c, th.op()) else {
                continue;
            };
            if th.holds_lock() {
                let ok = c
                    .s
                    .graph()
                    .graph()
                    .label(node)
                    .and_then(|l| l.as_dict())
                    .is_some_and(|(_, ls)| ls.len() == 1 && (ls.contains(&LockTag::Held(t)) || ls.contains(&LockTag::Dirty(t))));
                if !ok {
                    v.push(Violation::new("lock", format!("thread {t} is past lock({node}) but does not hold it")));
                }
            }
            if th.fact && !key_in(&c.s.graph().flow_at(node, &self.d), k) {
                v.push(Violation::new("stability", format!("thread {t}: {k} left the inset of {node}")));
            }
        }
        v
    }

    fn keyset_contains(&self, s: &State, c: &Addr, k: i64) -> bool {
        let inset = s.graph().flow_at(c, &self.d);
        key_in(&inset, k) && s.graph().graph().out_edges(c).values().all(|e| !key_in(e, k))
    }

    fn exec(&self, c: &Config, ti: usize) -> Result<Option<Outcome<Config>>, (String, StepError)> {
        let th = &c.threads[ti];
        let Some((kind, k)) = th.op() else {
            return Ok(None);
        };
        let t = (ti + 1) as u64;
        let env = Env {
            gamma: &self.gamma,
            d: &self.d,
            a: &self.a,
        };
        let mut tx = Tx::new(&c.s, env);
        let mut nt = th.clone();
        let mut cfg = c.clone();
        let mut vs = Vec::new();
        let mut lp = None;
        let node = th.c.clone().unwrap_or_else(|| self.root.clone());
        let tag = format!("t{t} {kind}({k})");
        macro_rules! go {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(e) => return Err((format!("{tag} {:?}", th.pc), e)),
                }
            };
        }
        let label = match th.pc {
            Pc::Lock => {
                if self.mutant != DictMutant::SkipLock {
                    if go!(tx.read(&node, "lock")) != HeapValue::Int(0) {
                        return Ok(None);
                    }
                    go!(tx.write(&node, "lock", HeapValue::Int(t as i64)));
                    go!(tx.sync(&[&node], &[]));
                }
                if nt.hist.is_none() {
                    nt.hist = Some(cfg.history.len());
                    cfg.history.push(OpRecord {
                        thread: t as usize,
                        kind,
                        key: k,
                        inv: cfg.events,
                        resp: None,
                        result: None,
                        lp: None,
                    });
                    cfg.events += 1;
                }
                nt.c = Some(node.clone());
                nt.pc = Pc::InRange;
                format!("{tag} lock({node})")
            }
            Pc::InRange => {
                let rec = go!(tx.record(&node));
                if go!(self.ops.in_range(&rec, k).map_err(StepError::Shape)) {
                    nt.fact = true;
                    nt.pc = Pc::FindNext;
                    format!("{tag} inRange({node}) = true")
                } else {
                    nt.n = Some(self.root.clone());
                    nt.pc = Pc::Unlock;
                    format!("{tag} inRange({node}) = false; give up")
                }
            }
            Pc::FindNext => {
                let rec = go!(tx.record(&node));
                match go!(self.ops.find_next(&rec, k).map_err(StepError::Shape)) {
                    Some(n) => {
                        nt.pc = Pc::Unlock;
                        let l = format!("{tag} findNext({node}) = {n}");
                        nt.n = Some(n);
                        l
                    }
                    None => {
                        if !self.keyset_contains(&c.s, &node, k) {
                            vs.push(Violation::new("keyset", format!("{k} is not in the keyset of {node} at decisiveOp")));
                        }
                        nt.pc = Pc::Decisive;
                        nt.aux = Aux::default();
                        format!("{tag} findNext({node}) = null")
                    }
                }
            }
            Pc::Unlock => {
                go!(tx.write(&node, "lock", HeapValue::Int(0)));
                go!(tx.sync(&[&node], &[]));
                nt.fact = false;
                nt.c = nt.n.take();
                nt.pc = Pc::Lock;
                format!("{tag} unlock({node})")
            }
            Pc::Decisive => match go!(self.ops.decisive(&mut tx, &node, kind, k, t, &mut nt.aux)) {
                Decision::Continue(l) => format!("{tag} {l}"),
                Decision::Done { res, label } => {
                    nt.res = Some(res);
                    nt.pc = Pc::Return;
                    lp = Some(cfg.events);
                    cfg.events += 1;
                    format!("{tag} {label}")
                }
                Decision::Excluded(reason) => {
                    return Ok(Some(Outcome::Excluded {
                        label: format!("{tag} decisiveOp"),
                        reason,
                    }))
                }
            },
            Pc::Return => {
                go!(tx.write(&node, "lock", HeapValue::Int(0)));
                go!(tx.sync(&[&node], &[]));
                let h = nt.hist.expect("invoked");
                cfg.history[h].resp = Some(cfg.events);
                cfg.history[h].result = nt.res;
                cfg.events += 1;
                let res = nt.res.unwrap_or(false);
                nt = Thread {
                    idx: nt.idx + 1,
                    ..Thread::new(nt.ops.clone())
                };
                if nt.op().is_none() {
                    nt.pc = Pc::Done;
                }
                format!("{tag} unlock({node}); return {res}")
            }
            Pc::Done => return Ok(None),
        };
        let (s, snaps) = tx.finish();
        for msg in conformance(&snaps, t, &self.d, &self.a) {
            vs.push(Violation::new("conformance", format!("thread {t}: {msg}")));
        }
        let contents = contents_of(&s);
        if let Some(e) = lp {
            let h = nt.hist.expect("invoked");
            cfg.history[h].lp = Some(e);
        }
        if contents != c.contents {
            let expected = match (lp.is_some(), kind, nt.res) {
                (true, OpKind::Insert, Some(true)) if !c.contents.contains(&k) => {
                    Some(c.contents.iter().copied().chain([k]).collect::<BTreeSet<i64>>())
                }
                (true, OpKind::Delete, Some(true)) if c.contents.contains(&k) => {
                    Some(c.contents.iter().copied().filter(|x| *x != k).collect())
                }
                _ => None,
            };
            if nt.changed || expected.as_ref() != Some(&contents) {
                vs.push(Violation::new(
                    "contents",
                    format!("{label}: contents {:?} -> {:?} outside the operation's linearization point", c.contents, contents),
                ));
            }
            nt.changed = true;
        } else if lp.is_some() && matches!(kind, OpKind::Insert | OpKind::Delete) && nt.res == Some(true) {
            vs.push(Violation::new("contents", format!("{label}: successful {kind} left the contents unchanged")));
        }
        cfg.s = s;
        cfg.contents = contents;
        cfg.threads[ti] = nt;
        vs.extend(self.fact_violations(&cfg));
        Ok(Some(Outcome::Next {
            config: cfg,
            label,
            violations: vs,
        }))
    }

    pub fn history(&self, c: &Config) -> History {
        History {
            init: contents_of(&self.init),
            ops: c.history.clone(),
        }
    }

    /// LP-based verdict, oracle verdict, and whether they agree.
    pub fn lin_violations(&self, c: &Config) -> Vec<Violation> {
        let h = self.history(c);
        let mut v = Vec::new();
        let lpv = lp_check(&h);
        let orv = oracle_check(&h);
        match (&lpv, &orv) {
            (Ok(a), Ok(b)) => {
                if !a.ok() {
                    v.push(Violation::new("linearizability", format!("{a:?}")));
                }
                if a.ok() != b.ok() {
                    v.push(Violation::new("lin-disagree", format!("LP verdict {a:?}, oracle verdict {b:?}")));
                }
            }
            _ => v.push(Violation::new("linearizability", format!("{lpv:?} / {orv:?}"))),
        }
        v
    }
}

fn key_in(v: &FlowValue, k: i64) -> bool {
    v.as_keys().is_some_and(|s| s.contains(k))
}

impl<O: NodeOps> Model for DictModel<O> {
    type Config = Config;

    fn initial(&self) -> Config {
        Config {
            s: self.init.clone(),
            threads: self.workload.iter().map(|ops| Thread::new(ops.clone())).collect(),
            history: Vec::new(),
            events: 0,
            contents: contents_of(&self.init),
        }
    }

    fn thread_count(&self) -> usize {
        self.workload.len()
    }

    fn step(&self, c: &Config, t: usize) -> Vec<Outcome<Config>> {
        match self.exec(c, t) {
            Ok(None) => vec![],
            Ok(Some(o)) => vec![o],
            Err((label, e)) => vec![Outcome::Abort {
                label,
                violations: vec![Violation::new(e.kind(), e.to_string())],
            }],
        }
    }

    fn finished(&self, c: &Config) -> bool {
        c.threads.iter().all(|th| th.pc == Pc::Done)
    }

    fn check_state(&self, c: &Config) -> Vec<Violation> {
        self.state_violations(&c.s)
    }

    fn check_final(&self, c: &Config) -> Vec<Violation> {
        let mut v = self.state_violations(&c.s);
        v.extend(self.lin_violations(c));
        v
    }
}

/// Label override helper: `(C, {~t})` with the node's current contents.
pub fn dirty_label(s: &State, c: &NodeId, t: u64) -> NodeLabel {
    let contents = s
        .graph()
        .graph()
        .label(c)
        .and_then(|l| l.as_dict())
        .map(|(c, _)| c.clone())
        .unwrap_or_default();
    NodeLabel::dict(contents, [LockTag::Dirty(t)])
}
