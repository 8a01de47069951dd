//! The Harris list with a free list, abstracted to keyless nondeterministic
//! insert and delete. Each thread machine follows the insert and delete
//! procedures step by step; every CAS is one atomic step together with its
//! ghost `sync`.

use crate::monitor::{Model, Outcome, Violation};
use crate::step::{Env, StepError, Tx};
use flowcore::conditions::HarrisCondition;
use flowcore::heap::heap_violations;
use flowcore::{
    builtin_condition, check_global, fg_decompose, interface_of, Addr, ConditionKind, Flat, FlowDomain, FlowGraph,
    FlowValue, GlobalInvariant, Heap, HeapValue, InflowedGraph, LabelDomain, NodeId, NodeLabel, Record, State,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarrisOp {
    Insert,
    Delete,
}

/// Fault injection switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarrisMutant {
    #[default]
    None,
    /// Delete skips the mark-bit write but still takes the node.
    SkipMark,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pc {
    Start,
    Traverse,
    Alloc,
    Mark,
    Cas,
    Unmark,
    Free,
    ReadX,
    CasMark,
    Append,
    AdvanceFt,
    Unlink,
    Done,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Thread {
    pub ops: Vec<HarrisOp>,
    pub idx: usize,
    pub pc: Pc,
    pub l: Option<Addr>,
    pub r: Option<Addr>,
    pub x: Option<Addr>,
    pub n: Option<Addr>,
}

impl Thread {
    fn op(&self) -> Option<HarrisOp> {
        self.ops.get(self.idx).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub s: State,
    /// The shared free-list tail variable.
    pub ft: Addr,
    pub threads: Vec<Thread>,
}

pub struct HarrisModel {
    pub mh: Addr,
    pub fh: Addr,
    pub init: State,
    pub init_ft: Addr,
    pub ops: Vec<Vec<HarrisOp>>,
    pub mutant: HarrisMutant,
    d: FlowDomain,
    a: LabelDomain,
}

fn rec(next: HeapValue, fnext: HeapValue) -> Record {
    Record::from([("next".to_string(), next), ("fnext".to_string(), fnext)])
}

fn marked(a: &Addr) -> HeapValue {
    HeapValue::Ptr {
        addr: a.clone(),
        marked: true,
    }
}

fn ptr_or_null(a: &Option<Addr>) -> HeapValue {
    a.as_ref().map_or(HeapValue::Null, |a| HeapValue::ptr(a.clone()))
}

/// The pointer stripped of its mark, or `None` for null.
fn unmarked_target(v: &HeapValue) -> Result<Option<Addr>, StepError> {
    match v {
        HeapValue::Null => Ok(None),
        HeapValue::Ptr { addr, .. } => Ok(Some(addr.clone())),
        v => Err(StepError::Shape(format!("next holds {v}"))),
    }
}

/// `mh → n1 → … → n{len-1} → null` and the free list `fh → ft`, whose
/// nodes are marked by thread 0 and point (marked) at `mh`.
pub fn initial_state(len: usize) -> State {
    let d = flowcore::conditions::harris_domain();
    let mh = NodeId::new("mh");
    let fh = NodeId::new("fh");
    let ft = NodeId::new("ft");
    let main: Vec<NodeId> = (0..len.max(1)).map(|i| if i == 0 { mh.clone() } else { NodeId::from(format!("n{i}")) }).collect();
    let mut heap = Heap::new();
    let mut g = FlowGraph::new();
    for (i, n) in main.iter().enumerate() {
        let next = main.get(i + 1);
        heap.insert(n.clone(), rec(ptr_or_null(&next.cloned()), HeapValue::Null));
        g.add_node(n.clone(), NodeLabel::Flat(Flat::Bottom)).expect("fresh");
    }
    heap.insert(fh.clone(), rec(marked(&mh), HeapValue::ptr(ft.clone())));
    heap.insert(ft.clone(), rec(marked(&mh), HeapValue::Null));
    for n in [&fh, &ft] {
        g.add_node(n.clone(), NodeLabel::Flat(Flat::Elem(0))).expect("fresh");
    }
    for w in main.windows(2) {
        g.set_edge(&w[0], &w[1], FlowValue::counts(1, 0)).expect("declared");
    }
    g.set_edge(&fh, &mh, FlowValue::counts(1, 0)).expect("declared");
    g.set_edge(&ft, &mh, FlowValue::counts(1, 0)).expect("declared");
    g.set_edge(&fh, &ft, FlowValue::counts(0, 1)).expect("declared");
    let inflow = [(mh, FlowValue::counts(1, 0)), (fh, FlowValue::counts(0, 1))].into_iter().collect();
    let h = InflowedGraph::new(g, inflow, &d).expect("inflow on nodes");
    State::from_graph(heap, h).expect("every cell is a node")
}

impl HarrisModel {
    /// Threads are numbered from 1; `ops[i]` is run by thread `i + 1`.
    pub fn new(list_len: usize, ops: Vec<Vec<HarrisOp>>, mutant: HarrisMutant) -> Self {
        HarrisModel {
            mh: NodeId::new("mh"),
            fh: NodeId::new("fh"),
            init: initial_state(list_len),
            init_ft: NodeId::new("ft"),
            ops,
            mutant,
            d: flowcore::conditions::harris_domain(),
            a: LabelDomain::Flat,
        }
    }

    fn gamma(&self, ft: &Addr) -> HarrisCondition {
        HarrisCondition {
            mh: self.mh.clone(),
            fh: self.fh.clone(),
            ft: ft.clone(),
        }
    }

    pub fn global(&self, ft: &Addr) -> GlobalInvariant {
        builtin_condition(&ConditionKind::Harris {
            mh: self.mh.clone(),
            fh: self.fh.clone(),
            ft: ft.clone(),
        })
        .expect("distinct heads")
        .global
    }

    /// Nodes a thread has marked but not yet published.
    fn local_nodes(c: &Config) -> BTreeSet<Addr> {
        c.threads
            .iter()
            .filter(|th| matches!(th.pc, Pc::Cas | Pc::Unmark))
            .filter_map(|th| th.n.clone())
            .collect()
    }

    /// Allocated cells not yet marked, or already unmarked, by their thread.
    fn owned_unmarked(c: &Config) -> BTreeSet<Addr> {
        c.threads
            .iter()
            .filter(|th| matches!(th.pc, Pc::Mark | Pc::Free))
            .filter_map(|th| th.n.clone())
            .collect()
    }

    fn exec(&self, c: &Config, ti: usize) -> Result<Option<(Config, String)>, (String, StepError)> {
        let th = &c.threads[ti];
        if th.op().is_none() {
            return Ok(None);
        }
        let t = (ti + 1) as u64;
        let gamma = self.gamma(&c.ft);
        let env = Env {
            gamma: &gamma,
            d: &self.d,
            a: &self.a,
        };
        let mut tx = Tx::new(&c.s, env);
        let mut nt = th.clone();
        let mut ft = c.ft.clone();
        let label;
        macro_rules! go {
            ($e:expr) => {
                match $e {
                    Ok(v) => v,
                    Err(e) => return Err((format!("t{t} {:?}", th.pc), e)),
                }
            };
        }
        match th.pc {
            Pc::Start => {
                nt.l = Some(self.mh.clone());
                nt.r = go!(unmarked_target(&go!(tx.read(&self.mh, "next"))));
                nt.pc = Pc::Traverse;
                label = format!("t{t} read mh.next");
            }
            Pc::Traverse => unreachable!("traversal has two outcomes"),
            Pc::Alloc => {
                // A retry allocates the same (freed) name, so a retry loop
                // revisits the same configuration.
                let n = NodeId::from(format!("t{t}"));
                go!(tx.alloc(&n, rec(ptr_or_null(&nt.r), HeapValue::Null)));
                nt.n = Some(n);
                nt.pc = Pc::Mark;
                label = format!("t{t} n := new Node(r, null)");
            }
            Pc::Mark => {
                let n = nt.n.clone().expect("allocated");
                go!(tx.mark(&n));
                nt.pc = Pc::Cas;
                label = format!("t{t} mark(n, n)");
            }
            Pc::Cas => {
                let l = nt.l.clone().expect("l");
                let n = nt.n.clone().expect("n");
                if go!(tx.read(&l, "next")) == ptr_or_null(&nt.r) {
                    go!(tx.write(&l, "next", HeapValue::ptr(n.clone())));
                    go!(tx.sync(&[&l, &n], &[]));
                    nt.pc = Pc::Done;
                    label = format!("t{t} CAS({l}.next, r, {n}) succeeds; sync");
                } else {
                    nt.pc = Pc::Unmark;
                    label = format!("t{t} CAS({l}.next, r, {n}) fails");
                }
            }
            Pc::Unmark => {
                go!(tx.unmark(nt.n.as_ref().expect("n")));
                nt.pc = Pc::Free;
                label = format!("t{t} unmark(n)");
            }
            Pc::Free => {
                go!(tx.free(nt.n.as_ref().expect("n")));
                nt.n = None;
                nt.pc = Pc::Start;
                label = format!("t{t} free(n); retry");
            }
            Pc::ReadX => {
                let r = nt.r.clone().expect("r");
                let x = go!(tx.read(&r, "next"));
                match x {
                    HeapValue::Ptr { marked: true, .. } => {
                        nt.pc = Pc::Start;
                        label = format!("t{t} x := {r}.next is marked; retry");
                    }
                    HeapValue::Null => {
                        nt.pc = Pc::Done;
                        label = format!("t{t} x := {r}.next is null; {r} is the tail");
                    }
                    v => {
                        nt.x = go!(unmarked_target(&v));
                        nt.pc = Pc::CasMark;
                        label = format!("t{t} x := {r}.next");
                    }
                }
            }
            Pc::CasMark => {
                let r = nt.r.clone().expect("r");
                let x = nt.x.clone().expect("x");
                if go!(tx.read(&r, "next")) == HeapValue::ptr(x.clone()) {
                    if self.mutant != HarrisMutant::SkipMark {
                        go!(tx.write(&r, "next", marked(&x)));
                    }
                    go!(tx.sync(&[&r], &[(&r, NodeLabel::Flat(Flat::Elem(t)))]));
                    nt.pc = Pc::Append;
                    label = format!("t{t} CAS({r}.next, {x}, marked {x}) succeeds; sync");
                } else {
                    nt.pc = Pc::Start;
                    label = format!("t{t} CAS({r}.next, {x}, marked {x}) fails; retry");
                }
            }
            Pc::Append => {
                // A failed CAS on ft.fnext spins; the step is enabled only
                // when it would succeed.
                if go!(tx.read(&c.ft, "fnext")) != HeapValue::Null {
                    return Ok(None);
                }
                let r = nt.r.clone().expect("r");
                go!(tx.write(&c.ft, "fnext", HeapValue::ptr(r.clone())));
                go!(tx.sync(&[&c.ft, &r], &[]));
                nt.pc = Pc::AdvanceFt;
                label = format!("t{t} CAS({}.fnext, null, {r}) succeeds; sync", c.ft);
            }
            Pc::AdvanceFt => {
                ft = nt.r.clone().expect("r");
                nt.pc = Pc::Unlink;
                label = format!("t{t} ft := {ft}");
            }
            Pc::Unlink => {
                let l = nt.l.clone().expect("l");
                let r = nt.r.clone().expect("r");
                let x = nt.x.clone().expect("x");
                if go!(tx.read(&l, "next")) == HeapValue::ptr(r.clone()) {
                    go!(tx.write(&l, "next", HeapValue::ptr(x.clone())));
                    go!(tx.sync(&[&l, &r], &[]));
                    label = format!("t{t} CAS({l}.next, {r}, {x}) succeeds; sync");
                } else {
                    label = format!("t{t} CAS({l}.next, {r}, {x}) fails");
                }
                nt.pc = Pc::Done;
            }
            Pc::Done => return Ok(None),
        }
        if nt.pc == Pc::Done {
            nt.idx += 1;
            nt.pc = if nt.op().is_some() { Pc::Start } else { Pc::Done };
            nt.l = None;
            nt.r = None;
            nt.x = None;
            nt.n = None;
        }
        let (s, _) = tx.finish();
        let mut threads = c.threads.clone();
        threads[ti] = nt;
        Ok(Some((Config { s, ft, threads }, label)))
    }

    fn traverse(&self, c: &Config, ti: usize) -> Vec<Outcome<Config>> {
        let th = &c.threads[ti];
        let t = ti + 1;
        let mut outs = Vec::new();
        if let Some(r) = &th.r {
            // l := r; r := getUnmarked(l.next)
            match c.s.read(r, "next") {
                Ok(v) => match unmarked_target(v) {
                    Ok(next) => {
                        let mut nt = th.clone();
                        nt.l = Some(r.clone());
                        nt.r = next;
                        let mut threads = c.threads.clone();
                        threads[ti] = nt;
                        outs.push(Outcome::Next {
                            config: Config {
                                s: c.s.clone(),
                                ft: c.ft.clone(),
                                threads,
                            },
                            label: format!("t{t} advance to {r}"),
                            violations: vec![],
                        });
                    }
                    Err(e) => outs.push(abort(format!("t{t} advance"), e)),
                },
                Err(e) => outs.push(abort(format!("t{t} advance"), e.into())),
            }
        }
        let mut nt = th.clone();
        let stop_label;
        match (th.op(), &th.r) {
            (Some(HarrisOp::Insert), _) => {
                nt.pc = Pc::Alloc;
                stop_label = format!("t{t} stop at l = {}", th.l.as_ref().expect("l"));
            }
            (_, None) => {
                nt.idx += 1;
                nt.pc = if nt.op().is_some() { Pc::Start } else { Pc::Done };
                nt.l = None;
                stop_label = format!("t{t} r = null; return");
            }
            (_, Some(r)) => {
                nt.pc = Pc::ReadX;
                stop_label = format!("t{t} stop at r = {r}");
            }
        }
        let mut threads = c.threads.clone();
        threads[ti] = nt;
        outs.push(Outcome::Next {
            config: Config {
                s: c.s.clone(),
                ft: c.ft.clone(),
                threads,
            },
            label: stop_label,
            violations: vec![],
        });
        outs
    }

    /// Φ, `γ` on every published node, leak coverage.
    pub fn violations(&self, c: &Config) -> Vec<Violation> {
        let mut v = Vec::new();
        let g = c.s.graph();
        let i = interface_of(g, &self.d, &self.a);
        for msg in check_global(&i, &self.global(&c.ft)) {
            v.push(Violation::new("phi", msg));
        }
        let local = Self::local_nodes(c);
        let shared: BTreeSet<NodeId> = g.graph().nodes().filter(|n| !local.contains(*n)).cloned().collect();
        let (hs, _) = fg_decompose(g, &shared, &self.d);
        for nv in heap_violations(&c.s, &hs, &self.gamma(&c.ft), &self.d) {
            v.push(Violation::new("gamma", nv.to_string()));
        }
        let owned = Self::owned_unmarked(c);
        for x in c.s.heap().keys() {
            if !c.s.nodemap().contains_key(x) && !owned.contains(x) {
                v.push(Violation::new("leak", format!("cell {x} is neither a node nor owned by a thread")));
            }
        }
        v
    }
}

fn abort(label: String, e: StepError) -> Outcome<Config> {
    Outcome::Abort {
        label,
        violations: vec![Violation::new(e.kind(), e.to_string())],
    }
}

impl Model for HarrisModel {
    type Config = Config;

    fn initial(&self) -> Config {
        Config {
            s: self.init.clone(),
            ft: self.init_ft.clone(),
            threads: self
                .ops
                .iter()
                .map(|ops| Thread {
                    ops: ops.clone(),
                    idx: 0,
                    pc: if ops.is_empty() { Pc::Done } else { Pc::Start },
                    l: None,
                    r: None,
                    x: None,
                    n: None,
                })
                .collect(),
        }
    }

    fn thread_count(&self) -> usize {
        self.ops.len()
    }

    fn step(&self, c: &Config, t: usize) -> Vec<Outcome<Config>> {
        if c.threads[t].pc == Pc::Traverse {
            return self.traverse(c, t);
        }
        match self.exec(c, t) {
            Ok(None) => vec![],
            Ok(Some((config, label))) => vec![Outcome::Next {
                config,
                label,
                violations: vec![],
            }],
            Err((label, e)) => vec![abort(label, e)],
        }
    }

    fn finished(&self, c: &Config) -> bool {
        c.threads.iter().all(|th| th.pc == Pc::Done)
    }

    fn check_state(&self, c: &Config) -> Vec<Violation> {
        self.violations(c)
    }

    fn check_final(&self, c: &Config) -> Vec<Violation> {
        self.violations(c)
    }
}
