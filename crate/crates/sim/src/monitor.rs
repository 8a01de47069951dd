//! Bounded interleaving exploration over thread machines.
//!
//! A model exposes a configuration type and a step relation per thread.
//! `explore` runs a memoized depth-first search over every interleaving,
//! `run` replays one schedule and `random_run` draws one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::{Hash, Hasher};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: impl Into<String>, detail: impl Into<String>) -> Self {
        Violation {
            kind: kind.into(),
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.kind, self.detail)
    }
}

pub enum Outcome<C> {
    Next {
        config: C,
        label: String,
        violations: Vec<Violation>,
    },
    /// The step itself failed (ghost abort, memory error).
    Abort { label: String, violations: Vec<Violation> },
    /// The step leaves the bounded workload (for example a full node).
    Excluded { label: String, reason: String },
}

pub trait Model {
    type Config: Clone + Eq + Hash + Debug;

    fn initial(&self) -> Self::Config;
    fn thread_count(&self) -> usize;
    /// Possible steps of thread `t` (0-based). Empty when the thread is
    /// blocked or finished.
    fn step(&self, c: &Self::Config, t: usize) -> Vec<Outcome<Self::Config>>;
    fn finished(&self, c: &Self::Config) -> bool;
    /// Invariants checked after every step.
    fn check_state(&self, c: &Self::Config) -> Vec<Violation>;
    /// Checks on a configuration where every thread has finished.
    fn check_final(&self, c: &Self::Config) -> Vec<Violation>;
}

/// One scheduling decision: the thread and which of its possible steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pick {
    pub thread: usize,
    #[serde(default)]
    pub choice: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub thread: usize,
    pub label: String,
    pub pre: String,
    pub post: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub schedule: Vec<Pick>,
    pub trace: Vec<TraceEntry>,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub max_steps: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_steps: 400 }
    }
}

/// Aggregate result of an exhaustive exploration. Schedule counts are
/// numbers of distinct maximal step sequences; they are exact unless
/// `cyclic` is set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreSummary {
    pub states: usize,
    pub transitions: u64,
    pub schedules: u128,
    pub failing: u128,
    pub excluded: u128,
    pub bound_hits: u64,
    pub finals: usize,
    pub cyclic: bool,
    pub violation_kinds: BTreeMap<String, u64>,
    pub first: Option<Counterexample>,
}

impl ExploreSummary {
    pub fn passed(&self) -> bool {
        self.failing == 0 && self.bound_hits == 0
    }
}

pub struct ExploreReport<C> {
    pub summary: ExploreSummary,
    /// Distinct final configurations, in discovery order.
    pub final_states: Vec<C>,
}

pub fn digest<T: Hash>(x: &T) -> String {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    format!("{:016x}", h.finish())
}

#[derive(Clone, Copy, Default)]
struct Counts {
    ok: u128,
    failing: u128,
    excluded: u128,
}

impl Counts {
    fn add(&mut self, o: Counts) {
        self.ok = self.ok.saturating_add(o.ok);
        self.failing = self.failing.saturating_add(o.failing);
        self.excluded = self.excluded.saturating_add(o.excluded);
    }
}

struct Explorer<'m, M: Model> {
    model: &'m M,
    bounds: Bounds,
    memo: HashMap<M::Config, Option<Counts>>,
    path: Vec<(Pick, TraceEntry)>,
    summary: ExploreSummary,
    finals: Vec<M::Config>,
}

impl<M: Model> Explorer<'_, M> {
    fn fail(&mut self, vs: &[Violation]) {
        for v in vs {
            *self.summary.violation_kinds.entry(v.kind.clone()).or_default() += 1;
        }
        if self.summary.first.is_none() {
            self.summary.first = Some(Counterexample {
                schedule: self.path.iter().map(|(p, _)| *p).collect(),
                trace: self.path.iter().map(|(_, e)| e.clone()).collect(),
                violations: vs.to_vec(),
            });
        }
    }

    fn visit(&mut self, c: &M::Config) -> Counts {
        match self.memo.get(c) {
            Some(Some(n)) => return *n,
            Some(None) => {
                self.summary.cyclic = true;
                return Counts::default();
            }
            None => {}
        }
        if self.path.len() >= self.bounds.max_steps {
            self.summary.bound_hits += 1;
            return Counts::default();
        }
        self.memo.insert(c.clone(), None);
        let mut out = Counts::default();
        if self.model.finished(c) {
            self.summary.finals += 1;
            self.finals.push(c.clone());
            let vs = self.model.check_final(c);
            if vs.is_empty() {
                out.ok = 1;
            } else {
                self.fail(&vs);
                out.failing = 1;
            }
            self.memo.insert(c.clone(), Some(out));
            return out;
        }
        let pre = digest(c);
        let mut any = false;
        for t in 0..self.model.thread_count() {
            for (i, o) in self.model.step(c, t).into_iter().enumerate() {
                any = true;
                self.summary.transitions += 1;
                let pick = Pick { thread: t, choice: i };
                match o {
                    Outcome::Next {
                        config,
                        label,
                        mut violations,
                    } => {
                        violations.extend(self.model.check_state(&config));
                        let entry = TraceEntry {
                            thread: t,
                            label,
                            pre: pre.clone(),
                            post: Some(digest(&config)),
                        };
                        self.path.push((pick, entry));
                        if violations.is_empty() {
                            let sub = self.visit(&config);
                            out.add(sub);
                        } else {
                            self.fail(&violations);
                            out.failing = out.failing.saturating_add(1);
                        }
                        self.path.pop();
                    }
                    Outcome::Abort { label, violations } => {
                        let entry = TraceEntry {
                            thread: t,
                            label,
                            pre: pre.clone(),
                            post: None,
                        };
                        self.path.push((pick, entry));
                        self.fail(&violations);
                        self.path.pop();
                        out.failing = out.failing.saturating_add(1);
                    }
                    Outcome::Excluded { .. } => {
                        out.excluded = out.excluded.saturating_add(1);
                    }
                }
            }
        }
        if !any {
            let v = [Violation::new("deadlock", "no thread can step and some thread has not finished")];
            self.fail(&v);
            out.failing = 1;
        }
        self.memo.insert(c.clone(), Some(out));
        out
    }
}

/// Every interleaving of every possible step, in thread order then
/// choice order.
pub fn explore<M: Model + Sync>(model: &M, bounds: Bounds) -> ExploreReport<M::Config>
where
    M::Config: Send,
{
    // Deep schedules recurse deeply; run on a thread with a large stack.
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, || {
                let mut ex = Explorer {
                    model,
                    bounds,
                    memo: HashMap::new(),
                    path: Vec::new(),
                    summary: ExploreSummary::default(),
                    finals: Vec::new(),
                };
                let init = model.initial();
                let vs = model.check_state(&init);
                if !vs.is_empty() {
                    ex.fail(&vs);
                    ex.summary.failing = 1;
                } else {
                    let c = ex.visit(&init);
                    ex.summary.schedules = c.ok;
                    ex.summary.failing = c.failing;
                    ex.summary.excluded = c.excluded;
                }
                ex.summary.states = ex.memo.len();
                ExploreReport {
                    summary: ex.summary,
                    final_states: ex.finals,
                }
            })
            .expect("spawn explorer")
            .join()
            .expect("explorer panicked")
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Passed,
    Violated,
    Excluded(String),
    /// The schedule ended before every thread finished.
    Incomplete,
    /// The schedule named a thread or choice that is not enabled.
    InvalidPick(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub schedule: Vec<Pick>,
    pub trace: Vec<TraceEntry>,
    pub violations: Vec<Violation>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status == RunStatus::Passed
    }
}

/// Replays `schedule` from the initial configuration, checking after every
/// step. Stops at the first violation.
pub fn run<M: Model>(model: &M, schedule: &[Pick]) -> (RunReport, M::Config) {
    let mut c = model.initial();
    let mut rep = RunReport {
        status: RunStatus::Incomplete,
        schedule: Vec::new(),
        trace: Vec::new(),
        violations: model.check_state(&c),
    };
    if !rep.violations.is_empty() {
        rep.status = RunStatus::Violated;
        return (rep, c);
    }
    for (i, p) in schedule.iter().enumerate() {
        let mut outs = if p.thread < model.thread_count() { model.step(&c, p.thread) } else { Vec::new() };
        if p.choice >= outs.len() {
            rep.status = RunStatus::InvalidPick(i);
            return (rep, c);
        }
        let pre = digest(&c);
        rep.schedule.push(*p);
        match outs.swap_remove(p.choice) {
            Outcome::Next {
                config,
                label,
                mut violations,
            } => {
                violations.extend(model.check_state(&config));
                rep.trace.push(TraceEntry {
                    thread: p.thread,
                    label,
                    pre,
                    post: Some(digest(&config)),
                });
                c = config;
                if !violations.is_empty() {
                    rep.violations = violations;
                    rep.status = RunStatus::Violated;
                    return (rep, c);
                }
            }
            Outcome::Abort { label, violations } => {
                rep.trace.push(TraceEntry {
                    thread: p.thread,
                    label,
                    pre,
                    post: None,
                });
                rep.violations = violations;
                rep.status = RunStatus::Violated;
                return (rep, c);
            }
            Outcome::Excluded { label, reason } => {
                rep.trace.push(TraceEntry {
                    thread: p.thread,
                    label,
                    pre,
                    post: None,
                });
                rep.status = RunStatus::Excluded(reason);
                return (rep, c);
            }
        }
    }
    if model.finished(&c) {
        rep.violations = model.check_final(&c);
        rep.status = if rep.violations.is_empty() { RunStatus::Passed } else { RunStatus::Violated };
    }
    (rep, c)
}

/// Runs to completion choosing uniformly among enabled steps.
pub fn random_run<M: Model>(model: &M, seed: u64, bounds: Bounds) -> (RunReport, M::Config) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = model.initial();
    let mut schedule = Vec::new();
    for _ in 0..bounds.max_steps {
        if model.finished(&c) {
            break;
        }
        let mut enabled = Vec::new();
        for t in 0..model.thread_count() {
            let n = model.step(&c, t).len();
            enabled.extend((0..n).map(|choice| Pick { thread: t, choice }));
        }
        if enabled.is_empty() {
            break;
        }
        let p = enabled[rng.gen_range(0..enabled.len())];
        schedule.push(p);
        let Some(Outcome::Next { config, violations, .. }) = model.step(&c, p.thread).into_iter().nth(p.choice) else {
            break;
        };
        if !violations.is_empty() || !model.check_state(&config).is_empty() {
            break;
        }
        c = config;
    }
    let (mut rep, end) = run(model, &schedule);
    if rep.status == RunStatus::Incomplete && !model.finished(&end) {
        let stuck = (0..model.thread_count()).all(|t| model.step(&end, t).is_empty());
        if stuck {
            rep.status = RunStatus::Violated;
            rep.violations = vec![Violation::new("deadlock", "no thread can step and some thread has not finished")];
        }
    }
    (rep, end)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two threads each increment a shared counter in two steps
    /// (read, write); the final value should be 2.
    struct Racy {
        atomic: bool,
    }

    #[derive(Clone, Debug, PartialEq, Eq, Hash)]
    struct Cfg {
        x: u8,
        pcs: [u8; 2],
        regs: [u8; 2],
    }

    impl Model for Racy {
        type Config = Cfg;
        fn initial(&self) -> Cfg {
            Cfg {
                x: 0,
                pcs: [0, 0],
                regs: [0, 0],
            }
        }
        fn thread_count(&self) -> usize {
            2
        }
        fn step(&self, c: &Cfg, t: usize) -> Vec<Outcome<Cfg>> {
            let mut n = c.clone();
            match c.pcs[t] {
                0 if self.atomic => {
                    n.x += 1;
                    n.pcs[t] = 2;
                }
                0 => {
                    n.regs[t] = c.x;
                    n.pcs[t] = 1;
                }
                1 => {
                    n.x = c.regs[t] + 1;
                    n.pcs[t] = 2;
                }
                _ => return vec![],
            }
            vec![Outcome::Next {
                config: n,
                label: format!("pc{}", c.pcs[t]),
                violations: vec![],
            }]
        }
        fn finished(&self, c: &Cfg) -> bool {
            c.pcs == [2, 2]
        }
        fn check_state(&self, _c: &Cfg) -> Vec<Violation> {
            vec![]
        }
        fn check_final(&self, c: &Cfg) -> Vec<Violation> {
            if c.x == 2 {
                vec![]
            } else {
                vec![Violation::new("lost-update", format!("x = {}", c.x))]
            }
        }
    }

    #[test]
    fn counts_interleavings() {
        let r = explore(&Racy { atomic: false }, Bounds::default());
        // 4 steps, 2 per thread: C(4,2) = 6 interleavings, 4 of which lose
        // an update.
        assert_eq!(r.summary.schedules + r.summary.failing, 6);
        assert_eq!(r.summary.failing, 4);
        let cex = r.summary.first.expect("counterexample");
        let (rep, _) = run(&Racy { atomic: false }, &cex.schedule);
        assert_eq!(rep.status, RunStatus::Violated);
        let ok = explore(&Racy { atomic: true }, Bounds::default());
        assert!(ok.summary.passed());
        assert_eq!(ok.summary.schedules, 2);
    }

    #[test]
    fn invalid_picks_are_reported() {
        let (rep, _) = run(&Racy { atomic: true }, &[Pick { thread: 5, choice: 0 }]);
        assert_eq!(rep.status, RunStatus::InvalidPick(0));
    }

    #[test]
    fn random_runs_finish() {
        for seed in 0..10 {
            let (rep, _) = random_run(&Racy { atomic: true }, seed, Bounds::default());
            assert!(rep.passed(), "{rep:?}");
        }
    }
}
