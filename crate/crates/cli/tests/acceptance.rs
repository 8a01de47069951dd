//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Criterion 5 is expected to fail: the last-edge domain is not
//! left-distributive, so neither is any product containing it. The test
//! passes only if exactly that criterion fails, and only for that reason.

use flowcheck::codec::{decode_doc, encode_doc, parse_text, to_text, Doc};
use flowcheck::commands::{cmd_extend, parse_region};
use flowcore::{fg_compose, fg_decompose, inflow_equiv, interface_of, FlowDomain, FlowValue, Inflow, NodeId};
use floworacle::{algebra_reports, interface_cases, oracle_cases, run_case, separation_cases, SuiteReport};
use flowsim::bptree::{bptree_state, BTreeOps, TreeSpec};
use flowsim::dict::{DictModel, DictMutant, NodeOps};
use flowsim::harris::{HarrisModel, HarrisMutant, HarrisOp};
use flowsim::monitor::{explore, Bounds, ExploreSummary};
use flowsim::seqspec::OpKind;
use flowsim::sortedlist::{list_state, ListOps};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

struct Verdict {
    id: usize,
    passed: bool,
    elapsed: Duration,
    notes: Vec<String>,
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> Doc {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    decode_doc(&parse_text(&text).unwrap(), None).unwrap()
}

fn n(s: &str) -> NodeId {
    NodeId::new(s)
}

fn one() -> FlowValue {
    FlowValue::count(1)
}

fn inflow(xs: &[&str]) -> Inflow {
    xs.iter().map(|x| (n(x), one())).collect()
}

fn set(xs: &[&str]) -> BTreeSet<NodeId> {
    xs.iter().map(|x| n(x)).collect()
}

/// Records `what` as a note when `ok` is false.
struct Checks(Vec<String>);

impl Checks {
    fn new() -> Self {
        Checks(Vec::new())
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.0.push(what.into());
        }
    }

    fn finish(self, id: usize, elapsed: Duration, budget: Duration) -> Verdict {
        let mut notes = self.0;
        if elapsed > budget {
            notes.push(format!("took {elapsed:.2?}, budget {budget:?}"));
        }
        Verdict {
            id,
            passed: notes.is_empty(),
            elapsed,
            notes,
        }
    }
}

fn suites(c: &mut Checks, reports: &[SuiteReport], target: usize) {
    for r in reports {
        c.expect(r.instances >= target, format!("{}: only {} instances", r.name, r.instances));
        if let Some(f) = r.failures.first() {
            c.expect(false, format!("{}: {} failures, first: {f}", r.name, r.failures.len()));
        }
    }
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let d = FlowDomain::PathCount;
    let doc = load("fig2.graph");
    let h = doc.graph();
    for x in h.graph().nodes() {
        c.expect(h.flow_at(x, &d) == one(), format!("flow at {x} is {}", h.flow_at(x, &d)));
    }
    c.expect(h.graph().nodes().count() == 7, "fig2 has 7 nodes");
    let (h1, h2) = fg_decompose(h, &set(&["n1", "n2", "n4"]), &d);
    c.expect(*h1.inflow() == inflow(&["n1", "n2"]), "inflow of H1");
    c.expect(*h2.inflow() == inflow(&["n0", "n3", "n5", "n6"]), "inflow of H2");
    let i1 = interface_of(&h1, &d, doc.labels());
    let fm: Vec<((NodeId, NodeId), FlowValue)> = i1.flowmap.clone().into_iter().collect();
    let want = vec![((n("n1"), n("n3")), one()), ((n("n1"), n("n5")), one()), ((n("n2"), n("n6")), one())];
    c.expect(fm == want, format!("I1 flow map {fm:?}"));
    match fg_compose(&h1, &h2, &d) {
        Ok(back) => {
            c.expect(back.equiv(h), "recomposition has a different graph or flow");
            c.expect(inflow_equiv(back.inflow(), h.inflow(), h.graph(), &d), "recomposed inflow not equivalent");
        }
        Err(e) => c.expect(false, format!("recomposition undefined: {e}")),
    }
    c.finish(1, t.elapsed(), Duration::from_secs(1))
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let (before, after) = (load("fig4-before.snapshot"), load("fig4-after.snapshot"));
    let d = FlowDomain::PathCount;
    let fm = |doc: &Doc, region: &[&str]| {
        let (part, _) = fg_decompose(doc.graph(), &set(region), &d);
        let i = interface_of(&part, &d, doc.labels());
        i.flowmap.into_iter().map(|((s, t), v)| (s.to_string(), t.to_string(), v)).collect::<Vec<_>>()
    };
    let e = |s: &str, t: &str| vec![(s.to_string(), t.to_string(), one())];
    c.expect(fm(&before, &["l"]) == e("l", "r"), "H_{l}");
    c.expect(fm(&after, &["l"]) == e("l", "n"), "H'_{l}");
    c.expect(fm(&before, &["l", "n"]) == e("l", "r"), "H_{l,n}");
    c.expect(fm(&after, &["l", "n"]) == e("l", "r"), "H'_{l,n}");
    let both = cmd_extend(&before, &after, &parse_region("l,n"));
    c.expect(both.code == 0, format!("extend over {{l,n}}: {}", both.report));
    let left = cmd_extend(&before, &after, &parse_region("l"));
    c.expect(left.code == 1 && left.report["extension"] == json!(false), format!("extend over {{l}}: {}", left.report));
    c.finish(2, t.elapsed(), Duration::from_secs(1))
}

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let d = FlowDomain::PathCount;
    let (a, b) = (load("inf-cycle-1.graph"), load("inf-cycle-2.graph"));
    match fg_compose(a.graph(), b.graph(), &d) {
        Ok(h) => {
            let g = h.graph();
            c.expect(inflow_equiv(h.inflow(), &inflow(&["n1"]), g, &d), "composite inflow not ~ {n1: 1}");
            c.expect(inflow_equiv(h.inflow(), &inflow(&["n2"]), g, &d), "composite inflow not ~ {n2: 1}");
        }
        Err(e) => c.expect(false, format!("composition undefined: {e}")),
    }
    c.finish(3, t.elapsed(), Duration::from_secs(1))
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let reports: Vec<SuiteReport> = oracle_cases().iter().enumerate().map(|(i, k)| run_case(k, 500, 4000 + i as u64)).collect();
    suites(&mut c, &reports, 500);
    c.finish(4, t.elapsed(), Duration::from_secs(60))
}

fn criterion_5() -> (Verdict, bool) {
    let t = Instant::now();
    let mut c = Checks::new();
    let mut only_last_edge = true;
    for (d, r) in algebra_reports() {
        if !r.passed() {
            let laws = r.violated_laws();
            let w = r.violations[0].witness.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
            c.expect(false, format!("{d}: {} violations of {laws:?}, first witness ({w})", r.violations.len()));
            only_last_edge &= d.to_string().contains("last_edge") && laws == ["left distributive"];
        }
    }
    let reports: Vec<SuiteReport> =
        separation_cases().iter().enumerate().map(|(i, k)| run_case(k, 200, 5000 + i as u64)).collect();
    for r in &reports {
        only_last_edge &= r.passed(200);
    }
    suites(&mut c, &reports, 200);
    let v = c.finish(5, t.elapsed(), Duration::from_secs(60));
    let documented = only_last_edge && !v.notes.iter().any(|s| s.starts_with("took"));
    (v, documented)
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let reports: Vec<SuiteReport> =
        interface_cases().iter().enumerate().map(|(i, k)| run_case(k, 100, 6000 + i as u64)).collect();
    suites(&mut c, &reports, 100);
    c.finish(6, t.elapsed(), Duration::from_secs(120))
}

fn exploration(c: &mut Checks, what: &str, s: &ExploreSummary) {
    c.expect(s.passed(), format!("{what}: {} failing schedules, first {:?}", s.failing, s.first));
    c.expect(s.excluded == 0, format!("{what}: {} excluded schedules", s.excluded));
}

fn criterion_7() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let ops = vec![vec![HarrisOp::Insert], vec![HarrisOp::Delete]];
    let good = explore(&HarrisModel::new(3, ops.clone(), HarrisMutant::None), Bounds::default());
    exploration(&mut c, "harris", &good.summary);
    let bad = explore(&HarrisModel::new(3, ops, HarrisMutant::SkipMark), Bounds::default());
    c.expect(bad.summary.failing > 0, "skip-mark mutant was not caught");
    c.finish(7, t.elapsed(), Duration::from_secs(300))
}

type Workload = Vec<Vec<(OpKind, i64)>>;

/// Fixed mixes plus seeded random 2 x 2 workloads over keys 1..=4.
fn dictionary_workloads() -> Vec<Workload> {
    use OpKind::*;
    let mut ws = vec![
        vec![vec![(Insert, 2), (Delete, 3)], vec![(Insert, 3), (Member, 2)]],
        vec![vec![(Insert, 4), (Delete, 1)], vec![(Delete, 4), (Insert, 1)]],
        vec![vec![(Insert, 2), (Insert, 2)], vec![(Delete, 2), (Member, 2)]],
        vec![vec![(Delete, 1), (Delete, 3)], vec![(Delete, 1), (Delete, 3)]],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let kinds = [Insert, Delete, Member];
    for _ in 0..12 {
        ws.push(
            (0..2)
                .map(|_| (0..2).map(|_| (kinds[rng.gen_range(0..3)], rng.gen_range(1..=4))).collect())
                .collect(),
        );
    }
    ws
}

fn dictionary<O: NodeOps + Sync>(c: &mut Checks, what: &str, m: &DictModel<O>) {
    let r = explore(m, Bounds::default());
    exploration(c, what, &r.summary);
    c.expect(!r.final_states.is_empty(), format!("{what}: no final states"));
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let tree = TreeSpec::Node {
        keys: vec![3],
        children: vec![TreeSpec::Leaf(vec![1]), TreeSpec::Leaf(vec![3])],
    };
    for w in dictionary_workloads() {
        let list = DictModel::new(ListOps, n("r"), list_state(&[1, 3]), w.clone(), DictMutant::None);
        dictionary(&mut c, &format!("sorted list {w:?}"), &list);
        let bt = DictModel::new(BTreeOps { b: 2 }, n("r"), bptree_state(2, &tree).unwrap(), w.clone(), DictMutant::None);
        dictionary(&mut c, &format!("B+ tree {w:?}"), &bt);
    }
    c.finish(8, t.elapsed(), Duration::from_secs(600))
}

fn flowcheck(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_flowcheck")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn criterion_9() -> Verdict {
    let t = Instant::now();
    let mut c = Checks::new();
    let docs = [
        "fig2.graph",
        "diamond.graph",
        "inf-cycle-1.graph",
        "inf-cycle-2.graph",
        "fig4-before.snapshot",
        "fig4-after.snapshot",
        "fig12.snapshot",
        "harris-fig1.snapshot",
    ];
    for name in docs {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let doc = load(name);
        c.expect(to_text(&encode_doc(&doc)) == text, format!("{name} does not re-serialize byte for byte"));
        c.expect(decode_doc(&encode_doc(&doc), None).as_ref() == Ok(&doc), format!("{name} does not round-trip"));
    }
    let f = |x: &str| fixture(x).display().to_string();
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["flow".into(), f("fig2.graph")], 0),
        (vec!["check".into(), f("fig12.snapshot"), "--condition".into(), "dictionary(r, btree:2)".into()], 0),
        (vec!["check".into(), f("harris-fig1.snapshot"), "--condition".into(), "harris(mh, fh, n10)".into()], 0),
        (vec!["check".into(), f("diamond.graph"), "--condition".into(), "tree(a)".into()], 1),
        (vec!["check".into(), f("fig2.graph"), "--condition".into(), "harris(a, b, c)".into()], 2),
        (vec!["extend".into(), f("fig4-before.snapshot"), f("fig4-after.snapshot"), "--region".into(), "l,n".into()], 0),
        (vec!["extend".into(), f("fig4-before.snapshot"), f("fig4-after.snapshot"), "--region".into(), "l".into()], 1),
        (vec!["compose".into(), f("fig2.graph"), f("fig2.graph")], 1),
        (vec!["lin".into(), f("double-insert.history")], 1),
        (vec!["lin".into(), f("overlap.history")], 0),
        (vec!["simulate".into(), f("harris-skip-mark.run")], 1),
        (vec!["simulate".into(), f("harris-1x1.run")], 0),
        (vec!["flow".into(), f("sortedlist-2x2.run")], 2),
        (vec!["flow".into(), f("missing.graph")], 2),
        (vec!["bogus".into()], 2),
    ];
    for (args, want) in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, out) = flowcheck(&refs);
        c.expect(code == want, format!("{} exited {code}, wanted {want}", args.join(" ")));
        // Usage errors go to stderr.
        if args[0] != "bogus" {
            c.expect(serde_json::from_str::<serde_json::Value>(&out).is_ok(), format!("{}: unparsable report", args.join(" ")));
        }
    }
    c.finish(9, t.elapsed(), Duration::from_secs(5))
}

#[test]
fn acceptance() {
    let (v5, documented_5) = criterion_5();
    let verdicts = vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        v5,
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    for v in &verdicts {
        println!("criterion {}: {} ({:.2?})", v.id, if v.passed { "PASS" } else { "FAIL" }, v.elapsed);
        for note in &v.notes {
            println!("    {note}");
        }
    }
    let failing: Vec<usize> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    assert!(
        failing.is_empty() || (failing == [5] && documented_5),
        "unexpected failures: {failing:?}"
    );
}
