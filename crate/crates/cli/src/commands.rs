//! The subcommands as pure functions from parsed inputs to a report and
//! an exit code: 0 pass, 1 violation, 2 malformed input or usage.

use crate::codec::{self, decode_doc, encode_doc, encode_value, obj, Doc, GraphDoc, SnapshotDoc};
use flowcore::conditions::DictLayout;
use flowcore::heap::heap_violations;
use flowcore::{
    builtin_condition, capacity, check_global, contextual_extension, edgeset_report, fg_compose, fg_decompose,
    good_denotation_check, interface_of, state_compose, ConditionKind, FlowDomain, FlowInterface, NodeId,
};
use flowsim::lin::{lp_check, oracle_check, History, LinError};
use flowsim::workload::{simulate, Mode, SimError, Workload};
use serde_json::{json, Value};
use std::collections::BTreeSet;

pub const PASS: i32 = 0;
pub const VIOLATION: i32 = 1;
pub const MALFORMED: i32 = 2;

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

impl Outcome {
    fn verdict(passed: bool, report: Value) -> Self {
        Outcome {
            code: if passed { PASS } else { VIOLATION },
            report,
        }
    }

    pub fn malformed(msg: impl Into<String>) -> Self {
        Outcome {
            code: MALFORMED,
            report: json!({ "error": msg.into() }),
        }
    }
}

macro_rules! try_or_malformed {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Outcome::malformed(e.to_string()),
        }
    };
}

/// Parses file text into a graph or snapshot document.
pub fn load(text: &str, domain: Option<&FlowDomain>) -> codec::Result<Doc> {
    decode_doc(&codec::parse_text(text)?, domain)
}

/// Reads `name(arg, …)`: `tree(r)`, `list(r)`, `list(r, t)`,
/// `cyclic_list(r)`, `sorted_list(r)`, `harris(mh, fh, ft)`,
/// `dictionary(r, btree:B)` or `dictionary(r, sorted_list)`.
pub fn parse_condition(s: &str) -> codec::Result<ConditionKind> {
    let s = s.trim();
    let (name, args) = match s.split_once('(') {
        Some((n, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| format!("unclosed argument list in {s}"))?;
            (n.trim(), inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect::<Vec<_>>())
        }
        None => (s, vec![]),
    };
    let id = |a: &str| NodeId::new(a);
    Ok(match (name, args.as_slice()) {
        ("tree", [r]) => ConditionKind::Tree { root: id(r) },
        ("list", [r]) => ConditionKind::List {
            root: id(r),
            terminator: None,
        },
        ("list", [r, t]) => ConditionKind::List {
            root: id(r),
            terminator: Some(id(t)),
        },
        ("cyclic_list", [r]) => ConditionKind::CyclicList { root: id(r) },
        ("sorted_list", [r]) => ConditionKind::SortedList { root: id(r) },
        ("harris", [mh, fh, ft]) => ConditionKind::Harris {
            mh: id(mh),
            fh: id(fh),
            ft: id(ft),
        },
        ("dictionary", [r, layout]) => {
            let layout = match *layout {
                "sorted_list" => DictLayout::SortedList,
                l => match l.strip_prefix("btree:").and_then(|b| b.parse().ok()) {
                    Some(b) => DictLayout::BTree { b },
                    None => return Err(format!("unknown dictionary layout {l}")),
                },
            };
            ConditionKind::Dictionary { root: id(r), layout }
        }
        _ => return Err(format!("unknown condition {s}")),
    })
}

pub fn parse_region(s: &str) -> BTreeSet<NodeId> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(NodeId::new).collect()
}

fn encode_flowmap(i: &FlowInterface) -> Value {
    Value::Array(
        i.flowmap
            .iter()
            .map(|((s, t), v)| json!([s.as_str(), t.as_str(), encode_value(v)]))
            .collect(),
    )
}

fn encode_inflow(i: &FlowInterface) -> Value {
    obj(i.inflow.iter().filter(|(_, v)| !v.is_zero()).map(|(n, v)| (n.to_string(), encode_value(v))))
}

/// Prints the file back in canonical form.
pub fn cmd_fmt(doc: &Doc) -> Outcome {
    Outcome::verdict(true, encode_doc(doc))
}

pub fn cmd_flow(doc: &Doc, cap: Option<(&str, &str)>) -> Outcome {
    let h = doc.graph();
    let d = doc.domain();
    let flows = obj(h.graph().nodes().map(|n| (n.to_string(), encode_value(&h.flow_at(n, d)))));
    let mut out = vec![("flow".to_string(), flows)];
    if let Some((s, t)) = cap {
        let (s, t) = (NodeId::new(s), NodeId::new(t));
        let g = h.graph();
        if !g.contains(&s) {
            return Outcome::malformed(format!("capacity source {s} is not a node"));
        }
        if !g.contains(&t) && !g.sinks().contains(&t) {
            return Outcome::malformed(format!("capacity target {t} is not a node or sink"));
        }
        let v = capacity(g, d).value(d, &s, &t);
        out.push((
            "capacity".into(),
            json!({ "src": s.as_str(), "dst": t.as_str(), "value": encode_value(&v) }),
        ));
    }
    Outcome::verdict(true, obj(out))
}

pub fn cmd_check(doc: &Doc, kind: &ConditionKind) -> Outcome {
    let bundle = try_or_malformed!(builtin_condition(kind));
    if *doc.domain() != bundle.domain {
        return Outcome::malformed(format!("condition needs domain {}, file has {}", bundle.domain, doc.domain()));
    }
    if *doc.labels() != bundle.labels {
        return Outcome::malformed("condition and file disagree on the label domain");
    }
    let h = doc.graph();
    let d = &bundle.domain;
    let violations = match doc {
        Doc::Graph(_) => good_denotation_check(h, bundle.gamma.as_ref(), d).violations,
        Doc::Snapshot(s) => heap_violations(&s.state, h, bundle.gamma.as_ref(), d),
    };
    let nodes = obj(h.graph().nodes().map(|n| {
        let cs: Vec<Value> = violations.iter().filter(|v| v.node == *n).map(|v| json!(v.clause)).collect();
        (n.to_string(), Value::Array(cs))
    }));
    let global = check_global(&interface_of(h, d, &bundle.labels), &bundle.global);
    let mut passed = violations.is_empty() && global.is_empty();
    let mut out = vec![
        ("condition".to_string(), json!(bundle.gamma.name())),
        ("nodes".into(), nodes),
        ("global".into(), json!(global)),
    ];
    if matches!(kind, ConditionKind::Dictionary { .. }) {
        let rep = try_or_malformed!(edgeset_report(h));
        passed &= rep.passed();
        let gs: Vec<Value> = rep
            .violations
            .iter()
            .map(|v| {
                json!({
                    "rule": v.rule,
                    "nodes": v.nodes.iter().map(|n| n.as_str()).collect::<Vec<_>>(),
                    "witness": codec::encode_keyset(&v.witness),
                })
            })
            .collect();
        let keysets = obj(rep.nodes.iter().map(|(n, k)| (n.to_string(), codec::encode_keyset(&k.keyset))));
        out.push(("gs".into(), Value::Array(gs)));
        out.push(("keysets".into(), keysets));
    }
    out.push(("passed".into(), json!(passed)));
    Outcome::verdict(passed, obj(out))
}

fn same_domains(a: &Doc, b: &Doc) -> Result<(), Outcome> {
    if a.domain() != b.domain() || a.labels() != b.labels() {
        return Err(Outcome::malformed("files are over different domains"));
    }
    Ok(())
}

pub fn cmd_compose(a: &Doc, b: &Doc) -> Outcome {
    if let Err(o) = same_domains(a, b) {
        return o;
    }
    let (d, labels) = (a.domain().clone(), a.labels().clone());
    match (a, b) {
        (Doc::Snapshot(x), Doc::Snapshot(y)) => match state_compose(&x.state, &y.state, &d) {
            Ok(state) => Outcome::verdict(true, encode_doc(&Doc::Snapshot(SnapshotDoc { domain: d, labels, state }))),
            Err(e) => Outcome::verdict(false, json!({ "composable": false, "error": e.to_string() })),
        },
        (Doc::Graph(x), Doc::Graph(y)) => match fg_compose(&x.graph, &y.graph, &d) {
            Ok(graph) => Outcome::verdict(true, encode_doc(&Doc::Graph(GraphDoc { domain: d, labels, graph }))),
            Err(e) => Outcome::verdict(false, json!({ "composable": false, "error": e.to_string() })),
        },
        _ => Outcome::malformed("compose needs two graph files or two snapshot files"),
    }
}

fn check_region(doc: &Doc, region: &BTreeSet<NodeId>) -> Result<(), Outcome> {
    if region.is_empty() {
        return Err(Outcome::malformed("empty region"));
    }
    match region.iter().find(|n| !doc.graph().graph().contains(n)) {
        Some(n) => Err(Outcome::malformed(format!("region node {n} is not in the graph"))),
        None => Ok(()),
    }
}

pub fn cmd_split(doc: &Doc, region: &BTreeSet<NodeId>) -> Outcome {
    if let Err(o) = check_region(doc, region) {
        return o;
    }
    let (d, labels) = (doc.domain().clone(), doc.labels().clone());
    let (h1, h2) = fg_decompose(doc.graph(), region, &d);
    let enc = |graph| {
        encode_doc(&Doc::Graph(GraphDoc {
            domain: d.clone(),
            labels: labels.clone(),
            graph,
        }))
    };
    Outcome::verdict(true, json!({ "region": enc(h1), "context": enc(h2) }))
}

/// Region interfaces before and after, whether the new one contextually
/// extends the old, and whether it composes with the old context.
pub fn cmd_extend(before: &Doc, after: &Doc, region: &BTreeSet<NodeId>) -> Outcome {
    if let Err(o) = same_domains(before, after) {
        return o;
    }
    for doc in [before, after] {
        if let Err(o) = check_region(doc, region) {
            return o;
        }
    }
    let (d, a) = (before.domain(), before.labels());
    let (hb, ctx) = fg_decompose(before.graph(), region, d);
    let (ha, _) = fg_decompose(after.graph(), region, d);
    let (ib, ia) = (interface_of(&hb, d, a), interface_of(&ha, d, a));
    let extension = contextual_extension(&ib, &ia, d);
    let recomposes = fg_compose(&ha, &ctx, d).is_ok();
    let side = |i: &FlowInterface| json!({ "inflow": encode_inflow(i), "flowmap": encode_flowmap(i) });
    let passed = extension && recomposes;
    Outcome::verdict(
        passed,
        json!({
            "region": region.iter().map(|n| n.as_str()).collect::<Vec<_>>(),
            "before": side(&ib),
            "after": side(&ia),
            "extension": extension,
            "recomposes": recomposes,
            "passed": passed,
        }),
    )
}

/// Runs a workload. `seed` or `exhaustive` override the file's mode.
pub fn cmd_simulate(run: &Value, seed: Option<u64>, exhaustive: bool) -> Outcome {
    let mut w: Workload = try_or_malformed!(serde_json::from_value(run.clone()));
    if let Some(s) = seed {
        w.mode = Mode::Seed(s);
    }
    if exhaustive {
        w.mode = Mode::Exhaustive;
    }
    match simulate(&w) {
        Ok(rep) => Outcome::verdict(rep.passed, serde_json::to_value(&rep).expect("serializable")),
        Err(SimError::Invalid(e)) => Outcome::malformed(e),
        Err(SimError::InvalidPick(i)) => Outcome::malformed(format!("schedule entry {i} picks a thread with no enabled step")),
    }
}

/// LP-based verdict when the history records linearization points, and
/// the exhaustive oracle when it is small enough; both must accept.
pub fn cmd_lin(history: &Value) -> Outcome {
    let h: History = try_or_malformed!(serde_json::from_value(history.clone()));
    let lp = lp_check(&h);
    let oracle = oracle_check(&h);
    let usable = |r: &Result<_, LinError>| match r {
        Err(LinError::BadInterval(_)) | Err(LinError::PointOutside(_)) => Err(r.clone().unwrap_err()),
        _ => Ok(()),
    };
    if let Err(e) = usable(&lp).and(usable(&oracle)) {
        return Outcome::malformed(e.to_string());
    }
    let why = |r: &Result<_, LinError>| r.as_ref().err().map(|e| e.to_string());
    let (lp_error, oracle_error) = (why(&lp), why(&oracle));
    let (lpv, orv) = (lp.ok(), oracle.ok());
    if lpv.is_none() && orv.is_none() {
        return Outcome::malformed("history has no linearization points and is too large for the oracle");
    }
    let verdicts: Vec<bool> = [&lpv, &orv].into_iter().flatten().map(|v| v.ok()).collect();
    let agree = verdicts.windows(2).all(|w| w[0] == w[1]);
    let passed = verdicts.iter().all(|ok| *ok);
    Outcome::verdict(
        passed,
        json!({
            "lp": lpv,
            "lp_error": lp_error,
            "oracle": orv,
            "oracle_error": oracle_error,
            "agree": agree,
            "linearizable": passed,
        }),
    )
}
