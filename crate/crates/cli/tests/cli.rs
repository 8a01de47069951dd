use flowcheck::codec::{decode_doc, encode_doc, parse_text};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn flowcheck(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_flowcheck")).args(args).output().unwrap();
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).unwrap())
}

/// Runs with fixture names expanded; the report must parse.
fn run(args: &[&str]) -> (i32, Value) {
    let paths: Vec<String> = args
        .iter()
        .map(|a| {
            let p = fixture(a);
            if p.exists() { p.display().to_string() } else { a.to_string() }
        })
        .collect();
    let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
    let (code, out) = flowcheck(&refs);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{args:?}: unparsable report ({e}): {out}"));
    (code, v)
}

fn temp(contents: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), contents).unwrap();
    f
}

const DOCS: [&str; 8] = [
    "fig2.graph",
    "diamond.graph",
    "inf-cycle-1.graph",
    "inf-cycle-2.graph",
    "fig4-before.snapshot",
    "fig4-after.snapshot",
    "fig12.snapshot",
    "harris-fig1.snapshot",
];

#[test]
fn fixtures_round_trip_canonically() {
    for name in DOCS {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let (code, out) = flowcheck(&["fmt", fixture(name).to_str().unwrap()]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(out, text, "{name} is not in canonical form");
        let doc = decode_doc(&parse_text(&text).unwrap(), None).unwrap();
        let again = decode_doc(&encode_doc(&doc), None).unwrap();
        assert_eq!(doc, again, "{name}");
    }
}

#[test]
fn fmt_sorts_keys_and_drops_zeros() {
    let f = temp(r#"{"nodes":[{"id":"b"},{"edges":{"b":0,"a":1},"id":"a"}],"labels":"unit","domain":"path_count","inflow":{"b":0,"a":2}}"#);
    let (code, out) = flowcheck(&["fmt", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["inflow"], json!({"a": 2}));
    assert_eq!(v["nodes"][0], json!({"id": "a", "edges": {"a": 1}}));
    assert!(out.find("\"domain\"").unwrap() < out.find("\"inflow\"").unwrap());
}

#[test]
fn flow_fig2_is_one_everywhere() {
    let (code, v) = run(&["flow", "fig2.graph"]);
    assert_eq!(code, 0);
    let flows = v["flow"].as_object().unwrap();
    assert_eq!(flows.len(), 7);
    assert!(flows.values().all(|x| *x == json!(1)));
}

#[test]
fn flow_diamond_and_capacity() {
    let (code, v) = run(&["flow", "diamond.graph", "--capacity", "a", "d"]);
    assert_eq!(code, 0);
    assert_eq!(v["flow"]["d"], json!(2));
    assert_eq!(v["capacity"], json!({"src": "a", "dst": "d", "value": 2}));
    let (code, _) = run(&["flow", "diamond.graph", "--capacity", "a", "zz"]);
    assert_eq!(code, 2);
}

#[test]
fn flow_empty_graph() {
    let f = temp(r#"{"domain": "path_count"}"#);
    let (code, v) = run(&["flow", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v, json!({"flow": {}}));
}

#[test]
fn domain_flag() {
    let f = temp(r#"{"nodes": [{"id": "a"}], "inflow": {"a": [[1, 4]]}}"#);
    let p = f.path().to_str().unwrap();
    assert_eq!(run(&["flow", p]).0, 2);
    let (code, v) = run(&["--domain", "keyset", "flow", p]);
    assert_eq!(code, 0);
    assert_eq!(v["flow"]["a"], json!([[1, 4]]));
    assert_eq!(run(&["--domain", "path_count", "flow", "fig2.graph"]).0, 0);
    assert_eq!(run(&["--domain", "keyset", "flow", "fig2.graph"]).0, 2);
    assert_eq!(run(&["--domain", "nonsense", "flow", "fig2.graph"]).0, 2);
}

#[test]
fn check_passes_on_figures() {
    let (code, v) = run(&["check", "fig12.snapshot", "--condition", "dictionary(r, btree:2)"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["gs"], json!([]));
    assert_eq!(v["keysets"]["r11"], json!([[5, 7]]));
    let (code, v) = run(&["check", "harris-fig1.snapshot", "--condition", "harris(mh, fh, n10)"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(run(&["check", "fig2.graph", "--condition", "tree(n0)"]).0, 0);
}

#[test]
fn check_tree_fails_on_diamond() {
    let (code, v) = run(&["check", "diamond.graph", "--condition", "tree(a)"]);
    assert_eq!(code, 1);
    assert_eq!(v["passed"], json!(false));
    let d = v["nodes"]["d"].as_array().unwrap();
    assert_eq!(d.len(), 1);
    assert!(d[0].as_str().unwrap().contains("flow is 2"));
    assert_eq!(v["nodes"]["b"], json!([]));
}

#[test]
fn check_reports_gs_violations() {
    // Two leaves claiming key 5.
    let f = temp(
        r#"{"domain": "keyset", "labels": ["keys", "locks"],
            "inflow": {"r": [["-inf", "inf"]]},
            "nodes": [
              {"id": "r", "label": [[], [0]], "edges": {"a": [["-inf", "inf"]], "b": [[4, "inf"]]}},
              {"id": "a", "label": [[[5, 6]], [0]]},
              {"id": "b", "label": [[[5, 6]], [0]]}]}"#,
    );
    let (code, v) = run(&["check", f.path().to_str().unwrap(), "--condition", "dictionary(r, sorted_list)"]);
    assert_eq!(code, 1, "{v}");
    let rules: Vec<&str> = v["gs"].as_array().unwrap().iter().map(|g| g["rule"].as_str().unwrap()).collect();
    assert!(rules.contains(&"GS1"), "{rules:?}");
}

#[test]
fn check_rejects_mismatches_and_bad_input() {
    assert_eq!(run(&["check", "fig2.graph", "--condition", "harris(a, b, c)"]).0, 2);
    assert_eq!(run(&["check", "fig2.graph", "--condition", "dictionary(n0, btree:2)"]).0, 2);
    assert_eq!(run(&["check", "fig2.graph", "--condition", "bogus(n0)"]).0, 2);
    assert_eq!(run(&["check", "fig2.graph", "--condition", "tree(n0"]).0, 2);
    assert_eq!(run(&["check", "no-such-file.graph", "--condition", "tree(n0)"]).0, 2);
    for bad in [
        "not json",
        "[]",
        r#"{"domain": "path_count", "nodes": [{"id": "a", "edges": {"zz": 1}}]}"#,
        r#"{"domain": "path_count", "nodes": [{"id": "a"}], "inflow": {"q": 1}}"#,
        r#"{"domain": "path_count", "nodes": [{"id": "a"}, {"id": "a"}]}"#,
        r#"{"domain": "path_count", "nodes": [{"id": "a", "edges": {"a": -1}}]}"#,
        r#"{"domain": "path_count", "colour": "red"}"#,
        r#"{"domain": "path_count", "nodes": [{"id": "a"}], "heap": {"a": {"next": {"ptr": "b", "marked": false}}}}"#,
    ] {
        let f = temp(bad);
        let (code, v) = run(&["check", f.path().to_str().unwrap(), "--condition", "tree(a)"]);
        assert_eq!(code, 2, "{bad}");
        assert!(v["error"].is_string(), "{bad}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(flowcheck(&[]).0, 2);
    assert_eq!(flowcheck(&["frobnicate"]).0, 2);
    assert_eq!(flowcheck(&["check", fixture("fig2.graph").to_str().unwrap()]).0, 2);
    assert_eq!(flowcheck(&["--help"]).0, 0);
}

#[test]
fn extend_fig4() {
    let (code, v) = run(&["extend", "fig4-before.snapshot", "fig4-after.snapshot", "--region", "l,n"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["before"]["flowmap"], json!([["l", "r", 1]]));
    assert_eq!(v["after"]["flowmap"], json!([["l", "r", 1]]));
    let (code, v) = run(&["extend", "fig4-before.snapshot", "fig4-after.snapshot", "--region", "l"]);
    assert_eq!(code, 1);
    assert_eq!(v["after"]["flowmap"], json!([["l", "n", 1]]));
    assert_eq!(v["extension"], json!(false));
    assert_eq!(run(&["extend", "fig2.graph", "fig2.graph", "--region", "n1,n2,n4"]).0, 0);
    assert_eq!(run(&["extend", "fig2.graph", "fig2.graph", "--region", "zz"]).0, 2);
    assert_eq!(run(&["extend", "fig2.graph", "fig12.snapshot", "--region", "n1"]).0, 2);
}

#[test]
fn split_then_compose_restores_fig2() {
    let (code, v) = run(&["split", "fig2.graph", "--region", "n1,n2,n4"]);
    assert_eq!(code, 0);
    assert_eq!(v["region"]["inflow"], json!({"n1": 1, "n2": 1}));
    assert_eq!(v["context"]["inflow"], json!({"n0": 1, "n3": 1, "n5": 1, "n6": 1}));
    let a = temp(&v["region"].to_string());
    let b = temp(&v["context"].to_string());
    let (code, back) = run(&["compose", a.path().to_str().unwrap(), b.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    let (_, orig) = run(&["fmt", "fig2.graph"]);
    assert_eq!(back["nodes"], orig["nodes"]);
    let (_, flows) = run(&["flow", a.path().to_str().unwrap()]);
    assert_eq!(flows["flow"]["n4"], json!(1));
}

#[test]
fn compose_overlap_is_a_violation() {
    let (code, v) = run(&["compose", "fig2.graph", "fig2.graph"]);
    assert_eq!(code, 1);
    assert_eq!(v["composable"], json!(false));
    assert_eq!(run(&["compose", "fig2.graph", "fig12.snapshot"]).0, 2);
}

#[test]
fn compose_infinite_cycle() {
    let (code, v) = run(&["compose", "inf-cycle-1.graph", "inf-cycle-2.graph"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
    assert!(v.get("sinks").is_none());
}

#[test]
fn compose_snapshots() {
    let (code, v) = run(&["compose", "fig12.snapshot", "harris-fig1.snapshot"]);
    assert_eq!(code, 2, "{v}");
    let (code, v) = run(&["compose", "fig4-before.snapshot", "fig4-before.snapshot"]);
    assert_eq!(code, 1, "{v}");
    let cell = temp(r#"{"domain": "path_count", "heap": {"q": {"next": null}}, "nodes": [{"id": "q"}]}"#);
    let (code, v) = run(&["compose", "fig4-after.snapshot", cell.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["heap"].as_object().unwrap().len(), 4);
}

#[test]
fn simulate_sorted_list_exhaustive() {
    let (code, v) = run(&["simulate", "sortedlist-2x2.run"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["explore"]["failing"], json!(0));
    let (code, v) = run(&["simulate", "sortedlist-2x2.run", "--seed", "7"]);
    assert_eq!(code, 0, "{v}");
    assert!(v["run"]["trace"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn simulate_mutant_gives_replayable_counterexample() {
    let (code, v) = run(&["simulate", "harris-skip-mark.run"]);
    assert_eq!(code, 1);
    let schedule = v["explore"]["first"]["schedule"].clone();
    assert!(schedule.as_array().is_some_and(|s| !s.is_empty()));
    let mut w = parse_text(&std::fs::read_to_string(fixture("harris-skip-mark.run")).unwrap()).unwrap();
    w["mode"] = json!({ "schedule": schedule });
    let f = temp(&w.to_string());
    let (code, v) = run(&["simulate", f.path().to_str().unwrap()]);
    assert_eq!(code, 1, "{v}");
    assert_eq!(v["run"]["status"], json!("Violated"));
}

#[test]
fn simulate_rejects_bad_runs() {
    for bad in [
        r#"{"structure": "skiplist", "threads": []}"#,
        r#"{"structure": "sorted_list", "threads": [[{"op": "insert"}]]}"#,
        r#"{"structure": "harris", "threads": [[{"op": "insert", "key": 1}]]}"#,
        r#"{"structure": "harris", "params": {"mutant": "skip_lock"}, "threads": []}"#,
        r#"{"structure": "bptree", "params": {"b": 1}, "threads": []}"#,
        r#"{"structure": "sorted_list", "threads": [], "mode": {"schedule": [{"thread": 3}]}}"#,
    ] {
        let f = temp(bad);
        let (code, v) = run(&["simulate", f.path().to_str().unwrap()]);
        assert_eq!(code, 2, "{bad}: {v}");
    }
}

#[test]
fn lin_verdicts() {
    let (code, v) = run(&["lin", "double-insert.history"]);
    assert_eq!(code, 1);
    assert_eq!(v["linearizable"], json!(false));
    let (code, v) = run(&["lin", "overlap.history"]);
    assert_eq!(code, 0);
    assert_eq!(v["agree"], json!(true));
    let f = temp(r#"{"ops": [{"thread": 1, "kind": "insert", "key": 1, "inv": 3, "resp": 1, "result": true}]}"#);
    assert_eq!(run(&["lin", f.path().to_str().unwrap()]).0, 2);
    let f = temp(r#"{"ops": [{"thread": 1, "kind": "upsert", "key": 1, "inv": 0}]}"#);
    assert_eq!(run(&["lin", f.path().to_str().unwrap()]).0, 2);
}
