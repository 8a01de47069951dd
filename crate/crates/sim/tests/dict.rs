use flowcore::NodeId;
use flowsim::bptree::{bptree_state, fig12_spec, BTreeOps, TreeSpec};
use flowsim::dict::{DictModel, DictMutant, NodeOps, Pc};
use flowsim::monitor::{explore, random_run, run, Bounds, Model, Outcome, Pick, RunStatus};
use flowsim::seqspec::OpKind::{self, Delete, Insert, Member};
use flowsim::sortedlist::{list_state, ListOps};
use proptest::prelude::*;

type Workload = Vec<Vec<(OpKind, i64)>>;

fn list_model(init: &[i64], w: Workload) -> DictModel<ListOps> {
    DictModel::new(ListOps, NodeId::new("r"), list_state(init), w, DictMutant::None)
}

fn small_tree() -> TreeSpec {
    TreeSpec::Node {
        keys: vec![3],
        children: vec![TreeSpec::Leaf(vec![1]), TreeSpec::Leaf(vec![3])],
    }
}

fn tree_model(spec: &TreeSpec, w: Workload) -> DictModel<BTreeOps> {
    DictModel::new(BTreeOps { b: 2 }, NodeId::new("r"), bptree_state(2, spec).unwrap(), w, DictMutant::None)
}

fn workloads() -> Vec<Workload> {
    vec![
        vec![vec![(Insert, 2), (Delete, 3)], vec![(Insert, 3), (Member, 2)]],
        vec![vec![(Insert, 4), (Delete, 1)], vec![(Delete, 4), (Insert, 1)]],
        vec![vec![(Insert, 2), (Insert, 2)], vec![(Delete, 2), (Member, 2)]],
    ]
}

fn solo<O: NodeOps>(m: &DictModel<O>) -> (flowsim::monitor::RunReport, flowsim::dict::Config) {
    random_run(m, 0, Bounds::default())
}

#[test]
fn sorted_list_two_by_two_all_schedules_pass() {
    for w in workloads() {
        let r = explore(&list_model(&[1, 3], w.clone()), Bounds::default());
        let s = &r.summary;
        assert!(s.passed(), "{w:?}: {:?}", s.first);
        assert_eq!(s.excluded, 0);
        assert!(!s.cyclic);
        assert!(s.schedules > 1);
    }
}

#[test]
fn sorted_list_from_empty_splits_concurrently() {
    let w = vec![vec![(Insert, 2), (Insert, 4)], vec![(Insert, 1), (Delete, 2)]];
    let r = explore(&list_model(&[], w), Bounds::default());
    assert!(r.summary.passed(), "{:?}", r.summary.first);
}

#[test]
fn bptree_two_by_two_all_schedules_pass() {
    for w in workloads() {
        let r = explore(&tree_model(&small_tree(), w.clone()), Bounds::default());
        let s = &r.summary;
        assert!(s.passed(), "{w:?}: {:?}", s.first);
        assert!(s.schedules > 1);
    }
}

#[test]
fn fig12_member_five_walks_to_middle_leaf() {
    let m = tree_model(&fig12_spec(), vec![vec![(Member, 5)]]);
    let (rep, c) = solo(&m);
    assert!(rep.passed(), "{rep:?}");
    let labels: Vec<&str> = rep.trace.iter().map(|e| e.label.as_str()).collect();
    assert!(labels.contains(&"t1 member(5) findNext(r) = r1"), "{labels:?}");
    assert!(labels.contains(&"t1 member(5) findNext(r1) = r11"), "{labels:?}");
    assert!(labels.contains(&"t1 member(5) findNext(r11) = null"), "{labels:?}");
    assert_eq!(c.history[0].result, Some(true));
}

#[test]
fn fig12_delete_absent_key_returns_false() {
    let m = tree_model(&fig12_spec(), vec![vec![(Delete, 9)]]);
    let (rep, c) = solo(&m);
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.trace.iter().any(|e| e.label == "t1 delete(9) findNext(r1) = r12"));
    assert_eq!(c.history[0].result, Some(false));
}

#[test]
fn fig12_delete_shifts_keys() {
    let m = tree_model(&fig12_spec(), vec![vec![(Delete, 7), (Member, 8), (Insert, 7), (Member, 7)]]);
    let (rep, c) = solo(&m);
    assert!(rep.passed(), "{rep:?}");
    let res: Vec<Option<bool>> = c.history.iter().map(|o| o.result).collect();
    assert_eq!(res, vec![Some(true), Some(true), Some(true), Some(true)]);
}

#[test]
fn full_leaf_insert_is_excluded() {
    let spec = TreeSpec::Leaf(vec![1, 2, 3]);
    let m = tree_model(&spec, vec![vec![(Insert, 4)]]);
    let (rep, _) = solo(&m);
    assert!(matches!(rep.status, RunStatus::Excluded(_)), "{rep:?}");
}

#[test]
fn give_up_returns_to_root() {
    // Park thread 1 at s1 = [3, ∞) with the lock held, then retarget its
    // operation at a key below the node's range.
    let m = list_model(&[1, 3], vec![vec![(Member, 5)]]);
    let (_, mut c) = run(&m, &vec![Pick { thread: 0, choice: 0 }; 5]);
    assert_eq!(c.threads[0].pc, Pc::InRange);
    assert_eq!(c.threads[0].c, Some(NodeId::new("s1")));
    c.threads[0].ops[0] = (Member, 1);
    c.history[0].key = 1;
    let mut labels = Vec::new();
    while !m.finished(&c) {
        let mut outs = m.step(&c, 0);
        assert_eq!(outs.len(), 1);
        match outs.remove(0) {
            Outcome::Next { config, label, violations } => {
                assert!(violations.is_empty(), "{label}: {violations:?}");
                assert!(m.check_state(&config).is_empty());
                labels.push(label);
                c = config;
            }
            _ => panic!("step aborted"),
        }
    }
    assert!(m.check_final(&c).is_empty());
    assert_eq!(labels[0], "t1 member(1) inRange(s1) = false; give up");
    assert_eq!(labels[1], "t1 member(1) unlock(s1)");
    assert_eq!(labels[2], "t1 member(1) lock(r)");
    assert_eq!(c.history[0].result, Some(true));
}

#[test]
fn skip_lock_mutant_is_caught() {
    let w = vec![vec![(Insert, 2)], vec![(Insert, 2)]];
    let m = DictModel::new(ListOps, NodeId::new("r"), list_state(&[1]), w, DictMutant::SkipLock);
    let r = explore(&m, Bounds::default());
    assert!(r.summary.failing > 0);
    let cex = r.summary.first.expect("counterexample");
    assert!(cex.violations.iter().any(|v| v.kind == "lock"), "{cex:?}");
    let (rep, _) = run(&m, &cex.schedule);
    assert_eq!(rep.status, RunStatus::Violated);
}

fn op() -> impl Strategy<Value = (OpKind, i64)> {
    (prop_oneof![Just(Member), Just(Insert), Just(Delete)], 1i64..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // LP-based and brute-force verdicts agree on every history the list
    // produces, and both accept it.
    #[test]
    fn random_list_runs_linearize(
        a in prop::collection::vec(op(), 0..=4),
        b in prop::collection::vec(op(), 0..=4),
        init in prop::collection::btree_set(1i64..=4, 0..=3),
        seed in any::<u64>(),
    ) {
        let init: Vec<i64> = init.into_iter().collect();
        let m = list_model(&init, vec![a, b]);
        let (rep, c) = random_run(&m, seed, Bounds::default());
        prop_assert!(rep.passed(), "{:?}", rep);
        prop_assert!(m.lin_violations(&c).is_empty());
    }

    #[test]
    fn random_tree_runs_linearize(
        a in prop::collection::vec(op(), 0..=4),
        b in prop::collection::vec(op(), 0..=4),
        seed in any::<u64>(),
    ) {
        let m = tree_model(&small_tree(), vec![a, b]);
        let (rep, c) = random_run(&m, seed, Bounds::default());
        prop_assert!(rep.passed() || matches!(rep.status, RunStatus::Excluded(_)), "{:?}", rep);
        if rep.passed() {
            prop_assert!(m.lin_violations(&c).is_empty());
        }
    }
}
