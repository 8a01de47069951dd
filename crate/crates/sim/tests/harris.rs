use flowsim::harris::{HarrisModel, HarrisMutant, HarrisOp};
use flowsim::monitor::{explore, random_run, run, Bounds, RunStatus};

fn model(mutant: HarrisMutant) -> HarrisModel {
    HarrisModel::new(3, vec![vec![HarrisOp::Insert], vec![HarrisOp::Delete]], mutant)
}

#[test]
fn insert_parallel_delete_all_schedules_pass() {
    let r = explore(&model(HarrisMutant::None), Bounds::default());
    let s = &r.summary;
    assert!(s.passed(), "{:?}", s.first);
    // A failed unlink leaves a marked node in the main list; an insert
    // that stops there retries forever.
    assert!(s.cyclic);
    assert!(s.schedules > 10, "{s:?}");
    assert_eq!(s.excluded, 0);
}

#[test]
fn two_deletes_share_the_free_list() {
    let m = HarrisModel::new(4, vec![vec![HarrisOp::Delete], vec![HarrisOp::Delete]], HarrisMutant::None);
    let r = explore(&m, Bounds::default());
    assert!(r.summary.passed(), "{:?}", r.summary.first);
}

#[test]
fn skip_mark_mutant_fails_some_schedule() {
    let m = model(HarrisMutant::SkipMark);
    let r = explore(&m, Bounds::default());
    assert!(r.summary.failing > 0);
    let cex = r.summary.first.expect("counterexample");
    assert!(cex.violations.iter().any(|v| v.kind == "gamma"), "{cex:?}");
    let (rep, _) = run(&m, &cex.schedule);
    assert_eq!(rep.status, RunStatus::Violated);
}

#[test]
fn random_runs_pass() {
    let m = model(HarrisMutant::None);
    for seed in 0..20 {
        let (rep, _) = random_run(&m, seed, Bounds::default());
        assert!(rep.passed(), "seed {seed}: {rep:?}");
    }
}
