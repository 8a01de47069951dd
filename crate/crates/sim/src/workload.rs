//! Run descriptors: which structure, its initial shape, per-thread op
//! lists, and how to schedule them.

use crate::bptree::{bptree_state, BTreeOps, TreeSpec};
use crate::dict::{DictModel, DictMutant};
use crate::harris::{HarrisModel, HarrisMutant, HarrisOp};
use crate::monitor::{explore, random_run, run, Bounds, ExploreSummary, Model, Pick, RunReport, RunStatus};
use crate::seqspec::OpKind;
use crate::sortedlist::{list_state, ListOps};
use flowcore::NodeId;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Harris,
    SortedList,
    Bptree,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Harris: number of nodes on the main list, head included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_len: Option<usize>,
    /// Sorted list: initial keys.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<i64>>,
    /// B+ tree order and initial shape.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSpec>,
    /// Fault injection: `skip_mark` (Harris) or `skip_lock` (dictionaries).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutant: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpSpec {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<i64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exhaustive,
    Seed(u64),
    /// Replay a schedule, e.g. a counterexample from an exhaustive run.
    Schedule(Vec<Pick>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub structure: Structure,
    #[serde(default)]
    pub params: Params,
    pub threads: Vec<Vec<OpSpec>>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub bounds: Bounds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explore: Option<ExploreSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunReport>,
}

#[derive(Debug, PartialEq, Eq)]
pub enum SimError {
    /// The descriptor is malformed.
    Invalid(String),
    /// A replayed schedule picked a thread with no enabled step.
    InvalidPick(usize),
}

fn drive<M: Model + Sync>(m: &M, mode: &Mode, bounds: Bounds) -> Result<SimReport, SimError>
where
    M::Config: Send,
{
    let single = |rep: RunReport| {
        if let RunStatus::InvalidPick(i) = rep.status {
            return Err(SimError::InvalidPick(i));
        }
        Ok(SimReport {
            passed: matches!(rep.status, RunStatus::Passed | RunStatus::Excluded(_)),
            explore: None,
            run: Some(rep),
        })
    };
    match mode {
        Mode::Exhaustive => {
            let r = explore(m, bounds);
            Ok(SimReport {
                passed: r.summary.passed(),
                explore: Some(r.summary),
                run: None,
            })
        }
        Mode::Seed(seed) => single(random_run(m, *seed, bounds).0),
        Mode::Schedule(picks) => single(run(m, picks).0),
    }
}

fn dict_ops(threads: &[Vec<OpSpec>]) -> Result<Vec<Vec<(OpKind, i64)>>, SimError> {
    threads
        .iter()
        .map(|ops| {
            ops.iter()
                .map(|o| {
                    let kind = match o.op.as_str() {
                        "insert" => OpKind::Insert,
                        "delete" => OpKind::Delete,
                        "member" => OpKind::Member,
                        x => return Err(SimError::Invalid(format!("unknown dictionary op {x}"))),
                    };
                    let k = o.key.ok_or_else(|| SimError::Invalid(format!("{} needs a key", o.op)))?;
                    Ok((kind, k))
                })
                .collect()
        })
        .collect()
}

fn dict_mutant(p: &Params) -> Result<DictMutant, SimError> {
    match p.mutant.as_deref() {
        None | Some("none") => Ok(DictMutant::None),
        Some("skip_lock") => Ok(DictMutant::SkipLock),
        Some(x) => Err(SimError::Invalid(format!("unknown dictionary mutant {x}"))),
    }
}

fn reject(fields: &[(&str, bool)]) -> Result<(), SimError> {
    match fields.iter().find(|(_, set)| *set) {
        Some((name, _)) => Err(SimError::Invalid(format!("parameter {name} does not apply"))),
        None => Ok(()),
    }
}

/// Builds the model named by `w` and runs it in `w.mode`.
pub fn simulate(w: &Workload) -> Result<SimReport, SimError> {
    let p = &w.params;
    match w.structure {
        Structure::Harris => {
            reject(&[("init", p.init.is_some()), ("b", p.b.is_some()), ("tree", p.tree.is_some())])?;
            let ops = w
                .threads
                .iter()
                .map(|ops| {
                    ops.iter()
                        .map(|o| match (o.op.as_str(), o.key) {
                            ("insert", None) => Ok(HarrisOp::Insert),
                            ("delete", None) => Ok(HarrisOp::Delete),
                            (_, Some(_)) => Err(SimError::Invalid("Harris operations take no key".into())),
                            (x, _) => Err(SimError::Invalid(format!("unknown Harris op {x}"))),
                        })
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mutant = match p.mutant.as_deref() {
                None | Some("none") => HarrisMutant::None,
                Some("skip_mark") => HarrisMutant::SkipMark,
                Some(x) => return Err(SimError::Invalid(format!("unknown Harris mutant {x}"))),
            };
            let len = p.list_len.unwrap_or(3);
            if len < 1 {
                return Err(SimError::Invalid("list_len must be at least 1".into()));
            }
            drive(&HarrisModel::new(len, ops, mutant), &w.mode, w.bounds)
        }
        Structure::SortedList => {
            reject(&[("list_len", p.list_len.is_some()), ("b", p.b.is_some()), ("tree", p.tree.is_some())])?;
            let init = list_state(p.init.as_deref().unwrap_or(&[]));
            let m = DictModel::new(ListOps, NodeId::new("r"), init, dict_ops(&w.threads)?, dict_mutant(p)?);
            drive(&m, &w.mode, w.bounds)
        }
        Structure::Bptree => {
            reject(&[("list_len", p.list_len.is_some()), ("init", p.init.is_some())])?;
            let b = p.b.unwrap_or(2);
            if b < 2 {
                return Err(SimError::Invalid("b must be at least 2".into()));
            }
            let tree = p.tree.clone().unwrap_or(TreeSpec::Leaf(vec![]));
            let init = bptree_state(b, &tree).map_err(SimError::Invalid)?;
            let m = DictModel::new(BTreeOps { b }, NodeId::new("r"), init, dict_ops(&w.threads)?, dict_mutant(p)?);
            drive(&m, &w.mode, w.bounds)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list_workload() -> Workload {
        Workload {
            structure: Structure::SortedList,
            params: Params {
                init: Some(vec![1]),
                ..Params::default()
            },
            threads: vec![vec![OpSpec {
                op: "insert".into(),
                key: Some(2),
            }]],
            mode: Mode::Exhaustive,
            bounds: Bounds::default(),
        }
    }

    #[test]
    fn single_insert_passes() {
        let r = simulate(&list_workload()).unwrap();
        assert!(r.passed);
        assert_eq!(r.explore.unwrap().schedules, 1);
    }

    #[test]
    fn bad_descriptors_are_rejected() {
        let mut w = list_workload();
        w.threads[0][0].key = None;
        assert!(matches!(simulate(&w), Err(SimError::Invalid(_))));
        let mut w = list_workload();
        w.params.b = Some(2);
        assert!(matches!(simulate(&w), Err(SimError::Invalid(_))));
        let mut w = list_workload();
        w.mode = Mode::Schedule(vec![Pick { thread: 1, choice: 0 }]);
        assert_eq!(simulate(&w), Err(SimError::InvalidPick(0)));
    }
}
