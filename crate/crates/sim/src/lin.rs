//! Histories and linearizability verdicts: one from recorded
//! linearization points, one from exhaustive search.

use crate::seqspec::{apply, OpKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use thiserror::Error;

/// One operation of a history. Indices are positions in the global event
/// sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpRecord {
    pub thread: usize,
    pub kind: OpKind,
    pub key: i64,
    pub inv: usize,
    #[serde(default)]
    pub resp: Option<usize>,
    #[serde(default)]
    pub result: Option<bool>,
    #[serde(default)]
    pub lp: Option<usize>,
}

impl OpRecord {
    pub fn complete(&self) -> bool {
        self.resp.is_some() && self.result.is_some()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct History {
    /// Contents before the first operation.
    #[serde(default)]
    pub init: BTreeSet<i64>,
    pub ops: Vec<OpRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinVerdict {
    /// A witness order, as indices into `ops`.
    Linearizable(Vec<usize>),
    NotLinearizable(String),
}

impl LinVerdict {
    pub fn ok(&self) -> bool {
        matches!(self, LinVerdict::Linearizable(_))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinError {
    #[error("operation {0} has not responded")]
    Incomplete(usize),
    #[error("operation {0} has no linearization point")]
    NoPoint(usize),
    #[error("operation {0}: linearization point outside its interval")]
    PointOutside(usize),
    #[error("operation {0}: response precedes invocation")]
    BadInterval(usize),
    #[error("{0} operations exceed the search limit of {1}")]
    TooLarge(usize, usize),
}

fn validate(h: &History) -> Result<(), LinError> {
    for (i, op) in h.ops.iter().enumerate() {
        if op.resp.is_some_and(|r| r < op.inv) {
            return Err(LinError::BadInterval(i));
        }
    }
    Ok(())
}

/// Orders the operations by linearization point, runs the sequential
/// dictionary and compares results. Needs a complete history.
pub fn lp_check(h: &History) -> Result<LinVerdict, LinError> {
    validate(h)?;
    for (i, op) in h.ops.iter().enumerate() {
        if !op.complete() {
            return Err(LinError::Incomplete(i));
        }
        let lp = op.lp.ok_or(LinError::NoPoint(i))?;
        if lp < op.inv || Some(lp) > op.resp {
            return Err(LinError::PointOutside(i));
        }
    }
    let mut order: Vec<usize> = (0..h.ops.len()).collect();
    order.sort_by_key(|i| h.ops[*i].lp);
    let mut set = h.init.clone();
    for &i in &order {
        let op = &h.ops[i];
        let expect = apply(&mut set, op.kind, op.key);
        if Some(expect) != op.result {
            return Ok(LinVerdict::NotLinearizable(format!(
                "{}({}) by thread {} returned {} but the sequential dictionary gives {expect} at its linearization point",
                op.kind,
                op.key,
                op.thread,
                op.result.unwrap_or(false)
            )));
        }
    }
    Ok(LinVerdict::Linearizable(order))
}

pub const ORACLE_LIMIT: usize = 16;

/// Searches every order consistent with real time. Pending operations may
/// be left out or placed anywhere after their invocation, with any result.
pub fn oracle_check(h: &History) -> Result<LinVerdict, LinError> {
    validate(h)?;
    let n = h.ops.len();
    if n > ORACLE_LIMIT {
        return Err(LinError::TooLarge(n, ORACLE_LIMIT));
    }
    let required: u32 = (0..n).filter(|i| h.ops[*i].complete()).fold(0, |m, i| m | (1 << i));
    let mut dead = HashSet::new();
    let mut order = Vec::new();
    if search(h, 0, required, &h.init, &mut order, &mut dead) {
        Ok(LinVerdict::Linearizable(order))
    } else {
        Ok(LinVerdict::NotLinearizable("no order consistent with real time matches the sequential dictionary".into()))
    }
}

fn search(
    h: &History,
    done: u32,
    required: u32,
    set: &BTreeSet<i64>,
    order: &mut Vec<usize>,
    dead: &mut HashSet<(u32, BTreeSet<i64>)>,
) -> bool {
    if done & required == required {
        return true;
    }
    if dead.contains(&(done, set.clone())) {
        return false;
    }
    let n = h.ops.len();
    for i in 0..n {
        if done & (1 << i) != 0 {
            continue;
        }
        let op = &h.ops[i];
        // Every operation that responded before `i` was invoked goes first.
        let blocked = (0..n).any(|j| j != i && done & (1 << j) == 0 && h.ops[j].resp.is_some_and(|r| r < op.inv));
        if blocked {
            continue;
        }
        let mut next = set.clone();
        let res = apply(&mut next, op.kind, op.key);
        if op.complete() && op.result != Some(res) {
            continue;
        }
        order.push(i);
        if search(h, done | (1 << i), required, &next, order, dead) {
            return true;
        }
        order.pop();
    }
    dead.insert((done, set.clone()));
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(thread: usize, kind: OpKind, key: i64, inv: usize, resp: usize, result: bool, lp: usize) -> OpRecord {
        OpRecord {
            thread,
            kind,
            key,
            inv,
            resp: Some(resp),
            result: Some(result),
            lp: Some(lp),
        }
    }

    #[test]
    fn sequential_insert_then_member() {
        let h = History {
            init: BTreeSet::new(),
            ops: vec![op(0, OpKind::Insert, 5, 0, 2, true, 1), op(1, OpKind::Member, 5, 3, 5, true, 4)],
        };
        assert!(lp_check(&h).unwrap().ok());
        assert!(oracle_check(&h).unwrap().ok());
    }

    #[test]
    fn concurrent_double_insert_success() {
        let h = History {
            init: BTreeSet::new(),
            ops: vec![op(0, OpKind::Insert, 5, 0, 4, true, 2), op(1, OpKind::Insert, 5, 1, 5, true, 3)],
        };
        assert!(!oracle_check(&h).unwrap().ok());
        assert!(!lp_check(&h).unwrap().ok());
    }

    #[test]
    fn member_before_insert_point() {
        // member responds before insert's point; ordering member first works.
        let h = History {
            init: BTreeSet::new(),
            ops: vec![op(0, OpKind::Insert, 5, 0, 5, true, 4), op(1, OpKind::Member, 5, 1, 3, false, 2)],
        };
        assert!(oracle_check(&h).unwrap().ok());
        assert!(lp_check(&h).unwrap().ok());
    }

    #[test]
    fn pending_operations_are_optional() {
        let mut pending = op(1, OpKind::Insert, 5, 1, 0, true, 0);
        pending.resp = None;
        pending.result = None;
        pending.lp = None;
        let h = History {
            init: BTreeSet::new(),
            ops: vec![op(0, OpKind::Member, 5, 0, 3, true, 2), pending.clone()],
        };
        assert!(oracle_check(&h).unwrap().ok());
        assert_eq!(lp_check(&h), Err(LinError::Incomplete(1)));
        let h2 = History {
            init: BTreeSet::new(),
            ops: vec![op(0, OpKind::Member, 5, 0, 3, false, 2), pending],
        };
        assert!(oracle_check(&h2).unwrap().ok());
    }

    #[test]
    fn real_time_order_is_respected() {
        // insert finished before member started, so member must see 5.
        let h = History {
            init: BTreeSet::new(),
            ops: vec![op(0, OpKind::Insert, 5, 0, 2, true, 1), op(1, OpKind::Member, 5, 3, 5, false, 4)],
        };
        assert!(!oracle_check(&h).unwrap().ok());
    }
}
