//! The sequential dictionary that histories are checked against.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Member,
    Insert,
    Delete,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpKind::Member => "member",
            OpKind::Insert => "insert",
            OpKind::Delete => "delete",
        };
        write!(f, "{s}")
    }
}

/// Applies one operation to `set` and returns its result.
pub fn apply(set: &mut BTreeSet<i64>, kind: OpKind, k: i64) -> bool {
    match kind {
        OpKind::Member => set.contains(&k),
        OpKind::Insert => set.insert(k),
        OpKind::Delete => set.remove(&k),
    }
}

/// Results of running `ops` in order from the empty set.
pub fn sequential_spec(ops: &[(OpKind, i64)]) -> Vec<bool> {
    sequential_spec_from(&BTreeSet::new(), ops)
}

pub fn sequential_spec_from(init: &BTreeSet<i64>, ops: &[(OpKind, i64)]) -> Vec<bool> {
    let mut set = init.clone();
    ops.iter().map(|(kind, k)| apply(&mut set, *kind, *k)).collect()
}
