//! A sorted list as a give-up instance. Each node owns the key range
//! `[lo, hi)` and stores at most one key of it; the edge to `next` carries
//! `[hi, ∞)`. Inserting into an occupied node splits it: a fresh node takes
//! the upper half of the range and the larger key.

use crate::dict::{state_from_heap, Aux, Decision, NodeOps};
use crate::seqspec::OpKind;
use crate::step::{StepError, Tx};
use flowcore::conditions::{decode_list_node, DictLayout};
use flowcore::{Addr, ExtInt, Heap, HeapValue, KeySet, LockTag, NodeId, NodeLabel, Record, State};

pub struct ListOps;

fn key_value(k: Option<i64>) -> HeapValue {
    k.map_or(HeapValue::Null, HeapValue::Int)
}

pub fn list_record(lock: i64, lo: ExtInt, hi: ExtInt, key: Option<i64>, next: Option<&Addr>) -> Record {
    Record::from([
        ("lock".to_string(), HeapValue::Int(lock)),
        ("lo".to_string(), HeapValue::Key(lo)),
        ("hi".to_string(), HeapValue::Key(hi)),
        ("key".to_string(), key_value(key)),
        ("next".to_string(), next.map_or(HeapValue::Null, |a| HeapValue::ptr(a.clone()))),
    ])
}

/// Root `r` holds the smallest key with range `[-∞, k₂)`; each further key
/// gets a node `s1, s2, …` whose range runs to the next key.
pub fn list_state(keys: &[i64]) -> State {
    let mut ks = keys.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let names: Vec<Addr> = (0..ks.len().max(1))
        .map(|i| if i == 0 { NodeId::new("r") } else { NodeId::from(format!("s{i}")) })
        .collect();
    let mut heap = Heap::new();
    for (i, name) in names.iter().enumerate() {
        let lo = if i == 0 { ExtInt::NegInf } else { ExtInt::Fin(ks[i]) };
        let hi = ks.get(i + 1).map_or(ExtInt::PosInf, |k| ExtInt::Fin(*k));
        heap.insert(name.clone(), list_record(0, lo, hi, ks.get(i).copied(), names.get(i + 1)));
    }
    state_from_heap(heap, &names[0], DictLayout::SortedList).expect("well-formed list")
}

fn fresh_name(s: &State, t: u64) -> Addr {
    (0..)
        .map(|i| NodeId::from(format!("t{t}_{i}")))
        .find(|n| !s.heap().contains_key(n))
        .expect("unbounded supply")
}

fn decode(tx: &Tx, c: &Addr) -> Result<flowcore::conditions::ListNode, StepError> {
    decode_list_node(&tx.record(c)?).map_err(StepError::Shape)
}

impl NodeOps for ListOps {
    fn layout(&self) -> DictLayout {
        DictLayout::SortedList
    }

    fn in_range(&self, rec: &Record, k: i64) -> Result<bool, String> {
        Ok(decode_list_node(rec)?.lo <= ExtInt::Fin(k))
    }

    fn find_next(&self, rec: &Record, k: i64) -> Result<Option<Addr>, String> {
        let node = decode_list_node(rec)?;
        Ok(if ExtInt::Fin(k) >= node.hi { node.next } else { None })
    }

    fn decisive(&self, tx: &mut Tx, c: &Addr, kind: OpKind, k: i64, t: u64, aux: &mut Aux) -> Result<Decision, StepError> {
        let node = decode(tx, c)?;
        if aux.stage == 1 {
            // Link the fresh node behind c and split the range at the
            // larger key.
            let n = aux.n.clone().expect("allocated");
            let old = node.key.expect("occupied");
            let (lower, upper) = (old.min(k), old.max(k));
            let mid = ExtInt::Fin(upper);
            let rec = list_record(0, mid, node.hi, Some(upper), node.next.as_ref());
            for (f, v) in rec {
                tx.write(&n, &f, v)?;
            }
            tx.write(c, "hi", HeapValue::Key(mid))?;
            tx.write(c, "key", HeapValue::Int(lower))?;
            tx.write(c, "next", HeapValue::ptr(n.clone()))?;
            tx.sync(&[c, &n], &[(&n, NodeLabel::dict(KeySet::empty(), [LockTag::Held(0)]))])?;
            return Ok(Decision::Done {
                res: true,
                label: format!("link {n} after {c} with range [{mid}, {}); sync", node.hi),
            });
        }
        Ok(match (kind, node.key) {
            (OpKind::Member, key) => Decision::Done {
                res: key == Some(k),
                label: format!("{c}.key = {}", key_value(key)),
            },
            (OpKind::Delete, Some(key)) if key == k => {
                tx.write(c, "key", HeapValue::Null)?;
                tx.sync(&[c], &[])?;
                Decision::Done {
                    res: true,
                    label: format!("{c}.key := null; sync"),
                }
            }
            (OpKind::Delete, key) => Decision::Done {
                res: false,
                label: format!("{c}.key = {}", key_value(key)),
            },
            (OpKind::Insert, None) => {
                tx.write(c, "key", HeapValue::Int(k))?;
                tx.sync(&[c], &[])?;
                Decision::Done {
                    res: true,
                    label: format!("{c}.key := {k}; sync"),
                }
            }
            (OpKind::Insert, Some(key)) if key == k => Decision::Done {
                res: false,
                label: format!("{c}.key = {k}"),
            },
            (OpKind::Insert, Some(_)) => {
                let n = fresh_name(&tx.s, t);
                let rec = list_record(t as i64, node.lo, node.hi, None, node.next.as_ref());
                tx.alloc_node(&n, rec, NodeLabel::dict(KeySet::empty(), [LockTag::Dirty(t)]))?;
                aux.stage = 1;
                aux.n = Some(n.clone());
                Decision::Continue(format!("allocate {n}"))
            }
        })
    }
}
