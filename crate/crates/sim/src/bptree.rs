//! B+ tree node helpers for the give-up template. Splits are out of scope:
//! an insert into a leaf holding `2B - 1` keys is excluded from the run.

use crate::dict::{dirty_label, state_from_heap, Aux, Decision, NodeOps};
use crate::seqspec::OpKind;
use crate::step::{StepError, Tx};
use flowcore::conditions::{decode_btree, BTreeNode, DictLayout};
use flowcore::{Addr, ExtInt, Heap, HeapValue, KeySet, LockTag, NodeId, NodeLabel, Record, State};
use serde::{Deserialize, Serialize};

pub struct BTreeOps {
    pub b: usize,
}

/// A tree shape: a leaf's keys, or separator keys with one more child.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeSpec {
    Leaf(Vec<i64>),
    Node { keys: Vec<i64>, children: Vec<TreeSpec> },
}

fn slots(vals: Vec<HeapValue>, cap: usize) -> HeapValue {
    let mut v = vals;
    v.resize(cap, HeapValue::Null);
    HeapValue::List(v)
}

pub fn btree_record(b: usize, range: (ExtInt, ExtInt), keys: &[i64], ptrs: &[Addr]) -> Record {
    Record::from([
        ("lock".to_string(), HeapValue::Int(0)),
        ("len".to_string(), HeapValue::Int(keys.len() as i64)),
        ("range".to_string(), HeapValue::List(vec![HeapValue::Key(range.0), HeapValue::Key(range.1)])),
        ("keys".to_string(), slots(keys.iter().map(|k| HeapValue::Int(*k)).collect(), 2 * b)),
        ("ptrs".to_string(), slots(ptrs.iter().map(|p| HeapValue::ptr(p.clone())).collect(), 2 * b)),
    ])
}

fn build(spec: &TreeSpec, name: Addr, range: (ExtInt, ExtInt), b: usize, heap: &mut Heap) -> Result<(), String> {
    match spec {
        TreeSpec::Leaf(keys) => {
            heap.insert(name, btree_record(b, range, keys, &[]));
        }
        TreeSpec::Node { keys, children } => {
            if children.len() != keys.len() + 1 {
                return Err(format!("{name}: {} keys need {} children", keys.len(), keys.len() + 1));
            }
            let names: Vec<Addr> = (0..children.len()).map(|i| NodeId::from(format!("{name}{i}"))).collect();
            heap.insert(name.clone(), btree_record(b, range, keys, &names));
            for (i, (child, cname)) in children.iter().zip(&names).enumerate() {
                let lo = if i == 0 { range.0 } else { ExtInt::Fin(keys[i - 1]) };
                let hi = keys.get(i).map_or(range.1, |k| ExtInt::Fin(*k));
                build(child, cname.clone(), (lo, hi), b, heap)?;
            }
        }
    }
    Ok(())
}

/// Lays out `spec` with root `r`; the children of node `x` are `x0, x1, …`.
pub fn bptree_state(b: usize, spec: &TreeSpec) -> Result<State, String> {
    let mut heap = Heap::new();
    let root = NodeId::new("r");
    build(spec, root.clone(), (ExtInt::NegInf, ExtInt::PosInf), b, &mut heap)?;
    state_from_heap(heap, &root, DictLayout::BTree { b })
}

/// Fig. 12's tree, with `[1, 2]` standing in for the elided left leaf.
pub fn fig12_spec() -> TreeSpec {
    TreeSpec::Node {
        keys: vec![3],
        children: vec![
            TreeSpec::Leaf(vec![1, 2]),
            TreeSpec::Node {
                keys: vec![5, 7],
                children: vec![TreeSpec::Leaf(vec![3, 4]), TreeSpec::Leaf(vec![5]), TreeSpec::Leaf(vec![7, 8])],
            },
        ],
    }
}

/// Any non-opaque label makes the sync re-read the node from the heap.
fn held(t: u64) -> NodeLabel {
    NodeLabel::dict(KeySet::empty(), [LockTag::Held(t)])
}

impl BTreeOps {
    fn decode(&self, rec: &Record) -> Result<BTreeNode, String> {
        decode_btree(rec, self.b)
    }

    fn set_key(&self, tx: &mut Tx, c: &Addr, i: usize, v: HeapValue) -> Result<(), StepError> {
        let HeapValue::List(mut ks) = tx.read(c, "keys")? else {
            return Err(StepError::Shape(format!("{c}.keys is not a list")));
        };
        ks[i] = v;
        tx.write(c, "keys", HeapValue::List(ks))
    }

    fn key_at(&self, tx: &Tx, c: &Addr, i: usize) -> Result<HeapValue, StepError> {
        match tx.read(c, "keys")? {
            HeapValue::List(ks) => Ok(ks[i].clone()),
            _ => Err(StepError::Shape(format!("{c}.keys is not a list"))),
        }
    }

    fn len(&self, tx: &Tx, c: &Addr) -> Result<usize, StepError> {
        match tx.read(c, "len")? {
            HeapValue::Int(l) if l >= 0 => Ok(l as usize),
            v => Err(StepError::Shape(format!("{c}.len holds {v}"))),
        }
    }
}

impl NodeOps for BTreeOps {
    fn layout(&self) -> DictLayout {
        DictLayout::BTree { b: self.b }
    }

    fn in_range(&self, rec: &Record, k: i64) -> Result<bool, String> {
        let node = self.decode(rec)?;
        Ok(node.range.0 <= ExtInt::Fin(k) && ExtInt::Fin(k) < node.range.1)
    }

    /// The child whose edgeset holds `k`. The last child sits at `ptrs[len]`,
    /// so null is returned only at leaves.
    fn find_next(&self, rec: &Record, k: i64) -> Result<Option<Addr>, String> {
        let node = self.decode(rec)?;
        if node.is_leaf() {
            return Ok(None);
        }
        let i = node.keys.iter().take_while(|x| k >= **x).count();
        Ok(Some(node.ptrs[i].clone()))
    }

    fn decisive(&self, tx: &mut Tx, c: &Addr, kind: OpKind, k: i64, t: u64, aux: &mut Aux) -> Result<Decision, StepError> {
        match (aux.stage, kind) {
            (0, _) => {
                let node = self.decode(&tx.record(c)?).map_err(StepError::Shape)?;
                // First slot whose key is not below k.
                let i = node.keys.iter().take_while(|x| k > **x).count();
                let found = node.keys.get(i) == Some(&k);
                let len = node.keys.len();
                match kind {
                    OpKind::Member => Ok(Decision::Done {
                        res: found,
                        label: format!("scan {c}: {k} {}", if found { "present" } else { "absent" }),
                    }),
                    OpKind::Delete | OpKind::Insert if found == (kind == OpKind::Insert) => Ok(Decision::Done {
                        res: false,
                        label: format!("scan {c}: {k} {}", if found { "present" } else { "absent" }),
                    }),
                    OpKind::Insert if len == 2 * self.b - 1 => Ok(Decision::Excluded(format!("node full at {c}"))),
                    _ => {
                        let dirty = dirty_label(&tx.s, c, t);
                        tx.sync(&[c], &[(c, dirty)])?;
                        aux.stage = 1;
                        // Delete shifts left from the hit; insert shifts
                        // right from the end down to the slot.
                        (aux.i, aux.j) = if kind == OpKind::Delete { (i, i) } else { (len, i) };
                        Ok(Decision::Continue(format!("{c} label := ~{t}; sync")))
                    }
                }
            }
            (_, OpKind::Delete) => {
                let len = self.len(tx, c)?;
                if aux.i + 1 < len {
                    let v = self.key_at(tx, c, aux.i + 1)?;
                    self.set_key(tx, c, aux.i, v)?;
                    aux.i += 1;
                    return Ok(Decision::Continue(format!("{c}.keys[{}] := {c}.keys[{}]", aux.i - 1, aux.i)));
                }
                self.set_key(tx, c, aux.i, HeapValue::Null)?;
                tx.write(c, "len", HeapValue::Int(len as i64 - 1))?;
                tx.sync(&[c], &[(c, held(t))])?;
                Ok(Decision::Done {
                    res: true,
                    label: format!("{c}.keys[{}] := null; len := {}; sync", aux.i, len - 1),
                })
            }
            (_, OpKind::Insert) => {
                if aux.i > aux.j {
                    let v = self.key_at(tx, c, aux.i - 1)?;
                    self.set_key(tx, c, aux.i, v)?;
                    aux.i -= 1;
                    return Ok(Decision::Continue(format!("{c}.keys[{}] := {c}.keys[{}]", aux.i + 1, aux.i)));
                }
                let len = self.len(tx, c)?;
                self.set_key(tx, c, aux.j, HeapValue::Int(k))?;
                tx.write(c, "len", HeapValue::Int(len as i64 + 1))?;
                tx.sync(&[c], &[(c, held(t))])?;
                Ok(Decision::Done {
                    res: true,
                    label: format!("{c}.keys[{}] := {k}; len := {}; sync", aux.j, len + 1),
                })
            }
            (_, OpKind::Member) => unreachable!("member finishes in one step"),
        }
    }
}
