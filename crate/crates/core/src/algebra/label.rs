//! Node-label domains: join-semilattices with a bottom element.

use super::keyset::KeySet;
use std::collections::BTreeSet;
use std::fmt;

/// Element of a flat lattice `bottom < e < top` with unordered `e`s.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flat {
    Bottom,
    Elem(u64),
    Top,
}

/// Lock tags: `Held(0)` means unlocked, `Held(t)` locked by `t`,
/// `Dirty(t)` locked by `t` with the good condition suspended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LockTag {
    Held(u64),
    Dirty(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeLabel {
    Unit,
    Flat(Flat),
    Keys(KeySet),
    Locks(BTreeSet<LockTag>),
    Pair(Box<NodeLabel>, Box<NodeLabel>),
}

impl NodeLabel {
    pub fn pair(a: NodeLabel, b: NodeLabel) -> Self {
        NodeLabel::Pair(Box::new(a), Box::new(b))
    }

    /// A dictionary label `(contents, lockset)`.
    pub fn dict(contents: KeySet, locks: impl IntoIterator<Item = LockTag>) -> Self {
        Self::pair(NodeLabel::Keys(contents), NodeLabel::Locks(locks.into_iter().collect()))
    }

    pub fn as_dict(&self) -> Option<(&KeySet, &BTreeSet<LockTag>)> {
        match self {
            NodeLabel::Pair(a, b) => match (a.as_ref(), b.as_ref()) {
                (NodeLabel::Keys(c), NodeLabel::Locks(l)) => Some((c, l)),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeLabel::Unit => write!(f, "()"),
            NodeLabel::Flat(Flat::Bottom) => write!(f, "unmarked"),
            NodeLabel::Flat(Flat::Elem(t)) => write!(f, "tid {t}"),
            NodeLabel::Flat(Flat::Top) => write!(f, "top"),
            NodeLabel::Keys(s) => write!(f, "{s}"),
            NodeLabel::Locks(l) => {
                let parts: Vec<String> = l
                    .iter()
                    .map(|t| match t {
                        LockTag::Held(t) => t.to_string(),
                        LockTag::Dirty(t) => format!("~{t}"),
                    })
                    .collect();
                write!(f, "{{{}}}", parts.join(","))
            }
            NodeLabel::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

/// Descriptor of a node-label domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LabelDomain {
    Unit,
    Flat,
    KeyPowerset,
    Lockset,
    Product(Box<LabelDomain>, Box<LabelDomain>),
}

impl LabelDomain {
    pub fn dictionary() -> Self {
        LabelDomain::Product(Box::new(LabelDomain::KeyPowerset), Box::new(LabelDomain::Lockset))
    }

    pub fn bottom(&self) -> NodeLabel {
        match self {
            LabelDomain::Unit => NodeLabel::Unit,
            LabelDomain::Flat => NodeLabel::Flat(Flat::Bottom),
            LabelDomain::KeyPowerset => NodeLabel::Keys(KeySet::empty()),
            LabelDomain::Lockset => NodeLabel::Locks(BTreeSet::new()),
            LabelDomain::Product(a, b) => NodeLabel::pair(a.bottom(), b.bottom()),
        }
    }

    pub fn is_member(&self, a: &NodeLabel) -> bool {
        match (self, a) {
            (LabelDomain::Unit, NodeLabel::Unit)
            | (LabelDomain::Flat, NodeLabel::Flat(_))
            | (LabelDomain::KeyPowerset, NodeLabel::Keys(_))
            | (LabelDomain::Lockset, NodeLabel::Locks(_)) => true,
            (LabelDomain::Product(d1, d2), NodeLabel::Pair(x, y)) => d1.is_member(x) && d2.is_member(y),
            _ => false,
        }
    }

    pub fn leq(&self, a: &NodeLabel, b: &NodeLabel) -> bool {
        self.join(a, b) == *b
    }

    pub fn join(&self, a: &NodeLabel, b: &NodeLabel) -> NodeLabel {
        match (self, a, b) {
            (LabelDomain::Unit, NodeLabel::Unit, NodeLabel::Unit) => NodeLabel::Unit,
            (LabelDomain::Flat, NodeLabel::Flat(x), NodeLabel::Flat(y)) => NodeLabel::Flat(match (x, y) {
                (Flat::Bottom, _) => y.clone(),
                (_, Flat::Bottom) => x.clone(),
                _ if x == y => x.clone(),
                _ => Flat::Top,
            }),
            (LabelDomain::KeyPowerset, NodeLabel::Keys(x), NodeLabel::Keys(y)) => NodeLabel::Keys(x.union(y)),
            (LabelDomain::Lockset, NodeLabel::Locks(x), NodeLabel::Locks(y)) => {
                NodeLabel::Locks(x.union(y).copied().collect())
            }
            (LabelDomain::Product(d1, d2), NodeLabel::Pair(x1, x2), NodeLabel::Pair(y1, y2)) => {
                NodeLabel::pair(d1.join(x1, y1), d2.join(x2, y2))
            }
            _ => panic!("labels {a} and {b} do not belong to {self:?}"),
        }
    }

    pub fn join_all<'a, I: IntoIterator<Item = &'a NodeLabel>>(&self, items: I) -> NodeLabel {
        items.into_iter().fold(self.bottom(), |acc, x| self.join(&acc, x))
    }
}
