use super::ext::{ExtInt, ExtNat};
use super::keyset::KeySet;
use std::fmt;

/// Elements of the last-edge domain: a flat base of tags with a bottom
/// (`Zero`) and a top, plus the fresh unit `One`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LastEdge {
    Zero,
    One,
    Tag(u64),
    Top,
}

/// A value of one of the built-in flow domains.
///
/// Each variant belongs to exactly one carrier, so zero tests and
/// equality need no domain descriptor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowValue {
    Count(ExtNat),
    Keys(KeySet),
    Lower(ExtInt),
    Upper(ExtInt),
    Last(LastEdge),
    Pair(Box<FlowValue>, Box<FlowValue>),
}

impl FlowValue {
    pub fn count(n: u64) -> Self {
        FlowValue::Count(ExtNat::Fin(n))
    }

    pub fn inf() -> Self {
        FlowValue::Count(ExtNat::Inf)
    }

    pub fn pair(a: FlowValue, b: FlowValue) -> Self {
        FlowValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn counts(a: u64, b: u64) -> Self {
        Self::pair(Self::count(a), Self::count(b))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FlowValue::Count(n) => n.is_zero(),
            FlowValue::Keys(s) => s.is_empty(),
            FlowValue::Lower(b) => *b == ExtInt::PosInf,
            FlowValue::Upper(b) => *b == ExtInt::NegInf,
            FlowValue::Last(l) => *l == LastEdge::Zero,
            FlowValue::Pair(a, b) => a.is_zero() && b.is_zero(),
        }
    }

    pub fn as_count(&self) -> Option<ExtNat> {
        match self {
            FlowValue::Count(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_keys(&self) -> Option<&KeySet> {
        match self {
            FlowValue::Keys(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&FlowValue, &FlowValue)> {
        match self {
            FlowValue::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

impl fmt::Display for FlowValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowValue::Count(n) => write!(f, "{n}"),
            FlowValue::Keys(s) => write!(f, "{s}"),
            FlowValue::Lower(b) | FlowValue::Upper(b) => write!(f, "{b}"),
            FlowValue::Last(LastEdge::Zero) => write!(f, "zero"),
            FlowValue::Last(LastEdge::One) => write!(f, "one"),
            FlowValue::Last(LastEdge::Tag(t)) => write!(f, "#{t}"),
            FlowValue::Last(LastEdge::Top) => write!(f, "top"),
            FlowValue::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}
