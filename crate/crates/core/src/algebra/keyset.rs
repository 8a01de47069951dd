//! Sets of integer keys as unions of half-open intervals over the
//! extended integers.

use super::ext::ExtInt;
use std::fmt;

/// A finite union of half-open intervals `[lo, hi)`.
///
/// Canonical form: intervals are non-empty, sorted, and neither overlap
/// nor touch. Two key sets are equal iff they contain the same keys.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct KeySet {
    ivs: Vec<(ExtInt, ExtInt)>,
}

impl KeySet {
    pub fn empty() -> Self {
        KeySet { ivs: Vec::new() }
    }

    /// The full key space `[-inf, inf)`.
    pub fn all() -> Self {
        KeySet {
            ivs: vec![(ExtInt::NegInf, ExtInt::PosInf)],
        }
    }

    pub fn interval(lo: ExtInt, hi: ExtInt) -> Self {
        Self::from_intervals([(lo, hi)])
    }

    pub fn range(lo: i64, hi: i64) -> Self {
        Self::interval(ExtInt::Fin(lo), ExtInt::Fin(hi))
    }

    pub fn singleton(k: i64) -> Self {
        match k.checked_add(1) {
            Some(n) => Self::range(k, n),
            None => Self::interval(ExtInt::Fin(k), ExtInt::PosInf),
        }
    }

    pub fn from_keys<I: IntoIterator<Item = i64>>(keys: I) -> Self {
        Self::from_intervals(keys.into_iter().map(|k| match k.checked_add(1) {
            Some(n) => (ExtInt::Fin(k), ExtInt::Fin(n)),
            None => (ExtInt::Fin(k), ExtInt::PosInf),
        }))
    }

    /// Builds the canonical form of an arbitrary list of intervals.
    /// Empty intervals (`lo >= hi`) are dropped.
    pub fn from_intervals<I: IntoIterator<Item = (ExtInt, ExtInt)>>(ivs: I) -> Self {
        let mut v: Vec<(ExtInt, ExtInt)> = ivs.into_iter().filter(|(lo, hi)| lo < hi).collect();
        v.sort();
        let mut out: Vec<(ExtInt, ExtInt)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        KeySet { ivs: out }
    }

    pub fn intervals(&self) -> &[(ExtInt, ExtInt)] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn is_all(&self) -> bool {
        self.ivs == [(ExtInt::NegInf, ExtInt::PosInf)]
    }

    pub fn contains(&self, k: i64) -> bool {
        let k = ExtInt::Fin(k);
        self.ivs.iter().any(|&(lo, hi)| lo <= k && k < hi)
    }

    pub fn union(&self, other: &KeySet) -> KeySet {
        Self::from_intervals(self.ivs.iter().chain(other.ivs.iter()).copied())
    }

    pub fn intersect(&self, other: &KeySet) -> KeySet {
        let (a, b) = (&self.ivs, &other.ivs);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        KeySet { ivs: out }
    }

    pub fn complement(&self) -> KeySet {
        let mut out = Vec::new();
        let mut cur = ExtInt::NegInf;
        for &(lo, hi) in &self.ivs {
            if cur < lo {
                out.push((cur, lo));
            }
            cur = hi;
        }
        if cur < ExtInt::PosInf {
            out.push((cur, ExtInt::PosInf));
        }
        KeySet { ivs: out }
    }

    pub fn difference(&self, other: &KeySet) -> KeySet {
        self.intersect(&other.complement())
    }

    pub fn is_subset(&self, other: &KeySet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint(&self, other: &KeySet) -> bool {
        self.intersect(other).is_empty()
    }

    /// Finite keys in the set, if it is finite.
    pub fn keys(&self) -> Option<Vec<i64>> {
        let mut out = Vec::new();
        for &(lo, hi) in &self.ivs {
            match (lo, hi) {
                (ExtInt::Fin(a), ExtInt::Fin(b)) => out.extend(a..b),
                _ => return None,
            }
        }
        Some(out)
    }
}

impl fmt::Display for KeySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (lo, hi)) in self.ivs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{lo},{hi})")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ks(ivs: &[(i64, i64)]) -> KeySet {
        KeySet::from_intervals(ivs.iter().map(|&(a, b)| (ExtInt::Fin(a), ExtInt::Fin(b))))
    }

    #[test]
    fn merges_adjacent() {
        let s = ks(&[(5, 7), (0, 3), (3, 5)]);
        assert_eq!(s.intervals(), &[(ExtInt::Fin(0), ExtInt::Fin(7))]);
    }

    #[test]
    fn basic_ops() {
        assert_eq!(KeySet::range(0, 5).intersect(&KeySet::range(3, 9)), KeySet::range(3, 5));
        assert_eq!(KeySet::range(0, 9).difference(&KeySet::range(0, 5)), KeySet::range(5, 9));
        assert!(KeySet::all().complement().is_empty());
        assert!(KeySet::empty().complement().is_all());
        assert!(!KeySet::range(0, 5).contains(5));
    }

    fn arb_keyset() -> impl Strategy<Value = KeySet> {
        prop::collection::vec((-6i64..6, 0i64..5), 0..4)
            .prop_map(|v| ks(&v.into_iter().map(|(a, w)| (a, a + w)).collect::<Vec<_>>()))
    }

    // Keys in -10..10 stand in for the whole universe of these sets.
    fn member_vec(s: &KeySet) -> Vec<bool> {
        (-10..10).map(|k| s.contains(k)).collect()
    }

    proptest! {
        #[test]
        fn ops_agree_with_membership(a in arb_keyset(), b in arb_keyset()) {
            let (ma, mb) = (member_vec(&a), member_vec(&b));
            let u = member_vec(&a.union(&b));
            let i = member_vec(&a.intersect(&b));
            let d = member_vec(&a.difference(&b));
            for k in 0..ma.len() {
                prop_assert_eq!(u[k], ma[k] || mb[k]);
                prop_assert_eq!(i[k], ma[k] && mb[k]);
                prop_assert_eq!(d[k], ma[k] && !mb[k]);
            }
            prop_assert_eq!(a.is_subset(&b), ma.iter().zip(&mb).all(|(x, y)| !x || *y));
        }

        #[test]
        fn canonical_equality(a in arb_keyset(), b in arb_keyset()) {
            prop_assert_eq!(a == b, member_vec(&a) == member_vec(&b));
        }
    }
}
