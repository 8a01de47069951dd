use super::ext::{ExtInt, ExtNat};
use super::keyset::KeySet;
use super::value::{FlowValue, LastEdge};
use std::fmt;

/// The operations of a flow domain: an ordered semiring with a closed
/// form star and a partial residual for `+`.
///
/// Implementations may panic when handed a value from another carrier.
pub trait FlowDomainSpec {
    fn leq(&self, a: &FlowValue, b: &FlowValue) -> bool;
    fn join(&self, a: &FlowValue, b: &FlowValue) -> FlowValue;
    fn plus(&self, a: &FlowValue, b: &FlowValue) -> FlowValue;
    fn times(&self, a: &FlowValue, b: &FlowValue) -> FlowValue;
    fn zero(&self) -> FlowValue;
    fn one(&self) -> FlowValue;
    /// Least solution of `x = 1 + a·x`.
    fn star(&self, a: &FlowValue) -> FlowValue;
    /// Some `d` with `partial + d = target`, or `None` if there is none.
    fn residual(&self, target: &FlowValue, partial: &FlowValue) -> Option<FlowValue>;

    fn is_zero(&self, a: &FlowValue) -> bool {
        *a == self.zero()
    }

    fn sum<'a, I: IntoIterator<Item = &'a FlowValue>>(&self, items: I) -> FlowValue
    where
        Self: Sized,
    {
        items.into_iter().fold(self.zero(), |acc, x| self.plus(&acc, x))
    }
}

/// Descriptor of a built-in flow domain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FlowDomain {
    PathCount,
    KeySet,
    LowerBound,
    UpperBound,
    /// Last-edge flows over a flat base of numeric tags.
    LastEdge,
    Product(Box<FlowDomain>, Box<FlowDomain>),
}

/// The kinds accepted by [`make_domain`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    PathCount,
    KeySet,
    LowerBound,
    UpperBound,
    LastEdge,
}

pub fn make_domain(kind: DomainKind) -> FlowDomain {
    match kind {
        DomainKind::PathCount => FlowDomain::PathCount,
        DomainKind::KeySet => FlowDomain::KeySet,
        DomainKind::LowerBound => FlowDomain::LowerBound,
        DomainKind::UpperBound => FlowDomain::UpperBound,
        DomainKind::LastEdge => FlowDomain::LastEdge,
    }
}

pub fn product_domain(d1: FlowDomain, d2: FlowDomain) -> FlowDomain {
    FlowDomain::Product(Box::new(d1), Box::new(d2))
}

impl fmt::Display for FlowDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowDomain::PathCount => write!(f, "path_count"),
            FlowDomain::KeySet => write!(f, "keyset"),
            FlowDomain::LowerBound => write!(f, "lower_bound"),
            FlowDomain::UpperBound => write!(f, "upper_bound"),
            FlowDomain::LastEdge => write!(f, "last_edge"),
            FlowDomain::Product(a, b) => write!(f, "product({a}, {b})"),
        }
    }
}

fn mismatch(d: &FlowDomain, a: &FlowValue) -> ! {
    panic!("value {a} does not belong to domain {d}")
}

fn last_leq(a: &LastEdge, b: &LastEdge) -> bool {
    a == b || *a == LastEdge::Zero || *b == LastEdge::Top
}

fn last_join(a: &LastEdge, b: &LastEdge) -> LastEdge {
    if last_leq(a, b) {
        b.clone()
    } else if last_leq(b, a) {
        a.clone()
    } else {
        LastEdge::Top
    }
}

impl FlowDomain {
    pub fn is_member(&self, a: &FlowValue) -> bool {
        match (self, a) {
            (FlowDomain::PathCount, FlowValue::Count(_))
            | (FlowDomain::KeySet, FlowValue::Keys(_))
            | (FlowDomain::LowerBound, FlowValue::Lower(_))
            | (FlowDomain::UpperBound, FlowValue::Upper(_))
            | (FlowDomain::LastEdge, FlowValue::Last(_)) => true,
            (FlowDomain::Product(d1, d2), FlowValue::Pair(x, y)) => d1.is_member(x) && d2.is_member(y),
            _ => false,
        }
    }

    pub fn components(&self) -> Option<(&FlowDomain, &FlowDomain)> {
        match self {
            FlowDomain::Product(a, b) => Some((a, b)),
            _ => None,
        }
    }

    fn nat(&self, a: &FlowValue) -> ExtNat {
        match a {
            FlowValue::Count(n) => *n,
            _ => mismatch(self, a),
        }
    }

    fn keys<'a>(&self, a: &'a FlowValue) -> &'a KeySet {
        match a {
            FlowValue::Keys(s) => s,
            _ => mismatch(self, a),
        }
    }

    fn bound(&self, a: &FlowValue) -> ExtInt {
        match (self, a) {
            (FlowDomain::LowerBound, FlowValue::Lower(b)) | (FlowDomain::UpperBound, FlowValue::Upper(b)) => *b,
            _ => mismatch(self, a),
        }
    }

    fn wrap_bound(&self, b: ExtInt) -> FlowValue {
        match self {
            FlowDomain::LowerBound => FlowValue::Lower(b),
            _ => FlowValue::Upper(b),
        }
    }

    fn last<'a>(&self, a: &'a FlowValue) -> &'a LastEdge {
        match a {
            FlowValue::Last(l) => l,
            _ => mismatch(self, a),
        }
    }

    fn split<'a>(&self, a: &'a FlowValue) -> (&'a FlowValue, &'a FlowValue) {
        match a {
            FlowValue::Pair(x, y) => (x, y),
            _ => mismatch(self, a),
        }
    }

    fn pointwise(
        &self,
        a: &FlowValue,
        b: &FlowValue,
        op: impl Fn(&FlowDomain, &FlowValue, &FlowValue) -> FlowValue,
    ) -> FlowValue {
        let FlowDomain::Product(d1, d2) = self else { unreachable!() };
        let (a1, a2) = self.split(a);
        let (b1, b2) = self.split(b);
        FlowValue::pair(op(d1, a1, b1), op(d2, a2, b2))
    }
}

impl FlowDomainSpec for FlowDomain {
    fn leq(&self, a: &FlowValue, b: &FlowValue) -> bool {
        match self {
            FlowDomain::PathCount => self.nat(a) <= self.nat(b),
            FlowDomain::KeySet => self.keys(a).is_subset(self.keys(b)),
            FlowDomain::LowerBound => self.bound(a) >= self.bound(b),
            FlowDomain::UpperBound => self.bound(a) <= self.bound(b),
            FlowDomain::LastEdge => last_leq(self.last(a), self.last(b)),
            FlowDomain::Product(d1, d2) => {
                let (a1, a2) = self.split(a);
                let (b1, b2) = self.split(b);
                d1.leq(a1, b1) && d2.leq(a2, b2)
            }
        }
    }

    fn join(&self, a: &FlowValue, b: &FlowValue) -> FlowValue {
        match self {
            FlowDomain::PathCount => FlowValue::Count(self.nat(a).max(self.nat(b))),
            FlowDomain::KeySet => FlowValue::Keys(self.keys(a).union(self.keys(b))),
            FlowDomain::LowerBound => FlowValue::Lower(self.bound(a).min(self.bound(b))),
            FlowDomain::UpperBound => FlowValue::Upper(self.bound(a).max(self.bound(b))),
            FlowDomain::LastEdge => FlowValue::Last(last_join(self.last(a), self.last(b))),
            FlowDomain::Product(..) => self.pointwise(a, b, |d, x, y| d.join(x, y)),
        }
    }

    fn plus(&self, a: &FlowValue, b: &FlowValue) -> FlowValue {
        match self {
            FlowDomain::PathCount => FlowValue::Count(self.nat(a).add(self.nat(b))),
            FlowDomain::Product(..) => self.pointwise(a, b, |d, x, y| d.plus(x, y)),
            // In every other built-in domain + coincides with the join.
            _ => self.join(a, b),
        }
    }

    fn times(&self, a: &FlowValue, b: &FlowValue) -> FlowValue {
        match self {
            FlowDomain::PathCount => FlowValue::Count(self.nat(a).mul(self.nat(b))),
            FlowDomain::KeySet => FlowValue::Keys(self.keys(a).intersect(self.keys(b))),
            FlowDomain::LowerBound => FlowValue::Lower(self.bound(a).max(self.bound(b))),
            FlowDomain::UpperBound => FlowValue::Upper(self.bound(a).min(self.bound(b))),
            FlowDomain::LastEdge => {
                let (x, y) = (self.last(a), self.last(b));
                FlowValue::Last(if *x == LastEdge::Zero {
                    LastEdge::Zero
                } else if *y == LastEdge::One {
                    x.clone()
                } else {
                    y.clone()
                })
            }
            FlowDomain::Product(..) => self.pointwise(a, b, |d, x, y| d.times(x, y)),
        }
    }

    fn zero(&self) -> FlowValue {
        match self {
            FlowDomain::PathCount => FlowValue::Count(ExtNat::ZERO),
            FlowDomain::KeySet => FlowValue::Keys(KeySet::empty()),
            FlowDomain::LowerBound => FlowValue::Lower(ExtInt::PosInf),
            FlowDomain::UpperBound => FlowValue::Upper(ExtInt::NegInf),
            FlowDomain::LastEdge => FlowValue::Last(LastEdge::Zero),
            FlowDomain::Product(d1, d2) => FlowValue::pair(d1.zero(), d2.zero()),
        }
    }

    fn one(&self) -> FlowValue {
        match self {
            FlowDomain::PathCount => FlowValue::Count(ExtNat::ONE),
            FlowDomain::KeySet => FlowValue::Keys(KeySet::all()),
            FlowDomain::LowerBound => FlowValue::Lower(ExtInt::NegInf),
            FlowDomain::UpperBound => FlowValue::Upper(ExtInt::PosInf),
            FlowDomain::LastEdge => FlowValue::Last(LastEdge::One),
            FlowDomain::Product(d1, d2) => FlowValue::pair(d1.one(), d2.one()),
        }
    }

    fn star(&self, a: &FlowValue) -> FlowValue {
        match self {
            FlowDomain::PathCount => FlowValue::Count(if self.nat(a).is_zero() {
                ExtNat::ONE
            } else {
                ExtNat::Inf
            }),
            FlowDomain::KeySet | FlowDomain::LowerBound | FlowDomain::UpperBound => self.one(),
            // a·a = a for every a other than 0 and 1, so the series stops
            // after the first term.
            FlowDomain::LastEdge => self.join(&self.one(), a),
            FlowDomain::Product(d1, d2) => {
                let (x, y) = self.split(a);
                FlowValue::pair(d1.star(x), d2.star(y))
            }
        }
    }

    fn residual(&self, target: &FlowValue, partial: &FlowValue) -> Option<FlowValue> {
        match self {
            FlowDomain::PathCount => match (self.nat(target), self.nat(partial)) {
                (ExtNat::Inf, ExtNat::Inf) => Some(self.zero()),
                (ExtNat::Inf, _) => Some(FlowValue::inf()),
                (ExtNat::Fin(t), ExtNat::Fin(p)) if p <= t => Some(FlowValue::count(t - p)),
                _ => None,
            },
            FlowDomain::KeySet => {
                let (t, p) = (self.keys(target), self.keys(partial));
                p.is_subset(t).then(|| FlowValue::Keys(t.difference(p)))
            }
            FlowDomain::LowerBound | FlowDomain::UpperBound => {
                let (t, p) = (self.bound(target), self.bound(partial));
                let absorbs = if *self == FlowDomain::LowerBound { t < p } else { t > p };
                if t == p {
                    Some(self.zero())
                } else if absorbs {
                    Some(self.wrap_bound(t))
                } else {
                    None
                }
            }
            FlowDomain::LastEdge => {
                let (t, p) = (self.last(target), self.last(partial));
                if t == p {
                    Some(self.zero())
                } else if last_leq(p, t) {
                    Some(target.clone())
                } else {
                    None
                }
            }
            FlowDomain::Product(d1, d2) => {
                let (t1, t2) = self.split(target);
                let (p1, p2) = self.split(partial);
                Some(FlowValue::pair(d1.residual(t1, p1)?, d2.residual(t2, p2)?))
            }
        }
    }

    fn is_zero(&self, a: &FlowValue) -> bool {
        a.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lb(k: i64) -> FlowValue {
        FlowValue::Lower(ExtInt::Fin(k))
    }

    #[test]
    fn path_count_arithmetic() {
        let d = FlowDomain::PathCount;
        assert_eq!(d.plus(&FlowValue::count(2), &FlowValue::count(3)), FlowValue::count(5));
        assert_eq!(d.times(&FlowValue::count(2), &FlowValue::count(3)), FlowValue::count(6));
        assert_eq!(d.zero(), FlowValue::count(0));
        assert_eq!(d.one(), FlowValue::count(1));
    }

    #[test]
    fn path_count_star_and_residual() {
        let d = FlowDomain::PathCount;
        assert_eq!(d.star(&FlowValue::count(0)), FlowValue::count(1));
        assert_eq!(d.star(&FlowValue::count(1)), FlowValue::inf());
        assert_eq!(d.star(&FlowValue::inf()), FlowValue::inf());
        assert_eq!(d.residual(&FlowValue::count(5), &FlowValue::count(3)), Some(FlowValue::count(2)));
        assert_eq!(d.residual(&FlowValue::inf(), &FlowValue::count(3)), Some(FlowValue::inf()));
        assert_eq!(d.residual(&FlowValue::inf(), &FlowValue::inf()), Some(FlowValue::count(0)));
        assert_eq!(d.residual(&FlowValue::count(2), &FlowValue::count(5)), None);
    }

    /// Bounded Kleene iteration of x = 1 + a·x; growth past a cutoff is
    /// read as divergence.
    fn kleene_star(a: u64) -> ExtNat {
        let d = FlowDomain::PathCount;
        let a = FlowValue::count(a);
        let mut x = d.one();
        for _ in 0..64 {
            let next = d.plus(&d.one(), &d.times(&a, &x));
            if next == x {
                return x.as_count().unwrap();
            }
            x = next;
        }
        ExtNat::Inf
    }

    #[test]
    fn path_count_star_matches_kleene_iteration() {
        for a in 0..4 {
            assert_eq!(FlowDomain::PathCount.star(&FlowValue::count(a)).as_count().unwrap(), kleene_star(a));
        }
    }

    #[test]
    fn keyset_ops() {
        let d = FlowDomain::KeySet;
        let a = FlowValue::Keys(KeySet::range(0, 5));
        let b = FlowValue::Keys(KeySet::range(3, 9));
        assert_eq!(d.times(&a, &b), FlowValue::Keys(KeySet::range(3, 5)));
        assert_eq!(d.plus(&a, &b), FlowValue::Keys(KeySet::range(0, 9)));
        assert_eq!(d.star(&a), FlowValue::Keys(KeySet::all()));
        let t = FlowValue::Keys(KeySet::range(0, 9));
        assert_eq!(d.residual(&t, &a), Some(FlowValue::Keys(KeySet::range(5, 9))));
        assert_eq!(d.residual(&a, &t), None);
    }

    #[test]
    fn lower_bound_ops() {
        let d = FlowDomain::LowerBound;
        assert_eq!(d.times(&FlowValue::Lower(ExtInt::NegInf), &lb(3)), lb(3));
        assert_eq!(d.plus(&lb(3), &lb(7)), lb(3));
        assert_eq!(d.star(&lb(4)), FlowValue::Lower(ExtInt::NegInf));
    }

    #[test]
    fn lower_bound_residual_matches_brute_force() {
        let d = FlowDomain::LowerBound;
        let mut vals: Vec<FlowValue> = (-3..=3).map(lb).collect();
        vals.push(FlowValue::Lower(ExtInt::NegInf));
        vals.push(FlowValue::Lower(ExtInt::PosInf));
        for t in &vals {
            for p in &vals {
                let exists = vals.iter().any(|x| d.plus(p, x) == *t);
                match d.residual(t, p) {
                    Some(r) => assert_eq!(d.plus(p, &r), *t),
                    None => assert!(!exists, "missed completion for {t} - {p}"),
                }
            }
        }
        assert_eq!(d.residual(&lb(3), &lb(3)), Some(FlowValue::Lower(ExtInt::PosInf)));
        assert_eq!(d.residual(&lb(2), &lb(5)), Some(lb(2)));
        assert_eq!(d.residual(&lb(5), &lb(2)), None);
    }

    #[test]
    fn product_ops() {
        let d = product_domain(FlowDomain::PathCount, FlowDomain::PathCount);
        assert_eq!(d.plus(&FlowValue::counts(1, 0), &FlowValue::counts(0, 1)), FlowValue::counts(1, 1));
        assert_eq!(d.zero(), FlowValue::counts(0, 0));
        assert_eq!(d.one(), FlowValue::counts(1, 1));
        let t = FlowValue::pair(FlowValue::inf(), FlowValue::count(4));
        let p = FlowValue::counts(2, 1);
        let r = d.residual(&t, &p).unwrap();
        assert_eq!(r, FlowValue::pair(FlowValue::inf(), FlowValue::count(3)));
        assert_eq!(d.plus(&p, &r), t);
    }

    #[test]
    fn last_edge_projection() {
        let d = FlowDomain::LastEdge;
        let t1 = FlowValue::Last(LastEdge::Tag(1));
        let t2 = FlowValue::Last(LastEdge::Tag(2));
        assert_eq!(d.times(&t1, &t2), t2);
        assert_eq!(d.times(&t1, &d.one()), t1);
        assert_eq!(d.times(&d.zero(), &t2), d.zero());
        assert_eq!(d.times(&t1, &d.zero()), d.zero());
    }
}
