//! Exhaustive law checking of flow domains over sample sets.

use super::domain::{FlowDomain, FlowDomainSpec};
use super::ext::{ExtInt, ExtNat};
use super::keyset::KeySet;
use super::value::{FlowValue, LastEdge};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawViolation {
    pub law: &'static str,
    pub witness: Vec<FlowValue>,
}

#[derive(Clone, Debug, Default)]
pub struct LawReport {
    pub checked: usize,
    pub violations: Vec<LawViolation>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, law: &'static str, witness: &[&FlowValue]) {
        self.checked += 1;
        if !ok {
            self.violations.push(LawViolation {
                law,
                witness: witness.iter().map(|v| (*v).clone()).collect(),
            });
        }
    }

    /// Distinct law names that were violated, in first-seen order.
    pub fn violated_laws(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for v in &self.violations {
            if !out.contains(&v.law) {
                out.push(v.law);
            }
        }
        out
    }
}

/// Evaluates every semiring, order, star and residual law on all tuples
/// drawn from `samples`.
///
/// Residual completeness is checked relative to the samples: whenever
/// some sample `x` satisfies `p + x = t`, the residual must be defined.
pub fn law_check(d: &dyn FlowDomainSpec, samples: &[FlowValue]) -> LawReport {
    let mut r = LawReport::default();
    let (zero, one) = (d.zero(), d.one());
    for a in samples {
        r.check(d.plus(a, &zero) == *a, "plus identity", &[a]);
        r.check(d.times(a, &one) == *a && d.times(&one, a) == *a, "times identity", &[a]);
        r.check(
            d.times(&zero, a) == zero && d.times(a, &zero) == zero,
            "zero annihilates",
            &[a],
        );
        r.check(d.leq(&zero, a), "zero least", &[a]);
        r.check(d.leq(a, a), "order reflexive", &[a]);
        let s = d.star(a);
        r.check(d.plus(&one, &d.times(a, &s)) == s, "star left unfold", &[a]);
        r.check(d.plus(&one, &d.times(&s, a)) == s, "star right unfold", &[a]);
        for b in samples {
            r.check(d.plus(a, b) == d.plus(b, a), "plus commutative", &[a, b]);
            let j = d.join(a, b);
            r.check(d.leq(a, &j) && d.leq(b, &j), "join upper bound", &[a, b]);
            r.check(!(d.leq(a, b) && d.leq(b, a)) || a == b, "order antisymmetric", &[a, b]);
            let completes = samples.iter().any(|x| d.plus(b, x) == *a);
            match d.residual(a, b) {
                Some(x) => r.check(d.plus(b, &x) == *a, "residual recomposes", &[a, b]),
                None => r.check(!completes, "residual complete", &[a, b]),
            }
            for c in samples {
                r.check(
                    d.plus(a, &d.plus(b, c)) == d.plus(&d.plus(a, b), c),
                    "plus associative",
                    &[a, b, c],
                );
                r.check(
                    d.times(a, &d.times(b, c)) == d.times(&d.times(a, b), c),
                    "times associative",
                    &[a, b, c],
                );
                r.check(
                    d.times(a, &d.plus(b, c)) == d.plus(&d.times(a, b), &d.times(a, c)),
                    "left distributive",
                    &[a, b, c],
                );
                r.check(
                    d.times(&d.plus(a, b), c) == d.plus(&d.times(a, c), &d.times(b, c)),
                    "right distributive",
                    &[a, b, c],
                );
                r.check(
                    !(d.leq(a, b) && d.leq(b, c)) || d.leq(a, c),
                    "order transitive",
                    &[a, b, c],
                );
                if d.leq(a, b) {
                    r.check(d.leq(&d.plus(a, c), &d.plus(b, c)), "plus monotone", &[a, b, c]);
                    r.check(d.leq(&d.times(a, c), &d.times(b, c)), "times monotone left", &[a, b, c]);
                    r.check(d.leq(&d.times(c, a), &d.times(c, b)), "times monotone right", &[a, b, c]);
                }
                let j = d.join(a, b);
                if d.leq(a, c) && d.leq(b, c) {
                    r.check(d.leq(&j, c), "join least", &[a, b, c]);
                }
            }
        }
    }
    r
}

/// Small exhaustive-style sample sets for the built-in domains. Product
/// samples are the full cross product of trimmed component samples.
pub fn standard_samples(d: &FlowDomain) -> Vec<FlowValue> {
    match d {
        FlowDomain::PathCount => [0, 1, 2, 3]
            .into_iter()
            .map(FlowValue::count)
            .chain([FlowValue::Count(ExtNat::Inf)])
            .collect(),
        FlowDomain::KeySet => {
            let pts = [ExtInt::NegInf, ExtInt::Fin(0), ExtInt::Fin(3), ExtInt::Fin(6), ExtInt::PosInf];
            let mut v = vec![FlowValue::Keys(KeySet::empty())];
            for (i, lo) in pts.iter().enumerate() {
                for hi in &pts[i + 1..] {
                    v.push(FlowValue::Keys(KeySet::interval(*lo, *hi)));
                }
            }
            v.push(FlowValue::Keys(KeySet::from_keys([1, 4])));
            v
        }
        FlowDomain::LowerBound | FlowDomain::UpperBound => {
            let wrap = |b| match d {
                FlowDomain::LowerBound => FlowValue::Lower(b),
                _ => FlowValue::Upper(b),
            };
            [ExtInt::NegInf, ExtInt::Fin(-1), ExtInt::Fin(0), ExtInt::Fin(3), ExtInt::PosInf]
                .into_iter()
                .map(wrap)
                .collect()
        }
        FlowDomain::LastEdge => [LastEdge::Zero, LastEdge::One, LastEdge::Tag(1), LastEdge::Tag(2), LastEdge::Top]
            .into_iter()
            .map(FlowValue::Last)
            .collect(),
        FlowDomain::Product(d1, d2) => {
            let trim = |d: &FlowDomain| -> Vec<FlowValue> {
                let s = standard_samples(d);
                match d {
                    FlowDomain::KeySet => vec![s[0].clone(), s[1].clone(), s[6].clone(), s[8].clone(), s[11].clone()],
                    _ => s,
                }
            };
            let (s1, s2) = (trim(d1), trim(d2));
            let mut v = Vec::new();
            for a in &s1 {
                for b in &s2 {
                    v.push(FlowValue::pair(a.clone(), b.clone()));
                }
            }
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_count_lawful() {
        let d = FlowDomain::PathCount;
        let r = law_check(&d, &standard_samples(&d));
        assert!(r.passed(), "{:?}", r.violations.first());
    }

    #[test]
    fn keyset_lawful() {
        let d = FlowDomain::KeySet;
        let r = law_check(&d, &standard_samples(&d));
        assert!(r.passed(), "{:?}", r.violations.first());
    }

    #[derive(Debug)]
    struct BrokenTimes;

    // Path counting with x·y replaced by 2x + y, which is not associative.
    impl FlowDomainSpec for BrokenTimes {
        fn leq(&self, a: &FlowValue, b: &FlowValue) -> bool {
            FlowDomain::PathCount.leq(a, b)
        }
        fn join(&self, a: &FlowValue, b: &FlowValue) -> FlowValue {
            FlowDomain::PathCount.join(a, b)
        }
        fn plus(&self, a: &FlowValue, b: &FlowValue) -> FlowValue {
            FlowDomain::PathCount.plus(a, b)
        }
        fn times(&self, a: &FlowValue, b: &FlowValue) -> FlowValue {
            let d = FlowDomain::PathCount;
            d.plus(&d.times(&FlowValue::count(2), a), b)
        }
        fn zero(&self) -> FlowValue {
            FlowValue::count(0)
        }
        fn one(&self) -> FlowValue {
            FlowValue::count(1)
        }
        fn star(&self, a: &FlowValue) -> FlowValue {
            FlowDomain::PathCount.star(a)
        }
        fn residual(&self, t: &FlowValue, p: &FlowValue) -> Option<FlowValue> {
            FlowDomain::PathCount.residual(t, p)
        }
    }

    #[test]
    fn broken_domain_reports_witness() {
        let r = law_check(&BrokenTimes, &standard_samples(&FlowDomain::PathCount));
        let v = r.violations.iter().find(|v| v.law == "times associative").expect("violation");
        assert_eq!(v.witness.len(), 3);
    }
}
