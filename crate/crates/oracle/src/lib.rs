//! Brute-force oracles and seeded property suites for the flow framework.

pub mod brute;
pub mod checks;
pub mod gen;

use flowcore::{law_check, product_domain, standard_samples, FlowDomain, LawReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use checks::{interface_cases, oracle_cases, separation_cases, Case, Check};

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: String,
    /// Instances on which the property was evaluated.
    pub instances: usize,
    /// Instances drawn that did not meet the property's premise.
    pub vacuous: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self, target: usize) -> bool {
        self.failures.is_empty() && self.instances >= target
    }
}

/// Draws instances from a generator seeded with `seed` until `target` of
/// them have been checked, giving up after `20 * target` draws.
pub fn run_case(case: &Case, target: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteReport {
        name: case.name.to_string(),
        instances: 0,
        vacuous: 0,
        failures: Vec::new(),
    };
    let mut draws = 0;
    while r.instances < target && draws < 20 * target {
        draws += 1;
        match (case.run)(&mut rng) {
            Ok(true) => r.instances += 1,
            Ok(false) => r.vacuous += 1,
            Err(e) => {
                r.instances += 1;
                r.failures.push(e);
            }
        }
    }
    r
}

/// The five built-in domains.
pub fn base_domains() -> Vec<FlowDomain> {
    vec![
        FlowDomain::PathCount,
        FlowDomain::KeySet,
        FlowDomain::LowerBound,
        FlowDomain::UpperBound,
        FlowDomain::LastEdge,
    ]
}

/// Law reports for every built-in domain and every ordered pair product.
pub fn algebra_reports() -> Vec<(FlowDomain, LawReport)> {
    let mut doms = base_domains();
    for a in base_domains() {
        for b in base_domains() {
            doms.push(product_domain(a.clone(), b));
        }
    }
    doms.into_iter()
        .map(|d| {
            let r = law_check(&d, &standard_samples(&d));
            (d, r)
        })
        .collect()
}
