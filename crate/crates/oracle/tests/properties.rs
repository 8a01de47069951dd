use floworacle::checks::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn holds(f: fn(&mut ChaCha8Rng) -> Check, seed: u64) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match f(&mut rng) {
        Err(e) => Err(TestCaseError::fail(e)),
        Ok(_) => Ok(()),
    }
}

macro_rules! props {
    ($cases:expr; $($name:ident => $f:path),* $(,)?) => {
        proptest! {
            #![proptest_config(ProptestConfig::with_cases($cases))]
            $(
                #[test]
                fn $name(seed in any::<u64>()) {
                    holds($f, seed)?;
                }
            )*
        }
    };
}

props! { 300;
    capacity_counts_dag_paths => capacity_dag,
    capacity_saturates_on_cycles => capacity_cyclic,
    keyset_flow_is_reachability => keyset_reachability,
    projection_preserves_flow => projection_lemma,
    flow_unfolds_once => kleene_identity,
    graph_composition_is_separation_algebra => graph_separation_algebra,
    state_composition_is_separation_algebra => state_separation_algebra,
}

props! { 100;
    composite_interface_ignores_witness => witness_independence,
    good_members_compose_to_good_member => good_congruence,
    extension_survives_recomposition => replacement,
    split_off_any_node => rule_decomp,
    good_graphs_compose => rule_grcomp,
    composite_in_composed_interface => rule_comp,
    abstraction_is_unique => rule_uniq,
    fresh_node_keeps_inflow => rule_addin,
    fresh_node_keeps_empty_flow_map => rule_addf,
    replacement_keeps_inflow => rule_replin,
    replacement_keeps_empty_flow_map => rule_replf,
    flow_map_targets_context => rule_step,
    extra_sources_only_at_infinite_flow => source_support,
}
