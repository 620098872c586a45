mod common;

use proptest::prelude::*;
use sfpd::engine::{Engine, Rule};
use sfpd::model::bidirect;
use sfpd::verify::{check_result, is_forest, is_minimal};
use sfpd::{
    brute_force_opt, check_dual_feasible, check_feasible, emit_instance, parse_instance, solve_akr, solve_bpd,
    solve_bpd_with, BpdOptions, Instance, Relaxation, SolveError, SolveResult,
};

use common::small_instance;

fn bpd(instance: &Instance) -> SolveResult {
    solve_bpd_with(instance, BpdOptions { mixed_phase_fallback: true }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn emit_then_parse_is_identity(instance in small_instance(7, 8, 3)) {
        let text = emit_instance(&instance);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &instance);
        prop_assert_eq!(emit_instance(&back), text);
    }

    #[test]
    fn bpd_passes_every_check(instance in small_instance(7, 8, 3)) {
        let result = bpd(&instance);
        let violations = check_result(&instance, &result, None);
        prop_assert!(violations.is_empty(), "{:?}", violations);
        prop_assert!(check_dual_feasible(&result.duals, &instance, Relaxation::Bcr));
        prop_assert!(check_feasible(&result.f3_edges, &instance));
        prop_assert!(is_forest(&result.f3_edges, &instance));
    }

    #[test]
    fn akr_passes_every_check(instance in small_instance(7, 8, 3)) {
        let result = solve_akr(&instance).unwrap();
        let violations = check_result(&instance, &result, None);
        prop_assert!(violations.is_empty(), "{:?}", violations);
        prop_assert!(check_dual_feasible(&result.duals, &instance, Relaxation::Ucr));
        prop_assert!(is_minimal(&result.f3_edges, &instance));
    }

    #[test]
    fn both_solvers_respect_the_optimum(instance in small_instance(6, 6, 3)) {
        let (opt, best) = brute_force_opt(&instance).unwrap();
        prop_assert!(check_feasible(&best, &instance));
        prop_assert_eq!(instance.total_cost(&best), opt.clone());
        for result in [solve_akr(&instance).unwrap(), bpd(&instance)] {
            prop_assert!(result.total_cost >= opt);
            prop_assert!(result.dual_sum <= opt);
            let violations = check_result(&instance, &result, Some(&opt));
            prop_assert!(violations.is_empty(), "{:?}", violations);
        }
    }

    #[test]
    fn engine_keeps_duals_feasible_and_selected_arcs_tight(instance in small_instance(7, 8, 3)) {
        let arcs = bidirect(&instance);
        let mut engine = Engine::bidirected(&instance);
        let first = engine.run_phase(Rule::SPhase).unwrap();
        let second = engine.run_phase(Rule::TPhase).unwrap();
        prop_assert!(first.max_active <= instance.k());
        prop_assert!(second.max_active <= instance.k());
        for (id, arc) in arcs.iter().enumerate() {
            prop_assert!(engine.load(id) <= arc.cost, "arc {} overloaded", id);
        }
        for sel in engine.selection() {
            let cost = &arcs[sel.arc].cost;
            prop_assert_eq!(&engine.load(sel.arc), cost);
            let charged = engine.coverage()[sel.arc]
                .intervals
                .iter()
                .fold(num_traits::Zero::zero(), |acc: sfpd::Rational, iv| acc + iv.charged());
            prop_assert_eq!(&charged, cost);
        }
    }

    #[test]
    fn strict_tau_only_rejects_mixed_phase_paths(instance in small_instance(7, 8, 3)) {
        match solve_bpd(&instance) {
            Ok(strict) => prop_assert_eq!(strict, bpd(&instance)),
            Err(e) => prop_assert!(matches!(e, SolveError::MixedPhases { .. }), "{}", e),
        }
    }

    #[test]
    fn solving_is_deterministic(instance in small_instance(7, 8, 3)) {
        prop_assert_eq!(bpd(&instance), bpd(&instance));
        prop_assert_eq!(solve_akr(&instance).unwrap(), solve_akr(&instance).unwrap());
    }
}
