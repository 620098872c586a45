use sfpd::engine::{EventKind, Phase};
use sfpd::instances::{fig1_candidate, fig4_costs, validate_fig1};
use sfpd::rational::{int, ratio};
use sfpd::verify::check_result;
use sfpd::{
    brute_force_opt, emit_instance, gen_fig1, gen_fig2_merging, gen_fig4, gen_fig5, parse_instance, solve_akr,
    solve_bpd, GenError,
};

fn eps() -> sfpd::Rational {
    ratio(1, 100)
}

#[test]
fn fig5_costs_for_small_k() {
    for k in [2i64, 3, 5] {
        let inst = gen_fig5(k as usize, &eps()).unwrap();
        assert_eq!(inst.vertex_count(), 2 * k as usize);
        let bpd = solve_bpd(&inst).unwrap();
        assert_eq!(bpd.total_cost, int(2 * k - 1), "k = {k}");
        let (opt, _) = brute_force_opt(&inst).unwrap();
        assert_eq!(opt, int(k - 1) * ratio(101, 100) + int(1), "k = {k}");
        assert!(check_result(&inst, &bpd, Some(&opt)).is_empty());
    }
}

#[test]
fn fig5_classical_algorithm_also_takes_the_star() {
    for k in [2i64, 3, 5] {
        let inst = gen_fig5(k as usize, &eps()).unwrap();
        assert_eq!(solve_akr(&inst).unwrap().total_cost, int(2 * k - 1));
    }
}

#[test]
fn fig4_costs_for_small_k() {
    for k in [2usize, 3, 5] {
        let inst = gen_fig4(k, &eps()).unwrap();
        let (akr, bpd, opt) = fig4_costs(k, &eps());
        assert_eq!(solve_akr(&inst).unwrap().total_cost, akr);
        assert_eq!(solve_bpd(&inst).unwrap().total_cost, bpd);
        assert_eq!(brute_force_opt(&inst).unwrap().0, opt);
    }
    assert_eq!(fig4_costs(3, &eps()).0, ratio(99, 20));
}

#[test]
fn figure_generators_reject_bad_parameters() {
    assert!(matches!(gen_fig5(1, &eps()), Err(GenError::InvalidParameters(_))));
    assert!(matches!(gen_fig4(3, &int(1)), Err(GenError::InvalidParameters(_))));
    assert!(matches!(gen_fig1(&ratio(1, 2)), Err(GenError::InvalidParameters(_))));
    assert!(matches!(gen_fig1(&int(0)), Err(GenError::InvalidParameters(_))));
}

#[test]
fn figure_instances_round_trip() {
    for inst in [
        gen_fig5(3, &eps()).unwrap(),
        gen_fig4(3, &eps()).unwrap(),
        gen_fig2_merging(),
        fig1_candidate(&eps()).unwrap(),
    ] {
        let text = emit_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
    }
}

#[test]
fn fig1_generator_agrees_with_its_validation() {
    let candidate = fig1_candidate(&eps()).unwrap();
    match (gen_fig1(&eps()), validate_fig1(&candidate, &eps())) {
        (Ok(inst), Ok(())) => assert_eq!(inst, candidate),
        (Err(GenError::ReconstructionInvalid(a)), Err(GenError::ReconstructionInvalid(b))) => assert_eq!(a, b),
        (got, checked) => panic!("generator {got:?} disagrees with validation {checked:?}"),
    }
}

#[test]
fn fig2_trace_deactivates_then_merges() {
    let inst = gen_fig2_merging();
    let result = solve_bpd(&inst).unwrap();
    let trace = result.trace.unwrap();
    let phase1: Vec<&EventKind> = trace
        .events
        .iter()
        .filter(|e| e.phase == Phase::Phase1)
        .map(|e| &e.kind)
        .collect();
    let superset = phase1
        .iter()
        .position(|k| matches!(k, EventKind::MoatsRecomputed { active, inactive }
            if inactive.contains(&vec![0, 1, 2, 3])
                && active.len() == 1
                && active[0].vertices == vec![0, 2, 3]))
        .expect("superset closure dropped while {s2, v1, v2} stays active");
    let merge = phase1
        .iter()
        .position(|k| matches!(k, EventKind::MoatsMerged { vertices, .. } if *vertices == vec![0, 1, 2, 3]))
        .expect("merge into {s1, s2, v1, v2}");
    assert!(superset < merge);
    assert_eq!(solve_bpd(&inst).unwrap().trace, Some(trace));
}
