//! The classical AKR primal-dual algorithm over the undirected cut
//! relaxation: grow connected components that separate a pair, take edges
//! as they go tight, then delete edges in reverse order of inclusion.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::engine::{Engine, Rule};
use crate::model::{ArcSet, EdgeSet, Instance};
use crate::rational::{int, Rational};
use crate::result::{duals_from_moats, Algorithm, SolveError, SolveResult};
use crate::verify::check_feasible;

pub fn solve_akr(instance: &Instance) -> Result<SolveResult, SolveError> {
    if let Some(pair) = instance.first_disconnected_pair() {
        return Err(SolveError::Infeasible { pair });
    }
    let mut engine = Engine::undirected(instance);
    let summary = engine.run_phase(Rule::Akr)?;

    let order: Vec<usize> = summary.selected.iter().map(|s| s.arc).collect();
    let mut kept: EdgeSet = order.iter().copied().collect();
    for &e in order.iter().rev() {
        kept.remove(e);
        if !check_feasible(&kept, instance) {
            kept.insert(e);
        }
    }

    let (moats, _, selection, trace, _) = engine.into_parts();
    let duals = duals_from_moats(instance, &moats);
    let dual_sum = duals.iter().fold(Rational::zero(), |acc, d| acc + &d.value);
    Ok(SolveResult {
        algorithm: Algorithm::Akr,
        f1: ArcSet::doubled(&kept),
        f2: ArcSet::new(),
        total_cost: instance.total_cost(&kept),
        f3_edges: kept,
        residual: ArcSet::new(),
        duals,
        dual_sum,
        max_active: summary.max_active,
        selection,
        reduction_pairs: Vec::new(),
        trace: Some(trace),
    })
}

/// `cost(F') <= (2 - 2/A) * sum(y)` with `A` the largest number of
/// simultaneously active components.
pub fn check_akr_bound(result: &SolveResult) -> bool {
    let a = result.max_active;
    if a == 0 {
        return result.total_cost.is_zero();
    }
    let factor = int(2) - Rational::new(BigInt::from(2), BigInt::from(a));
    result.total_cost <= factor * &result.dual_sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn single_edge_two_moats_meet_halfway() {
        let inst = Instance::new(2, vec![(0, 1, int(1))], vec![(0, 1)]).unwrap();
        let r = solve_akr(&inst).unwrap();
        assert_eq!(r.f3_edges.to_vec(), vec![0]);
        assert_eq!(r.total_cost, int(1));
        assert_eq!(r.dual_sum, int(1));
        assert_eq!(r.duals.len(), 2);
        assert!(r.duals.iter().all(|d| d.value == ratio(1, 2)));
        assert_eq!(r.max_active, 2);
        assert!(check_akr_bound(&r));
    }

    #[test]
    fn disconnected_pair_reported() {
        let inst = Instance::new(4, vec![(0, 1, int(1))], vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(solve_akr(&inst).unwrap_err(), SolveError::Infeasible { pair: 1 });
    }

    #[test]
    fn reverse_delete_drops_dead_ends() {
        // Path 0-1-2 with a pendant Steiner edge 0-3 that goes tight first.
        let inst = Instance::new(
            4,
            vec![(0, 1, int(2)), (1, 2, int(2)), (0, 3, ratio(1, 2))],
            vec![(0, 2)],
        )
        .unwrap();
        let r = solve_akr(&inst).unwrap();
        assert_eq!(r.selection[0].arc, 1);
        assert_eq!(r.f3_edges.to_vec(), vec![0, 2]);
        assert_eq!(r.total_cost, int(4));
    }
}
