//! Independent checks: feasibility, exact optimum by enumeration, dual
//! feasibility for both relaxations, solver invariants and ratio reports.
//!
//! Nothing here reuses the engine; every check recomputes from the instance
//! and the reported sets.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{bidirect, components, Arc, ArcSet, EdgeSet, Instance, Vertex};
use crate::rational::{self, guarantee, half, to_f64, to_pq, Rational};
use crate::result::{Algorithm, Dual, SolveResult};

pub const DEFAULT_ORACLE_BUDGET: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{m} edges exceed the enumeration budget of {budget}")]
    TooLarge { m: usize, budget: usize },
}

/// Every pair lies in one component of `(V, edges)`.
pub fn check_feasible(edges: &EdgeSet, instance: &Instance) -> bool {
    let comp = components(
        instance.vertex_count(),
        instance.edges().iter().map(|e| (e.u, e.v)),
        edges,
    );
    instance.pairs().iter().all(|p| comp[p.s] == comp[p.t])
}

fn reachable(n: usize, out: &[Vec<Vertex>], from: Vertex) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &y in &out[x] {
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Every pair has directed paths `s -> t` and `t -> s` using `arcs`.
pub fn bidirectionally_feasible(arcs: &ArcSet, instance: &Instance) -> bool {
    let n = instance.vertex_count();
    let mut out = vec![Vec::new(); n];
    for a in arcs.iter() {
        let e = instance.edge(Arc::edge_of(a));
        let (tail, head) = if a % 2 == 0 { (e.u, e.v) } else { (e.v, e.u) };
        out[tail].push(head);
    }
    instance.pairs().iter().all(|p| {
        reachable(n, &out, p.s)[p.t] && reachable(n, &out, p.t)[p.s]
    })
}

/// The edge set contains no cycle.
pub fn is_forest(edges: &EdgeSet, instance: &Instance) -> bool {
    let n = instance.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for id in edges.iter() {
        let e = instance.edge(id);
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// No single edge can be dropped while staying feasible.
pub fn is_minimal(edges: &EdgeSet, instance: &Instance) -> bool {
    edges.iter().all(|e| {
        let mut fewer = edges.clone();
        fewer.remove(e);
        !check_feasible(&fewer, instance)
    })
}

pub fn brute_force_opt(instance: &Instance) -> Result<(Rational, EdgeSet), OracleError> {
    brute_force_opt_with_budget(instance, DEFAULT_ORACLE_BUDGET)
}

/// Exact minimum-cost feasible edge set by exhaustive branch and bound over
/// edge subsets. Among optimal sets, returns the lexicographically smallest
/// sorted edge list.
pub fn brute_force_opt_with_budget(
    instance: &Instance,
    budget: usize,
) -> Result<(Rational, EdgeSet), OracleError> {
    let m = instance.edge_count();
    if m > budget {
        return Err(OracleError::TooLarge { m, budget });
    }
    struct Search<'a> {
        instance: &'a Instance,
        best: Option<(Rational, Vec<usize>)>,
    }
    impl Search<'_> {
        fn feasible(&self, chosen: &[usize], rest_from: Option<usize>) -> bool {
            let mut set: EdgeSet = chosen.iter().copied().collect();
            if let Some(from) = rest_from {
                for e in from..self.instance.edge_count() {
                    set.insert(e);
                }
            }
            check_feasible(&set, self.instance)
        }

        fn offer(&mut self, cost: &Rational, chosen: &[usize]) {
            let better = match &self.best {
                None => true,
                Some((c, set)) => cost < c || (cost == c && chosen < set.as_slice()),
            };
            if better {
                self.best = Some((cost.clone(), chosen.to_vec()));
            }
        }

        fn go(&mut self, idx: usize, chosen: &mut Vec<usize>, cost: Rational) {
            if self.feasible(chosen, None) {
                self.offer(&cost, chosen);
                return;
            }
            if let Some((best, _)) = &self.best {
                if cost >= *best {
                    return;
                }
            }
            if idx == self.instance.edge_count() || !self.feasible(chosen, Some(idx)) {
                return;
            }
            chosen.push(idx);
            let with = &cost + &self.instance.edge(idx).cost;
            self.go(idx + 1, chosen, with);
            chosen.pop();
            self.go(idx + 1, chosen, cost);
        }
    }
    let mut search = Search { instance, best: None };
    search.go(0, &mut Vec::new(), Rational::zero());
    let (cost, set) = search
        .best
        .expect("callers check connectivity; the full edge set is feasible");
    Ok((cost, set.into_iter().collect()))
}

/// Shortest-path distance between two vertices, `None` if disconnected.
pub fn shortest_path_cost(instance: &Instance, from: Vertex, to: Vertex) -> Option<Rational> {
    let adj = instance.adjacency();
    let mut dist: Vec<Option<Rational>> = vec![None; instance.vertex_count()];
    dist[from] = Some(Rational::zero());
    let mut heap = BinaryHeap::from([Reverse((Rational::zero(), from))]);
    while let Some(Reverse((d, x))) = heap.pop() {
        if dist[x].as_ref().is_some_and(|best| d > *best) {
            continue;
        }
        if x == to {
            return Some(d);
        }
        for &(y, e) in &adj[x] {
            let nd = &d + &instance.edge(e).cost;
            if dist[y].as_ref().is_none_or(|cur| nd < *cur) {
                dist[y] = Some(nd.clone());
                heap.push(Reverse((nd, y)));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relaxation {
    /// Undirected cut relaxation: per edge, duals crossing it sum to at
    /// most its cost.
    Ucr,
    /// Bidirected cut relaxation: per arc, duals it leaves sum to at most
    /// half the edge cost.
    Bcr,
}

fn contains(set: &[Vertex], v: Vertex) -> bool {
    set.binary_search(&v).is_ok()
}

fn separates_a_pair(set: &[Vertex], instance: &Instance) -> bool {
    instance
        .pairs()
        .iter()
        .any(|p| contains(set, p.s) != contains(set, p.t))
}

/// Sum of dual values over sets that arc `(tail, head)` leaves.
pub fn arc_load(duals: &[Dual], tail: Vertex, head: Vertex) -> Rational {
    duals
        .iter()
        .filter(|d| contains(&d.vertices, tail) && !contains(&d.vertices, head))
        .fold(Rational::zero(), |acc, d| acc + &d.value)
}

/// Checks every edge (UCR) or arc (BCR) constraint exactly, that values
/// are non-negative, and that each positive dual sits on a Steiner cut.
pub fn check_dual_feasible(duals: &[Dual], instance: &Instance, relaxation: Relaxation) -> bool {
    let mut sorted: Vec<Dual> = duals.to_vec();
    for d in &mut sorted {
        d.vertices.sort_unstable();
        d.vertices.dedup();
    }
    if sorted.iter().any(|d| d.value.is_negative()) {
        return false;
    }
    if sorted
        .iter()
        .any(|d| d.value.is_positive() && !separates_a_pair(&d.vertices, instance))
    {
        return false;
    }
    let h = half();
    instance.edges().iter().all(|e| match relaxation {
        Relaxation::Ucr => {
            arc_load(&sorted, e.u, e.v) + arc_load(&sorted, e.v, e.u) <= e.cost
        }
        Relaxation::Bcr => {
            let cap = &e.cost * &h;
            arc_load(&sorted, e.u, e.v) <= cap && arc_load(&sorted, e.v, e.u) <= cap
        }
    })
}

/// A named invariant that failed on a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub detail: String,
}

fn violation(check: &str, detail: impl Into<String>) -> Violation {
    Violation {
        check: check.to_string(),
        detail: detail.into(),
    }
}

/// `cost(F) <= (2 - 1/k) * sum(y)`.
pub fn guarantee_holds(result: &SolveResult, instance: &Instance) -> bool {
    result.total_cost <= guarantee(instance.k()) * &result.dual_sum
}

/// `1/2 * cost(F3) <= (2 - 1/k) * sum(y)`, with `F3` as undirected edges.
pub fn half_cost_bound_holds(result: &SolveResult, instance: &Instance) -> bool {
    &result.total_cost * half() <= guarantee(instance.k()) * &result.dual_sum
}

/// Re-derives every checkable property of a result from the instance alone.
/// `opt` enables the weak-duality check.
pub fn check_result(instance: &Instance, result: &SolveResult, opt: Option<&Rational>) -> Vec<Violation> {
    let mut out = Vec::new();
    let edges = &result.f3_edges;
    if !check_feasible(edges, instance) {
        out.push(violation("feasible", "solution misses a pair"));
    }
    let cost = instance.total_cost(edges);
    if cost != result.total_cost {
        out.push(violation(
            "cost",
            format!("reported {} but edges sum to {}", to_pq(&result.total_cost), to_pq(&cost)),
        ));
    }
    let sum = result.duals.iter().fold(Rational::zero(), |acc, d| acc + &d.value);
    if sum != result.dual_sum {
        out.push(violation("dual-sum", "reported dual sum differs from the listed duals"));
    }
    if !is_forest(edges, instance) {
        out.push(violation("acyclic", "solution edges contain a cycle"));
    }
    if let Some(opt) = opt {
        if result.dual_sum > *opt {
            out.push(violation(
                "weak-duality",
                format!("dual sum {} exceeds optimum {}", to_pq(&result.dual_sum), to_pq(opt)),
            ));
        }
        if result.total_cost < *opt {
            out.push(violation("optimum", "solution cheaper than the exact optimum"));
        }
    }
    match result.algorithm {
        Algorithm::Akr => {
            if !check_dual_feasible(&result.duals, instance, Relaxation::Ucr) {
                out.push(violation("ucr-dual", "duals violate an edge constraint"));
            }
            if !crate::akr::check_akr_bound(result) {
                out.push(violation("akr-bound", format!("A = {}", result.max_active)));
            }
            if !guarantee_holds(result, instance) {
                out.push(violation("guarantee", "cost exceeds (2 - 1/k) * sum(y)"));
            }
            if !is_minimal(edges, instance) {
                out.push(violation("minimal", "an edge of the pruned forest is removable"));
            }
        }
        Algorithm::Bpd => {
            if !check_dual_feasible(&result.duals, instance, Relaxation::Bcr) {
                out.push(violation("bcr-dual", "duals violate an arc constraint"));
            }
            if !check_dual_feasible(&result.duals, instance, Relaxation::Ucr) {
                out.push(violation("ucr-dual", "bcr duals fail the summed edge constraint"));
            }
            if !half_cost_bound_holds(result, instance) {
                out.push(violation("half-cost-bound", "1/2 cost exceeds (2 - 1/k) * sum(y)"));
            }
            let f3 = result.f1.union(&result.f2);
            if !bidirectionally_feasible(&f3, instance) {
                out.push(violation("bidirected", "F1 and F2 lack a directed path for a pair"));
            }
            let arcs = bidirect(instance);
            for a in result.f1.iter() {
                let arc = &arcs[a];
                if arc_load(&result.duals, arc.tail, arc.head) != arc.cost {
                    out.push(violation("f1-tight", format!("arc {a} is not tight")));
                }
            }
            for p in &result.reduction_pairs {
                let (mine, other) = if p.chose_s { (&p.tau_s, &p.tau_t) } else { (&p.tau_t, &p.tau_s) };
                if mine > other {
                    out.push(violation("reduction", format!("pair ({}, {}) kept the slower path", p.s, p.t)));
                }
            }
            if result.max_active > instance.k() {
                out.push(violation("moat-count", "more than k active moats"));
            }
        }
    }
    out
}

/// One algorithm's line in a comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: Algorithm,
    #[serde(with = "rational::pq")]
    pub cost: Rational,
    #[serde(with = "opt_pq")]
    pub ratio: Option<Rational>,
    #[serde(with = "rational::pq")]
    pub dual_sum: Rational,
    /// `(2 - 1/k) * sum(y)` minus the bounded cost (see [`bounded_cost`]).
    #[serde(with = "rational::pq")]
    pub slack: Rational,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioReport {
    pub k: usize,
    #[serde(with = "rational::pq")]
    pub guarantee: Rational,
    #[serde(with = "opt_pq")]
    pub opt: Option<Rational>,
    pub rows: Vec<ReportRow>,
    pub violations: Vec<Violation>,
}

mod opt_pq {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&to_pq(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| rational::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// The cost each algorithm's guarantee applies to: the full forest cost for
/// the classical algorithm, half of it for the bidirected one (whose duals
/// live on arcs of half the edge cost).
pub fn bounded_cost(result: &SolveResult) -> Rational {
    match result.algorithm {
        Algorithm::Bpd => &result.total_cost * half(),
        _ => result.total_cost.clone(),
    }
}

/// Where the reference optimum of a report comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptSource {
    Oracle { budget: usize },
    Given(Rational),
    Skip,
}

pub fn ratio_report(
    instance: &Instance,
    results: &[SolveResult],
    opt: OptSource,
) -> Result<RatioReport, OracleError> {
    let opt = match opt {
        OptSource::Oracle { budget } => Some(brute_force_opt_with_budget(instance, budget)?.0),
        OptSource::Given(r) => Some(r),
        OptSource::Skip => None,
    };
    let g = guarantee(instance.k());
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for r in results {
        let bound = &g * &r.dual_sum;
        let slack = &bound - bounded_cost(r);
        let bound_ok = !slack.is_negative();
        if !bound_ok {
            violations.push(violation(
                &format!("{}:guarantee", r.algorithm),
                format!("slack {}", to_pq(&slack)),
            ));
        }
        for v in check_result(instance, r, opt.as_ref()) {
            violations.push(violation(&format!("{}:{}", r.algorithm, v.check), v.detail));
        }
        rows.push(ReportRow {
            algorithm: r.algorithm,
            cost: r.total_cost.clone(),
            ratio: opt.as_ref().map(|o| &r.total_cost / o),
            dual_sum: r.dual_sum.clone(),
            slack,
            bound_ok,
        });
    }
    Ok(RatioReport {
        k: instance.k(),
        guarantee: g,
        opt,
        rows,
        violations,
    })
}

impl RatioReport {
    /// Aligned plain-text table; float columns are approximations of the
    /// exact `p/q` columns.
    pub fn to_table(&self) -> String {
        let header = ["algo", "cost", "ratio", "~ratio", "dual_sum", "slack", "bound"];
        let mut lines: Vec<[String; 7]> = vec![header.map(String::from)];
        for r in &self.rows {
            lines.push([
                r.algorithm.to_string(),
                to_pq(&r.cost),
                r.ratio.as_ref().map(to_pq).unwrap_or_else(|| "-".into()),
                r.ratio
                    .as_ref()
                    .map(|x| format!("{:.4}", to_f64(x)))
                    .unwrap_or_else(|| "-".into()),
                to_pq(&r.dual_sum),
                to_pq(&r.slack),
                if r.bound_ok { "ok" } else { "VIOLATED" }.into(),
            ]);
        }
        let widths: Vec<usize> = (0..7)
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let opt = self.opt.as_ref().map(to_pq).unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "k = {}  guarantee = {} (~{:.4})  opt = {}",
            self.k,
            to_pq(&self.guarantee),
            to_f64(&self.guarantee),
            opt
        )
        .unwrap();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        for v in &self.violations {
            writeln!(out, "violation {}: {}", v.check, v.detail).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Phase;
    use crate::rational::{int, ratio};

    fn path3() -> Instance {
        Instance::new(3, vec![(0, 1, int(1)), (1, 2, int(2))], vec![(0, 2)]).unwrap()
    }

    #[test]
    fn empty_edge_set_is_infeasible() {
        assert!(!check_feasible(&EdgeSet::new(), &path3()));
        let all: EdgeSet = [0, 1].into_iter().collect();
        assert!(check_feasible(&all, &path3()));
    }

    #[test]
    fn oracle_single_edge() {
        let inst = Instance::new(2, vec![(0, 1, int(1))], vec![(0, 1)]).unwrap();
        let (cost, edges) = brute_force_opt(&inst).unwrap();
        assert_eq!(cost, int(1));
        assert_eq!(edges.to_vec(), vec![0]);
    }

    #[test]
    fn oracle_prefers_lexicographically_smallest_tie() {
        // Two parallel routes of equal cost between 0 and 3.
        let inst = Instance::new(
            4,
            vec![(0, 1, int(1)), (1, 3, int(1)), (0, 2, int(1)), (2, 3, int(1))],
            vec![(0, 3)],
        )
        .unwrap();
        // Canonical order: (0,1)=0, (0,2)=1, (1,3)=2, (2,3)=3.
        let (cost, edges) = brute_force_opt(&inst).unwrap();
        assert_eq!(cost, int(2));
        assert_eq!(edges.to_vec(), vec![0, 2]);
    }

    #[test]
    fn oracle_budget_is_enforced() {
        let inst = path3();
        assert_eq!(
            brute_force_opt_with_budget(&inst, 1),
            Err(OracleError::TooLarge { m: 2, budget: 1 })
        );
    }

    #[test]
    fn zero_duals_are_feasible_for_both() {
        let inst = path3();
        let duals = vec![Dual {
            vertices: vec![0],
            value: Rational::zero(),
            phase: Phase::Phase1,
            origin: 0,
        }];
        assert!(check_dual_feasible(&duals, &inst, Relaxation::Ucr));
        assert!(check_dual_feasible(&duals, &inst, Relaxation::Bcr));
        assert!(check_dual_feasible(&[], &inst, Relaxation::Bcr));
    }

    #[test]
    fn bcr_is_tighter_per_arc_than_ucr_per_edge() {
        let inst = path3();
        // y_{0} = 3/4 fits the edge {0,1} of cost 1 but not its arc of cost 1/2.
        let duals = vec![Dual {
            vertices: vec![0],
            value: ratio(3, 4),
            phase: Phase::Phase1,
            origin: 0,
        }];
        assert!(check_dual_feasible(&duals, &inst, Relaxation::Ucr));
        assert!(!check_dual_feasible(&duals, &inst, Relaxation::Bcr));
    }

    #[test]
    fn dual_on_non_cut_is_rejected() {
        let inst = path3();
        let duals = vec![Dual {
            vertices: vec![1],
            value: ratio(1, 4),
            phase: Phase::Phase1,
            origin: 1,
        }];
        assert!(!check_dual_feasible(&duals, &inst, Relaxation::Ucr));
    }

    #[test]
    fn forest_and_minimality() {
        let inst = Instance::new(
            3,
            vec![(0, 1, int(1)), (1, 2, int(1)), (0, 2, int(1))],
            vec![(0, 2)],
        )
        .unwrap();
        let all: EdgeSet = [0, 1, 2].into_iter().collect();
        assert!(!is_forest(&all, &inst));
        assert!(!is_minimal(&all, &inst));
        let direct: EdgeSet = [1].into_iter().collect(); // (0,2)
        assert!(is_forest(&direct, &inst) && is_minimal(&direct, &inst));
    }

    #[test]
    fn shortest_path_matches_hand_count() {
        let inst = Instance::new(
            4,
            vec![(0, 1, ratio(1, 2)), (1, 3, ratio(1, 3)), (0, 3, int(1)), (2, 3, int(5))],
            vec![(0, 3)],
        )
        .unwrap();
        assert_eq!(shortest_path_cost(&inst, 0, 3), Some(ratio(5, 6)));
        assert_eq!(shortest_path_cost(&inst, 0, 2), Some(ratio(35, 6)));
    }
}
