//! The bidirected primal-dual algorithm.
//!
//! Four phases: grow closures of the `s_i` until every `s_i -> t_i` path
//! exists, grow closures of the `t_i` until every `t_i -> s_i` path exists,
//! reverse-delete against bidirectional reachability, then resolve the
//! one-way residual by doubling, for each pair of antiparallel disjoint
//! paths, the direction whose duals reached across it faster.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::Zero;

use crate::engine::{ArcCoverage, Engine, Phase, Rule, SelectedArc, VertexTimestamps};
use crate::model::{bidirect, Arc, ArcId, ArcSet, Instance, Vertex};
use crate::rational::{Extended, Rational};
use crate::result::{duals_from_moats, Algorithm, ReductionPair, SolveError, SolveResult};
use crate::verify::bidirectionally_feasible;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BpdOptions {
    /// Measure a path whose arcs come from both phases by summing the
    /// coverage time of its arcs instead of failing with `MixedPhases`.
    pub mixed_phase_fallback: bool,
}

pub fn solve_bpd(instance: &Instance) -> Result<SolveResult, SolveError> {
    solve_bpd_with(instance, BpdOptions::default())
}

pub fn solve_bpd_with(instance: &Instance, options: BpdOptions) -> Result<SolveResult, SolveError> {
    if let Some(pair) = instance.first_disconnected_pair() {
        return Err(SolveError::Infeasible { pair });
    }
    let arcs = bidirect(instance);
    let mut engine = Engine::bidirected(instance);
    let first = engine.run_phase(Rule::SPhase)?;
    let second = engine.run_phase(Rule::TPhase)?;
    let (moats, coverage, selection, trace, timestamps) = engine.into_parts();

    let (f1, residual) = prune(&selection, instance);
    let candidates = find_reduction_pairs(&residual, &f1, instance)?;
    let ctx = TauContext {
        arcs: &arcs,
        selection: &selection,
        timestamps: &timestamps,
        coverage: &coverage,
        fallback: options.mixed_phase_fallback,
    };
    let (f2, reduction_pairs) = reduce(candidates, &f1, &ctx)?;

    let f3 = f1.union(&f2);
    let f3_edges = f3.induced_edges();
    let duals = duals_from_moats(instance, &moats);
    let dual_sum = duals.iter().fold(Rational::zero(), |acc, d| acc + &d.value);
    Ok(SolveResult {
        algorithm: Algorithm::Bpd,
        f1,
        f2,
        total_cost: instance.total_cost(&f3_edges),
        f3_edges,
        residual,
        duals,
        dual_sum,
        max_active: first.max_active.max(second.max_active),
        selection,
        reduction_pairs,
        trace: Some(trace),
    })
}

/// Reverse-delete over the selected arcs. An arc is dropped when every pair
/// keeps a directed path in both directions without it. Returns the arcs
/// kept in both directions and the one-way residual.
pub fn prune(selection: &[SelectedArc], instance: &Instance) -> (ArcSet, ArcSet) {
    let mut kept: ArcSet = selection.iter().map(|s| s.arc).collect();
    let mut order: Vec<&SelectedArc> = selection.iter().collect();
    order.sort_by_key(|s| s.seq);
    for s in order.iter().rev() {
        kept.remove(s.arc);
        if !bidirectionally_feasible(&kept, instance) {
            kept.insert(s.arc);
        }
    }
    let f1: ArcSet = kept
        .iter()
        .filter(|&a| kept.contains(Arc::reverse_id(a)))
        .collect();
    let residual = kept.difference(&f1);
    (f1, residual)
}

/// Endpoints and paths of one reduction candidate, before tau is measured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePair {
    pub s: Vertex,
    pub t: Vertex,
    pub path_s: Vec<ArcId>,
    pub path_t: Vec<ArcId>,
}

fn phase_map(selection: &[SelectedArc]) -> HashMap<ArcId, Phase> {
    selection.iter().map(|s| (s.arc, s.phase)).collect()
}

/// Every pair of eligible endpoints (touching an `F1` edge, or a terminal)
/// joined inside the residual by internally node-disjoint antiparallel
/// paths.
///
/// Pairs whose paths avoid other eligible vertices come first, so the
/// common case (one pair per residual component) is handled before pairs
/// spanning several of them, which only matter when the residual holds a
/// directed cycle through three or more eligible vertices. Without
/// selection phases at hand the `s` side of each pair is its lower numbered
/// endpoint; [`reduce`] reorients pairs whose paths came from opposite
/// phases. Fails with `MalformedResidual` if some residual arc lies on no
/// candidate path.
pub fn find_reduction_pairs(
    residual: &ArcSet,
    f1: &ArcSet,
    instance: &Instance,
) -> Result<Vec<CandidatePair>, SolveError> {
    if residual.is_empty() {
        return Ok(Vec::new());
    }
    let arcs = bidirect(instance);
    let n = instance.vertex_count();
    let mut touches_f1 = vec![false; n];
    for a in f1.iter() {
        touches_f1[arcs[a].tail] = true;
        touches_f1[arcs[a].head] = true;
    }
    let mut in_residual = vec![false; n];
    for a in residual.iter() {
        in_residual[arcs[a].tail] = true;
        in_residual[arcs[a].head] = true;
    }
    let endpoint: Vec<bool> = (0..n)
        .map(|v| in_residual[v] && (touches_f1[v] || instance.is_terminal(v)))
        .collect();

    let mut out: Vec<Vec<(Vertex, ArcId)>> = vec![Vec::new(); n];
    for a in residual.iter() {
        out[arcs[a].tail].push((arcs[a].head, a));
    }

    let ends: Vec<Vertex> = (0..n).filter(|&v| endpoint[v]).collect();
    let mut found = Vec::new();
    for (i, &u) in ends.iter().enumerate() {
        for &v in &ends[i + 1..] {
            let Some(there) = inner_path(&out, u, v, |_| false) else {
                continue;
            };
            let mut inner = vec![false; n];
            for &a in &there[..there.len() - 1] {
                inner[arcs[a].head] = true;
            }
            let Some(back) = inner_path(&out, v, u, |x| inner[x]) else {
                continue;
            };
            let spanned = there
                .iter()
                .chain(&back)
                .filter(|&&a| arcs[a].head != u && arcs[a].head != v && endpoint[arcs[a].head])
                .count();
            found.push((
                spanned,
                CandidatePair {
                    s: u,
                    t: v,
                    path_s: there,
                    path_t: back,
                },
            ));
        }
    }
    found.sort_by_key(|(spanned, c)| (*spanned, c.s, c.t));
    let pairs: Vec<CandidatePair> = found.into_iter().map(|(_, c)| c).collect();
    let covered: BTreeSet<ArcId> = pairs.iter().flat_map(|c| c.path_s.iter().chain(&c.path_t)).copied().collect();
    let leftover: Vec<ArcId> = residual.iter().filter(|a| !covered.contains(a)).collect();
    if !leftover.is_empty() {
        return Err(SolveError::MalformedResidual { arcs: leftover });
    }
    Ok(pairs)
}

/// Shortest (then lowest arc index) directed path `from -> to` whose
/// internal vertices pass `!blocked`.
fn inner_path(
    out: &[Vec<(Vertex, ArcId)>],
    from: Vertex,
    to: Vertex,
    blocked: impl Fn(Vertex) -> bool,
) -> Option<Vec<ArcId>> {
    let n = out.len();
    let mut via: Vec<Option<(Vertex, ArcId)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &(y, a) in &out[x] {
            if seen[y] {
                continue;
            }
            if y != to && blocked(y) {
                continue;
            }
            seen[y] = true;
            via[y] = Some((x, a));
            if y == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (prev, arc) = via[cur].expect("path back to source");
                    path.push(arc);
                    cur = prev;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(y);
        }
    }
    None
}

/// What tau needs from a finished augmentation run.
pub struct TauContext<'a> {
    pub arcs: &'a [Arc],
    pub selection: &'a [SelectedArc],
    pub timestamps: &'a VertexTimestamps,
    pub coverage: &'a [ArcCoverage],
    pub fallback: bool,
}

impl TauContext<'_> {
    fn phases(&self, path: &[ArcId]) -> BTreeSet<Phase> {
        let map = phase_map(self.selection);
        path.iter().filter_map(|a| map.get(a).copied()).collect()
    }
}

/// Time between the first dual of the path's phase containing its start
/// vertex and the first one containing its end vertex.
pub fn tau(path: &[ArcId], ctx: &TauContext<'_>) -> Result<Extended, SolveError> {
    let Some(&first) = path.first() else {
        return Ok(Extended::Finite(Rational::zero()));
    };
    let start = ctx.arcs[first].tail;
    let end = ctx.arcs[*path.last().unwrap()].head;
    let phases = ctx.phases(path);
    if phases.len() != 1 {
        if !ctx.fallback {
            return Err(SolveError::MixedPhases { path: path.to_vec() });
        }
        let total = path
            .iter()
            .flat_map(|&a| &ctx.coverage[a].intervals)
            .fold(Rational::zero(), |acc, iv| acc + (&iv.end - &iv.start));
        return Ok(Extended::Finite(total));
    }
    let phase = *phases.iter().next().unwrap();
    let (Some(from), Some(to)) = (ctx.timestamps.get(phase, start), ctx.timestamps.get(phase, end)) else {
        return Ok(Extended::Infinite);
    };
    Ok(Extended::Finite(to - from))
}

/// Measures both directions of every candidate and doubles the faster one
/// (the `s -> t` path on ties). Candidates are taken in order and skipped
/// once their endpoints are already joined by `F1` and the paths doubled so
/// far; only the pairs actually resolved are returned.
pub fn reduce(
    candidates: Vec<CandidatePair>,
    f1: &ArcSet,
    ctx: &TauContext<'_>,
) -> Result<(ArcSet, Vec<ReductionPair>), SolveError> {
    let n = ctx.arcs.iter().map(|a| a.tail.max(a.head) + 1).max().unwrap_or(0);
    let mut joined = Components::new(n);
    for a in f1.iter() {
        joined.union(ctx.arcs[a].tail, ctx.arcs[a].head);
    }
    let mut f2 = ArcSet::new();
    let mut pairs = Vec::with_capacity(candidates.len());
    for c in candidates {
        if joined.find(c.s) == joined.find(c.t) {
            continue;
        }
        let c = orient(c, ctx);
        let tau_s = tau(&c.path_s, ctx)?;
        let tau_t = tau(&c.path_t, ctx)?;
        if tau_s.is_infinite() && tau_t.is_infinite() {
            return Err(SolveError::BothInfinite { s: c.s, t: c.t });
        }
        let chose_s = tau_s <= tau_t;
        let chosen = if chose_s { &c.path_s } else { &c.path_t };
        for &a in chosen {
            f2.insert(a);
            f2.insert(Arc::reverse_id(a));
            joined.union(ctx.arcs[a].tail, ctx.arcs[a].head);
        }
        pairs.push(ReductionPair {
            s: c.s,
            t: c.t,
            path_s: c.path_s,
            path_t: c.path_t,
            tau_s,
            tau_t,
            chose_s,
        });
    }
    Ok((f2, pairs))
}

/// Union-find over vertices.
struct Components(Vec<usize>);

impl Components {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = v;
        while self.0[cur] != root {
            cur = std::mem::replace(&mut self.0[cur], root);
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a.max(b)] = a.min(b);
    }
}

/// Puts the path selected in the first phase on the `s` side when the two
/// paths come from different phases.
fn orient(c: CandidatePair, ctx: &TauContext<'_>) -> CandidatePair {
    let ps = ctx.phases(&c.path_s);
    let pt = ctx.phases(&c.path_t);
    if ps == BTreeSet::from([Phase::Phase2]) && pt == BTreeSet::from([Phase::Phase1]) {
        CandidatePair {
            s: c.t,
            t: c.s,
            path_s: c.path_t,
            path_t: c.path_s,
        }
    } else {
        c
    }
}
