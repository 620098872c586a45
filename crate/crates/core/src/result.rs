use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, EventTrace, Moat, Phase, SelectedArc};
use crate::model::{ArcId, ArcSet, EdgeSet, Instance, Vertex};
use crate::rational::{self, Extended, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Akr,
    Bpd,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Akr => "akr",
            Algorithm::Bpd => "bpd",
        })
    }
}

/// One dual variable with a positive value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dual {
    pub vertices: Vec<Vertex>,
    #[serde(with = "rational::pq")]
    pub value: Rational,
    pub phase: Phase,
    /// Seed terminal of the lowest-indexed originating pair.
    pub origin: Vertex,
}

/// A pair of internally disjoint antiparallel paths found in the one-way
/// residual, with the tau value of each direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionPair {
    pub s: Vertex,
    pub t: Vertex,
    /// Directed `s -> t`.
    pub path_s: Vec<ArcId>,
    /// Directed `t -> s`.
    pub path_t: Vec<ArcId>,
    #[serde(with = "rational::pq_ext")]
    pub tau_s: Extended,
    #[serde(with = "rational::pq_ext")]
    pub tau_t: Extended,
    /// `true` if `path_s` was doubled, `false` if `path_t` was.
    pub chose_s: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    /// Arcs kept in both directions (for AKR: both arcs of every kept edge).
    pub f1: ArcSet,
    /// Arcs added by the reduction phase, already doubled.
    pub f2: ArcSet,
    pub f3_edges: EdgeSet,
    /// One-way residual left by pruning (empty for AKR).
    pub residual: ArcSet,
    pub duals: Vec<Dual>,
    #[serde(with = "rational::pq")]
    pub total_cost: Rational,
    #[serde(with = "rational::pq")]
    pub dual_sum: Rational,
    /// Largest number of simultaneously active moats.
    pub max_active: usize,
    /// Every arc (or edge, for AKR) selected during augmentation, in order.
    pub selection: Vec<SelectedArc>,
    pub reduction_pairs: Vec<ReductionPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<EventTrace>,
}

impl SolveResult {
    pub fn selected_in(&self, phase: Phase) -> Vec<ArcId> {
        self.selection
            .iter()
            .filter(|s| s.phase == phase)
            .map(|s| s.arc)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("pair {pair} is disconnected in the input graph")]
    Infeasible { pair: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("one-way residual does not split into antiparallel disjoint paths; leftover arcs {arcs:?}")]
    MalformedResidual { arcs: Vec<ArcId> },
    #[error("path {path:?} mixes arcs from both augmentation phases")]
    MixedPhases { path: Vec<ArcId> },
    #[error("both directions between {s} and {t} have infinite tau")]
    BothInfinite { s: Vertex, t: Vertex },
}

pub(crate) fn duals_from_moats(instance: &Instance, moats: &[Moat]) -> Vec<Dual> {
    use num_traits::Zero;
    moats
        .iter()
        .filter(|m| !m.value.is_zero())
        .map(|m| {
            let p = instance.pairs()[m.origins[0]];
            let origin = match m.phase {
                Phase::Phase1 => p.s,
                Phase::Phase2 => p.t,
                Phase::Akr => {
                    if m.vertices.binary_search(&p.s).is_ok() {
                        p.s
                    } else {
                        p.t
                    }
                }
            };
            Dual {
                vertices: m.vertices.clone(),
                value: m.value.clone(),
                phase: m.phase,
                origin,
            }
        })
        .collect()
}
