//! Synchronized dual growth.
//!
//! The engine grows every active minimal violated set at unit rate, charges
//! the growth to the arcs leaving each set, and selects arcs as they become
//! tight. Both solvers drive it: AKR over undirected edges with connected
//! components as moats, the bidirected algorithm over arcs with forward
//! (s-phase) or backward-seeded (t-phase) reachability closures as moats.
//!
//! Under the [`Rule::Akr`] rule each "arc" of the engine is an undirected
//! edge with its full cost, and a moat crosses it when exactly one endpoint
//! lies inside.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{bidirect, ArcId, ArcSet, Instance, Vertex};
use crate::rational::{self, Rational};

pub type MoatId = usize;

/// Which violated sets a phase grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Forward closures of `s_i` that miss `t_i`.
    SPhase,
    /// Forward closures of `t_i` that miss `s_i`.
    TPhase,
    /// Connected components separating a pair.
    Akr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Akr,
    Phase1,
    Phase2,
}

impl Rule {
    pub fn phase(self) -> Phase {
        match self {
            Rule::SPhase => Phase::Phase1,
            Rule::TPhase => Phase::Phase2,
            Rule::Akr => Phase::Akr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("{phase:?}: active moats {moats:?} have no outgoing arc; some pair is disconnected")]
    Stuck { phase: Phase, moats: Vec<Vec<Vertex>> },
    #[error("arc {arc} would be covered beyond its cost")]
    Overshoot { arc: ArcId },
}

/// A dual variable `y_S`. Its vertex set never changes: when a closure
/// grows, a new moat takes over and the old one keeps its value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Moat {
    pub id: MoatId,
    pub vertices: Vec<Vertex>,
    #[serde(with = "rational::pq")]
    pub value: Rational,
    /// Pair indices whose seed terminal generated this set.
    pub origins: Vec<usize>,
    pub phase: Phase,
    pub active: bool,
}

/// A stretch of time during which a fixed group of moats grew on an arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageInterval {
    pub phase: Phase,
    #[serde(with = "rational::pq")]
    pub start: Rational,
    #[serde(with = "rational::pq")]
    pub end: Rational,
    pub moats: Vec<MoatId>,
}

impl CoverageInterval {
    pub fn charged(&self) -> Rational {
        (&self.end - &self.start) * Rational::from_integer(self.moats.len().into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArcCoverage {
    #[serde(with = "rational::pq")]
    pub covered: Rational,
    pub growing_moats: Vec<MoatId>,
    pub intervals: Vec<CoverageInterval>,
}

/// An arc as the engine sees it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub tail: Vertex,
    pub head: Vertex,
    pub cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedArc {
    pub arc: ArcId,
    /// Global inclusion order across phases, starting at 1.
    pub seq: usize,
    #[serde(with = "rational::pq")]
    pub time: Rational,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoatView {
    pub vertices: Vec<Vertex>,
    pub origins: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventKind {
    ArcTight {
        arc: ArcId,
        tail: Vertex,
        head: Vertex,
        seq: usize,
    },
    MoatsRecomputed {
        active: Vec<MoatView>,
        /// Closures dropped because they strictly contain another candidate.
        inactive: Vec<Vec<Vertex>>,
    },
    MoatsMerged {
        vertices: Vec<Vertex>,
        origins: Vec<usize>,
    },
    PhaseBoundary {
        phase: Phase,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub phase: Phase,
    #[serde(with = "rational::pq")]
    pub time: Rational,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventTrace {
    pub events: Vec<Event>,
}

impl EventTrace {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }
}

/// Earliest clock reading at which an active moat of a phase held a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VertexTimestamps {
    per_phase: HashMap<Phase, Vec<Option<Rational>>>,
}

impl VertexTimestamps {
    pub fn get(&self, phase: Phase, v: Vertex) -> Option<&Rational> {
        self.per_phase.get(&phase)?.get(v)?.as_ref()
    }

    fn record(&mut self, phase: Phase, n: usize, v: Vertex, time: &Rational) {
        let slots = self.per_phase.entry(phase).or_insert_with(|| vec![None; n]);
        if slots[v].is_none() {
            slots[v] = Some(time.clone());
        }
    }

    pub fn set(&mut self, phase: Phase, n: usize, v: Vertex, time: Rational) {
        let slots = self.per_phase.entry(phase).or_insert_with(|| vec![None; n]);
        slots[v] = Some(time);
    }
}

/// A candidate violated set with the pairs that generated it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolatedSet {
    pub vertices: Vec<Vertex>,
    pub origins: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MinimalViolatedSets {
    pub active: Vec<ViolatedSet>,
    pub inactive: Vec<ViolatedSet>,
}

fn reach(n: usize, out: &[Vec<Vertex>], from: Vertex) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
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

fn members(mask: &[bool]) -> Vec<Vertex> {
    mask.iter()
        .enumerate()
        .filter_map(|(v, &b)| b.then_some(v))
        .collect()
}

/// Computes the minimal violated sets for `rule` given the selected arcs.
///
/// `links` are the engine arcs (bidirected arcs, or undirected edges for
/// [`Rule::Akr`]) and `selected` indexes into them.
pub fn compute_minimal_violated_sets(
    instance: &Instance,
    links: &[Link],
    selected: &ArcSet,
    rule: Rule,
) -> MinimalViolatedSets {
    let n = instance.vertex_count();
    let mut out: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for id in selected.iter() {
        let l = &links[id];
        out[l.tail].push(l.head);
        if rule == Rule::Akr {
            out[l.head].push(l.tail);
        }
    }

    // Identical closures collapse into one candidate with several origins.
    let mut candidates: Vec<(Vec<Vertex>, BTreeSet<usize>)> = Vec::new();
    match rule {
        Rule::SPhase | Rule::TPhase => {
            for (i, p) in instance.pairs().iter().enumerate() {
                let (seed, partner) = if rule == Rule::SPhase { (p.s, p.t) } else { (p.t, p.s) };
                let closure = reach(n, &out, seed);
                if closure[partner] {
                    continue;
                }
                let set = members(&closure);
                match candidates.iter_mut().find(|(s, _)| *s == set) {
                    Some((_, origins)) => {
                        origins.insert(i);
                    }
                    None => candidates.push((set, BTreeSet::from([i]))),
                }
            }
        }
        Rule::Akr => {
            let mut label = vec![usize::MAX; n];
            for v in 0..n {
                if label[v] != usize::MAX {
                    continue;
                }
                let comp = reach(n, &out, v);
                for (x, &inside) in comp.iter().enumerate() {
                    if inside {
                        label[x] = v;
                    }
                }
                let origins: BTreeSet<usize> = instance
                    .pairs()
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| comp[p.s] != comp[p.t])
                    .filter(|(_, p)| comp[p.s] || comp[p.t])
                    .map(|(i, _)| i)
                    .collect();
                if !origins.is_empty() {
                    candidates.push((members(&comp), origins));
                }
            }
        }
    }

    // Smallest first; any candidate strictly containing another is dropped.
    candidates.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    let masks: Vec<Vec<bool>> = candidates
        .iter()
        .map(|(set, _)| {
            let mut m = vec![false; n];
            for &v in set {
                m[v] = true;
            }
            m
        })
        .collect();
    let mut is_active = vec![true; candidates.len()];
    for (i, (small, _)) in candidates.iter().enumerate() {
        for (j, (big, _)) in candidates.iter().enumerate() {
            if i != j && big.len() > small.len() && small.iter().all(|&v| masks[j][v]) {
                is_active[j] = false;
            }
        }
    }

    let mut result = MinimalViolatedSets::default();
    for ((vertices, origins), keep) in candidates.into_iter().zip(is_active) {
        let set = ViolatedSet {
            vertices,
            origins: origins.into_iter().collect(),
        };
        if keep {
            result.active.push(set);
        } else {
            result.inactive.push(set);
        }
    }
    result.active.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    result.inactive.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    result
}

/// Result of one call to [`Engine::run_phase`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSummary {
    pub phase: Phase,
    pub selected: Vec<SelectedArc>,
    pub end_time: Rational,
    pub max_active: usize,
}

/// Mutable state of a dual-growth run.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    instance: &'a Instance,
    links: Vec<Link>,
    undirected: bool,
    coverage: Vec<ArcCoverage>,
    moats: Vec<Moat>,
    moat_index: HashMap<(Phase, Vec<Vertex>), MoatId>,
    active: Vec<MoatId>,
    active_masks: Vec<Vec<bool>>,
    selected: ArcSet,
    selection: Vec<SelectedArc>,
    trace: EventTrace,
    timestamps: VertexTimestamps,
    phase: Phase,
    clock: Rational,
    last_groups: Vec<Vec<usize>>,
    last_views: Option<Vec<MoatView>>,
    max_active: usize,
}

impl<'a> Engine<'a> {
    /// Engine over the bidirected arcs of `instance` (arc cost = half the
    /// edge cost).
    pub fn bidirected(instance: &'a Instance) -> Self {
        let links = bidirect(instance)
            .into_iter()
            .map(|a| Link {
                tail: a.tail,
                head: a.head,
                cost: a.cost,
            })
            .collect();
        Self::with_links(instance, links, false)
    }

    /// Engine over the undirected edges of `instance` at full cost.
    pub fn undirected(instance: &'a Instance) -> Self {
        let links = instance
            .edges()
            .iter()
            .map(|e| Link {
                tail: e.u,
                head: e.v,
                cost: e.cost.clone(),
            })
            .collect();
        Self::with_links(instance, links, true)
    }

    fn with_links(instance: &'a Instance, links: Vec<Link>, undirected: bool) -> Self {
        let coverage = vec![ArcCoverage::default(); links.len()];
        Self {
            instance,
            links,
            undirected,
            coverage,
            moats: Vec::new(),
            moat_index: HashMap::new(),
            active: Vec::new(),
            active_masks: Vec::new(),
            selected: ArcSet::new(),
            selection: Vec::new(),
            trace: EventTrace::default(),
            timestamps: VertexTimestamps::default(),
            phase: Phase::Akr,
            clock: Rational::zero(),
            last_groups: Vec::new(),
            last_views: None,
            max_active: 0,
        }
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn coverage(&self) -> &[ArcCoverage] {
        &self.coverage
    }

    pub fn moats(&self) -> &[Moat] {
        &self.moats
    }

    pub fn active_moats(&self) -> impl Iterator<Item = &Moat> {
        self.active.iter().map(|&id| &self.moats[id])
    }

    pub fn selected(&self) -> &ArcSet {
        &self.selected
    }

    pub fn selection(&self) -> &[SelectedArc] {
        &self.selection
    }

    pub fn trace(&self) -> &EventTrace {
        &self.trace
    }

    pub fn timestamps(&self) -> &VertexTimestamps {
        &self.timestamps
    }

    pub fn clock(&self) -> &Rational {
        &self.clock
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn into_parts(self) -> (Vec<Moat>, Vec<ArcCoverage>, Vec<SelectedArc>, EventTrace, VertexTimestamps) {
        (self.moats, self.coverage, self.selection, self.trace, self.timestamps)
    }

    fn crossings(&self, id: ArcId) -> impl Iterator<Item = MoatId> + '_ {
        let l = &self.links[id];
        self.active
            .iter()
            .zip(&self.active_masks)
            .filter(move |(_, m)| {
                if self.undirected {
                    m[l.tail] != m[l.head]
                } else {
                    m[l.tail] && !m[l.head]
                }
            })
            .map(|(&id, _)| id)
    }

    fn push(&mut self, kind: EventKind) {
        self.trace.events.push(Event {
            phase: self.phase,
            time: self.clock.clone(),
            kind,
        });
    }

    /// Starts a new phase: the clock restarts at zero, coverage and
    /// selected arcs carry over.
    pub fn begin_phase(&mut self, rule: Rule) {
        self.phase = rule.phase();
        self.clock = Rational::zero();
        self.last_groups.clear();
        self.last_views = None;
        for id in self.active.drain(..) {
            self.moats[id].active = false;
        }
        self.active_masks.clear();
        self.push(EventKind::PhaseBoundary { phase: self.phase });
    }

    /// Recomputes the active moats from the current selection and returns
    /// how many there are.
    pub fn recompute(&mut self, rule: Rule) -> usize {
        let n = self.instance.vertex_count();
        let sets = compute_minimal_violated_sets(self.instance, &self.links, &self.selected, rule);

        let mut groups: Vec<Vec<usize>> = sets
            .active
            .iter()
            .chain(&sets.inactive)
            .map(|s| s.origins.clone())
            .collect();
        groups.sort();
        let merged: Vec<&ViolatedSet> = sets
            .active
            .iter()
            .filter(|s| s.origins.len() >= 2 && !self.last_groups.contains(&s.origins))
            .collect();
        let merged: Vec<ViolatedSet> = merged.into_iter().cloned().collect();

        for id in self.active.drain(..) {
            self.moats[id].active = false;
        }
        self.active_masks.clear();
        for set in &sets.active {
            let key = (self.phase, set.vertices.clone());
            let id = match self.moat_index.get(&key) {
                Some(&id) => id,
                None => {
                    let id = self.moats.len();
                    self.moats.push(Moat {
                        id,
                        vertices: set.vertices.clone(),
                        value: Rational::zero(),
                        origins: Vec::new(),
                        phase: self.phase,
                        active: false,
                    });
                    self.moat_index.insert(key, id);
                    id
                }
            };
            let moat = &mut self.moats[id];
            moat.active = true;
            for &o in &set.origins {
                if !moat.origins.contains(&o) {
                    moat.origins.push(o);
                }
            }
            moat.origins.sort_unstable();
            let mut mask = vec![false; n];
            for &v in &set.vertices {
                mask[v] = true;
                self.timestamps.record(self.phase, n, v, &self.clock);
            }
            self.active.push(id);
            self.active_masks.push(mask);
        }
        self.max_active = self.max_active.max(self.active.len());

        for m in merged {
            self.push(EventKind::MoatsMerged {
                vertices: m.vertices,
                origins: m.origins,
            });
        }
        let views: Vec<MoatView> = sets
            .active
            .iter()
            .map(|s| MoatView {
                vertices: s.vertices.clone(),
                origins: s.origins.clone(),
            })
            .collect();
        let inactive: Vec<Vec<Vertex>> = sets.inactive.iter().map(|s| s.vertices.clone()).collect();
        if self.last_views.as_ref() != Some(&views) {
            self.push(EventKind::MoatsRecomputed {
                active: views.clone(),
                inactive,
            });
            self.last_views = Some(views);
        }
        self.last_groups = groups;
        self.active.len()
    }

    /// Time until the next arc becomes tight, with every arc reaching
    /// tightness at that instant (ascending index).
    pub fn next_event(&self) -> Result<(Rational, Vec<ArcId>), EngineError> {
        let mut best: Option<Rational> = None;
        let mut tight = Vec::new();
        for id in 0..self.links.len() {
            if self.selected.contains(id) {
                continue;
            }
            let d = self.crossings(id).count();
            if d == 0 {
                continue;
            }
            let remaining = &self.links[id].cost - &self.coverage[id].covered;
            let t = remaining / Rational::from_integer(d.into());
            match &best {
                Some(b) if t > *b => {}
                Some(b) if t == *b => tight.push(id),
                _ => {
                    best = Some(t);
                    tight = vec![id];
                }
            }
        }
        match best {
            Some(delta) => Ok((delta, tight)),
            None => Err(EngineError::Stuck {
                phase: self.phase,
                moats: self.active_moats().map(|m| m.vertices.clone()).collect(),
            }),
        }
    }

    /// Grows every active moat by `delta`.
    pub fn advance(&mut self, delta: &Rational) -> Result<(), EngineError> {
        assert!(!delta.is_negative(), "negative time step");
        let mut charges = Vec::new();
        for id in 0..self.links.len() {
            if self.selected.contains(id) {
                continue;
            }
            let growing: Vec<MoatId> = self.crossings(id).collect();
            if growing.is_empty() {
                continue;
            }
            let add = delta * Rational::from_integer(growing.len().into());
            if &self.coverage[id].covered + &add > self.links[id].cost {
                return Err(EngineError::Overshoot { arc: id });
            }
            charges.push((id, growing, add));
        }
        if delta.is_zero() {
            return Ok(());
        }
        let end = &self.clock + delta;
        for (id, growing, add) in charges {
            let cov = &mut self.coverage[id];
            cov.covered += add;
            match cov.intervals.last_mut() {
                Some(last) if last.phase == self.phase && last.end == self.clock && last.moats == growing => {
                    last.end = end.clone();
                }
                _ => cov.intervals.push(CoverageInterval {
                    phase: self.phase,
                    start: self.clock.clone(),
                    end: end.clone(),
                    moats: growing.clone(),
                }),
            }
            cov.growing_moats = growing;
        }
        for &id in &self.active {
            self.moats[id].value += delta;
        }
        self.clock = end;
        Ok(())
    }

    fn include(&mut self, id: ArcId) {
        self.selected.insert(id);
        self.coverage[id].growing_moats.clear();
        let seq = self.selection.len() + 1;
        self.selection.push(SelectedArc {
            arc: id,
            seq,
            time: self.clock.clone(),
            phase: self.phase,
        });
        let l = &self.links[id];
        let (tail, head) = (l.tail, l.head);
        if self.active_masks.iter().any(|mask| mask[tail]) {
            self.stamp_reachable(head);
        }
        self.push(EventKind::ArcTight { arc: id, tail, head, seq });
    }

    /// Timestamps everything the selected links reach from `from`: a tight
    /// arc extends the dual at its tail to these vertices at this instant,
    /// even if that closure stops being violated right away.
    fn stamp_reachable(&mut self, from: Vertex) {
        let n = self.instance.vertex_count();
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            self.timestamps.record(self.phase, n, x, &self.clock);
            for id in self.selected.iter() {
                let l = &self.links[id];
                let next = if l.tail == x {
                    Some(l.head)
                } else if self.undirected && l.head == x {
                    Some(l.tail)
                } else {
                    None
                };
                if let Some(y) = next.filter(|&y| !seen[y]) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }

    /// Runs one augmentation phase to completion: grow, select the
    /// lowest-index tight arc, recompute, repeat until no violated set is
    /// left.
    pub fn run_phase(&mut self, rule: Rule) -> Result<PhaseSummary, EngineError> {
        self.begin_phase(rule);
        let first = self.selection.len();
        let mut max_active = 0;
        loop {
            let active = self.recompute(rule);
            max_active = max_active.max(active);
            if active == 0 {
                break;
            }
            let (delta, tight) = self.next_event()?;
            self.advance(&delta)?;
            self.include(tight[0]);
        }
        Ok(PhaseSummary {
            phase: self.phase,
            selected: self.selection[first..].to_vec(),
            end_time: self.clock.clone(),
            max_active,
        })
    }

    /// Per-arc sum of duals whose set the arc leaves (or crosses, for the
    /// undirected rule), over every moat ever grown.
    pub fn load(&self, id: ArcId) -> Rational {
        let l = &self.links[id];
        self.moats
            .iter()
            .filter(|m| {
                let tin = m.vertices.binary_search(&l.tail).is_ok();
                let hin = m.vertices.binary_search(&l.head).is_ok();
                if self.undirected {
                    tin != hin
                } else {
                    tin && !hin
                }
            })
            .map(|m| &m.value)
            .sum()
    }
}
