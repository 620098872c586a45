//! Instances, bidirected arcs and the plain-text instance format.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, half, parse_rational, to_pq, Rational};

pub type Vertex = usize;
pub type EdgeId = usize;
pub type ArcId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("instance needs at least one vertex")]
    NoVertices,
    #[error("edge {index}: endpoint {vertex} out of range (n = {n})")]
    EdgeVertexOutOfRange { index: usize, vertex: Vertex, n: usize },
    #[error("edge {index}: self loop on vertex {vertex}")]
    SelfLoop { index: usize, vertex: Vertex },
    #[error("edge {index}: cost {cost} is not positive")]
    NonPositiveCost { index: usize, cost: String },
    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: Vertex, v: Vertex },
    #[error("pair {index}: terminal {vertex} out of range (n = {n})")]
    PairVertexOutOfRange { index: usize, vertex: Vertex, n: usize },
    #[error("pair {index}: s and t are both {vertex}")]
    DegeneratePair { index: usize, vertex: Vertex },
    #[error("instance has no terminal pairs")]
    NoPairs,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Undirected edge, stored with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    #[serde(with = "rational::pq")]
    pub cost: Rational,
}

impl Edge {
    pub fn other(&self, x: Vertex) -> Vertex {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A terminal pair `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub s: Vertex,
    pub t: Vertex,
}

/// A validated Steiner forest instance.
///
/// Edges are kept in canonical order (`u < v`, sorted by `(u, v)`), so edge
/// and arc indices, and with them every tie-break, depend only on the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    vertex_count: usize,
    edges: Vec<Edge>,
    pairs: Vec<Pair>,
}

impl Instance {
    pub fn new(
        vertex_count: usize,
        edges: Vec<(Vertex, Vertex, Rational)>,
        pairs: Vec<(Vertex, Vertex)>,
    ) -> Result<Self, ModelError> {
        if vertex_count == 0 {
            return Err(ModelError::NoVertices);
        }
        let mut canon = Vec::with_capacity(edges.len());
        let mut seen = HashSet::new();
        for (index, (a, b, cost)) in edges.into_iter().enumerate() {
            for x in [a, b] {
                if x >= vertex_count {
                    return Err(ModelError::EdgeVertexOutOfRange {
                        index,
                        vertex: x,
                        n: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(ModelError::SelfLoop { index, vertex: a });
            }
            if !cost.is_positive() {
                return Err(ModelError::NonPositiveCost {
                    index,
                    cost: to_pq(&cost),
                });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(ModelError::DuplicateEdge { u, v });
            }
            canon.push(Edge { u, v, cost });
        }
        canon.sort_by_key(|e| (e.u, e.v));

        if pairs.is_empty() {
            return Err(ModelError::NoPairs);
        }
        let mut out_pairs = Vec::with_capacity(pairs.len());
        for (index, (s, t)) in pairs.into_iter().enumerate() {
            for x in [s, t] {
                if x >= vertex_count {
                    return Err(ModelError::PairVertexOutOfRange {
                        index,
                        vertex: x,
                        n: vertex_count,
                    });
                }
            }
            if s == t {
                return Err(ModelError::DegeneratePair { index, vertex: s });
            }
            out_pairs.push(Pair { s, t });
        }
        Ok(Self {
            vertex_count,
            edges: canon,
            pairs: out_pairs,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    /// Number of terminal pairs, `k`.
    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_terminal(&self, v: Vertex) -> bool {
        self.pairs.iter().any(|p| p.s == v || p.t == v)
    }

    pub fn find_edge(&self, a: Vertex, b: Vertex) -> Option<EdgeId> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by_key(&key, |e| (e.u, e.v))
            .ok()
    }

    /// Adjacency lists of `(neighbor, edge id)`.
    pub fn adjacency(&self) -> Vec<Vec<(Vertex, EdgeId)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (id, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        adj
    }

    pub fn total_cost(&self, edges: &EdgeSet) -> Rational {
        edges.iter().map(|e| &self.edges[e].cost).sum()
    }

    /// Index of the first pair not connected in the full graph, if any.
    pub fn first_disconnected_pair(&self) -> Option<usize> {
        let all: EdgeSet = (0..self.edge_count()).collect();
        let comp = components(self.vertex_count, self.edges.iter().map(|e| (e.u, e.v)), &all);
        self.pairs.iter().position(|p| comp[p.s] != comp[p.t])
    }
}

/// Component labels of `(V, subset)`.
pub(crate) fn components<I>(n: usize, endpoints: I, subset: &EdgeSet) -> Vec<usize>
where
    I: Iterator<Item = (Vertex, Vertex)>,
{
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (id, (u, v)) in endpoints.enumerate() {
        if subset.contains(id) {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

/// One direction of an edge in the bidirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub tail: Vertex,
    pub head: Vertex,
    pub cost: Rational,
    pub edge: EdgeId,
    /// `true` for `u -> v` of the canonical edge (`u < v`).
    pub forward: bool,
}

impl Arc {
    pub fn reverse_id(id: ArcId) -> ArcId {
        id ^ 1
    }

    pub fn edge_of(id: ArcId) -> EdgeId {
        id / 2
    }
}

/// Replaces each edge by two antiparallel arcs of half its cost. Arc `2i`
/// is the forward arc of edge `i`, arc `2i + 1` the backward one.
pub fn bidirect(instance: &Instance) -> Vec<Arc> {
    let h = half();
    instance
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(id, e)| {
            let cost = &e.cost * &h;
            [
                Arc {
                    tail: e.u,
                    head: e.v,
                    cost: cost.clone(),
                    edge: id,
                    forward: true,
                },
                Arc {
                    tail: e.v,
                    head: e.u,
                    cost,
                    edge: id,
                    forward: false,
                },
            ]
        })
        .collect()
}

macro_rules! id_set {
    ($name:ident, $id:ty) => {
        #[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(BTreeSet<$id>);

        impl $name {
            pub fn new() -> Self {
                Self::default()
            }
            pub fn insert(&mut self, id: $id) -> bool {
                self.0.insert(id)
            }
            pub fn remove(&mut self, id: $id) -> bool {
                self.0.remove(&id)
            }
            pub fn contains(&self, id: $id) -> bool {
                self.0.contains(&id)
            }
            pub fn len(&self) -> usize {
                self.0.len()
            }
            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }
            pub fn iter(&self) -> impl Iterator<Item = $id> + '_ {
                self.0.iter().copied()
            }
            pub fn union(&self, other: &Self) -> Self {
                Self(self.0.union(&other.0).copied().collect())
            }
            pub fn difference(&self, other: &Self) -> Self {
                Self(self.0.difference(&other.0).copied().collect())
            }
            pub fn to_vec(&self) -> Vec<$id> {
                self.iter().collect()
            }
        }

        impl FromIterator<$id> for $name {
            fn from_iter<I: IntoIterator<Item = $id>>(iter: I) -> Self {
                Self(iter.into_iter().collect())
            }
        }
    };
}

id_set!(ArcSet, ArcId);
id_set!(EdgeSet, EdgeId);

impl ArcSet {
    /// Undirected edges with at least one arc in the set.
    pub fn induced_edges(&self) -> EdgeSet {
        self.iter().map(Arc::edge_of).collect()
    }

    /// Both arcs of every edge in `edges`.
    pub fn doubled(edges: &EdgeSet) -> ArcSet {
        edges.iter().flat_map(|e| [2 * e, 2 * e + 1]).collect()
    }
}

/// Parses the line-oriented instance format:
///
/// ```text
/// n <vertex_count>
/// e <u> <v> <cost>
/// p <s> <t>
/// ```
///
/// `#` starts a comment. Costs may be integers, `p/q` or finite decimals.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut n: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut seen = HashMap::new();
    let mut pairs = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| ParseError { line, message };
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_v = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("invalid vertex `{s}`")))
        };
        match fields[0] {
            "n" => {
                if fields.len() != 2 {
                    return Err(err("expected `n <vertex_count>`".into()));
                }
                if let Some((_, first)) = n {
                    return Err(err(format!("duplicate `n` record (first on line {first})")));
                }
                if !edges.is_empty() || !pairs.is_empty() {
                    return Err(err("`n` must precede edge and pair records".into()));
                }
                let count = fields[1]
                    .parse::<usize>()
                    .map_err(|_| err(format!("invalid vertex count `{}`", fields[1])))?;
                if count == 0 {
                    return Err(err("vertex count must be positive".into()));
                }
                n = Some((count, line));
            }
            "e" => {
                if fields.len() != 4 {
                    return Err(err("expected `e <u> <v> <cost>`".into()));
                }
                let (count, _) = n.ok_or_else(|| err("edge before `n` record".into()))?;
                let u = parse_v(fields[1])?;
                let v = parse_v(fields[2])?;
                for x in [u, v] {
                    if x >= count {
                        return Err(err(format!("vertex {x} out of range (n = {count})")));
                    }
                }
                if u == v {
                    return Err(err(format!("self loop on vertex {u}")));
                }
                if let Some(first) = seen.insert((u.min(v), u.max(v)), line) {
                    return Err(err(format!("duplicate edge {{{u}, {v}}} (first on line {first})")));
                }
                let cost = parse_rational(fields[3]).map_err(|e| err(e.to_string()))?;
                if !cost.is_positive() {
                    return Err(err(format!("non-positive cost {}", fields[3])));
                }
                edges.push((u, v, cost));
            }
            "p" => {
                if fields.len() != 3 {
                    return Err(err("expected `p <s> <t>`".into()));
                }
                let (count, _) = n.ok_or_else(|| err("pair before `n` record".into()))?;
                let s = parse_v(fields[1])?;
                let t = parse_v(fields[2])?;
                for x in [s, t] {
                    if x >= count {
                        return Err(err(format!("vertex {x} out of range (n = {count})")));
                    }
                }
                if s == t {
                    return Err(err(format!("pair endpoints coincide (s = t = {s})")));
                }
                pairs.push((s, t));
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }

    let (count, n_line) = n.ok_or(ParseError {
        line: text.lines().count().max(1),
        message: "missing `n` record".into(),
    })?;
    Instance::new(count, edges, pairs).map_err(|e| ParseError {
        line: n_line,
        message: e.to_string(),
    })
}

/// Canonical text form: `n`, edges sorted by `(u, v)`, pairs in order,
/// costs as lowest-terms `p/q`.
pub fn emit_instance(instance: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "n {}", instance.vertex_count()).unwrap();
    for e in instance.edges() {
        writeln!(out, "e {} {} {}", e.u, e.v, to_pq(&e.cost)).unwrap();
    }
    for p in instance.pairs() {
        writeln!(out, "p {} {}", p.s, p.t).unwrap();
    }
    out
}

/// Sum of arc costs equals sum of edge costs; used as a sanity check.
pub fn arc_cost_total(arcs: &[Arc]) -> Rational {
    arcs.iter().fold(Rational::zero(), |acc, a| acc + &a.cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn parses_minimal_file() {
        let inst = parse_instance("n 2\ne 0 1 3/2\np 0 1").unwrap();
        assert_eq!(inst.vertex_count(), 2);
        assert_eq!(inst.edges().len(), 1);
        assert_eq!(inst.edges()[0].cost, ratio(3, 2));
        assert_eq!(inst.pairs(), &[Pair { s: 0, t: 1 }]);
    }

    #[test]
    fn zero_cost_is_rejected() {
        let err = parse_instance("e 0 1 0").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_instance("n 2\ne 0 1 0\np 0 1").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("non-positive"), "{err}");
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_instance("n 3\n# c\ne 0 1 1\ne 0 5 1\n").unwrap_err();
        assert_eq!(err.line, 4);
        let err = parse_instance("n 3\np 1 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_instance("n 3\nx 1 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_instance("n 3\ne 0 1 1\ne 1 0 2\np 0 1\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("duplicate"));
        let err = parse_instance("n 3\ne 0 1 1\n").unwrap_err();
        assert!(err.message.contains("no terminal pairs"));
    }

    #[test]
    fn decimals_and_comments() {
        let inst = parse_instance("# header\nn 3 # three\np 0 2\ne 2 1 0.25\ne 0 1 7\n").unwrap();
        assert_eq!(inst.edges()[0], Edge { u: 0, v: 1, cost: int(7) });
        assert_eq!(inst.edges()[1], Edge { u: 1, v: 2, cost: ratio(1, 4) });
    }

    #[test]
    fn bidirect_halves_costs() {
        let inst = Instance::new(2, vec![(0, 1, int(1))], vec![(0, 1)]).unwrap();
        let arcs = bidirect(&inst);
        assert_eq!(arcs.len(), 2);
        assert_eq!((arcs[0].tail, arcs[0].head), (0, 1));
        assert_eq!((arcs[1].tail, arcs[1].head), (1, 0));
        assert_eq!(arcs[0].cost, ratio(1, 2));
        assert_eq!(arcs[1].cost, ratio(1, 2));
        assert!(arcs[0].forward && !arcs[1].forward);
    }

    #[test]
    fn bidirect_of_edgeless_graph_is_empty() {
        let inst = Instance::new(2, vec![], vec![(0, 1)]).unwrap();
        assert!(bidirect(&inst).is_empty());
    }

    #[test]
    fn induced_edges_collapse_antiparallel_arcs() {
        let arcs: ArcSet = [0, 1, 5].into_iter().collect();
        assert_eq!(arcs.induced_edges().to_vec(), vec![0, 2]);
    }
}
