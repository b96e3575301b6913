//! Interaction graphs: construction, random generation, girth, and cut
//! values for the sign strings that parameterize the simplified ansatz.

mod maxcut;

pub use maxcut::{
    choose_signs, max_cut_exact, max_cut_exact_with_limit, max_cut_local_search, SignPolicy, DEFAULT_EXHAUSTIVE_LIMIT,
};

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Largest vertex count accepted by the generators.
pub const MAX_VERTICES: usize = 1 << 24;

/// An undirected, weighted edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize) -> Self {
        Self { u, v, weight: 1.0 }
    }

    pub fn weighted(u: usize, v: usize, weight: f64) -> Self {
        Self { u, v, weight }
    }

    fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// A simple undirected graph with edge weights. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl InteractionGraph {
    /// Builds an unweighted graph from vertex pairs.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::from_edges(n, pairs.into_iter().map(|(u, v)| Edge::new(u, v)).collect())
    }

    /// Builds a graph, rejecting self-loops, duplicate edges, out-of-range
    /// endpoints and non-finite weights.
    pub fn from_edges(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::SizeLimit {
                what: "vertex count",
                size: n,
                limit: MAX_VERTICES,
            });
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for (idx, e) in edges.iter().enumerate() {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", e.u)));
            }
            if !e.weight.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-finite weight",
                    e.u, e.v
                )));
            }
            if !seen.insert(e.key()) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
            adjacency[e.u].push((e.v, idx));
            adjacency[e.v].push((e.u, idx));
        }
        Ok(Self { n, edges, adjacency })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `v` paired with the index of the connecting edge.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n as f64
        }
    }

    /// Common degree when every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let first = self.adjacency.first()?.len();
        self.adjacency.iter().all(|a| a.len() == first).then_some(first)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn is_weighted(&self) -> bool {
        self.edges.iter().any(|e| e.weight != 1.0)
    }

    /// A proper two-coloring when the graph is bipartite.
    pub fn bipartition(&self) -> Option<SignString> {
        let mut color = vec![0i8; self.n];
        for root in 0..self.n {
            if color[root] != 0 {
                continue;
            }
            color[root] = 1;
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in &self.adjacency[u] {
                    if color[w] == 0 {
                        color[w] = -color[u];
                        queue.push_back(w);
                    } else if color[w] == color[u] {
                        return None;
                    }
                }
            }
        }
        Some(SignString(color))
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// Cycle on `n ≥ 3` vertices, edges `(i, i+1 mod n)`.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Infeasible(format!(
                "a simple ring needs at least 3 vertices, got {n}"
            )));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Infeasible("a path needs at least 1 vertex".into()));
        }
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Infeasible("a complete graph needs at least 1 vertex".into()));
        }
        Self::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    /// Open rectangular grid, vertex `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Infeasible("grid dimensions must be positive".into()));
        }
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Infeasible(format!("grid {rows}x{cols} overflows the vertex count")))?;
        let mut pairs = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    pairs.push((v, v + 1));
                }
                if r + 1 < rows {
                    pairs.push((v, v + cols));
                }
            }
        }
        Self::new(n, pairs)
    }

    /// The Heawood graph: 14 vertices, cubic, girth 6.
    pub fn heawood() -> Self {
        let mut pairs: Vec<(usize, usize)> = (0..14).map(|i| (i, (i + 1) % 14)).collect();
        pairs.extend((0..14).step_by(2).map(|i| (i, (i + 5) % 14)));
        Self::new(14, pairs).expect("Heawood construction is simple")
    }

    /// Uniformly paired random `degree`-regular simple graph.
    pub fn random_regular(n: usize, degree: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Infeasible("random regular graph needs n ≥ 1".into()));
        }
        if n > MAX_VERTICES {
            return Err(Error::SizeLimit {
                what: "vertex count",
                size: n,
                limit: MAX_VERTICES,
            });
        }
        if degree >= n {
            return Err(Error::Infeasible(format!(
                "degree {degree} must be smaller than n = {n}"
            )));
        }
        let stubs_total = n
            .checked_mul(degree)
            .ok_or_else(|| Error::Infeasible("n * degree overflows".into()))?;
        if stubs_total % 2 != 0 {
            return Err(Error::Infeasible(format!("n * degree = {stubs_total} must be even")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        const MAX_RESTARTS: usize = 10_000;
        for _ in 0..MAX_RESTARTS {
            if let Some(pairs) = try_pairing(n, degree, &mut rng) {
                return Self::new(n, pairs);
            }
        }
        Err(Error::NoConvergence(format!(
            "no simple {degree}-regular pairing on {n} vertices after {MAX_RESTARTS} restarts"
        )))
    }

    /// G(n, p): each pair included independently with probability `probability`.
    pub fn erdos_renyi(n: usize, probability: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Infeasible("Erdős–Rényi graph needs n ≥ 1".into()));
        }
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::Infeasible(format!(
                "edge probability {probability} outside [0, 1]"
            )));
        }
        if n > MAX_VERTICES {
            return Err(Error::SizeLimit {
                what: "vertex count",
                size: n,
                limit: MAX_VERTICES,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(probability) {
                    pairs.push((u, v));
                }
            }
        }
        Self::new(n, pairs)
    }
}

// Steger–Wormald style pairing: draw stub pairs at random, reject loops and
// repeated edges, give up on this attempt when no legal pair remains.
fn try_pairing(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| (0..degree).map(move |_| v)).collect();
    stubs.shuffle(rng);
    let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(n * degree / 2);
    let mut pairs = Vec::with_capacity(n * degree / 2);
    while !stubs.is_empty() {
        let mut placed = false;
        for _ in 0..64 {
            let i = rng.gen_range(0..stubs.len());
            let j = rng.gen_range(0..stubs.len());
            let (a, b) = (stubs[i], stubs[j]);
            if i == j || a == b || present.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            present.insert((a.min(b), a.max(b)));
            pairs.push((a, b));
            let (hi, lo) = (i.max(j), i.min(j));
            stubs.swap_remove(hi);
            stubs.swap_remove(lo);
            placed = true;
            break;
        }
        if !placed {
            // exhaustive check before declaring the attempt stuck
            let legal = (0..stubs.len()).find_map(|i| {
                (i + 1..stubs.len()).find_map(|j| {
                    let (a, b) = (stubs[i], stubs[j]);
                    (a != b && !present.contains(&(a.min(b), a.max(b)))).then_some((i, j))
                })
            });
            let (i, j) = legal?;
            let (a, b) = (stubs[i], stubs[j]);
            present.insert((a.min(b), a.max(b)));
            pairs.push((a, b));
            stubs.swap_remove(j);
            stubs.swap_remove(i);
        }
    }
    Some(pairs)
}

/// Graph families understood by [`generate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Ring { n: usize },
    Path { n: usize },
    Complete { n: usize },
    Grid { rows: usize, cols: usize },
    RandomRegular { n: usize, degree: usize },
    ErdosRenyi { n: usize, probability: f64 },
    Heawood,
}

/// Pure function of `(kind, seed)`; deterministic families ignore the seed.
pub fn generate(kind: &GraphKind, seed: u64) -> Result<InteractionGraph> {
    match *kind {
        GraphKind::Ring { n } => InteractionGraph::ring(n),
        GraphKind::Path { n } => InteractionGraph::path(n),
        GraphKind::Complete { n } => InteractionGraph::complete(n),
        GraphKind::Grid { rows, cols } => InteractionGraph::grid(rows, cols),
        GraphKind::RandomRegular { n, degree } => InteractionGraph::random_regular(n, degree, seed),
        GraphKind::ErdosRenyi { n, probability } => InteractionGraph::erdos_renyi(n, probability, seed),
        GraphKind::Heawood => Ok(InteractionGraph::heawood()),
    }
}

/// Shortest cycle length; forests have no cycle at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    /// True when every cycle is longer than `len`.
    pub fn exceeds(self, len: usize) -> bool {
        match self {
            Girth::Finite(g) => g > len,
            Girth::Infinite => true,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => f.write_str("infinite"),
        }
    }
}

/// Girth by breadth-first search from every vertex.
pub fn girth(g: &InteractionGraph) -> Girth {
    let n = g.n_vertices();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    for root in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        parent_edge[root] = usize::MAX;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for &(w, e) in g.neighbors(u) {
                if e == parent_edge[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent_edge[w] = e;
                    queue.push_back(w);
                } else {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    if best == usize::MAX {
        Girth::Infinite
    } else {
        Girth::Finite(best)
    }
}

/// A ±1 assignment to the vertices of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "SignStringJson", into = "SignStringJson")]
pub struct SignString(Vec<i8>);

#[derive(Serialize, Deserialize)]
struct SignStringJson {
    signs: Vec<i8>,
}

impl TryFrom<SignStringJson> for SignString {
    type Error = Error;
    fn try_from(raw: SignStringJson) -> Result<Self> {
        SignString::new(raw.signs)
    }
}

impl From<SignString> for SignStringJson {
    fn from(s: SignString) -> Self {
        SignStringJson { signs: s.0 }
    }
}

impl SignString {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(format!(
                "sign entries must be +1 or -1, found {bad}"
            )));
        }
        Ok(Self(signs))
    }

    pub fn all_plus(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// `+1, -1, +1, ...`
    pub fn alternating(n: usize) -> Self {
        Self((0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect())
    }

    /// Bit `v` of `mask` set means vertex `v` carries `-1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self((0..n).map(|v| if mask >> v & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        Self((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, v: usize) -> i8 {
        self.0[v]
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    /// Representative of the global-flip class with the first entry `+1`.
    pub fn canonical(&self) -> Self {
        match self.0.first() {
            Some(-1) => self.flipped(),
            _ => self.clone(),
        }
    }
}

/// Total weight of edges whose endpoints carry different signs.
pub fn cut_value(g: &InteractionGraph, s: &SignString) -> Result<f64> {
    check_len("cut_value signs", g.n_vertices(), s.len())?;
    Ok(g.edges()
        .iter()
        .filter(|e| s.get(e.u) != s.get(e.v))
        .map(|e| e.weight)
        .sum())
}

/// Graph JSON: `{"n": int, "edges": [[u, v] | [u, v, w], ...]}`.
pub mod json {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct GraphJson {
        n: usize,
        edges: Vec<Vec<f64>>,
    }

    fn as_index(x: f64) -> Result<usize> {
        if x >= 0.0 && x.fract() == 0.0 && x < MAX_VERTICES as f64 {
            Ok(x as usize)
        } else {
            Err(Error::InvalidInput(format!("{x} is not a vertex index")))
        }
    }

    pub fn from_value(value: serde_json::Value) -> Result<InteractionGraph> {
        let raw: GraphJson = serde_json::from_value(value)?;
        let edges = raw
            .edges
            .iter()
            .map(|e| match e.as_slice() {
                [u, v] => Ok(Edge::new(as_index(*u)?, as_index(*v)?)),
                [u, v, w] => Ok(Edge::weighted(as_index(*u)?, as_index(*v)?, *w)),
                other => Err(Error::InvalidInput(format!(
                    "edge entries need 2 or 3 numbers, got {}",
                    other.len()
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        InteractionGraph::from_edges(raw.n, edges)
    }

    pub fn from_str(text: &str) -> Result<InteractionGraph> {
        from_value(serde_json::from_str(text)?)
    }

    /// Unit-weight edges are written as pairs.
    pub fn to_value(g: &InteractionGraph) -> serde_json::Value {
        let edges: Vec<serde_json::Value> = g
            .edges()
            .iter()
            .map(|e| {
                if e.weight == 1.0 {
                    serde_json::json!([e.u, e.v])
                } else {
                    serde_json::json!([e.u, e.v, e.weight])
                }
            })
            .collect();
        serde_json::json!({ "n": g.n_vertices(), "edges": edges })
    }
}
