//! Bipartite graphs between a seed part S and an input part X, their
//! spectra, 2-lifts, Ramanujan certification and edge-disjoint Ramanujan
//! decompositions of complete bipartite graphs.
//!
//! Adjacency matrices list the S vertices first, then the X vertices.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::spectra::{self, SpectraError, SymMatrix, CLUSTER_GAP, DEFAULT_TOL};

/// Largest edge count handled by exhaustive signing search.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 24;

/// Default number of random signings tried before giving up.
pub const DEFAULT_SIGNING_BUDGET: u64 = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge ({s}, {x}) outside parts of size {s_size} and {x_size}")]
    EdgeOutOfRange { s: usize, x: usize, s_size: usize, x_size: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("signing does not cover exactly the edge set")]
    SigningMismatch,
    #[error("no certified signing after {tries} tries{}", level.map(|l| format!(" at level {l}")).unwrap_or_default())]
    SearchExhausted { tries: u64, level: Option<usize> },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// A bipartite graph stored as an S×X biadjacency 0/1 matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipartiteGraph {
    s_size: usize,
    x_size: usize,
    adj: Vec<bool>,
}

impl BipartiteGraph {
    pub fn empty(s_size: usize, x_size: usize) -> Self {
        Self { s_size, x_size, adj: vec![false; s_size * x_size] }
    }

    pub fn complete(s_size: usize, x_size: usize) -> Self {
        Self { s_size, x_size, adj: vec![true; s_size * x_size] }
    }

    pub fn from_edges(
        s_size: usize,
        x_size: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(s_size, x_size);
        for (s, x) in edges {
            g.add_edge(s, x)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, s: usize, x: usize) -> Result<(), GraphError> {
        if s >= self.s_size || x >= self.x_size {
            return Err(GraphError::EdgeOutOfRange { s, x, s_size: self.s_size, x_size: self.x_size });
        }
        self.adj[s * self.x_size + x] = true;
        Ok(())
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn has_edge(&self, s: usize, x: usize) -> bool {
        s < self.s_size && x < self.x_size && self.adj[s * self.x_size + x]
    }

    /// Edges in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.s_size {
            for x in 0..self.x_size {
                if self.adj[s * self.x_size + x] {
                    out.push((s, x));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count()
    }

    pub fn s_degree(&self, s: usize) -> usize {
        self.adj[s * self.x_size..(s + 1) * self.x_size].iter().filter(|&&b| b).count()
    }

    pub fn x_degree(&self, x: usize) -> usize {
        (0..self.s_size).filter(|&s| self.adj[s * self.x_size + x]).count()
    }

    /// (d_S, d_X) when every S vertex has degree d_S and every X vertex d_X.
    pub fn is_biregular(&self) -> Option<(usize, usize)> {
        if self.s_size == 0 || self.x_size == 0 {
            return None;
        }
        let ds = self.s_degree(0);
        let dx = self.x_degree(0);
        let rows = (0..self.s_size).all(|s| self.s_degree(s) == ds);
        let cols = (0..self.x_size).all(|x| self.x_degree(x) == dx);
        (rows && cols).then_some((ds, dx))
    }

    fn neighbours(&self, v: usize) -> Vec<usize> {
        if v < self.s_size {
            (0..self.x_size)
                .filter(|&x| self.adj[v * self.x_size + x])
                .map(|x| self.s_size + x)
                .collect()
        } else {
            let x = v - self.s_size;
            (0..self.s_size).filter(|&s| self.adj[s * self.x_size + x]).collect()
        }
    }

    fn bfs(&self, start: usize, adjacency: &[Vec<usize>]) -> Vec<Option<usize>> {
        let mut dist = vec![None; adjacency.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &u in &adjacency[v] {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.s_size + self.x_size).map(|v| self.neighbours(v)).collect()
    }

    /// Breadth-first connectivity over the union vertex set.
    pub fn is_connected(&self) -> bool {
        let n = self.s_size + self.x_size;
        if n == 0 {
            return true;
        }
        let lists = self.adjacency_lists();
        self.bfs(0, &lists).iter().all(Option::is_some)
    }

    /// Diameter by all-pairs BFS; `None` stands for an infinite diameter.
    pub fn diameter(&self) -> Option<usize> {
        let lists = self.adjacency_lists();
        let mut best = 0;
        for v in 0..lists.len() {
            for d in self.bfs(v, &lists) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// log(|X|+|S|)/(log d_S + log d_X) for biregular graphs with both
    /// degrees at least two.
    pub fn diameter_lower_bound(&self) -> Option<f64> {
        let (ds, dx) = self.is_biregular()?;
        if ds < 2 || dx < 2 {
            return None;
        }
        let n = (self.s_size + self.x_size) as f64;
        Some(n.log2() / ((ds as f64).log2() + (dx as f64).log2()))
    }

    /// Full adjacency matrix, S block first.
    pub fn adjacency_matrix(&self) -> SymMatrix {
        let s = self.s_size;
        SymMatrix::from_fn(s + self.x_size, |i, j| {
            let (a, b) = if i < s && j >= s {
                (i, j - s)
            } else if j < s && i >= s {
                (j, i - s)
            } else {
                return 0.0;
            };
            if self.adj[a * self.x_size + b] { 1.0 } else { 0.0 }
        })
    }

    /// Adjacency spectrum, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>, GraphError> {
        Ok(spectra::sym_eigenvalues(&self.adjacency_matrix(), DEFAULT_TOL * 1e-2)?)
    }

    /// The second-largest adjacency eigenvalue λ₂(G).
    pub fn lambda2(&self) -> Result<f64, GraphError> {
        let eig = self.spectrum()?;
        Ok(eig.get(1).copied().unwrap_or(0.0))
    }

    /// Connectivity certified twice: by BFS and, for biregular graphs with
    /// positive degrees, by simplicity of the eigenvalue √(d_S d_X).
    pub fn certify_connectivity(&self) -> Result<bool, GraphError> {
        let bfs = self.is_connected();
        if let Some((ds, dx)) = self.is_biregular() {
            if ds > 0 && dx > 0 {
                let top = ((ds * dx) as f64).sqrt();
                let mult = spectra::multiplicity_near(&self.spectrum()?, top, CLUSTER_GAP);
                if (mult == 1) != bfs {
                    return Err(GraphError::Internal(format!(
                        "BFS connectivity {bfs} disagrees with multiplicity {mult} of √(d_S d_X)"
                    )));
                }
            }
        }
        Ok(bfs)
    }

    /// Edge-list text: a header line with the part sizes, then one
    /// `s x` pair per line. Lines starting with `#` are comments.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.s_size, self.x_size);
        for (s, x) in self.edges() {
            out.push_str(&format!("{s} {x}\n"));
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_pair = |line: usize, l: &str| -> Result<(usize, usize), GraphError> {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(GraphError::Parse { line, msg: format!("expected two integers, got '{l}'") });
            }
            let p = |t: &str| {
                t.parse::<usize>()
                    .map_err(|e| GraphError::Parse { line, msg: format!("'{t}': {e}") })
            };
            Ok((p(parts[0])?, p(parts[1])?))
        };
        let (line, header) = lines
            .next()
            .ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
        let (s_size, x_size) = parse_pair(line, header)?;
        let mut g = Self::empty(s_size, x_size);
        for (line, l) in lines {
            let (s, x) = parse_pair(line, l)?;
            g.add_edge(s, x).map_err(|e| GraphError::Parse { line, msg: e.to_string() })?;
        }
        Ok(g)
    }
}

/// Ramanujan threshold √(d_S−1) + √(d_X−1).
pub fn ramanujan_threshold(ds: usize, dx: usize) -> f64 {
    ((ds as f64) - 1.0).sqrt() + ((dx as f64) - 1.0).sqrt()
}

/// Every adjacency eigenvalue is ±√(d_S d_X) or bounded in modulus by the
/// Ramanujan threshold, both within `tol`.
pub fn is_ramanujan(g: &BipartiteGraph, ds: usize, dx: usize, tol: f64) -> Result<bool, GraphError> {
    if g.is_biregular() != Some((ds, dx)) {
        return Err(GraphError::Precondition(format!("graph is not ({ds}, {dx})-biregular")));
    }
    if !g.is_connected() {
        return Err(GraphError::Precondition("graph is not connected".into()));
    }
    let top = ((ds * dx) as f64).sqrt();
    let thr = ramanujan_threshold(ds, dx);
    Ok(g.spectrum()?
        .iter()
        .all(|&mu| (mu.abs() - top).abs() <= tol || mu.abs() <= thr + tol))
}

/// A ±1 value on every edge of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signing {
    values: BTreeMap<(usize, usize), i8>,
}

impl Signing {
    /// Pairs signs with the row-major edge order of `g`.
    pub fn from_signs(g: &BipartiteGraph, signs: &[i8]) -> Result<Self, GraphError> {
        let edges = g.edges();
        if edges.len() != signs.len() || signs.iter().any(|&v| v != 1 && v != -1) {
            return Err(GraphError::SigningMismatch);
        }
        Ok(Self { values: edges.into_iter().zip(signs.iter().copied()).collect() })
    }

    pub fn from_map(values: BTreeMap<(usize, usize), i8>) -> Self {
        Self { values }
    }

    pub fn constant(g: &BipartiteGraph, sign: i8) -> Self {
        Self { values: g.edges().into_iter().map(|e| (e, sign)).collect() }
    }

    pub fn get(&self, s: usize, x: usize) -> Option<i8> {
        self.values.get(&(s, x)).copied()
    }

    pub fn values(&self) -> &BTreeMap<(usize, usize), i8> {
        &self.values
    }

    pub fn negated(&self) -> Self {
        Self { values: self.values.iter().map(|(&e, &v)| (e, -v)).collect() }
    }

    fn matches(&self, g: &BipartiteGraph) -> bool {
        self.values.len() == g.edge_count()
            && self.values.iter().all(|(&(s, x), &v)| g.has_edge(s, x) && (v == 1 || v == -1))
    }
}

/// Signed adjacency matrix A_s.
pub fn signed_adjacency(g: &BipartiteGraph, signing: &Signing) -> Result<SymMatrix, GraphError> {
    if !signing.matches(g) {
        return Err(GraphError::SigningMismatch);
    }
    let ss = g.s_size;
    Ok(SymMatrix::from_fn(ss + g.x_size, |i, j| {
        let (a, b) = if i < ss && j >= ss {
            (i, j - ss)
        } else if j < ss && i >= ss {
            (j, i - ss)
        } else {
            return 0.0;
        };
        signing.get(a, b).map_or(0.0, f64::from)
    }))
}

/// The 2-lift of `g` determined by `signing`. Vertex v of copy c maps to
/// index v + c·(part size).
pub fn two_lift(g: &BipartiteGraph, signing: &Signing) -> Result<BipartiteGraph, GraphError> {
    if !signing.matches(g) {
        return Err(GraphError::SigningMismatch);
    }
    let (ss, xs) = (g.s_size, g.x_size);
    let mut lift = BipartiteGraph::empty(2 * ss, 2 * xs);
    for (&(s, x), &v) in &signing.values {
        if v == 1 {
            lift.add_edge(s, x)?;
            lift.add_edge(s + ss, x + xs)?;
        } else {
            lift.add_edge(s, x + xs)?;
            lift.add_edge(s + ss, x)?;
        }
    }
    Ok(lift)
}

/// Largest singular value of the signed biadjacency matrix, which is the
/// spectral radius of A_s.
fn signed_radius(g: &BipartiteGraph, edges: &[(usize, usize)], signs: &[i8]) -> f64 {
    let (ss, xs) = (g.s_size, g.x_size);
    let mut b = vec![0.0f64; ss * xs];
    for (&(s, x), &v) in edges.iter().zip(signs) {
        b[s * xs + x] = v as f64;
    }
    let gram = if ss <= xs {
        SymMatrix::from_fn(ss, |i, j| (0..xs).map(|k| b[i * xs + k] * b[j * xs + k]).sum())
    } else {
        SymMatrix::from_fn(xs, |i, j| (0..ss).map(|k| b[k * xs + i] * b[k * xs + j]).sum())
    };
    let eig = spectra::sym_eigenvalues(&gram, 1e-11).expect("gram dimension within cap");
    eig[0].max(0.0).sqrt()
}

/// Search order for Ramanujan signings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigningStrategy {
    /// Lexicographic scan with +1 before −1, first edge most significant.
    Exhaustive,
    /// Independent uniform signings drawn from a seeded generator.
    Randomized,
}

/// Outcome of a successful signing search.
#[derive(Debug, Clone)]
pub struct SigningSearch {
    pub signing: Signing,
    pub lift: BipartiteGraph,
    pub tries: u64,
}

/// Full certification of a candidate lift: biregular with the base degrees,
/// connected (double-checked) and Ramanujan.
pub fn certify_ramanujan(g: &BipartiteGraph, ds: usize, dx: usize, tol: f64) -> Result<bool, GraphError> {
    if g.is_biregular() != Some((ds, dx)) {
        return Ok(false);
    }
    if !g.certify_connectivity()? {
        return Ok(false);
    }
    is_ramanujan(g, ds, dx, tol)
}

/// Finds a signing whose 2-lift is connected, biregular and Ramanujan.
///
/// Candidates are screened by the spectral radius of A_s; since the lift
/// spectrum is spec(A) ∪ spec(A_s), a radius at most the threshold and
/// strictly below √(d_S d_X) makes the lift Ramanujan and connected. The
/// surviving candidate is then certified on the lift itself.
pub fn find_ramanujan_signing(
    g: &BipartiteGraph,
    strategy: SigningStrategy,
    seed: u64,
    max_tries: u64,
    tol: f64,
) -> Result<SigningSearch, GraphError> {
    let (ds, dx) = g
        .is_biregular()
        .ok_or_else(|| GraphError::Precondition("base graph is not biregular".into()))?;
    if !is_ramanujan(g, ds, dx, tol)? {
        return Err(GraphError::Precondition("base graph is not Ramanujan".into()));
    }
    let edges = g.edges();
    let e = edges.len();
    let thr = ramanujan_threshold(ds, dx);
    let top = ((ds * dx) as f64).sqrt();
    let screen = |signs: &[i8]| {
        let r = signed_radius(g, &edges, signs);
        r <= thr + tol && r < top - CLUSTER_GAP
    };
    let finish = |signs: Vec<i8>, tries: u64| -> Result<Option<SigningSearch>, GraphError> {
        let signing = Signing::from_signs(g, &signs)?;
        let lift = two_lift(g, &signing)?;
        if certify_ramanujan(&lift, ds, dx, tol)? {
            Ok(Some(SigningSearch { signing, lift, tries }))
        } else {
            Ok(None)
        }
    };

    match strategy {
        SigningStrategy::Exhaustive => {
            if e > EXHAUSTIVE_EDGE_LIMIT {
                return Err(GraphError::Precondition(format!(
                    "exhaustive search needs at most {EXHAUSTIVE_EDGE_LIMIT} edges, graph has {e}"
                )));
            }
            let signs_of = |c: u64| -> Vec<i8> {
                (0..e).map(|i| if c >> (e - 1 - i) & 1 == 1 { -1 } else { 1 }).collect()
            };
            let total = 1u64 << e;
            let mut start = 0u64;
            while start < total {
                let hit = (start..total)
                    .into_par_iter()
                    .find_first(|&c| screen(&signs_of(c)));
                match hit {
                    None => break,
                    Some(c) => {
                        if let Some(found) = finish(signs_of(c), c + 1)? {
                            return Ok(found);
                        }
                        start = c + 1;
                    }
                }
            }
            Err(GraphError::SearchExhausted { tries: total, level: None })
        }
        SigningStrategy::Randomized => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let batch = 512u64;
            let mut tried = 0u64;
            while tried < max_tries {
                let n = batch.min(max_tries - tried);
                let candidates: Vec<Vec<i8>> = (0..n)
                    .map(|_| (0..e).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
                    .collect();
                let hits: Vec<usize> = candidates
                    .par_iter()
                    .enumerate()
                    .filter(|(_, c)| screen(c))
                    .map(|(i, _)| i)
                    .collect();
                for i in hits {
                    if let Some(found) = finish(candidates[i].clone(), tried + i as u64 + 1)? {
                        return Ok(found);
                    }
                }
                tried += n;
            }
            Err(GraphError::SearchExhausted { tries: tried, level: None })
        }
    }
}

/// Options for [`ramanujan_decomposition`].
#[derive(Debug, Clone, Copy)]
pub struct DecompositionOptions {
    pub max_tries: u64,
    pub tol: f64,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        Self { max_tries: DEFAULT_SIGNING_BUDGET, tol: DEFAULT_TOL }
    }
}

fn child_seed(seed: u64, level: usize, index: usize) -> u64 {
    let mut z = seed ^ ((level as u64) << 32) ^ index as u64;
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splits K_{2^k d_X, 2^k d_S} into 2^k edge-disjoint connected
/// (d_S, d_X)-biregular Ramanujan graphs by repeated ±s lifting of
/// K_{d_X, d_S}. Graphs are ordered by sign history, +s before −s.
pub fn ramanujan_decomposition(
    ds: usize,
    dx: usize,
    k: usize,
    seed: u64,
    opts: DecompositionOptions,
) -> Result<Vec<BipartiteGraph>, GraphError> {
    if ds < 3 || dx < 3 {
        return Err(GraphError::Precondition("degrees must be at least 3".into()));
    }
    if k > 16 || (dx + ds) << k > spectra::MAX_DIM {
        return Err(GraphError::Precondition(format!(
            "parts of size 2^{k}·{dx} and 2^{k}·{ds} exceed the spectral cap"
        )));
    }
    let mut level = vec![BipartiteGraph::complete(dx, ds)];
    for t in 1..=k {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (j, parent) in level.iter().enumerate() {
            let strategy = if parent.edge_count() <= EXHAUSTIVE_EDGE_LIMIT {
                SigningStrategy::Exhaustive
            } else {
                SigningStrategy::Randomized
            };
            let found = find_ramanujan_signing(parent, strategy, child_seed(seed, t, j), opts.max_tries, opts.tol)
                .map_err(|err| match err {
                    GraphError::SearchExhausted { tries, .. } => GraphError::SearchExhausted { tries, level: Some(t) },
                    other => other,
                })?;
            let twin = two_lift(parent, &found.signing.negated())?;
            if !certify_ramanujan(&twin, ds, dx, opts.tol)? {
                return Err(GraphError::Internal(format!("negated lift at level {t} failed certification")));
            }
            next.push(found.lift);
            next.push(twin);
        }
        level = next;
    }
    Ok(level)
}

/// Feng–Li lower bound check for graphs of diameter at least 8.
#[derive(Debug, Clone, Serialize)]
pub struct FengLiReport {
    pub diameter: usize,
    pub applicable: bool,
    pub lambda2_squared: f64,
    pub lower_bound: Option<f64>,
    pub holds: Option<bool>,
}

pub fn feng_li_check(g: &BipartiteGraph) -> Result<FengLiReport, GraphError> {
    let (ds, dx) = g
        .is_biregular()
        .ok_or_else(|| GraphError::Precondition("graph is not biregular".into()))?;
    let diameter = g
        .diameter()
        .ok_or_else(|| GraphError::Precondition("graph is not connected".into()))?;
    let l2 = g.lambda2()?;
    let lambda2_squared = l2 * l2;
    if diameter < 8 {
        return Ok(FengLiReport { diameter, applicable: false, lambda2_squared, lower_bound: None, holds: None });
    }
    let (a, b) = (ds as f64, dx as f64);
    let rhs = a + b - 2.0 + 2.0 * ((a - 1.0) * (b - 1.0)).sqrt() * (1.0 - 1.0 / (diameter as f64 - 1.0));
    Ok(FengLiReport {
        diameter,
        applicable: true,
        lambda2_squared,
        lower_bound: Some(rhs),
        holds: Some(lambda2_squared >= rhs - 1e-9),
    })
}

/// One member of a decomposition manifest.
#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub file: Option<String>,
    pub s_size: usize,
    pub x_size: usize,
    pub edges: usize,
    pub d_s: usize,
    pub d_x: usize,
    pub lambda2: f64,
    pub ramanujan_threshold: f64,
    pub ramanujan: bool,
    pub connected: bool,
    pub diameter: Option<usize>,
}

impl GraphSummary {
    pub fn of(g: &BipartiteGraph, tol: f64) -> Result<Self, GraphError> {
        let (d_s, d_x) = g.is_biregular().unwrap_or((0, 0));
        let connected = g.certify_connectivity()?;
        let ramanujan = connected && d_s > 0 && is_ramanujan(g, d_s, d_x, tol)?;
        Ok(Self {
            file: None,
            s_size: g.s_size,
            x_size: g.x_size,
            edges: g.edge_count(),
            d_s,
            d_x,
            lambda2: g.lambda2()?,
            ramanujan_threshold: ramanujan_threshold(d_s.max(1), d_x.max(1)),
            ramanujan,
            connected,
            diameter: g.diameter(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle8() -> BipartiteGraph {
        BipartiteGraph::from_edges(
            4,
            4,
            [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3), (3, 0), (3, 3)],
        )
        .unwrap()
    }

    #[test]
    fn complete_k33() {
        let g = BipartiteGraph::complete(3, 3);
        assert_eq!(g.is_biregular(), Some((3, 3)));
        assert!(g.is_connected());
        assert_eq!(g.diameter(), Some(2));
        assert!(is_ramanujan(&g, 3, 3, 1e-9).unwrap());
    }

    #[test]
    fn eight_cycle() {
        let g = cycle8();
        assert_eq!(g.is_biregular(), Some((2, 2)));
        assert!(g.certify_connectivity().unwrap());
        assert_eq!(g.diameter(), Some(4));
        assert!((g.lambda2().unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert!(is_ramanujan(&g, 2, 2, 1e-9).unwrap());
    }

    #[test]
    fn two_disjoint_squares() {
        let g = BipartiteGraph::from_edges(4, 4, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (2, 3), (3, 2), (3, 3)])
            .unwrap();
        assert_eq!(g.is_biregular(), Some((2, 2)));
        assert!(!g.certify_connectivity().unwrap());
        assert_eq!(g.diameter(), None);
        assert!(is_ramanujan(&g, 2, 2, 1e-9).is_err());
    }

    #[test]
    fn complete_minus_matching_is_ramanujan() {
        let mut g = BipartiteGraph::complete(4, 4);
        for i in 0..4 {
            g.adj[i * 4 + i] = false;
        }
        assert_eq!(g.is_biregular(), Some((3, 3)));
        assert!(is_ramanujan(&g, 3, 3, 1e-9).unwrap());
    }

    #[test]
    fn lifts_of_small_graphs() {
        let g = BipartiteGraph::complete(3, 3);
        let plus = two_lift(&g, &Signing::constant(&g, 1)).unwrap();
        assert!(!plus.is_connected());
        assert_eq!(plus.edge_count(), 18);

        let k11 = BipartiteGraph::complete(1, 1);
        let lift = two_lift(&k11, &Signing::constant(&k11, -1)).unwrap();
        assert_eq!(lift.edges(), vec![(0, 1), (1, 0)]);

        let wrong = Signing::constant(&BipartiteGraph::complete(2, 2), 1);
        assert_eq!(two_lift(&g, &wrong), Err(GraphError::SigningMismatch));
    }

    #[test]
    fn exhaustive_signing_of_k33() {
        let g = BipartiteGraph::complete(3, 3);
        let found = find_ramanujan_signing(&g, SigningStrategy::Exhaustive, 0, 0, 1e-9).unwrap();
        assert!(found.signing.values().values().any(|&v| v == -1));
        assert!(certify_ramanujan(&found.lift, 3, 3, 1e-9).unwrap());
        let twin = two_lift(&g, &found.signing.negated()).unwrap();
        assert!(certify_ramanujan(&twin, 3, 3, 1e-9).unwrap());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = cycle8();
        let text = g.to_edge_list();
        assert_eq!(BipartiteGraph::parse_edge_list(&text).unwrap(), g);
        assert!(BipartiteGraph::parse_edge_list("2 2\n0 5\n").is_err());
        assert!(BipartiteGraph::parse_edge_list("").is_err());
        assert!(BipartiteGraph::parse_edge_list("# c\n2 2\n0 x\n").is_err());
    }

    fn even_cycle(n: usize) -> BipartiteGraph {
        BipartiteGraph::from_edges(n, n, (0..n).flat_map(|i| [(i, i), (i, (i + 1) % n)])).unwrap()
    }

    #[test]
    fn feng_li_on_cycles() {
        // The inequality only holds asymptotically: it fails on C24 and holds on C40.
        let r = feng_li_check(&even_cycle(12)).unwrap();
        assert_eq!(r.diameter, 12);
        assert!((r.lambda2_squared - 3.732050807568877).abs() < 1e-9);
        assert!((r.lower_bound.unwrap() - 3.818181818181818).abs() < 1e-12);
        assert_eq!(r.holds, Some(false));
        let r = feng_li_check(&even_cycle(20)).unwrap();
        assert_eq!(r.diameter, 20);
        assert_eq!(r.holds, Some(true));
        let k = feng_li_check(&BipartiteGraph::complete(3, 3)).unwrap();
        assert!(!k.applicable);
        assert_eq!(k.holds, None);
    }
}
