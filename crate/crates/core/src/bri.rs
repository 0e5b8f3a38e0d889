//! Seeded functions f: S×X → N with a declared regularity set M, and their
//! certification as biregular irreducible (BRI) functions.
//!
//! For a message m the bipartite graph G_{f,m} joins s and x whenever
//! f(s,x) = m, and P_{f,m} = B_mᵀB_m/(d_S d_X) is its collision matrix.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channels::{ChannelError, DiscreteChannel};
use crate::graphs::{BipartiteGraph, GraphError};
use crate::spectra::{self, SpectraError, SymMatrix};

/// λ₂ values at or above `1 - IRREDUCIBLE_MARGIN` count as not irreducible.
pub const IRREDUCIBLE_MARGIN: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum BriError {
    #[error("message {0} is not in the regularity set")]
    NotInRegularitySet(usize),
    #[error("empty preimage for seed {s} and message {m}")]
    EmptyPreimage { s: usize, m: usize },
    #[error("edge ({s}, {x}) belongs to graphs {first} and {second}")]
    Overlap { s: usize, x: usize, first: usize, second: usize },
    #[error("edge ({s}, {x}) is covered by no graph")]
    Uncovered { s: usize, x: usize },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("λ₂ routes disagree for message {m}: collision matrix {dense}, graph {graph}")]
    RouteMismatch { m: usize, dense: f64, graph: f64 },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Evaluation interface shared by table-backed and virtual seeded functions.
pub trait SeededFunction: Send + Sync {
    fn seed_count(&self) -> usize;
    fn input_count(&self) -> usize;
    fn output_count(&self) -> usize;
    /// f(s, x) as an output index.
    fn eval(&self, s: usize, x: usize) -> usize;
    /// The declared regularity set M, sorted.
    fn regularity_set(&self) -> &[usize];
    /// Declared degrees (d_S, d_X).
    fn degrees(&self) -> (usize, usize);

    fn output_label(&self, m: usize) -> String {
        m.to_string()
    }

    /// λ₂(f, m); the default route is the dense collision matrix.
    fn lambda2(&self, m: usize) -> Result<f64, BriError> {
        lambda2_dense(self, m)
    }
}

fn require_message<F: SeededFunction + ?Sized>(f: &F, m: usize) -> Result<(), BriError> {
    if f.regularity_set().binary_search(&m).is_ok() {
        Ok(())
    } else {
        Err(BriError::NotInRegularitySet(m))
    }
}

/// {x : f(s,x) = m}.
pub fn preimage<F: SeededFunction + ?Sized>(f: &F, s: usize, m: usize) -> Vec<usize> {
    (0..f.input_count()).filter(|&x| f.eval(s, x) == m).collect()
}

/// The collision matrix P_{f,m}(x,x') = |{s : f(s,x) = f(s,x') = m}|/(d_S d_X).
pub fn pfm_matrix<F: SeededFunction + ?Sized>(f: &F, m: usize) -> Result<SymMatrix, BriError> {
    require_message(f, m)?;
    let n = f.input_count();
    let (ds, dx) = f.degrees();
    let mut counts = vec![0u32; n * n];
    for s in 0..f.seed_count() {
        let pre = preimage(f, s, m);
        for &a in &pre {
            for &b in &pre {
                counts[a * n + b] += 1;
            }
        }
    }
    let scale = 1.0 / (ds * dx) as f64;
    Ok(SymMatrix::new(n, counts.into_iter().map(|c| c as f64 * scale).collect())?)
}

/// λ₂ as the second-largest eigenvalue modulus of P_{f,m}.
pub fn lambda2_dense<F: SeededFunction + ?Sized>(f: &F, m: usize) -> Result<f64, BriError> {
    Ok(spectra::second_largest_modulus(&pfm_matrix(f, m)?)?)
}

/// The graph G_{f,m} for any output m.
pub fn message_graph<F: SeededFunction + ?Sized>(f: &F, m: usize) -> BipartiteGraph {
    let mut g = BipartiteGraph::empty(f.seed_count(), f.input_count());
    for s in 0..f.seed_count() {
        for x in 0..f.input_count() {
            if f.eval(s, x) == m {
                g.add_edge(s, x).expect("indices in range");
            }
        }
    }
    g
}

/// λ₂(G_{f,m})²/(d_S d_X), the graph route to λ₂(f, m).
pub fn lambda2_graph<F: SeededFunction + ?Sized>(f: &F, m: usize) -> Result<f64, BriError> {
    require_message(f, m)?;
    let (ds, dx) = f.degrees();
    let l = message_graph(f, m).lambda2()?;
    Ok(l * l / (ds * dx) as f64)
}

/// λ₂(f, m) by the collision-matrix route, confirmed by the graph route to
/// within 1e-8.
pub fn lambda2_checked<F: SeededFunction + ?Sized>(f: &F, m: usize) -> Result<f64, BriError> {
    let dense = lambda2_dense(f, m)?;
    let graph = lambda2_graph(f, m)?;
    if (dense - graph).abs() > 1e-8 {
        return Err(BriError::RouteMismatch { m, dense, graph });
    }
    Ok(dense)
}

/// Draws x uniformly from {x : f(s,x) = m}.
pub fn randomized_inverse<F: SeededFunction + ?Sized, R: Rng + ?Sized>(
    f: &F,
    s: usize,
    m: usize,
    rng: &mut R,
) -> Result<usize, BriError> {
    let pre = preimage(f, s, m);
    if pre.is_empty() {
        return Err(BriError::EmptyPreimage { s, m });
    }
    Ok(pre[rng.gen_range(0..pre.len())])
}

/// The channel Q_{f,m}: S → X with density 1/d_S on each preimage.
pub fn qfm_channel<F: SeededFunction + ?Sized>(f: &F, m: usize) -> Result<DiscreteChannel, BriError> {
    require_message(f, m)?;
    let (ds, _) = f.degrees();
    let n = f.input_count();
    let mut density = vec![0.0; f.seed_count() * n];
    for s in 0..f.seed_count() {
        let pre = preimage(f, s, m);
        if pre.is_empty() {
            return Err(BriError::EmptyPreimage { s, m });
        }
        for x in pre {
            density[s * n + x] = 1.0 / ds as f64;
        }
    }
    Ok(DiscreteChannel::from_flat(f.seed_count(), n, density)?)
}

/// A dense table-backed seeded function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BriTable {
    seeds: usize,
    inputs: usize,
    outputs: usize,
    table: Vec<u32>,
    regularity: Vec<usize>,
    d_s: usize,
    d_x: usize,
    labels: Vec<String>,
}

impl BriTable {
    /// `table[s * inputs + x]` holds f(s, x). Regularity and irreducibility
    /// are not checked here; see [`verify_bri`].
    pub fn new(
        seeds: usize,
        inputs: usize,
        outputs: usize,
        table: Vec<u32>,
        mut regularity: Vec<usize>,
        d_s: usize,
        d_x: usize,
    ) -> Result<Self, BriError> {
        if table.len() != seeds * inputs {
            return Err(BriError::InvalidTable(format!(
                "{} entries for {seeds}×{inputs}",
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v as usize >= outputs) {
            return Err(BriError::InvalidTable(format!("output {v} outside N of size {outputs}")));
        }
        regularity.sort_unstable();
        regularity.dedup();
        if let Some(m) = regularity.iter().find(|&&m| m >= outputs) {
            return Err(BriError::InvalidTable(format!("message {m} outside N")));
        }
        if d_s == 0 || d_x == 0 {
            return Err(BriError::InvalidTable("degrees must be positive".into()));
        }
        Ok(Self { seeds, inputs, outputs, table, regularity, d_s, d_x, labels: (0..outputs).map(|i| i.to_string()).collect() })
    }

    /// Tabulates any seeded function.
    pub fn materialize<F: SeededFunction + ?Sized>(f: &F) -> Self {
        let (seeds, inputs) = (f.seed_count(), f.input_count());
        let mut table = Vec::with_capacity(seeds * inputs);
        for s in 0..seeds {
            for x in 0..inputs {
                table.push(f.eval(s, x) as u32);
            }
        }
        let (d_s, d_x) = f.degrees();
        let labels = (0..f.output_count()).map(|m| f.output_label(m)).collect();
        Self {
            seeds,
            inputs,
            outputs: f.output_count(),
            table,
            regularity: f.regularity_set().to_vec(),
            d_s,
            d_x,
            labels,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, BriError> {
        if labels.len() != self.outputs {
            return Err(BriError::InvalidTable(format!("{} labels for {} outputs", labels.len(), self.outputs)));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Text form: `S`, `X`, `N`, `M`, `dS`, `dX` header lines followed by
    /// |S| rows of |X| output indices.
    pub fn to_text(&self) -> String {
        let m: Vec<String> = self.regularity.iter().map(|m| m.to_string()).collect();
        let mut out = format!(
            "S {}\nX {}\nN {}\nM {}\ndS {}\ndX {}\n",
            self.seeds,
            self.inputs,
            self.outputs,
            m.join(" "),
            self.d_s,
            self.d_x
        );
        for s in 0..self.seeds {
            let row: Vec<String> = self.table[s * self.inputs..(s + 1) * self.inputs]
                .iter()
                .map(|v| v.to_string())
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, BriError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<(usize, Vec<usize>), BriError> {
            let (line, l) = lines
                .next()
                .ok_or(BriError::Parse { line: 0, msg: format!("missing '{key}' line") })?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some(key) {
                return Err(BriError::Parse { line, msg: format!("expected '{key}'") });
            }
            let vals = parts
                .map(|t| t.parse::<usize>().map_err(|e| BriError::Parse { line, msg: format!("'{t}': {e}") }))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((line, vals))
        };
        let single = |(line, v): (usize, Vec<usize>)| -> Result<usize, BriError> {
            if v.len() == 1 { Ok(v[0]) } else { Err(BriError::Parse { line, msg: "expected one value".into() }) }
        };
        let seeds = single(header("S")?)?;
        let inputs = single(header("X")?)?;
        let outputs = single(header("N")?)?;
        let (_, regularity) = header("M")?;
        let d_s = single(header("dS")?)?;
        let d_x = single(header("dX")?)?;
        let mut table = Vec::with_capacity(seeds * inputs);
        let mut rows = 0;
        for (line, l) in lines {
            let row = l
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|e| BriError::Parse { line, msg: format!("'{t}': {e}") }))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != inputs {
                return Err(BriError::Parse { line, msg: format!("row has {} entries, expected {inputs}", row.len()) });
            }
            table.extend(row);
            rows += 1;
        }
        if rows != seeds {
            return Err(BriError::Parse { line: 0, msg: format!("{rows} rows, expected {seeds}") });
        }
        Self::new(seeds, inputs, outputs, table, regularity, d_s, d_x)
    }
}

impl SeededFunction for BriTable {
    fn seed_count(&self) -> usize {
        self.seeds
    }
    fn input_count(&self) -> usize {
        self.inputs
    }
    fn output_count(&self) -> usize {
        self.outputs
    }
    fn eval(&self, s: usize, x: usize) -> usize {
        self.table[s * self.inputs + x] as usize
    }
    fn regularity_set(&self) -> &[usize] {
        &self.regularity
    }
    fn degrees(&self) -> (usize, usize) {
        (self.d_s, self.d_x)
    }
    fn output_label(&self, m: usize) -> String {
        self.labels[m].clone()
    }
}

/// Builds f from an edge decomposition of K_{S,X}: f(s,x) is the index of
/// the graph containing (s,x). The regularity set holds the connected
/// members that are biregular with the degrees of the first such member.
pub fn bri_from_graph_family(graphs: &[BipartiteGraph], labels: Option<Vec<String>>) -> Result<BriTable, BriError> {
    let first = graphs
        .first()
        .ok_or_else(|| BriError::InvalidTable("empty graph family".into()))?;
    let (seeds, inputs) = (first.s_size(), first.x_size());
    if graphs.iter().any(|g| g.s_size() != seeds || g.x_size() != inputs) {
        return Err(BriError::InvalidTable("graphs have different part sizes".into()));
    }
    let mut table = vec![u32::MAX; seeds * inputs];
    for (i, g) in graphs.iter().enumerate() {
        for (s, x) in g.edges() {
            let cell = &mut table[s * inputs + x];
            if *cell != u32::MAX {
                return Err(BriError::Overlap { s, x, first: *cell as usize, second: i });
            }
            *cell = i as u32;
        }
    }
    if let Some(pos) = table.iter().position(|&v| v == u32::MAX) {
        return Err(BriError::Uncovered { s: pos / inputs, x: pos % inputs });
    }
    let degrees = graphs
        .iter()
        .filter(|g| g.is_connected())
        .find_map(|g| g.is_biregular())
        .ok_or_else(|| BriError::InvalidTable("no connected biregular member".into()))?;
    let regularity = graphs
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_biregular() == Some(degrees) && g.is_connected())
        .map(|(i, _)| i)
        .collect();
    let t = BriTable::new(seeds, inputs, graphs.len(), table, regularity, degrees.0, degrees.1)?;
    match labels {
        Some(l) => t.with_labels(l),
        None => Ok(t),
    }
}

/// The graphs G_{f,m} for every output m ∈ N.
pub fn graph_family_of<F: SeededFunction + ?Sized>(f: &F) -> Vec<BipartiteGraph> {
    (0..f.output_count()).map(|m| message_graph(f, m)).collect()
}

/// Per-message part of a [`BriCertificate`].
#[derive(Debug, Clone, Serialize)]
pub struct MessageCheck {
    pub m: usize,
    pub label: String,
    pub s_regular: bool,
    /// First seed whose preimage size differs from d_S, with that size.
    pub s_witness: Option<(usize, usize)>,
    pub x_regular: bool,
    /// First input hit by a number of seeds other than d_X, with that number.
    pub x_witness: Option<(usize, usize)>,
    pub lambda2: Option<f64>,
    pub connected: bool,
    pub irreducible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BriCertificate {
    pub seeds: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub d_s: usize,
    pub d_x: usize,
    pub messages: Vec<MessageCheck>,
    /// d_X|X| = d_S|S|.
    pub double_counting: bool,
    /// |M| ≤ |X|/d_S.
    pub message_count_bound: bool,
    /// |S| ≥ d_X|M|.
    pub seed_count_bound: bool,
    pub valid: bool,
}

fn check_message<F: SeededFunction + ?Sized>(f: &F, m: usize) -> MessageCheck {
    let (ds, dx) = f.degrees();
    let (ns, nx) = (f.seed_count(), f.input_count());
    let mut col = vec![0usize; nx];
    let mut s_witness = None;
    for s in 0..ns {
        let mut row = 0;
        for (x, c) in col.iter_mut().enumerate() {
            if f.eval(s, x) == m {
                row += 1;
                *c += 1;
            }
        }
        if row != ds && s_witness.is_none() {
            s_witness = Some((s, row));
        }
    }
    let x_witness = col.iter().enumerate().find(|(_, &c)| c != dx).map(|(x, &c)| (x, c));
    let connected = message_graph(f, m).is_connected();
    let lambda2 = if s_witness.is_none() && x_witness.is_none() { f.lambda2(m).ok() } else { None };
    let irreducible = lambda2.is_some_and(|l| l <= 1.0 - IRREDUCIBLE_MARGIN);
    MessageCheck {
        m,
        label: f.output_label(m),
        s_regular: s_witness.is_none(),
        s_witness,
        x_regular: x_witness.is_none(),
        x_witness,
        lambda2,
        connected,
        irreducible,
    }
}

/// Checks every BRI condition and identity, recording failures.
pub fn verify_bri<F: SeededFunction + ?Sized>(f: &F) -> BriCertificate {
    let (d_s, d_x) = f.degrees();
    let (seeds, inputs) = (f.seed_count(), f.input_count());
    let messages: Vec<MessageCheck> = f.regularity_set().par_iter().map(|&m| check_message(f, m)).collect();
    let mcount = f.regularity_set().len();
    let double_counting = d_x * inputs == d_s * seeds;
    let message_count_bound = mcount * d_s <= inputs;
    let seed_count_bound = seeds >= d_x * mcount;
    let valid = double_counting
        && message_count_bound
        && seed_count_bound
        && messages.iter().all(|c| c.s_regular && c.x_regular && c.irreducible);
    BriCertificate {
        seeds,
        inputs,
        outputs: f.output_count(),
        d_s,
        d_x,
        messages,
        double_counting,
        message_count_bound,
        seed_count_bound,
        valid,
    }
}

/// Average conditional collision probability for a fixed input.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UhfAverage {
    pub x: usize,
    pub value: f64,
    /// (d_S − 1)/(|X| − 1).
    pub expected: f64,
    /// 1/|M|.
    pub bound: f64,
}

/// (1/(|X|−1)) Σ_{x'≠x} P[f(S,x) = f(S,x') | f(S,x) ∈ M] with S uniform.
pub fn uhf_average_check<F: SeededFunction + ?Sized>(f: &F, x: usize) -> UhfAverage {
    let regular = f.regularity_set();
    let nx = f.input_count();
    let (ds, _) = f.degrees();
    let mut qualifying = 0u64;
    let mut collisions = 0u64;
    for s in 0..f.seed_count() {
        let m = f.eval(s, x);
        if regular.binary_search(&m).is_ok() {
            qualifying += 1;
            collisions += (0..nx).filter(|&y| y != x && f.eval(s, y) == m).count() as u64;
        }
    }
    let value = if qualifying == 0 || nx < 2 {
        0.0
    } else {
        collisions as f64 / qualifying as f64 / (nx - 1) as f64
    };
    UhfAverage {
        x,
        value,
        expected: if nx < 2 { 0.0 } else { (ds as f64 - 1.0) / (nx - 1) as f64 },
        bound: 1.0 / regular.len().max(1) as f64,
    }
}

/// P[f(S,x) ∈ M] with S uniform.
pub fn qualifying_probability<F: SeededFunction + ?Sized>(f: &F, x: usize) -> f64 {
    let regular = f.regularity_set();
    let hits = (0..f.seed_count())
        .filter(|&s| regular.binary_search(&f.eval(s, x)).is_ok())
        .count();
    hits as f64 / f.seed_count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycles() -> BriTable {
        let dashed = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3), (3, 0), (3, 3)];
        let solid = [(0, 2), (0, 3), (1, 0), (1, 3), (2, 0), (2, 1), (3, 1), (3, 2)];
        let g = [
            BipartiteGraph::from_edges(4, 4, dashed).unwrap(),
            BipartiteGraph::from_edges(4, 4, solid).unwrap(),
        ];
        bri_from_graph_family(&g, Some(vec!["1".into(), "2".into()])).unwrap()
    }

    #[test]
    fn two_cycles_certify() {
        let f = two_cycles();
        assert_eq!(f.regularity_set(), &[0, 1]);
        assert_eq!(f.degrees(), (2, 2));
        let cert = verify_bri(&f);
        assert!(cert.valid);
        for c in &cert.messages {
            assert!((c.lambda2.unwrap() - 0.5).abs() < 1e-9);
        }
        for m in 0..2 {
            assert!((lambda2_checked(&f, m).unwrap() - 0.5).abs() < 1e-9);
            let p = pfm_matrix(&f, m).unwrap();
            assert!(p.row_sums().iter().all(|s| (s - 1.0).abs() < 1e-15));
        }
        let u = uhf_average_check(&f, 0);
        assert!((u.value - 1.0 / 3.0).abs() < 1e-15);
        assert!(u.value <= u.bound);
    }

    #[test]
    fn graph_family_round_trip() {
        let f = two_cycles();
        let back = bri_from_graph_family(&graph_family_of(&f), Some(vec!["1".into(), "2".into()])).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn missing_and_overlapping_edges() {
        let mut a = BipartiteGraph::complete(2, 2);
        let b = BipartiteGraph::from_edges(2, 2, [(0, 0)]).unwrap();
        assert!(matches!(bri_from_graph_family(&[a.clone(), b], None), Err(BriError::Overlap { .. })));
        a = BipartiteGraph::from_edges(2, 2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        assert!(matches!(bri_from_graph_family(&[a], None), Err(BriError::Uncovered { s: 1, x: 1 })));
    }

    #[test]
    fn s_regularity_witness() {
        // f(s, x) = x mod 2 on 3 inputs: preimage sizes are 2 and 1.
        let t = BriTable::new(2, 3, 2, vec![0, 1, 0, 0, 1, 0], vec![0, 1], 2, 2).unwrap();
        let cert = verify_bri(&t);
        assert!(!cert.valid);
        assert_eq!(cert.messages[1].s_witness, Some((0, 1)));
    }

    #[test]
    fn table_text_round_trip() {
        let f = two_cycles();
        let text = f.to_text();
        let back = BriTable::parse(&text).unwrap();
        assert_eq!(back.regularity_set(), f.regularity_set());
        for s in 0..4 {
            for x in 0..4 {
                assert_eq!(back.eval(s, x), f.eval(s, x));
            }
        }
        assert!(BriTable::parse("S 1\nX 1\nN 1\nM 0\ndS 1\n").is_err());
        assert!(BriTable::parse("S 1\nX 2\nN 1\nM 0\ndS 1\ndX 1\n0\n").is_err());
    }
}
