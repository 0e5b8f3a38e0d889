use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use bri_core::bri::{self, BriCertificate, BriTable, SeededFunction, UhfAverage};
use bri_core::channels::DiscreteChannel;
use bri_core::coset::{CayleyEigen, CosetBri, BOUND_SLACK};
use bri_core::gf2e::{count_irreducible, FieldCtx};
use bri_core::graphs::{self, BipartiteGraph, DecompositionOptions, GraphSummary};
use bri_core::spectra;
use bri_core::wiretap::{self, LeakageReport, SeedReuseBounds, TrendConfig, TrendFamily, TrendTable, WiretapError};

use crate::error::{CliError, CliResult, Kind};
use crate::output::{num, opt_num, Output};

/// Global settings a command may consult.
pub struct Ctx {
    pub seed: u64,
    pub tol: f64,
    pub eps: Vec<f64>,
    pub budget: usize,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_channel(path: &Path) -> CliResult<DiscreteChannel> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    DiscreteChannel::from_csv(file).map_err(|e| CliError::from(e).in_file(path))
}

fn read_table(path: &Path) -> CliResult<BriTable> {
    BriTable::parse(&read_text(path)?).map_err(|e| CliError::from(e).in_file(path))
}

fn parse_modulus(s: &str) -> CliResult<u32> {
    let digits = s.trim_start_matches("0x").trim_start_matches("0X");
    u32::from_str_radix(digits, 16).map_err(|e| CliError::usage(format!("modulus '{s}': {e}")))
}

#[derive(Serialize)]
struct CosetMessage {
    m: usize,
    element: String,
    #[serde(flatten)]
    eigen: CayleyEigen,
    within_cap: bool,
}

#[derive(Serialize)]
struct CosetReport {
    field_degree: u32,
    modulus: String,
    subfield_degree: u32,
    complement_dimension: u32,
    d_s: usize,
    d_x: usize,
    message_count: usize,
    message_count_formula: Option<u128>,
    eigenvalue_cap: f64,
    all_within_cap: bool,
    messages: Vec<CosetMessage>,
    certificate: Option<BriCertificate>,
    certificate_skipped: Option<String>,
    table_file: Option<String>,
}

/// Largest field degree for which the dense certificate and table are built.
const COSET_DENSE_LIMIT: u32 = 10;

pub fn coset(degree: u32, sub: u32, modulus: Option<&str>, table: Option<&Path>) -> CliResult<Output> {
    let modulus = modulus.map(parse_modulus).transpose()?;
    let field = Arc::new(FieldCtx::new(degree, modulus)?);
    let cb = CosetBri::build(field.clone(), sub, None)?;
    let messages: Vec<CosetMessage> = cb
        .regularity_set()
        .iter()
        .map(|&m| {
            let eigen = cb.cayley_lambda2(m)?;
            Ok(CosetMessage {
                m,
                element: format!("{:#x}", cb.n_element(m)),
                within_cap: eigen.lambda2 <= eigen.bound + BOUND_SLACK,
                eigen,
            })
        })
        .collect::<CliResult<_>>()?;
    let n = degree / sub;
    let q = 1u64 << sub;
    let formula = count_irreducible(q, n).ok().map(|c| n as u128 * c / q as u128);
    let (certificate, certificate_skipped) = if degree <= COSET_DENSE_LIMIT {
        (Some(bri::verify_bri(&cb)), None)
    } else {
        (None, Some(format!("dense certificate only for field degree ≤ {COSET_DENSE_LIMIT}")))
    };
    let table_file = match table {
        Some(p) if degree <= COSET_DENSE_LIMIT => {
            write_text(p, &BriTable::materialize(&cb).to_text())?;
            Some(p.display().to_string())
        }
        Some(_) => return Err(CliError::new(Kind::Budget, format!("tables only for field degree ≤ {COSET_DENSE_LIMIT}"))),
        None => None,
    };
    let (d_s, d_x) = cb.degrees();
    let rows = messages
        .iter()
        .map(|m| {
            vec![
                m.m.to_string(),
                m.element.clone(),
                num(m.eigen.lambda2),
                num(m.eigen.max_character_sum),
                num(m.eigen.bound),
                m.within_cap.to_string(),
            ]
        })
        .collect();
    let report = CosetReport {
        field_degree: degree,
        modulus: field.modulus_hex(),
        subfield_degree: sub,
        complement_dimension: cb.k(),
        d_s,
        d_x,
        message_count: messages.len(),
        message_count_formula: formula,
        eigenvalue_cap: cb.eigenvalue_cap(),
        all_within_cap: messages.iter().all(|m| m.within_cap),
        messages,
        certificate,
        certificate_skipped,
        table_file,
    };
    Output::new(report, vec!["m", "element", "lambda2", "max_character_sum", "bound", "within_cap"], rows)
}

#[derive(Serialize)]
struct DecomposedGraph {
    #[serde(flatten)]
    summary: GraphSummary,
    max_nontrivial: f64,
}

#[derive(Serialize)]
struct DecompositionManifest {
    d_s: usize,
    d_x: usize,
    k: usize,
    graphs: Vec<DecomposedGraph>,
    edge_disjoint: bool,
    union_complete: bool,
    all_ramanujan: bool,
    bri_table: Option<String>,
}

pub fn decompose(ctx: &Ctx, ds: usize, dx: usize, k: usize, dir: Option<&Path>) -> CliResult<Output> {
    let gs = graphs::ramanujan_decomposition(ds, dx, k, ctx.seed, DecompositionOptions::default())?;
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
    }
    let (s_size, x_size) = (gs[0].s_size(), gs[0].x_size());
    let mut union = BipartiteGraph::empty(s_size, x_size);
    let mut edge_disjoint = true;
    let mut out = Vec::with_capacity(gs.len());
    for (i, g) in gs.iter().enumerate() {
        let mut summary = GraphSummary::of(g, spectra::DEFAULT_TOL)?;
        let spectrum = g.spectrum()?;
        // ±√(d_S d_X) are the trivial eigenvalues of a connected biregular graph.
        let inner = &spectrum[1..spectrum.len().saturating_sub(1).max(1)];
        let max_nontrivial = inner.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if let Some(d) = dir {
            let name = format!("graph_{i}.txt");
            write_text(&d.join(&name), &format!("# seed {}\n{}", ctx.seed, g.to_edge_list()))?;
            summary.file = Some(name);
        }
        for (s, x) in g.edges() {
            if union.has_edge(s, x) {
                edge_disjoint = false;
            } else {
                union.add_edge(s, x)?;
            }
        }
        out.push(DecomposedGraph { summary, max_nontrivial });
    }
    let bri_table = match dir {
        Some(d) => {
            let table = bri::bri_from_graph_family(&gs, None)?;
            write_text(&d.join("bri.txt"), &format!("# seed {}\n{}", ctx.seed, table.to_text()))?;
            Some("bri.txt".to_string())
        }
        None => None,
    };
    let rows = out
        .iter()
        .enumerate()
        .map(|(i, g)| {
            vec![
                i.to_string(),
                g.summary.file.clone().unwrap_or_default(),
                g.summary.edges.to_string(),
                g.summary.d_s.to_string(),
                g.summary.d_x.to_string(),
                num(g.summary.lambda2),
                num(g.max_nontrivial),
                num(g.summary.ramanujan_threshold),
                g.summary.ramanujan.to_string(),
                g.summary.connected.to_string(),
            ]
        })
        .collect();
    let manifest = DecompositionManifest {
        d_s: ds,
        d_x: dx,
        k,
        all_ramanujan: out.iter().all(|g| g.summary.ramanujan),
        graphs: out,
        edge_disjoint,
        union_complete: edge_disjoint && union == BipartiteGraph::complete(s_size, x_size),
        bri_table,
    };
    Output::new(
        manifest,
        vec!["index", "file", "edges", "d_s", "d_x", "lambda2", "max_nontrivial", "threshold", "ramanujan", "connected"],
        rows,
    )
}

/// Inputs sampled for the collision-average check.
const UHF_SAMPLES: usize = 16;

#[derive(Serialize)]
struct CertifyReport {
    file: String,
    #[serde(flatten)]
    certificate: BriCertificate,
    uhf: Vec<UhfAverage>,
    uhf_holds: bool,
}

pub fn certify(path: &Path) -> CliResult<Output> {
    let table = read_table(path)?;
    let certificate = bri::verify_bri(&table);
    let nx = table.input_count();
    let step = nx.div_ceil(UHF_SAMPLES).max(1);
    let uhf: Vec<UhfAverage> = (0..nx).step_by(step).map(|x| bri::uhf_average_check(&table, x)).collect();
    let uhf_holds = uhf.iter().all(|u| u.value <= u.bound + 1e-12);
    let rows = certificate
        .messages
        .iter()
        .map(|c| {
            vec![
                c.m.to_string(),
                c.label.clone(),
                c.s_regular.to_string(),
                c.x_regular.to_string(),
                opt_num(c.lambda2),
                c.connected.to_string(),
                c.irreducible.to_string(),
            ]
        })
        .collect();
    Output::new(
        CertifyReport { file: path.display().to_string(), certificate, uhf, uhf_holds },
        vec!["m", "label", "s_regular", "x_regular", "lambda2", "connected", "irreducible"],
        rows,
    )
}

/// A scheme manifest. Paths are relative to the manifest's directory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeManifest {
    bri: PathBuf,
    eavesdropper: PathBuf,
    /// Channel X → A; the identity when absent.
    encoder: Option<PathBuf>,
    /// ψ(y) for each y; required with `encoder`.
    decoder: Option<Vec<usize>>,
    main: Option<PathBuf>,
    seed_reuse_blocks: Option<usize>,
}

#[derive(Serialize)]
struct SeedReuseReport {
    bounds: SeedReuseBounds,
    l_sem: Option<f64>,
    error: Option<f64>,
    leakage_holds: Option<bool>,
    error_holds: Option<bool>,
    skipped: Vec<String>,
}

#[derive(Serialize)]
struct LeakageOutput {
    manifest: String,
    #[serde(flatten)]
    report: LeakageReport,
    seed_reuse: Option<SeedReuseReport>,
}

fn budget_skip<T>(r: Result<T, WiretapError>, skipped: &mut Vec<String>, what: &str) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(WiretapError::Budget { needed, budget }) => {
            skipped.push(format!("{what} needs {needed} entries, budget {budget}"));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn leakage(ctx: &Ctx, path: &Path) -> CliResult<Output> {
    let text = read_text(path)?;
    let manifest: SchemeManifest = serde_json::from_str(&text).map_err(|e| CliError::malformed(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let table = read_table(&base.join(&manifest.bri))?;
    let nx = table.input_count();
    let f: Arc<dyn SeededFunction> = Arc::new(table);
    let sch = match (&manifest.encoder, manifest.decoder) {
        (None, None) => wiretap::identity_scheme(f)?,
        (Some(e), Some(psi)) => wiretap::scheme_build(f, read_channel(&base.join(e))?, psi)?,
        (None, Some(psi)) => wiretap::scheme_build(f, DiscreteChannel::noiseless(nx), psi)?,
        (Some(_), None) => return Err(CliError::malformed(path, "an encoder needs a decoder")),
    };
    let u = read_channel(&base.join(&manifest.eavesdropper))?;
    let t = manifest.main.as_ref().map(|p| read_channel(&base.join(p))).transpose()?;
    let report = wiretap::leakage_report(&sch, t.as_ref(), &u, &ctx.eps, ctx.budget, ctx.tol)?;
    let seed_reuse = match (manifest.seed_reuse_blocks, &t) {
        (Some(n), Some(t)) => {
            let bounds = wiretap::seed_reuse_bounds(&sch, t, &u, n, ctx.budget, ctx.tol)?;
            let mut skipped = Vec::new();
            let l_sem = budget_skip(
                wiretap::seed_reuse_leakage_exact(&sch, &u, n, ctx.budget, ctx.tol),
                &mut skipped,
                "seed-reuse leakage",
            )?;
            let error = budget_skip(wiretap::seed_reuse_error_exact(&sch, t, n, ctx.budget), &mut skipped, "seed-reuse error")?;
            Some(SeedReuseReport {
                leakage_holds: l_sem.map(|l| l <= bounds.leakage_bound + 1e-6),
                error_holds: error.map(|e| e <= bounds.error_bound + 1e-9),
                bounds,
                l_sem,
                error,
                skipped,
            })
        }
        (Some(_), None) => return Err(CliError::malformed(path, "seed_reuse_blocks needs a main channel")),
        _ => None,
    };
    let rows = report
        .messages
        .iter()
        .map(|m| {
            vec![
                m.m.to_string(),
                m.label.clone(),
                num(m.divergence),
                num(m.lambda2),
                num(m.best.eps),
                num(m.best.d2eps),
                m.best.trimmed_entries.to_string(),
                num(m.best.bound),
                m.best.holds.to_string(),
            ]
        })
        .collect();
    Output::new(
        LeakageOutput { manifest: path.display().to_string(), report, seed_reuse },
        vec!["m", "label", "divergence", "lambda2", "eps", "d2eps", "trimmed_entries", "bound", "holds"],
        rows,
    )
}

pub struct TrendArgs {
    pub r: f64,
    pub t: f64,
    pub n_list: Vec<usize>,
    pub c: f64,
    pub family: TrendFamily,
    pub crossover: f64,
    pub main_crossover: Option<f64>,
    pub ramanujan_cap: usize,
}

pub fn trend(ctx: &Ctx, a: TrendArgs) -> CliResult<Output> {
    let u = DiscreteChannel::bsc(a.crossover)?;
    let t = match a.main_crossover {
        Some(p) => DiscreteChannel::bsc(p)?,
        None => DiscreteChannel::noiseless(2),
    };
    let cfg = TrendConfig {
        r: a.r,
        t: a.t,
        n_list: a.n_list,
        c: a.c,
        family: a.family,
        ramanujan_cap: a.ramanujan_cap,
        decomposition: DecompositionOptions::default(),
        seed: ctx.seed,
    };
    let table: TrendTable = wiretap::trend_experiment(&t, &u, &cfg)?;
    let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
    let rows = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.family.to_string(),
                opt(r.field_degree),
                opt(r.subfield_degree),
                r.planned_k.to_string(),
                r.planned_d.to_string(),
                r.inputs.to_string(),
                r.messages.to_string(),
                r.d_s.to_string(),
                num(r.rate),
                num(r.lambda2),
                num(r.eps),
                num(r.d2eps),
                num(r.bound),
            ]
        })
        .collect();
    Output::new(
        table,
        vec![
            "n",
            "family",
            "field_degree",
            "subfield_degree",
            "planned_k",
            "planned_d",
            "inputs",
            "messages",
            "d_s",
            "rate",
            "lambda2",
            "eps",
            "d2eps",
            "bound",
        ],
        rows,
    )
}
