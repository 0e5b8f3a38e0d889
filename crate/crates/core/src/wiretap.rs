//! Modular BRI wiretap schemes: exact error and leakage, the eigenvalue
//! leakage bound, seed reuse, expurgation to semantic security, and the
//! blocklength trend experiment.

use std::f64::consts::{E, LN_2};
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bri::{bri_from_graph_family, BriError, SeededFunction};
use crate::channels::{ChannelError, DiscreteChannel};
use crate::coset::{CosetBri, CosetError};
use crate::gf2e::{FieldCtx, FieldError};
use crate::graphs::{ramanujan_decomposition, ramanujan_threshold, DecompositionOptions, GraphError};
use crate::infodiv::{self, InfodivError, SmoothingStrategy};

/// Default smoothing parameter of the leakage bound.
pub const DEFAULT_EPS: f64 = 0.05;

/// Smoothing parameters tried by [`ev_ub_sweep`].
pub const EPS_SWEEP: [f64; 4] = [0.3, 0.1, 0.05, 0.01];

/// Default cap on the number of joint entries in exact leakage computations.
pub const DEFAULT_LEAKAGE_BUDGET: usize = 1 << 22;

/// Cap on the entries of the materialized seeded encoder.
pub const MAX_SCHEME_ENTRIES: usize = 1 << 26;

/// Two-sided 99.9 % normal quantile used for Wilson intervals.
pub const WILSON_Z: f64 = 3.2905;

/// Largest |X| for which the trend experiment builds Ramanujan tables.
pub const DEFAULT_RAMANUJAN_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum WiretapError {
    #[error("alphabet chain mismatch: {0}")]
    Chain(String),
    #[error("ε = {0} outside (0, 1 − 1/e)")]
    Eps(f64),
    #[error("computation needs {needed} entries, budget is {budget}")]
    Budget { needed: u128, budget: usize },
    #[error("{seeds} seeds cannot be embedded into {inputs} code inputs")]
    SeedEmbedding { seeds: usize, inputs: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Bri(#[from] BriError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Infodiv(#[from] InfodivError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Coset(#[from] CosetError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn check_budget(needed: u128, budget: usize) -> Result<(), WiretapError> {
    if needed > budget as u128 {
        Err(WiretapError::Budget { needed, budget })
    } else {
        Ok(())
    }
}

/// Π(f, φ, ψ) with the derived seeded encoder ξ = f_s^{-1}φ and decoder
/// ζ(s, y) = f(s, ψ(y)).
pub struct WiretapScheme {
    f: Arc<dyn SeededFunction>,
    phi: DiscreteChannel,
    psi: Vec<usize>,
    messages: Vec<usize>,
    /// Rows indexed s·|M| + i for the i-th message of M.
    xi: DiscreteChannel,
    /// ζ(s, y) as an output of f, indexed s·|Y| + y.
    zeta: Vec<usize>,
}

/// Builds Π(f, φ, ψ) for φ: X → A and ψ: Y → X.
pub fn scheme_build(f: Arc<dyn SeededFunction>, phi: DiscreteChannel, psi: Vec<usize>) -> Result<WiretapScheme, WiretapError> {
    let nx = f.input_count();
    if phi.inputs() != nx {
        return Err(WiretapError::Chain(format!("φ has {} inputs, f has {nx}", phi.inputs())));
    }
    if let Some(&bad) = psi.iter().find(|&&x| x >= nx) {
        return Err(WiretapError::Chain(format!("ψ maps to {bad}, outside the {nx} inputs of f")));
    }
    if phi.is_subnormalized() {
        return Err(WiretapError::Chain("φ must be an ordinary channel".into()));
    }
    let messages = f.regularity_set().to_vec();
    let ns = f.seed_count();
    let na = phi.outputs();
    check_budget((ns * messages.len()) as u128 * na as u128, MAX_SCHEME_ENTRIES)?;
    let position: Vec<Option<usize>> = {
        let mut p = vec![None; f.output_count()];
        for (i, &m) in messages.iter().enumerate() {
            p[m] = Some(i);
        }
        p
    };
    let (ds, _) = f.degrees();
    let blocks: Vec<Result<Vec<f64>, WiretapError>> = (0..ns)
        .into_par_iter()
        .map(|s| {
            let mut rows = vec![0.0; messages.len() * na];
            let mut counts = vec![0usize; messages.len()];
            for x in 0..nx {
                if let Some(i) = position[f.eval(s, x)] {
                    counts[i] += 1;
                    for (a, &v) in phi.row(x).iter().enumerate() {
                        rows[i * na + a] += v;
                    }
                }
            }
            if let Some(i) = counts.iter().position(|&c| c != ds) {
                return Err(BriError::NotInRegularitySet(messages[i]).into());
            }
            rows.iter_mut().for_each(|v| *v /= ds as f64);
            Ok(rows)
        })
        .collect();
    let mut density = Vec::with_capacity(ns * messages.len() * na);
    for b in blocks {
        density.extend(b?);
    }
    let xi = DiscreteChannel::from_flat(ns * messages.len(), na, density)?;
    let ny = psi.len();
    let zeta = (0..ns * ny).map(|i| f.eval(i / ny, psi[i % ny])).collect();
    Ok(WiretapScheme { f, phi, psi, messages, xi, zeta })
}

/// Π(f, id, id).
pub fn identity_scheme(f: Arc<dyn SeededFunction>) -> Result<WiretapScheme, WiretapError> {
    let n = f.input_count();
    scheme_build(f, DiscreteChannel::noiseless(n), (0..n).collect())
}

impl WiretapScheme {
    pub fn function(&self) -> &dyn SeededFunction {
        self.f.as_ref()
    }

    pub fn phi(&self) -> &DiscreteChannel {
        &self.phi
    }

    pub fn psi(&self) -> &[usize] {
        &self.psi
    }

    /// The message set M as outputs of f.
    pub fn messages(&self) -> &[usize] {
        &self.messages
    }

    pub fn seed_count(&self) -> usize {
        self.f.seed_count()
    }

    /// ξ with rows indexed s·|M| + i.
    pub fn xi(&self) -> &DiscreteChannel {
        &self.xi
    }

    pub fn xi_row(&self, s: usize, i: usize) -> &[f64] {
        self.xi.row(s * self.messages.len() + i)
    }

    /// ζ(s, y) as an output of f.
    pub fn zeta(&self, s: usize, y: usize) -> usize {
        self.zeta[s * self.psi.len() + y]
    }

    /// W = φU.
    pub fn eavesdropper_channel(&self, u: &DiscreteChannel) -> Result<DiscreteChannel, WiretapError> {
        Ok(self.phi.concat(u)?)
    }

    /// The law of the eavesdropper's view (S, Z) given each message.
    pub fn eavesdropper_law(&self, u: &DiscreteChannel) -> Result<EavesdropperLaw, WiretapError> {
        EavesdropperLaw::new(self.seed_count(), self.messages.len(), self.xi.concat(u)?)
    }

    fn check_main(&self, t: &DiscreteChannel) -> Result<(), WiretapError> {
        if t.inputs() != self.phi.outputs() || t.outputs() != self.psi.len() {
            return Err(WiretapError::Chain(format!(
                "T is {}→{}, scheme needs {}→{}",
                t.inputs(),
                t.outputs(),
                self.phi.outputs(),
                self.psi.len()
            )));
        }
        Ok(())
    }

    /// P[ζ(s, Y) = m] for the i-th message through T.
    fn correct_probability(&self, t: &DiscreteChannel, s: usize, i: usize) -> f64 {
        let m = self.messages[i];
        let mut total = 0.0;
        for (a, &pa) in self.xi_row(s, i).iter().enumerate() {
            if pa > 0.0 {
                let hit: f64 = t.row(a).iter().enumerate().filter(|(y, _)| self.zeta(s, *y) == m).map(|(_, v)| v).sum();
                total += pa * hit;
            }
        }
        total
    }
}

/// How [`error_probability`] evaluates the maximal error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// A maximal error probability; Monte Carlo values carry a Wilson interval
/// for the maximum.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorEstimate {
    pub value: f64,
    pub exact: bool,
    pub interval: Option<(f64, f64)>,
    pub samples_per_case: usize,
    pub z: Option<f64>,
}

/// Wilson score interval for `hits` successes in `n` trials.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn mc_max<F>(cases: usize, samples: usize, seed: u64, trial: F) -> ErrorEstimate
where
    F: Fn(usize, &mut ChaCha8Rng) -> bool + Sync,
{
    let per_case: Vec<usize> = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            (0..samples).filter(|_| trial(c, &mut rng)).count()
        })
        .collect();
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    let mut best = 0usize;
    for &e in &per_case {
        let (l, h) = wilson_interval(e, samples, WILSON_Z);
        lo = lo.max(l);
        hi = hi.max(h);
        best = best.max(e);
    }
    ErrorEstimate {
        value: best as f64 / samples.max(1) as f64,
        exact: false,
        interval: Some((lo, hi)),
        samples_per_case: samples,
        z: Some(WILSON_Z),
    }
}

fn sampler(row: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(row).expect("rows of ordinary channels have positive mass")
}

/// max over (s, m) of P[ζ(s, Y) ≠ m] with Y generated by ξ(·|s,m) and T.
pub fn error_probability(sch: &WiretapScheme, t: &DiscreteChannel, mode: ErrorMode) -> Result<ErrorEstimate, WiretapError> {
    sch.check_main(t)?;
    let nm = sch.messages.len();
    let cases = sch.seed_count() * nm;
    match mode {
        ErrorMode::Exact => {
            let value = (0..cases)
                .into_par_iter()
                .map(|c| 1.0 - sch.correct_probability(t, c / nm, c % nm))
                .reduce(|| 0.0, f64::max)
                .max(0.0);
            Ok(ErrorEstimate { value, exact: true, interval: None, samples_per_case: 0, z: None })
        }
        ErrorMode::MonteCarlo { samples, seed } => {
            let xi_s: Vec<WeightedIndex<f64>> = (0..cases).map(|c| sampler(sch.xi.row(c))).collect();
            let t_s: Vec<WeightedIndex<f64>> = (0..t.inputs()).map(|a| sampler(t.row(a))).collect();
            Ok(mc_max(cases, samples, seed, |c, rng| {
                let a = xi_s[c].sample(rng);
                let y = t_s[a].sample(rng);
                sch.zeta(c / nm, y) != sch.messages[c % nm]
            }))
        }
    }
}

/// e(φ, ψ) = max_x P[ψ(Y) ≠ x] for Y generated by φ(·|x) and T.
pub fn code_error(phi: &DiscreteChannel, psi: &[usize], t: &DiscreteChannel) -> Result<f64, WiretapError> {
    let pt = phi.concat(t)?;
    if pt.outputs() != psi.len() {
        return Err(WiretapError::Chain(format!("ψ expects {} outputs, T has {}", psi.len(), pt.outputs())));
    }
    Ok((0..pt.inputs())
        .map(|x| 1.0 - pt.row(x).iter().enumerate().filter(|(y, _)| psi[*y] == x).map(|(_, v)| v).sum::<f64>())
        .fold(0.0, f64::max)
        .max(0.0))
}

/// The seeded eavesdropper observation: for each (s, m), the law of Z,
/// with seeds uniform.
#[derive(Debug, Clone)]
pub struct EavesdropperLaw {
    seeds: usize,
    messages: usize,
    /// Rows indexed s·|M| + m.
    law: DiscreteChannel,
}

impl EavesdropperLaw {
    pub fn new(seeds: usize, messages: usize, law: DiscreteChannel) -> Result<Self, WiretapError> {
        if law.inputs() != seeds * messages || seeds == 0 || messages == 0 {
            return Err(WiretapError::Chain(format!(
                "law has {} rows, expected {seeds}·{messages}",
                law.inputs()
            )));
        }
        Ok(Self { seeds, messages, law })
    }

    pub fn seeds(&self) -> usize {
        self.seeds
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn law(&self) -> &DiscreteChannel {
        &self.law
    }

    /// P_{ZS|M=m} as a vector indexed s·|Z| + z.
    pub fn joint_given(&self, m: usize) -> Vec<f64> {
        let nz = self.law.outputs();
        let w = 1.0 / self.seeds as f64;
        let mut v = Vec::with_capacity(self.seeds * nz);
        for s in 0..self.seeds {
            v.extend(self.law.row(s * self.messages + m).iter().map(|p| p * w));
        }
        v
    }

    /// The channel m ↦ (s, z), outputs indexed s·|Z| + z.
    pub fn leakage_channel(&self, budget: usize) -> Result<DiscreteChannel, WiretapError> {
        let needed = self.messages as u128 * self.seeds as u128 * self.law.outputs() as u128;
        check_budget(needed, budget)?;
        let density = (0..self.messages).flat_map(|m| self.joint_given(m)).collect();
        Ok(DiscreteChannel::from_flat(self.messages, self.seeds * self.law.outputs(), density)?)
    }

    /// Keeps the listed messages in the given order.
    pub fn restrict(&self, kept: &[usize]) -> Result<Self, WiretapError> {
        if kept.is_empty() || kept.iter().any(|&m| m >= self.messages) {
            return Err(WiretapError::Parameter("restriction must name existing messages".into()));
        }
        let nz = self.law.outputs();
        let mut density = Vec::with_capacity(self.seeds * kept.len() * nz);
        for s in 0..self.seeds {
            for &m in kept {
                density.extend_from_slice(self.law.row(s * self.messages + m));
            }
        }
        Self::new(self.seeds, kept.len(), DiscreteChannel::from_flat(self.seeds * kept.len(), nz, density)?)
    }

    /// ‖P_{ZS|m} − P_{ZS}‖ for each message, P_{ZS} at uniform messages.
    pub fn per_message_tv(&self) -> Vec<f64> {
        let joints: Vec<Vec<f64>> = (0..self.messages).map(|m| self.joint_given(m)).collect();
        let n = joints[0].len();
        let avg: Vec<f64> = (0..n).map(|i| joints.iter().map(|j| j[i]).sum::<f64>() / self.messages as f64).collect();
        joints.iter().map(|j| infodiv::tv(j, &avg)).collect()
    }

    /// L_str^TV = ‖P_{ZSM} − P_{ZS}⊗P_M‖ at uniform M.
    pub fn strong_tv(&self) -> f64 {
        self.per_message_tv().iter().sum::<f64>() / self.messages as f64
    }

    /// max over message pairs of ‖P_{ZS|m} − P_{ZS|m'}‖.
    pub fn max_pairwise_tv(&self) -> f64 {
        let joints: Vec<Vec<f64>> = (0..self.messages).map(|m| self.joint_given(m)).collect();
        let mut best = 0.0f64;
        for a in 0..self.messages {
            for b in a + 1..self.messages {
                best = best.max(infodiv::tv(&joints[a], &joints[b]));
            }
        }
        best
    }

    /// (L_sem, L_str) in bits; L_sem by Blahut–Arimoto at gap `tol`.
    pub fn leakage(&self, budget: usize, tol: f64) -> Result<ExactLeakage, WiretapError> {
        let k = self.leakage_channel(budget)?;
        let uniform = vec![1.0 / self.messages as f64; self.messages];
        let l_str = crate::channels::mutual_information(&uniform, &k)?;
        let cap = infodiv::capacity_ba(&k, tol)?;
        Ok(ExactLeakage {
            l_sem: cap.capacity,
            l_sem_lower: cap.lower,
            l_str,
            iterations: cap.iterations,
            converged: cap.converged,
            optimal_input: cap.input,
        })
    }
}

/// Exact leakages of a seeded code.
#[derive(Debug, Clone, Serialize)]
pub struct ExactLeakage {
    /// Upper end of the Blahut–Arimoto bracket for max_P I(M ∧ Z, S).
    pub l_sem: f64,
    pub l_sem_lower: f64,
    /// I(M ∧ Z, S) at uniform M.
    pub l_str: f64,
    pub iterations: usize,
    pub converged: bool,
    pub optimal_input: Vec<f64>,
}

/// (L_sem, L_str) of Π through U.
pub fn leakage_exact(sch: &WiretapScheme, u: &DiscreteChannel, budget: usize, tol: f64) -> Result<ExactLeakage, WiretapError> {
    sch.eavesdropper_law(u)?.leakage(budget, tol)
}

/// D(Q_{f,m}W‖P_X W|P_S) for the i-th message, W = φU.
pub fn leakage_per_message(sch: &WiretapScheme, u: &DiscreteChannel, i: usize) -> Result<f64, WiretapError> {
    let w = sch.eavesdropper_channel(u)?;
    message_divergence(sch.function(), &w, sch.messages()[i])
}

/// D(Q_{f,m}W‖P_X W|P_S) for an output m of f and W on the inputs of f.
pub fn message_divergence<F: SeededFunction + ?Sized>(f: &F, w: &DiscreteChannel, m: usize) -> Result<f64, WiretapError> {
    if w.inputs() != f.input_count() {
        return Err(WiretapError::Chain(format!("W has {} inputs, f has {}", w.inputs(), f.input_count())));
    }
    let q = crate::bri::qfm_channel(f, m)?;
    let k = q.concat(w)?;
    let px = vec![1.0 / w.inputs() as f64; w.inputs()];
    let reference = infodiv::output_measure(w, &px);
    let ps = vec![1.0 / f.seed_count() as f64; f.seed_count()];
    Ok(infodiv::cond_kl(&k, &reference, &ps))
}

/// (1/ln 2)·λ₂·2^{D₂^ε} + ε log(|X|/d_S) − (1−ε)log(1−ε).
pub fn spectral_leakage_bound(lambda2: f64, d2eps: f64, eps: f64, x_size: usize, d_s: usize) -> f64 {
    lambda2 * d2eps.exp2() / LN_2 + eps * (x_size as f64 / d_s as f64).log2() - (1.0 - eps) * (1.0 - eps).log2()
}

/// The bound for a (d_S, d_X)-biregular Ramanujan function with |X|/d_S = 2^k:
/// (√(d_S−1)+√(d_X−1))²/(d_S d_X ln 2)·2^{D₂^ε} + εk − (1−ε)log(1−ε).
pub fn ramanujan_bound(d_s: usize, d_x: usize, d2eps: f64, eps: f64, k: u32) -> f64 {
    let r = ramanujan_threshold(d_s, d_x);
    r * r / ((d_s * d_x) as f64 * LN_2) * d2eps.exp2() + eps * k as f64 - (1.0 - eps) * (1.0 - eps).log2()
}

/// The coset function's bound: the spectral bound with λ₂ replaced by (k/b)²2^{−b},
/// d_S = 2^b and |X| = 2^ℓ − 1.
pub fn coset_bound(cb: &CosetBri, d2eps: f64, eps: f64) -> f64 {
    spectral_leakage_bound(cb.eigenvalue_cap(), d2eps, eps, cb.ctx().order(), 1 << cb.b())
}

fn check_smoothing_eps(eps: f64) -> Result<(), WiretapError> {
    if eps > 0.0 && eps < 1.0 - 1.0 / E {
        Ok(())
    } else {
        Err(WiretapError::Eps(eps))
    }
}

/// One evaluation of the leakage bound for a message.
#[derive(Debug, Clone, Serialize)]
pub struct EvBound {
    pub m: usize,
    pub eps: f64,
    pub lambda2: f64,
    pub d2eps: f64,
    pub trimmed_entries: usize,
    pub bound: f64,
    pub divergence: f64,
    pub holds: bool,
}

/// η(f, m, W) for the i-th message at one ε, alongside the exact divergence.
pub fn ev_ub_bound(
    sch: &WiretapScheme,
    u: &DiscreteChannel,
    i: usize,
    eps: f64,
    strategy: SmoothingStrategy,
) -> Result<EvBound, WiretapError> {
    check_smoothing_eps(eps)?;
    let w = sch.eavesdropper_channel(u)?;
    let sm = infodiv::smooth_renyi2(&w, eps, strategy)?;
    message_bound(sch.function(), &w, sch.messages()[i], eps, sm.value, sm.trim.dropped_count())
}

fn message_bound<F: SeededFunction + ?Sized>(
    f: &F,
    w: &DiscreteChannel,
    m: usize,
    eps: f64,
    d2eps: f64,
    trimmed_entries: usize,
) -> Result<EvBound, WiretapError> {
    let lambda2 = f.lambda2(m)?;
    let bound = spectral_leakage_bound(lambda2, d2eps, eps, f.input_count(), f.degrees().0);
    let divergence = message_divergence(f, w, m)?;
    Ok(EvBound { m, eps, lambda2, d2eps, trimmed_entries, bound, divergence, holds: divergence <= bound + 1e-6 })
}

/// Bounds for every message at each ε of `eps_list` (greedy nested trims).
/// Returns, per message, the evaluations in the order of `eps_list`.
pub fn ev_ub_sweep(sch: &WiretapScheme, u: &DiscreteChannel, eps_list: &[f64]) -> Result<Vec<Vec<EvBound>>, WiretapError> {
    for &e in eps_list {
        check_smoothing_eps(e)?;
    }
    let w = sch.eavesdropper_channel(u)?;
    let smoothed = infodiv::smooth_renyi2_sweep(&w, eps_list)?;
    let f = sch.function();
    sch.messages()
        .par_iter()
        .map(|&m| {
            let lambda2 = f.lambda2(m)?;
            let divergence = message_divergence(f, &w, m)?;
            Ok(smoothed
                .iter()
                .map(|sm| {
                    let bound = spectral_leakage_bound(lambda2, sm.value, sm.eps, f.input_count(), f.degrees().0);
                    EvBound {
                        m,
                        eps: sm.eps,
                        lambda2,
                        d2eps: sm.value,
                        trimmed_entries: sm.trim.dropped_count(),
                        bound,
                        divergence,
                        holds: divergence <= bound + 1e-6,
                    }
                })
                .collect())
        })
        .collect()
}

/// Per-message bound data, exact leakages and error of a scheme.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageReport {
    pub messages: Vec<MessageLeakage>,
    pub max_bound: f64,
    pub l_sem: Option<f64>,
    pub l_str: Option<f64>,
    pub exact_skipped: Option<String>,
    pub error: Option<f64>,
    pub code_error: Option<f64>,
    pub ordering_holds: Option<bool>,
    pub failures: Vec<String>,
}

/// One message's divergence and best bound over the ε sweep.
#[derive(Debug, Clone, Serialize)]
pub struct MessageLeakage {
    pub m: usize,
    pub label: String,
    pub divergence: f64,
    pub lambda2: f64,
    pub best: EvBound,
}

/// Everything [`LeakageReport`] lists, with exact leakage skipped (and
/// noted) when it exceeds `budget`.
pub fn leakage_report(
    sch: &WiretapScheme,
    t: Option<&DiscreteChannel>,
    u: &DiscreteChannel,
    eps_list: &[f64],
    budget: usize,
    tol: f64,
) -> Result<LeakageReport, WiretapError> {
    let sweep = ev_ub_sweep(sch, u, eps_list)?;
    let mut failures = Vec::new();
    let messages: Vec<MessageLeakage> = sweep
        .into_iter()
        .map(|evals| {
            for e in evals.iter().filter(|e| !e.holds) {
                failures.push(format!("message {}: divergence {} exceeds bound {} at ε = {}", e.m, e.divergence, e.bound, e.eps));
            }
            let best = evals.into_iter().min_by(|a, b| a.bound.total_cmp(&b.bound)).expect("nonempty ε list");
            MessageLeakage {
                m: best.m,
                label: sch.function().output_label(best.m),
                divergence: best.divergence,
                lambda2: best.lambda2,
                best,
            }
        })
        .collect();
    let max_bound = messages.iter().map(|m| m.best.bound).fold(f64::NEG_INFINITY, f64::max);
    let (l_sem, l_str, exact_skipped) = match leakage_exact(sch, u, budget, tol) {
        Ok(l) => (Some(l.l_sem), Some(l.l_str), None),
        Err(WiretapError::Budget { needed, budget }) => {
            (None, None, Some(format!("exact leakage needs {needed} entries, budget {budget}")))
        }
        Err(e) => return Err(e),
    };
    let ordering_holds = l_sem.zip(l_str).map(|(sem, st)| st <= sem + 1e-6 && sem <= max_bound + 1e-6);
    if ordering_holds == Some(false) {
        failures.push(format!("leakage ordering violated: L_str {l_str:?}, L_sem {l_sem:?}, max bound {max_bound}"));
    }
    let (error, code_err) = match t {
        Some(t) => (
            Some(error_probability(sch, t, ErrorMode::Exact)?.value),
            Some(code_error(sch.phi(), sch.psi(), t)?),
        ),
        None => (None, None),
    };
    if let (Some(e), Some(c)) = (error, code_err) {
        if e > c + 1e-9 {
            failures.push(format!("scheme error {e} exceeds code error {c}"));
        }
    }
    Ok(LeakageReport { messages, max_bound, l_sem, l_str, exact_skipped, error, code_error: code_err, ordering_holds, failures })
}

fn check_seed_embedding(sch: &WiretapScheme) -> Result<(), WiretapError> {
    let (ns, nx) = (sch.seed_count(), sch.function().input_count());
    if ns > nx {
        Err(WiretapError::SeedEmbedding { seeds: ns, inputs: nx })
    } else {
        Ok(())
    }
}

/// Rate factor and error/leakage upper bounds of the seed-reuse code R_N.
#[derive(Debug, Clone, Serialize)]
pub struct SeedReuseBounds {
    pub blocks: usize,
    pub rate_factor: f64,
    pub code_error: f64,
    pub scheme_error: f64,
    pub error_bound: f64,
    pub scheme_l_sem: f64,
    pub leakage_bound: f64,
}

/// N/(N+1), e(φ,ψ) + N·e(Π) and N·L_sem(Π).
pub fn seed_reuse_bounds(
    sch: &WiretapScheme,
    t: &DiscreteChannel,
    u: &DiscreteChannel,
    blocks: usize,
    budget: usize,
    tol: f64,
) -> Result<SeedReuseBounds, WiretapError> {
    check_seed_embedding(sch)?;
    if blocks == 0 {
        return Err(WiretapError::Parameter("at least one block".into()));
    }
    let code = code_error(sch.phi(), sch.psi(), t)?;
    let scheme = error_probability(sch, t, ErrorMode::Exact)?.value;
    let l_sem = leakage_exact(sch, u, budget, tol)?.l_sem;
    Ok(SeedReuseBounds {
        blocks,
        rate_factor: blocks as f64 / (blocks + 1) as f64,
        code_error: code,
        scheme_error: scheme,
        error_bound: code + blocks as f64 * scheme,
        scheme_l_sem: l_sem,
        leakage_bound: blocks as f64 * l_sem,
    })
}

fn tuple_digits(mut c: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for j in (0..len).rev() {
        d[j] = c % base;
        c /= base;
    }
    d
}

/// The channel (m₁,…,m_N) ↦ (z₀,…,z_N) of R_N; the seed s is sent as the
/// code input x = s and then reused for N blocks. Inputs and outputs are
/// mixed-radix with the first symbol most significant.
pub fn seed_reuse_leakage_channel(
    sch: &WiretapScheme,
    u: &DiscreteChannel,
    blocks: usize,
    budget: usize,
) -> Result<DiscreteChannel, WiretapError> {
    check_seed_embedding(sch)?;
    let nm = sch.messages().len();
    let nz = u.outputs();
    let ns = sch.seed_count();
    let rows = (nm as u128).checked_pow(blocks as u32);
    let cols = (nz as u128).checked_pow(blocks as u32 + 1);
    let needed = rows.zip(cols).and_then(|(r, c)| r.checked_mul(c)).unwrap_or(u128::MAX);
    check_budget(needed, budget)?;
    let (rows, cols) = (rows.unwrap() as usize, cols.unwrap() as usize);
    let head = sch.phi().concat(u)?;
    let body = sch.xi().concat(u)?;
    let density: Vec<f64> = (0..rows)
        .into_par_iter()
        .flat_map_iter(|r| {
            let ms = tuple_digits(r, nm, blocks);
            let mut row = vec![0.0; cols];
            for s in 0..ns {
                let mut acc = head.row(s).to_vec();
                for &m in &ms {
                    let next = body.row(s * nm + m);
                    let mut grown = Vec::with_capacity(acc.len() * nz);
                    for &a in &acc {
                        grown.extend(next.iter().map(|b| a * b));
                    }
                    acc = grown;
                }
                for (o, v) in row.iter_mut().zip(acc) {
                    *o += v / ns as f64;
                }
            }
            row
        })
        .collect();
    Ok(DiscreteChannel::from_flat(rows, cols, density)?)
}

/// L_sem(R_N) = max_P I(M^N ∧ Z^{N+1}) by Blahut–Arimoto.
pub fn seed_reuse_leakage_exact(
    sch: &WiretapScheme,
    u: &DiscreteChannel,
    blocks: usize,
    budget: usize,
    tol: f64,
) -> Result<f64, WiretapError> {
    let k = seed_reuse_leakage_channel(sch, u, blocks, budget)?;
    Ok(infodiv::capacity_ba(&k, tol)?.capacity)
}

/// Maximal error over message tuples of R_N via
/// P[correct|m^N] = (1/|S|) Σ_s Σ_ŝ P(ŝ|s) Π_j c(s, ŝ, m_j).
pub fn seed_reuse_error_exact(sch: &WiretapScheme, t: &DiscreteChannel, blocks: usize, budget: usize) -> Result<f64, WiretapError> {
    check_seed_embedding(sch)?;
    sch.check_main(t)?;
    let nm = sch.messages().len();
    let ns = sch.seed_count();
    let tuples = (nm as u128).checked_pow(blocks as u32).unwrap_or(u128::MAX);
    check_budget(tuples.saturating_mul((ns * ns) as u128), budget)?;
    let head = sch.phi().concat(t)?;
    // P(ŝ|s); decoded code inputs outside the seed range are errors.
    let mut seed_dec = vec![0.0; ns * ns];
    for s in 0..ns {
        for (y, &v) in head.row(s).iter().enumerate() {
            let x = sch.psi()[y];
            if x < ns {
                seed_dec[s * ns + x] += v;
            }
        }
    }
    let body = sch.xi().concat(t)?;
    let mut c = vec![0.0; ns * ns * nm];
    for s in 0..ns {
        for sh in 0..ns {
            for (i, &m) in sch.messages().iter().enumerate() {
                c[(s * ns + sh) * nm + i] = body
                    .row(s * nm + i)
                    .iter()
                    .enumerate()
                    .filter(|(y, _)| sch.zeta(sh, *y) == m)
                    .map(|(_, v)| v)
                    .sum();
            }
        }
    }
    let worst = (0..tuples as usize)
        .into_par_iter()
        .map(|r| {
            let ms = tuple_digits(r, nm, blocks);
            let mut correct = 0.0;
            for s in 0..ns {
                for sh in 0..ns {
                    let p = seed_dec[s * ns + sh];
                    if p > 0.0 {
                        correct += p * ms.iter().map(|&i| c[(s * ns + sh) * nm + i]).product::<f64>();
                    }
                }
            }
            1.0 - correct / ns as f64
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst.max(0.0))
}

/// Monte Carlo estimate of the maximal error of R_N, `samples` runs per
/// message tuple.
pub fn seed_reuse_error_mc(
    sch: &WiretapScheme,
    t: &DiscreteChannel,
    blocks: usize,
    samples: usize,
    seed: u64,
) -> Result<ErrorEstimate, WiretapError> {
    check_seed_embedding(sch)?;
    sch.check_main(t)?;
    let nm = sch.messages().len();
    let ns = sch.seed_count();
    let tuples = nm
        .checked_pow(blocks as u32)
        .filter(|&n| n <= 1 << 16)
        .ok_or_else(|| WiretapError::Parameter("too many message tuples for Monte Carlo".into()))?;
    let phi_s: Vec<WeightedIndex<f64>> = (0..ns).map(|s| sampler(sch.phi().row(s))).collect();
    let xi_s: Vec<WeightedIndex<f64>> = (0..sch.xi().inputs()).map(|c| sampler(sch.xi().row(c))).collect();
    let t_s: Vec<WeightedIndex<f64>> = (0..t.inputs()).map(|a| sampler(t.row(a))).collect();
    let seed_dist = rand::distributions::Uniform::new(0, ns);
    Ok(mc_max(tuples, samples, seed, |r, rng| {
        let ms = tuple_digits(r, nm, blocks);
        let s = seed_dist.sample(rng);
        let y0 = t_s[phi_s[s].sample(rng)].sample(rng);
        let sh = sch.psi()[y0];
        ms.iter().any(|&i| {
            let y = t_s[xi_s[s * nm + i].sample(rng)].sample(rng);
            sh >= ns || sch.zeta(sh, y) != sch.messages()[i]
        })
    }))
}

/// Outcome of [`expurgate`].
#[derive(Debug, Clone, Serialize)]
pub struct ExpurgationReport {
    pub kept: Vec<usize>,
    pub per_message_tv: Vec<f64>,
    pub strong_tv: f64,
    /// L_str of the original code, used as η.
    pub eta: f64,
    /// max pairwise ‖P_{ZS|m} − P_{ZS|m'}‖ over the kept messages, an upper
    /// bound on their semantic TV leakage.
    pub semantic_tv_upper: f64,
    /// Half of the above, attained by the two-point message distribution.
    pub semantic_tv_lower: f64,
    pub tv_bound_holds: bool,
    pub sqrt_bound_holds: bool,
    pub restricted_l_sem: f64,
    pub mi_bound: f64,
    /// Whether 6√η ≤ |M'|/e, the range where the bound is increasing in its
    /// argument.
    pub mi_bound_applicable: bool,
    pub mi_bound_holds: bool,
}

/// Keeps the ⌈|M|/2⌉ messages closest to the average view in total
/// variation (ties to the smaller index) and checks the TV and mutual
/// information leakage bounds for the restricted code.
pub fn expurgate(code: &EavesdropperLaw, budget: usize, tol: f64) -> Result<ExpurgationReport, WiretapError> {
    let tvs = code.per_message_tv();
    let mut order: Vec<usize> = (0..code.messages()).collect();
    order.sort_by(|&a, &b| tvs[a].total_cmp(&tvs[b]).then(a.cmp(&b)));
    let keep = code.messages().div_ceil(2);
    let mut kept: Vec<usize> = order[..keep].to_vec();
    kept.sort_unstable();
    let strong_tv = code.strong_tv();
    let eta = code.leakage(budget, tol)?.l_str.max(0.0);
    let restricted = code.restrict(&kept)?;
    let upper = restricted.max_pairwise_tv();
    let restricted_l_sem = restricted.leakage(budget, tol)?.l_sem;
    let t = 6.0 * eta.sqrt();
    let mi_bound = if t > 0.0 { -t * (t / keep as f64).log2() } else { 0.0 };
    Ok(ExpurgationReport {
        per_message_tv: tvs,
        strong_tv,
        eta,
        semantic_tv_upper: upper,
        semantic_tv_lower: upper / 2.0,
        tv_bound_holds: upper <= 4.0 * strong_tv + 1e-12,
        sqrt_bound_holds: upper <= t + 1e-12,
        restricted_l_sem,
        mi_bound,
        mi_bound_applicable: t <= keep as f64 / E,
        mi_bound_holds: restricted_l_sem <= mi_bound + 1e-9,
        kept,
    })
}

/// Parameters of one member of the Ramanujan BRI sequence.
#[derive(Debug, Clone, Serialize)]
pub struct SequencePlan {
    pub n: usize,
    pub k: u32,
    pub d: u64,
    pub clamped: bool,
    pub warning: Option<String>,
    pub log2_inputs: f64,
    pub log2_messages: f64,
    pub lambda2_cap: f64,
    /// log|M_n| / log|X_n|.
    pub rate_ratio: f64,
}

/// k_n = ⌊r(1−t)n⌋ and d_n = ⌊2^{t k_n/(1−t)}⌋, with d_n raised to 3 if
/// smaller.
pub fn plan_bri_sequence(r: f64, t: f64, n: usize) -> Result<SequencePlan, WiretapError> {
    if !(t >= 0.0 && t < 1.0) {
        return Err(WiretapError::Parameter(format!("t = {t} outside [0, 1)")));
    }
    if !(r >= 0.0 && r.is_finite()) || n == 0 {
        return Err(WiretapError::Parameter(format!("need r ≥ 0 and n ≥ 1, got r = {r}, n = {n}")));
    }
    let k = (r * (1.0 - t) * n as f64).floor() as u32;
    let exponent = t * k as f64 / (1.0 - t);
    if exponent >= 63.0 {
        return Err(WiretapError::Parameter(format!("degree 2^{exponent} too large")));
    }
    let raw = exponent.exp2().floor() as u64;
    let (d, clamped) = if raw < 3 { (3, true) } else { (raw, false) };
    let warning = clamped.then(|| format!("planned degree {raw} raised to 3"));
    let log2_inputs = k as f64 + (d as f64).log2();
    let cap = ramanujan_threshold(d as usize, d as usize).powi(2) / (d * d) as f64;
    Ok(SequencePlan {
        n,
        k,
        d,
        clamped,
        warning,
        log2_inputs,
        log2_messages: k as f64,
        lambda2_cap: cap,
        rate_ratio: k as f64 / log2_inputs,
    })
}

/// Which BRI family the trend experiment builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendFamily {
    /// Ramanujan tables when the planned degree is at least 3 and |X| is
    /// within the Ramanujan cap, coset functions otherwise.
    Auto,
    Ramanujan,
    Coset,
}

/// Configuration of [`trend_experiment`].
#[derive(Debug, Clone)]
pub struct TrendConfig {
    pub r: f64,
    pub t: f64,
    pub n_list: Vec<usize>,
    /// ε_n = 2^{−c·n}.
    pub c: f64,
    pub family: TrendFamily,
    pub ramanujan_cap: usize,
    pub decomposition: DecompositionOptions,
    pub seed: u64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            t: 0.5,
            n_list: vec![4, 6, 8, 10],
            c: 1.0,
            family: TrendFamily::Auto,
            ramanujan_cap: DEFAULT_RAMANUJAN_CAP,
            decomposition: DecompositionOptions::default(),
            seed: 0,
        }
    }
}

/// One blocklength of the trend table.
#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    pub n: usize,
    pub family: &'static str,
    pub field_degree: Option<u32>,
    pub subfield_degree: Option<u32>,
    pub planned_k: u32,
    pub planned_d: u64,
    pub inputs: usize,
    pub messages: usize,
    pub d_s: usize,
    pub rate: f64,
    pub lambda2: f64,
    pub eps: f64,
    pub d2eps: f64,
    pub bound: f64,
}

/// The trend table and its monotonicity verdict.
#[derive(Debug, Clone, Serialize)]
pub struct TrendTable {
    pub rows: Vec<TrendRow>,
    pub main_capacity: f64,
    pub eavesdropper_capacity: f64,
    pub hypothesis_met: bool,
    pub strictly_decreasing: bool,
    /// Set when the hypothesis holds but the bounds are not strictly
    /// decreasing.
    pub failure: Option<String>,
}

fn embed_rows(u_n: &DiscreteChannel, inputs: usize) -> Result<DiscreteChannel, WiretapError> {
    if inputs > u_n.inputs() {
        return Err(WiretapError::Parameter(format!("{inputs} code inputs exceed {} channel words", u_n.inputs())));
    }
    let density = u_n.density()[..inputs * u_n.outputs()].to_vec();
    Ok(DiscreteChannel::from_flat(inputs, u_n.outputs(), density)?)
}

fn coset_parameters(r: f64, t: f64, n: usize, q: usize) -> Option<(u32, u32)> {
    let max_l = ((r * n as f64).floor() as u32).min(20);
    (2..=max_l).rev().find_map(|l| {
        if (q as f64).powi(n as i32) < (1u64 << l) as f64 - 1.0 {
            return None;
        }
        (1..l)
            .filter(|b| l % b == 0)
            .min_by(|a, b| ((*a as f64 / l as f64) - t).abs().total_cmp(&((*b as f64 / l as f64) - t).abs()))
            .map(|b| (l, b))
    })
}

fn trend_row(cfg: &TrendConfig, u: &DiscreteChannel, n: usize) -> Result<TrendRow, WiretapError> {
    let plan = plan_bri_sequence(cfg.r, cfg.t, n)?;
    let u_n = u.memoryless_ext(n)?;
    let eps = (-cfg.c * n as f64).exp2();
    check_smoothing_eps(eps)?;
    let ram_inputs = (plan.d as u128) << plan.k;
    let use_ramanujan = match cfg.family {
        TrendFamily::Ramanujan => true,
        TrendFamily::Coset => false,
        TrendFamily::Auto => !plan.clamped && ram_inputs <= cfg.ramanujan_cap as u128 && ram_inputs <= u_n.inputs() as u128,
    };
    let (f, family, field_degree, subfield_degree): (Arc<dyn SeededFunction>, _, _, _) = if use_ramanujan {
        let d = plan.d as usize;
        let seed = cfg.seed ^ n as u64;
        let graphs = ramanujan_decomposition(d, d, plan.k as usize, seed, cfg.decomposition)?;
        (Arc::new(bri_from_graph_family(&graphs, None)?), "ramanujan", None, None)
    } else {
        let (l, b) = coset_parameters(cfg.r, cfg.t, n, u.inputs())
            .ok_or_else(|| WiretapError::Parameter(format!("no coset parameters fit blocklength {n}")))?;
        let ctx = Arc::new(FieldCtx::new(l, None)?);
        (Arc::new(CosetBri::build(ctx, b, None)?), "coset", Some(l), Some(b))
    };
    let w = embed_rows(&u_n, f.input_count())?;
    let sm = infodiv::smooth_renyi2(&w, eps, SmoothingStrategy::Greedy)?;
    let lambda2 = f
        .regularity_set()
        .par_iter()
        .map(|&m| f.lambda2(m))
        .collect::<Result<Vec<f64>, BriError>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let (d_s, _) = f.degrees();
    let messages = f.regularity_set().len();
    Ok(TrendRow {
        n,
        family,
        field_degree,
        subfield_degree,
        planned_k: plan.k,
        planned_d: plan.d,
        inputs: f.input_count(),
        messages,
        d_s,
        rate: (messages as f64).log2() / n as f64,
        lambda2,
        eps,
        d2eps: sm.value,
        bound: spectral_leakage_bound(lambda2, sm.value, eps, f.input_count(), d_s),
    })
}

/// For each blocklength, builds the planned BRI function, embeds its inputs
/// into U^n as the first |X| words, and evaluates the leakage bound at
/// ε = 2^{−cn}. Strict decrease is required only when t·r exceeds the
/// capacity of U.
pub fn trend_experiment(t_ch: &DiscreteChannel, u: &DiscreteChannel, cfg: &TrendConfig) -> Result<TrendTable, WiretapError> {
    if t_ch.inputs() != u.inputs() {
        return Err(WiretapError::Chain("T and U must share their input alphabet".into()));
    }
    let mut ns = cfg.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let rows = ns
        .par_iter()
        .map(|&n| trend_row(cfg, u, n))
        .collect::<Result<Vec<_>, _>>()?;
    let main_capacity = infodiv::capacity_ba(t_ch, infodiv::DEFAULT_CAPACITY_TOL)?.capacity;
    let eavesdropper_capacity = infodiv::capacity_ba(u, infodiv::DEFAULT_CAPACITY_TOL)?.capacity;
    let hypothesis_met = cfg.t * cfg.r > eavesdropper_capacity;
    let strictly_decreasing = rows.windows(2).all(|w| w[1].bound < w[0].bound);
    let failure = (hypothesis_met && !strictly_decreasing).then(|| {
        let v: Vec<String> = rows.iter().map(|r| format!("n={}: {}", r.n, r.bound)).collect();
        format!("bounds not strictly decreasing: {}", v.join(", "))
    });
    Ok(TrendTable { rows, main_capacity, eavesdropper_capacity, hypothesis_met, strictly_decreasing, failure })
}
