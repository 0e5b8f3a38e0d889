//! Divergences of (sub)normalized measures in bits, ε-smoothing by output
//! trimming, numeric checks of the divergence inequalities, and a
//! Blahut–Arimoto capacity solver.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channels::{ChannelError, DiscreteChannel};

/// Largest number of positive entries enumerated by the exhaustive smoother.
pub const EXHAUSTIVE_DECISION_LIMIT: usize = 24;

/// Default Blahut–Arimoto stopping gap in bits.
pub const DEFAULT_CAPACITY_TOL: f64 = 1e-9;

/// Iteration cap for Blahut–Arimoto.
pub const MAX_BA_ITERATIONS: usize = 2_000_000;

const MASS_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InfodivError {
    #[error("smoothing parameter ε = {0} outside [0, 1)")]
    InvalidEps(f64),
    #[error("exhaustive smoothing needs {0} decisions, limit is {EXHAUSTIVE_DECISION_LIMIT}")]
    TooLarge(usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("capacity needs an ordinary channel")]
    Subnormalized,
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// A nonnegative density on a finite set with total mass at most one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure {
    density: Vec<f64>,
    probability: bool,
}

impl Measure {
    pub fn subnormalized(density: Vec<f64>) -> Result<Self, InfodivError> {
        if density.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(InfodivError::InvalidMeasure("negative or non-finite density".into()));
        }
        let mass: f64 = density.iter().sum();
        if mass <= 0.0 || mass > 1.0 + 1e-12 {
            return Err(InfodivError::InvalidMeasure(format!("mass {mass} outside (0, 1]")));
        }
        Ok(Self { density, probability: false })
    }

    pub fn probability(density: Vec<f64>) -> Result<Self, InfodivError> {
        let mut m = Self::subnormalized(density)?;
        let mass = m.mass();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(InfodivError::InvalidMeasure(format!("probability with mass {mass}")));
        }
        m.probability = true;
        Ok(m)
    }

    pub fn uniform(n: usize) -> Self {
        Self { density: vec![1.0 / n as f64; n], probability: true }
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }
}

impl AsRef<[f64]> for Measure {
    fn as_ref(&self) -> &[f64] {
        &self.density
    }
}

/// D(M₁‖M₂) = Σ m₁ log(m₁/m₂).
pub fn kl(m1: impl AsRef<[f64]>, m2: impl AsRef<[f64]>) -> f64 {
    let (a, b) = (m1.as_ref(), m2.as_ref());
    assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.0 {
            if y <= 0.0 {
                return f64::INFINITY;
            }
            s += x * (x / y).log2();
        }
    }
    s
}

/// D₂(M₁‖M₂) = log Σ m₁²/m₂.
pub fn renyi2(m1: impl AsRef<[f64]>, m2: impl AsRef<[f64]>) -> f64 {
    let (a, b) = (m1.as_ref(), m2.as_ref());
    assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.0 {
            if y <= 0.0 {
                return f64::INFINITY;
            }
            s += x * x / y;
        }
    }
    s.log2()
}

/// ‖M₁ − M₂‖ = Σ |m₁ − m₂|, without the factor ½.
pub fn tv(m1: impl AsRef<[f64]>, m2: impl AsRef<[f64]>) -> f64 {
    let (a, b) = (m1.as_ref(), m2.as_ref());
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// D(W̃‖M|P) = Σ_x p(x) D(W̃(·|x)‖M).
pub fn cond_kl(w: &DiscreteChannel, m: impl AsRef<[f64]>, p: &[f64]) -> f64 {
    let m = m.as_ref();
    assert_eq!(p.len(), w.inputs());
    p.iter()
        .enumerate()
        .filter(|(_, &px)| px > 0.0)
        .map(|(x, &px)| px * kl(w.row(x), m))
        .sum()
}

/// D₂(W̃‖M|P) = log Σ_x p(x) 2^{D₂(W̃(·|x)‖M)}.
pub fn cond_renyi2(w: &DiscreteChannel, m: impl AsRef<[f64]>, p: &[f64]) -> f64 {
    let m = m.as_ref();
    assert_eq!(p.len(), w.inputs());
    let mut s = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px > 0.0 {
            let d = renyi2(w.row(x), m);
            if d.is_infinite() {
                return f64::INFINITY;
            }
            s += px * d.exp2();
        }
    }
    s.log2()
}

/// P·W̃ for a possibly subnormalized channel.
pub fn output_measure(w: &DiscreteChannel, p: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; w.outputs()];
    for (x, &px) in p.iter().enumerate() {
        for (z, &v) in w.row(x).iter().enumerate() {
            q[z] += px * v;
        }
    }
    q
}

/// D₂(W̃‖P_X W̃|P_X) for P_X uniform on the inputs of W̃, evaluated as
/// log Σ_z (Σ_x w̃²)/(Σ_x w̃).
pub fn channel_renyi2(w: &DiscreteChannel) -> f64 {
    let (s1, s2) = column_sums(w, None);
    renyi2_from_columns(&s1, &s2)
}

/// log Σ_z max_x w̃(z|x).
pub fn max_information(w: &DiscreteChannel) -> f64 {
    let mut col = vec![0.0f64; w.outputs()];
    for x in 0..w.inputs() {
        for (z, &v) in w.row(x).iter().enumerate() {
            col[z] = col[z].max(v);
        }
    }
    col.iter().sum::<f64>().log2()
}

fn column_sums(w: &DiscreteChannel, trim: Option<&TrimSet>) -> (Vec<f64>, Vec<f64>) {
    let nz = w.outputs();
    let mut s1 = vec![0.0; nz];
    let mut s2 = vec![0.0; nz];
    for x in 0..w.inputs() {
        for (z, &v) in w.row(x).iter().enumerate() {
            if trim.map_or(true, |t| t.is_kept(x, z)) {
                s1[z] += v;
                s2[z] += v * v;
            }
        }
    }
    (s1, s2)
}

fn renyi2_from_columns(s1: &[f64], s2: &[f64]) -> f64 {
    s1.iter()
        .zip(s2)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| b / a)
        .sum::<f64>()
        .log2()
}

/// A set T ⊆ X × Z of kept channel entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrimSet {
    inputs: usize,
    outputs: usize,
    kept: Vec<bool>,
}

impl TrimSet {
    pub fn full(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, kept: vec![true; inputs * outputs] }
    }

    pub fn from_kept(inputs: usize, outputs: usize, kept: Vec<bool>) -> Option<Self> {
        (kept.len() == inputs * outputs).then_some(Self { inputs, outputs, kept })
    }

    pub fn is_kept(&self, x: usize, z: usize) -> bool {
        self.kept[x * self.outputs + z]
    }

    pub fn drop_entry(&mut self, x: usize, z: usize) {
        self.kept[x * self.outputs + z] = false;
    }

    /// The kept outputs of input `x`, ascending.
    pub fn kept_outputs(&self, x: usize) -> Vec<usize> {
        (0..self.outputs).filter(|&z| self.is_kept(x, z)).collect()
    }

    pub fn dropped_count(&self) -> usize {
        self.kept.iter().filter(|k| !**k).count()
    }

    /// Mass removed from each row of `w`.
    pub fn dropped_mass(&self, w: &DiscreteChannel) -> Vec<f64> {
        (0..self.inputs)
            .map(|x| {
                w.row(x)
                    .iter()
                    .enumerate()
                    .filter(|(z, _)| !self.is_kept(x, *z))
                    .map(|(_, v)| v)
                    .sum()
            })
            .collect()
    }

    /// Whether every row keeps mass at least 1 − ε.
    pub fn is_feasible(&self, w: &DiscreteChannel, eps: f64) -> bool {
        w.row_masses()
            .iter()
            .zip(self.dropped_mass(w))
            .all(|(m, d)| m - d >= 1.0 - eps - MASS_SLACK)
    }
}

/// w_T(z|x) = w(z|x)·1[(x,z) ∈ T].
pub fn subnormalize(w: &DiscreteChannel, trim: &TrimSet) -> DiscreteChannel {
    assert_eq!((trim.inputs, trim.outputs), (w.inputs(), w.outputs()));
    let density = w
        .density()
        .iter()
        .zip(&trim.kept)
        .map(|(&v, &k)| if k { v } else { 0.0 })
        .collect();
    DiscreteChannel::subnormalized_from_flat(w.inputs(), w.outputs(), density).expect("trimming keeps masses in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingStrategy {
    Greedy,
    Exhaustive,
}

/// A feasible trim together with the smoothed quantity it achieves.
#[derive(Debug, Clone)]
pub struct Smoothed {
    pub eps: f64,
    pub value: f64,
    pub trim: TrimSet,
}

fn check_eps(eps: f64) -> Result<(), InfodivError> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(InfodivError::InvalidEps(eps))
    }
}

/// Trims entries while the objective strictly decreases. Each pass ranks
/// the kept entries by their current improvement and then accepts them in
/// that order, re-evaluating each against the state at acceptance time.
fn greedy_renyi2_from(w: &DiscreteChannel, eps: f64, trim: &mut TrimSet) {
    let (mut s1, mut s2) = column_sums(w, Some(trim));
    let mut live = vec![0usize; w.outputs()];
    for x in 0..w.inputs() {
        for (z, &a) in w.row(x).iter().enumerate() {
            if a > 0.0 && trim.is_kept(x, z) {
                live[z] += 1;
            }
        }
    }
    let mut budget: Vec<f64> = w
        .row_masses()
        .iter()
        .zip(trim.dropped_mass(w))
        .map(|(m, d)| eps - (1.0 - (m - d)))
        .collect();
    let delta = |a: f64, c1: f64, c2: f64, last: bool| -> f64 {
        if last {
            -c2 / c1
        } else {
            (c2 - a * a) / (c1 - a) - c2 / c1
        }
    };
    loop {
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        for x in 0..w.inputs() {
            for (z, &a) in w.row(x).iter().enumerate() {
                if a > 0.0 && trim.is_kept(x, z) && a <= budget[x] + MASS_SLACK {
                    let d = delta(a, s1[z], s2[z], live[z] == 1);
                    if d < 0.0 {
                        cands.push((d, x, z));
                    }
                }
            }
        }
        if cands.is_empty() {
            break;
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut changed = false;
        for (_, x, z) in cands {
            let a = w.get(x, z);
            if a > budget[x] + MASS_SLACK {
                continue;
            }
            // Require a relative improvement so rounding cannot cycle.
            let d = delta(a, s1[z], s2[z], live[z] == 1);
            if d < -1e-15 * (s2[z] / s1[z]).max(f64::MIN_POSITIVE) {
                trim.drop_entry(x, z);
                budget[x] -= a;
                s1[z] -= a;
                s2[z] -= a * a;
                live[z] -= 1;
                if live[z] == 0 {
                    s1[z] = 0.0;
                    s2[z] = 0.0;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn greedy_maxinfo_from(w: &DiscreteChannel, eps: f64, trim: &mut TrimSet) {
    let nx = w.inputs();
    let mut budget: Vec<f64> = w
        .row_masses()
        .iter()
        .zip(trim.dropped_mass(w))
        .map(|(m, d)| eps - (1.0 - (m - d)))
        .collect();
    let column_group = |trim: &TrimSet, z: usize| -> (f64, Vec<usize>) {
        let max = (0..nx).filter(|&x| trim.is_kept(x, z)).map(|x| w.get(x, z)).fold(0.0, f64::max);
        let group = if max > 0.0 {
            (0..nx)
                .filter(|&x| trim.is_kept(x, z) && (w.get(x, z) - max).abs() <= 1e-12 * max)
                .collect()
        } else {
            Vec::new()
        };
        (max, group)
    };
    loop {
        let mut groups: Vec<(f64, usize)> = (0..w.outputs())
            .map(|z| (column_group(trim, z).0, z))
            .filter(|(m, _)| *m > 0.0)
            .collect();
        groups.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut changed = false;
        for (_, z) in groups {
            let (_, group) = column_group(trim, z);
            if !group.is_empty() && group.iter().all(|&x| w.get(x, z) <= budget[x] + MASS_SLACK) {
                for x in group {
                    budget[x] -= w.get(x, z);
                    trim.drop_entry(x, z);
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn positive_entries(w: &DiscreteChannel) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for x in 0..w.inputs() {
        for (z, &v) in w.row(x).iter().enumerate() {
            if v > 0.0 {
                e.push((x, z));
            }
        }
    }
    e
}

fn exhaustive<F>(w: &DiscreteChannel, eps: f64, value: F) -> Result<Smoothed, InfodivError>
where
    F: Fn(&DiscreteChannel, &TrimSet) -> f64 + Sync,
{
    let entries = positive_entries(w);
    if entries.len() > EXHAUSTIVE_DECISION_LIMIT {
        return Err(InfodivError::TooLarge(entries.len()));
    }
    let masses = w.row_masses();
    let build = |mask: u32| {
        let mut t = TrimSet::full(w.inputs(), w.outputs());
        for (i, &(x, z)) in entries.iter().enumerate() {
            if mask >> i & 1 == 1 {
                t.drop_entry(x, z);
            }
        }
        t
    };
    let feasible = |mask: u32| {
        let mut dropped = vec![0.0; w.inputs()];
        for (i, &(x, z)) in entries.iter().enumerate() {
            if mask >> i & 1 == 1 {
                dropped[x] += w.get(x, z);
            }
        }
        dropped.iter().zip(&masses).all(|(d, m)| m - d >= 1.0 - eps - MASS_SLACK)
    };
    let (best, mask) = (0..1u32 << entries.len())
        .into_par_iter()
        .filter(|&mask| feasible(mask))
        .map(|mask| (value(w, &build(mask)), mask))
        .reduce(
            || (f64::INFINITY, u32::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(Smoothed { eps, value: best, trim: build(mask) })
}

fn trimmed_renyi2(w: &DiscreteChannel, t: &TrimSet) -> f64 {
    let (s1, s2) = column_sums(w, Some(t));
    renyi2_from_columns(&s1, &s2)
}

fn trimmed_maxinfo(w: &DiscreteChannel, t: &TrimSet) -> f64 {
    max_information(&subnormalize(w, t))
}

/// D₂^ε(W‖P_X W|P_X) for P_X uniform, as the value of a feasible trim.
pub fn smooth_renyi2(w: &DiscreteChannel, eps: f64, strategy: SmoothingStrategy) -> Result<Smoothed, InfodivError> {
    check_eps(eps)?;
    match strategy {
        SmoothingStrategy::Greedy => {
            let mut trim = TrimSet::full(w.inputs(), w.outputs());
            greedy_renyi2_from(w, eps, &mut trim);
            Ok(Smoothed { eps, value: trimmed_renyi2(w, &trim), trim })
        }
        SmoothingStrategy::Exhaustive => exhaustive(w, eps, trimmed_renyi2),
    }
}

/// I_max^ε(W) as the value of a feasible trim.
pub fn smooth_maxinfo(w: &DiscreteChannel, eps: f64, strategy: SmoothingStrategy) -> Result<Smoothed, InfodivError> {
    check_eps(eps)?;
    match strategy {
        SmoothingStrategy::Greedy => {
            let mut trim = TrimSet::full(w.inputs(), w.outputs());
            greedy_maxinfo_from(w, eps, &mut trim);
            Ok(Smoothed { eps, value: trimmed_maxinfo(w, &trim), trim })
        }
        SmoothingStrategy::Exhaustive => exhaustive(w, eps, trimmed_maxinfo),
    }
}

fn sweep(
    w: &DiscreteChannel,
    eps_list: &[f64],
    step: fn(&DiscreteChannel, f64, &mut TrimSet),
    value: fn(&DiscreteChannel, &TrimSet) -> f64,
) -> Result<Vec<Smoothed>, InfodivError> {
    for &e in eps_list {
        check_eps(e)?;
    }
    let mut order: Vec<usize> = (0..eps_list.len()).collect();
    order.sort_by(|&a, &b| eps_list[a].total_cmp(&eps_list[b]));
    let mut trim = TrimSet::full(w.inputs(), w.outputs());
    let mut out: Vec<Option<Smoothed>> = vec![None; eps_list.len()];
    for i in order {
        step(w, eps_list[i], &mut trim);
        out[i] = Some(Smoothed { eps: eps_list[i], value: value(w, &trim), trim: trim.clone() });
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Greedy D₂^ε over several ε, each trim extending the one for the next
/// smaller ε; results follow the order of `eps_list`.
pub fn smooth_renyi2_sweep(w: &DiscreteChannel, eps_list: &[f64]) -> Result<Vec<Smoothed>, InfodivError> {
    sweep(w, eps_list, greedy_renyi2_from, trimmed_renyi2)
}

/// Nested greedy I_max^ε over several ε.
pub fn smooth_maxinfo_sweep(w: &DiscreteChannel, eps_list: &[f64]) -> Result<Vec<Smoothed>, InfodivError> {
    sweep(w, eps_list, greedy_maxinfo_from, trimmed_maxinfo)
}

/// Solution of max_P I(P, K).
#[derive(Debug, Clone, Serialize)]
pub struct Capacity {
    /// Upper end of the certified bracket, in bits.
    pub capacity: f64,
    pub lower: f64,
    pub upper: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn divergences_to_output(k: &DiscreteChannel, p: &[f64]) -> Vec<f64> {
    let q = output_measure(k, p);
    (0..k.inputs()).map(|x| kl(k.row(x), &q)).collect()
}

/// Blahut–Arimoto until max_x D(K_x‖PK) − log Σ_x p(x)2^{D(K_x‖PK)} < tol.
pub fn capacity_ba(k: &DiscreteChannel, tol: f64) -> Result<Capacity, InfodivError> {
    if k.is_subnormalized() {
        return Err(InfodivError::Subnormalized);
    }
    if !(tol > 0.0) {
        return Err(InfodivError::Tolerance(tol));
    }
    let n = k.inputs();
    let mut p = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    loop {
        let d = divergences_to_output(k, &p);
        // Exponents are shifted by the maximum to keep 2^D finite.
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = p.iter().zip(&d).map(|(pi, di)| pi * (di - upper).exp2()).collect();
        let total: f64 = weights.iter().sum();
        let lower = upper + total.log2();
        iterations += 1;
        let converged = upper - lower < tol;
        if converged || iterations >= MAX_BA_ITERATIONS {
            return Ok(Capacity { capacity: upper.max(0.0), lower: lower.max(0.0), upper: upper.max(0.0), input: p, iterations, converged });
        }
        p = weights.into_iter().map(|v| v / total).collect();
    }
}

/// KKT residual of a capacity solution: the largest excess of D(K_x‖PK)
/// over `c`, or the P-average deficit, whichever is larger.
pub fn kkt_residual(k: &DiscreteChannel, p: &[f64], c: f64) -> f64 {
    let d = divergences_to_output(k, p);
    let excess = d.iter().map(|v| v - c).fold(f64::NEG_INFINITY, f64::max);
    let deficit: f64 = p.iter().zip(&d).map(|(pi, di)| pi * (c - di).abs()).sum();
    excess.max(deficit)
}

/// Z₁(D₂(M₁‖M₂) − log Z₁) − D(M₁‖M₂).
pub fn nonnorm_gap(m1: &[f64], m2: &[f64]) -> f64 {
    let z1: f64 = m1.iter().sum();
    let d = kl(m1, m2);
    let d2 = renyi2(m1, m2);
    if d.is_infinite() && d2.is_infinite() {
        return 0.0;
    }
    z1 * (d2 - z1.log2()) - d
}

/// D₂(W̃‖M|P) − (1−ε)log(1−ε) − D(W̃‖M|P).
pub fn renyi_to_kl_gap(w: &DiscreteChannel, m: &[f64], p: &[f64], eps: f64) -> f64 {
    let c = -(1.0 - eps) * (1.0 - eps).log2();
    cond_renyi2(w, m, p) + c - cond_kl(w, m, p)
}

/// The same gap with −(1+ε)log(1−ε) in place of −(1−ε)log(1−ε). Rows
/// with D₂(W̃(·|s)‖M) < 0 can break the unrepaired form; the extra
/// −2ε log(1−ε) covers them whenever M has mass at most one.
pub fn renyi_to_kl_repaired_gap(w: &DiscreteChannel, m: &[f64], p: &[f64], eps: f64) -> f64 {
    renyi_to_kl_gap(w, m, p, eps) - 2.0 * eps * (1.0 - eps).log2()
}

/// min_s D₂(W̃(·|s)‖M) over rows with p(s) > 0.
pub fn min_row_renyi2(w: &DiscreteChannel, m: &[f64], p: &[f64]) -> f64 {
    (0..w.inputs())
        .filter(|&x| p[x] > 0.0)
        .map(|x| renyi2(w.row(x), m))
        .fold(f64::INFINITY, f64::min)
}

/// 2 ln 2 · D(P‖Q) − ‖P − Q‖².
pub fn pinsker_gap(p: &[f64], q: &[f64]) -> f64 {
    2.0 * LN_2 * kl(p, q) - tv(p, q).powi(2)
}

/// −‖P_XY − P_X⊗P_Y‖ log(‖P_XY − P_X⊗P_Y‖/|X|) − I(X∧Y) for a joint
/// distribution stored row-major with |X| rows.
pub fn mi_tv_gap(joint: &[f64], nx: usize) -> f64 {
    let ny = joint.len() / nx;
    let px: Vec<f64> = (0..nx).map(|x| joint[x * ny..(x + 1) * ny].iter().sum()).collect();
    let py: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| joint[x * ny + y]).sum()).collect();
    let prod: Vec<f64> = (0..nx * ny).map(|i| px[i / ny] * py[i % ny]).collect();
    let t = tv(joint, &prod);
    let bound = if t > 0.0 { -t * (t / nx as f64).log2() } else { 0.0 };
    bound - kl(joint, &prod)
}

/// Outcome of one family of inequality checks.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityTally {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
    /// Smallest observed right-minus-left gap.
    pub worst_gap: f64,
}

impl InequalityTally {
    fn new(name: &'static str) -> Self {
        Self { name, checked: 0, failures: 0, worst_gap: f64::INFINITY }
    }

    fn record(&mut self, gap: f64, slack: f64) {
        self.checked += 1;
        self.worst_gap = self.worst_gap.min(gap);
        if gap.is_nan() || gap < -slack {
            self.failures += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Random probability vector from a flat Dirichlet, with occasional zeros.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    if n > 1 && rng.gen_bool(0.2) {
        v[rng.gen_range(0..n)] = 0.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Results of [`check_div_inequalities`].
#[derive(Debug, Clone, Serialize)]
pub struct DivInequalityReport {
    pub samples: usize,
    pub support: usize,
    pub seed: u64,
    pub slack: f64,
    pub tallies: Vec<InequalityTally>,
}

impl DivInequalityReport {
    pub fn passed(&self) -> bool {
        self.tallies.iter().all(InequalityTally::passed)
    }

    pub fn tally(&self, name: &str) -> Option<&InequalityTally> {
        self.tallies.iter().find(|t| t.name == name)
    }
}

/// Draws `samples` random instances on `support` points and checks the
/// subnormalized KL/Rényi-2 inequality, its conditional form, Pinsker, and
/// the mutual-information/total-variation bound.
///
/// For the conditional form the rows of W̃ have masses in [1−ε, 1] and the
/// reference measure is P·W̃, where ε is drawn from (0, 1 − e^{-1}). It is
/// tallied three ways: on every instance, on the instances whose rows all
/// have D₂(W̃(·|s)‖M) ≥ 0, and in the repaired form on every instance.
pub fn check_div_inequalities(samples: usize, support: usize, seed: u64, slack: f64) -> DivInequalityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nonnorm = InequalityTally::new("subnormalized_kl_renyi2");
    let mut cond = InequalityTally::new("conditional_kl_renyi2");
    let mut cond_nonneg = InequalityTally::new("conditional_kl_renyi2_nonnegative_rows");
    let mut cond_repaired = InequalityTally::new("conditional_kl_renyi2_repaired");
    let mut pinsker = InequalityTally::new("pinsker");
    let mut mitv = InequalityTally::new("mutual_information_tv");
    let eps_max = 1.0 - (-1.0f64).exp();
    for _ in 0..samples {
        let eps = rng.gen_range(1e-6..eps_max);
        let z1 = rng.gen_range(1.0 - eps..=1.0);
        let z2 = rng.gen_range(1.0 - eps..=1.0);
        let m1: Vec<f64> = random_distribution(&mut rng, support).iter().map(|v| v * z1).collect();
        let m2: Vec<f64> = random_distribution(&mut rng, support).iter().map(|v| v * z2).collect();
        nonnorm.record(nonnorm_gap(&m1, &m2), slack);

        let rows = rng.gen_range(1..=4usize);
        let mut dens = Vec::with_capacity(rows * support);
        for _ in 0..rows {
            let z = rng.gen_range(1.0 - eps..=1.0);
            dens.extend(random_distribution(&mut rng, support).iter().map(|v| v * z));
        }
        let w = DiscreteChannel::subnormalized_from_flat(rows, support, dens).expect("masses in range");
        let p = random_distribution(&mut rng, rows);
        let m = output_measure(&w, &p);
        let gap = renyi_to_kl_gap(&w, &m, &p, eps);
        cond.record(gap, slack);
        if min_row_renyi2(&w, &m, &p) >= 0.0 {
            cond_nonneg.record(gap, slack);
        }
        cond_repaired.record(renyi_to_kl_repaired_gap(&w, &m, &p, eps), slack);

        let p1 = random_distribution(&mut rng, support);
        let p2 = random_distribution(&mut rng, support);
        pinsker.record(pinsker_gap(&p1, &p2), slack);

        let nx = rng.gen_range(2..=4usize);
        let ny = support.max(2);
        let joint = random_distribution(&mut rng, nx * ny);
        mitv.record(mi_tv_gap(&joint, nx), slack);
    }
    DivInequalityReport { samples, support, seed, slack, tallies: vec![nonnorm, cond, cond_nonneg, cond_repaired, pinsker, mitv] }
}
