//! Discrete channels as dense row-stochastic (or subnormalized) matrices,
//! their compositions and memoryless extensions, mutual information and the
//! closed-form secrecy capacities used for comparison.

use std::io::{Read, Write};

use thiserror::Error;

/// Largest output alphabet produced by a memoryless extension.
pub const MAX_EXTENSION_OUTPUTS: usize = 1 << 20;

/// Largest number of matrix entries produced by a memoryless extension.
pub const MAX_EXTENSION_ENTRIES: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("row {row}: {msg}")]
    MalformedRow { row: usize, msg: String },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("memoryless extension to blocklength {n} exceeds the budget: {what}")]
    Budget { n: usize, what: String },
    #[error("grid of {points} points exceeds the search budget")]
    GridTooLarge { points: u128 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// A channel from `inputs` symbols to `outputs` symbols with densities
/// stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    inputs: usize,
    outputs: usize,
    density: Vec<f64>,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    subnormalized: bool,
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_rows(inputs: usize, outputs: usize, density: &[f64], subnormalized: bool) -> Result<(), ChannelError> {
    if density.len() != inputs * outputs {
        return Err(ChannelError::MalformedRow {
            row: 0,
            msg: format!("expected {} entries, got {}", inputs * outputs, density.len()),
        });
    }
    for row in 0..inputs {
        let r = &density[row * outputs..(row + 1) * outputs];
        if let Some(v) = r.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(ChannelError::MalformedRow { row, msg: format!("invalid density {v}") });
        }
        let sum: f64 = r.iter().sum();
        let ok = if subnormalized { sum > 0.0 && sum <= 1.0 + 1e-12 } else { (sum - 1.0).abs() <= 1e-12 };
        if !ok {
            return Err(ChannelError::MalformedRow { row, msg: format!("row mass {sum}") });
        }
    }
    Ok(())
}

impl DiscreteChannel {
    /// An ordinary channel from row-major densities.
    pub fn from_flat(inputs: usize, outputs: usize, density: Vec<f64>) -> Result<Self, ChannelError> {
        check_rows(inputs, outputs, &density, false)?;
        Ok(Self {
            inputs,
            outputs,
            density,
            input_labels: default_labels(inputs),
            output_labels: default_labels(outputs),
            subnormalized: false,
        })
    }

    /// A subnormalized channel: every row mass in (0, 1].
    pub fn subnormalized_from_flat(inputs: usize, outputs: usize, density: Vec<f64>) -> Result<Self, ChannelError> {
        check_rows(inputs, outputs, &density, true)?;
        Ok(Self {
            inputs,
            outputs,
            density,
            input_labels: default_labels(inputs),
            output_labels: default_labels(outputs),
            subnormalized: true,
        })
    }

    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self, ChannelError> {
        let outputs = rows.first().map_or(0, Vec::len);
        if let Some(row) = rows.iter().position(|r| r.len() != outputs) {
            return Err(ChannelError::MalformedRow { row, msg: "ragged row".into() });
        }
        Self::from_flat(rows.len(), outputs, rows.concat())
    }

    /// Binary symmetric channel with crossover probability p ∈ [0, 1/2].
    pub fn bsc(p: f64) -> Result<Self, ChannelError> {
        if !(0.0..=0.5).contains(&p) {
            return Err(ChannelError::Parameter(format!("bsc crossover {p} outside [0, 1/2]")));
        }
        Self::from_flat(2, 2, vec![1.0 - p, p, p, 1.0 - p])
    }

    pub fn noiseless(n: usize) -> Self {
        Self::deterministic(&(0..n).collect::<Vec<_>>(), n).expect("identity map is valid")
    }

    /// The 0/1 channel of a function given as `map[input] = output`.
    pub fn deterministic(map: &[usize], outputs: usize) -> Result<Self, ChannelError> {
        let mut density = vec![0.0; map.len() * outputs];
        for (x, &z) in map.iter().enumerate() {
            if z >= outputs {
                return Err(ChannelError::MalformedRow { row: x, msg: format!("output {z} out of range") });
            }
            density[x * outputs + z] = 1.0;
        }
        Self::from_flat(map.len(), outputs, density)
    }

    /// A channel whose rows all equal `dist`.
    pub fn constant(inputs: usize, dist: &[f64]) -> Result<Self, ChannelError> {
        Self::from_flat(inputs, dist.len(), dist.repeat(inputs))
    }

    pub fn with_labels(mut self, input_labels: Vec<String>, output_labels: Vec<String>) -> Result<Self, ChannelError> {
        if input_labels.len() != self.inputs || output_labels.len() != self.outputs {
            return Err(ChannelError::AlphabetMismatch("label count".into()));
        }
        self.input_labels = input_labels;
        self.output_labels = output_labels;
        Ok(self)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.density[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn get(&self, x: usize, z: usize) -> f64 {
        self.density[x * self.outputs + z]
    }

    pub fn row_masses(&self) -> Vec<f64> {
        (0..self.inputs).map(|x| self.row(x).iter().sum()).collect()
    }

    /// The concatenation `self` then `next`: (VW)(z|x) = Σ_a v(a|x) w(z|a).
    /// The result is subnormalized if either factor is.
    pub fn concat(&self, next: &DiscreteChannel) -> Result<DiscreteChannel, ChannelError> {
        if self.outputs != next.inputs {
            return Err(ChannelError::AlphabetMismatch(format!(
                "first channel has {} outputs, second {} inputs",
                self.outputs, next.inputs
            )));
        }
        let mut density = vec![0.0; self.inputs * next.outputs];
        for x in 0..self.inputs {
            let out = &mut density[x * next.outputs..(x + 1) * next.outputs];
            for (a, &v) in self.row(x).iter().enumerate() {
                if v != 0.0 {
                    for (o, &w) in out.iter_mut().zip(next.row(a)) {
                        *o += v * w;
                    }
                }
            }
        }
        let subnormalized = self.subnormalized || next.subnormalized;
        let mut ch = if subnormalized {
            Self::subnormalized_from_flat(self.inputs, next.outputs, density)?
        } else {
            let mut ch = Self {
                inputs: self.inputs,
                outputs: next.outputs,
                density,
                input_labels: Vec::new(),
                output_labels: Vec::new(),
                subnormalized: false,
            };
            ch.renormalize_rounding();
            ch
        };
        ch.input_labels = self.input_labels.clone();
        ch.output_labels = next.output_labels.clone();
        Ok(ch)
    }

    // Products of stochastic matrices drift from unit row sums only by
    // rounding; rescale so the ordinary-channel invariant stays exact.
    fn renormalize_rounding(&mut self) {
        for x in 0..self.inputs {
            let row = &mut self.density[x * self.outputs..(x + 1) * self.outputs];
            let s: f64 = row.iter().sum();
            debug_assert!((s - 1.0).abs() < 1e-9);
            if s != 1.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
    }

    /// Blocklength-n memoryless extension; tuples are indexed with the first
    /// symbol most significant.
    pub fn memoryless_ext(&self, n: usize) -> Result<DiscreteChannel, ChannelError> {
        if n == 0 {
            return Err(ChannelError::Parameter("blocklength must be positive".into()));
        }
        let too_big = |what: String| ChannelError::Budget { n, what };
        let outs = (self.outputs as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        let ins = (self.inputs as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if outs > MAX_EXTENSION_OUTPUTS as u128 {
            return Err(too_big(format!("{outs} outputs > {MAX_EXTENSION_OUTPUTS}")));
        }
        if ins.saturating_mul(outs) > MAX_EXTENSION_ENTRIES as u128 {
            return Err(too_big(format!("{} entries > {MAX_EXTENSION_ENTRIES}", ins.saturating_mul(outs))));
        }
        let mut cur = self.clone();
        for _ in 1..n {
            cur = cur.tensor(self);
        }
        if n > 1 {
            cur.input_labels = default_labels(cur.inputs);
            cur.output_labels = default_labels(cur.outputs);
        }
        Ok(cur)
    }

    fn tensor(&self, other: &DiscreteChannel) -> DiscreteChannel {
        let inputs = self.inputs * other.inputs;
        let outputs = self.outputs * other.outputs;
        let mut density = vec![0.0; inputs * outputs];
        for a in 0..self.inputs {
            for b in 0..other.inputs {
                let row = &mut density[(a * other.inputs + b) * outputs..][..outputs];
                for (z1, &v) in self.row(a).iter().enumerate() {
                    for (z2, &w) in other.row(b).iter().enumerate() {
                        row[z1 * other.outputs + z2] = v * w;
                    }
                }
            }
        }
        DiscreteChannel {
            inputs,
            outputs,
            density,
            input_labels: Vec::new(),
            output_labels: Vec::new(),
            subnormalized: self.subnormalized || other.subnormalized,
        }
    }

    /// Output measure PW(z) = Σ_x p(x) w(z|x).
    pub fn pushforward(&self, p: &[f64]) -> Result<Vec<f64>, ChannelError> {
        if p.len() != self.inputs {
            return Err(ChannelError::AlphabetMismatch(format!(
                "distribution on {} points, channel has {} inputs",
                p.len(),
                self.inputs
            )));
        }
        let mut q = vec![0.0; self.outputs];
        for (x, &px) in p.iter().enumerate() {
            if px != 0.0 {
                for (qz, &w) in q.iter_mut().zip(self.row(x)) {
                    *qz += px * w;
                }
            }
        }
        Ok(q)
    }

    /// CSV with a header row of output labels and one row of densities per
    /// input.
    pub fn to_csv(&self) -> Result<String, ChannelError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.output_labels)?;
        for x in 0..self.inputs {
            w.write_record(self.row(x).iter().map(|v| format!("{v:?}")))?;
        }
        let bytes = w.into_inner().map_err(|e| ChannelError::Parameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<(), ChannelError> {
        out.write_all(self.to_csv()?.as_bytes())
            .map_err(|e| ChannelError::Parameter(e.to_string()))
    }

    pub fn from_csv(input: impl Read) -> Result<Self, ChannelError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
        let labels: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| ChannelError::MalformedRow { row: i, msg: format!("'{t}': {e}") })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != labels.len() {
                return Err(ChannelError::MalformedRow { row: i, msg: "row length differs from header".into() });
            }
            rows.push(row);
        }
        let ch = Self::from_matrix(&rows)?;
        let n = ch.inputs;
        ch.with_labels(default_labels(n), labels)
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()).sum::<f64>()
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// I(P, W) = Σ_x p(x) Σ_z w(z|x) log(w(z|x)/PW(z)) in bits.
pub fn mutual_information(p: &[f64], w: &DiscreteChannel) -> Result<f64, ChannelError> {
    let q = w.pushforward(p)?;
    let mut total = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px <= 0.0 {
            continue;
        }
        for (z, &v) in w.row(x).iter().enumerate() {
            if v > 0.0 {
                total += px * v * (v / q[z]).log2();
            }
        }
    }
    Ok(total.max(0.0))
}

fn simplex_grid(dim: usize, g: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    let used: usize = prefix.iter().sum();
    if prefix.len() + 1 == dim {
        prefix.push(g - used);
        out(prefix);
        prefix.pop();
        return;
    }
    for v in 0..=(g - used) {
        prefix.push(v);
        simplex_grid(dim, g, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r = 1u128;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Maps free coordinates onto the simplex by clipping and rescaling.
fn project(free: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = free.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let s: f64 = p.iter().sum();
    if s > 1.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
    let rest = (1.0 - p.iter().sum::<f64>()).max(0.0);
    p.push(rest);
    p
}

fn nelder_mead_max(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64, iters: usize) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.to_vec(), f(start))];
    for i in 0..d {
        let mut v = start.to_vec();
        v[i] += if v[i] + step <= 1.0 { step } else { -step };
        let fv = f(&v);
        simplex.push((v, fv));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if (best - worst).abs() < 1e-13 {
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|j| simplex[..d].iter().map(|s| s.0[j]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[d].0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(1.0);
        let fr = f(&xr);
        if fr > simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            simplex[d] = if fe > fr { (xe, fe) } else { (xr, fr) };
        } else if fr > simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let xc = along(-0.5);
            let fc = f(&xc);
            if fc > simplex[d].1 {
                simplex[d] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = s.0.iter().zip(&b).map(|(v, bb)| bb + 0.5 * (v - bb)).collect();
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    simplex.swap_remove(0)
}

/// Secrecy capacity of a more-capable pair: max over input distributions of
/// I(P,T) − I(P,U), by a simplex grid of resolution `grid` followed by one
/// Nelder–Mead refinement from the best grid point.
pub fn secrecy_capacity_more_capable(
    t: &DiscreteChannel,
    u: &DiscreteChannel,
    grid: usize,
) -> Result<(f64, Vec<f64>), ChannelError> {
    if t.inputs != u.inputs {
        return Err(ChannelError::AlphabetMismatch(format!("T has {} inputs, U has {}", t.inputs, u.inputs)));
    }
    if grid < 64 {
        return Err(ChannelError::Parameter(format!("grid resolution {grid} below 64")));
    }
    let a = t.inputs;
    if a == 0 {
        return Err(ChannelError::Parameter("empty input alphabet".into()));
    }
    let points = binomial((grid + a - 1) as u128, (a - 1) as u128);
    if points > 5_000_000 {
        return Err(ChannelError::GridTooLarge { points });
    }
    let objective = |p: &[f64]| -> f64 {
        mutual_information(p, t).unwrap_or(f64::NEG_INFINITY) - mutual_information(p, u).unwrap_or(0.0)
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; a]);
    simplex_grid(a, grid, &mut Vec::with_capacity(a), &mut |c| {
        let p: Vec<f64> = c.iter().map(|&v| v as f64 / grid as f64).collect();
        let v = objective(&p);
        if v > best.0 {
            best = (v, p);
        }
    });
    if a > 1 {
        let free = &best.1[..a - 1];
        let (x, v) = nelder_mead_max(&|y| objective(&project(y)), free, 1.0 / grid as f64, 400);
        if v > best.0 {
            best = (v, project(&x));
        }
    }
    Ok((best.0.max(0.0), best.1))
}

/// ½log(1+Γ/σ_T²) − ½log(1+Γ/σ_U²) when σ_T² ≥ σ_U², else 0. This
/// orientation is the reverse of the usual degradedness condition; the
/// arguments are not reordered.
pub fn gaussian_secrecy_capacity(gamma: f64, var_t: f64, var_u: f64) -> Result<f64, ChannelError> {
    if gamma < 0.0 || var_t <= 0.0 || var_u <= 0.0 {
        return Err(ChannelError::Parameter("need Γ ≥ 0 and positive variances".into()));
    }
    if var_t >= var_u {
        Ok(0.5 * (1.0 + gamma / var_t).log2() - 0.5 * (1.0 + gamma / var_u).log2())
    } else {
        Ok(0.0)
    }
}
