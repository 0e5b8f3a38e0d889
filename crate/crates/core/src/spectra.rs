//! Dense symmetric eigenvalues by cyclic Jacobi rotations, the
//! second-largest eigenvalue modulus of stochastic-like matrices, and the
//! quadratic-form bound for symmetric stochastic matrices.

use thiserror::Error;

/// Largest matrix dimension accepted by the eigensolver.
pub const MAX_DIM: usize = 4096;

/// Default accuracy target for eigenvalues.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Absolute gap used to cluster eigenvalues when counting multiplicities.
pub const CLUSTER_GAP: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("expected {expected} entries for dimension {n}, got {got}")]
    Shape { n: usize, expected: usize, got: usize },
    #[error("dimension {0} exceeds the spectral cap {MAX_DIM}")]
    TooLarge(usize),
    #[error("row sums are not constant: row {row} sums to {sum}, row 0 to {first}")]
    RowSums { row: usize, sum: f64, first: f64 },
}

/// A real symmetric matrix stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Validates symmetry to within 1e-12 relative to the largest entry.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, SpectraError> {
        if data.len() != n * n {
            return Err(SpectraError::Shape { n, expected: n * n, got: data.len() });
        }
        let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(SpectraError::Asymmetric { i, j, a, b });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Quadratic form wᵀMw.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.n);
        (0..self.n)
            .map(|i| w[i] * self.row(i).iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

/// All eigenvalues of `m` in descending order.
///
/// Cyclic Jacobi sweeps run until the off-diagonal Frobenius norm drops below
/// `tol`; by Weyl's inequality every returned value is then within `tol` of
/// the true spectrum. A hard cap of 100 sweeps guards against a `tol` below
/// rounding noise.
pub fn sym_eigenvalues(m: &SymMatrix, tol: f64) -> Result<Vec<f64>, SpectraError> {
    let n = m.n;
    if n > MAX_DIM {
        return Err(SpectraError::TooLarge(n));
    }
    let mut a = m.data.clone();
    for _sweep in 0..100 {
        if off_diagonal_norm(&a, n) < tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Groups sorted eigenvalues into clusters whose consecutive members differ
/// by less than `gap`; returns (mean, multiplicity) per cluster.
pub fn clusters(eigs: &[f64], gap: f64) -> Vec<(f64, usize)> {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] >= gap {
            if i > start {
                let mean = sorted[start..i].iter().sum::<f64>() / (i - start) as f64;
                out.push((mean, i - start));
            }
            start = i;
        }
    }
    out
}

/// Multiplicity of the eigenvalue cluster lying within `gap` of `value`.
pub fn multiplicity_near(eigs: &[f64], value: f64, gap: f64) -> usize {
    clusters(eigs, gap)
        .into_iter()
        .filter(|(c, _)| (c - value).abs() < gap)
        .map(|(_, k)| k)
        .sum()
}

/// Checks that all row sums agree to within 1e-9 and returns the common sum.
pub fn constant_row_sum(m: &SymMatrix) -> Result<f64, SpectraError> {
    let sums = m.row_sums();
    let first = sums.first().copied().unwrap_or(0.0);
    for (row, &sum) in sums.iter().enumerate() {
        if (sum - first).abs() > 1e-9 {
            return Err(SpectraError::RowSums { row, sum, first });
        }
    }
    Ok(first)
}

/// max(|μ₂|, |μₙ|) once the eigenvalue belonging to the all-one vector has
/// been set aside.
pub fn second_largest_modulus(m: &SymMatrix) -> Result<f64, SpectraError> {
    let r = constant_row_sum(m)?;
    let eig = sym_eigenvalues(m, DEFAULT_TOL)?;
    Ok(second_modulus_from_spectrum(&eig, r))
}

/// Second-largest modulus from a spectrum containing the row sum `r`.
pub fn second_modulus_from_spectrum(eig: &[f64], r: f64) -> f64 {
    if eig.len() <= 1 {
        return 0.0;
    }
    let skip = eig
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - r).abs().total_cmp(&(b.1 - r).abs()))
        .map(|(i, _)| i)
        .unwrap();
    eig.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
}

/// Right side minus left side of wᵀPw ≤ λ₂·wᵀw + (𝟏ᵀw)²/n.
pub fn quadratic_bound_gap(p: &SymMatrix, lambda2: f64, w: &[f64]) -> f64 {
    let n = p.n as f64;
    let ww: f64 = w.iter().map(|v| v * v).sum();
    let s: f64 = w.iter().sum();
    lambda2 * ww + s * s / n - p.quadratic_form(w)
}

/// Whether the quadratic-form bound holds within 1e-9 for a symmetric
/// stochastic `p`; matrices without constant row sums report `false`.
pub fn quadratic_bound_check(p: &SymMatrix, w: &[f64]) -> bool {
    match second_largest_modulus(p) {
        Ok(l2) => quadratic_bound_gap(p, l2, w) >= -1e-9,
        Err(_) => false,
    }
}
