//! The seeded coset BRI function β on F*_{2^ℓ} × F*_{2^ℓ}: β(s,x) = m when
//! s·x ∈ V + m, where V = GF(2^b) is the subfield and N a complementary
//! GF(2)-subspace. Eigenvalues come from character sums of the Cayley sum
//! graph on ℤ_{2^ℓ−1}.
//!
//! Also hosts the affine comparison component g(s₁,m,v) = s₁·(m+v)
//! used as a comparison baseline.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bri::{BriError, SeededFunction};
use crate::channels::{ChannelError, DiscreteChannel};
use crate::gf2e::{gf2_rank, FieldCtx, FieldElem, FieldError};
use crate::infodiv;

/// Slack allowed between a computed eigenvalue and its analytic cap.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CosetError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("basis of N is not a complement of V: {0}")]
    NotComplement(String),
    #[error("message index {0} is not in the regularity set")]
    NotInRegularitySet(usize),
    #[error("zero argument")]
    ZeroArgument,
    #[error("λ₂ = {value} exceeds the cap {bound} for message {m}")]
    BoundViolated { m: usize, value: f64, bound: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// The coset construction for a field GF(2^ℓ) and subfield degree b | ℓ.
#[derive(Debug, Clone)]
pub struct CosetBri {
    ctx: Arc<FieldCtx>,
    b: u32,
    basis_v: Vec<FieldElem>,
    basis_n: Vec<FieldElem>,
    regularity: Vec<usize>,
    /// Coordinates of each polynomial-basis vector in the basis N ∪ V; the
    /// low k bits are the N part.
    coords: Vec<u32>,
}

fn greedy_extend(start: &[u32], candidates: impl IntoIterator<Item = u32>, target: usize) -> Vec<u32> {
    let mut chosen = Vec::new();
    let mut all = start.to_vec();
    for c in candidates {
        if all.len() - start.len() == target {
            break;
        }
        all.push(c);
        if gf2_rank(&all) == all.len() {
            chosen.push(c);
        } else {
            all.pop();
        }
    }
    chosen
}

impl CosetBri {
    /// V is the canonical subfield; N defaults to the greedy completion of
    /// a V basis by the monomials 1, x, x², … in increasing degree.
    pub fn build(ctx: Arc<FieldCtx>, b: u32, basis_n: Option<Vec<FieldElem>>) -> Result<Self, CosetError> {
        let l = ctx.degree();
        if b == 0 || l % b != 0 {
            return Err(FieldError::NotDivisor { b, degree: l }.into());
        }
        let k = (l - b) as usize;
        let sub: Vec<u32> = (1..ctx.size() as u32)
            .filter(|&x| ctx.in_subfield(b, x).unwrap_or(false))
            .collect();
        let basis_v = greedy_extend(&[], sub, b as usize);
        debug_assert_eq!(basis_v.len(), b as usize);
        let basis_n = match basis_n {
            Some(n) => {
                if n.len() != k {
                    return Err(CosetError::NotComplement(format!("{} vectors given, need {k}", n.len())));
                }
                for &v in &n {
                    ctx.elem(v)?;
                }
                let mut all = basis_v.clone();
                all.extend(&n);
                if gf2_rank(&all) != l as usize {
                    return Err(CosetError::NotComplement("V and N do not span the field directly".into()));
                }
                n
            }
            None => greedy_extend(&basis_v, (0..l).map(|i| 1u32 << i), k),
        };
        let mut joint: Vec<u32> = basis_n.clone();
        joint.extend(&basis_v);
        let coords = solve_coordinates(&joint, l);
        let mut cb = Self { ctx, b, basis_v, basis_n, regularity: Vec::new(), coords };
        cb.regularity = (0..1usize << k)
            .filter(|&c| cb.ctx.generates_field(b, cb.n_element(c)).expect("b divides ℓ"))
            .collect();
        Ok(cb)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn k(&self) -> u32 {
        self.ctx.degree() - self.b
    }

    pub fn basis_v(&self) -> &[FieldElem] {
        &self.basis_v
    }

    pub fn basis_n(&self) -> &[FieldElem] {
        &self.basis_n
    }

    /// The element of N with coordinate vector `c`.
    pub fn n_element(&self, c: usize) -> FieldElem {
        self.basis_n
            .iter()
            .enumerate()
            .filter(|(j, _)| c >> j & 1 == 1)
            .fold(0, |acc, (_, &v)| acc ^ v)
    }

    /// Every element of V = GF(2^b).
    pub fn v_elements(&self) -> Vec<FieldElem> {
        (0..1usize << self.b)
            .map(|c| {
                self.basis_v
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| c >> j & 1 == 1)
                    .fold(0, |acc, (_, &v)| acc ^ v)
            })
            .collect()
    }

    fn coordinates(&self, y: FieldElem) -> u32 {
        let mut c = 0;
        let mut y = y;
        while y != 0 {
            let i = y.trailing_zeros();
            c ^= self.coords[i as usize];
            y &= y - 1;
        }
        c
    }

    /// Coordinate index in N of the N-component of `y`.
    pub fn n_index(&self, y: FieldElem) -> usize {
        (self.coordinates(y) & ((1u32 << self.k()) - 1)) as usize
    }

    /// Elements m ∈ N (as field elements) for which GF(2^b)(m) is the whole field.
    pub fn regularity_elements(&self) -> Vec<FieldElem> {
        self.regularity.iter().map(|&c| self.n_element(c)).collect()
    }

    /// β(s, x): the N-component of s·x.
    pub fn beta_eval(&self, s: FieldElem, x: FieldElem) -> Result<FieldElem, CosetError> {
        if s == 0 || x == 0 {
            return Err(CosetError::ZeroArgument);
        }
        self.ctx.elem(s)?;
        self.ctx.elem(x)?;
        Ok(self.n_element(self.n_index(self.ctx.mul(s, x))))
    }

    /// (k/b)²·2^{−b}.
    pub fn eigenvalue_cap(&self) -> f64 {
        let (k, b) = (self.k() as f64, self.b as f64);
        (k / b).powi(2) * 2f64.powi(-(self.b as i32))
    }

    /// Connection set D = {log y : y ∈ (V + m) ∖ {0}} in ℤ_{2^ℓ−1}.
    pub fn connection_set(&self, m: usize) -> Vec<u64> {
        let me = self.n_element(m);
        let mut d: Vec<u64> = self
            .v_elements()
            .into_iter()
            .filter_map(|v| self.ctx.log(v ^ me).map(u64::from))
            .collect();
        d.sort_unstable();
        d
    }

    /// λ₂(β, m) from the character sums |Σ_{d∈D} θ^d| over the nontrivial
    /// (2^ℓ−1)-th roots of unity θ.
    pub fn cayley_lambda2(&self, m: usize) -> Result<CayleyEigen, CosetError> {
        if self.regularity.binary_search(&m).is_err() {
            return Err(CosetError::NotInRegularitySet(m));
        }
        let n = self.ctx.order() as u64;
        let d = self.connection_set(m);
        let degree = d.len() as f64;
        let (cos, sin): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|t| {
                let a = 2.0 * PI * t as f64 / n as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        let max_sum = (1..n)
            .into_par_iter()
            .map(|j| {
                let (mut re, mut im) = (0.0, 0.0);
                for &e in &d {
                    let t = (j * e % n) as usize;
                    re += cos[t];
                    im += sin[t];
                }
                (re * re + im * im).sqrt()
            })
            .reduce(|| 0.0, f64::max);
        let lambda2 = (max_sum / degree).powi(2);
        let bound = self.eigenvalue_cap();
        if lambda2 > bound + BOUND_SLACK {
            return Err(CosetError::BoundViolated { m, value: lambda2, bound });
        }
        Ok(CayleyEigen { m, lambda2, bound, max_character_sum: max_sum, degree: d.len() })
    }

    /// Encodes m ∈ N with the component g(s₁,m,v) = s₁·(m+v), v uniform on
    /// V, and adds s₂.
    pub fn hm_component_encode<R: Rng + ?Sized>(
        &self,
        s1: FieldElem,
        s2: FieldElem,
        m: FieldElem,
        rng: &mut R,
    ) -> Result<FieldElem, CosetError> {
        if s1 == 0 {
            return Err(CosetError::ZeroArgument);
        }
        let vs = self.v_elements();
        let v = vs[rng.gen_range(0..vs.len())];
        Ok(self.ctx.mul(s1, m ^ v) ^ s2)
    }

    /// Inverts [`Self::hm_component_encode`]: the N-component of
    /// s₁^{-1}·(y + s₂).
    pub fn hm_component_decode(&self, s1: FieldElem, s2: FieldElem, y: FieldElem) -> Result<FieldElem, CosetError> {
        let inv = self.ctx.inv(s1)?;
        Ok(self.n_element(self.n_index(self.ctx.mul(inv, y ^ s2))))
    }

    /// Channel from m ∈ N to (s₁, s₂, z) for the component followed by W,
    /// with seeds uniform on F* × F. Outputs are indexed
    /// ((s₁−1)·2^ℓ + s₂)·|Z| + z.
    pub fn hm_leakage_channel(&self, w: &DiscreteChannel) -> Result<DiscreteChannel, CosetError> {
        let q = self.ctx.size();
        if w.inputs() != q {
            return Err(ChannelError::AlphabetMismatch(format!("W needs {q} inputs, has {}", w.inputs())).into());
        }
        let nz = w.outputs();
        let vs = self.v_elements();
        let msgs = 1usize << self.k();
        let seeds = (q - 1) * q;
        let mut density = vec![0.0; msgs * seeds * nz];
        let weight = 1.0 / (seeds * vs.len()) as f64;
        for c in 0..msgs {
            let m = self.n_element(c);
            for s1 in 1..q as u32 {
                for s2 in 0..q as u32 {
                    let base = c * seeds * nz + ((s1 as usize - 1) * q + s2 as usize) * nz;
                    for &v in &vs {
                        let x = self.ctx.mul(s1, m ^ v) ^ s2;
                        for (z, &p) in w.row(x as usize).iter().enumerate() {
                            density[base + z] += weight * p;
                        }
                    }
                }
            }
        }
        Ok(DiscreteChannel::from_flat(msgs, seeds * nz, density)?)
    }
}

/// (1/ln 2)·2^{−(b − D₂(W‖P_X W|P_X))} with P_X uniform on the inputs of W.
pub fn hm_bound(b: u32, w: &DiscreteChannel) -> f64 {
    let d2 = infodiv::channel_renyi2(w);
    (d2 - b as f64).exp2() / LN_2
}

fn solve_coordinates(joint: &[u32], l: u32) -> Vec<u32> {
    // Reduced echelon form of the basis, tracking which basis vectors make
    // up each row.
    let mut rows: Vec<(u32, u32)> = joint.iter().enumerate().map(|(j, &v)| (v, 1u32 << j)).collect();
    let mut pivots: Vec<(u32, u32, u32)> = Vec::new();
    while let Some((mut v, mut c)) = rows.pop() {
        for &(p, pv, pc) in &pivots {
            if v >> p & 1 == 1 {
                v ^= pv;
                c ^= pc;
            }
        }
        assert!(v != 0, "basis vectors are independent");
        let p = 31 - v.leading_zeros();
        for entry in pivots.iter_mut() {
            if entry.1 >> p & 1 == 1 {
                entry.1 ^= v;
                entry.2 ^= c;
            }
        }
        pivots.push((p, v, c));
    }
    (0..l)
        .map(|i| {
            let mut y = 1u32 << i;
            let mut c = 0;
            for &(p, pv, pc) in &pivots {
                if y >> p & 1 == 1 {
                    y ^= pv;
                    c ^= pc;
                }
            }
            debug_assert_eq!(y, 0);
            c
        })
        .collect()
}

/// Character-sum eigenvalue data for one message.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CayleyEigen {
    pub m: usize,
    pub lambda2: f64,
    pub bound: f64,
    pub max_character_sum: f64,
    pub degree: usize,
}

impl SeededFunction for CosetBri {
    fn seed_count(&self) -> usize {
        self.ctx.order()
    }
    fn input_count(&self) -> usize {
        self.ctx.order()
    }
    fn output_count(&self) -> usize {
        1usize << self.k()
    }
    fn eval(&self, s: usize, x: usize) -> usize {
        self.n_index(self.ctx.mul(s as u32 + 1, x as u32 + 1))
    }
    fn regularity_set(&self) -> &[usize] {
        &self.regularity
    }
    fn degrees(&self) -> (usize, usize) {
        if self.b == self.ctx.degree() {
            (self.ctx.order(), self.ctx.order())
        } else {
            (1 << self.b, 1 << self.b)
        }
    }
    fn output_label(&self, m: usize) -> String {
        format!("{:x}", self.n_element(m))
    }
    fn lambda2(&self, m: usize) -> Result<f64, BriError> {
        self.cayley_lambda2(m)
            .map(|e| e.lambda2)
            .map_err(|_| BriError::NotInRegularitySet(m))
    }
}

/// Seed index of a nonzero field element.
pub fn seed_index(e: FieldElem) -> usize {
    e as usize - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coset(l: u32, b: u32) -> CosetBri {
        CosetBri::build(Arc::new(FieldCtx::new(l, None).unwrap()), b, None).unwrap()
    }

    #[test]
    fn regularity_set_sizes() {
        assert_eq!(coset(8, 4).regularity_set().len(), 15);
        assert_eq!(coset(4, 2).regularity_set().len(), 3);
        assert_eq!(coset(6, 6).regularity_set().len(), 1);
        assert!(CosetBri::build(Arc::new(FieldCtx::new(8, None).unwrap()), 3, None).is_err());
    }

    #[test]
    fn beta_properties() {
        let cb = coset(8, 4);
        let ctx = cb.ctx();
        for m in cb.regularity_elements() {
            for s in [1u32, 7, 200] {
                let x = ctx.mul(ctx.inv(s).unwrap(), m);
                assert_eq!(cb.beta_eval(s, x).unwrap(), m);
            }
        }
        assert_eq!(cb.beta_eval(3, 77).unwrap(), cb.beta_eval(77, 3).unwrap());
        assert!(cb.beta_eval(0, 1).is_err());
    }

    #[test]
    fn complement_validation() {
        let ctx = Arc::new(FieldCtx::new(4, None).unwrap());
        // 1 lies in V = GF(4), so {1, x} cannot complement it.
        assert!(matches!(CosetBri::build(ctx.clone(), 2, Some(vec![1, 2])), Err(CosetError::NotComplement(_))));
        assert!(CosetBri::build(ctx.clone(), 2, Some(vec![2])).is_err());
        let ok = CosetBri::build(ctx, 2, Some(vec![0b0010, 0b1000])).unwrap();
        assert_eq!(ok.basis_n(), &[0b0010, 0b1000]);
    }

    #[test]
    fn trivial_character_is_excluded() {
        let cb = coset(8, 4);
        let m = cb.regularity_set()[0];
        let e = cb.cayley_lambda2(m).unwrap();
        assert_eq!(e.degree, 16);
        assert!(e.max_character_sum < 16.0);
        assert!(e.lambda2 <= 0.0625 + BOUND_SLACK);
        let outside = (0..16).find(|c| cb.regularity_set().binary_search(c).is_err()).unwrap();
        assert!(cb.cayley_lambda2(outside).is_err());
    }

    #[test]
    fn hm_decode_recovers_message() {
        use rand::SeedableRng;
        let cb = coset(6, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for c in 0..16 {
            let m = cb.n_element(c);
            for s1 in [1u32, 5, 63] {
                for s2 in [0u32, 9] {
                    let y = cb.hm_component_encode(s1, s2, m, &mut rng).unwrap();
                    assert_eq!(cb.hm_component_decode(s1, s2, y).unwrap(), m);
                }
            }
        }
        assert!(cb.hm_component_encode(0, 0, 0, &mut rng).is_err());
    }
}
