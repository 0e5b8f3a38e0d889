//! Arithmetic in binary extension fields GF(2^ℓ).
//!
//! Elements are stored as `u32` bit vectors in the polynomial basis: bit `i`
//! is the coefficient of `x^i`. Moduli carry the leading `x^ℓ` bit as well,
//! so a degree-ℓ modulus occupies ℓ+1 bits.

use thiserror::Error;

/// A field element in the polynomial basis of its context.
pub type FieldElem = u32;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {0} outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("modulus {modulus:#x} has degree {found}, expected {expected}")]
    ModulusDegree { modulus: u32, expected: u32, found: u32 },
    #[error("modulus {0:#x} is reducible over GF(2)")]
    Reducible(u32),
    #[error("element 0 has no inverse")]
    ZeroInverse,
    #[error("subfield degree {b} does not divide {degree}")]
    NotDivisor { b: u32, degree: u32 },
    #[error("value {value:#x} is not an element of GF(2^{degree})")]
    NotElement { value: u32, degree: u32 },
    #[error("q = {0} is not a power of two greater than one")]
    NotPowerOfTwo(u64),
    #[error("N_q(n) overflows for q = {q}, n = {n}")]
    CountOverflow { q: u64, n: u32 },
}

/// Degree of a nonzero GF(2) polynomial; `None` for the zero polynomial.
pub fn poly_degree(p: u64) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(63 - p.leading_zeros())
    }
}

/// Remainder of `a` modulo the nonzero polynomial `b`.
pub fn poly_rem(mut a: u64, b: u64) -> u64 {
    let db = poly_degree(b).expect("division by the zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Carry-less product of two polynomials whose degrees sum below 64.
pub fn poly_mul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    acc
}

/// Product of `a` and `b` reduced modulo `modulus` by shift-and-add.
pub fn poly_mulmod(a: u32, b: u32, modulus: u32) -> u32 {
    let deg = poly_degree(modulus as u64).expect("zero modulus");
    let top = 1u64 << deg;
    let m = modulus as u64;
    let mut a = a as u64;
    let mut b = b;
    let mut acc = 0u64;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= m;
        }
    }
    acc as u32
}

/// Irreducibility over GF(2) by trial division against every polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible(p: u32) -> bool {
    let Some(deg) = poly_degree(p as u64) else {
        return false;
    };
    if deg == 0 {
        return false;
    }
    let p = p as u64;
    for d in 1..=deg / 2 {
        for q in (1u64 << d)..(1u64 << (d + 1)) {
            if poly_rem(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Positive divisors of `n` in increasing order.
pub fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// The Möbius function.
pub fn mobius(n: u32) -> i32 {
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Number of monic irreducible polynomials of degree `n` over GF(q), q a
/// power of two: N_q(n) = (1/n) Σ_{d|n} μ(d) q^{n/d}.
pub fn count_irreducible(q: u64, n: u32) -> Result<u128, FieldError> {
    if q < 2 || !q.is_power_of_two() {
        return Err(FieldError::NotPowerOfTwo(q));
    }
    let b = q.trailing_zeros();
    if n == 0 || (b as u64) * (n as u64) > 126 {
        return Err(FieldError::CountOverflow { q, n });
    }
    let mut total: i128 = 0;
    for d in divisors(n) {
        let term = 1i128 << (b * (n / d));
        total += mobius(d) as i128 * term;
    }
    Ok((total / n as i128) as u128)
}

/// A binary extension field with its modulus, a primitive element and
/// discrete-log tables.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    degree: u32,
    modulus: u32,
    primitive: FieldElem,
    exp: Vec<FieldElem>,
    log: Vec<u32>,
}

impl FieldCtx {
    /// Builds GF(2^ℓ). Without a modulus the numerically smallest irreducible
    /// polynomial of degree ℓ with nonzero constant term is used.
    pub fn new(degree: u32, modulus: Option<u32>) -> Result<Self, FieldError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(FieldError::DegreeOutOfRange(degree));
        }
        let modulus = match modulus {
            Some(m) => {
                let found = poly_degree(m as u64).unwrap_or(0);
                if found != degree || m == 0 {
                    return Err(FieldError::ModulusDegree { modulus: m, expected: degree, found });
                }
                // x itself is irreducible but yields no usable group at ℓ = 1.
                if m & 1 == 0 || !is_irreducible(m) {
                    return Err(FieldError::Reducible(m));
                }
                m
            }
            None => ((1u32 << degree) | 1..(1u32 << (degree + 1)))
                .step_by(2)
                .find(|&m| is_irreducible(m))
                .expect("an irreducible polynomial exists in every degree"),
        };
        let order = (1u64 << degree) - 1;
        let factors = prime_factors(order);
        let is_primitive = |a: u32| {
            factors
                .iter()
                .all(|&p| pow_reference(a, order / p, modulus) != 1)
        };
        let primitive = (2..(1u32 << degree))
            .chain(std::iter::once(1))
            .find(|&a| is_primitive(a))
            .expect("the multiplicative group is cyclic");

        let n = order as usize;
        let mut exp = Vec::with_capacity(n);
        let mut log = vec![u32::MAX; 1usize << degree];
        let mut cur = 1u32;
        for i in 0..n {
            exp.push(cur);
            log[cur as usize] = i as u32;
            cur = poly_mulmod(cur, primitive, modulus);
        }
        debug_assert_eq!(cur, 1);
        Ok(Self { degree, modulus, primitive, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// The modulus as a lowercase hex string of its coefficient bits.
    pub fn modulus_hex(&self) -> String {
        format!("{:x}", self.modulus)
    }

    pub fn primitive(&self) -> FieldElem {
        self.primitive
    }

    /// Number of field elements, 2^ℓ.
    pub fn size(&self) -> usize {
        1usize << self.degree
    }

    /// Order of the multiplicative group, 2^ℓ − 1.
    pub fn order(&self) -> usize {
        self.exp.len()
    }

    pub fn contains(&self, a: u32) -> bool {
        (a as u64) < (1u64 << self.degree)
    }

    /// Validates a raw value as an element of this field.
    pub fn elem(&self, a: u32) -> Result<FieldElem, FieldError> {
        if self.contains(a) {
            Ok(a)
        } else {
            Err(FieldError::NotElement { value: a, degree: self.degree })
        }
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        a ^ b
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.exp.len();
        let i = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.exp[if i >= n { i - n } else { i }]
    }

    /// Square-and-multiply exponentiation; `pow(a, 0) = 1` including a = 0.
    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let n = self.exp.len();
        let l = self.log[a as usize] as usize;
        Ok(self.exp[(n - l) % n])
    }

    /// Discrete logarithm base the primitive element.
    pub fn log(&self, a: FieldElem) -> Option<u32> {
        if a == 0 || !self.contains(a) {
            None
        } else {
            Some(self.log[a as usize])
        }
    }

    /// α^i for the stored primitive element α.
    pub fn exp(&self, i: u64) -> FieldElem {
        self.exp[(i % self.exp.len() as u64) as usize]
    }

    fn check_divisor(&self, b: u32) -> Result<(), FieldError> {
        if b == 0 || self.degree % b != 0 {
            Err(FieldError::NotDivisor { b, degree: self.degree })
        } else {
            Ok(())
        }
    }

    /// Membership in the subfield GF(2^b) via the fixed-point test x^(2^b) = x.
    pub fn in_subfield(&self, b: u32, x: FieldElem) -> Result<bool, FieldError> {
        self.check_divisor(b)?;
        let mut y = x;
        for _ in 0..b {
            y = self.mul(y, y);
        }
        Ok(y == x)
    }

    /// True iff GF(2^b)(m) is the whole field, i.e. m lies in no proper
    /// intermediate field GF(2^t) with b | t | ℓ.
    pub fn generates_field(&self, b: u32, m: FieldElem) -> Result<bool, FieldError> {
        self.check_divisor(b)?;
        for t in (b..self.degree).step_by(b as usize) {
            if self.degree % t == 0 && self.in_subfield(t, m)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn pow_reference(a: u32, mut e: u64, modulus: u32) -> u32 {
    let mut base = a;
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(acc, base, modulus);
        }
        base = poly_mulmod(base, base, modulus);
        e >>= 1;
    }
    acc
}

/// Rank over GF(2) of a list of bit vectors.
pub fn gf2_rank(vectors: &[u32]) -> usize {
    let mut basis: Vec<u32> = Vec::new();
    for &v in vectors {
        let mut v = v;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}
