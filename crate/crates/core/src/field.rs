//! Finite fields of order at most 16.
//!
//! Elements of GF(p^k) are integers `0..q` whose base-`p` digits are the
//! coefficients of a polynomial of degree below `k` (least significant digit
//! is the constant term). Arithmetic is done through precomputed tables.

use thiserror::Error;

pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("field order {0} exceeds the supported maximum of 16")]
    OrderTooLarge(usize),
}

#[derive(Debug, Clone)]
pub struct FiniteField {
    p: usize,
    k: usize,
    q: usize,
    /// Low-order coefficients of the monic modulus, constant term first.
    modulus: Vec<usize>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// Returns `(p, k)` with `q = p^k`, if `q` is a prime power.
pub fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

fn digits(mut x: usize, p: usize, k: usize) -> Vec<usize> {
    let mut d = Vec::with_capacity(k);
    for _ in 0..k {
        d.push(x % p);
        x /= p;
    }
    d
}

fn undigits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Remainder of `a` modulo a monic polynomial `m` over GF(p); both vectors
/// are constant term first, `m` includes its leading 1.
fn poly_rem(a: &[usize], m: &[usize], p: usize) -> Vec<usize> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - dm;
            for i in 0..dm {
                r[shift + i] = (r[shift + i] + (p - m[i]) * lead) % p;
            }
        }
    }
    r
}

fn is_irreducible(low: &[usize], p: usize) -> bool {
    let k = low.len();
    let mut full = low.to_vec();
    full.push(1);
    // any factorization has a monic factor of degree 1..=k/2
    for d in 1..=k / 2 {
        for code in 0..p.pow(d as u32) {
            let mut divisor = digits(code, p, d);
            divisor.push(1);
            if poly_rem(&full, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    /// Builds GF(q). The modulus is the monic irreducible polynomial of
    /// degree `k` whose low-order coefficients, read as a base-`p` integer
    /// (constant term least significant), are smallest.
    pub fn new(q: usize) -> Result<Self, FieldError> {
        let (p, k) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        if q > MAX_ORDER {
            return Err(FieldError::OrderTooLarge(q));
        }
        let modulus = (0..q)
            .map(|code| digits(code, p, k))
            .find(|low| is_irreducible(low, p))
            .expect("an irreducible polynomial exists in every degree");
        let mut full = modulus.clone();
        full.push(1);

        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            let da = digits(a, p, k);
            for b in 0..q {
                let db = digits(b, p, k);
                let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&sum, p) as u8;
                let mut prod = vec![0usize; 2 * k - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let r = poly_rem(&prod, &full, p);
                mul[a * q + b] = undigits(&r, p) as u8;
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u8;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as u8;
            }
        }
        Ok(FiniteField {
            p,
            k,
            q,
            modulus,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// Full modulus coefficients, constant term first, leading 1 included.
    pub fn modulus(&self) -> Vec<usize> {
        let mut m = self.modulus.clone();
        m.push(1);
        m
    }

    /// The modulus written as a polynomial in `x`, e.g. `x^2+x+1`.
    pub fn modulus_string(&self) -> String {
        let m = self.modulus();
        let mut terms = Vec::new();
        for (i, &c) in m.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && i > 0 {
                String::new()
            } else {
                c.to_string()
            };
            terms.push(match i {
                0 => coef,
                1 => format!("{coef}x"),
                _ => format!("{coef}x^{i}"),
            });
        }
        terms.join("+")
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b] as usize
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b] as usize
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a] as usize
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: usize) -> Option<usize> {
        (a != 0).then(|| self.inv[a] as usize)
    }

    /// Checks the field axioms on the tables. Associativity and
    /// distributivity are checked on all triples for `q <= 9` and on a
    /// fixed stride of triples above that.
    pub fn check_axioms(&self) -> bool {
        let q = self.q;
        let step = if q <= 9 { 1 } else { 3 };
        for a in 0..q {
            if self.add(a, 0) != a || self.mul(a, 1) != a {
                return false;
            }
            if self.add(a, self.neg(a)) != 0 {
                return false;
            }
            if a != 0 && self.mul(a, self.inv[a] as usize) != 1 {
                return false;
            }
            for b in 0..q {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return false;
                }
                if a != 0 && b != 0 && self.mul(a, b) == 0 {
                    return false;
                }
            }
        }
        for a in (0..q).step_by(step) {
            for b in 0..q {
                for c in (0..q).step_by(step) {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return false;
                    }
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return false;
                    }
                    if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Shorthand for [`FiniteField::new`].
pub fn gf(q: usize) -> Result<FiniteField, FieldError> {
    FiniteField::new(q)
}
