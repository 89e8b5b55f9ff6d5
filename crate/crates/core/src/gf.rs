//! Arithmetic in GF(q) for prime powers q <= 16.
//!
//! An element is stored as an integer code in `[0, q)`. Read base p, the
//! digits are the coefficients of a polynomial over GF(p), least significant
//! digit first, reduced modulo a fixed irreducible polynomial:
//!
//! | q  | modulus       |
//! |----|---------------|
//! | 4  | x^2 + x + 1   |
//! | 8  | x^3 + x + 1   |
//! | 9  | x^2 + 1       |
//! | 16 | x^4 + x + 1   |
//!
//! Prime fields use plain residues. Multiplication goes through log/antilog
//! tables built once per field; addition through a q x q table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_Q: u32 = 16;

/// Decompose `q` as `p^e` with `p` prime, if possible.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

pub fn is_prime_power(q: u32) -> bool {
    prime_power(q).is_some()
}

/// The fixed irreducible modulus for GF(p^e), little-endian coefficients
/// including the leading 1. Empty for prime fields.
pub fn fixed_modulus(q: u32) -> Option<Vec<u8>> {
    match q {
        4 => Some(vec![1, 1, 1]),
        8 => Some(vec![1, 1, 0, 1]),
        9 => Some(vec![1, 0, 1]),
        16 => Some(vec![1, 1, 0, 0, 1]),
        _ => prime_power(q).filter(|&(_, e)| e == 1).map(|_| Vec::new()),
    }
}

/// Characteristic, extension degree and modulus of a supported field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u8,
    pub e: u8,
    pub q: u8,
    /// Little-endian coefficients of the modulus including the leading 1;
    /// empty when `e == 1`.
    pub modulus: Vec<u8>,
}

impl FieldSpec {
    pub fn new(q: u32) -> Result<Self> {
        if q > MAX_Q {
            return Err(Error::UnsupportedField(q));
        }
        let (p, e) = prime_power(q).ok_or(Error::UnsupportedField(q))?;
        let modulus = fixed_modulus(q).ok_or(Error::UnsupportedField(q))?;
        Ok(FieldSpec {
            p: p as u8,
            e: e as u8,
            q: q as u8,
            modulus,
        })
    }
}

/// An element of GF(q) tagged with the field order it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement {
    pub code: u8,
    pub q: u8,
}

impl FieldElement {
    pub fn is_zero(self) -> bool {
        self.code == 0
    }
}

/// GF(q) with precomputed tables.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    add: Vec<u8>,
    neg: Vec<u8>,
    // exp[i] = g^i for i in [0, 2(q-1)) so log sums never need a reduction.
    exp: Vec<u8>,
    log: Vec<u8>,
    inv: Vec<u8>,
    sqrt: Vec<u8>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

fn digits(code: u32, p: u32, e: u32) -> Vec<u32> {
    let mut c = code;
    (0..e)
        .map(|_| {
            let d = c % p;
            c /= p;
            d
        })
        .collect()
}

fn from_digits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Schoolbook polynomial product reduced by the modulus. Used only while
/// building the tables.
fn poly_mul(a: u32, b: u32, spec: &FieldSpec) -> u32 {
    let (p, e) = (spec.p as u32, spec.e as u32);
    if e == 1 {
        return (a * b) % p;
    }
    let da = digits(a, p, e);
    let db = digits(b, p, e);
    let mut prod = vec![0u32; 2 * e as usize - 1];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // The modulus is monic: x^e = -(m_0 + ... + m_{e-1} x^{e-1}).
    let m: Vec<u32> = spec.modulus.iter().map(|&c| c as u32).collect();
    for deg in (e as usize..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (k, &mk) in m.iter().take(e as usize).enumerate() {
            let idx = deg - e as usize + k;
            prod[idx] = (prod[idx] + (p - c) * mk % p) % p;
        }
    }
    from_digits(&prod[..e as usize], p)
}

impl Field {
    pub fn new(q: u32) -> Result<Self> {
        let spec = FieldSpec::new(q)?;
        let (p, e, qq) = (spec.p as u32, spec.e as u32, q as usize);

        let mut add = vec![0u8; qq * qq];
        let mut neg = vec![0u8; qq];
        for a in 0..qq as u32 {
            let da = digits(a, p, e);
            let negd: Vec<u32> = da.iter().map(|&d| (p - d) % p).collect();
            neg[a as usize] = from_digits(&negd, p) as u8;
            for b in 0..qq as u32 {
                let db = digits(b, p, e);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qq + b as usize] = from_digits(&s, p) as u8;
            }
        }

        let order = qq - 1;
        let generator = (1..qq as u32)
            .find(|&g| {
                let mut x = 1;
                for k in 1..=order {
                    x = poly_mul(x, g, &spec);
                    if x == 1 {
                        return k == order;
                    }
                }
                false
            })
            .ok_or_else(|| Error::Internal(format!("no primitive element in GF({q})")))?;

        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0u8; qq];
        let mut x = 1u32;
        for i in 0..order {
            exp[i] = x as u8;
            exp[i + order] = x as u8;
            log[x as usize] = i as u8;
            x = poly_mul(x, generator, &spec);
        }

        let mut inv = vec![0u8; qq];
        for a in 1..qq {
            inv[a] = exp[(order - log[a] as usize) % order];
        }

        // Square roots exist for every element in characteristic 2; in odd
        // characteristic only squares get an entry, the rest stay 0.
        let mut sqrt = vec![0u8; qq];
        for a in 0..qq as u32 {
            let sq = poly_mul(a, a, &spec) as usize;
            if sq != 0 && sqrt[sq] == 0 {
                sqrt[sq] = a as u8;
            }
        }

        Ok(Field {
            spec,
            add,
            neg,
            exp,
            log,
            inv,
            sqrt,
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u8 {
        self.spec.q
    }

    pub fn characteristic(&self) -> u8 {
        self.spec.p
    }

    pub fn element(&self, code: u8) -> Result<FieldElement> {
        if code >= self.spec.q {
            return Err(Error::InvalidElement {
                code,
                q: self.spec.q,
            });
        }
        Ok(FieldElement {
            code,
            q: self.spec.q,
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            code: 0,
            q: self.spec.q,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            code: 1,
            q: self.spec.q,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.spec.q).map(move |code| FieldElement {
            code,
            q: self.spec.q,
        })
    }

    fn check(&self, a: FieldElement) -> Result<u8> {
        if a.q != self.spec.q {
            return Err(Error::FieldMismatch {
                expected: self.spec.q,
                found: a.q,
            });
        }
        if a.code >= self.spec.q {
            return Err(Error::InvalidElement {
                code: a.code,
                q: a.q,
            });
        }
        Ok(a.code)
    }

    fn wrap(&self, code: u8) -> FieldElement {
        FieldElement {
            code,
            q: self.spec.q,
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.wrap(self.add_code(self.check(a)?, self.check(b)?)))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.wrap(self.sub_code(self.check(a)?, self.check(b)?)))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement> {
        Ok(self.wrap(self.neg_code(self.check(a)?)))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.wrap(self.mul_code(self.check(a)?, self.check(b)?)))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        let c = self.check(a)?;
        if c == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.wrap(self.inv_code(c)))
    }

    pub fn pow(&self, a: FieldElement, k: u64) -> Result<FieldElement> {
        Ok(self.wrap(self.pow_code(self.check(a)?, k)))
    }

    // Unchecked code-level arithmetic for inner loops. Callers guarantee
    // every code is below q.

    #[inline]
    pub fn add_code(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.spec.q as usize + b as usize]
    }

    #[inline]
    pub fn neg_code(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub_code(&self, a: u8, b: u8) -> u8 {
        self.add_code(a, self.neg_code(b))
    }

    #[inline]
    pub fn mul_code(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// Multiplicative inverse; returns 0 for 0.
    #[inline]
    pub fn inv_code(&self, a: u8) -> u8 {
        self.inv[a as usize]
    }

    pub fn pow_code(&self, a: u8, k: u64) -> u8 {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = self.spec.q as u64 - 1;
        let l = (self.log[a as usize] as u64 * (k % order)) % order;
        self.exp[l as usize]
    }

    /// Square root of a square, `None` for non-squares. In characteristic 2
    /// every element has exactly one square root.
    pub fn sqrt_code(&self, a: u8) -> Option<u8> {
        if a == 0 {
            return Some(0);
        }
        match self.sqrt[a as usize] {
            0 => None,
            r => Some(r),
        }
    }
}
