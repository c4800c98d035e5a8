//! Exact arithmetic in prime fields GF(p) and extension fields
//! GF(p)[x]/(h) with h monic irreducible over the prime field.
//!
//! A field is a cheap-to-clone handle (`Fq`); elements (`Fx`) carry their
//! parent handle and a canonical coefficient vector with entries in [0,p).
//! Equality of elements is bitwise equality of the canonical form.

use crate::error::{Error, Result};
use crate::num::{factor_u64, is_prime, powmod, prime_divisors};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

// ---------------------------------------------------------------------------
// raw polynomial arithmetic over GF(p): coefficient vectors, little endian
// ---------------------------------------------------------------------------

fn raw_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn raw_add(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0);
        *o = x % p;
    }
    raw_trim(&mut out);
    out
}

fn raw_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0) + p - b.get(i).copied().unwrap_or(0) % p;
        *o = x % p;
    }
    raw_trim(&mut out);
    out
}

fn raw_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] as u128 + x as u128 * y as u128)
                .rem_euclid(p as u128) as u64;
        }
    }
    raw_trim(&mut out);
    out
}

/// Remainder of a by the monic polynomial m.
fn raw_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    debug_assert_eq!(*m.last().unwrap(), 1, "modulus must be monic");
    let mut r: Vec<u64> = a.to_vec();
    raw_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        for (j, &c) in m.iter().enumerate() {
            let idx = j + shift;
            let sub = (lead as u128 * c as u128) % p as u128;
            r[idx] = ((r[idx] as u128 + p as u128 - sub) % p as u128) as u64;
        }
        raw_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn raw_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    raw_trim(&mut x);
    raw_trim(&mut y);
    while !y.is_empty() {
        // make y monic before reducing
        let inv = powmod(*y.last().unwrap(), p - 2, p);
        let ym: Vec<u64> = y.iter().map(|&c| (c as u128 * inv as u128 % p as u128) as u64).collect();
        let r = raw_rem(&x, &ym, p);
        x = ym;
        y = r;
    }
    x
}

/// x^(p^e) mod m, repeated Frobenius of the class of x.
fn raw_frobenius_power(m: &[u64], e: u32, p: u64) -> Vec<u64> {
    let mut cur = raw_rem(&[0, 1], m, p); // class of x
    for _ in 0..e {
        // cur := cur^p mod m
        let mut acc = vec![1u64];
        let mut base = cur.clone();
        let mut k = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = raw_rem(&raw_mul(&acc, &base, p), m, p);
            }
            base = raw_rem(&raw_mul(&base, &base, p), m, p);
            k >>= 1;
        }
        cur = acc;
    }
    cur
}

/// Rabin irreducibility test for a monic polynomial over GF(p).
fn raw_is_irreducible(m: &[u64], p: u64) -> bool {
    let d = m.len() - 1;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    // x^(p^d) == x mod m
    let xq = raw_frobenius_power(m, d as u32, p);
    if raw_sub(&xq, &[0, 1], p) != Vec::<u64>::new() {
        return false;
    }
    // gcd(x^(p^(d/l)) - x, m) == 1 for each prime l | d
    for l in prime_divisors(d as u64) {
        let e = d as u64 / l;
        let xe = raw_frobenius_power(m, e as u32, p);
        let diff = raw_sub(&xe, &[0, 1], p);
        let g = raw_gcd(m, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// field handles
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct FqRepr {
    p: u64,
    /// Monic modulus over GF(p), little endian; `[0, 1]` (the polynomial x)
    /// encodes the prime field itself so elements are uniformly length-d
    /// coefficient vectors.
    modulus: Vec<u64>,
    generator: OnceLock<Vec<u64>>,
    unit_order_factors: OnceLock<Vec<(u64, u32)>>,
}

impl PartialEq for FqRepr {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for FqRepr {}

/// Handle to a finite field; cloning is cheap and all values are immutable.
#[derive(Clone)]
pub struct Fq(Arc<FqRepr>);

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for Fq {}

impl std::hash::Hash for Fq {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.modulus.hash(state);
    }
}

impl PartialOrd for Fq {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Fq {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.p, &self.0.modulus).cmp(&(other.0.p, &other.0.modulus))
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order())
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 1 {
            write!(f, "GF({})", self.p())
        } else {
            write!(f, "GF({},{})", self.order(), modulus_string(self))
        }
    }
}

fn modulus_string(k: &Fq) -> String {
    let mut parts = Vec::new();
    for (i, &c) in k.modulus().iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let m = match i {
            0 => format!("{c}"),
            1 => {
                if c == 1 {
                    "x".into()
                } else {
                    format!("{c}*x")
                }
            }
            _ => {
                if c == 1 {
                    format!("x^{i}")
                } else {
                    format!("{c}*x^{i}")
                }
            }
        };
        parts.push(m);
    }
    parts.join("+")
}

impl Fq {
    /// The prime field GF(p). Primality is checked.
    pub fn prime(p: u64) -> Result<Fq> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Fq(Arc::new(FqRepr {
            p,
            modulus: vec![0, 1],
            generator: OnceLock::new(),
            unit_order_factors: OnceLock::new(),
        })))
    }

    /// GF(p)[x]/(modulus). The modulus must be monic irreducible over GF(p);
    /// both properties are verified here.
    pub fn extension(p: u64, modulus: Vec<u64>) -> Result<Fq> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let mut m = modulus;
        for c in m.iter_mut() {
            *c %= p;
        }
        raw_trim(&mut m);
        if m.len() < 2 || *m.last().unwrap() != 1 {
            return Err(Error::ReducibleModulus);
        }
        let d = m.len() - 1;
        if d == 1 {
            // linear modulus: normalize to the plain prime field
            return Fq::prime(p);
        }
        // refuse fields whose order does not fit comfortably in u64
        let bits = (d as f64) * (p as f64).log2();
        if bits > 62.0 {
            return Err(Error::TooLarge(format!("field order p^{d} exceeds u64")));
        }
        if !raw_is_irreducible(&m, p) {
            return Err(Error::ReducibleModulus);
        }
        Ok(Fq(Arc::new(FqRepr {
            p,
            modulus: m,
            generator: OnceLock::new(),
            unit_order_factors: OnceLock::new(),
        })))
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    /// Extension degree over the prime field.
    pub fn degree(&self) -> usize {
        self.0.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    /// Number of elements p^d.
    pub fn order(&self) -> u64 {
        let mut n = 1u64;
        for _ in 0..self.degree() {
            n *= self.0.p;
        }
        n
    }

    pub fn is_prime_field(&self) -> bool {
        self.degree() == 1
    }

    pub fn zero(&self) -> Fx {
        Fx {
            field: self.clone(),
            c: vec![0; self.degree()],
        }
    }

    pub fn one(&self) -> Fx {
        self.from_u64(1)
    }

    pub fn from_u64(&self, n: u64) -> Fx {
        let mut c = vec![0; self.degree()];
        c[0] = n % self.0.p;
        Fx {
            field: self.clone(),
            c,
        }
    }

    pub fn from_i64(&self, n: i64) -> Fx {
        let r = n.rem_euclid(self.0.p as i64) as u64;
        self.from_u64(r)
    }

    /// Element from a coefficient vector (entries reduced mod p, padded).
    pub fn element(&self, coeffs: Vec<u64>) -> Fx {
        let mut c: Vec<u64> = coeffs.iter().map(|&x| x % self.0.p).collect();
        c.resize(self.degree(), 0);
        Fx {
            field: self.clone(),
            c,
        }
    }

    /// The class of x in GF(p)[x]/(h); zero in a prime field.
    pub fn gen(&self) -> Fx {
        let mut c = vec![0; self.degree()];
        if self.degree() > 1 {
            c[1] = 1;
        }
        Fx {
            field: self.clone(),
            c,
        }
    }

    /// Element whose encoding is n (little-endian base-p digits).
    pub fn from_encoding(&self, mut n: u64) -> Fx {
        let mut c = vec![0; self.degree()];
        for ci in c.iter_mut() {
            *ci = n % self.0.p;
            n /= self.0.p;
        }
        Fx {
            field: self.clone(),
            c,
        }
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Fx> + '_ {
        (0..self.order()).map(move |n| self.from_encoding(n))
    }

    /// All nonzero elements in encoding order.
    pub fn units(&self) -> impl Iterator<Item = Fx> + '_ {
        (1..self.order()).map(move |n| self.from_encoding(n))
    }

    fn unit_order_factors(&self) -> &[(u64, u32)] {
        self.0
            .unit_order_factors
            .get_or_init(|| factor_u64(self.order() - 1))
    }

    /// The canonical generator of the unit group: the smallest element in
    /// encoding order of multiplicative order q-1.
    pub fn canonical_generator(&self) -> Fx {
        let raw = self.0.generator.get_or_init(|| {
            let n = self.order() - 1;
            let primes: Vec<u64> = self.unit_order_factors().iter().map(|&(p, _)| p).collect();
            'cand: for enc in 2..=self.order() - 1 {
                let g = self.from_encoding(enc);
                for &l in &primes {
                    if g.pow_u128((n / l) as u128).is_one() {
                        continue 'cand;
                    }
                }
                return g.c.clone();
            }
            // q = 2 or q = 3: 1 resp. 2 handled by the loop except q = 2
            vec![1]
        });
        Fx {
            field: self.clone(),
            c: raw.clone(),
        }
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: &Fx) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut ord = self.order() - 1;
        for &(l, e) in self.unit_order_factors() {
            for _ in 0..e {
                if a.pow_u128((ord / l) as u128).is_one() {
                    ord /= l;
                } else {
                    break;
                }
            }
        }
        Ok(ord)
    }
}

// ---------------------------------------------------------------------------
// field elements
// ---------------------------------------------------------------------------

/// An element of a finite field in canonical reduced form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fx {
    field: Fq,
    c: Vec<u64>,
}

impl fmt::Debug for Fx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Fx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_prime_field() {
            return write!(f, "{}", self.c[0]);
        }
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, &c) in self.c.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            parts.push(match i {
                0 => format!("{c}"),
                1 if c == 1 => "x".into(),
                1 => format!("{c}*x"),
                _ if c == 1 => format!("x^{i}"),
                _ => format!("{c}*x^{i}"),
            });
        }
        write!(f, "{}", parts.join("+"))
    }
}

impl PartialOrd for Fx {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Fx {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.field.clone(), self.encode()).cmp(&(other.field.clone(), other.encode()))
    }
}

impl Fx {
    pub fn field(&self) -> &Fq {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }

    /// Canonical integer encoding sum c_i p^i; total order on each field.
    pub fn encode(&self) -> u64 {
        let p = self.field.p();
        let mut n = 0u64;
        for &c in self.c.iter().rev() {
            n = n * p + c;
        }
        n
    }

    fn check_same(&self, other: &Fx) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Fx) -> Fx {
        self.check_same(other).expect("field mismatch in add");
        let mut c = raw_add(&self.c, &other.c, self.field.p());
        c.resize(self.field.degree(), 0);
        Fx {
            field: self.field.clone(),
            c,
        }
    }

    pub fn sub(&self, other: &Fx) -> Fx {
        self.check_same(other).expect("field mismatch in sub");
        let mut c = raw_sub(&self.c, &other.c, self.field.p());
        c.resize(self.field.degree(), 0);
        Fx {
            field: self.field.clone(),
            c,
        }
    }

    pub fn neg(&self) -> Fx {
        self.field.zero().sub(self)
    }

    pub fn mul(&self, other: &Fx) -> Fx {
        self.check_same(other).expect("field mismatch in mul");
        let p = self.field.p();
        let prod = raw_mul(&self.c, &other.c, p);
        let mut c = if self.field.is_prime_field() {
            prod
        } else {
            raw_rem(&prod, self.field.modulus(), p)
        };
        c.resize(self.field.degree(), 0);
        Fx {
            field: self.field.clone(),
            c,
        }
    }

    pub fn inv(&self) -> Result<Fx> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // a^(q-2) = a^(-1)
        Ok(self.pow_u128((self.field.order() - 2) as u128))
    }

    pub fn div(&self, other: &Fx) -> Result<Fx> {
        self.check_same(other)?;
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow_u128(&self, mut e: u128) -> Fx {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Integer power with negative exponents allowed (inverts first).
    pub fn pow_i64(&self, e: i64) -> Result<Fx> {
        if e >= 0 {
            Ok(self.pow_u128(e as u128))
        } else {
            Ok(self.inv()?.pow_u128((-(e as i128)) as u128))
        }
    }

    /// Frobenius a -> a^(p^e).
    pub fn frobenius(&self, e: u32) -> Fx {
        let mut out = self.clone();
        for _ in 0..e {
            out = out.pow_u128(self.field.p() as u128);
        }
        out
    }
}

/// Discrete logarithm of a to base g in the unit group, by baby-step
/// giant-step. g must generate the unit group.
pub fn discrete_log(a: &Fx, g: &Fx) -> Result<u64> {
    if a.is_zero() {
        return Err(Error::ZeroElement);
    }
    let field = a.field();
    if g.field() != field {
        return Err(Error::FieldMismatch);
    }
    let n = field.order() - 1;
    if field.element_order(g)? != n {
        return Err(Error::NotGenerator);
    }
    let m = (n as f64).sqrt().ceil() as u64;
    let mut baby: HashMap<u64, u64> = HashMap::with_capacity(m as usize);
    let mut cur = field.one();
    for j in 0..m {
        baby.entry(cur.encode()).or_insert(j);
        cur = cur.mul(g);
    }
    // factor = g^(-m)
    let factor = g.pow_u128(m as u128).inv()?;
    let mut gamma = a.clone();
    for i in 0..=m {
        if let Some(&j) = baby.get(&gamma.encode()) {
            return Ok((i * m + j) % n);
        }
        gamma = gamma.mul(&factor);
    }
    Err(Error::NotGenerator)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf9() -> Fq {
        // GF(9) as GF(3)[x]/(x^2+1)
        Fq::extension(3, vec![1, 0, 1]).unwrap()
    }

    #[test]
    fn prime_field_ops() {
        let f5 = Fq::prime(5).unwrap();
        let a = f5.from_u64(3);
        let b = f5.from_u64(4);
        assert_eq!(a.mul(&b), f5.from_u64(2));
        for n in 0..5 {
            let a = f5.from_u64(n);
            assert_eq!(f5.one().mul(&a), a);
        }
    }

    #[test]
    fn ext_field_pow() {
        let k = gf9();
        let a = k.element(vec![1, 1]); // x + 1
        assert_eq!(a.pow_u128(4), k.from_u64(2));
    }

    #[test]
    fn inverses() {
        let k = gf9();
        for a in k.units() {
            assert!(a.mul(&a.inv().unwrap()).is_one());
        }
        assert_eq!(k.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn mismatched_fields_rejected() {
        let f5 = Fq::prime(5).unwrap();
        let f7 = Fq::prime(7).unwrap();
        assert_eq!(f5.one().div(&f7.one()), Err(Error::FieldMismatch));
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^2 - 1 = (x-1)(x+1) over GF(5)
        assert_eq!(Fq::extension(5, vec![4, 0, 1]), Err(Error::ReducibleModulus));
        assert!(Fq::extension(5, vec![2, 0, 1]).is_ok()); // x^2+2 irreducible
    }

    #[test]
    fn generator_and_dlog() {
        let f5 = Fq::prime(5).unwrap();
        let g = f5.canonical_generator();
        assert_eq!(g, f5.from_u64(2));
        assert_eq!(discrete_log(&f5.from_u64(4), &g).unwrap(), 2);
        assert_eq!(discrete_log(&f5.from_u64(1), &g).unwrap(), 0);

        let k = gf9();
        let xp1 = k.element(vec![1, 1]);
        assert_eq!(k.element_order(&xp1).unwrap(), 8);
        assert_eq!(discrete_log(&k.from_u64(2), &xp1).unwrap(), 4);
        // 4 = dlog of 2 since (x+1)^4 = 2
        assert_eq!(
            discrete_log(&f5.from_u64(3), &f5.from_u64(4)),
            Err(Error::NotGenerator)
        );
    }

    #[test]
    fn frobenius_fixes_prime_subfield() {
        let k = gf9();
        for n in 0..3 {
            let a = k.from_u64(n);
            assert_eq!(a.frobenius(1), a);
        }
        let x = k.gen();
        assert_eq!(x.frobenius(1), x.neg()); // x^3 = -x since x^2 = -1
    }
}
