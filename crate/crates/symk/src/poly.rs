//! Univariate polynomials over a finite field, with exact factorization
//! (squarefree splitting, distinct-degree, Cantor-Zassenhaus equal-degree
//! with a deterministic seeded PRNG).

use crate::error::{Error, Result};
use crate::field::{Fq, Fx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

/// Dense polynomial; no trailing zero coefficients, zero = empty vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    field: Fq,
    coeffs: Vec<Fx>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display("t"))
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |p: &Poly| (p.coeffs.len(), p.coeffs.iter().rev().map(|c| c.encode()).collect::<Vec<_>>());
        (self.field.clone(), key(self)).cmp(&(other.field.clone(), key(other)))
    }
}

impl Poly {
    pub fn new(field: &Fq, coeffs: Vec<Fx>) -> Poly {
        let mut coeffs = coeffs;
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn from_u64s(field: &Fq, coeffs: &[u64]) -> Poly {
        Poly::new(field, coeffs.iter().map(|&c| field.from_u64(c)).collect())
    }

    pub fn from_i64s(field: &Fq, coeffs: &[i64]) -> Poly {
        Poly::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: &Fq) -> Poly {
        Poly::new(field, vec![])
    }

    pub fn one(field: &Fq) -> Poly {
        Poly::constant(field.one())
    }

    pub fn constant(c: Fx) -> Poly {
        let field = c.field().clone();
        Poly::new(&field, vec![c])
    }

    /// The variable t.
    pub fn var(field: &Fq) -> Poly {
        Poly::new(field, vec![field.zero(), field.one()])
    }

    pub fn field(&self) -> &Fq {
        &self.field
    }

    pub fn coeffs(&self) -> &[Fx] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fx {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree; zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.degree().expect("degree of zero polynomial")
    }

    pub fn leading(&self) -> Fx {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).add(&other.coeff(i)));
        }
        Poly::new(&self.field, out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i).sub(&other.coeff(i)));
        }
        Poly::new(&self.field, out)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn scale(&self, c: &Fx) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(&self.field, out)
    }

    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut out = vec![self.field.zero(); k];
        out.extend(self.coeffs.iter().cloned());
        Poly::new(&self.field, out)
    }

    pub fn pow(&self, mut e: u64) -> Poly {
        let mut acc = Poly::one(&self.field);
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

    /// Quotient and remainder by a nonzero divisor.
    pub fn divrem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dl = divisor.deg();
        let lead_inv = divisor.leading().inv()?;
        let mut rem = self.coeffs.clone();
        let mut quo = vec![self.field.zero(); self.coeffs.len().saturating_sub(dl)];
        while rem.len() > dl {
            let k = rem.len() - 1 - dl;
            let q = rem.last().unwrap().mul(&lead_inv);
            if !q.is_zero() {
                quo[k] = q.clone();
                for (j, c) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = rem[k + j].sub(&q.mul(c));
                }
            }
            while rem.last().map(|c| c.is_zero()).unwrap_or(false) {
                rem.pop();
            }
            if rem.len() <= dl {
                break;
            }
        }
        Ok((Poly::new(&self.field, quo), Poly::new(&self.field, rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly> {
        Ok(self.divrem(divisor)?.1)
    }

    /// Exact division; panics if the division is not exact (internal use).
    pub fn div_exact(&self, divisor: &Poly) -> Poly {
        let (q, r) = self.divrem(divisor).expect("division by zero");
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        self.scale(&self.leading().inv().unwrap())
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).unwrap();
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn eval(&self, x: &Fx) -> Fx {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero(&self.field);
        }
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&self.field.from_u64(i as u64)))
            .collect();
        Poly::new(&self.field, out)
    }

    /// Substitute another polynomial for the variable.
    pub fn compose(&self, inner: &Poly) -> Poly {
        let mut acc = Poly::zero(&self.field);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Map coefficients through a field morphism.
    pub fn map_coeffs<F: Fn(&Fx) -> Fx>(&self, target: &Fq, f: F) -> Poly {
        Poly::new(target, self.coeffs.iter().map(f).collect())
    }

    /// self^e mod m.
    pub fn powmod(&self, mut e: u128, m: &Poly) -> Result<Poly> {
        let mut acc = Poly::one(&self.field).rem(m)?;
        let mut base = self.rem(m)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m)?;
            }
            base = base.mul(&base).rem(m)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Encoding used for deterministic seeds and canonical ordering.
    pub fn encoding_digits(&self) -> Vec<u64> {
        self.coeffs.iter().map(|c| c.encode()).collect()
    }

    pub fn display(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let ext = !self.field.is_prime_field();
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = format!("{c}");
            let coeff_one = c.is_one();
            let wrapped = if ext && !coeff_one && (cs.contains('+') || cs.contains('*')) {
                format!("({cs})")
            } else {
                cs
            };
            let term = match i {
                0 => wrapped,
                1 if coeff_one => var.to_string(),
                1 => format!("{wrapped}*{var}"),
                _ if coeff_one => format!("{var}^{i}"),
                _ => format!("{wrapped}*{var}^{i}"),
            };
            parts.push(term);
        }
        parts.join("+")
    }
}

// ---------------------------------------------------------------------------
// factorization
// ---------------------------------------------------------------------------

fn checked_pow_u128(base: u64, exp: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc
            .checked_mul(base as u128)
            .ok_or_else(|| Error::TooLarge("field power overflows u128".into()))?;
    }
    Ok(acc)
}

/// p-th root of a polynomial all of whose terms have exponent divisible by p.
fn pth_root(f: &Poly) -> Poly {
    let field = f.field();
    let p = field.p() as usize;
    let d = field.degree() as u32;
    let mut out = Vec::new();
    for (i, c) in f.coeffs().iter().enumerate() {
        if i % p == 0 {
            // c^(p^(d-1)) is the p-th root in GF(p^d)
            out.push(c.frobenius(d - 1));
        } else {
            assert!(c.is_zero(), "pth_root: polynomial is not a p-th power");
        }
    }
    Poly::new(field, out)
}

/// Squarefree decomposition: returns (g, m) pairs with g monic squarefree,
/// product of g^m equal to input up to the leading coefficient.
fn squarefree_decomposition(f: &Poly) -> Vec<(Poly, usize)> {
    let field = f.field().clone();
    let p = field.p() as usize;
    let mut out: Vec<(Poly, usize)> = Vec::new();
    let mut stack = vec![(f.monic(), 1usize)];
    while let Some((g, mult)) = stack.pop() {
        if g.is_one() {
            continue;
        }
        let gd = g.derivative();
        if gd.is_zero() {
            // g = h(x^p)
            stack.push((pth_root(&g), mult * p));
            continue;
        }
        let c = g.gcd(&gd);
        let w = g.div_exact(&c);
        // w carries each squarefree factor not killed by the derivative
        let mut w = w;
        let mut c = c;
        let mut i = 1usize;
        while !w.is_one() {
            let y = w.gcd(&c);
            let fac = w.div_exact(&y);
            if !fac.is_one() {
                out.push((fac, mult * i));
            }
            w = y.clone();
            c = c.div_exact(&y);
            i += 1;
        }
        if !c.is_one() {
            stack.push((c, mult));
        }
    }
    out
}

/// Distinct-degree splitting of a monic squarefree polynomial:
/// (product of irreducible factors of degree d, d) pairs.
fn distinct_degree(f: &Poly) -> Result<Vec<(Poly, usize)>> {
    let field = f.field().clone();
    let q = field.order();
    let x = Poly::var(&field);
    let mut out = Vec::new();
    let mut h = x.clone(); // x^(q^i) mod f, starting at i=0
    let mut rest = f.clone();
    let mut d = 0usize;
    while rest.deg() > 0 {
        d += 1;
        if 2 * d > rest.deg() {
            out.push((rest.clone(), rest.deg()));
            break;
        }
        h = h.powmod(q as u128, &rest)?;
        let g = rest.gcd(&h.sub(&x));
        if !g.is_one() {
            out.push((g.clone(), d));
            rest = rest.div_exact(&g);
            h = h.rem(&rest)?;
        }
    }
    Ok(out)
}

/// Cantor-Zassenhaus equal-degree splitting (odd characteristic).
fn equal_degree(f: &Poly, d: usize, rng: &mut ChaCha12Rng) -> Result<Vec<Poly>> {
    if f.deg() == d {
        return Ok(vec![f.clone()]);
    }
    let field = f.field().clone();
    let q = field.order();
    let e = (checked_pow_u128(q, d)? - 1) / 2;
    loop {
        // random polynomial of degree < deg f
        let coeffs: Vec<Fx> = (0..f.deg())
            .map(|_| field.from_encoding(rng.gen_range(0..field.order())))
            .collect();
        let h = Poly::new(&field, coeffs);
        if h.is_zero() {
            continue;
        }
        let g0 = f.gcd(&h);
        let g = if !g0.is_one() && g0.deg() < f.deg() {
            g0
        } else {
            let hp = h.powmod(e, f)?;
            let cand = f.gcd(&hp.sub(&Poly::one(&field)));
            if cand.is_one() || cand.deg() == f.deg() {
                continue;
            }
            cand
        };
        let mut out = equal_degree(&g, d, rng)?;
        out.extend(equal_degree(&f.div_exact(&g), d, rng)?);
        return Ok(out);
    }
}

/// Full factorization: leading coefficient and sorted monic irreducible
/// factors with multiplicities. Deterministic: the internal PRNG is seeded
/// from the input polynomial.
pub fn factor(f: &Poly) -> Result<(Fx, Vec<(Poly, usize)>)> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let lead = f.leading();
    if f.deg() == 0 {
        return Ok((lead, vec![]));
    }
    let mut seed = [0u8; 32];
    for (i, d) in f.encoding_digits().iter().enumerate() {
        let b = d.to_le_bytes();
        for (j, &x) in b.iter().enumerate() {
            seed[(i * 8 + j) % 32] ^= x.wrapping_add(i as u8);
        }
    }
    seed[31] ^= 0x5e;
    let mut rng = ChaCha12Rng::from_seed(seed);
    let mut factors: Vec<(Poly, usize)> = Vec::new();
    for (sf, mult) in squarefree_decomposition(f) {
        for (prod, d) in distinct_degree(&sf)? {
            for irr in equal_degree(&prod, d, &mut rng)? {
                factors.push((irr.monic(), mult));
            }
        }
    }
    factors.sort();
    Ok((lead, factors))
}

/// Roots of f in its coefficient field.
pub fn roots(f: &Poly) -> Result<Vec<Fx>> {
    let (_, factors) = factor(f)?;
    let mut out: Vec<Fx> = factors
        .into_iter()
        .filter(|(g, _)| g.deg() == 1)
        .map(|(g, _)| g.coeff(0).neg())
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Irreducibility over the coefficient field (any finite field).
pub fn is_irreducible(f: &Poly) -> bool {
    if f.is_zero() || f.deg() == 0 {
        return false;
    }
    let d = f.deg();
    if d == 1 {
        return true;
    }
    let field = f.field().clone();
    let q = field.order();
    let x = Poly::var(&field);
    let xq = match checked_pow_u128(q, d).and_then(|e| x.powmod(e, f)) {
        Ok(v) => v,
        Err(_) => return false,
    };
    if !xq.sub(&x).rem(f).unwrap().is_zero() {
        return false;
    }
    for l in crate::num::prime_divisors(d as u64) {
        let e = checked_pow_u128(q, d / l as usize).unwrap();
        let xe = x.powmod(e, f).unwrap();
        if !f.gcd(&xe.sub(&x)).is_one() {
            return false;
        }
    }
    true
}

/// Monic irreducible polynomials of exact degree d, in encoding order.
pub fn monic_irreducibles(field: &Fq, d: usize) -> Result<Vec<Poly>> {
    let q = field.order();
    let count = checked_pow_u128(q, d)?;
    if count > 2_000_000 {
        return Err(Error::TooLarge(format!("q^{d} monic polynomials")));
    }
    let mut out = Vec::new();
    for n in 0..count as u64 {
        let mut digits = Vec::with_capacity(d + 1);
        let mut m = n;
        for _ in 0..d {
            digits.push(field.from_encoding(m % q));
            m /= q;
        }
        digits.push(field.one());
        let f = Poly::new(field, digits);
        if is_irreducible(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

/// The canonical monic irreducible of degree d over GF(p): least in the
/// encoding order of its lower coefficients. Cached per (p, d).
pub fn canonical_irreducible(p: u64, d: usize) -> Result<Vec<u64>> {
    static CACHE: Mutex<Option<HashMap<(u64, usize), Vec<u64>>>> = Mutex::new(None);
    {
        let guard = CACHE.lock().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(v) = map.get(&(p, d)) {
                return Ok(v.clone());
            }
        }
    }
    let base = Fq::prime(p)?;
    let count = checked_pow_u128(p, d)?;
    if count > 50_000_000 {
        return Err(Error::TooLarge(format!("canonical modulus search p^{d}")));
    }
    let mut found: Option<Vec<u64>> = None;
    for n in 0..count as u64 {
        let mut digits = Vec::with_capacity(d + 1);
        let mut m = n;
        for _ in 0..d {
            digits.push(m % p);
            m /= p;
        }
        digits.push(1);
        let f = Poly::from_u64s(&base, &digits);
        if is_irreducible(&f) {
            found = Some(digits);
            break;
        }
    }
    let v = found.expect("an irreducible of every degree exists");
    let mut guard = CACHE.lock().unwrap();
    guard
        .get_or_insert_with(HashMap::new)
        .insert((p, d), v.clone());
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn factor_difference_of_squares() {
        let f5 = Fq::prime(5).unwrap();
        let f = Poly::from_i64s(&f5, &[-1, 0, 1]); // t^2 - 1
        let (lead, factors) = factor(&f).unwrap();
        assert!(lead.is_one());
        let expect: Vec<Poly> = vec![
            Poly::from_i64s(&f5, &[-1, 1]),
            Poly::from_i64s(&f5, &[1, 1]),
        ];
        let got: Vec<Poly> = factors.iter().map(|(g, _)| g.clone()).collect();
        assert_eq!(got.len(), 2);
        for e in expect {
            assert!(got.contains(&e));
        }
    }

    #[test]
    fn irreducible_quadratic_over_gf3() {
        let f3 = Fq::prime(3).unwrap();
        let f = Poly::from_u64s(&f3, &[1, 0, 1]); // t^2+1
        assert!(is_irreducible(&f));
        let (_, factors) = factor(&f).unwrap();
        assert_eq!(factors, vec![(f.clone(), 1)]);
    }

    #[test]
    fn factor_with_unit_and_split_quadratic() {
        // 2t^3+2t = 2 t (t-2)(t+2) over GF(5)
        let f5 = Fq::prime(5).unwrap();
        let f = Poly::from_u64s(&f5, &[0, 2, 0, 2]);
        let (lead, factors) = factor(&f).unwrap();
        assert_eq!(lead, f5.from_u64(2));
        let got: Vec<(String, usize)> = factors
            .iter()
            .map(|(g, m)| (g.display("t"), *m))
            .collect();
        assert_eq!(
            got,
            vec![
                ("t".to_string(), 1),
                ("t+2".to_string(), 1),
                ("t+3".to_string(), 1)
            ]
        );
    }

    #[test]
    fn factor_roundtrip_random() {
        // products of random monic polynomials over several small fields
        let fields = vec![
            Fq::prime(3).unwrap(),
            Fq::prime(5).unwrap(),
            Fq::prime(7).unwrap(),
            Fq::extension(3, vec![1, 0, 1]).unwrap(),
        ];
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let field = &fields[rng.gen_range(0..fields.len())];
            let deg = rng.gen_range(1..=12);
            let mut coeffs: Vec<Fx> = (0..deg)
                .map(|_| field.from_encoding(rng.gen_range(0..field.order())))
                .collect();
            coeffs.push(field.one());
            let f = Poly::new(field, coeffs);
            let (lead, factors) = factor(&f).unwrap();
            let mut back = Poly::constant(lead);
            for (g, m) in &factors {
                assert!(g.is_monic());
                assert!(is_irreducible(g));
                back = back.mul(&g.pow(*m as u64));
            }
            assert_eq!(back, f);
            // pairwise distinct
            for i in 0..factors.len() {
                for j in i + 1..factors.len() {
                    assert_ne!(factors[i].0, factors[j].0);
                }
            }
        }
    }

    #[test]
    fn zero_poly_rejected() {
        let f5 = Fq::prime(5).unwrap();
        assert_eq!(factor(&Poly::zero(&f5)), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn monic_irreducible_counts() {
        let f3 = Fq::prime(3).unwrap();
        assert_eq!(monic_irreducibles(&f3, 1).unwrap().len(), 3);
        assert_eq!(monic_irreducibles(&f3, 2).unwrap().len(), 3); // (9-3)/2
        assert_eq!(monic_irreducibles(&f3, 3).unwrap().len(), 8); // (27-3)/3
    }

    #[test]
    fn canonical_modulus_gf9_is_x2_plus_1() {
        assert_eq!(canonical_irreducible(3, 2).unwrap(), vec![1, 0, 1]);
        assert_eq!(canonical_irreducible(5, 2).unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn squarefree_handles_pth_powers() {
        let f3 = Fq::prime(3).unwrap();
        // (t+1)^3 = t^3 + 1 over GF(3), derivative vanishes
        let f = Poly::from_u64s(&f3, &[1, 1]).pow(3);
        let (_, factors) = factor(&f).unwrap();
        assert_eq!(factors, vec![(Poly::from_u64s(&f3, &[1, 1]), 3)]);
    }
}

/// Extended Euclid: returns (g, s, t) monic g with s*a + t*b = g.
pub fn extended_gcd_poly(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    let field = a.field().clone();
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (Poly::one(&field), Poly::zero(&field));
    let (mut t0, mut t1) = (Poly::zero(&field), Poly::one(&field));
    while !r1.is_zero() {
        let (q, r2) = r0.divrem(&r1).unwrap();
        let s2 = s0.sub(&q.mul(&s1));
        let t2 = t0.sub(&q.mul(&t1));
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_zero() || r0.is_monic() {
        return (r0, s0, t0);
    }
    let inv = r0.leading().inv().unwrap();
    (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
}

impl Poly {
    /// Inverse of self modulo m; requires gcd(self, m) = 1.
    pub fn modinv(&self, m: &Poly) -> Result<Poly> {
        let (g, s, _) = extended_gcd_poly(self, m);
        if !g.is_one() {
            return Err(Error::DivisionByZero);
        }
        s.rem(m)
    }
}
