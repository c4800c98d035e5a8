//! Canonical finite fields GF(p^d) and embeddings between fields of the
//! same characteristic.
//!
//! An embedding is pinned down by the image of the source generator, chosen
//! as the least root (in encoding order) of the source modulus inside the
//! target. Embeddings are used single-hop throughout: every conversion asks
//! for the one embedding it needs, no composites are formed, so no global
//! compatibility system is required at the supported extension budgets.

use crate::error::{Error, Result};
use crate::field::{Fq, Fx};
use crate::poly::{canonical_irreducible, roots, Poly};
use std::collections::HashMap;
use std::sync::Mutex;

/// GF(p^d) with the canonical (least) monic irreducible modulus.
pub fn canonical_field(p: u64, d: usize) -> Result<Fq> {
    if d == 1 {
        return Fq::prime(p);
    }
    Fq::extension(p, canonical_irreducible(p, d)?)
}

/// A field embedding src -> dst determined by the image of the generator.
#[derive(Clone, Debug)]
pub struct Embedding {
    src: Fq,
    dst: Fq,
    /// powers[i] = image(x_src)^i for i < deg(src)
    powers: Vec<Fx>,
}

type Key = (u64, Vec<u64>);

fn key(k: &Fq) -> Key {
    (k.p(), k.modulus().to_vec())
}

static CACHE: Mutex<Option<HashMap<(Key, Key), Vec<Vec<u64>>>>> = Mutex::new(None);

impl Embedding {
    pub fn identity(k: &Fq) -> Embedding {
        Embedding::with_generator_image(k, k, k.gen())
    }

    pub fn with_generator_image(src: &Fq, dst: &Fq, image: Fx) -> Embedding {
        let mut powers = Vec::with_capacity(src.degree());
        let mut cur = dst.one();
        for _ in 0..src.degree() {
            powers.push(cur.clone());
            cur = cur.mul(&image);
        }
        Embedding {
            src: src.clone(),
            dst: dst.clone(),
            powers,
        }
    }

    /// The canonical embedding: generator goes to the least root of the
    /// source modulus in the target. Fails when deg(src) does not divide
    /// deg(dst). Cached.
    pub fn new(src: &Fq, dst: &Fq) -> Result<Embedding> {
        if src.p() != dst.p() {
            return Err(Error::FieldMismatch);
        }
        if dst.degree() % src.degree() != 0 {
            return Err(Error::NotASubfield {
                sub: src.degree(),
                sup: dst.degree(),
            });
        }
        if src == dst {
            return Ok(Embedding::identity(src));
        }
        {
            let guard = CACHE.lock().unwrap();
            if let Some(map) = guard.as_ref() {
                if let Some(raw) = map.get(&(key(src), key(dst))) {
                    return Ok(Embedding {
                        src: src.clone(),
                        dst: dst.clone(),
                        powers: raw.iter().map(|v| dst.element(v.clone())).collect(),
                    });
                }
            }
        }
        // lift the source modulus to dst with constant coefficients
        let lifted = Poly::new(
            dst,
            src.modulus().iter().map(|&c| dst.from_u64(c)).collect(),
        );
        let rs = roots(&lifted)?;
        let image = rs
            .into_iter()
            .next()
            .ok_or(Error::NotASubfield {
                sub: src.degree(),
                sup: dst.degree(),
            })?;
        let emb = Embedding::with_generator_image(src, dst, image);
        let raw: Vec<Vec<u64>> = emb.powers.iter().map(|f| f.coeffs().to_vec()).collect();
        CACHE
            .lock()
            .unwrap()
            .get_or_insert_with(HashMap::new)
            .insert((key(src), key(dst)), raw);
        Ok(emb)
    }

    pub fn src(&self) -> &Fq {
        &self.src
    }

    pub fn dst(&self) -> &Fq {
        &self.dst
    }

    /// Relative degree [dst : src].
    pub fn relative_degree(&self) -> usize {
        self.dst.degree() / self.src.degree()
    }

    pub fn apply(&self, a: &Fx) -> Fx {
        assert_eq!(a.field(), &self.src, "embedding applied to foreign element");
        let mut acc = self.dst.zero();
        for (i, &c) in a.coeffs().iter().enumerate() {
            if c != 0 {
                let term = self.powers[i].mul(&self.dst.from_u64(c));
                acc = acc.add(&term);
            }
        }
        acc
    }

    /// Solve apply(a) = b; None when b is outside the embedded subfield.
    pub fn preimage(&self, b: &Fx) -> Option<Fx> {
        let p = self.dst.p();
        let n = self.dst.degree();
        let m = self.src.degree();
        // columns: powers[i] as GF(p)-vectors; rows: n coordinates
        let mut aug: Vec<Vec<u64>> = (0..n)
            .map(|r| {
                let mut row: Vec<u64> = (0..m).map(|c| self.powers[c].coeffs()[r]).collect();
                row.push(b.coeffs()[r]);
                row
            })
            .collect();
        // gaussian elimination mod p
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut rank_row = 0usize;
        for col in 0..m {
            let Some(sel) = (rank_row..n).find(|&r| aug[r][col] != 0) else {
                continue;
            };
            aug.swap(rank_row, sel);
            let inv = crate::num::powmod(aug[rank_row][col], p - 2, p);
            for x in aug[rank_row].iter_mut() {
                *x = crate::num::mulmod(*x, inv, p);
            }
            for r in 0..n {
                if r != rank_row && aug[r][col] != 0 {
                    let f = aug[r][col];
                    let piv = aug[rank_row].clone();
                    for (x, &pv) in aug[r].iter_mut().zip(piv.iter()) {
                        *x = (*x + p - crate::num::mulmod(f, pv, p)) % p;
                    }
                }
            }
            pivots.push((rank_row, col));
            rank_row += 1;
        }
        // inconsistent rows mean b is outside the image
        for r in rank_row..n {
            if aug[r][m] != 0 {
                return None;
            }
        }
        let mut coeffs = vec![0u64; m];
        for &(r, c) in &pivots {
            coeffs[c] = aug[r][m];
        }
        Some(self.src.element(coeffs))
    }

    /// Norm of b down to the source field along this embedding:
    /// the product of the Galois conjugates of b over the embedded copy.
    pub fn norm(&self, b: &Fx) -> Fx {
        let e = (self.src.degree() * self.relative_degree()) as u32;
        debug_assert_eq!(e as usize, self.dst.degree());
        let step = self.src.degree() as u32;
        let mut acc = self.dst.one();
        let mut cur = b.clone();
        for _ in 0..self.relative_degree() {
            acc = acc.mul(&cur);
            cur = cur.frobenius(step);
        }
        self.preimage(&acc)
            .expect("norm lies in the embedded subfield")
    }

    /// Trace of b down to the source field along this embedding.
    pub fn trace(&self, b: &Fx) -> Fx {
        let step = self.src.degree() as u32;
        let mut acc = self.dst.zero();
        let mut cur = b.clone();
        for _ in 0..self.relative_degree() {
            acc = acc.add(&cur);
            cur = cur.frobenius(step);
        }
        self.preimage(&acc)
            .expect("trace lies in the embedded subfield")
    }
}

/// The canonical extension of `base` of relative degree d, with the
/// embedding of the base. Degree 1 returns the base itself.
pub fn extension_of(base: &Fq, d: usize) -> Result<(Fq, Embedding)> {
    if d == 1 {
        return Ok((base.clone(), Embedding::identity(base)));
    }
    let target = canonical_field(base.p(), base.degree() * d)?;
    let emb = Embedding::new(base, &target)?;
    Ok((target, emb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_and_trace_gf9_over_gf3() {
        let f3 = Fq::prime(3).unwrap();
        let gf9 = Fq::extension(3, vec![1, 0, 1]).unwrap();
        let emb = Embedding::new(&f3, &gf9).unwrap();
        let xp1 = gf9.element(vec![1, 1]);
        // N(x+1) = (x+1)^(1+3) = (x+1)^4 = 2
        assert_eq!(emb.norm(&xp1), f3.from_u64(2));
        // Tr(x) = x + x^3 = x - x = 0
        assert_eq!(emb.trace(&gf9.gen()), f3.zero());
    }

    #[test]
    fn identity_norm_is_identity() {
        let gf9 = Fq::extension(3, vec![1, 0, 1]).unwrap();
        let e = Embedding::identity(&gf9);
        for a in gf9.elements() {
            assert_eq!(e.norm(&a), a);
            assert_eq!(e.trace(&a), a);
        }
    }

    #[test]
    fn embedding_roundtrip() {
        let gf9 = Fq::extension(3, vec![1, 0, 1]).unwrap();
        let gf81 = canonical_field(3, 4).unwrap();
        let emb = Embedding::new(&gf9, &gf81).unwrap();
        for a in gf9.elements() {
            let b = emb.apply(&a);
            assert_eq!(emb.preimage(&b), Some(a.clone()));
        }
        // multiplicativity of the embedding
        let u = gf9.element(vec![1, 1]);
        let v = gf9.element(vec![2, 1]);
        assert_eq!(emb.apply(&u.mul(&v)), emb.apply(&u).mul(&emb.apply(&v)));
    }

    #[test]
    fn norm_surjective_trace_additive_small() {
        // exhaustive over GF(q), q <= 9, relative degree <= 3
        for (p, d0) in [(3u64, 1usize), (5, 1), (7, 1), (3, 2)] {
            let base = canonical_field(p, d0).unwrap();
            for rel in 2..=3usize {
                let (ext, emb) = extension_of(&base, rel).unwrap();
                if ext.order() > 100_000 {
                    continue;
                }
                let mut norms = std::collections::HashSet::new();
                for a in ext.units() {
                    norms.insert(emb.norm(&a).encode());
                }
                assert_eq!(norms.len() as u64, base.order() - 1);
                // trace additive on a sample
                let a = ext.from_encoding(3 % ext.order());
                let b = ext.from_encoding(5 % ext.order());
                assert_eq!(emb.trace(&a.add(&b)), emb.trace(&a).add(&emb.trace(&b)));
                // norm multiplicative on a sample
                let u = ext.from_encoding(7 % ext.order());
                let v = ext.from_encoding(11 % ext.order());
                if !u.is_zero() && !v.is_zero() {
                    assert_eq!(emb.norm(&u.mul(&v)), emb.norm(&u).mul(&emb.norm(&v)));
                }
            }
        }
    }
}

/// The embedding src -> dst that is compatible with two given anchor maps
/// from a common field: psi with psi(src_anchor(x)) = dst_anchor(x).
/// Among the compatible embeddings the one with the least generator image
/// is returned.
pub fn anchored_embedding(
    src: &Fq,
    dst: &Fq,
    src_anchor: &Embedding,
    dst_anchor: &Embedding,
) -> Result<Embedding> {
    assert_eq!(src_anchor.dst(), src);
    assert_eq!(dst_anchor.dst(), dst);
    assert_eq!(src_anchor.src(), dst_anchor.src());
    let base_gen = src_anchor.src().gen();
    let probe = src_anchor.apply(&base_gen);
    let want = dst_anchor.apply(&base_gen);
    let psi0 = Embedding::new(src, dst)?;
    let x_img0 = psi0.apply(&src.gen());
    let mut best: Option<Fx> = None;
    let mut img = x_img0;
    for _ in 0..src.degree() * psi0.relative_degree() {
        let cand = Embedding::with_generator_image(src, dst, img.clone());
        // candidate must be a field map: check it respects the modulus
        let lifted: Fx = {
            let m = src.modulus();
            let mut acc = dst.zero();
            let mut pw = dst.one();
            for &c in m.iter() {
                acc = acc.add(&pw.mul(&dst.from_u64(c)));
                pw = pw.mul(&img);
            }
            acc
        };
        if lifted.is_zero() && cand.apply(&probe) == want {
            best = match best {
                Some(b) if b.encode() <= img.encode() => Some(b),
                _ => Some(img.clone()),
            };
        }
        img = img.frobenius(1);
    }
    match best {
        Some(b) => Ok(Embedding::with_generator_image(src, dst, b)),
        None => Err(Error::NotASubfield {
            sub: src.degree(),
            sup: dst.degree(),
        }),
    }
}
