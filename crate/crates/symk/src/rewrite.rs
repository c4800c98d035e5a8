//! Symbol rewriting over a rational function field: semilocal unit
//! normalization of K_2 symbols and general-position decompositions of
//! higher symbols, both certified against the normal-form oracle.

use crate::curve::{Curve, Place, RatFn};
use crate::error::{Error, Result};
use crate::field::{Fq, Fx};
use crate::milnor::{oracle_equal, FnElement, FnSymbol, OracleVerdict};
use crate::poly::{monic_irreducibles, Poly};
use std::collections::BTreeSet;

/// Result of a certified rewriting pass.
#[derive(Debug)]
pub struct RewriteOutcome {
    pub element: FnElement,
    /// number of symbol pairs that were actually rewritten
    pub steps: usize,
    pub verdict: OracleVerdict,
}

/// Monic irreducibles over the base avoiding the finite places of z,
/// lowest degrees first.
fn avoiding_irreducibles(base: &Fq, z: &[Place], count: usize) -> Result<Vec<Poly>> {
    let forbidden: BTreeSet<Poly> = z
        .iter()
        .filter_map(|p| p.p1_irreducible().cloned())
        .collect();
    let mut out = Vec::new();
    for d in 1..=6usize {
        for pi in monic_irreducibles(base, d)? {
            if !forbidden.contains(&pi) {
                out.push(pi);
                if out.len() == count {
                    return Ok(out);
                }
            }
        }
    }
    Err(Error::BaseFieldTooSmall)
}

/// CRT over k[t]: the unique R of degree < sum deg(pi_k) with
/// R = r_k mod pi_k.
fn crt(base: &Fq, data: &[(Poly, Poly)]) -> Poly {
    let mut modulus = Poly::one(base);
    for (pi, _) in data {
        modulus = modulus.mul(pi);
    }
    let mut acc = Poly::zero(base);
    for (pi, r) in data {
        let cof = modulus.div_exact(pi);
        let inv = cof.modinv(pi).expect("moduli are pairwise coprime");
        acc = acc.add(&r.mul(&cof).mul(&inv));
    }
    acc.rem(&modulus).unwrap()
}

/// A unit of the semilocal ring at z with prescribed residue values.
/// Targets are elements of the residue fields (nonzero); the value at
/// infinity is prescribed separately when infinity belongs to z.
fn unit_with_values(
    base: &Fq,
    finite: &[(Place, Fx)],
    at_infinity: Option<Fx>,
    avoid: &[Place],
) -> Result<RatFn> {
    let curve = Curve::p1(base);
    let c_inf = at_infinity.unwrap_or_else(|| base.one());
    if finite.is_empty() {
        return RatFn::constant(&curve, c_inf);
    }
    let mut places: Vec<Place> = finite.iter().map(|(p, _)| p.clone()).collect();
    places.extend(avoid.iter().cloned());
    let g = avoiding_irreducibles(base, &places, 1)?.remove(0);
    let total: usize = places.iter().map(|p| p.degree()).sum();
    let m = total / g.deg() + 1;
    let gm = g.pow(m as u64);
    // mu = c_inf + N(t)/g(t)^m with N(p_k) = (c_k - c_inf) * g(p_k)^m
    let mut data = Vec::new();
    for (p, target) in finite {
        let gm_val = RatFn::p1(&curve, gm.clone(), Poly::one(base))
            .unwrap()
            .reduce_at(p)?;
        let c_inf_val = p.base_embedding().apply(&c_inf);
        let want = target.sub(&c_inf_val).mul(&gm_val);
        data.push((
            p.p1_irreducible().unwrap().clone(),
            p.element_as_polynomial(&want)?,
        ));
    }
    let n = crt(base, &data);
    let num = n.add(&Poly::constant(c_inf.clone()).mul(&gm));
    if num.is_zero() {
        return Err(Error::BaseFieldTooSmall);
    }
    let mu = RatFn::p1(&curve, num, gm)?;
    for (p, target) in finite {
        debug_assert_eq!(&mu.reduce_at(p)?, target);
    }
    Ok(mu)
}

/// Uniformizers at the places of z, adjusted by semilocal units so that
/// pairwise sums are units on all of z. Works in any odd characteristic:
/// the adjusted uniformizers take the value 1 at every other place of z,
/// so the pairwise sums evaluate to 2 there.
fn adjusted_uniformizers(base: &Fq, z: &[Place]) -> Result<Vec<RatFn>> {
    if base.p() == 2 {
        return Err(Error::BaseFieldTooSmall);
    }
    let curve = Curve::p1(base);
    let has_infinity = z.iter().any(|p| p.is_infinite());
    // a function with a simple zero at infinity and no zero or pole at the
    // finite places of z; also used to clear the infinite pole of the
    // finite uniformizers when infinity belongs to z
    let eta = if has_infinity {
        let avoid = avoiding_irreducibles(base, z, 6)?;
        let mut found = None;
        'outer: for h1 in &avoid {
            for h2 in &avoid {
                if h2.deg() == h1.deg() + 1 {
                    found = Some((h1.clone(), h2.clone()));
                    break 'outer;
                }
            }
        }
        let (h1, h2) = found.ok_or(Error::BaseFieldTooSmall)?;
        Some(RatFn::p1(&curve, h1, h2)?)
    } else {
        None
    };
    let mut raw: Vec<RatFn> = Vec::new();
    for p in z {
        if p.is_infinite() {
            raw.push(eta.clone().unwrap());
        } else {
            let mut pi = p.uniformizer();
            if let Some(eta) = &eta {
                pi = pi.mul(&eta.pow_i64(p.degree() as i64));
            }
            raw.push(pi);
        }
    }
    // keep the raw uniformizers when every pairwise sum is already a unit
    // on z (always true for fewer than three places)
    let mut raw_ok = true;
    'check: for i in 0..raw.len() {
        for j in i + 1..raw.len() {
            let Some(s) = raw[i].add(&raw[j]) else {
                raw_ok = false;
                break 'check;
            };
            for p in z {
                if s.valuation(p) != 0 {
                    raw_ok = false;
                    break 'check;
                }
            }
        }
    }
    if raw_ok {
        return Ok(raw);
    }
    // adjust: mu_i * pi_i takes the value 1 at every p_k, k != i, while
    // mu_i itself takes the value 1 at p_i so the valuation there stays 1
    let mut out = Vec::new();
    for (i, pi) in raw.iter().enumerate() {
        let mut finite_targets = Vec::new();
        let mut inf_target = None;
        for (k, p) in z.iter().enumerate() {
            let want = if k == i {
                p.residue_field().one()
            } else {
                let val = pi.reduce_at(p)?;
                debug_assert!(!val.is_zero(), "uniformizers are units at other places");
                val.inv()?
            };
            if p.is_infinite() {
                if k != i {
                    inf_target = Some(want);
                }
            } else {
                finite_targets.push((p.clone(), want));
            }
        }
        if finite_targets.is_empty() && inf_target.is_none() {
            out.push(pi.clone());
            continue;
        }
        let mu = unit_with_values(base, &finite_targets, inf_target, z)?;
        out.push(mu.mul(pi));
    }
    for (i, pt) in out.iter().enumerate() {
        debug_assert_eq!(pt.valuation(&z[i]), 1);
    }
    Ok(out)
}

/// Rewrite a degree-2 element over k(t) so that the second entry of every
/// symbol is a unit at all places of z; the output is oracle-equal to the
/// input. The identity {x, y} = {-x/y, x+y} handles crossed uniformizer
/// pairs; pairwise sums are kept away from zero by semilocal unit
/// multipliers, so no constant-field extension is needed.
pub fn semilocal_rewrite(x: &FnElement, z: &[Place]) -> Result<RewriteOutcome> {
    if x.degree() != 2 {
        return Err(Error::Unsupported(
            "semilocal rewriting is a K2 operation".into(),
        ));
    }
    let curve = x.curve().clone();
    if curve.is_elliptic() {
        return Err(Error::Unsupported("semilocal rewriting works on P1".into()));
    }
    let base = curve.base().clone();
    // fast path: already normalized
    let needs_work = x
        .terms()
        .any(|(sym, _)| z.iter().any(|p| sym.entries[1].valuation(p) != 0));
    if !needs_work {
        return Ok(RewriteOutcome {
            element: x.clone(),
            steps: 0,
            verdict: OracleVerdict::Equal,
        });
    }
    let pi = adjusted_uniformizers(&base, z)?;
    let mut out = FnElement::zero(&curve, 2);
    let mut steps = 0usize;
    let minus_one = RatFn::constant(&curve, base.from_i64(-1)).unwrap();
    for (sym, &c) in x.terms() {
        let a = &sym.entries[0];
        let b = &sym.entries[1];
        if z.iter().all(|p| b.valuation(p) == 0) {
            out.insert(sym.clone(), c);
            continue;
        }
        steps += 1;
        let m: Vec<i64> = z.iter().map(|p| a.valuation(p)).collect();
        let l: Vec<i64> = z.iter().map(|p| b.valuation(p)).collect();
        let mut u = a.clone();
        for (pi_i, &mi) in pi.iter().zip(&m) {
            if mi != 0 {
                u = u.mul(&pi_i.pow_i64(-mi));
            }
        }
        let mut w = b.clone();
        for (pi_i, &li) in pi.iter().zip(&l) {
            if li != 0 {
                w = w.mul(&pi_i.pow_i64(-li));
            }
        }
        // {a, b} = {u, w} + sum_j l_j {u, pi_j} + sum_i m_i {pi_i, w}
        //          + sum_{i,j} m_i l_j {pi_i, pi_j}
        out.insert(
            FnSymbol {
                entries: vec![u.clone(), w.clone()],
            },
            c,
        );
        for (j, &lj) in l.iter().enumerate() {
            if lj != 0 {
                // {u, pi_j} = -{pi_j, u}
                out.insert(
                    FnSymbol {
                        entries: vec![pi[j].clone(), u.clone()],
                    },
                    -c * lj,
                );
            }
        }
        for (i, &mi) in m.iter().enumerate() {
            if mi != 0 {
                out.insert(
                    FnSymbol {
                        entries: vec![pi[i].clone(), w.clone()],
                    },
                    c * mi,
                );
            }
        }
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0 {
                continue;
            }
            for (j, &lj) in l.iter().enumerate() {
                if lj == 0 {
                    continue;
                }
                if i == j {
                    // {pi, pi} = {pi, -1}
                    out.insert(
                        FnSymbol {
                            entries: vec![pi[i].clone(), minus_one.clone()],
                        },
                        c * mi * lj,
                    );
                } else {
                    // {pi_i, pi_j} = {-pi_i/pi_j, pi_i + pi_j}
                    let sum = pi[i]
                        .add(&pi[j])
                        .expect("adjusted uniformizers never cancel");
                    let ratio = pi[i].div(&pi[j]).neg();
                    out.insert(
                        FnSymbol {
                            entries: vec![ratio, sum],
                        },
                        c * mi * lj,
                    );
                }
            }
        }
    }
    // postcondition: all second entries are units on z
    for (sym, _) in out.terms() {
        for p in z {
            assert_eq!(
                sym.entries[1].valuation(p),
                0,
                "second entry must be a unit at {p}"
            );
        }
    }
    let verdict = oracle_equal(&out, x)?;
    assert_eq!(
        verdict,
        OracleVerdict::Equal,
        "rewriting must preserve the class"
    );
    Ok(RewriteOutcome {
        element: out,
        steps,
        verdict,
    })
}

fn supports_pairwise_disjoint(entries: &[RatFn], upto: usize) -> Result<bool> {
    let mut seen: BTreeSet<Place> = BTreeSet::new();
    for e in entries.iter().take(upto) {
        for p in e.divisor()?.support() {
            if !seen.insert(p) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rewrite a degree-(r+1) element over k(t) as a sum of symbols whose
/// first r entries have pairwise disjoint divisor supports; oracle-equal
/// to the input. The condition is empty for r <= 1.
pub fn general_position(x: &FnElement) -> Result<RewriteOutcome> {
    let curve = x.curve().clone();
    if curve.is_elliptic() {
        return Err(Error::Unsupported("general position works on P1".into()));
    }
    let n = x.degree();
    if n <= 2 {
        return Ok(RewriteOutcome {
            element: x.clone(),
            steps: 0,
            verdict: OracleVerdict::Equal,
        });
    }
    let mut out = FnElement::zero(&curve, n);
    let mut steps = 0usize;
    for (sym, &c) in x.terms() {
        if supports_pairwise_disjoint(&sym.entries, n - 1)? {
            out.insert(sym.clone(), c);
            continue;
        }
        // recurse on the prefix of length n-1
        let prefix = FnElement::symbol(&curve, sym.entries[..n - 1].to_vec());
        let gp = general_position(&prefix)?;
        steps += gp.steps + 1;
        let a_last = &sym.entries[n - 1];
        for (psym, &pc) in gp.element.terms() {
            let mut z: BTreeSet<Place> = BTreeSet::new();
            for e in &psym.entries[..n - 2] {
                for p in e.divisor()?.support() {
                    z.insert(p);
                }
            }
            let zv: Vec<Place> = z.into_iter().collect();
            let pair = FnElement::symbol(
                &curve,
                vec![psym.entries[n - 2].clone(), a_last.clone()],
            );
            let rewritten = semilocal_rewrite(&pair, &zv)?;
            steps += rewritten.steps;
            for (qsym, &qc) in rewritten.element.terms() {
                // {y1, y2} = -{y2, y1} puts the z-unit entry first
                let mut entries = psym.entries[..n - 2].to_vec();
                entries.push(qsym.entries[1].clone());
                entries.push(qsym.entries[0].clone());
                out.insert(FnSymbol { entries }, -c * pc * qc);
            }
        }
    }
    for (sym, _) in out.terms() {
        assert!(
            supports_pairwise_disjoint(&sym.entries, n - 1)?,
            "general-position postcondition"
        );
    }
    let verdict = oracle_equal(&out, x)?;
    assert_eq!(
        verdict,
        OracleVerdict::Equal,
        "rewriting must preserve the class"
    );
    Ok(RewriteOutcome {
        element: out,
        steps,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::random_p1_fn;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn f5() -> Fq {
        Fq::prime(5).unwrap()
    }

    fn place_t(k: &Fq) -> Place {
        Place::p1_finite(k, &Poly::from_u64s(k, &[0, 1])).unwrap()
    }

    fn place_t1(k: &Fq) -> Place {
        Place::p1_finite(k, &Poly::from_i64s(k, &[-1, 1])).unwrap()
    }

    #[test]
    fn semilocal_example_t_t1() {
        // {t, t-1} with z = {(t), (t-1)} rewrites to {-t/(t-1), 2t-1}
        let k = f5();
        let c = Curve::p1(&k);
        let t = RatFn::coordinate(&c);
        let t1 = RatFn::p1(&c, Poly::from_i64s(&k, &[-1, 1]), Poly::one(&k)).unwrap();
        let x = FnElement::symbol(&c, vec![t.clone(), t1.clone()]);
        let z = vec![place_t(&k), place_t1(&k)];
        let r = semilocal_rewrite(&x, &z).unwrap();
        assert_eq!(r.verdict, OracleVerdict::Equal);
        assert_eq!(r.steps, 1);
        let expect_first = t.div(&t1).neg(); // -t/(t-1)
        let expect_second =
            RatFn::p1(&c, Poly::from_i64s(&k, &[-1, 2]), Poly::one(&k)).unwrap();
        let terms: Vec<(&FnSymbol, &i64)> = r.element.terms().collect();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].1, &1);
        assert_eq!(terms[0].0.entries[0], expect_first);
        assert_eq!(terms[0].0.entries[1], expect_second);
    }

    #[test]
    fn semilocal_already_normal() {
        let k = f5();
        let c = Curve::p1(&k);
        let u = RatFn::p1(&c, Poly::from_u64s(&k, &[2, 1]), Poly::one(&k)).unwrap();
        let w = RatFn::p1(&c, Poly::from_u64s(&k, &[3, 1]), Poly::one(&k)).unwrap();
        let x = FnElement::symbol(&c, vec![u, w]);
        let z = vec![place_t(&k), place_t1(&k)];
        let r = semilocal_rewrite(&x, &z).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(&r.element, &x);
    }

    #[test]
    fn semilocal_t_t_uses_minus_one() {
        // {t, t} = {t, -1}: the second entry becomes a unit
        let k = f5();
        let c = Curve::p1(&k);
        let t = RatFn::coordinate(&c);
        let x = FnElement::symbol(&c, vec![t.clone(), t]);
        let z = vec![place_t(&k)];
        let r = semilocal_rewrite(&x, &z).unwrap();
        assert_eq!(r.verdict, OracleVerdict::Equal);
        for (sym, _) in r.element.terms() {
            assert_eq!(sym.entries[1].valuation(&z[0]), 0);
        }
    }

    #[test]
    fn semilocal_random_certified() {
        let k = f5();
        let c = Curve::p1(&k);
        let mut rng = ChaCha12Rng::seed_from_u64(55);
        let zs = vec![place_t(&k), place_t1(&k), Place::p1_infinity(&k)];
        for _ in 0..30 {
            let a = random_p1_fn(&k, 3, &mut rng);
            let b = random_p1_fn(&k, 3, &mut rng);
            let x = FnElement::symbol(&c, vec![a, b]);
            let r = semilocal_rewrite(&x, &zs).unwrap();
            assert_eq!(r.verdict, OracleVerdict::Equal);
        }
    }

    #[test]
    fn general_position_r1_unchanged() {
        let k = f5();
        let c = Curve::p1(&k);
        let t = RatFn::coordinate(&c);
        let x = FnElement::symbol(&c, vec![t.clone(), t]);
        let r = general_position(&x).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(&r.element, &x);
    }

    #[test]
    fn general_position_t_t_t1() {
        let k = f5();
        let c = Curve::p1(&k);
        let t = RatFn::coordinate(&c);
        let t1 = RatFn::p1(&c, Poly::from_i64s(&k, &[-1, 1]), Poly::one(&k)).unwrap();
        let x = FnElement::symbol(&c, vec![t.clone(), t.clone(), t1]);
        let r = general_position(&x).unwrap();
        assert_eq!(r.verdict, OracleVerdict::Equal);
        assert!(r.steps > 0);
    }

    #[test]
    fn general_position_random_certified() {
        let k = f5();
        let c = Curve::p1(&k);
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..10 {
            let a = random_p1_fn(&k, 2, &mut rng);
            let b = random_p1_fn(&k, 2, &mut rng);
            let d = random_p1_fn(&k, 2, &mut rng);
            let x = FnElement::symbol(&c, vec![a, b, d]);
            let r = general_position(&x).unwrap();
            assert_eq!(r.verdict, OracleVerdict::Equal);
        }
    }

    #[test]
    fn unit_with_values_hits_targets() {
        let k = f5();
        let pt = place_t(&k);
        let pt1 = place_t1(&k);
        let pi2 = Place::p1_finite(&k, &Poly::from_u64s(&k, &[2, 0, 1])).unwrap();
        let targets = vec![
            (pt.clone(), k.from_u64(3)),
            (pt1.clone(), k.from_u64(2)),
            (pi2.clone(), pi2.residue_field().element(vec![1, 1])),
        ];
        let mu = unit_with_values(&k, &targets, Some(k.from_u64(4)), &[]).unwrap();
        for (p, want) in &targets {
            assert_eq!(&mu.reduce_at(p).unwrap(), want);
        }
        assert_eq!(
            mu.reduce_at(&Place::p1_infinity(&k)).unwrap(),
            k.from_u64(4)
        );
    }
}
