//! Places, valuations, divisors, residue-field reduction and function
//! evaluation on the two supported curve classes: the projective line over
//! GF(q) and short-Weierstrass elliptic curves y^2 = x^3 + ax + b (p >= 5).

use crate::embed::{canonical_field, extension_of, Embedding};
use crate::error::{Error, Result};
use crate::field::{Fq, Fx};
use crate::poly::{factor, is_irreducible, monic_irreducibles, roots, Poly};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub const POINT_ENUM_GUARD: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// curves
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Curve {
    P1 { base: Fq },
    Elliptic { base: Fq, a: Fx, b: Fx },
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::P1 { base } => write!(f, "P1/{base}"),
            Curve::Elliptic { base, a, b } => {
                write!(f, "E/{base}: y^2 = x^3 + {a}*x + {b}")
            }
        }
    }
}

impl Curve {
    pub fn p1(base: &Fq) -> Curve {
        Curve::P1 { base: base.clone() }
    }

    /// y^2 = x^3 + ax + b; requires p >= 5 and nonzero discriminant.
    pub fn elliptic(base: &Fq, a: Fx, b: Fx) -> Result<Curve> {
        if base.p() < 5 {
            return Err(Error::Unsupported(
                "elliptic curves require characteristic >= 5".into(),
            ));
        }
        let disc = base
            .from_u64(4)
            .mul(&a.pow_u128(3))
            .add(&base.from_u64(27).mul(&b.pow_u128(2)));
        if disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(Curve::Elliptic {
            base: base.clone(),
            a,
            b,
        })
    }

    pub fn base(&self) -> &Fq {
        match self {
            Curve::P1 { base } | Curve::Elliptic { base, .. } => base,
        }
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(self, Curve::Elliptic { .. })
    }

    /// Weierstrass coefficients embedded into an extension of the base.
    pub fn coeffs_in(&self, target: &Fq) -> Result<(Fx, Fx)> {
        match self {
            Curve::P1 { .. } => Err(Error::Unsupported("P1 has no Weierstrass data".into())),
            Curve::Elliptic { base, a, b } => {
                let emb = Embedding::new(base, target)?;
                Ok((emb.apply(a), emb.apply(b)))
            }
        }
    }

    /// x^3 + ax + b as a polynomial over an extension of the base.
    pub fn cubic_in(&self, target: &Fq) -> Result<Poly> {
        let (a, b) = self.coeffs_in(target)?;
        Ok(Poly::new(
            target,
            vec![b, a, target.zero(), target.one()],
        ))
    }

    // --- elliptic group law (char >= 5) ---

    pub fn on_curve(&self, l: &Fq, p: &EllPoint) -> bool {
        match p {
            EllPoint::Infinity => true,
            EllPoint::Affine(x, y) => {
                let (a, b) = self.coeffs_in(l).expect("elliptic curve");
                y.mul(y) == x.pow_u128(3).add(&a.mul(x)).add(&b)
            }
        }
    }

    pub fn point_neg(&self, p: &EllPoint) -> EllPoint {
        match p {
            EllPoint::Infinity => EllPoint::Infinity,
            EllPoint::Affine(x, y) => EllPoint::Affine(x.clone(), y.neg()),
        }
    }

    pub fn point_add(&self, l: &Fq, p: &EllPoint, q: &EllPoint) -> EllPoint {
        let (a, _) = self.coeffs_in(l).expect("elliptic curve");
        match (p, q) {
            (EllPoint::Infinity, r) | (r, EllPoint::Infinity) => r.clone(),
            (EllPoint::Affine(x1, y1), EllPoint::Affine(x2, y2)) => {
                if x1 == x2 && *y1 == y2.neg() {
                    return EllPoint::Infinity;
                }
                let lambda = if x1 == x2 {
                    // tangent
                    let num = l.from_u64(3).mul(&x1.mul(x1)).add(&a);
                    let den = l.from_u64(2).mul(y1);
                    num.div(&den).expect("2y != 0 off 2-torsion")
                } else {
                    y2.sub(y1).div(&x2.sub(x1)).unwrap()
                };
                let x3 = lambda.mul(&lambda).sub(x1).sub(x2);
                let y3 = lambda.mul(&x1.sub(&x3)).sub(y1);
                EllPoint::Affine(x3, y3)
            }
        }
    }

    pub fn point_mul(&self, l: &Fq, n: i64, p: &EllPoint) -> EllPoint {
        let mut base = if n < 0 { self.point_neg(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = EllPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.point_add(l, &acc, &base);
            }
            base = self.point_add(l, &base, &base);
            k >>= 1;
        }
        acc
    }

    /// All points of E over the degree-d extension, infinity first, then
    /// sorted by coordinate encoding. Guarded exhaustive sweep.
    pub fn points_over(&self, d: usize) -> Result<(Fq, Vec<EllPoint>)> {
        let base = self.base();
        let (l, _) = extension_of(base, d)?;
        if l.order() > POINT_ENUM_GUARD {
            return Err(Error::TooLarge(format!(
                "point enumeration over field of order {}",
                l.order()
            )));
        }
        let cubic = self.cubic_in(&l)?;
        // square table: enc(z^2) -> z with least encoding
        let mut sqrt: std::collections::HashMap<u64, Fx> = std::collections::HashMap::new();
        for z in l.elements() {
            let e = z.mul(&z).encode();
            sqrt.entry(e).or_insert(z);
        }
        let mut pts = vec![EllPoint::Infinity];
        for x in l.elements() {
            let c = cubic.eval(&x);
            if c.is_zero() {
                pts.push(EllPoint::Affine(x, l.zero()));
            } else if let Some(y) = sqrt.get(&c.encode()) {
                let y2 = y.neg();
                let (lo, hi) = if y.encode() < y2.encode() {
                    (y.clone(), y2)
                } else {
                    (y2, y.clone())
                };
                pts.push(EllPoint::Affine(x.clone(), lo));
                pts.push(EllPoint::Affine(x, hi));
            }
        }
        Ok((l, pts))
    }
}

/// A point of an elliptic curve over some extension field.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EllPoint {
    Infinity,
    Affine(Fx, Fx),
}

impl fmt::Debug for EllPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for EllPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllPoint::Infinity => write!(f, "inf"),
            EllPoint::Affine(x, y) => write!(f, "({x},{y})"),
        }
    }
}

impl EllPoint {
    pub fn encode_pair(&self) -> (u64, u64) {
        match self {
            // infinity sorts before every affine point
            EllPoint::Infinity => (u64::MAX, u64::MAX),
            EllPoint::Affine(x, y) => (x.encode(), y.encode()),
        }
    }
}

// ---------------------------------------------------------------------------
// places
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum PlaceRepr {
    P1Finite {
        base: Fq,
        pi: Poly,
        /// residue field
        rf: Fq,
        /// embedding of the base into the residue field
        base_emb: Embedding,
        /// image of t in the residue field
        root: Fx,
    },
    P1Infinity {
        base: Fq,
    },
    EllFinite {
        curve: Curve,
        degree: usize,
        /// residue field = canonical extension of exact degree
        rf: Fq,
        base_emb: Embedding,
        /// canonical orbit representative
        x0: Fx,
        y0: Fx,
        /// minimal polynomial of x0 over the base
        pi_x: Poly,
    },
    EllInfinity {
        curve: Curve,
    },
}

/// A closed point of a supported curve; cheap to clone.
#[derive(Clone, Debug)]
pub struct Place(Arc<PlaceRepr>);

impl PartialEq for Place {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.sort_key() == other.sort_key()
    }
}
impl Eq for Place {}

impl std::hash::Hash for Place {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.sort_key().hash(state);
    }
}

impl PartialOrd for Place {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Place {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            PlaceRepr::P1Finite { pi, .. } => write!(f, "({})", pi.display("t")),
            PlaceRepr::P1Infinity { .. } => write!(f, "inf"),
            PlaceRepr::EllFinite { x0, y0, .. } => write!(f, "[({x0},{y0})]@E"),
            PlaceRepr::EllInfinity { .. } => write!(f, "inf@E"),
        }
    }
}

type PlaceKey = (usize, u8, Vec<u64>);

impl Place {
    fn sort_key(&self) -> PlaceKey {
        match &*self.0 {
            PlaceRepr::P1Finite { pi, base, .. } => {
                let mut v = vec![base.p(), base.order()];
                v.extend(pi.encoding_digits());
                (self.degree(), 0, v)
            }
            PlaceRepr::P1Infinity { base } => (1, 1, vec![base.p(), base.order()]),
            PlaceRepr::EllFinite { degree, x0, y0, .. } => {
                (*degree, 2, vec![x0.encode(), y0.encode()])
            }
            PlaceRepr::EllInfinity { .. } => (1, 3, vec![]),
        }
    }

    /// Finite place of P1 given by a monic irreducible polynomial.
    pub fn p1_finite(base: &Fq, pi: &Poly) -> Result<Place> {
        if !pi.is_monic() || !is_irreducible(pi) {
            return Err(Error::Unsupported(
                "a finite place of P1 needs a monic irreducible polynomial".into(),
            ));
        }
        let d = pi.deg();
        let (rf, base_emb, root) = if base.is_prime_field() {
            let rf = if d == 1 {
                base.clone()
            } else {
                Fq::extension(base.p(), pi.encoding_digits())?
            };
            let base_emb = Embedding::new(base, &rf)?;
            let root = if d == 1 {
                pi.coeff(0).neg()
            } else {
                rf.gen()
            };
            (rf, base_emb, root)
        } else {
            // flatten k[t]/(pi) to the canonical field of the right order
            let rf = canonical_field(base.p(), base.degree() * d)?;
            let base_emb = Embedding::new(base, &rf)?;
            let lifted = pi.map_coeffs(&rf, |c| base_emb.apply(c));
            let rs = roots(&lifted)?;
            let root = rs.into_iter().next().expect("pi splits in its residue field");
            (rf, base_emb, root)
        };
        Ok(Place(Arc::new(PlaceRepr::P1Finite {
            base: base.clone(),
            pi: pi.clone(),
            rf,
            base_emb,
            root,
        })))
    }

    pub fn p1_infinity(base: &Fq) -> Place {
        Place(Arc::new(PlaceRepr::P1Infinity { base: base.clone() }))
    }

    /// The elliptic place through a point given over the degree-d canonical
    /// extension. The stored representative is the least point of the
    /// Frobenius orbit; the degree is the exact orbit size.
    pub fn elliptic_from_point(curve: &Curve, d: usize, pt: &EllPoint) -> Result<Place> {
        let base = curve.base();
        match pt {
            EllPoint::Infinity => Ok(Place(Arc::new(PlaceRepr::EllInfinity {
                curve: curve.clone(),
            }))),
            EllPoint::Affine(x, y) => {
                let (l, _) = extension_of(base, d)?;
                assert_eq!(x.field(), &l, "point coordinates live in ext of degree d");
                let step = base.degree() as u32;
                // walk the Frobenius orbit
                let mut orbit = vec![(x.clone(), y.clone())];
                loop {
                    let (cx, cy) = orbit.last().unwrap();
                    let nx = cx.frobenius(step);
                    let ny = cy.frobenius(step);
                    if (&nx, &ny) == (x, y) {
                        break;
                    }
                    orbit.push((nx, ny));
                }
                let e = orbit.len();
                debug_assert_eq!(d % e, 0);
                let (rf, data) = if e == d {
                    (l.clone(), orbit)
                } else {
                    // coordinates actually live in the subfield of degree e
                    let (sub, _) = extension_of(base, e)?;
                    let emb = Embedding::new(&sub, &l)?;
                    let mapped: Vec<(Fx, Fx)> = orbit
                        .iter()
                        .map(|(ox, oy)| {
                            (
                                emb.preimage(ox).expect("orbit fixed by frob^e"),
                                emb.preimage(oy).expect("orbit fixed by frob^e"),
                            )
                        })
                        .collect();
                    (sub, mapped)
                };
                let (x0, y0) = data
                    .iter()
                    .min_by_key(|(ox, oy)| (ox.encode(), oy.encode()))
                    .unwrap()
                    .clone();
                let base_emb = Embedding::new(base, &rf)?;
                // minimal polynomial of x0 over the base
                let x_orbit: Vec<Fx> = {
                    let mut o = vec![x0.clone()];
                    loop {
                        let nx = o.last().unwrap().frobenius(step);
                        if nx == x0 {
                            break;
                        }
                        o.push(nx);
                    }
                    o
                };
                let mut pi_lift = Poly::one(&rf);
                for ox in &x_orbit {
                    pi_lift = pi_lift.mul(&Poly::new(&rf, vec![ox.neg(), rf.one()]));
                }
                let pi_x = Poly::new(
                    base,
                    pi_lift
                        .coeffs()
                        .iter()
                        .map(|c| base_emb.preimage(c).expect("coefficients are base-rational"))
                        .collect(),
                );
                Ok(Place(Arc::new(PlaceRepr::EllFinite {
                    curve: curve.clone(),
                    degree: e,
                    rf,
                    base_emb,
                    x0,
                    y0,
                    pi_x,
                })))
            }
        }
    }

    pub fn elliptic_infinity(curve: &Curve) -> Place {
        Place(Arc::new(PlaceRepr::EllInfinity {
            curve: curve.clone(),
        }))
    }

    pub fn degree(&self) -> usize {
        match &*self.0 {
            PlaceRepr::P1Finite { pi, .. } => pi.deg(),
            PlaceRepr::P1Infinity { .. } => 1,
            PlaceRepr::EllFinite { degree, .. } => *degree,
            PlaceRepr::EllInfinity { .. } => 1,
        }
    }

    pub fn residue_field(&self) -> Fq {
        match &*self.0 {
            PlaceRepr::P1Finite { rf, .. } => rf.clone(),
            PlaceRepr::P1Infinity { base } => base.clone(),
            PlaceRepr::EllFinite { rf, .. } => rf.clone(),
            PlaceRepr::EllInfinity { curve } => curve.base().clone(),
        }
    }

    /// Embedding of the curve's base field into the residue field.
    pub fn base_embedding(&self) -> Embedding {
        match &*self.0 {
            PlaceRepr::P1Finite { base_emb, .. } | PlaceRepr::EllFinite { base_emb, .. } => {
                base_emb.clone()
            }
            PlaceRepr::P1Infinity { base } => Embedding::identity(base),
            PlaceRepr::EllInfinity { curve } => Embedding::identity(curve.base()),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(
            &*self.0,
            PlaceRepr::P1Infinity { .. } | PlaceRepr::EllInfinity { .. }
        )
    }

    pub fn p1_irreducible(&self) -> Option<&Poly> {
        match &*self.0 {
            PlaceRepr::P1Finite { pi, .. } => Some(pi),
            _ => None,
        }
    }

    pub fn elliptic_representative(&self) -> Option<EllPoint> {
        match &*self.0 {
            PlaceRepr::EllFinite { x0, y0, .. } => Some(EllPoint::Affine(x0.clone(), y0.clone())),
            PlaceRepr::EllInfinity { .. } => Some(EllPoint::Infinity),
            _ => None,
        }
    }

    pub fn curve(&self) -> Curve {
        match &*self.0 {
            PlaceRepr::P1Finite { base, .. } | PlaceRepr::P1Infinity { base } => Curve::p1(base),
            PlaceRepr::EllFinite { curve, .. } | PlaceRepr::EllInfinity { curve } => curve.clone(),
        }
    }

    /// A rational function with valuation exactly 1 here.
    pub fn uniformizer(&self) -> RatFn {
        match &*self.0 {
            PlaceRepr::P1Finite { base, pi, .. } => {
                RatFn::p1(&Curve::p1(base), pi.clone(), Poly::one(base)).unwrap()
            }
            PlaceRepr::P1Infinity { base } => {
                // 1/t
                RatFn::p1(&Curve::p1(base), Poly::one(base), Poly::var(base)).unwrap()
            }
            PlaceRepr::EllFinite {
                curve, y0, pi_x, ..
            } => {
                let base = curve.base();
                if y0.is_zero() {
                    // ramified 2-torsion abscissa: y is the local parameter
                    RatFn::ell(
                        curve,
                        Poly::zero(base),
                        Poly::one(base),
                        Poly::one(base),
                    )
                    .unwrap()
                } else {
                    RatFn::ell(curve, pi_x.clone(), Poly::zero(base), Poly::one(base)).unwrap()
                }
            }
            PlaceRepr::EllInfinity { curve } => {
                // x/y = x * y / (x^3 + ax + b)
                let base = curve.base();
                let cubic = curve.cubic_in(base).unwrap();
                RatFn::ell(curve, Poly::zero(base), Poly::var(base), cubic).unwrap()
            }
        }
    }
}

/// All places of exact degree d: for P1 the monic irreducibles plus
/// infinity at d = 1, for E the Frobenius orbits of size d plus infinity.
pub fn places_of_degree(curve: &Curve, d: usize) -> Result<Vec<Place>> {
    match curve {
        Curve::P1 { base } => {
            let mut out = Vec::new();
            for pi in monic_irreducibles(base, d)? {
                out.push(Place::p1_finite(base, &pi)?);
            }
            if d == 1 {
                out.push(Place::p1_infinity(base));
            }
            out.sort();
            Ok(out)
        }
        Curve::Elliptic { .. } => {
            let (l, pts) = curve.points_over(d)?;
            let step = curve.base().degree() as u32;
            let mut seen = std::collections::BTreeSet::new();
            let mut out = Vec::new();
            for pt in pts {
                match &pt {
                    EllPoint::Infinity => {
                        if d == 1 {
                            let pl = Place::elliptic_infinity(curve);
                            if seen.insert(pl.sort_key()) {
                                out.push(pl);
                            }
                        }
                    }
                    EllPoint::Affine(x, y) => {
                        // orbit size
                        let (mut cx, mut cy) = (x.clone(), y.clone());
                        let mut size = 1usize;
                        loop {
                            cx = cx.frobenius(step);
                            cy = cy.frobenius(step);
                            if (&cx, &cy) == (x, y) {
                                break;
                            }
                            size += 1;
                        }
                        if size != d {
                            continue;
                        }
                        let _ = l; // representative mapping handled in constructor
                        let pl = Place::elliptic_from_point(curve, d, &pt)?;
                        if seen.insert(pl.sort_key()) {
                            out.push(pl);
                        }
                    }
                }
            }
            out.sort();
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------------------
// rational functions
// ---------------------------------------------------------------------------

/// A nonzero rational function on a supported curve, in canonical form.
///
/// On P1: num/den with den monic and gcd(num, den) = 1.
/// On E: (u + v*y)/w with w monic a polynomial in x and gcd(u, v, w) = 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RatFn {
    P1 {
        base: Fq,
        num: Poly,
        den: Poly,
    },
    Ell {
        curve: Curve,
        u: Poly,
        v: Poly,
        w: Poly,
    },
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatFn::P1 { num, den, .. } => {
                if den.is_one() {
                    write!(f, "{}", num.display("t"))
                } else {
                    write!(f, "({})/({})", num.display("t"), den.display("t"))
                }
            }
            RatFn::Ell { u, v, w, .. } => {
                let mut numer = String::new();
                if !u.is_zero() {
                    numer.push_str(&u.display("x"));
                }
                if !v.is_zero() {
                    if !numer.is_empty() {
                        numer.push('+');
                    }
                    if v.is_one() {
                        numer.push('y');
                    } else {
                        numer.push_str(&format!("({})*y", v.display("x")));
                    }
                }
                if numer.is_empty() {
                    numer.push('0');
                }
                if w.is_one() {
                    write!(f, "{numer}")
                } else {
                    write!(f, "({numer})/({})", w.display("x"))
                }
            }
        }
    }
}

impl RatFn {
    pub fn p1(curve: &Curve, num: Poly, den: Poly) -> Result<RatFn> {
        let Curve::P1 { base } = curve else {
            return Err(Error::Unsupported("p1 constructor on elliptic curve".into()));
        };
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Err(Error::ZeroFunction);
        }
        let g = num.gcd(&den);
        let mut num = num.div_exact(&g);
        let mut den = den.div_exact(&g);
        let lead = den.leading().inv().unwrap();
        num = num.scale(&lead);
        den = den.scale(&lead);
        Ok(RatFn::P1 {
            base: base.clone(),
            num,
            den,
        })
    }

    pub fn ell(curve: &Curve, u: Poly, v: Poly, w: Poly) -> Result<RatFn> {
        if !curve.is_elliptic() {
            return Err(Error::Unsupported("ell constructor on P1".into()));
        }
        if w.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if u.is_zero() && v.is_zero() {
            return Err(Error::ZeroFunction);
        }
        let g = u.gcd(&v).gcd(&w);
        let mut u = u.div_exact(&g);
        let mut v = v.div_exact(&g);
        let mut w = w.div_exact(&g);
        let lead = w.leading().inv().unwrap();
        u = u.scale(&lead);
        v = v.scale(&lead);
        w = w.scale(&lead);
        Ok(RatFn::Ell {
            curve: curve.clone(),
            u,
            v,
            w,
        })
    }

    pub fn constant(curve: &Curve, c: Fx) -> Result<RatFn> {
        if c.is_zero() {
            return Err(Error::ZeroFunction);
        }
        let base = curve.base();
        match curve {
            Curve::P1 { .. } => RatFn::p1(curve, Poly::constant(c), Poly::one(base)),
            Curve::Elliptic { .. } => {
                RatFn::ell(curve, Poly::constant(c), Poly::zero(base), Poly::one(base))
            }
        }
    }

    /// The coordinate function: t on P1, x on E.
    pub fn coordinate(curve: &Curve) -> RatFn {
        let base = curve.base();
        match curve {
            Curve::P1 { .. } => RatFn::p1(curve, Poly::var(base), Poly::one(base)).unwrap(),
            Curve::Elliptic { .. } => {
                RatFn::ell(curve, Poly::var(base), Poly::zero(base), Poly::one(base)).unwrap()
            }
        }
    }

    /// The y coordinate on an elliptic curve.
    pub fn y_coordinate(curve: &Curve) -> Result<RatFn> {
        let base = curve.base();
        RatFn::ell(curve, Poly::zero(base), Poly::one(base), Poly::one(base))
    }

    pub fn curve(&self) -> Curve {
        match self {
            RatFn::P1 { base, .. } => Curve::p1(base),
            RatFn::Ell { curve, .. } => curve.clone(),
        }
    }

    pub fn base(&self) -> &Fq {
        match self {
            RatFn::P1 { base, .. } => base,
            RatFn::Ell { curve, .. } => curve.base(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            RatFn::P1 { num, den, .. } => num.is_constant() && den.is_constant(),
            RatFn::Ell { u, v, w, .. } => u.is_constant() && v.is_zero() && w.is_constant(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            RatFn::P1 { num, den, .. } => num.is_one() && den.is_one(),
            RatFn::Ell { u, v, w, .. } => u.is_one() && v.is_zero() && w.is_one(),
        }
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        match (self, other) {
            (
                RatFn::P1 { base, num, den },
                RatFn::P1 {
                    num: n2, den: d2, ..
                },
            ) => RatFn::p1(&Curve::p1(base), num.mul(n2), den.mul(d2)).unwrap(),
            (
                RatFn::Ell { curve, u, v, w },
                RatFn::Ell {
                    u: u2, v: v2, w: w2, ..
                },
            ) => {
                let cubic = curve.cubic_in(curve.base()).unwrap();
                let nu = u.mul(u2).add(&v.mul(v2).mul(&cubic));
                let nv = u.mul(v2).add(&v.mul(u2));
                RatFn::ell(curve, nu, nv, w.mul(w2)).unwrap()
            }
            _ => panic!("mixed-curve multiplication"),
        }
    }

    pub fn inv(&self) -> RatFn {
        match self {
            RatFn::P1 { base, num, den } => {
                RatFn::p1(&Curve::p1(base), den.clone(), num.clone()).unwrap()
            }
            RatFn::Ell { curve, u, v, w } => {
                // 1/((u+vy)/w) = w(u - vy)/(u^2 - v^2 c)
                let cubic = curve.cubic_in(curve.base()).unwrap();
                let norm = u.mul(u).sub(&v.mul(v).mul(&cubic));
                RatFn::ell(curve, w.mul(u), w.mul(&v.neg()), norm).unwrap()
            }
        }
    }

    pub fn div(&self, other: &RatFn) -> RatFn {
        self.mul(&other.inv())
    }

    pub fn neg(&self) -> RatFn {
        match self {
            RatFn::P1 { base, num, den } => {
                RatFn::p1(&Curve::p1(base), num.neg(), den.clone()).unwrap()
            }
            RatFn::Ell { curve, u, v, w } => {
                RatFn::ell(curve, u.neg(), v.neg(), w.clone()).unwrap()
            }
        }
    }

    /// self + other; None when the sum is the zero function.
    pub fn add(&self, other: &RatFn) -> Option<RatFn> {
        match (self, other) {
            (
                RatFn::P1 { base, num, den },
                RatFn::P1 {
                    num: n2, den: d2, ..
                },
            ) => {
                let num = num.mul(d2).add(&n2.mul(den));
                if num.is_zero() {
                    return None;
                }
                Some(RatFn::p1(&Curve::p1(base), num, den.mul(d2)).unwrap())
            }
            (
                RatFn::Ell { curve, u, v, w },
                RatFn::Ell {
                    u: u2, v: v2, w: w2, ..
                },
            ) => {
                let nu = u.mul(w2).add(&u2.mul(w));
                let nv = v.mul(w2).add(&v2.mul(w));
                if nu.is_zero() && nv.is_zero() {
                    return None;
                }
                Some(RatFn::ell(curve, nu, nv, w.mul(w2)).unwrap())
            }
            _ => panic!("mixed-curve addition"),
        }
    }

    pub fn sub(&self, other: &RatFn) -> Option<RatFn> {
        self.add(&other.neg())
    }

    /// f - 1; None when f = 1.
    pub fn sub_one(&self) -> Option<RatFn> {
        let one = RatFn::constant(&self.curve(), self.base().one()).unwrap();
        self.sub(&one)
    }

    pub fn pow_i64(&self, e: i64) -> RatFn {
        let mut base = if e < 0 { self.inv() } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = RatFn::constant(&self.curve(), self.base().one()).unwrap();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// valuations, reduction, divisors
// ---------------------------------------------------------------------------

/// Multiplicity of the irreducible pi in g (g nonzero).
fn poly_multiplicity(g: &Poly, pi: &Poly) -> i64 {
    let mut m = 0i64;
    let mut cur = g.clone();
    loop {
        let (q, r) = cur.divrem(pi).unwrap();
        if r.is_zero() {
            m += 1;
            cur = q;
        } else {
            return m;
        }
    }
}

/// Multiplicity of the root x0 in g over the residue field; None for g = 0.
fn root_multiplicity(g: &Poly, x0: &Fx) -> Option<(i64, Poly)> {
    if g.is_zero() {
        return None;
    }
    let field = g.field().clone();
    let lin = Poly::new(&field, vec![x0.neg(), field.one()]);
    let mut m = 0i64;
    let mut cur = g.clone();
    loop {
        let (q, r) = cur.divrem(&lin).unwrap();
        if r.is_zero() {
            m += 1;
            cur = q;
        } else {
            return Some((m, cur));
        }
    }
}

struct EllLocal {
    /// order of vanishing of the numerator u + v*y
    num_ord: i64,
    /// order of vanishing of the denominator w
    den_ord: i64,
    /// residue value when num_ord == den_ord
    value: Option<Fx>,
}

fn ell_local(f: &RatFn, place: &Place) -> EllLocal {
    let RatFn::Ell { curve, u, v, w } = f else {
        panic!("ell_local on a P1 function");
    };
    match &*place.0 {
        PlaceRepr::EllFinite {
            rf,
            base_emb,
            x0,
            y0,
            ..
        } => {
            let lift = |g: &Poly| g.map_coeffs(rf, |c| base_emb.apply(c));
            let ul = lift(u);
            let vl = lift(v);
            let wl = lift(w);
            let (den_ord, w1) = root_multiplicity(&wl, x0).unwrap();
            if !y0.is_zero() {
                let mu = root_multiplicity(&ul, x0);
                let mv = root_multiplicity(&vl, x0);
                let m = match (&mu, &mv) {
                    (Some((a, _)), Some((b, _))) => *a.min(b),
                    (Some((a, _)), None) => *a,
                    (None, Some((b, _))) => *b,
                    (None, None) => unreachable!("zero function"),
                };
                let lin = Poly::new(rf, vec![x0.neg(), rf.one()]);
                let lin_m = lin.pow(m as u64);
                let u1 = if ul.is_zero() {
                    ul.clone()
                } else {
                    ul.div_exact(&lin_m)
                };
                let v1 = if vl.is_zero() {
                    vl.clone()
                } else {
                    vl.div_exact(&lin_m)
                };
                let a0 = u1.eval(x0).add(&v1.eval(x0).mul(y0));
                if !a0.is_zero() {
                    let value = if m == den_ord {
                        Some(a0.div(&w1.eval(x0)).unwrap())
                    } else {
                        None
                    };
                    EllLocal {
                        num_ord: m,
                        den_ord,
                        value,
                    }
                } else {
                    // conjugate trick: (u1 + v1 y)(u1 - v1 y) = u1^2 - v1^2 c
                    let cubic = {
                        let c = curve.cubic_in(curve.base()).unwrap();
                        lift(&c)
                    };
                    let b1 = u1.mul(&u1).sub(&v1.mul(&v1).mul(&cubic));
                    let (beta, btilde) = root_multiplicity(&b1, x0).expect("B1 != 0");
                    let num_ord = m + beta;
                    let value = if num_ord == den_ord {
                        let d0 = u1.eval(x0).sub(&v1.eval(x0).mul(y0));
                        Some(
                            btilde
                                .eval(x0)
                                .div(&w1.eval(x0).mul(&d0))
                                .unwrap(),
                        )
                    } else {
                        None
                    };
                    EllLocal {
                        num_ord,
                        den_ord,
                        value,
                    }
                }
            } else {
                // ramified 2-torsion: ord(x - x0) = 2, ord(y) = 1
                let mu = root_multiplicity(&ul, x0).map(|(m, g)| (2 * m, g));
                let mv = root_multiplicity(&vl, x0).map(|(m, g)| (2 * m + 1, g));
                let (num_ord, even_side) = match (&mu, &mv) {
                    (Some((a, _)), Some((b, _))) => (*a.min(b), a < b),
                    (Some((a, _)), None) => (*a, true),
                    (None, Some((b, _))) => (*b, false),
                    (None, None) => unreachable!("zero function"),
                };
                let den_ord = 2 * den_ord;
                let value = if num_ord == den_ord {
                    // even orders match: the u-part carries the value
                    assert!(even_side, "numerator order parity");
                    let (_, ured) = mu.unwrap();
                    Some(ured.eval(x0).div(&w1.eval(x0)).unwrap())
                } else {
                    None
                };
                EllLocal {
                    num_ord,
                    den_ord,
                    value,
                }
            }
        }
        PlaceRepr::EllInfinity { .. } => {
            // ord(x) = -2, ord(y) = -3
            let ou = u.degree().map(|d| -2 * d as i64);
            let ov = v.degree().map(|d| -(2 * d as i64) - 3);
            let (num_ord, u_dominates) = match (ou, ov) {
                (Some(a), Some(b)) => (a.min(b), a < b),
                (Some(a), None) => (a, true),
                (None, Some(b)) => (b, false),
                (None, None) => unreachable!("zero function"),
            };
            let den_ord = -2 * w.deg() as i64;
            let value = if num_ord == den_ord {
                assert!(u_dominates, "numerator order parity at infinity");
                Some(u.leading().div(&w.leading()).unwrap())
            } else {
                None
            };
            EllLocal {
                num_ord,
                den_ord,
                value,
            }
        }
        _ => panic!("elliptic local data at a P1 place"),
    }
}

impl RatFn {
    /// Order of vanishing at a place.
    pub fn valuation(&self, place: &Place) -> i64 {
        match self {
            RatFn::P1 { num, den, .. } => match &*place.0 {
                PlaceRepr::P1Finite { pi, .. } => {
                    poly_multiplicity(num, pi) - poly_multiplicity(den, pi)
                }
                PlaceRepr::P1Infinity { .. } => den.deg() as i64 - num.deg() as i64,
                _ => panic!("P1 function at elliptic place"),
            },
            RatFn::Ell { .. } => {
                let loc = ell_local(self, place);
                loc.num_ord - loc.den_ord
            }
        }
    }

    /// Image in the residue field. Zero when the valuation is positive;
    /// PoleAtPlace when it is negative.
    pub fn reduce_at(&self, place: &Place) -> Result<Fx> {
        match self {
            RatFn::P1 { num, den, .. } => match &*place.0 {
                PlaceRepr::P1Finite {
                    pi,
                    rf,
                    base_emb,
                    root,
                    ..
                } => {
                    let a = poly_multiplicity(num, pi);
                    let b = poly_multiplicity(den, pi);
                    match a - b {
                        v if v > 0 => Ok(rf.zero()),
                        v if v < 0 => Err(Error::PoleAtPlace),
                        _ => {
                            let strip = |g: &Poly, m: i64| {
                                let mut cur = g.clone();
                                for _ in 0..m {
                                    cur = cur.div_exact(pi);
                                }
                                cur
                            };
                            let n1 = strip(num, a);
                            let d1 = strip(den, b);
                            let ev = |g: &Poly| {
                                g.map_coeffs(rf, |c| base_emb.apply(c)).eval(root)
                            };
                            ev(&n1).div(&ev(&d1))
                        }
                    }
                }
                PlaceRepr::P1Infinity { base } => {
                    let v = den.deg() as i64 - num.deg() as i64;
                    if v > 0 {
                        Ok(base.zero())
                    } else if v < 0 {
                        Err(Error::PoleAtPlace)
                    } else {
                        num.leading().div(&den.leading())
                    }
                }
                _ => panic!("P1 function at elliptic place"),
            },
            RatFn::Ell { .. } => {
                let loc = ell_local(self, place);
                let v = loc.num_ord - loc.den_ord;
                if v > 0 {
                    Ok(place.residue_field().zero())
                } else if v < 0 {
                    Err(Error::PoleAtPlace)
                } else {
                    Ok(loc.value.expect("valuation zero has a residue value"))
                }
            }
        }
    }

    /// The complete principal divisor; always of degree 0.
    pub fn divisor(&self) -> Result<Divisor> {
        match self {
            RatFn::P1 { base, num, den } => {
                let curve = Curve::p1(base);
                let mut d = Divisor::zero(&curve);
                let (_, nf) = factor(num)?;
                for (pi, m) in nf {
                    d.add_place(&Place::p1_finite(base, &pi)?, m as i64);
                }
                let (_, df) = factor(den)?;
                for (pi, m) in df {
                    d.add_place(&Place::p1_finite(base, &pi)?, -(m as i64));
                }
                d.add_place(
                    &Place::p1_infinity(base),
                    den.deg() as i64 - num.deg() as i64,
                );
                debug_assert_eq!(d.degree(), 0);
                Ok(d)
            }
            RatFn::Ell { curve, u, v, w } => {
                let base = curve.base();
                let cubic = curve.cubic_in(base).unwrap();
                let norm = u.mul(u).sub(&v.mul(v).mul(&cubic));
                let mut candidates: std::collections::BTreeSet<Poly> =
                    std::collections::BTreeSet::new();
                if !norm.is_zero() {
                    for (pi, _) in factor(&norm)?.1 {
                        candidates.insert(pi);
                    }
                }
                for (pi, _) in factor(w)?.1 {
                    candidates.insert(pi);
                }
                let mut d = Divisor::zero(curve);
                for pi in candidates {
                    for place in places_over_abscissa(curve, &pi)? {
                        let val = self.valuation(&place);
                        if val != 0 {
                            d.add_place(&place, val);
                        }
                    }
                }
                let inf = Place::elliptic_infinity(curve);
                let vinf = self.valuation(&inf);
                if vinf != 0 {
                    d.add_place(&inf, vinf);
                }
                assert_eq!(d.degree(), 0, "principal divisors have degree 0");
                Ok(d)
            }
        }
    }

    /// Product over the divisor's support of N_{k(v)/k}(f(v))^{m_v}.
    /// Requires f to be a unit at every place of the divisor.
    pub fn value_at_divisor(&self, d: &Divisor) -> Result<Fx> {
        let base = self.base().clone();
        let mut acc = base.one();
        for (place, mult) in d.iter() {
            let val = self.reduce_at(place)?;
            if val.is_zero() {
                return Err(Error::ZeroElement);
            }
            let n = place.base_embedding().norm(&val);
            acc = acc.mul(&n.pow_i64(*mult)?);
        }
        Ok(acc)
    }
}

/// The places of an elliptic curve lying over a monic irreducible
/// polynomial in the x coordinate.
pub fn places_over_abscissa(curve: &Curve, pi: &Poly) -> Result<Vec<Place>> {
    let base = curve.base();
    let m = pi.deg();
    let (lm, emb_m) = extension_of(base, m)?;
    let lifted = pi.map_coeffs(&lm, |c| emb_m.apply(c));
    let x0 = roots(&lifted)?
        .into_iter()
        .next()
        .expect("pi splits in its degree field");
    let cubic = curve.cubic_in(&lm)?;
    let cval = cubic.eval(&x0);
    let mut out = Vec::new();
    if cval.is_zero() {
        out.push(Place::elliptic_from_point(
            curve,
            m,
            &EllPoint::Affine(x0, lm.zero()),
        )?);
        return Ok(out);
    }
    // square root of cval in the degree-m field, if any
    let z2 = Poly::new(&lm, vec![cval.neg(), lm.zero(), lm.one()]);
    let rs = roots(&z2)?;
    if !rs.is_empty() {
        let y0 = rs[0].clone();
        out.push(Place::elliptic_from_point(
            curve,
            m,
            &EllPoint::Affine(x0.clone(), y0.clone()),
        )?);
        out.push(Place::elliptic_from_point(
            curve,
            m,
            &EllPoint::Affine(x0, y0.neg()),
        )?);
        out.sort();
        out.dedup();
        return Ok(out);
    }
    // inert: one place of degree 2m; recompute the root data there
    let (l2m, emb2) = extension_of(base, 2 * m)?;
    let lifted2 = pi.map_coeffs(&l2m, |c| emb2.apply(c));
    let x0b = roots(&lifted2)?
        .into_iter()
        .next()
        .expect("pi splits in the quadratic extension");
    let cubic2 = curve.cubic_in(&l2m)?;
    let c2 = cubic2.eval(&x0b);
    let z2b = Poly::new(&l2m, vec![c2.neg(), l2m.zero(), l2m.one()]);
    let y0b = roots(&z2b)?
        .into_iter()
        .next()
        .expect("square root exists in the quadratic extension");
    out.push(Place::elliptic_from_point(
        curve,
        2 * m,
        &EllPoint::Affine(x0b, y0b),
    )?);
    Ok(out)
}

// ---------------------------------------------------------------------------
// divisors
// ---------------------------------------------------------------------------

/// Formal sum of places with integer multiplicities.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Divisor {
    curve: Curve,
    coeffs: BTreeMap<Place, i64>,
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (place, &m) in &self.coeffs {
            let (sign, mag) = if m < 0 { ("-", -m) } else { ("+", m) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == 1 {
                write!(f, "{place}")?;
            } else {
                write!(f, "{mag}*{place}")?;
            }
        }
        Ok(())
    }
}

impl Divisor {
    pub fn zero(curve: &Curve) -> Divisor {
        Divisor {
            curve: curve.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    pub fn add_place(&mut self, place: &Place, mult: i64) {
        if mult == 0 {
            return;
        }
        let entry = self.coeffs.entry(place.clone()).or_insert(0);
        *entry += mult;
        if *entry == 0 {
            self.coeffs.remove(place);
        }
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, m) in &other.coeffs {
            out.add_place(p, *m);
        }
        out
    }

    pub fn neg(&self) -> Divisor {
        let mut out = Divisor::zero(&self.curve);
        for (p, m) in &self.coeffs {
            out.add_place(p, -m);
        }
        out
    }

    pub fn degree(&self) -> i64 {
        self.coeffs
            .iter()
            .map(|(p, m)| p.degree() as i64 * m)
            .sum()
    }

    pub fn multiplicity(&self, place: &Place) -> i64 {
        self.coeffs.get(place).copied().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<Place> {
        self.coeffs.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Place, &i64)> {
        self.coeffs.iter()
    }
}

// ---------------------------------------------------------------------------
// random samples (seeded by the caller)
// ---------------------------------------------------------------------------

fn random_poly<R: rand::Rng>(field: &Fq, max_deg: usize, nonzero: bool, rng: &mut R) -> Poly {
    loop {
        let deg = rng.gen_range(0..=max_deg);
        let coeffs: Vec<Fx> = (0..=deg)
            .map(|_| field.from_encoding(rng.gen_range(0..field.order())))
            .collect();
        let p = Poly::new(field, coeffs);
        if !nonzero || !p.is_zero() {
            return p;
        }
    }
}

/// Random nonzero rational function on P1 with numerator and denominator
/// degrees at most max_deg.
pub fn random_p1_fn<R: rand::Rng>(base: &Fq, max_deg: usize, rng: &mut R) -> RatFn {
    let curve = Curve::p1(base);
    loop {
        let num = random_poly(base, max_deg, true, rng);
        let den = random_poly(base, max_deg, true, rng);
        if let Ok(f) = RatFn::p1(&curve, num, den) {
            return f;
        }
    }
}

/// Random nonzero rational function on an elliptic curve.
pub fn random_ell_fn<R: rand::Rng>(curve: &Curve, max_deg: usize, rng: &mut R) -> RatFn {
    let base = curve.base();
    loop {
        let u = random_poly(base, max_deg, false, rng);
        let v = random_poly(base, max_deg.saturating_sub(1), false, rng);
        let w = random_poly(base, max_deg, true, rng);
        if u.is_zero() && v.is_zero() {
            continue;
        }
        if let Ok(f) = RatFn::ell(curve, u, v, w) {
            return f;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn f5() -> Fq {
        Fq::prime(5).unwrap()
    }

    fn e_511() -> Curve {
        // y^2 = x^3 + x + 1 over GF(5)
        let k = f5();
        Curve::elliptic(&k, k.one(), k.one()).unwrap()
    }

    #[test]
    fn p1_valuations() {
        let k = f5();
        let curve = Curve::p1(&k);
        // f = t^2/(t-1)
        let f = RatFn::p1(
            &curve,
            Poly::from_u64s(&k, &[0, 0, 1]),
            Poly::from_i64s(&k, &[-1, 1]),
        )
        .unwrap();
        let at_t = Place::p1_finite(&k, &Poly::from_u64s(&k, &[0, 1])).unwrap();
        assert_eq!(f.valuation(&at_t), 2);
        assert_eq!(f.valuation(&Place::p1_infinity(&k)), -1);
    }

    #[test]
    fn p1_reduction() {
        let k = f5();
        let curve = Curve::p1(&k);
        let at_t = Place::p1_finite(&k, &Poly::from_u64s(&k, &[0, 1])).unwrap();
        // (t-1)/(t+1) at t=0 is -1 = 4
        let f = RatFn::p1(
            &curve,
            Poly::from_i64s(&k, &[-1, 1]),
            Poly::from_i64s(&k, &[1, 1]),
        )
        .unwrap();
        assert_eq!(f.reduce_at(&at_t).unwrap(), k.from_u64(4));
        // (2t^2+1)/(t^2+3) at infinity: ratio of leading coefficients
        let g = RatFn::p1(
            &curve,
            Poly::from_u64s(&k, &[1, 0, 2]),
            Poly::from_u64s(&k, &[3, 0, 1]),
        )
        .unwrap();
        assert_eq!(
            g.reduce_at(&Place::p1_infinity(&k)).unwrap(),
            k.from_u64(2)
        );
        // pole
        let h = RatFn::p1(&curve, Poly::one(&k), Poly::from_u64s(&k, &[0, 1])).unwrap();
        assert_eq!(h.reduce_at(&at_t), Err(Error::PoleAtPlace));
    }

    #[test]
    fn p1_reduction_degree_two_place() {
        // t^2+t+1 at (t^2+1) over GF(3) reduces to the class of t
        let k = Fq::prime(3).unwrap();
        let curve = Curve::p1(&k);
        let pi = Poly::from_u64s(&k, &[1, 0, 1]);
        let place = Place::p1_finite(&k, &pi).unwrap();
        assert_eq!(place.degree(), 2);
        let f = RatFn::p1(&curve, Poly::from_u64s(&k, &[1, 1, 1]), Poly::one(&k)).unwrap();
        let val = f.reduce_at(&place).unwrap();
        let rf = place.residue_field();
        assert_eq!(val, rf.gen());
    }

    #[test]
    fn p1_divisor_examples() {
        let k = f5();
        let curve = Curve::p1(&k);
        // t(t-1)
        let f = RatFn::p1(&curve, Poly::from_i64s(&k, &[0, -1, 1]).neg().neg(), Poly::one(&k))
            .unwrap();
        let d = f.divisor().unwrap();
        assert_eq!(d.degree(), 0);
        let at_t = Place::p1_finite(&k, &Poly::from_u64s(&k, &[0, 1])).unwrap();
        let at_t1 = Place::p1_finite(&k, &Poly::from_i64s(&k, &[-1, 1])).unwrap();
        assert_eq!(d.multiplicity(&at_t), 1);
        assert_eq!(d.multiplicity(&at_t1), 1);
        assert_eq!(d.multiplicity(&Place::p1_infinity(&k)), -2);

        // t^2+1 over GF(3): one degree-2 place minus 2*inf
        let k3 = Fq::prime(3).unwrap();
        let c3 = Curve::p1(&k3);
        let g = RatFn::p1(&c3, Poly::from_u64s(&k3, &[1, 0, 1]), Poly::one(&k3)).unwrap();
        let d = g.divisor().unwrap();
        assert_eq!(d.degree(), 0);
        assert_eq!(d.support().len(), 2);
        let finite: Vec<Place> = d.support().into_iter().filter(|p| !p.is_infinite()).collect();
        assert_eq!(finite.len(), 1);
        assert_eq!(finite[0].degree(), 2);
    }

    #[test]
    fn elliptic_point_enumeration() {
        let e = e_511();
        let (_, pts) = e.points_over(1).unwrap();
        assert_eq!(pts.len(), 9);
        let k = f5();
        for p in &pts {
            assert!(e.on_curve(&k, p));
        }
        // P + inf = P, and (0,1) + (0,4) = inf
        let p01 = EllPoint::Affine(k.zero(), k.one());
        let p04 = EllPoint::Affine(k.zero(), k.from_u64(4));
        assert_eq!(e.point_add(&k, &p01, &EllPoint::Infinity), p01);
        assert_eq!(e.point_add(&k, &p01, &p04), EllPoint::Infinity);
    }

    #[test]
    fn elliptic_group_associativity() {
        let e = e_511();
        let (l, pts) = e.points_over(2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        use rand::Rng;
        for _ in 0..50 {
            let a = &pts[rng.gen_range(0..pts.len())];
            let b = &pts[rng.gen_range(0..pts.len())];
            let c = &pts[rng.gen_range(0..pts.len())];
            let ab_c = e.point_add(&l, &e.point_add(&l, a, b), c);
            let a_bc = e.point_add(&l, a, &e.point_add(&l, b, c));
            assert_eq!(ab_c, a_bc);
        }
    }

    #[test]
    fn elliptic_x_valuation_and_divisor() {
        let e = e_511();
        let k = f5();
        let x = RatFn::coordinate(&e);
        let p01 = Place::elliptic_from_point(&e, 1, &EllPoint::Affine(k.zero(), k.one())).unwrap();
        assert_eq!(x.valuation(&p01), 1);
        let d = x.divisor().unwrap();
        assert_eq!(d.degree(), 0);
        let p04 =
            Place::elliptic_from_point(&e, 1, &EllPoint::Affine(k.zero(), k.from_u64(4))).unwrap();
        assert_eq!(d.multiplicity(&p01), 1);
        assert_eq!(d.multiplicity(&p04), 1);
        assert_eq!(d.multiplicity(&Place::elliptic_infinity(&e)), -2);
    }

    #[test]
    fn place_counts() {
        let k3 = Fq::prime(3).unwrap();
        let p1 = Curve::p1(&k3);
        assert_eq!(places_of_degree(&p1, 1).unwrap().len(), 4);
        assert_eq!(places_of_degree(&p1, 2).unwrap().len(), 3);
        let e = e_511();
        assert_eq!(places_of_degree(&e, 1).unwrap().len(), 9);
    }

    #[test]
    fn zeta_count_p1() {
        // sum over e | d of e * N_e = q^d + 1 for P1
        for q in [3u64, 5] {
            let k = Fq::prime(q).unwrap();
            let c = Curve::p1(&k);
            for d in 1..=4usize {
                let mut total = 0u64;
                for e in 1..=d {
                    if d % e == 0 {
                        total += e as u64 * places_of_degree(&c, e).unwrap().len() as u64;
                    }
                }
                assert_eq!(total, q.pow(d as u32) + 1, "q={q} d={d}");
            }
        }
    }

    #[test]
    fn zeta_count_elliptic() {
        let e = e_511();
        let q = 5i64;
        let n1 = e.points_over(1).unwrap().1.len() as i64;
        let a1 = q + 1 - n1;
        // a_d recurrence: a_d = a_1 a_{d-1} - q a_{d-2}, a_0 = 2
        let mut a = vec![2i64, a1];
        for d in 2..=3 {
            let next = a1 * a[d - 1] - q * a[d - 2];
            a.push(next);
        }
        for d in 2..=3usize {
            let expected = q.pow(d as u32) + 1 - a[d];
            let counted = e.points_over(d).unwrap().1.len() as i64;
            assert_eq!(counted, expected, "point count over degree {d}");
            // place-count consistency
            let mut total = 0i64;
            for f in 1..=d {
                if d % f == 0 {
                    total += f as i64 * places_of_degree(&e, f).unwrap().len() as i64;
                }
            }
            assert_eq!(total, expected);
        }
    }

    #[test]
    fn divisor_degree_zero_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let k = f5();
        for _ in 0..700 {
            let f = random_p1_fn(&k, 6, &mut rng);
            assert_eq!(f.divisor().unwrap().degree(), 0);
        }
        let e = e_511();
        for _ in 0..300 {
            let f = random_ell_fn(&e, 4, &mut rng);
            assert_eq!(f.divisor().unwrap().degree(), 0);
        }
    }

    #[test]
    fn valuation_additive_and_divisor_additive() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let k = f5();
        let e = e_511();
        for _ in 0..40 {
            let f = random_p1_fn(&k, 5, &mut rng);
            let g = random_p1_fn(&k, 5, &mut rng);
            let fg = f.mul(&g);
            assert_eq!(
                fg.divisor().unwrap(),
                f.divisor().unwrap().add(&g.divisor().unwrap())
            );
        }
        for _ in 0..25 {
            let f = random_ell_fn(&e, 3, &mut rng);
            let g = random_ell_fn(&e, 3, &mut rng);
            let fg = f.mul(&g);
            let df = f.divisor().unwrap();
            let dg = g.divisor().unwrap();
            assert_eq!(fg.divisor().unwrap(), df.add(&dg));
            for place in df.support() {
                assert_eq!(
                    fg.valuation(&place),
                    f.valuation(&place) + g.valuation(&place)
                );
            }
        }
    }

    #[test]
    fn uniformizers_have_valuation_one() {
        let k = f5();
        let e = e_511();
        let pi = Poly::from_u64s(&k, &[2, 1]);
        let p = Place::p1_finite(&k, &pi).unwrap();
        assert_eq!(p.uniformizer().valuation(&p), 1);
        let inf = Place::p1_infinity(&k);
        assert_eq!(inf.uniformizer().valuation(&inf), 1);
        for place in places_of_degree(&e, 1).unwrap() {
            assert_eq!(place.uniformizer().valuation(&place), 1, "at {place}");
        }
        for place in places_of_degree(&e, 2).unwrap().into_iter().take(4) {
            assert_eq!(place.uniformizer().valuation(&place), 1, "at {place}");
        }
    }
}

impl Place {
    /// For a finite place of P1: express a residue-field element as a
    /// polynomial of degree < deg(pi) over the base, inverse to reduction.
    pub fn element_as_polynomial(&self, value: &Fx) -> Result<Poly> {
        let PlaceRepr::P1Finite {
            base,
            pi,
            rf,
            base_emb,
            root,
        } = &*self.0
        else {
            return Err(Error::Unsupported(
                "polynomial representatives exist at finite P1 places".into(),
            ));
        };
        assert_eq!(value.field(), rf);
        let d = pi.deg();
        let m0 = base.degree();
        let p = base.p();
        let n = rf.degree();
        // unknowns: coefficients of the base-field coefficients of the
        // polynomial, i.e. d * m0 prime-field scalars; columns are the
        // images of basis elements x^j * root^i in the residue field
        let mut cols: Vec<Vec<u64>> = Vec::with_capacity(d * m0);
        let mut root_pow = rf.one();
        for _ in 0..d {
            for j in 0..m0 {
                let mut basis = vec![0u64; m0];
                basis[j] = 1;
                let img = base_emb.apply(&base.element(basis)).mul(&root_pow);
                cols.push(img.coeffs().to_vec());
            }
            root_pow = root_pow.mul(root);
        }
        // gaussian elimination over GF(p) on the augmented system
        let mut aug: Vec<Vec<u64>> = (0..n)
            .map(|r| {
                let mut row: Vec<u64> = cols.iter().map(|c| c[r]).collect();
                row.push(value.coeffs()[r]);
                row
            })
            .collect();
        let ncols = cols.len();
        let mut pivots = Vec::new();
        let mut rr = 0usize;
        for col in 0..ncols {
            let Some(sel) = (rr..n).find(|&r| aug[r][col] != 0) else {
                continue;
            };
            aug.swap(rr, sel);
            let inv = crate::num::powmod(aug[rr][col], p - 2, p);
            for x in aug[rr].iter_mut() {
                *x = crate::num::mulmod(*x, inv, p);
            }
            for r in 0..n {
                if r != rr && aug[r][col] != 0 {
                    let f = aug[r][col];
                    let piv = aug[rr].clone();
                    for (x, &pv) in aug[r].iter_mut().zip(piv.iter()) {
                        *x = (*x + p - crate::num::mulmod(f, pv, p)) % p;
                    }
                }
            }
            pivots.push((rr, col));
            rr += 1;
        }
        for r in rr..n {
            if aug[r][ncols] != 0 {
                return Err(Error::Unsupported("residue lift failed".into()));
            }
        }
        let mut flat = vec![0u64; ncols];
        for &(r, c) in &pivots {
            flat[c] = aug[r][ncols];
        }
        let coeffs: Vec<Fx> = (0..d)
            .map(|i| base.element(flat[i * m0..(i + 1) * m0].to_vec()))
            .collect();
        Ok(Poly::new(base, coeffs))
    }
}
