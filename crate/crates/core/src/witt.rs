//! Big Witt vectors over finite divisor-closed index sets, ghost coordinates,
//! the embedding into `1 + x A[[x]]`, and the pairing with Laurent series.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::Serialize;

use crate::coeff::{Coef, Ring};
use crate::error::{Error, Result};
use crate::forms::res_dlog_wedge;
use crate::index::MultiIndex;
use crate::laurent::LaurentElt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IndexSet(BTreeSet<u32>);

impl IndexSet {
    pub fn new(items: impl IntoIterator<Item = u32>) -> Result<IndexSet> {
        let s: BTreeSet<u32> = items.into_iter().collect();
        if s.contains(&0) {
            return Err(Error::InvalidArgument("Witt indices are positive".into()));
        }
        for &i in &s {
            if let Some(d) = (1..i).find(|d| i % d == 0 && !s.contains(d)) {
                return Err(Error::InvalidArgument(format!(
                    "index set is not divisor-closed: {i} is present but {d} is not"
                )));
            }
        }
        Ok(IndexSet(s))
    }

    /// Smallest divisor-closed set containing `items`.
    pub fn closure(items: impl IntoIterator<Item = u32>) -> Result<IndexSet> {
        let mut s = BTreeSet::new();
        for i in items {
            if i == 0 {
                return Err(Error::InvalidArgument("Witt indices are positive".into()));
            }
            s.extend((1..=i).filter(|d| i % d == 0));
        }
        Ok(IndexSet(s))
    }

    pub fn up_to(d: u32) -> IndexSet {
        IndexSet((1..=d).collect())
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.contains(&i)
    }
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }
    pub fn max(&self) -> u32 {
        self.0.iter().next_back().copied().unwrap_or(0)
    }
    pub fn is_subset(&self, o: &IndexSet) -> bool {
        self.0.is_subset(&o.0)
    }
}

/// Coordinate rings for Witt vectors: coefficients or Laurent polynomials.
pub trait WittScalar: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn add(&self, o: &Self) -> Result<Self>;
    fn sub(&self, o: &Self) -> Result<Self>;
    fn mul(&self, o: &Self) -> Result<Self>;
    fn neg(&self) -> Self;
    fn pow(&self, e: u32) -> Result<Self>;
    fn times(&self, k: u32) -> Result<Self>;
    fn div_int(&self, k: u32) -> Result<Self>;
    fn is_zero(&self) -> bool;
    /// All base scalars are integers.
    fn is_integral(&self) -> bool;
    fn ring(&self) -> &Ring;
    fn change_ring(&self, r: &Ring) -> Result<Self>;
}

impl WittScalar for Coef {
    fn zero_like(&self) -> Self {
        Coef::zero(&self.ring)
    }
    fn add(&self, o: &Self) -> Result<Self> {
        Coef::add(self, o)
    }
    fn sub(&self, o: &Self) -> Result<Self> {
        Coef::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        Coef::mul(self, o)
    }
    fn neg(&self) -> Self {
        Coef::neg(self)
    }
    fn pow(&self, e: u32) -> Result<Self> {
        Ok(Coef::pow(self, e))
    }
    fn times(&self, k: u32) -> Result<Self> {
        Coef::mul(self, &Coef::from_int(&self.ring, k as i64))
    }
    fn div_int(&self, k: u32) -> Result<Self> {
        Coef::div_int(self, k as u64)
    }
    fn is_zero(&self) -> bool {
        Coef::is_zero(self)
    }
    fn is_integral(&self) -> bool {
        self.terms().iter().all(|(_, q)| q.is_integer())
    }
    fn ring(&self) -> &Ring {
        &self.ring
    }
    fn change_ring(&self, r: &Ring) -> Result<Self> {
        Coef::change_ring(self, r)
    }
}

impl WittScalar for LaurentElt {
    fn zero_like(&self) -> Self {
        LaurentElt::zero(&self.ring, self.n)
    }
    fn add(&self, o: &Self) -> Result<Self> {
        LaurentElt::add(self, o)
    }
    fn sub(&self, o: &Self) -> Result<Self> {
        LaurentElt::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Result<Self> {
        LaurentElt::mul(self, o)
    }
    fn neg(&self) -> Self {
        LaurentElt::neg(self)
    }
    fn pow(&self, e: u32) -> Result<Self> {
        LaurentElt::pow(self, e)
    }
    fn times(&self, k: u32) -> Result<Self> {
        self.scale(&Coef::from_int(&self.ring, k as i64))
    }
    fn div_int(&self, k: u32) -> Result<Self> {
        self.map_coefficients(&self.ring, |c| c.div_int(k as u64))
    }
    fn is_zero(&self) -> bool {
        LaurentElt::is_zero(self)
    }
    fn is_integral(&self) -> bool {
        self.terms().iter().all(|(_, c)| c.is_integral())
    }
    fn ring(&self) -> &Ring {
        &self.ring
    }
    fn change_ring(&self, r: &Ring) -> Result<Self> {
        LaurentElt::change_ring(self, r)
    }
}

/// Witt coordinates `w_i`, or ghost coordinates `w(i)`; keys are exactly `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct WittVector<T> {
    pub s: IndexSet,
    pub coords: BTreeMap<u32, T>,
}

pub type GhostVector<T> = WittVector<T>;

impl<T: WittScalar> WittVector<T> {
    pub fn new(s: IndexSet, coords: BTreeMap<u32, T>) -> Result<Self> {
        if coords.len() != s.0.len() || !coords.keys().all(|i| s.contains(*i)) {
            return Err(Error::InvalidArgument("Witt coordinates must be indexed exactly by S".into()));
        }
        let mut it = coords.values();
        if let Some(first) = it.next() {
            for c in it {
                first.ring().check_same(c.ring())?;
            }
        }
        Ok(WittVector { s, coords })
    }

    pub fn zero(s: &IndexSet, like: &T) -> Self {
        WittVector { s: s.clone(), coords: s.iter().map(|i| (i, like.zero_like())).collect() }
    }

    pub fn get(&self, i: u32) -> &T {
        &self.coords[&i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.values().all(|c| c.is_zero())
    }

    fn same_s(&self, o: &Self) -> Result<()> {
        if self.s != o.s {
            return Err(Error::InvalidArgument("Witt vectors over different index sets".into()));
        }
        Ok(())
    }

    fn zip(&self, o: &Self, f: impl Fn(&T, &T) -> Result<T>) -> Result<Self> {
        self.same_s(o)?;
        let coords = self.coords.iter().map(|(i, a)| Ok((*i, f(a, &o.coords[i])?))).collect::<Result<_>>()?;
        Ok(WittVector { s: self.s.clone(), coords })
    }

    /// Restriction of coordinates to a divisor-closed subset.
    pub fn project(&self, sub: &IndexSet) -> Result<Self> {
        if !sub.is_subset(&self.s) {
            return Err(Error::InvalidArgument("projection target is not a subset of S".into()));
        }
        Ok(WittVector { s: sub.clone(), coords: sub.iter().map(|i| (i, self.coords[&i].clone())).collect() })
    }

    fn change_ring(&self, r: &Ring) -> Result<Self> {
        let coords = self.coords.iter().map(|(i, c)| Ok((*i, c.change_ring(r)?))).collect::<Result<_>>()?;
        Ok(WittVector { s: self.s.clone(), coords })
    }

    fn ring(&self) -> Option<&Ring> {
        self.coords.values().next().map(|c| c.ring())
    }
}

/// `w(i) = sum_{d | i} d * w_d^{i/d}`.
pub fn ghost<T: WittScalar>(w: &WittVector<T>) -> Result<GhostVector<T>> {
    let mut out = BTreeMap::new();
    for i in w.s.iter() {
        let mut acc = w.coords[&i].zero_like();
        for d in (1..=i).filter(|d| i % d == 0) {
            acc = acc.add(&w.coords[&d].pow(i / d)?.times(d)?)?;
        }
        out.insert(i, acc);
    }
    Ok(WittVector { s: w.s.clone(), coords: out })
}

/// Inverse of [`ghost`]. The flag reports whether every division by `i`
/// kept integral coefficients integral. Without `Q` an inexact division is an error.
pub fn ghost_to_coords<T: WittScalar>(g: &GhostVector<T>) -> Result<(WittVector<T>, bool)> {
    let mut w: BTreeMap<u32, T> = BTreeMap::new();
    let mut exact = true;
    for i in g.s.iter() {
        let mut num = g.coords[&i].clone();
        for d in (1..i).filter(|d| i % d == 0) {
            num = num.sub(&w[&d].pow(i / d)?.times(d)?)?;
        }
        let q = num.div_int(i)?;
        if num.is_integral() && !q.is_integral() {
            exact = false;
        }
        w.insert(i, q);
    }
    Ok((WittVector { s: g.s.clone(), coords: w }, exact))
}

/// The `Q`-form of `ring`, where ghost inversion is always possible.
fn rational_form(ring: &Ring) -> Result<Ring> {
    if ring.is_rational() {
        Ok(ring.clone())
    } else {
        Ring::new(ring.spec().over_rationals())
    }
}

/// Runs a ghost-side computation over the `Q`-form and brings integral results back.
fn lift_and_reduce<T: WittScalar>(
    ring: &Ring,
    compute: impl FnOnce(&Ring) -> Result<GhostVector<T>>,
) -> Result<(WittVector<T>, GhostVector<T>, bool)> {
    let q = rational_form(ring)?;
    let gh = compute(&q)?;
    let (w, exact) = ghost_to_coords(&gh)?;
    let integral = exact && w.coords.values().all(|c| c.is_integral());
    if ring.is_rational() {
        return Ok((w, gh, integral));
    }
    if !integral {
        return Err(Error::InternalConsistency(
            "Witt coordinates of an integral computation came out non-integral".into(),
        ));
    }
    let w = w.change_ring(ring)?;
    let gh = gh.change_ring(ring)?;
    Ok((w, gh, true))
}

/// Witt sum, computed on ghost coordinates.
pub fn witt_add<T: WittScalar>(a: &WittVector<T>, b: &WittVector<T>) -> Result<WittVector<T>> {
    a.same_s(b)?;
    let Some(ring) = a.ring().cloned() else { return Ok(a.clone()) };
    let (w, _, _) = lift_and_reduce(&ring, |q| {
        let (ga, gb) = (ghost(&a.change_ring(q)?)?, ghost(&b.change_ring(q)?)?);
        ga.zip(&gb, |x, y| x.add(y))
    })?;
    Ok(w)
}

/// Witt negative, computed on ghost coordinates.
pub fn witt_neg<T: WittScalar>(a: &WittVector<T>) -> Result<WittVector<T>> {
    let Some(ring) = a.ring().cloned() else { return Ok(a.clone()) };
    let (w, _, _) = lift_and_reduce(&ring, |q| {
        let g = ghost(&a.change_ring(q)?)?;
        Ok(WittVector { s: g.s.clone(), coords: g.coords.iter().map(|(i, c)| (*i, c.neg())).collect() })
    })?;
    Ok(w)
}

/// `prod_{i in S} (1 - w_i x^i)`, keeping the part of `x`-degree at most `degree`.
pub fn upsilon(w: &WittVector<Coef>, ring: &Ring, degree: u32) -> Result<LaurentElt> {
    let x = |e: i64| MultiIndex(vec![e]);
    let mut acc = LaurentElt::one(ring, 1);
    for (i, c) in &w.coords {
        if *i > degree {
            continue;
        }
        let factor = LaurentElt::from_terms(ring, 1, vec![(x(0), Coef::one(ring)), (x(*i as i64), c.neg())])?;
        acc = acc.mul(&factor)?;
        acc.terms.retain(|l, _| l.0[0] <= degree as i64);
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct WittPairing {
    pub coords: WittVector<Coef>,
    pub ghost: GhostVector<Coef>,
    pub integral: bool,
}

/// `(f_1, ..., f_n | g]`: the Witt vector over `A` whose `i`-th ghost
/// coordinate is `res(g(i) dlog f_1 ^ ... ^ dlog f_n)`.
pub fn witt_pair(fs: &[LaurentElt], g: &WittVector<LaurentElt>) -> Result<WittPairing> {
    let ring = fs.first().ok_or_else(|| Error::InvalidArgument("empty symbol tuple".into()))?.ring.clone();
    for c in g.coords.values() {
        ring.check_same(&c.ring)?;
        c.require_exact("Witt coordinate")?;
    }
    let (coords, ghost_v, integral) = lift_and_reduce(&ring, |q| {
        let fq: Vec<LaurentElt> = fs.iter().map(|f| f.change_ring(q)).collect::<Result<_>>()?;
        let gh = ghost(&g.change_ring(q)?)?;
        let mut out = BTreeMap::new();
        for (i, gi) in &gh.coords {
            out.insert(*i, res_dlog_wedge(gi, &fq)?);
        }
        Ok(WittVector { s: g.s.clone(), coords: out })
    })?;
    Ok(WittPairing { coords, ghost: ghost_v, integral })
}

/// `-log prod(1 - w_i x^i)` against `sum w(i) x^i / i`, through degree `degree`. Needs `Q`.
pub fn ghost_series_identity(w: &WittVector<Coef>, ring: &Ring, degree: u32) -> Result<bool> {
    let u = upsilon(w, ring, degree)?;
    let gh = ghost(w)?;
    // log(1 + h) for h of positive x-degree, truncated at `degree`
    let h = u.sub(&LaurentElt::one(ring, 1))?;
    let mut log = LaurentElt::zero(ring, 1);
    let mut pw = LaurentElt::one(ring, 1);
    for k in 1..=degree {
        pw = pw.mul(&h)?;
        pw.terms.retain(|l, _| l.0[0] <= degree as i64);
        let sign = if k % 2 == 1 { 1 } else { -1 };
        log = log.add(&pw.scale_scalar(&BigRational::new(sign.into(), (k as i64).into())))?;
    }
    let mut rhs = LaurentElt::zero(ring, 1);
    for (i, c) in &gh.coords {
        if *i <= degree {
            let term = LaurentElt::monomial(&c.div_int(*i as u64)?, MultiIndex(vec![*i as i64]));
            rhs = rhs.add(&term)?;
        }
    }
    Ok(log.neg() == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::RingSpec;

    fn wv(ring: &Ring, s: &[u32], vals: &[&str]) -> WittVector<Coef> {
        let s = IndexSet::new(s.iter().copied()).unwrap();
        let coords = s.iter().zip(vals).map(|(i, v)| (i, Coef::parse(ring, v).unwrap())).collect();
        WittVector::new(s, coords).unwrap()
    }

    #[test]
    fn ghosts() {
        let r = Ring::new(RingSpec::integers().free("a").free("b")).unwrap();
        let g = ghost(&wv(&r, &[1, 2], &["a", "b"])).unwrap();
        assert_eq!(g.get(2), &Coef::parse(&r, "a^2 + 2*b").unwrap());
        let q = Ring::rationals();
        let g = ghost(&wv(&q, &[1, 2, 4], &["1", "0", "0"])).unwrap();
        assert!(g.coords.values().all(|c| c.is_one()));
        assert!(IndexSet::new([1, 4]).is_err());
    }

    #[test]
    fn ghost_inversion_over_integers() {
        let r = Ring::new(RingSpec::integers().free("a")).unwrap();
        let (w, exact) = ghost_to_coords(&wv(&r, &[1, 2], &["a", "a^2"])).unwrap();
        assert!(exact);
        assert!(w.get(2).is_zero());
        let e = ghost_to_coords(&wv(&r, &[1, 2], &["0", "1"])).unwrap_err();
        assert_eq!(e.kind(), "UnsupportedRing");
    }

    #[test]
    fn addition() {
        let r = Ring::new(RingSpec::integers().free("a").free("b")).unwrap();
        let s = witt_add(&wv(&r, &[1, 2], &["a", "0"]), &wv(&r, &[1, 2], &["b", "0"])).unwrap();
        assert_eq!(s.get(1), &Coef::parse(&r, "a + b").unwrap());
        assert_eq!(s.get(2), &Coef::parse(&r, "-a*b").unwrap());
        let w = wv(&r, &[1, 2], &["a", "b"]);
        assert!(witt_add(&w, &witt_neg(&w).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn upsilon_and_ghost_series() {
        let q = Ring::new(RingSpec::rationals().free("a").free("b")).unwrap();
        let w = wv(&q, &[1], &["a"]);
        assert_eq!(upsilon(&w, &q, 3).unwrap().coefficient(&MultiIndex(vec![1])), Coef::parse(&q, "-a").unwrap());
        let w = wv(&q, &[1, 2, 3, 4], &["a", "b", "a*b", "1"]);
        assert!(ghost_series_identity(&w, &q, 4).unwrap());
    }

    #[test]
    fn pairing_with_t() {
        let q = Ring::rationals();
        let s = IndexSet::new([1]).unwrap();
        let g = WittVector::new(s, [(1, LaurentElt::constant(&Coef::from_int(&q, 5), 1))].into()).unwrap();
        let t = LaurentElt::var(&q, 1, 0);
        let p = witt_pair(&[t], &g).unwrap();
        assert_eq!(p.coords.get(1), &Coef::from_int(&q, 5));
        assert!(p.integral);
    }
}
