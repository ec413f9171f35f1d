//! Iterated Laurent polynomials in `t_1..t_n` over a coefficient ring, with
//! optional box windows for truncated series.

mod decompose;
mod expr;
mod stable;

pub use decompose::{decompose, inverse_factors, invert, nilpotent_unit_inverse, unit_part, UnitDecomposition};
pub use expr::{compose_series, exp_sharp, graded_coefficient, log_sharp, Grading, PowerSeries, SeriesExpr};
pub use stable::{stable_coefficient, StableValue, DEFAULT_DOUBLINGS};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeff::{Coef, Poly, Ring, Scalar};
use crate::error::{Error, Result};
use crate::index::MultiIndex;

/// A box `lo <= l <= hi` in `Z^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Window> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidArgument(format!("invalid window {lo:?}..{hi:?}")));
        }
        Ok(Window { lo, hi })
    }
    pub fn cube(n: usize, lo: i64, hi: i64) -> Window {
        Window { lo: vec![lo; n], hi: vec![hi; n] }
    }
    pub fn n(&self) -> usize {
        self.lo.len()
    }
    pub fn contains(&self, l: &MultiIndex) -> bool {
        l.0.iter().enumerate().all(|(j, &x)| self.lo[j] <= x && x <= self.hi[j])
    }
    pub fn intersect(&self, o: &Window) -> Result<Window> {
        let lo: Vec<i64> = self.lo.iter().zip(&o.lo).map(|(a, b)| *a.max(b)).collect();
        let hi: Vec<i64> = self.hi.iter().zip(&o.hi).map(|(a, b)| *a.min(b)).collect();
        Window::new(lo, hi).map_err(|_| Error::InvalidArgument("windows do not intersect".into()))
    }
    /// Grows every bound outward, at least by one step.
    pub fn doubled(&self) -> Window {
        Window {
            lo: self.lo.iter().map(|&a| (2 * a).min(a - 1)).collect(),
            hi: self.hi.iter().map(|&b| (2 * b).max(b + 1)).collect(),
        }
    }
    pub fn including(&self, l: &MultiIndex) -> Window {
        Window {
            lo: self.lo.iter().zip(&l.0).map(|(a, b)| *a.min(b)).collect(),
            hi: self.hi.iter().zip(&l.0).map(|(a, b)| *a.max(b)).collect(),
        }
    }
}

/// Sparse `MultiIndex -> Coef` map; `window == None` means an exact Laurent polynomial.
#[derive(Clone, Debug)]
pub struct LaurentElt {
    pub(crate) ring: Ring,
    pub(crate) n: usize,
    pub(crate) terms: BTreeMap<MultiIndex, Poly>,
    pub(crate) window: Option<Window>,
}

impl PartialEq for LaurentElt {
    fn eq(&self, o: &Self) -> bool {
        self.ring == o.ring && self.n == o.n && self.terms == o.terms && self.window == o.window
    }
}
impl Eq for LaurentElt {}

impl LaurentElt {
    pub(crate) fn from_map(ring: &Ring, n: usize, terms: BTreeMap<MultiIndex, Poly>) -> LaurentElt {
        LaurentElt { ring: ring.clone(), n, terms, window: None }
    }

    pub fn zero(ring: &Ring, n: usize) -> LaurentElt {
        LaurentElt::from_map(ring, n, BTreeMap::new())
    }

    pub fn one(ring: &Ring, n: usize) -> LaurentElt {
        LaurentElt::monomial(&Coef::one(ring), MultiIndex::zero(n))
    }

    pub fn constant(c: &Coef, n: usize) -> LaurentElt {
        LaurentElt::monomial(c, MultiIndex::zero(n))
    }

    pub fn monomial(c: &Coef, l: MultiIndex) -> LaurentElt {
        let n = l.n();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(l, c.poly.clone());
        }
        LaurentElt::from_map(&c.ring, n, terms)
    }

    /// The monomial `t^l` with coefficient one.
    pub fn t_pow(ring: &Ring, l: MultiIndex) -> LaurentElt {
        LaurentElt::monomial(&Coef::one(ring), l)
    }

    /// The variable `t_j` (zero-based `j`).
    pub fn var(ring: &Ring, n: usize, j: usize) -> LaurentElt {
        LaurentElt::t_pow(ring, MultiIndex::unit(n, j))
    }

    pub fn from_terms(ring: &Ring, n: usize, terms: Vec<(MultiIndex, Coef)>) -> Result<LaurentElt> {
        let mut map = BTreeMap::new();
        for (l, c) in terms {
            ring.check_same(&c.ring)?;
            if l.n() != n {
                return Err(Error::InvalidArgument(format!("index {l} has wrong arity for n={n}")));
            }
            if map.contains_key(&l) {
                return Err(Error::InvalidArgument(format!("duplicate index {l}")));
            }
            if !c.is_zero() {
                map.insert(l, c.poly);
            }
        }
        Ok(LaurentElt::from_map(ring, n, map))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn window(&self) -> Option<&Window> {
        self.window.as_ref()
    }
    pub fn is_exact(&self) -> bool {
        self.window.is_none()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coefficient(&MultiIndex::zero(self.n)).is_one()
    }
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
    pub fn support(&self) -> Vec<MultiIndex> {
        self.terms.keys().cloned().collect()
    }
    pub fn terms(&self) -> Vec<(MultiIndex, Coef)> {
        self.terms.iter().map(|(l, p)| (l.clone(), Coef::from_poly(&self.ring, p.clone()))).collect()
    }
    pub fn coefficient(&self, l: &MultiIndex) -> Coef {
        Coef::from_poly(&self.ring, self.terms.get(l).cloned().unwrap_or_default())
    }
    pub fn constant_coef(&self) -> Coef {
        self.coefficient(&MultiIndex::zero(self.n))
    }

    /// Restricts to a box and marks the result as truncated.
    pub fn truncate(&self, w: &Window) -> Result<LaurentElt> {
        if w.n() != self.n {
            return Err(Error::InvalidArgument("window arity mismatch".into()));
        }
        let win = match &self.window {
            Some(o) => o.intersect(w)?,
            None => w.clone(),
        };
        let terms = self.terms.iter().filter(|(l, _)| win.contains(l)).map(|(l, p)| (l.clone(), p.clone())).collect();
        Ok(LaurentElt { ring: self.ring.clone(), n: self.n, terms, window: Some(win) })
    }

    pub(crate) fn with_window(mut self, w: Option<Window>) -> LaurentElt {
        self.window = w;
        self
    }

    fn check_compat(&self, o: &LaurentElt) -> Result<Option<Window>> {
        self.ring.check_same(&o.ring)?;
        if self.n != o.n {
            return Err(Error::InvalidArgument(format!("variable count mismatch: {} vs {}", self.n, o.n)));
        }
        match (&self.window, &o.window) {
            (None, None) => Ok(None),
            (Some(a), None) | (None, Some(a)) => Ok(Some(a.clone())),
            (Some(a), Some(b)) => Ok(Some(a.intersect(b)?)),
        }
    }

    fn finish(self, w: Option<Window>) -> LaurentElt {
        match w {
            None => self,
            Some(w) => {
                let terms = self.terms.into_iter().filter(|(l, _)| w.contains(l)).collect();
                LaurentElt { ring: self.ring, n: self.n, terms, window: Some(w) }
            }
        }
    }

    pub fn add(&self, o: &LaurentElt) -> Result<LaurentElt> {
        let w = self.check_compat(o)?;
        let mut terms = self.terms.clone();
        add_into(&self.ring, &mut terms, &o.terms);
        Ok(LaurentElt::from_map(&self.ring, self.n, terms).finish(w))
    }

    pub fn sub(&self, o: &LaurentElt) -> Result<LaurentElt> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> LaurentElt {
        let terms = self.terms.iter().map(|(l, p)| (l.clone(), self.ring.p_neg(p))).collect();
        LaurentElt { ring: self.ring.clone(), n: self.n, terms, window: self.window.clone() }
    }

    pub fn mul(&self, o: &LaurentElt) -> Result<LaurentElt> {
        let w = self.check_compat(o)?;
        let terms = match &w {
            None => mul_filtered(&self.ring, &self.terms, &o.terms, |_| true),
            Some(win) => mul_filtered(&self.ring, &self.terms, &o.terms, |l| win.contains(l)),
        };
        Ok(LaurentElt::from_map(&self.ring, self.n, terms).finish(w))
    }

    pub fn scale(&self, c: &Coef) -> Result<LaurentElt> {
        self.ring.check_same(&c.ring)?;
        let mut terms = BTreeMap::new();
        for (l, p) in &self.terms {
            let q = self.ring.p_mul(p, &c.poly);
            if !q.is_zero() {
                terms.insert(l.clone(), q);
            }
        }
        Ok(LaurentElt { ring: self.ring.clone(), n: self.n, terms, window: self.window.clone() })
    }

    pub(crate) fn scale_scalar(&self, q: &Scalar) -> LaurentElt {
        let mut terms = BTreeMap::new();
        for (l, p) in &self.terms {
            let r = self.ring.p_scale(p, q);
            if !r.is_zero() {
                terms.insert(l.clone(), r);
            }
        }
        LaurentElt { ring: self.ring.clone(), n: self.n, terms, window: self.window.clone() }
    }

    /// Multiplication by `t^l`.
    pub fn shift(&self, l: &MultiIndex) -> LaurentElt {
        let terms = self.terms.iter().map(|(k, p)| (k.add(l), p.clone())).collect();
        let window = self.window.as_ref().map(|w| Window {
            lo: w.lo.iter().zip(&l.0).map(|(a, b)| a + b).collect(),
            hi: w.hi.iter().zip(&l.0).map(|(a, b)| a + b).collect(),
        });
        LaurentElt { ring: self.ring.clone(), n: self.n, terms, window }
    }

    pub fn pow(&self, e: u32) -> Result<LaurentElt> {
        let mut r = LaurentElt::one(&self.ring, self.n).with_window(self.window.clone());
        for _ in 0..e {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    /// `d/dt_j`, zero-based `j`. A window loses its top row in direction `j`.
    pub fn partial(&self, j: usize) -> LaurentElt {
        let mut terms = BTreeMap::new();
        for (l, p) in &self.terms {
            let e = l.0[j];
            if e == 0 {
                continue;
            }
            let q = self.ring.p_scale(p, &crate::coeff::int(e));
            if !q.is_zero() {
                let mut k = l.clone();
                k.0[j] -= 1;
                terms.insert(k, q);
            }
        }
        let window = self.window.as_ref().map(|w| {
            let mut w = w.clone();
            w.lo[j] -= 1;
            w.hi[j] -= 1;
            w
        });
        LaurentElt { ring: self.ring.clone(), n: self.n, terms, window }
    }

    fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> LaurentElt {
        let terms = self.terms.iter().filter(|(l, _)| keep(l)).map(|(l, p)| (l.clone(), p.clone())).collect();
        LaurentElt { ring: self.ring.clone(), n: self.n, terms, window: self.window.clone() }
    }

    /// Strictly lex-negative part.
    pub fn negative_part(&self) -> LaurentElt {
        self.filter(|l| l.is_lex_negative())
    }

    /// Strictly lex-positive part.
    pub fn positive_part(&self) -> LaurentElt {
        self.filter(|l| l.is_lex_positive())
    }

    pub fn all_coefficients_nilpotent(&self) -> bool {
        self.terms.values().all(|p| self.ring.p_is_nil(p))
    }

    pub fn require_exact(&self, what: &str) -> Result<()> {
        if self.window.is_some() {
            Err(Error::InvalidArgument(format!("{what} needs an exact series, got a truncated one")))
        } else {
            Ok(())
        }
    }

    /// The `nu` projection: lex-smallest index with a unit coefficient.
    pub fn valuation(&self) -> Result<MultiIndex> {
        self.require_exact("valuation")?;
        if self.is_zero() {
            return Err(Error::NotInvertible("the zero series is not invertible".into()));
        }
        for (l, p) in &self.terms {
            if self.ring.p_is_invertible(p) {
                return Ok(l.clone());
            }
            if !self.ring.p_is_nilpotent(p)? {
                return Err(Error::NotInvertible(format!(
                    "coefficient {} at {l} is neither a unit nor nilpotent",
                    self.ring.p_to_string(p)
                )));
            }
        }
        Err(Error::NotInvertible("no coefficient is a unit".into()))
    }

    pub fn is_invertible(&self) -> bool {
        self.valuation().is_ok()
    }

    /// Constant and lex-negative coefficients nilpotent.
    pub fn is_sharp_add(&self) -> bool {
        self.terms.iter().all(|(l, p)| l.is_lex_positive() || self.ring.p_is_nil(p))
    }

    /// `f - 1` is additively sharp.
    pub fn is_sharp_mult(&self) -> bool {
        match self.sub(&LaurentElt::one(&self.ring, self.n).with_window(self.window.clone())) {
            Ok(g) => g.is_sharp_add(),
            Err(_) => false,
        }
    }

    /// Applies a ring map to every coefficient.
    pub fn map_coefficients(&self, target: &Ring, f: impl Fn(&Coef) -> Result<Coef>) -> Result<LaurentElt> {
        let mut terms = BTreeMap::new();
        for (l, p) in &self.terms {
            let c = f(&Coef::from_poly(&self.ring, p.clone()))?;
            target.check_same(&c.ring)?;
            if !c.is_zero() {
                terms.insert(l.clone(), c.poly);
            }
        }
        Ok(LaurentElt { ring: target.clone(), n: self.n, terms, window: self.window.clone() })
    }

    pub fn change_ring(&self, target: &Ring) -> Result<LaurentElt> {
        self.map_coefficients(target, |c| c.change_ring(target))
    }

    pub fn max_abs_exponent(&self) -> i64 {
        self.terms.keys().flat_map(|l| l.0.iter().map(|x| x.abs())).max().unwrap_or(0)
    }
}

pub(crate) fn add_into(ring: &Ring, acc: &mut BTreeMap<MultiIndex, Poly>, b: &BTreeMap<MultiIndex, Poly>) {
    for (l, p) in b {
        match acc.get_mut(l) {
            Some(q) => {
                ring.p_add_assign(q, p);
                if q.is_zero() {
                    acc.remove(l);
                }
            }
            None => {
                if !p.is_zero() {
                    acc.insert(l.clone(), p.clone());
                }
            }
        }
    }
}

pub(crate) fn mul_filtered(
    ring: &Ring,
    a: &BTreeMap<MultiIndex, Poly>,
    b: &BTreeMap<MultiIndex, Poly>,
    keep: impl Fn(&MultiIndex) -> bool,
) -> BTreeMap<MultiIndex, Poly> {
    let mut acc: BTreeMap<MultiIndex, BTreeMap<crate::coeff::Mono, Scalar>> = BTreeMap::new();
    for (la, pa) in a {
        for (lb, pb) in b {
            let l = la.add(lb);
            if !keep(&l) {
                continue;
            }
            ring.p_mul_into(acc.entry(l).or_default(), pa, pb);
        }
    }
    acc.into_iter().filter(|(_, m)| !m.is_empty()).map(|(l, m)| (l, Poly { terms: m })).collect()
}

impl fmt::Display for LaurentElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(l, p)| format!("({})*t^{}", self.ring.p_to_string(p), l)).collect();
        write!(f, "{}", parts.join(" + "))?;
        if let Some(w) = &self.window {
            write!(f, " [window {:?}..{:?}]", w.lo, w.hi)?;
        }
        Ok(())
    }
}

// ---- JSON ----------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermJson {
    pub exp: Vec<i64>,
    pub coef: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SeriesJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
    #[serde(default)]
    pub window: Option<Window>,
}

impl SeriesJson {
    pub fn to_elt(&self, ring: &Ring) -> Result<LaurentElt> {
        let mut terms = vec![];
        for t in &self.terms {
            terms.push((MultiIndex(t.exp.clone()), Coef::parse(ring, &t.coef)?));
        }
        let e = LaurentElt::from_terms(ring, self.n, terms).map_err(|e| Error::Parse(e.to_string()))?;
        match &self.window {
            None => Ok(e),
            Some(w) => {
                let w = Window::new(w.lo.clone(), w.hi.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                if w.n() != self.n {
                    return Err(Error::Parse("window arity mismatch".into()));
                }
                e.truncate(&w)
            }
        }
    }

    pub fn from_elt(e: &LaurentElt) -> SeriesJson {
        SeriesJson {
            n: e.n,
            terms: e.terms.iter().map(|(l, p)| TermJson { exp: l.0.clone(), coef: e.ring.p_to_string(p) }).collect(),
            window: e.window.clone(),
        }
    }
}
