//! Computation graphs over Laurent series and their certified evaluation.
//!
//! A truncated factor is always `psi(h)` for a univariate power series `psi`
//! and an additively sharp Laurent polynomial `h`. Under a linear grading in
//! which every non-nilpotent term of `h` has positive level, the terms of
//! `psi(h)` of bounded level are finitely many and can be computed exactly:
//! at most `K - 1` factors of any nonzero product come from the remaining
//! (nilpotent) terms. Two gradings are used: the identity (orthant mode) and a
//! single weight `(1, N, N^2, ...)` which is positive on every lex-positive
//! index of bounded size.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{mul_filtered, LaurentElt, Window};
use crate::coeff::{Coef, Poly, Ring, Scalar};
use crate::error::{Error, Result};
use crate::index::MultiIndex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PowerSeries {
    /// `1/(1+x)`.
    Geometric,
    /// `log(1+x)`.
    Log,
    Exp,
    /// A polynomial; higher coefficients are zero.
    Polynomial(Vec<Scalar>),
    /// The first coefficients of a series; higher ones are unknown.
    Truncated(Vec<Scalar>),
}

impl PowerSeries {
    pub fn coeff(&self, k: usize) -> Option<Scalar> {
        match self {
            PowerSeries::Geometric => Some(if k.is_multiple_of(2) { Scalar::one() } else { -Scalar::one() }),
            PowerSeries::Log => Some(if k == 0 {
                Scalar::zero()
            } else {
                let s = if k % 2 == 1 { 1 } else { -1 };
                BigRational::new(BigInt::from(s), BigInt::from(k))
            }),
            PowerSeries::Exp => {
                let mut f = BigInt::one();
                for i in 2..=k {
                    f *= i;
                }
                Some(BigRational::new(BigInt::one(), f))
            }
            PowerSeries::Polynomial(c) => Some(c.get(k).cloned().unwrap_or_else(Scalar::zero)),
            PowerSeries::Truncated(c) => c.get(k).cloned(),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, PowerSeries::Polynomial(_))
    }
}

#[derive(Clone, Debug)]
pub enum SeriesExpr {
    Exact(LaurentElt),
    /// `series(arg)`; `arg` must be additively sharp.
    Apply {
        series: PowerSeries,
        arg: LaurentElt,
    },
    Mul(Vec<SeriesExpr>),
    Add(Vec<SeriesExpr>),
}

impl SeriesExpr {
    /// `f^{-1}` for multiplicatively sharp `f`.
    pub fn inverse_of(f: &LaurentElt) -> Result<SeriesExpr> {
        let h = f.sub(&LaurentElt::one(&f.ring, f.n))?;
        Self::apply(PowerSeries::Geometric, h)
    }

    /// `log f` for multiplicatively sharp `f`.
    pub fn log_of(f: &LaurentElt) -> Result<SeriesExpr> {
        let h = f.sub(&LaurentElt::one(&f.ring, f.n))?;
        Self::apply(PowerSeries::Log, h)
    }

    pub fn apply(series: PowerSeries, arg: LaurentElt) -> Result<SeriesExpr> {
        arg.require_exact("series argument")?;
        if !arg.is_sharp_add() {
            return Err(Error::NotSharp(
                "series argument has a non-nilpotent constant or lex-negative coefficient".into(),
            ));
        }
        Ok(SeriesExpr::Apply { series, arg })
    }

    fn ring_n(&self) -> Option<(Ring, usize)> {
        match self {
            SeriesExpr::Exact(e) | SeriesExpr::Apply { arg: e, .. } => Some((e.ring.clone(), e.n)),
            SeriesExpr::Mul(v) | SeriesExpr::Add(v) => v.iter().find_map(|c| c.ring_n()),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            SeriesExpr::Exact(e) => e.require_exact("graph leaf"),
            SeriesExpr::Apply { arg, .. } => arg.require_exact("series argument"),
            SeriesExpr::Mul(v) | SeriesExpr::Add(v) => v.iter().try_for_each(|c| c.check()),
        }
    }

    /// Infinite leaves: a non-polynomial series of an argument with a non-nilpotent term.
    pub fn is_finite(&self) -> bool {
        match self {
            SeriesExpr::Exact(_) => true,
            SeriesExpr::Apply { series, arg } => series.is_polynomial() || arg.all_coefficients_nilpotent(),
            SeriesExpr::Mul(v) | SeriesExpr::Add(v) => v.iter().all(|c| c.is_finite()),
        }
    }

    pub(crate) fn apply_leaves(&self) -> Vec<(&PowerSeries, &LaurentElt)> {
        let mut out = vec![];
        self.collect_apply(&mut out);
        out
    }

    fn collect_apply<'a>(&'a self, out: &mut Vec<(&'a PowerSeries, &'a LaurentElt)>) {
        match self {
            SeriesExpr::Exact(_) => {}
            SeriesExpr::Apply { series, arg } => out.push((series, arg)),
            SeriesExpr::Mul(v) | SeriesExpr::Add(v) => v.iter().for_each(|c| c.collect_apply(out)),
        }
    }

    /// Replaces finite `Apply` leaves by their exact values.
    pub fn collapse_finite(&self) -> Result<SeriesExpr> {
        Ok(match self {
            SeriesExpr::Exact(e) => SeriesExpr::Exact(e.clone()),
            SeriesExpr::Apply { series, arg } => {
                if series.is_polynomial() || arg.all_coefficients_nilpotent() {
                    SeriesExpr::Exact(apply_series(series, arg, None)?)
                } else {
                    self.clone()
                }
            }
            SeriesExpr::Mul(v) => SeriesExpr::Mul(v.iter().map(|c| c.collapse_finite()).collect::<Result<_>>()?),
            SeriesExpr::Add(v) => SeriesExpr::Add(v.iter().map(|c| c.collapse_finite()).collect::<Result<_>>()?),
        })
    }

    /// Exact value of a finite graph.
    pub fn evaluate_exact(&self) -> Result<LaurentElt> {
        self.check()?;
        let (ring, n) = self.ring_n().ok_or_else(|| Error::InvalidArgument("empty graph".into()))?;
        self.exact_rec(&ring, n)
    }

    fn exact_rec(&self, ring: &Ring, n: usize) -> Result<LaurentElt> {
        match self {
            SeriesExpr::Exact(e) => Ok(e.clone()),
            SeriesExpr::Apply { series, arg } => {
                if !(series.is_polynomial() || arg.all_coefficients_nilpotent()) {
                    return Err(Error::InvalidArgument("the value is an infinite series; a window is required".into()));
                }
                apply_series(series, arg, None)
            }
            SeriesExpr::Mul(v) => {
                let mut acc = LaurentElt::one(ring, n);
                for c in v {
                    acc = acc.mul(&c.exact_rec(ring, n)?)?;
                }
                Ok(acc)
            }
            SeriesExpr::Add(v) => {
                let mut acc = LaurentElt::zero(ring, n);
                for c in v {
                    acc = acc.add(&c.exact_rec(ring, n)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// Exact value when finite, else the exact restriction of the value to `window`.
    pub fn evaluate(&self, window: Option<&Window>) -> Result<LaurentElt> {
        self.check()?;
        let g = self.collapse_finite()?;
        if g.is_finite() {
            return g.evaluate_exact();
        }
        let w = window
            .ok_or_else(|| Error::InvalidArgument("the value is an infinite series; a window is required".into()))?;
        let (ring, n) = g.ring_n().unwrap();
        if w.n() != n {
            return Err(Error::InvalidArgument("window arity mismatch".into()));
        }
        let grading = Grading::choose(&g)?;
        let bound = grading.box_bound(w);
        let v = grading.eval(&g, &ring, n, &bound)?;
        v.truncate(w)
    }
}

/// Exact value of `target`'s coefficient, certified through a grading.
pub fn graded_coefficient(expr: &SeriesExpr, target: &MultiIndex) -> Result<Coef> {
    expr.check()?;
    let g = expr.collapse_finite()?;
    let (ring, n) = g.ring_n().ok_or_else(|| Error::InvalidArgument("empty graph".into()))?;
    if g.is_finite() {
        return Ok(g.exact_rec(&ring, n)?.coefficient(target));
    }
    let grading = Grading::choose(&g)?;
    Ok(Coef::from_poly(&ring, grading.eval_target(&g, &ring, n, target)?))
}

/// A linear map `Z^n -> Z^r`; levels are compared componentwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading {
    rows: Vec<Vec<i64>>,
}

type Level = Vec<i64>;

impl Grading {
    pub fn orthant(n: usize) -> Grading {
        Grading { rows: (0..n).map(|j| MultiIndex::unit(n, j).0).collect() }
    }

    /// Weight `(1, N, N^2, ...)`, positive on lex-positive indices with entries bounded by `N - 1`.
    pub fn lex_weight(n: usize, max_abs: i64) -> Grading {
        let base = max_abs.max(1) + 1;
        let mut w = vec![];
        let mut p = 1i64;
        for _ in 0..n {
            w.push(p);
            p *= base;
        }
        Grading { rows: vec![w] }
    }

    pub fn level(&self, l: &MultiIndex) -> Level {
        self.rows.iter().map(|r| r.iter().zip(&l.0).map(|(a, b)| a * b).sum()).collect()
    }

    fn within(&self, l: &MultiIndex, bound: &[i64]) -> bool {
        self.rows.iter().zip(bound).all(|(r, &b)| r.iter().zip(&l.0).map(|(a, x)| a * x).sum::<i64>() <= b)
    }

    fn positive(lv: &[i64]) -> bool {
        lv.iter().all(|&x| x >= 0) && lv.iter().any(|&x| x > 0)
    }

    /// Every non-nilpotent term of every infinite leaf has positive level.
    pub fn admits(&self, expr: &SeriesExpr) -> bool {
        expr.apply_leaves()
            .iter()
            .all(|(_, h)| h.terms.iter().all(|(l, p)| Self::positive(&self.level(l)) || h.ring.p_is_nil(p)))
    }

    pub fn choose(expr: &SeriesExpr) -> Result<Grading> {
        let (_, n) = expr.ring_n().ok_or_else(|| Error::InvalidArgument("empty graph".into()))?;
        let o = Grading::orthant(n);
        if o.admits(expr) {
            return Ok(o);
        }
        let mut m = 1;
        for (_, h) in expr.apply_leaves() {
            for (l, p) in &h.terms {
                if !h.ring.p_is_nil(p) {
                    m = m.max(l.0.iter().map(|x| x.abs()).max().unwrap_or(0));
                }
            }
        }
        let w = Grading::lex_weight(n, m);
        if w.admits(expr) {
            Ok(w)
        } else {
            Err(Error::NotSharp("a truncated factor has a non-nilpotent lex-nonpositive term".into()))
        }
    }

    /// Smallest bound whose region covers the box.
    pub fn box_bound(&self, w: &Window) -> Level {
        self.rows
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, &a)| if a >= 0 { a * w.hi[j] } else { a * w.lo[j] }).sum())
            .collect()
    }

    fn truncated(&self, e: &LaurentElt, bound: &[i64]) -> LaurentElt {
        let terms =
            e.terms.iter().filter(|(l, _)| self.within(l, bound)).map(|(l, p)| (l.clone(), p.clone())).collect();
        LaurentElt::from_map(&e.ring, e.n, terms)
    }

    fn mul_trunc(&self, a: &LaurentElt, b: &LaurentElt, bound: &[i64]) -> LaurentElt {
        LaurentElt::from_map(&a.ring, a.n, mul_filtered(&a.ring, &a.terms, &b.terms, |l| self.within(l, bound)))
    }

    fn slack(&self, h: &LaurentElt) -> Level {
        let k1 = h.ring.nil_index().saturating_sub(1) as i64;
        let mut s = vec![0i64; self.rows.len()];
        for l in h.terms.keys() {
            let lv = self.level(l);
            if !Self::positive(&lv) {
                for (r, x) in lv.iter().enumerate() {
                    s[r] = s[r].max(-x * k1);
                }
            }
        }
        s
    }

    /// Componentwise lower bound for the levels of the nonzero terms; `None` for zero.
    fn lower(&self, expr: &SeriesExpr) -> Option<Level> {
        match expr {
            SeriesExpr::Exact(e) => {
                let mut it = e.terms.keys().map(|l| self.level(l));
                let first = it.next()?;
                Some(it.fold(first, |a, b| a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect()))
            }
            SeriesExpr::Apply { arg, .. } => Some(self.slack(arg).iter().map(|s| -s).collect()),
            SeriesExpr::Mul(v) => {
                let mut acc = vec![0i64; self.rows.len()];
                for c in v {
                    let lb = self.lower(c)?;
                    acc.iter_mut().zip(&lb).for_each(|(a, b)| *a += b);
                }
                Some(acc)
            }
            SeriesExpr::Add(v) => {
                let lbs: Vec<Level> = v.iter().filter_map(|c| self.lower(c)).collect();
                let mut it = lbs.into_iter();
                let first = it.next()?;
                Some(it.fold(first, |a, b| a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect()))
            }
        }
    }

    /// Value correct at every index of level `<= bound`.
    fn eval(&self, expr: &SeriesExpr, ring: &Ring, n: usize, bound: &[i64]) -> Result<LaurentElt> {
        match expr {
            SeriesExpr::Exact(e) => Ok(self.truncated(e, bound)),
            SeriesExpr::Apply { series, arg } => apply_series(series, arg, Some((self, bound))),
            SeriesExpr::Add(v) => {
                let mut acc = LaurentElt::zero(ring, n);
                for c in v {
                    acc = acc.add(&self.eval(c, ring, n, bound)?)?;
                }
                Ok(acc)
            }
            SeriesExpr::Mul(v) => {
                let Some(parts) = self.mul_children(v, ring, n, bound, None)? else {
                    return Ok(LaurentElt::zero(ring, n));
                };
                Ok(parts.0)
            }
        }
    }

    /// Evaluates the factors of a product. With `split`, the factor at that
    /// position is returned separately (untruncated when exact) and the rest
    /// multiplied together.
    fn mul_children(
        &self,
        v: &[SeriesExpr],
        ring: &Ring,
        n: usize,
        bound: &[i64],
        split: Option<usize>,
    ) -> Result<Option<(LaurentElt, Option<LaurentElt>)>> {
        let mut lbs = vec![];
        for c in v {
            match self.lower(c) {
                Some(lb) => lbs.push(lb),
                None => return Ok(None),
            }
        }
        let r = self.rows.len();
        let total: Level = (0..r).map(|k| lbs.iter().map(|lb| lb[k]).sum()).collect();
        let child_bound = |i: usize| -> Level { (0..r).map(|k| bound[k] - (total[k] - lbs[i][k])).collect() };
        let mut separate = None;
        let mut acc: Option<LaurentElt> = None;
        let order: Vec<usize> = (0..v.len()).filter(|&i| Some(i) != split).collect();
        let mut remaining: Level = (0..r).map(|k| order.iter().map(|&i| lbs[i][k]).sum()).collect();
        if let Some(s) = split {
            separate = Some(match &v[s] {
                SeriesExpr::Exact(e) => e.clone(),
                other => self.eval(other, ring, n, &child_bound(s))?,
            });
            let _ = &mut remaining;
            // the split factor is applied last, so the others may be truncated
            // at `bound - lb(split)`
            remaining.iter_mut().zip(&lbs[s]).for_each(|(a, b)| *a += b);
        }
        for &i in &order {
            let val = self.eval(&v[i], ring, n, &child_bound(i))?;
            remaining.iter_mut().zip(&lbs[i]).for_each(|(a, b)| *a -= b);
            let cut: Level = (0..r).map(|k| bound[k] - remaining[k]).collect();
            acc = Some(match acc {
                None => self.truncated(&val, &cut),
                Some(a) => self.mul_trunc(&a, &val, &cut),
            });
        }
        let acc = acc.unwrap_or_else(|| LaurentElt::one(ring, n));
        Ok(Some((acc, separate)))
    }

    fn eval_target(&self, expr: &SeriesExpr, ring: &Ring, n: usize, target: &MultiIndex) -> Result<Poly> {
        let bound = self.level(target);
        match expr {
            SeriesExpr::Add(v) => {
                let mut acc = Poly::default();
                for c in v {
                    let p = self.eval_target(c, ring, n, target)?;
                    ring.p_add_assign(&mut acc, &p);
                }
                Ok(acc)
            }
            SeriesExpr::Mul(v) if v.len() > 1 => {
                let split = (0..v.len())
                    .max_by_key(|&i| match &v[i] {
                        SeriesExpr::Exact(e) => e.terms.len() + 1,
                        _ => 0,
                    })
                    .unwrap();
                let Some((rest, last)) = self.mul_children(v, ring, n, &bound, Some(split))? else {
                    return Ok(Poly::default());
                };
                let last = last.unwrap();
                let mut acc = BTreeMap::new();
                for (l, p) in &last.terms {
                    if let Some(q) = rest.terms.get(&target.sub(l)) {
                        ring.p_mul_into(&mut acc, p, q);
                    }
                }
                Ok(Poly { terms: acc })
            }
            _ => Ok(self.eval(expr, ring, n, &bound)?.terms.get(target).cloned().unwrap_or_default()),
        }
    }
}

/// `series(h)`, exactly (`grading == None`, requires termination) or correct
/// at all levels up to a bound.
fn apply_series(series: &PowerSeries, h: &LaurentElt, grading: Option<(&Grading, &[i64])>) -> Result<LaurentElt> {
    let ring = &h.ring;
    let n = h.n;
    let coef = |k: usize| -> Result<Option<Poly>> {
        match series.coeff(k) {
            None => Ok(None),
            Some(q) => Ok(Some(ring.p_const(ring.scalar(&q).map_err(|_| {
                Error::UnsupportedRing("this series needs rational coefficients; the base lacks Q".into())
            })?))),
        }
    };
    let mut sum = LaurentElt::zero(ring, n);
    let c0 = coef(0)?.ok_or_else(|| Error::InvalidArgument("empty series".into()))?;
    if !c0.is_zero() {
        sum.terms.insert(MultiIndex::zero(n), c0);
    }
    let (limit, cut) = match grading {
        None => (usize::MAX, None),
        Some((g, bound)) => {
            let s = g.slack(h);
            let cut: Level = bound.iter().zip(&s).map(|(b, s)| b + s).collect();
            let span: i64 = cut.iter().zip(&s).map(|(c, s)| (c + s).max(0)).sum();
            (ring.nil_index() + span as usize + 2, Some((g, cut)))
        }
    };
    let mut pw = LaurentElt::one(ring, n);
    let mut k = 0usize;
    loop {
        k += 1;
        if k > limit {
            return Err(Error::InternalConsistency("power loop exceeded its certified bound".into()));
        }
        pw = match &cut {
            None => pw.mul(h)?,
            Some((g, c)) => g.mul_trunc(&pw, h, c),
        };
        if pw.is_zero() {
            break;
        }
        if grading.is_none() && k > ring.nil_index() + 1 && !(h.all_coefficients_nilpotent()) {
            return Err(Error::InvalidArgument("the value is an infinite series; a window is required".into()));
        }
        match coef(k)? {
            Some(a) => {
                if !a.is_zero() {
                    let term = LaurentElt::from_map(ring, n, pw.terms.clone()).scale(&Coef::from_poly(ring, a))?;
                    sum = sum.add(&term)?;
                }
            }
            None => {
                return Err(Error::InvalidArgument(format!(
                    "series truncated at degree {} but power {k} of the argument still contributes",
                    k - 1
                )))
            }
        }
        if series.is_polynomial() {
            if let PowerSeries::Polynomial(c) = series {
                if k + 1 >= c.len() {
                    break;
                }
            }
        }
    }
    Ok(match (grading, cut) {
        (Some((g, bound)), Some(_)) => g.truncated(&sum, bound),
        _ => sum,
    })
}

/// `log f` for multiplicatively sharp `f`, exact or restricted to `window`.
pub fn log_sharp(f: &LaurentElt, window: Option<&Window>) -> Result<LaurentElt> {
    if !f.is_sharp_mult() {
        return Err(Error::NotSharp("log needs a multiplicatively sharp series".into()));
    }
    SeriesExpr::log_of(f)?.evaluate(window)
}

/// `exp g` for additively sharp `g`, exact or restricted to `window`.
pub fn exp_sharp(g: &LaurentElt, window: Option<&Window>) -> Result<LaurentElt> {
    SeriesExpr::apply(PowerSeries::Exp, g.clone())?.evaluate(window)
}

/// `phi(f)` for additively sharp `f`.
pub fn compose_series(phi: &PowerSeries, f: &LaurentElt, window: Option<&Window>) -> Result<LaurentElt> {
    SeriesExpr::apply(phi.clone(), f.clone())?.evaluate(window)
}
