//! Differential forms over `L^n(A)` on the basis `dt_1, ..., dt_n`, and the residue.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coeff::{Coef, Ring};
use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::laurent::{graded_coefficient, inverse_factors, LaurentElt, PowerSeries, SeriesExpr, SeriesJson, Window};

/// `components[I]` is the coefficient of `dt_{i_1} ^ ... ^ dt_{i_k}` for
/// zero-based strictly increasing `I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffForm {
    ring: Ring,
    n: usize,
    degree: usize,
    components: BTreeMap<Vec<usize>, LaurentElt>,
}

impl DiffForm {
    pub fn zero(ring: &Ring, n: usize, degree: usize) -> DiffForm {
        DiffForm { ring: ring.clone(), n, degree, components: BTreeMap::new() }
    }

    pub fn function(f: &LaurentElt) -> DiffForm {
        let mut w = DiffForm::zero(&f.ring, f.n, 0);
        w.insert(vec![], f.clone());
        w
    }

    /// `dt_j`, zero-based.
    pub fn dt(ring: &Ring, n: usize, j: usize) -> DiffForm {
        let mut w = DiffForm::zero(ring, n, 1);
        w.insert(vec![j], LaurentElt::one(ring, n));
        w
    }

    pub fn from_components(
        ring: &Ring,
        n: usize,
        degree: usize,
        comps: Vec<(Vec<usize>, LaurentElt)>,
    ) -> Result<DiffForm> {
        if degree > n {
            return Err(Error::InvalidArgument(format!("degree {degree} exceeds n={n}")));
        }
        let mut w = DiffForm::zero(ring, n, degree);
        for (idx, f) in comps {
            ring.check_same(&f.ring)?;
            if f.n != n {
                return Err(Error::InvalidArgument("component arity mismatch".into()));
            }
            if idx.len() != degree || idx.windows(2).any(|p| p[0] >= p[1]) || idx.iter().any(|&i| i >= n) {
                return Err(Error::InvalidArgument(format!("bad basis index {idx:?} for a degree-{degree} form")));
            }
            if w.components.contains_key(&idx) {
                return Err(Error::InvalidArgument(format!("duplicate basis index {idx:?}")));
            }
            w.insert(idx, f);
        }
        Ok(w)
    }

    fn insert(&mut self, idx: Vec<usize>, f: LaurentElt) {
        if f.is_zero() && f.is_exact() {
            self.components.remove(&idx);
        } else {
            self.components.insert(idx, f);
        }
    }

    fn accumulate(&mut self, idx: Vec<usize>, f: LaurentElt) -> Result<()> {
        let v = match self.components.get(&idx) {
            Some(g) => g.add(&f)?,
            None => f,
        };
        self.insert(idx, v);
        Ok(())
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }
    pub fn components(&self) -> &BTreeMap<Vec<usize>, LaurentElt> {
        &self.components
    }
    pub fn component(&self, idx: &[usize]) -> LaurentElt {
        self.components.get(idx).cloned().unwrap_or_else(|| LaurentElt::zero(&self.ring, self.n))
    }

    fn check(&self, o: &DiffForm) -> Result<()> {
        self.ring.check_same(&o.ring)?;
        if self.n != o.n {
            return Err(Error::InvalidArgument("forms in different numbers of variables".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &DiffForm) -> Result<DiffForm> {
        self.check(o)?;
        if self.degree != o.degree {
            return Err(Error::InvalidArgument("adding forms of different degrees".into()));
        }
        let mut r = self.clone();
        for (idx, f) in &o.components {
            r.accumulate(idx.clone(), f.clone())?;
        }
        Ok(r)
    }

    pub fn neg(&self) -> DiffForm {
        let mut r = self.clone();
        r.components.values_mut().for_each(|f| *f = f.neg());
        r
    }

    pub fn sub(&self, o: &DiffForm) -> Result<DiffForm> {
        self.add(&o.neg())
    }

    /// Multiplication by a function.
    pub fn scale(&self, f: &LaurentElt) -> Result<DiffForm> {
        let mut r = DiffForm::zero(&self.ring, self.n, self.degree);
        for (idx, g) in &self.components {
            r.insert(idx.clone(), g.mul(f)?);
        }
        Ok(r)
    }

    pub fn d(&self) -> Result<DiffForm> {
        if self.degree >= self.n {
            return Err(Error::InvalidArgument(format!("d of a degree-{} form in {} variables", self.degree, self.n)));
        }
        let mut r = DiffForm::zero(&self.ring, self.n, self.degree + 1);
        for (idx, f) in &self.components {
            for j in 0..self.n {
                if idx.contains(&j) {
                    continue;
                }
                let df = f.partial(j);
                if df.is_zero() && df.is_exact() {
                    continue;
                }
                let pos = idx.iter().filter(|&&i| i < j).count();
                let mut new = idx.clone();
                new.insert(pos, j);
                r.accumulate(new, if pos % 2 == 0 { df } else { df.neg() })?;
            }
        }
        Ok(r)
    }

    pub fn wedge(&self, o: &DiffForm) -> Result<DiffForm> {
        self.check(o)?;
        if self.degree + o.degree > self.n {
            return Err(Error::InvalidArgument("wedge degree exceeds n".into()));
        }
        let mut r = DiffForm::zero(&self.ring, self.n, self.degree + o.degree);
        for (a, f) in &self.components {
            for (b, g) in &o.components {
                if a.iter().any(|i| b.contains(i)) {
                    continue;
                }
                let inversions: usize = a.iter().map(|i| b.iter().filter(|j| *j < i).count()).sum();
                let mut idx: Vec<usize> = a.iter().chain(b).copied().collect();
                idx.sort_unstable();
                let p = f.mul(g)?;
                r.accumulate(idx, if inversions.is_multiple_of(2) { p } else { p.neg() })?;
            }
        }
        Ok(r)
    }

    /// Coefficient of `t_1^{-1}...t_n^{-1} dt_1 ^ ... ^ dt_n`.
    ///
    /// Truncated components are rejected: a product of truncated series is
    /// not known exactly anywhere, so the residue would be unchecked. Use
    /// [`res_integrand`] and friends for series inputs.
    pub fn res(&self) -> Result<Coef> {
        if self.degree != self.n {
            return Err(Error::InvalidArgument(format!("res needs a degree-{} form", self.n)));
        }
        let idx: Vec<usize> = (0..self.n).collect();
        match self.components.get(&idx) {
            None => Ok(Coef::zero(&self.ring)),
            Some(f) => {
                f.require_exact("res")?;
                Ok(f.coefficient(&MultiIndex::splat(self.n, -1)))
            }
        }
    }
}

/// `d f / f` restricted to `window`; exact (window ignored) when the inverse of `f` is a Laurent polynomial.
pub fn dlog(f: &LaurentElt, window: Option<&Window>) -> Result<DiffForm> {
    f.require_exact("dlog")?;
    let (exact, geo) = inverse_factors(f)?;
    let mut inv = vec![SeriesExpr::Exact(exact)];
    inv.extend(geo);
    let mut w = DiffForm::zero(&f.ring, f.n, 1);
    for j in 0..f.n {
        let df = f.partial(j);
        if df.is_zero() {
            continue;
        }
        let mut factors = inv.clone();
        factors.push(SeriesExpr::Exact(df));
        w.insert(vec![j], SeriesExpr::Mul(factors).evaluate(window)?);
    }
    Ok(w)
}

/// Determinant of a square matrix of exact Laurent polynomials.
pub fn det_laurent(m: &[Vec<LaurentElt>], ring: &Ring, n: usize) -> Result<LaurentElt> {
    let k = m.len();
    if k == 0 {
        return Ok(LaurentElt::one(ring, n));
    }
    if k == 1 {
        return Ok(m[0][0].clone());
    }
    let mut acc = LaurentElt::zero(ring, n);
    for c in 0..k {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentElt>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let t = m[0][c].mul(&det_laurent(&minor, ring, n)?)?;
        acc = if c % 2 == 0 { acc.add(&t)? } else { acc.sub(&t)? };
    }
    Ok(acc)
}

/// Factors whose product is the coefficient of `dlog f_1 ^ ... ^ dlog f_k`
/// with `k = n`: `det(d_j f_i) * prod f_i^{-1}`.
pub fn dlog_wedge_factors(fs: &[LaurentElt]) -> Result<Vec<SeriesExpr>> {
    let (ring, n) = match fs.first() {
        Some(f) => (f.ring.clone(), f.n),
        None => return Err(Error::InvalidArgument("empty dlog wedge".into())),
    };
    if fs.len() != n {
        return Err(Error::InvalidArgument(format!("a top-degree wedge needs {n} entries, got {}", fs.len())));
    }
    let mut exact = LaurentElt::one(&ring, n);
    let mut out = vec![];
    let mut jac = vec![];
    for f in fs {
        ring.check_same(&f.ring)?;
        if f.n != n {
            return Err(Error::InvalidArgument("arity mismatch".into()));
        }
        f.require_exact("dlog")?;
        let (inv, geo) = inverse_factors(f)?;
        exact = exact.mul(&inv)?;
        out.extend(geo);
        jac.push((0..n).map(|j| f.partial(j)).collect::<Vec<_>>());
    }
    exact = exact.mul(&det_laurent(&jac, &ring, n)?)?;
    out.push(SeriesExpr::Exact(exact));
    Ok(out)
}

/// Exact residue of the top form whose coefficient is `expr`.
pub fn res_integrand(expr: &SeriesExpr, n: usize) -> Result<Coef> {
    graded_coefficient(expr, &MultiIndex::splat(n, -1))
}

/// `res(g dlog f_1 ^ ... ^ dlog f_n)`.
pub fn res_dlog_wedge(g: &LaurentElt, fs: &[LaurentElt]) -> Result<Coef> {
    g.require_exact("res")?;
    let mut factors = dlog_wedge_factors(fs)?;
    g.ring.check_same(&fs[0].ring)?;
    factors.push(SeriesExpr::Exact(g.clone()));
    res_integrand(&SeriesExpr::Mul(factors), g.n)
}

/// `res(log f_1 dlog f_2 ^ ... ^ dlog f_{n+1})` for multiplicatively sharp `f_1`.
pub fn res_log_dlog(f1: &LaurentElt, rest: &[LaurentElt]) -> Result<Coef> {
    if !f1.is_sharp_mult() {
        return Err(Error::NotSharp("log needs a multiplicatively sharp series".into()));
    }
    let mut factors = dlog_wedge_factors(rest)?;
    let h = f1.sub(&LaurentElt::one(&f1.ring, f1.n))?;
    if h.is_zero() {
        return Ok(Coef::zero(&f1.ring));
    }
    factors.push(SeriesExpr::apply(PowerSeries::Log, h)?);
    res_integrand(&SeriesExpr::Mul(factors), f1.n)
}

// ---- JSON ----------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComponentJson {
    /// One-based basis indices.
    pub dt: Vec<usize>,
    pub series: SeriesJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FormJson {
    #[serde(default)]
    pub n: Option<usize>,
    pub degree: usize,
    pub components: Vec<ComponentJson>,
}

impl FormJson {
    pub fn to_form(&self, ring: &Ring) -> Result<DiffForm> {
        let n = self
            .n
            .or_else(|| self.components.first().map(|c| c.series.n))
            .ok_or_else(|| Error::Parse("a form with no components needs \"n\"".into()))?;
        let mut comps = vec![];
        for c in &self.components {
            if c.dt.contains(&0) {
                return Err(Error::Parse("dt indices are one-based".into()));
            }
            comps.push((c.dt.iter().map(|i| i - 1).collect(), c.series.to_elt(ring)?));
        }
        DiffForm::from_components(ring, n, self.degree, comps).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_form(w: &DiffForm) -> FormJson {
        FormJson {
            n: Some(w.n),
            degree: w.degree,
            components: w
                .components
                .iter()
                .map(|(idx, f)| ComponentJson {
                    dt: idx.iter().map(|i| i + 1).collect(),
                    series: SeriesJson::from_elt(f),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::RingSpec;

    fn t(ring: &Ring, l: &[i64]) -> LaurentElt {
        LaurentElt::t_pow(ring, MultiIndex(l.to_vec()))
    }

    #[test]
    fn exterior_derivative_of_monomials() {
        let q = Ring::rationals();
        let w = DiffForm::function(&t(&q, &[2, 3])).d().unwrap();
        assert_eq!(w.component(&[0]), t(&q, &[1, 3]).scale(&Coef::from_int(&q, 2)).unwrap());
        assert_eq!(w.component(&[1]), t(&q, &[2, 2]).scale(&Coef::from_int(&q, 3)).unwrap());
        assert!(w.d().unwrap().is_zero());
    }

    #[test]
    fn wedge_signs() {
        let q = Ring::rationals();
        let a = DiffForm::dt(&q, 2, 0);
        let b = DiffForm::dt(&q, 2, 1);
        assert!(a.wedge(&a).unwrap().is_zero());
        assert_eq!(b.wedge(&a).unwrap(), a.wedge(&b).unwrap().neg());
        assert_eq!(a.wedge(&b).unwrap().component(&[0, 1]), LaurentElt::one(&q, 2));
    }

    #[test]
    fn residues() {
        let q = Ring::rationals();
        let top = DiffForm::dt(&q, 2, 0).wedge(&DiffForm::dt(&q, 2, 1)).unwrap().scale(&t(&q, &[-1, -1])).unwrap();
        assert!(top.res().unwrap().is_one());
        let r = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        let f = t(&r, &[0]).add(&t(&r, &[-1]).scale(&Coef::parse(&r, "e").unwrap()).unwrap()).unwrap();
        let w = dlog(&f, None).unwrap();
        assert_eq!(w.component(&[0]), t(&r, &[-2]).scale(&Coef::parse(&r, "-e").unwrap()).unwrap());
        let one_plus_t = t(&r, &[0]).add(&t(&r, &[1])).unwrap();
        assert_eq!(res_log_dlog(&f, &[one_plus_t]).unwrap(), Coef::parse(&r, "e").unwrap());
    }

    #[test]
    fn dlog_of_monomial_and_truncated() {
        let q = Ring::rationals();
        assert_eq!(dlog(&t(&q, &[1]), None).unwrap().component(&[0]), t(&q, &[-1]));
        let f = t(&q, &[0]).add(&t(&q, &[1])).unwrap();
        assert!(dlog(&f, None).is_err());
        let w = dlog(&f, Some(&Window::new(vec![0], vec![3]).unwrap())).unwrap();
        assert_eq!(w.component(&[0]).num_terms(), 4);
        assert!(res_dlog_wedge(&LaurentElt::one(&q, 1), &[f]).unwrap().is_zero());
    }

    #[test]
    fn json_round_trip() {
        let q = Ring::rationals();
        let w = DiffForm::dt(&q, 2, 1).scale(&t(&q, &[1, -1])).unwrap();
        let j = FormJson::from_form(&w);
        assert_eq!(j.to_form(&q).unwrap(), w);
    }
}
