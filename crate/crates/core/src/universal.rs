//! The universal series `phi_{n, j_1..j_q}` in the generic coefficients
//! `x_{i,l}` of `f_i = 1 + sum_l x_{i,l} t^l`.
//!
//! Every `x_{i,l}` is adjoined as a nilpotent generator and the ring is cut at
//! total degree `D`, which is the quotient by the `(D+1)`-st power of the
//! ideal they generate. The symbol of the generic tuple is then an exact
//! element of that ring and its expansion is `phi` through degree `D`.

use serde::Serialize;

use crate::coeff::{Coef, Ring, RingSpec, Scalar};
use crate::error::{Error, Result};
use crate::forms::res_log_dlog;
use crate::index::MultiIndex;
use crate::laurent::{LaurentElt, Window};

/// `phi_{n, j_1..j_q}`; `j` is one-based and strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiKey {
    pub n: usize,
    pub j: Vec<usize>,
}

impl PhiKey {
    pub fn new(n: usize, j: Vec<usize>) -> Result<PhiKey> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if j.len() > n || j.iter().any(|&x| x == 0 || x > n) || j.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "branch variables {j:?} must be strictly increasing in 1..={n}"
            )));
        }
        Ok(PhiKey { n, j })
    }

    /// Number of generic slots.
    pub fn p(&self) -> usize {
        self.n + 1 - self.j.len()
    }
}

/// One coefficient: `prod x_{i,l}^e` over the listed `(i, l, e)` with one-based `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiTerm {
    pub monomial: Vec<(usize, Vec<i64>, u32)>,
    pub value: Scalar,
}

impl PhiTerm {
    pub fn total_degree(&self) -> u32 {
        self.monomial.iter().map(|m| m.2).sum()
    }

    pub fn weight(&self, n: usize) -> Vec<i64> {
        let mut w = vec![0; n];
        for (_, l, e) in &self.monomial {
            w.iter_mut().zip(l).for_each(|(a, b)| *a += b * *e as i64);
        }
        w
    }
}

#[derive(Clone, Debug)]
pub struct UniversalSeries {
    pub key: PhiKey,
    pub degree: u32,
    pub window: Window,
    /// Nonzero coefficients sorted by total degree, then monomial.
    pub terms: Vec<PhiTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesReport {
    pub pass: bool,
    pub checked: usize,
    pub violations: Vec<String>,
}

/// Generic slot variables: one generator per `(slot, index)` pair.
struct Generic {
    ring: Ring,
    vars: Vec<(usize, MultiIndex)>,
}

fn var_name(i: usize, l: &MultiIndex) -> String {
    let parts: Vec<String> = l.0.iter().map(|x| if *x < 0 { format!("m{}", -x) } else { x.to_string() }).collect();
    format!("x{}_{}", i + 1, parts.join("_"))
}

impl Generic {
    fn new(supports: &[Vec<MultiIndex>], degree: u32) -> Result<Generic> {
        let mut spec = RingSpec::rationals();
        let mut vars = vec![];
        for (i, sup) in supports.iter().enumerate() {
            for l in sup {
                spec = spec.nil(&var_name(i, l), degree + 1);
                vars.push((i, l.clone()));
            }
        }
        let ring = Ring::new(spec.total_nil_degree(degree))?;
        Ok(Generic { ring, vars })
    }

    fn slot(&self, i: usize, n: usize) -> Result<LaurentElt> {
        let mut terms = vec![];
        for (k, (s, l)) in self.vars.iter().enumerate() {
            if *s == i {
                terms.push((l.clone(), Coef::generator(&self.ring, self.ring.names()[k].as_str())?));
            }
        }
        LaurentElt::one(&self.ring, n).add(&LaurentElt::from_terms(&self.ring, n, terms)?)
    }

    /// `exp res(log f_1 dlog f_2 ^ ... ^ dlog f_p ^ dlog t_j...)`, an element of the generic ring.
    fn phi(&self, key: &PhiKey) -> Result<Coef> {
        let n = key.n;
        let slots: Vec<LaurentElt> = (0..key.p()).map(|i| self.slot(i, n)).collect::<Result<_>>()?;
        let mut rest: Vec<LaurentElt> = slots[1..].to_vec();
        rest.extend(key.j.iter().map(|&j| LaurentElt::var(&self.ring, n, j - 1)));
        res_log_dlog(&slots[0], &rest)?.exp()
    }
}

fn window_points(w: &Window) -> Vec<MultiIndex> {
    let mut pts = vec![MultiIndex(vec![])];
    for j in 0..w.n() {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (w.lo[j]..=w.hi[j]).map(move |x| {
                    let mut q = p.0.clone();
                    q.push(x);
                    MultiIndex(q)
                })
            })
            .collect();
    }
    pts
}

/// All coefficients of `phi_key` of total degree at most `degree` in the
/// variables `x_{i,l}`, `l` in `window`.
pub fn phi_coefficients(key: &PhiKey, degree: u32, window: &Window) -> Result<UniversalSeries> {
    if degree == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    if window.n() != key.n {
        return Err(Error::InvalidArgument("window arity mismatch".into()));
    }
    let pts = window_points(window);
    let g = Generic::new(&vec![pts; key.p()], degree)?;
    let v = g.phi(key)?;
    let mut terms: Vec<PhiTerm> = v
        .terms()
        .into_iter()
        .map(|(mono, value)| {
            let monomial = mono
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(k, e)| (g.vars[k].0 + 1, g.vars[k].1 .0.clone(), *e))
                .collect();
            PhiTerm { monomial, value }
        })
        .collect();
    terms.sort_by(|a, b| a.total_degree().cmp(&b.total_degree()).then_with(|| a.monomial.cmp(&b.monomial)));
    Ok(UniversalSeries { key: key.clone(), degree, window: window.clone(), terms })
}

impl UniversalSeries {
    pub fn constant_term(&self) -> Scalar {
        self.terms.iter().find(|t| t.monomial.is_empty()).map(|t| t.value.clone()).unwrap_or_default()
    }

    pub fn coefficient(&self, monomial: &[(usize, Vec<i64>, u32)]) -> Scalar {
        let mut m = monomial.to_vec();
        m.sort();
        self.terms.iter().find(|t| t.monomial == m).map(|t| t.value.clone()).unwrap_or_default()
    }
}

fn describe(t: &PhiTerm) -> String {
    let parts: Vec<String> =
        t.monomial.iter().map(|(i, l, e)| format!("x_{{{i},{}}}^{e}", MultiIndex(l.clone()))).collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn check_integrality(s: &UniversalSeries) -> SeriesReport {
    let violations: Vec<String> =
        s.terms.iter().filter(|t| !t.value.is_integer()).map(|t| format!("{}: {}", describe(t), t.value)).collect();
    SeriesReport { pass: violations.is_empty(), checked: s.terms.len(), violations }
}

pub fn check_weight_zero(s: &UniversalSeries) -> SeriesReport {
    let violations: Vec<String> = s
        .terms
        .iter()
        .filter(|t| t.weight(s.key.n).iter().any(|x| *x != 0))
        .map(|t| format!("{} has weight {}", describe(t), MultiIndex(t.weight(s.key.n))))
        .collect();
    SeriesReport { pass: violations.is_empty(), checked: s.terms.len(), violations }
}

pub fn check_constant_term(s: &UniversalSeries) -> bool {
    s.constant_term() == Scalar::from_integer(1.into())
}

/// `cc{1 + g_1, ..., 1 + g_p, t_{j_1}, ..., t_{j_q}}` through the integral
/// series: valid over any base since the coefficients of `phi` are integers.
pub fn evaluate_phi(key: &PhiKey, gs: &[LaurentElt]) -> Result<Coef> {
    if gs.len() != key.p() {
        return Err(Error::InvalidArgument(format!("phi with this key takes {} series", key.p())));
    }
    let ring = gs[0].ring.clone();
    for g in gs {
        ring.check_same(&g.ring)?;
        g.require_exact("evaluate_phi")?;
        if g.n != key.n {
            return Err(Error::InvalidArgument("series arity mismatch".into()));
        }
        if !g.all_coefficients_nilpotent() {
            return Err(Error::NotSharp("evaluate_phi needs all coefficients nilpotent".into()));
        }
    }
    // a monomial of degree K in the x's evaluates to a product of K nilpotents
    let degree = (ring.nil_index().max(2) - 1) as u32;
    let supports: Vec<Vec<MultiIndex>> = gs.iter().map(|g| g.support()).collect();
    let gen = Generic::new(&supports, degree)?;
    let v = gen.phi(key)?;
    if let Some((_, q)) = v.terms().into_iter().find(|(_, q)| !q.is_integer()) {
        return Err(Error::InternalConsistency(format!("phi has the non-integral coefficient {q}")));
    }
    let images: Vec<Coef> = gen.vars.iter().map(|(i, l)| gs[*i].coefficient(l)).collect();
    let mut acc = Coef::zero(&ring);
    for (mono, q) in v.terms() {
        let mut t = Coef::from_scalar(&ring, &q)?;
        for (k, e) in mono.iter().enumerate() {
            if *e > 0 {
                t = t.mul(&images[k].pow(*e))?;
            }
        }
        acc = acc.add(&t)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{ratio, RingSpec};
    use crate::symbol::cc;

    #[test]
    fn phi_1_1_low_degree() {
        let key = PhiKey::new(1, vec![1]).unwrap();
        let s = phi_coefficients(&key, 2, &Window::cube(1, -2, 2)).unwrap();
        assert!(check_constant_term(&s));
        assert_eq!(s.coefficient(&[(1, vec![0], 1)]), ratio(1, 1));
        // exp(x_0 - x_0^2/2 - x_{-1} x_1 - ...) has no x_0^2 term
        assert_eq!(s.coefficient(&[(1, vec![0], 2)]), ratio(0, 1));
        assert_eq!(s.coefficient(&[(1, vec![-1], 1), (1, vec![1], 1)]), ratio(-1, 1));
        assert!(check_integrality(&s).pass && check_weight_zero(&s).pass);
    }

    #[test]
    fn two_generic_slots() {
        let key = PhiKey::new(1, vec![]).unwrap();
        let s = phi_coefficients(&key, 2, &Window::cube(1, -1, 1)).unwrap();
        assert_eq!(s.coefficient(&[(1, vec![1], 1), (2, vec![-1], 1)]), ratio(-1, 1));
        assert_eq!(s.coefficient(&[(1, vec![-1], 1), (2, vec![1], 1)]), ratio(1, 1));
        assert!(check_weight_zero(&s).pass);
    }

    #[test]
    fn corrupted_series_is_flagged() {
        let key = PhiKey::new(1, vec![1]).unwrap();
        let mut s = phi_coefficients(&key, 1, &Window::cube(1, -1, 1)).unwrap();
        s.terms.push(PhiTerm { monomial: vec![(1, vec![1], 1)], value: ratio(1, 2) });
        assert_eq!(check_integrality(&s).violations.len(), 1);
        assert_eq!(check_weight_zero(&s).violations.len(), 1);
    }

    #[test]
    fn evaluation_over_integers_matches_symbol() {
        let z = Ring::new(RingSpec::integers().nil("e", 2)).unwrap();
        let q = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        let key = PhiKey::new(2, vec![1, 2]).unwrap();
        let e = Coef::parse(&z, "e").unwrap();
        // only the t^0 coefficient of log(1 + g) reaches the residue against dlog t_1 ^ dlog t_2
        for (l, expect) in [(vec![-1, -1], "1"), (vec![0, 0], "1 + e")] {
            let g = LaurentElt::monomial(&e, MultiIndex(l));
            let v = evaluate_phi(&key, std::slice::from_ref(&g)).unwrap();
            assert_eq!(v, Coef::parse(&z, expect).unwrap());
            let one = LaurentElt::one(&q, 2);
            let f = one.add(&g.change_ring(&q).unwrap()).unwrap();
            let c = cc(&[f, LaurentElt::var(&q, 2, 0), LaurentElt::var(&q, 2, 1)]).unwrap();
            assert_eq!(c.change_ring(&z).unwrap(), v);
        }
        assert!(evaluate_phi(&PhiKey::new(1, vec![1]).unwrap(), &[LaurentElt::zero(&z, 1)]).unwrap().is_one());
    }
}
