//! The higher Contou-Carrere symbol, the additive symbol and the tame symbol.
//!
//! `cc` splits every entry as `t^nu * c * u` with `u` sharp, expands by
//! multilinearity and evaluates each pure term by one of three rules:
//! a sharp factor gives `exp res(log f_1 dlog f_2 ^ ... )`, a constant gives
//! `c^det(nu(others))`, and all-monomial terms give `(-1)^sgn`.

use serde::Serialize;

use crate::coeff::{Base, Coef, Ring};
use crate::error::{Error, Result};
use crate::forms::{res_dlog_wedge, res_log_dlog, DiffForm};
use crate::index::{det_columns, MultiIndex};
use crate::laurent::{unit_part, LaurentElt};
use crate::sign::{SignRule, VostokovFesenko};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Monomial(MultiIndex),
    Constant(Coef),
    Sharp(LaurentElt),
}

impl Factor {
    fn to_elt(&self, ring: &Ring, n: usize) -> LaurentElt {
        match self {
            Factor::Monomial(l) => LaurentElt::t_pow(ring, l.clone()),
            Factor::Constant(c) => LaurentElt::constant(c, n),
            Factor::Sharp(v) => v.clone(),
        }
    }

    fn label(&self) -> String {
        match self {
            Factor::Monomial(l) => format!("t^{l}"),
            Factor::Constant(c) => format!("const({c})"),
            Factor::Sharp(_) => "sharp".into(),
        }
    }
}

/// The non-trivial factors of `f`.
pub fn factors(f: &LaurentElt) -> Result<Vec<Factor>> {
    let (nu, c, u) = unit_part(f)?;
    let mut out = vec![];
    if !nu.is_zero() {
        out.push(Factor::Monomial(nu));
    }
    if !c.is_one() {
        out.push(Factor::Constant(c));
    }
    if !u.is_one() {
        out.push(Factor::Sharp(u));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BranchStep {
    pub slots: Vec<String>,
    pub branch: &'static str,
    /// Slot moved to the front; the value was inverted when this is not zero.
    pub moved_from: usize,
    pub value: String,
}

#[derive(Clone, Debug)]
pub struct CcResult {
    pub value: Coef,
    pub trace: Vec<BranchStep>,
}

fn check_tuple(tuple: &[LaurentElt]) -> Result<(Ring, usize)> {
    let first = tuple.first().ok_or_else(|| Error::InvalidArgument("empty symbol tuple".into()))?;
    let (ring, n) = (first.ring.clone(), first.n);
    if tuple.len() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "a symbol in {n} variables takes {} entries, got {}",
            n + 1,
            tuple.len()
        )));
    }
    for f in tuple {
        ring.check_same(&f.ring)?;
        if f.n != n {
            return Err(Error::InvalidArgument("entries have different numbers of variables".into()));
        }
        f.require_exact("symbol entry")?;
    }
    Ok((ring, n))
}

pub fn cc(tuple: &[LaurentElt]) -> Result<Coef> {
    Ok(cc_traced(tuple, &VostokovFesenko)?.value)
}

pub fn cc_traced(tuple: &[LaurentElt], rule: &dyn SignRule) -> Result<CcResult> {
    let (ring, n) = check_tuple(tuple)?;
    let fs: Vec<Vec<Factor>> = tuple.iter().map(factors).collect::<Result<_>>()?;
    let mut value = Coef::one(&ring);
    let mut trace = vec![];
    if fs.iter().any(|v| v.is_empty()) {
        return Ok(CcResult { value, trace });
    }
    if !ring.is_rational() && fs.iter().flatten().any(|f| matches!(f, Factor::Sharp(_))) {
        // log and exp need denominators: compute over the Q form and map back
        let q = Ring::new(ring.spec().over_rationals())?;
        let lifted: Vec<LaurentElt> = tuple.iter().map(|f| f.change_ring(&q)).collect::<Result<_>>()?;
        let r = cc_traced(&lifted, rule)?;
        let value = r.value.change_ring(&ring).map_err(|e| {
            Error::UnsupportedRing(format!("the symbol over the Q form does not reduce to this ring: {e}"))
        })?;
        return Ok(CcResult { value, trace: r.trace });
    }
    let mut choice = vec![0usize; fs.len()];
    loop {
        let slots: Vec<&Factor> = choice.iter().zip(&fs).map(|(&c, v)| &v[c]).collect();
        let (v, step) = pure_term(&ring, n, &slots, rule)?;
        value = value.mul(&v)?;
        trace.push(step);
        let mut k = 0;
        loop {
            if k == fs.len() {
                return Ok(CcResult { value, trace });
            }
            choice[k] += 1;
            if choice[k] < fs[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn pure_term(ring: &Ring, n: usize, slots: &[&Factor], rule: &dyn SignRule) -> Result<(Coef, BranchStep)> {
    let labels: Vec<String> = slots.iter().map(|f| f.label()).collect();
    let front = |k: usize| -> Vec<&Factor> {
        let mut s = slots.to_vec();
        s.swap(0, k);
        s
    };
    let finish = |v: Coef, branch: &'static str, k: usize| -> Result<(Coef, BranchStep)> {
        let v = if k != 0 { v.inverse()? } else { v };
        let step = BranchStep { slots: labels.clone(), branch, moved_from: k, value: v.to_string() };
        Ok((v, step))
    };
    if let Some(k) = slots.iter().position(|f| matches!(f, Factor::Sharp(_))) {
        let s = front(k);
        if s[1..].iter().any(|f| matches!(f, Factor::Constant(_))) {
            return finish(Coef::one(ring), "exp-res", k);
        }
        let Factor::Sharp(f1) = s[0] else { unreachable!() };
        let rest: Vec<LaurentElt> = s[1..].iter().map(|f| f.to_elt(ring, n)).collect();
        let r = res_log_dlog(f1, &rest)?;
        if !r.is_nilpotent()? {
            return Err(Error::InternalConsistency(format!("residue {r} of a sharp term is not nilpotent")));
        }
        return finish(r.exp()?, "exp-res", k);
    }
    if let Some(k) = slots.iter().position(|f| matches!(f, Factor::Constant(_))) {
        let s = front(k);
        let Factor::Constant(c) = s[0] else { unreachable!() };
        let mut cols = vec![];
        for f in &s[1..] {
            match f {
                Factor::Monomial(l) => cols.push(l.0.clone()),
                _ => return finish(Coef::one(ring), "constant", k),
            }
        }
        let det = det_columns(&cols);
        let e = i64::try_from(det).map_err(|_| Error::InvalidArgument("exponent overflow".into()))?;
        return finish(c.powi(e)?, "constant", k);
    }
    let ls: Vec<MultiIndex> = slots
        .iter()
        .map(|f| match f {
            Factor::Monomial(l) => l.clone(),
            _ => unreachable!(),
        })
        .collect();
    let v = if rule.sign(&ls)? == 1 { Coef::from_int(ring, -1) } else { Coef::one(ring) };
    finish(v, "sign", 0)
}

/// `det(nu(f_1), ..., nu(f_n))`.
pub fn additive_symbol(fs: &[LaurentElt]) -> Result<i128> {
    let first = fs.first().ok_or_else(|| Error::InvalidArgument("empty tuple".into()))?;
    if fs.len() != first.n {
        return Err(Error::InvalidArgument(format!("the additive symbol takes {} entries", first.n)));
    }
    let mut cols = vec![];
    for f in fs {
        first.ring.check_same(&f.ring)?;
        if f.n != first.n {
            return Err(Error::InvalidArgument("entries have different numbers of variables".into()));
        }
        cols.push(f.valuation()?.0);
    }
    Ok(det_columns(&cols))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteinbergDetReport {
    pub det: i128,
    pub pass: bool,
}

/// For `f_1 + f_2 = 1`, checks that the valuation determinant vanishes.
pub fn steinberg_det_check(fs: &[LaurentElt]) -> Result<SteinbergDetReport> {
    if fs.len() < 2 {
        return Err(Error::InvalidArgument("needs at least two variables".into()));
    }
    if !fs[0].add(&fs[1])?.is_one() {
        return Err(Error::InvalidArgument("the first two entries must sum to 1".into()));
    }
    let det = additive_symbol(fs)?;
    Ok(SteinbergDetReport { det, pass: det == 0 })
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// `(-1)^{nu(f)nu(g)} * (f^{nu(g)} / g^{nu(f)})(0)` for one variable over a field.
pub fn tame_symbol(f: &LaurentElt, g: &LaurentElt) -> Result<Coef> {
    let ring = &f.ring;
    ring.check_same(&g.ring)?;
    if f.n != 1 || g.n != 1 {
        return Err(Error::InvalidArgument("the tame symbol is defined for one variable".into()));
    }
    let field = ring.ngens() == 0
        && match ring.spec().base {
            Base::Rationals => true,
            Base::IntegersMod(p) => is_prime(p),
            Base::Integers => false,
        };
    if !field {
        return Err(Error::UnsupportedRing("the tame symbol needs a field: Q or Z/p".into()));
    }
    f.require_exact("tame symbol")?;
    g.require_exact("tame symbol")?;
    let (nf, ng) = (f.valuation()?, g.valuation()?);
    let a = f.coefficient(&nf);
    let b = g.coefficient(&ng);
    let (x, y) = (nf.0[0], ng.0[0]);
    let v = a.powi(y)?.mul(&b.powi(-x)?)?;
    Ok(if (x * y) % 2 != 0 { v.neg() } else { v })
}

/// Both sides of `cc{1 + g e, f_1, ..., f_n} = 1 + res(g dlog f_1 ^ ... ^ dlog f_n) e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub lhs: Coef,
    pub rhs: Coef,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn cc_eps_linearization(g: &LaurentElt, fs: &[LaurentElt], eps: &Coef) -> Result<IdentityCheck> {
    if eps.is_zero() || !eps.mul(eps)?.is_zero() {
        return Err(Error::InvalidArgument("eps must be nonzero with eps^2 = 0".into()));
    }
    let n = g.n;
    let one = LaurentElt::one(&g.ring, n);
    let mut tuple = vec![one.add(&g.scale(eps)?)?];
    tuple.extend(fs.iter().cloned());
    let lhs = cc(&tuple)?;
    let rhs = Coef::one(&g.ring).add(&res_dlog_wedge(g, fs)?.mul(eps)?)?;
    Ok(IdentityCheck { lhs, rhs })
}

/// Both sides of `cc{1 + g_1 h, ..., 1 + g_{n+1} h} = 1 + res(g_1 dg_2 ^ ... ^ dg_{n+1}) h^{n+1}`.
pub fn cc_eta_linearization(gs: &[LaurentElt], eta: &Coef) -> Result<IdentityCheck> {
    let (ring, n) = check_tuple(gs)?;
    if eta.pow(n as u32 + 1).is_zero() || !eta.pow(n as u32 + 2).is_zero() {
        return Err(Error::InvalidArgument(format!("eta must satisfy eta^{} = 0 and eta^{} != 0", n + 2, n + 1)));
    }
    let one = LaurentElt::one(&ring, n);
    let tuple: Vec<LaurentElt> = gs.iter().map(|g| one.add(&g.scale(eta)?)).collect::<Result<_>>()?;
    let lhs = cc(&tuple)?;
    let mut w = DiffForm::function(&gs[0]);
    for g in &gs[1..] {
        w = w.wedge(&DiffForm::function(g).d()?)?;
    }
    let rhs = Coef::one(&ring).add(&w.res()?.mul(&eta.pow(n as u32 + 1))?)?;
    Ok(IdentityCheck { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::RingSpec;

    fn t(ring: &Ring, l: &[i64]) -> LaurentElt {
        LaurentElt::t_pow(ring, MultiIndex(l.to_vec()))
    }

    #[test]
    fn anchors() {
        let q = Ring::rationals();
        assert_eq!(cc(&[t(&q, &[1]), t(&q, &[1])]).unwrap(), Coef::from_int(&q, -1));
        let two = LaurentElt::constant(&Coef::from_int(&q, 2), 2);
        assert_eq!(cc(&[two, t(&q, &[1, 0]), t(&q, &[0, 1])]).unwrap(), Coef::from_int(&q, 2));
        assert_eq!(additive_symbol(&[t(&q, &[1, 0]), t(&q, &[0, 1])]).unwrap(), 1);
    }

    #[test]
    fn closed_form_one_pair() {
        let r = Ring::new(RingSpec::rationals().free("u").nil("v", 4)).unwrap();
        let u = Coef::generator(&r, "u").unwrap();
        let v = Coef::generator(&r, "v").unwrap();
        let one = LaurentElt::one(&r, 1);
        let f = one.sub(&t(&r, &[1]).scale(&u).unwrap()).unwrap();
        let g = one.sub(&t(&r, &[-1]).scale(&v).unwrap()).unwrap();
        let expect = Coef::one(&r).sub(&u.mul(&v).unwrap()).unwrap();
        assert_eq!(cc(&[f, g]).unwrap(), expect);
    }

    #[test]
    fn non_rational_rings_reduce_from_the_rational_form() {
        let z7 = Ring::new(RingSpec::modular(7).nil("e", 3)).unwrap();
        let q = Ring::new(z7.spec().over_rationals()).unwrap();
        let e = Coef::generator(&z7, "e").unwrap();
        let one = LaurentElt::one(&z7, 1);
        let f = one.add(&t(&z7, &[-1]).scale(&e).unwrap()).unwrap();
        let g = one.add(&t(&z7, &[1]).scale(&Coef::from_int(&z7, 3)).unwrap()).unwrap();
        let lifted = cc(&[f.change_ring(&q).unwrap(), g.change_ring(&q).unwrap()]).unwrap();
        let v = cc(&[f, g]).unwrap();
        assert_eq!(v, lifted.change_ring(&z7).unwrap());
        // r = 3e + 9e^2/2, exp r = 1 + 3e + 9e^2
        let expect = Coef::parse(&z7, "1 + 3*e + 9*e^2").unwrap();
        assert_eq!(v, expect);
    }

    #[test]
    fn tame_values() {
        let q = Ring::rationals();
        assert_eq!(tame_symbol(&t(&q, &[1]), &t(&q, &[1])).unwrap(), Coef::from_int(&q, -1));
        let c = LaurentElt::constant(&Coef::from_int(&q, 7), 1);
        assert_eq!(tame_symbol(&c, &t(&q, &[1])).unwrap(), Coef::from_int(&q, 7));
        let omt = LaurentElt::one(&q, 1).sub(&t(&q, &[1])).unwrap();
        assert!(tame_symbol(&omt, &t(&q, &[1])).unwrap().is_one());
        assert!(cc(&[omt, t(&q, &[1])]).unwrap().is_one());
    }

    #[test]
    fn linearizations() {
        let r = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        let e = Coef::generator(&r, "e").unwrap();
        let c = cc_eps_linearization(&t(&r, &[0]), &[t(&r, &[1])], &e).unwrap();
        assert!(c.holds());
        assert_eq!(c.rhs, Coef::parse(&r, "1 + e").unwrap());
        // g dlog t = t^-2 dt has no residue
        let c = cc_eps_linearization(&t(&r, &[-1]), &[t(&r, &[1])], &e).unwrap();
        assert!(c.holds() && c.lhs.is_one());
        let h = Ring::new(RingSpec::rationals().nil("h", 3)).unwrap();
        let eta = Coef::generator(&h, "h").unwrap();
        let c = cc_eta_linearization(&[t(&h, &[-1]), t(&h, &[1])], &eta).unwrap();
        assert!(c.holds());
        assert_eq!(c.lhs, Coef::parse(&h, "1 + h^2").unwrap());
    }

    #[test]
    fn steinberg_determinant() {
        let q = Ring::rationals();
        let f = t(&q, &[-1, 0]);
        let g = LaurentElt::one(&q, 2).sub(&f).unwrap();
        assert!(steinberg_det_check(&[f, g]).unwrap().pass);
    }
}
