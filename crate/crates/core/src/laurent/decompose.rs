use super::{LaurentElt, PowerSeries, SeriesExpr, Window};
use crate::coeff::Coef;
use crate::error::{Error, Result};
use crate::index::MultiIndex;

const DECOMPOSE_STEPS: usize = 24;

/// `f = t^nu * c * v_plus * v_minus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitDecomposition {
    pub nu: MultiIndex,
    pub c: Coef,
    pub v_plus: LaurentElt,
    pub v_minus: LaurentElt,
}

impl UnitDecomposition {
    pub fn reassemble(&self) -> Result<LaurentElt> {
        let base = LaurentElt::monomial(&self.c, self.nu.clone());
        base.mul(&self.v_plus)?.mul(&self.v_minus)
    }

    /// `t^{-nu} c^{-1} v_minus^{-1}`, the exactly invertible part of `f^{-1}`.
    pub fn exact_inverse_part(&self) -> Result<LaurentElt> {
        let ci = self.c.inverse()?;
        nilpotent_unit_inverse(&self.v_minus)?.shift(&self.nu.neg()).scale(&ci)
    }
}

/// Inverse of `1 + m` where every coefficient of `m` is nilpotent.
pub fn nilpotent_unit_inverse(u: &LaurentElt) -> Result<LaurentElt> {
    let one = LaurentElt::one(&u.ring, u.n);
    let m = u.sub(&one)?;
    if !m.all_coefficients_nilpotent() {
        return Err(Error::NotInvertible("expected 1 + (nilpotent coefficients)".into()));
    }
    let mneg = m.neg();
    let mut sum = one.clone();
    let mut pw = one;
    let limit = u.ring.nil_index() + 1;
    for _ in 0..limit {
        pw = pw.mul(&mneg)?;
        if pw.is_zero() {
            return Ok(sum);
        }
        sum = sum.add(&pw)?;
    }
    Err(Error::InternalConsistency("geometric series of a nilpotent element did not terminate".into()))
}

/// `f = t^nu * c * u` with `u - 1` additively sharp; always exact.
pub fn unit_part(f: &LaurentElt) -> Result<(MultiIndex, Coef, LaurentElt)> {
    let nu = f.valuation()?;
    let c = Coef::from_poly(&f.ring, f.terms[&nu].clone());
    let u = f.shift(&nu.neg()).scale(&c.inverse()?)?;
    Ok((nu, c, u))
}

/// `f^{-1}` as an exact factor times, when needed, a geometric series leaf.
pub fn inverse_factors(f: &LaurentElt) -> Result<(LaurentElt, Option<SeriesExpr>)> {
    let (nu, c, u) = unit_part(f)?;
    let mono = LaurentElt::monomial(&c.inverse()?, nu.neg());
    let h = u.sub(&LaurentElt::one(&f.ring, f.n))?;
    if h.all_coefficients_nilpotent() {
        Ok((mono.mul(&nilpotent_unit_inverse(&u)?)?, None))
    } else {
        Ok((mono, Some(SeriesExpr::apply(PowerSeries::Geometric, h)?)))
    }
}

/// Contou-Carrere decomposition of an exact invertible Laurent polynomial.
///
/// In two or more variables `v_minus` can be an infinite series, for example
/// for `1 + t_1 + e t_2^{-1}`; that case reports `StabilityExhausted`.
pub fn decompose(f: &LaurentElt) -> Result<UnitDecomposition> {
    let nu = f.valuation()?;
    let n = f.n;
    let ring = f.ring.clone();
    let g = f.shift(&nu.neg());
    let one = LaurentElt::one(&ring, n);
    let mut v_minus = one.clone();
    let mut q = None;
    for _ in 0..DECOMPOSE_STEPS {
        let r = g.mul(&nilpotent_unit_inverse(&v_minus)?)?;
        let neg = r.negative_part();
        if neg.is_zero() {
            q = Some(r);
            break;
        }
        if !neg.all_coefficients_nilpotent() {
            return Err(Error::InternalConsistency("negative part acquired a non-nilpotent coefficient".into()));
        }
        let c0 = r.constant_coef().inverse().map_err(|_| Error::NotInvertible("constant term is not a unit".into()))?;
        v_minus = v_minus.mul(&one.add(&neg.scale(&c0)?)?)?;
    }
    let q = q.ok_or_else(|| Error::StabilityExhausted("v_minus is not a Laurent polynomial".into()))?;
    let c = q.constant_coef();
    let ci = c.inverse().map_err(|_| Error::InternalConsistency("constant term after peeling is not a unit".into()))?;
    let v_plus = q.scale(&ci)?;
    Ok(UnitDecomposition { nu, c, v_plus, v_minus })
}

/// `f^{-1}`, exact when it is a Laurent polynomial, otherwise the exact
/// restriction of the inverse series to `window`.
pub fn invert(f: &LaurentElt, window: Option<&Window>) -> Result<LaurentElt> {
    f.require_exact("invert")?;
    match inverse_factors(f)? {
        (exact, None) => Ok(exact),
        (exact, Some(geo)) => SeriesExpr::Mul(vec![geo, SeriesExpr::Exact(exact)]).evaluate(window),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Ring, RingSpec};

    fn series(ring: &crate::coeff::Ring, terms: &[(i64, &str)]) -> LaurentElt {
        LaurentElt::from_terms(
            ring,
            1,
            terms.iter().map(|(l, c)| (MultiIndex(vec![*l]), Coef::parse(ring, c).unwrap())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn projections_example() {
        let r = Ring::new(RingSpec::integers().nil("e", 2)).unwrap();
        let f = series(&r, &[(-1, "e"), (0, "1+e"), (1, "1")]);
        let d = decompose(&f).unwrap();
        assert!(d.nu.is_zero());
        assert!(d.c.is_one());
        assert_eq!(d.reassemble().unwrap(), f);
        assert_eq!(d.v_minus, series(&r, &[(-1, "e"), (0, "1")]));
        assert_eq!(d.v_plus, series(&r, &[(0, "1"), (1, "1")]));
    }

    #[test]
    fn monomial_times_constant() {
        let q = Ring::rationals();
        let f = series(&q, &[(2, "5")]);
        let d = decompose(&f).unwrap();
        assert_eq!(d.nu, MultiIndex(vec![2]));
        assert_eq!(d.c, Coef::from_int(&q, 5));
        assert!(d.v_plus.is_one() && d.v_minus.is_one());
    }

    #[test]
    fn product_of_factors() {
        let r = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        let vm = series(&r, &[(-1, "e"), (0, "1")]).mul(&series(&r, &[(-2, "-e"), (0, "1")])).unwrap();
        let vp = series(&r, &[(0, "1"), (1, "1"), (2, "1")]);
        let f = vm.mul(&vp).unwrap().scale(&Coef::from_int(&r, 3)).unwrap();
        let d = decompose(&f).unwrap();
        assert_eq!(d.c, Coef::from_int(&r, 3));
        assert_eq!(d.v_minus, vm);
        assert_eq!(d.v_plus, vp);
    }

    #[test]
    fn inverses() {
        let q = Ring::rationals();
        assert_eq!(invert(&series(&q, &[(1, "1")]), None).unwrap(), series(&q, &[(-1, "1")]));
        let w = Window::new(vec![0], vec![4]).unwrap();
        let g = invert(&series(&q, &[(0, "1"), (1, "-1")]), Some(&w)).unwrap();
        assert_eq!(g.terms.len(), 5);
        assert!(g.terms.values().all(|p| *p == q.p_one()));
        assert!(invert(&series(&q, &[(0, "1"), (1, "-1")]), None).is_err());
        let r = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        assert_eq!(invert(&series(&r, &[(0, "1"), (-1, "e")]), None).unwrap(), series(&r, &[(0, "1"), (-1, "-e")]));
    }
}
