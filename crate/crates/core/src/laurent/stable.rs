//! Coefficient extraction under box-shaped windows.
//!
//! When every truncated factor has its non-nilpotent support in the positive
//! orthant, the target coefficient is computed directly with a certified bound.
//! Otherwise the value is re-evaluated on doubled windows. A window loses
//! information whenever an infinite factor has a non-nilpotent term leaving the
//! orthant: its powers escape every box towards `-inf` in some variable, and
//! such escaped mass can return to the target through other factors. A lossy
//! evaluation is never accepted, so these inputs end in `StabilityExhausted`.

use super::{graded_coefficient, Grading, SeriesExpr, Window};
use crate::coeff::Coef;
use crate::error::{Error, Result};
use crate::index::MultiIndex;

pub const DEFAULT_DOUBLINGS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableValue {
    pub value: Coef,
    pub doublings: u32,
    /// True when obtained from the orthant bound rather than agreement of two windows.
    pub certified: bool,
}

fn lossy(expr: &SeriesExpr) -> bool {
    expr.apply_leaves().iter().any(|(_, h)| h.terms.iter().any(|(l, p)| !l.is_orthant() && !h.ring.p_is_nil(p)))
}

pub fn stable_coefficient(
    expr: &SeriesExpr,
    target: &MultiIndex,
    window: &Window,
    max_doublings: u32,
) -> Result<StableValue> {
    let g = expr.collapse_finite()?;
    if g.is_finite() {
        let v = g.evaluate_exact()?.coefficient(target);
        return Ok(StableValue { value: v, doublings: 0, certified: true });
    }
    if window.n() != target.n() {
        return Err(Error::InvalidArgument("window arity mismatch".into()));
    }
    if Grading::orthant(target.n()).admits(&g) {
        return Ok(StableValue { value: graded_coefficient(&g, target)?, doublings: 0, certified: true });
    }
    let lossy = lossy(&g);
    let mut w = window.including(target);
    let mut prev: Option<Coef> = None;
    let mut seen = vec![];
    for k in 0..=max_doublings {
        let v = g.evaluate(Some(&w))?.coefficient(target);
        seen.push(v.to_string());
        if !lossy && prev.as_ref() == Some(&v) {
            return Ok(StableValue { value: v, doublings: k, certified: false });
        }
        prev = Some(v);
        w = w.doubled();
    }
    Err(Error::StabilityExhausted(format!(
        "coefficient at {target} not stable after {max_doublings} doublings{}; values seen: [{}]",
        if lossy { " (an infinite factor escapes every box)" } else { "" },
        seen.join(", ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Ring, RingSpec};
    use crate::laurent::LaurentElt;

    #[test]
    fn log_times_geometric_stabilizes_immediately() {
        let r = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        let one = MultiIndex(vec![0]);
        let a = LaurentElt::from_terms(
            &r,
            1,
            vec![(one.clone(), Coef::one(&r)), (MultiIndex(vec![-1]), Coef::parse(&r, "e").unwrap())],
        )
        .unwrap();
        let b =
            LaurentElt::from_terms(&r, 1, vec![(one, Coef::one(&r)), (MultiIndex(vec![1]), Coef::one(&r))]).unwrap();
        let expr = SeriesExpr::Mul(vec![SeriesExpr::log_of(&a).unwrap(), SeriesExpr::inverse_of(&b).unwrap()]);
        let s = stable_coefficient(&expr, &MultiIndex(vec![-1]), &Window::cube(1, -1, 1), DEFAULT_DOUBLINGS).unwrap();
        assert_eq!(s.value, Coef::parse(&r, "e").unwrap());
        assert!(s.certified);
    }

    #[test]
    fn lex_tail_is_exhausted() {
        let q = Ring::rationals();
        let f = LaurentElt::from_terms(
            &q,
            2,
            vec![(MultiIndex(vec![0, 0]), Coef::one(&q)), (MultiIndex(vec![-1, 1]), Coef::from_int(&q, -1))],
        )
        .unwrap();
        let expr = SeriesExpr::inverse_of(&f).unwrap();
        let e = stable_coefficient(&expr, &MultiIndex(vec![-1, -1]), &Window::cube(2, -1, 1), 3).unwrap_err();
        assert_eq!(e.kind(), "StabilityExhausted");
    }
}
