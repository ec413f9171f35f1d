//! The mod-2 sign attached to a tuple of `n + 1` monomials `t^{l_1}, ..., t^{l_{n+1}}`.
//!
//! Two formulas are registered; they agree on all inputs and the symbol can
//! be evaluated with either.

use crate::error::{Error, Result};
use crate::index::{det_indices, MultiIndex};

pub trait SignRule: Send + Sync {
    fn name(&self) -> &'static str;
    /// `0` or `1`.
    fn sign(&self, ls: &[MultiIndex]) -> Result<u8>;
}

fn check_arity(ls: &[MultiIndex]) -> Result<usize> {
    let n = ls.len().checked_sub(1).ok_or_else(|| Error::InvalidArgument("sign of an empty tuple".into()))?;
    if ls.iter().any(|l| l.n() != n) {
        return Err(Error::InvalidArgument(format!("sign needs {} vectors in Z^{n}", n + 1)));
    }
    Ok(n)
}

fn parity(x: i128) -> u8 {
    x.rem_euclid(2) as u8
}

/// `sum_{i<j} det(l_1, .., ^l_i, .., ^l_j, .., l_{n+1}, l_i * l_j)` with the coordinatewise product.
pub struct VostokovFesenko;

impl SignRule for VostokovFesenko {
    fn name(&self) -> &'static str {
        "vf"
    }

    fn sign(&self, ls: &[MultiIndex]) -> Result<u8> {
        check_arity(ls)?;
        let mut s = 0u8;
        for i in 0..ls.len() {
            for j in i + 1..ls.len() {
                let prod = MultiIndex(ls[i].0.iter().zip(&ls[j].0).map(|(a, b)| a * b).collect());
                let mut cols: Vec<&MultiIndex> =
                    ls.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, l)| l).collect();
                cols.push(&prod);
                s ^= parity(det_indices(&cols));
            }
        }
        Ok(s)
    }
}

/// `1 + sum_i D_i + prod_i (1 + D_i)` with `D_i = det(l_1, .., ^l_i, .., l_{n+1})`.
pub struct Khovanskii;

impl SignRule for Khovanskii {
    fn name(&self) -> &'static str {
        "kh"
    }

    fn sign(&self, ls: &[MultiIndex]) -> Result<u8> {
        check_arity(ls)?;
        let mut sum = 1u8;
        let mut prod = 1u8;
        for i in 0..ls.len() {
            let cols: Vec<&MultiIndex> = ls.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, l)| l).collect();
            let d = parity(det_indices(&cols));
            sum ^= d;
            prod &= 1 ^ d;
        }
        Ok(sum ^ prod)
    }
}

pub fn sign_rules() -> Vec<Box<dyn SignRule>> {
    vec![Box::new(VostokovFesenko), Box::new(Khovanskii)]
}

pub fn sign_rule(name: &str) -> Result<Box<dyn SignRule>> {
    sign_rules()
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown sign rule {name:?}")))
}

pub fn sgn_vf(ls: &[MultiIndex]) -> Result<u8> {
    VostokovFesenko.sign(ls)
}

pub fn sgn_kh(ls: &[MultiIndex]) -> Result<u8> {
    Khovanskii.sign(ls)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[i64]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn small_values() {
        assert_eq!(sgn_vf(&[m(&[1]), m(&[1])]).unwrap(), 1);
        assert_eq!(sgn_kh(&[m(&[1]), m(&[1])]).unwrap(), 1);
        assert_eq!(sgn_kh(&[m(&[0]), m(&[0])]).unwrap(), 0);
        assert_eq!(sgn_vf(&[m(&[1, 0]), m(&[1, 0]), m(&[0, 1])]).unwrap(), 1);
        assert_eq!(sgn_vf(&[m(&[0, 0]), m(&[3, 1]), m(&[2, 5])]).unwrap(), 0);
        assert!(sgn_vf(&[m(&[1])]).is_err());
    }

    #[test]
    fn registry() {
        let names: Vec<_> = sign_rules().iter().map(|r| r.name()).collect();
        assert_eq!(names, ["vf", "kh"]);
        assert!(sign_rule("nope").is_err());
    }
}
