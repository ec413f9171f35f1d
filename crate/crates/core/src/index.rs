//! Multi-indices with the lexicographic order in which the last variable is
//! the most significant, plus small integer determinants.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }
    pub fn unit(n: usize, j: usize) -> Self {
        let mut v = vec![0; n];
        v[j] = 1;
        MultiIndex(v)
    }
    pub fn splat(n: usize, v: i64) -> Self {
        MultiIndex(vec![v; n])
    }
    pub fn n(&self) -> usize {
        self.0.len()
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    pub fn sub(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }
    pub fn scale(&self, k: i64) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * k).collect())
    }
    /// Sign of `self` relative to zero in the lexicographic order.
    pub fn lex_sign(&self) -> Ordering {
        for &x in self.0.iter().rev() {
            if x != 0 {
                return x.cmp(&0);
            }
        }
        Ordering::Equal
    }
    pub fn is_lex_positive(&self) -> bool {
        self.lex_sign() == Ordering::Greater
    }
    pub fn is_lex_negative(&self) -> bool {
        self.lex_sign() == Ordering::Less
    }
    pub fn is_orthant(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.0.len(), other.0.len());
        for (a, b) in self.0.iter().rev().zip(other.0.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

/// Determinant of a square integer matrix given by columns.
pub fn det_columns(cols: &[Vec<i64>]) -> i128 {
    let n = cols.len();
    if n == 0 {
        return 1;
    }
    let m: Vec<Vec<i128>> = (0..n).map(|r| (0..n).map(|c| cols[c][r] as i128).collect()).collect();
    det_rec(&m)
}

fn det_rec(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    match n {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut s = 0i128;
            for c in 0..n {
                if m[0][c] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect())
                    .collect();
                let t = m[0][c] * det_rec(&minor);
                s += if c % 2 == 0 { t } else { -t };
            }
            s
        }
    }
}

pub fn det_indices(ls: &[&MultiIndex]) -> i128 {
    let cols: Vec<Vec<i64>> = ls.iter().map(|l| l.0.clone()).collect();
    det_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_variable_dominates() {
        let a = MultiIndex(vec![5, -1]);
        let b = MultiIndex(vec![-5, 0]);
        assert!(a < b);
        assert!(MultiIndex(vec![-1, 1]).is_lex_positive());
        assert!(MultiIndex(vec![1, -1]).is_lex_negative());
    }

    #[test]
    fn order_matches_recursive_definition_on_grid() {
        let pts: Vec<MultiIndex> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| MultiIndex(vec![a, b]))).collect();
        for x in &pts {
            for y in &pts {
                let rec = if x.0[1] != y.0[1] { x.0[1].cmp(&y.0[1]) } else { x.0[0].cmp(&y.0[0]) };
                assert_eq!(x.cmp(y), rec);
                for z in &pts {
                    assert_eq!(x.cmp(y), x.add(z).cmp(&y.add(z)));
                }
            }
        }
    }

    #[test]
    fn determinants() {
        assert_eq!(det_columns(&[vec![1, 0], vec![0, 1]]), 1);
        assert_eq!(det_columns(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det_columns(&[vec![2, 0, 0], vec![0, 3, 0], vec![1, 1, 4]]), 24);
        assert_eq!(det_columns(&[]), 1);
    }
}
