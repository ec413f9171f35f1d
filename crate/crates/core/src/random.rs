//! Seeded generators of coefficients, Laurent polynomials and Witt vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::{ratio, Base, Coef, Ring};
use crate::index::MultiIndex;
use crate::laurent::LaurentElt;

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        items.choose(&mut self.rng).expect("non-empty choice")
    }

    pub fn index(&mut self, n: usize, bound: i64) -> MultiIndex {
        MultiIndex((0..n).map(|_| self.int(-bound, bound)).collect())
    }

    /// A small nonzero base scalar.
    pub fn scalar(&mut self, ring: &Ring) -> Coef {
        loop {
            let q = if ring.is_rational() && self.chance(0.3) {
                ratio(self.int(-4, 4), self.int(1, 3))
            } else {
                ratio(self.int(-4, 4), 1)
            };
            if let Ok(c) = Coef::from_scalar(ring, &q) {
                if !c.is_zero() {
                    return c;
                }
            }
        }
    }

    /// A unit of the base ring.
    pub fn unit_scalar(&mut self, ring: &Ring) -> Coef {
        match ring.spec().base {
            Base::Rationals => loop {
                let q = ratio(self.int(-3, 3), self.int(1, 3));
                if q.numer() != &BigInt::from(0) {
                    return Coef::from_scalar(ring, &q).unwrap();
                }
            },
            Base::Integers => Coef::from_int(ring, *self.pick(&[1, -1])),
            Base::IntegersMod(m) => loop {
                let v = self.int(1, m as i64 - 1);
                if v.gcd(&(m as i64)) == 1 {
                    return Coef::from_int(ring, v);
                }
            },
        }
    }

    fn nil_monomial(&mut self, ring: &Ring) -> Option<Coef> {
        let nil: Vec<usize> = (0..ring.ngens()).filter(|&i| ring.is_nil_gen(i)).collect();
        if nil.is_empty() {
            return None;
        }
        let i = *self.pick(&nil);
        let order = ring.gen_order(i).unwrap().max(2);
        let e = self.int(1, order as i64 - 1) as u32;
        let mut c = Coef::generator(ring, &ring.names()[i]).unwrap().pow(e);
        for j in 0..ring.ngens() {
            if j != i && self.chance(0.3) {
                let e = match ring.gen_order(j) {
                    Some(o) => self.int(1, o.max(2) as i64 - 1) as u32,
                    None => self.int(1, 2) as u32,
                };
                c = c.mul(&Coef::generator(ring, &ring.names()[j]).unwrap().pow(e)).unwrap();
            }
        }
        Some(c)
    }

    /// A nilpotent element; zero only when the ring has no nilpotent generators.
    pub fn nilpotent(&mut self, ring: &Ring) -> Coef {
        for _ in 0..20 {
            let mut acc = Coef::zero(ring);
            for _ in 0..self.int(1, 2) {
                match self.nil_monomial(ring) {
                    Some(m) => acc = acc.add(&m.mul(&self.scalar(ring)).unwrap()).unwrap(),
                    None => return acc,
                }
            }
            if !acc.is_zero() {
                return acc;
            }
        }
        Coef::zero(ring)
    }

    /// A free-generator monomial, or one.
    fn free_part(&mut self, ring: &Ring) -> Coef {
        let mut c = Coef::one(ring);
        for j in 0..ring.ngens() {
            if ring.gen_order(j).is_none() && self.chance(0.4) {
                c = c.mul(&Coef::generator(ring, &ring.names()[j]).unwrap()).unwrap();
            }
        }
        c
    }

    /// A general element: a scalar times an optional free monomial, plus a nilpotent.
    pub fn coef(&mut self, ring: &Ring) -> Coef {
        let base = self.scalar(ring).mul(&self.free_part(ring)).unwrap();
        if self.chance(0.5) {
            base.add(&self.nilpotent(ring)).unwrap()
        } else {
            base
        }
    }

    pub fn unit(&mut self, ring: &Ring) -> Coef {
        let u = self.unit_scalar(ring);
        if self.chance(0.5) {
            u.add(&self.nilpotent(ring)).unwrap()
        } else {
            u
        }
    }

    /// Up to `terms` terms with arbitrary coefficients and exponents in `[-bound, bound]^n`.
    pub fn laurent(&mut self, ring: &Ring, n: usize, bound: i64, terms: usize) -> LaurentElt {
        let mut acc = LaurentElt::zero(ring, n);
        for _ in 0..terms {
            let m = LaurentElt::monomial(&self.coef(ring), self.index(n, bound));
            acc = acc.add(&m).unwrap();
        }
        acc
    }

    /// A Laurent polynomial whose coefficients are all nilpotent.
    pub fn nilpotent_laurent(&mut self, ring: &Ring, n: usize, bound: i64, terms: usize) -> LaurentElt {
        let mut acc = LaurentElt::zero(ring, n);
        for _ in 0..terms {
            let m = LaurentElt::monomial(&self.nilpotent(ring), self.index(n, bound));
            acc = acc.add(&m).unwrap();
        }
        acc
    }

    /// An invertible Laurent polynomial: a unit at a random `nu`, nilpotent
    /// coefficients below it and arbitrary ones above it, in `[-bound, bound]^n`.
    pub fn invertible(&mut self, ring: &Ring, n: usize, bound: i64, extra: usize) -> LaurentElt {
        let nu = self.index(n, bound);
        let mut acc = LaurentElt::monomial(&self.unit(ring), nu.clone());
        for _ in 0..extra {
            let l = self.index(n, bound);
            if l == nu {
                continue;
            }
            let c = if l < nu { self.nilpotent(ring) } else { self.coef(ring) };
            acc = acc.add(&LaurentElt::monomial(&c, l)).unwrap();
        }
        acc
    }
}
