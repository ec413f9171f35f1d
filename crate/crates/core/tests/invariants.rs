use proptest::prelude::*;

use ccsym::coeff::{Coef, Ring, RingSpec};
use ccsym::forms::{res_dlog_wedge, DiffForm};
use ccsym::index::MultiIndex;
use ccsym::laurent::{invert, unit_part, LaurentElt, SeriesJson, Window};
use ccsym::random::Gen;
use ccsym::symbol::{additive_symbol, cc};
use ccsym::verify::property_ring;
use ccsym::witt::{ghost, ghost_to_coords, witt_add, IndexSet, WittVector};

fn elt(seed: u64, n: usize) -> LaurentElt {
    Gen::new(seed).invertible(&property_ring(), n, 2, 2)
}

fn tuple(seed: u64, n: usize) -> Vec<LaurentElt> {
    let mut g = Gen::new(seed);
    (0..=n).map(|_| g.invertible(&property_ring(), n, 2, 2)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficient_strings_round_trip(seed in any::<u64>()) {
        let r = Ring::new(RingSpec::rationals().free("u").nil("e", 3)).unwrap();
        let c = Gen::new(seed).coef(&r);
        prop_assert_eq!(Coef::parse(&r, &c.to_string()).unwrap(), c);
    }

    #[test]
    fn series_json_round_trip(seed in any::<u64>(), n in 1usize..4) {
        let f = elt(seed, n);
        let js = serde_json::to_string(&SeriesJson::from_elt(&f)).unwrap();
        let back: SeriesJson = serde_json::from_str(&js).unwrap();
        prop_assert_eq!(back.to_elt(&property_ring()).unwrap(), f);
    }

    #[test]
    fn ring_axioms(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (x, y, z) = (elt(a, 2), elt(b, 2), elt(c, 2));
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(x.mul(&y.add(&z).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
    }

    #[test]
    fn unit_part_reassembles(seed in any::<u64>(), n in 1usize..4) {
        let f = elt(seed, n);
        let (nu, c, u) = unit_part(&f).unwrap();
        prop_assert!(u.sub(&LaurentElt::one(f.ring(), n)).unwrap().is_sharp_add());
        prop_assert_eq!(LaurentElt::monomial(&c, nu).mul(&u).unwrap(), f);
    }

    #[test]
    fn windowed_inverse(seed in any::<u64>(), n in 1usize..3) {
        let f = elt(seed, n);
        let w = Window::cube(n, -3, 3);
        let g = invert(&f, Some(&w)).unwrap();
        // supports lie in [-2, 2]^n, so product coefficients in [-1, 1]^n only read g inside w
        let inner = Window::cube(n, -1, 1);
        let one = LaurentElt::one(f.ring(), n);
        prop_assert_eq!(f.mul(&g).unwrap().truncate(&inner).unwrap().terms(), one.truncate(&inner).unwrap().terms());
    }

    #[test]
    fn symbol_is_antisymmetric(seed in any::<u64>(), n in 1usize..3) {
        let a = tuple(seed, n);
        let mut b = a.clone();
        b.swap(0, n);
        prop_assert!(cc(&a).unwrap().mul(&cc(&b).unwrap()).unwrap().is_one());
    }

    #[test]
    fn additive_symbol_is_a_residue(seed in any::<u64>(), n in 1usize..4) {
        let fs = tuple(seed, n);
        let d = additive_symbol(&fs[..n]).unwrap();
        let r = res_dlog_wedge(&LaurentElt::one(&property_ring(), n), &fs[..n]).unwrap();
        prop_assert_eq!(r, Coef::from_int(&property_ring(), d as i64));
    }

    #[test]
    fn exact_derivative_has_no_residue(seed in any::<u64>()) {
        let r = property_ring();
        let f = Gen::new(seed).laurent(&r, 2, 3, 4);
        let h = Gen::new(seed ^ 1).laurent(&r, 2, 3, 4);
        let eta = DiffForm::function(&f).wedge(&DiffForm::dt(&r, 2, 0)).unwrap()
            .add(&DiffForm::function(&h).wedge(&DiffForm::dt(&r, 2, 1)).unwrap()).unwrap();
        prop_assert!(eta.d().unwrap().res().unwrap().is_zero());
    }

    #[test]
    fn ghost_coordinates_round_trip(seed in any::<u64>()) {
        let r = Ring::new(RingSpec::rationals().nil("e", 3)).unwrap();
        let s = IndexSet::up_to(8);
        let mut g = Gen::new(seed);
        let w = WittVector::new(s.clone(), s.iter().map(|i| (i, g.coef(&r))).collect()).unwrap();
        prop_assert_eq!(ghost_to_coords(&ghost(&w).unwrap()).unwrap().0, w);
    }

    #[test]
    fn witt_addition_commutes(seed in any::<u64>()) {
        let z = Ring::new(RingSpec::integers().nil("e", 2)).unwrap();
        let s = IndexSet::up_to(6);
        let mut g = Gen::new(seed);
        let a = WittVector::new(s.clone(), s.iter().map(|i| (i, g.coef(&z))).collect()).unwrap();
        let b = WittVector::new(s.clone(), s.iter().map(|i| (i, g.coef(&z))).collect()).unwrap();
        prop_assert_eq!(witt_add(&a, &b).unwrap(), witt_add(&b, &a).unwrap());
    }

    #[test]
    fn monomial_symbols_are_signs(l in proptest::collection::vec(-3i64..=3, 2)) {
        let q = Ring::rationals();
        let ts: Vec<LaurentElt> = l.iter().map(|&k| LaurentElt::t_pow(&q, MultiIndex(vec![k]))).collect();
        let v = cc(&ts).unwrap();
        let expect = if (l[0] * l[1]).rem_euclid(2) == 1 { -1 } else { 1 };
        prop_assert_eq!(v, Coef::from_int(&q, expect));
    }
}
