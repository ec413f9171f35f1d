//! Randomized and exhaustive property checks with counterexample reports.

use serde::Serialize;

use crate::coeff::{Coef, Ring, RingSpec};
use crate::error::{Error, Result};
use crate::forms::{res_dlog_wedge, DiffForm};
use crate::index::{det_columns, MultiIndex};
use crate::laurent::{decompose, unit_part, LaurentElt, SeriesJson, Window};
use crate::random::Gen;
use crate::sign::{sgn_kh, sgn_vf};
use crate::symbol::{additive_symbol, cc, cc_eps_linearization, cc_eta_linearization, tame_symbol};
use crate::universal::{
    check_constant_term, check_integrality, check_weight_zero, evaluate_phi, phi_coefficients, PhiKey,
};
use crate::witt::{ghost, ghost_to_coords, upsilon, witt_add, witt_pair, IndexSet, WittVector};

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Failure {
    pub trial: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn new(name: &str) -> Report {
        Report { name: name.into(), trials: 0, passed: 0, failures: vec![] }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.trials > 0
    }

    fn record(&mut self, trial: usize, outcome: Result<bool>, detail: impl FnOnce() -> String) {
        self.trials += 1;
        match outcome {
            Ok(true) => self.passed += 1,
            Ok(false) => self.failures.push(Failure { trial, detail: detail() }),
            Err(e) => self.failures.push(Failure { trial, detail: format!("{}: {e}; {}", e.kind(), detail()) }),
        }
    }

    pub fn merge(&mut self, o: Report) {
        self.trials += o.trials;
        self.passed += o.passed;
        self.failures
            .extend(o.failures.into_iter().map(|f| Failure { detail: format!("[{}] {}", o.name, f.detail), ..f }));
    }
}

/// `Q[e1, e2] / (e1^2, e2^3)`.
pub fn property_ring() -> Ring {
    Ring::new(RingSpec::rationals().nil("e1", 2).nil("e2", 3)).expect("valid ring")
}

fn show(fs: &[LaurentElt]) -> String {
    let js: Vec<SeriesJson> = fs.iter().map(SeriesJson::from_elt).collect();
    serde_json::to_string(&js).unwrap_or_default()
}

fn tuple(g: &mut Gen, ring: &Ring, n: usize, len: usize) -> Vec<LaurentElt> {
    (0..len)
        .map(|_| {
            let extra = g.int(0, 2) as usize;
            g.invertible(ring, n, 2, extra)
        })
        .collect()
}

/// `cc{.., fg, ..} = cc{.., f, ..} cc{.., g, ..}` in a random slot.
pub fn multilinear(ring: &Ring, n: usize, seed: u64, trials: usize) -> Report {
    let mut g = Gen::new(seed);
    let mut rep = Report::new("multilinear");
    for t in 0..trials {
        let base = tuple(&mut g, ring, n, n + 1);
        let f = tuple(&mut g, ring, n, 1).remove(0);
        let k = g.int(0, n as i64) as usize;
        let outcome = (|| {
            let mut a = base.clone();
            a[k] = base[k].mul(&f)?;
            let mut b = base.clone();
            b[k] = f.clone();
            Ok(cc(&a)? == cc(&base)?.mul(&cc(&b)?)?)
        })();
        rep.record(t, outcome, || {
            format!("slot {k}, tuple {}, factor {}", show(&base), show(std::slice::from_ref(&f)))
        });
    }
    rep
}

/// `cc{..f_i..f_j..} cc{..f_j..f_i..} = 1`.
pub fn antisymmetric(ring: &Ring, n: usize, seed: u64, trials: usize) -> Report {
    let mut g = Gen::new(seed);
    let mut rep = Report::new("antisymmetric");
    for t in 0..trials {
        let a = tuple(&mut g, ring, n, n + 1);
        let i = g.int(0, n as i64 - 1) as usize;
        let j = g.int(i as i64 + 1, n as i64) as usize;
        let outcome = (|| {
            let mut b = a.clone();
            b.swap(i, j);
            Ok(cc(&a)?.mul(&cc(&b)?)?.is_one())
        })();
        rep.record(t, outcome, || format!("swap {i},{j} of {}", show(&a)));
    }
    rep
}

fn steinberg_pair(g: &mut Gen, ring: &Ring, n: usize) -> (LaurentElt, LaurentElt) {
    loop {
        let extra = g.int(0, 2) as usize;
        let f = g.invertible(ring, n, 2, extra);
        let h = LaurentElt::one(ring, n).sub(&f).unwrap();
        if h.is_invertible() {
            return (f, h);
        }
    }
}

/// `cc{f, 1 - f, ...} = 1` with the pair in random slots.
pub fn steinberg(ring: &Ring, n: usize, seed: u64, trials: usize) -> Report {
    let mut g = Gen::new(seed);
    let mut rep = Report::new("steinberg");
    for t in 0..trials {
        let (f, h) = steinberg_pair(&mut g, ring, n);
        let mut a = tuple(&mut g, ring, n, n + 1);
        let i = g.int(0, n as i64 - 1) as usize;
        let j = g.int(i as i64 + 1, n as i64) as usize;
        a[i] = f;
        a[j] = h;
        rep.record(t, cc(&a).map(|v| v.is_one()), || show(&a));
    }
    rep
}

/// `cc{f, -f, ...} = 1`.
pub fn f_minus_f(ring: &Ring, n: usize, seed: u64, trials: usize) -> Report {
    let mut g = Gen::new(seed);
    let mut rep = Report::new("f_minus_f");
    for t in 0..trials {
        let mut a = tuple(&mut g, ring, n, n + 1);
        a[1] = a[0].neg();
        rep.record(t, cc(&a).map(|v| v.is_one()), || show(&a));
    }
    rep
}

/// `det(nu(f_1), ..., nu(f_n)) = res(dlog f_1 ^ ... ^ dlog f_n)`.
pub fn residue_det(ring: &Ring, n: usize, seed: u64, trials: usize) -> Report {
    let mut g = Gen::new(seed);
    let mut rep = Report::new("residue_det");
    for t in 0..trials {
        let fs = tuple(&mut g, ring, n, n);
        let outcome = (|| {
            let d = additive_symbol(&fs)?;
            let r = res_dlog_wedge(&LaurentElt::one(ring, n), &fs)?;
            Ok(r == Coef::from_int(ring, d as i64))
        })();
        rep.record(t, outcome, || show(&fs));
    }
    rep
}

/// `cc{1 + g e, f_1, ..., f_n} = 1 + res(g dlog f_1 ^ ...) e` over `Q[e]/(e^2)`.
pub fn eps_identity(n: usize, seed: u64, trials: usize) -> Report {
    let ring = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
    let q = Ring::rationals();
    let eps = Coef::generator(&ring, "e").unwrap();
    let mut g = Gen::new(seed);
    let mut rep = Report::new("eps_identity");
    for t in 0..trials {
        let gg = g.laurent(&q, n, 2, 3).change_ring(&ring).unwrap();
        let fs: Vec<LaurentElt> = tuple(&mut g, &q, n, n).iter().map(|f| f.change_ring(&ring).unwrap()).collect();
        let outcome = cc_eps_linearization(&gg, &fs, &eps).map(|c| c.holds());
        rep.record(t, outcome, || format!("g {}, f {}", show(std::slice::from_ref(&gg)), show(&fs)));
    }
    rep
}

/// `cc{1 + g_1 h, ..., 1 + g_{n+1} h} = 1 + res(g_1 dg_2 ^ ...) h^{n+1}` over `Q[h]/(h^{n+2})`.
pub fn eta_identity(n: usize, seed: u64, trials: usize) -> Report {
    let ring = Ring::new(RingSpec::rationals().nil("h", n as u32 + 2)).unwrap();
    let q = Ring::rationals();
    let eta = Coef::generator(&ring, "h").unwrap();
    let mut g = Gen::new(seed);
    let mut rep = Report::new("eta_identity");
    for t in 0..trials {
        let gs: Vec<LaurentElt> = (0..=n).map(|_| g.laurent(&q, n, 2, 3).change_ring(&ring).unwrap()).collect();
        let outcome = cc_eta_linearization(&gs, &eta).map(|c| c.holds());
        rep.record(t, outcome, || show(&gs));
    }
    rep
}

fn random_form(g: &mut Gen, ring: &Ring, n: usize, degree: usize) -> DiffForm {
    let mut w = DiffForm::zero(ring, n, degree);
    let idx: Vec<Vec<usize>> = subsets(n, degree);
    for i in idx {
        let f = g.laurent(ring, n, 2, 3);
        let mut basis = DiffForm::function(&f);
        for j in i {
            basis = basis.wedge(&DiffForm::dt(ring, n, j)).unwrap();
        }
        w = w.add(&basis).unwrap();
    }
    w
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for last in (k - 1)..n {
        for mut s in subsets(last, k - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out
}

/// `res(d eta) = 0` for random `(n-1)`-forms, `d d = 0`, and the Leibniz rule.
pub fn forms(ring: &Ring, n: usize, seed: u64, trials: usize) -> Report {
    let mut g = Gen::new(seed);
    let mut rep = Report::new("forms");
    for t in 0..trials {
        let eta = random_form(&mut g, ring, n, n - 1);
        rep.record(t, eta.d().and_then(|w| w.res()).map(|r| r.is_zero()), || format!("res(d eta) for {:?}", eta));
        let f = g.laurent(ring, n, 2, 3);
        let h = g.laurent(ring, n, 2, 3);
        let leibniz = (|| {
            let lhs = DiffForm::function(&f.mul(&h)?).d()?;
            let rhs = DiffForm::function(&h).d()?.scale(&f)?.add(&DiffForm::function(&f).d()?.scale(&h)?)?;
            Ok(lhs == rhs)
        })();
        rep.record(t, leibniz, || format!("Leibniz for {}", show(&[f.clone(), h.clone()])));
        if n >= 2 {
            let w = random_form(&mut g, ring, n, n - 2);
            rep.record(t, w.d().and_then(|x| x.d()).map(|x| x.is_zero()), || format!("d d of {:?}", w));
        }
    }
    rep
}

fn grid(n_entries: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n_entries {
        out = out.into_iter().flat_map(|v| (lo..=hi).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn split(v: &[i64], n: usize) -> Vec<MultiIndex> {
    v.chunks(n).map(|c| MultiIndex(c.to_vec())).collect()
}

/// The two sign formulas agree and the sign is symmetric under swaps, on
/// every pair in `[-r, r]` for `n = 1` or on `samples` random triples in
/// `[-r, r]^2` for `n = 2`; `sgn(l, l, ..) = det(l, ..) mod 2` exhaustively.
pub fn sgn_agreement(n: usize, r: i64, samples: usize, seed: u64) -> Report {
    let mut rep = Report::new("sgn_agreement");
    let mut t = 0;
    let check = |rep: &mut Report, ls: Vec<MultiIndex>, t: &mut usize| {
        let outcome = (|| {
            let a = sgn_vf(&ls)?;
            let mut ok = a == sgn_kh(&ls)?;
            for i in 0..ls.len() {
                for j in i + 1..ls.len() {
                    let mut s = ls.clone();
                    s.swap(i, j);
                    ok &= sgn_vf(&s)? == a;
                }
            }
            Ok(ok)
        })();
        rep.record(*t, outcome, || format!("{ls:?}"));
        *t += 1;
    };
    if n == 1 {
        for v in grid(2, -r, r) {
            check(&mut rep, split(&v, 1), &mut t);
        }
    } else {
        let mut g = Gen::new(seed);
        for _ in 0..samples {
            let v: Vec<i64> = (0..n * (n + 1)).map(|_| g.int(-r, r)).collect();
            check(&mut rep, split(&v, n), &mut t);
        }
    }
    for v in grid(n * n, -r, r) {
        let mut ls = split(&v, n);
        ls.insert(0, ls[0].clone());
        let d = det_columns(&ls[1..].iter().map(|l| l.0.clone()).collect::<Vec<_>>()).rem_euclid(2) as u8;
        rep.record(t, sgn_vf(&ls).map(|s| s == d), || format!("sgn(l, l, ..) for {ls:?}"));
        t += 1;
    }
    rep
}

/// `tame_symbol = cc` for one variable over `Q`.
pub fn tame(seed: u64, trials: usize) -> Report {
    let q = Ring::rationals();
    let mut g = Gen::new(seed);
    let mut rep = Report::new("tame");
    for t in 0..trials {
        let fs = tuple(&mut g, &q, 1, 2);
        let outcome = (|| Ok(tame_symbol(&fs[0], &fs[1])? == cc(&fs)?))();
        rep.record(t, outcome, || show(&fs));
    }
    rep
}

/// Reassembly and `nu(fg) = nu(f) + nu(g)` for `n` cycling through 1, 2, 3.
pub fn decomposition(ring: &Ring, seed: u64, trials: usize) -> Report {
    let mut g = Gen::new(seed);
    let mut rep = Report::new("decomposition");
    for t in 0..trials {
        let n = 1 + t % 3;
        let fs = tuple(&mut g, ring, n, 2);
        let outcome = (|| {
            let (nu, c, u) = unit_part(&fs[0])?;
            let mut round = LaurentElt::monomial(&c, nu).mul(&u)? == fs[0];
            match decompose(&fs[0]) {
                Ok(d) => {
                    round &= d.reassemble()? == fs[0]
                        && d.v_minus.sub(&LaurentElt::one(ring, n))?.all_coefficients_nilpotent()
                }
                Err(Error::StabilityExhausted(_)) if n >= 2 => {}
                Err(e) => return Err(e),
            }
            let additive = fs[0].mul(&fs[1])?.valuation()? == fs[0].valuation()?.add(&fs[1].valuation()?);
            Ok(round && additive)
        })();
        rep.record(t, outcome, || show(&fs));
    }
    rep
}

fn integer_ring() -> Ring {
    Ring::new(RingSpec::integers().nil("e", 2)).unwrap()
}

fn random_witt(g: &mut Gen, ring: &Ring, s: &IndexSet) -> WittVector<Coef> {
    let coords = s.iter().map(|i| (i, if g.chance(0.7) { g.coef(ring) } else { Coef::zero(ring) })).collect();
    WittVector::new(s.clone(), coords).unwrap()
}

fn random_laurent_witt(g: &mut Gen, ring: &Ring, s: &IndexSet) -> WittVector<LaurentElt> {
    let coords = s
        .iter()
        .map(|i| {
            let terms = if i == 1 { 2 } else { g.int(0, 1) as usize };
            (i, g.laurent(ring, 1, 2, terms))
        })
        .collect();
    WittVector::new(s.clone(), coords).unwrap()
}

/// Ghost round trip over `Q`, integrality of Witt addition over `Z[e]`, and
/// the homomorphism property of `Upsilon`.
pub fn witt_arithmetic(seed: u64, trials: usize) -> Report {
    let s = IndexSet::up_to(6);
    let q = Ring::new(RingSpec::rationals().free("a").nil("e", 2)).unwrap();
    let z = integer_ring();
    let mut g = Gen::new(seed);
    let mut rep = Report::new("witt_arithmetic");
    for t in 0..trials {
        let w = random_witt(&mut g, &q, &s);
        let round = (|| Ok(ghost_to_coords(&ghost(&w)?)?.0 == w))();
        rep.record(t, round, || format!("ghost round trip {w:?}"));
        let (a, b) = (random_witt(&mut g, &z, &s), random_witt(&mut g, &z, &s));
        let sum = witt_add(&a, &b);
        let hom = sum.as_ref().map_err(|e| e.clone()).and_then(|sum| {
            let lhs = upsilon(sum, &z, 6)?;
            let mut rhs = upsilon(&a, &z, 6)?.mul(&upsilon(&b, &z, 6)?)?;
            rhs = rhs.truncate(&Window::new(vec![0], vec![6])?)?;
            Ok(lhs.terms() == rhs.terms())
        });
        rep.record(t, sum.map(|_| true), || format!("integral addition {a:?} + {b:?}"));
        rep.record(t, hom, || format!("Upsilon homomorphism {a:?} + {b:?}"));
    }
    rep
}

/// Bilinearity of the Witt pairing, compatibility with projection, and
/// vanishing on the kernel of a projection; `n = 1`, over `Z[e]/(e^2)`.
pub fn witt_bilinear(seed: u64, trials: usize) -> Report {
    let s = IndexSet::up_to(6);
    let sub = IndexSet::new([1, 2, 3]).unwrap();
    let z = integer_ring();
    let mut g = Gen::new(seed);
    let mut rep = Report::new("witt_bilinear");
    for t in 0..trials {
        let fs = tuple(&mut g, &z, 1, 2);
        let (w1, w2) = (random_laurent_witt(&mut g, &z, &s), random_laurent_witt(&mut g, &z, &s));
        let detail = || format!("f {}, g {w1:?}, g' {w2:?}", show(&fs));
        let mult = (|| {
            let lhs = witt_pair(&[fs[0].mul(&fs[1])?], &w1)?.coords;
            let rhs = witt_add(&witt_pair(&fs[..1], &w1)?.coords, &witt_pair(&fs[1..], &w1)?.coords)?;
            Ok(lhs == rhs)
        })();
        rep.record(t, mult, detail);
        let add = (|| {
            let lhs = witt_pair(&fs[..1], &witt_add(&w1, &w2)?)?.coords;
            let rhs = witt_add(&witt_pair(&fs[..1], &w1)?.coords, &witt_pair(&fs[..1], &w2)?.coords)?;
            Ok(lhs == rhs)
        })();
        rep.record(t, add, detail);
        let proj = (|| {
            let p = witt_pair(&fs[..1], &w1)?;
            Ok(p.integral && p.coords.project(&sub)? == witt_pair(&fs[..1], &w1.project(&sub)?)?.coords)
        })();
        rep.record(t, proj, detail);
        let kernel = (|| {
            let mut k = w1.clone();
            for i in sub.iter() {
                k.coords.insert(i, LaurentElt::zero(&z, 1));
            }
            let p = witt_pair(&fs[..1], &k)?.coords;
            Ok(sub.iter().all(|i| p.get(i).is_zero()))
        })();
        rep.record(t, kernel, detail);
    }
    rep
}

/// Integrality, weight zero and constant term of `phi_{n,1..n}` to total
/// degree `degree` on `[-width, width]^n`.
pub fn phi_integrality(n: usize, degree: u32, width: i64) -> Report {
    let mut rep = Report::new("phi_integrality");
    let key = PhiKey::new(n, (1..=n).collect());
    let w = Window::cube(n, -width, width);
    let outcome = key.and_then(|key| phi_coefficients(&key, degree, &w)).map(|s| {
        let (i, z) = (check_integrality(&s), check_weight_zero(&s));
        check_constant_term(&s) && i.pass && z.pass
    });
    rep.record(0, outcome, || format!("phi in {n} variables, degree {degree}, window {w:?}"));
    rep
}

/// `evaluate_phi` over `Z[e1, e2]` against `cc` over the `Q` form of the ring.
pub fn phi_vs_cc(n: usize, seed: u64, trials: usize) -> Report {
    let z = Ring::new(RingSpec::integers().nil("e1", 2).nil("e2", 3)).unwrap();
    let q = Ring::new(z.spec().over_rationals()).unwrap();
    let keys: Vec<Vec<usize>> = if n == 1 { vec![vec![1], vec![]] } else { vec![vec![1, 2], vec![1], vec![2], vec![]] };
    let mut g = Gen::new(seed);
    let mut rep = Report::new("phi_vs_cc");
    for t in 0..trials {
        let key = PhiKey::new(n, g.pick(&keys).clone()).unwrap();
        let gs: Vec<LaurentElt> = (0..key.p())
            .map(|_| {
                let terms = g.int(1, 2) as usize;
                g.nilpotent_laurent(&z, n, 2, terms)
            })
            .collect();
        let outcome = (|| {
            let v = evaluate_phi(&key, &gs)?;
            let one = LaurentElt::one(&q, n);
            let mut tuple: Vec<LaurentElt> = gs.iter().map(|x| one.add(&x.change_ring(&q)?)).collect::<Result<_>>()?;
            tuple.extend(key.j.iter().map(|&j| LaurentElt::var(&q, n, j - 1)));
            Ok(cc(&tuple)?.change_ring(&z)? == v)
        })();
        rep.record(t, outcome, || format!("key {key:?}, g {}", show(&gs)));
    }
    rep
}
