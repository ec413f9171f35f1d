//! Coefficient rings `Base[u...][e...]/(e_i^{d_i})` with exact scalars.
//!
//! Scalars are stored as `BigRational`. Over `Z` and `Z/m` the denominator is
//! always one; modular scalars live in `[0, m)`.

use std::cmp::Ordering as CmpOrdering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = BigRational;
pub(crate) type Mono = Box<[u16]>;

pub fn int(v: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Integers,
    Rationals,
    IntegersMod(u64),
}

/// Description of a coefficient ring.
///
/// `nil_degree` optionally kills every monomial whose total degree in the
/// nilpotent generators exceeds the bound, i.e. it quotients by a power of the
/// ideal they generate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingSpec {
    pub base: Base,
    pub free_gens: Vec<String>,
    pub nil_gens: Vec<(String, u32)>,
    pub nil_degree: Option<u32>,
}

impl RingSpec {
    pub fn new(base: Base) -> Self {
        RingSpec { base, free_gens: vec![], nil_gens: vec![], nil_degree: None }
    }
    pub fn rationals() -> Self {
        Self::new(Base::Rationals)
    }
    pub fn integers() -> Self {
        Self::new(Base::Integers)
    }
    pub fn modular(m: u64) -> Self {
        Self::new(Base::IntegersMod(m))
    }
    pub fn free(mut self, name: &str) -> Self {
        self.free_gens.push(name.to_string());
        self
    }
    pub fn nil(mut self, name: &str, order: u32) -> Self {
        self.nil_gens.push((name.to_string(), order));
        self
    }
    pub fn total_nil_degree(mut self, d: u32) -> Self {
        self.nil_degree = Some(d);
        self
    }
    /// Same generators over `Q`.
    pub fn over_rationals(&self) -> Self {
        RingSpec { base: Base::Rationals, ..self.clone() }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BaseJson {
    Tag(String),
    Mod { r#mod: u64 },
}

#[derive(Serialize, Deserialize)]
struct RingSpecJson {
    base: BaseJson,
    #[serde(default)]
    free: Vec<String>,
    #[serde(default)]
    nil: Vec<(String, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nil_degree: Option<u32>,
}

impl Serialize for RingSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let base = match self.base {
            Base::Integers => BaseJson::Tag("Z".into()),
            Base::Rationals => BaseJson::Tag("Q".into()),
            Base::IntegersMod(m) => BaseJson::Mod { r#mod: m },
        };
        RingSpecJson { base, free: self.free_gens.clone(), nil: self.nil_gens.clone(), nil_degree: self.nil_degree }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RingSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RingSpecJson::deserialize(d)?;
        let base = match j.base {
            BaseJson::Tag(t) if t == "Z" => Base::Integers,
            BaseJson::Tag(t) if t == "Q" => Base::Rationals,
            BaseJson::Tag(t) => return Err(serde::de::Error::custom(format!("unknown base {t:?}"))),
            BaseJson::Mod { r#mod } => Base::IntegersMod(r#mod),
        };
        Ok(RingSpec { base, free_gens: j.free, nil_gens: j.nil, nil_degree: j.nil_degree })
    }
}

static RING_IDS: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
struct RingData {
    id: u64,
    spec: RingSpec,
    names: Vec<String>,
    /// Nilpotency order per generator; 0 marks a free generator.
    orders: Vec<u16>,
    nfree: usize,
    modulus: Option<BigInt>,
    radical: Option<BigInt>,
    prime_power: bool,
    max_nil_degree: u32,
    nil_index: usize,
}

/// Immutable, cheaply clonable ring handle.
#[derive(Clone, Debug)]
pub struct Ring(Arc<RingData>);

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}
impl Eq for Ring {}

fn valid_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn factor_small(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = vec![];
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

impl Ring {
    pub fn new(spec: RingSpec) -> Result<Ring> {
        let mut names: Vec<String> = spec.free_gens.clone();
        names.extend(spec.nil_gens.iter().map(|(n, _)| n.clone()));
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(Error::InvalidArgument(format!("invalid generator name {n:?}")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidArgument(format!("duplicate generator name {n:?}")));
            }
        }
        let mut orders = vec![0u16; spec.free_gens.len()];
        for (n, d) in &spec.nil_gens {
            if *d < 2 {
                return Err(Error::InvalidArgument(format!("nilpotency order of {n} must be at least 2")));
            }
            if *d > u16::MAX as u32 {
                return Err(Error::InvalidArgument(format!("nilpotency order of {n} too large")));
            }
            orders.push(*d as u16);
        }
        if spec.nil_degree == Some(0) {
            return Err(Error::InvalidArgument("nil_degree must be positive".into()));
        }
        let (modulus, radical, prime_power, pexp) = match spec.base {
            Base::IntegersMod(m) => {
                if m < 2 {
                    return Err(Error::InvalidArgument("modulus must be at least 2".into()));
                }
                let f = factor_small(m);
                let rad: u64 = f.iter().map(|(p, _)| *p).product();
                let emax = f.iter().map(|(_, e)| *e).max().unwrap_or(1);
                (Some(BigInt::from(m)), Some(BigInt::from(rad)), f.len() == 1, emax)
            }
            _ => (None, None, true, 1),
        };
        let mut max_nil_degree: u32 = spec.nil_gens.iter().map(|(_, d)| d - 1).sum();
        if let Some(c) = spec.nil_degree {
            max_nil_degree = max_nil_degree.min(c);
        }
        let nil_index = (max_nil_degree + pexp) as usize;
        Ok(Ring(Arc::new(RingData {
            id: RING_IDS.fetch_add(1, Ordering::Relaxed),
            nfree: spec.free_gens.len(),
            spec,
            names,
            orders,
            modulus,
            radical,
            prime_power,
            max_nil_degree,
            nil_index,
        })))
    }

    pub fn rationals() -> Ring {
        Ring::new(RingSpec::rationals()).expect("valid")
    }

    pub fn spec(&self) -> &RingSpec {
        &self.0.spec
    }
    pub fn id(&self) -> u64 {
        self.0.id
    }
    pub fn names(&self) -> &[String] {
        &self.0.names
    }
    pub fn ngens(&self) -> usize {
        self.0.names.len()
    }
    pub fn is_rational(&self) -> bool {
        self.0.spec.base == Base::Rationals
    }
    pub fn modulus(&self) -> Option<&BigInt> {
        self.0.modulus.as_ref()
    }
    /// Smallest `K` with `Nil^K = 0`.
    pub fn nil_index(&self) -> usize {
        self.0.nil_index
    }
    pub fn gen_index(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }
    pub fn is_nil_gen(&self, i: usize) -> bool {
        self.0.orders[i] != 0
    }
    pub fn gen_order(&self, i: usize) -> Option<u32> {
        let o = self.0.orders[i];
        (o != 0).then_some(o as u32)
    }

    pub fn check_same(&self, other: &Ring) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!(
                "operands live in different rings ({:?} vs {:?})",
                self.0.spec, other.0.spec
            )))
        }
    }

    // ---- scalars -------------------------------------------------------

    pub(crate) fn reduce_scalar(&self, q: Scalar) -> Scalar {
        match &self.0.modulus {
            Some(m) => BigRational::from_integer(q.numer().mod_floor(m)),
            None => q,
        }
    }

    /// Brings an arbitrary rational into the base, failing when impossible.
    pub fn scalar(&self, q: &Scalar) -> Result<Scalar> {
        match &self.0.spec.base {
            Base::Rationals => Ok(q.clone()),
            Base::Integers => {
                if q.is_integer() {
                    Ok(q.clone())
                } else {
                    Err(Error::InexactDivision(format!("{q} is not an integer")))
                }
            }
            Base::IntegersMod(_) => {
                let m = self.0.modulus.as_ref().unwrap();
                let inv = mod_inverse(q.denom(), m).ok_or_else(|| {
                    Error::InexactDivision(format!("denominator of {q} is not invertible modulo {m}"))
                })?;
                Ok(BigRational::from_integer((q.numer() * inv).mod_floor(m)))
            }
        }
    }

    fn scalar_is_unit(&self, s: &Scalar) -> bool {
        match &self.0.spec.base {
            Base::Rationals => !s.is_zero(),
            Base::Integers => s.abs().is_one(),
            Base::IntegersMod(_) => s.numer().gcd(self.0.modulus.as_ref().unwrap()).is_one(),
        }
    }

    fn scalar_inverse(&self, s: &Scalar) -> Option<Scalar> {
        match &self.0.spec.base {
            Base::Rationals => (!s.is_zero()).then(|| s.recip()),
            Base::Integers => s.abs().is_one().then(|| s.clone()),
            Base::IntegersMod(_) => {
                let m = self.0.modulus.as_ref().unwrap();
                mod_inverse(s.numer(), m).map(BigRational::from_integer)
            }
        }
    }

    fn scalar_is_nil(&self, s: &Scalar) -> bool {
        match &self.0.radical {
            Some(r) => s.numer().is_multiple_of(r),
            None => s.is_zero(),
        }
    }

    // ---- monomials -----------------------------------------------------

    pub(crate) fn unit_mono(&self) -> Mono {
        vec![0u16; self.ngens()].into()
    }

    pub(crate) fn mono_nil_degree(&self, m: &[u16]) -> u32 {
        m[self.0.nfree..].iter().map(|&e| e as u32).sum()
    }

    fn mono_mul(&self, a: &[u16], b: &[u16]) -> Option<Mono> {
        let d = &self.0;
        let mut out = Vec::with_capacity(a.len());
        let mut deg = 0u32;
        for i in 0..a.len() {
            let e = a[i] + b[i];
            if i >= d.nfree {
                if e >= d.orders[i] {
                    return None;
                }
                deg += e as u32;
            }
            out.push(e);
        }
        if deg > d.max_nil_degree {
            return None;
        }
        Some(out.into())
    }

    // ---- polynomials ---------------------------------------------------

    pub(crate) fn p_const(&self, q: Scalar) -> Poly {
        let q = self.reduce_scalar(q);
        let mut p = Poly::default();
        if !q.is_zero() {
            p.terms.insert(self.unit_mono(), q);
        }
        p
    }

    pub(crate) fn p_one(&self) -> Poly {
        self.p_const(Scalar::one())
    }

    pub(crate) fn p_gen(&self, i: usize) -> Poly {
        let mut m = vec![0u16; self.ngens()];
        m[i] = 1;
        let mut p = Poly::default();
        if let Some(mm) = self.mono_mul(&m, &self.unit_mono()) {
            p.terms.insert(mm, Scalar::one());
        }
        p
    }

    pub(crate) fn p_add_assign(&self, a: &mut Poly, b: &Poly) {
        for (m, c) in &b.terms {
            add_term(self, &mut a.terms, m.clone(), c.clone());
        }
    }

    pub(crate) fn p_add(&self, a: &Poly, b: &Poly) -> Poly {
        let mut r = a.clone();
        self.p_add_assign(&mut r, b);
        r
    }

    pub(crate) fn p_neg(&self, a: &Poly) -> Poly {
        let mut r = Poly::default();
        for (m, c) in &a.terms {
            let v = self.reduce_scalar(-c.clone());
            if !v.is_zero() {
                r.terms.insert(m.clone(), v);
            }
        }
        r
    }

    pub(crate) fn p_sub(&self, a: &Poly, b: &Poly) -> Poly {
        self.p_add(a, &self.p_neg(b))
    }

    pub(crate) fn p_scale(&self, a: &Poly, q: &Scalar) -> Poly {
        let mut r = Poly::default();
        if q.is_zero() {
            return r;
        }
        for (m, c) in &a.terms {
            let v = self.reduce_scalar(c * q);
            if !v.is_zero() {
                r.terms.insert(m.clone(), v);
            }
        }
        r
    }

    pub(crate) fn p_mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut acc = BTreeMap::new();
        self.p_mul_into(&mut acc, a, b);
        Poly { terms: acc }
    }

    /// `acc += a*b`.
    pub(crate) fn p_mul_into(&self, acc: &mut BTreeMap<Mono, Scalar>, a: &Poly, b: &Poly) {
        let (a, b) = if a.terms.len() <= b.terms.len() { (a, b) } else { (b, a) };
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if let Some(m) = self.mono_mul(ma, mb) {
                    add_term(self, acc, m, ca * cb);
                }
            }
        }
    }

    pub(crate) fn p_pow(&self, a: &Poly, e: u32) -> Poly {
        let mut r = self.p_one();
        for _ in 0..e {
            r = self.p_mul(&r, a);
        }
        r
    }

    pub(crate) fn p_constant(&self, a: &Poly) -> Scalar {
        a.terms.get(&self.unit_mono()).cloned().unwrap_or_else(Scalar::zero)
    }

    fn term_is_nil(&self, m: &[u16], c: &Scalar) -> bool {
        m[self.0.nfree..].iter().any(|&e| e > 0) || self.scalar_is_nil(c)
    }

    /// Nilpotency without the connectedness guard.
    pub(crate) fn p_is_nil(&self, a: &Poly) -> bool {
        a.terms.iter().all(|(m, c)| self.term_is_nil(m, c))
    }

    pub(crate) fn p_is_nilpotent(&self, a: &Poly) -> Result<bool> {
        if !self.0.prime_power {
            for (m, c) in &a.terms {
                if !self.term_is_nil(m, c) && !self.scalar_is_unit(c) {
                    return Err(Error::UnsupportedRing(format!(
                        "nilpotency over Z/{} is undecidable for mixed scalar {c}; only prime-power moduli are supported",
                        self.0.modulus.as_ref().unwrap()
                    )));
                }
            }
        }
        Ok(self.p_is_nil(a))
    }

    pub(crate) fn p_is_invertible(&self, a: &Poly) -> bool {
        let c0 = self.p_constant(a);
        if !self.scalar_is_unit(&c0) {
            return false;
        }
        let unit = self.unit_mono();
        a.terms.iter().all(|(m, c)| *m == unit || self.term_is_nil(m, c))
    }

    pub(crate) fn p_inverse(&self, a: &Poly) -> Option<Poly> {
        if !self.p_is_invertible(a) {
            return None;
        }
        let c0 = self.p_constant(a);
        let ci = self.scalar_inverse(&c0)?;
        // a = c0 (1 + n) with n nilpotent
        let mut n = self.p_scale(a, &ci);
        n.terms.remove(&self.unit_mono());
        let mneg = self.p_neg(&n);
        let mut sum = self.p_one();
        let mut pw = self.p_one();
        loop {
            pw = self.p_mul(&pw, &mneg);
            if pw.is_zero() {
                break;
            }
            self.p_add_assign(&mut sum, &pw);
        }
        Some(self.p_scale(&sum, &ci))
    }

    /// Exact division by a positive integer, when possible in the base.
    pub(crate) fn p_div_int(&self, a: &Poly, k: u64) -> Option<Poly> {
        if k == 1 {
            return Some(a.clone());
        }
        let q = ratio(1, k as i64);
        match &self.0.spec.base {
            Base::Rationals => Some(self.p_scale(a, &q)),
            Base::Integers => {
                let kk = BigInt::from(k);
                if a.terms.values().all(|c| c.numer().is_multiple_of(&kk)) {
                    Some(self.p_scale(a, &q))
                } else {
                    None
                }
            }
            Base::IntegersMod(_) => {
                let inv = mod_inverse(&BigInt::from(k), self.0.modulus.as_ref().unwrap())?;
                Some(self.p_scale(a, &BigRational::from_integer(inv)))
            }
        }
    }

    fn homogeneous_parts(&self, a: &Poly) -> Vec<Poly> {
        let mut parts = vec![Poly::default(); self.0.max_nil_degree as usize + 1];
        for (m, c) in &a.terms {
            let d = self.mono_nil_degree(m) as usize;
            parts[d].terms.insert(m.clone(), c.clone());
        }
        parts
    }

    fn require_q(&self, what: &str) -> Result<()> {
        if self.is_rational() {
            Ok(())
        } else {
            Err(Error::UnsupportedRing(format!("{what} requires a base containing Q")))
        }
    }

    /// `exp` of a nilpotent element, via the Euler-operator recursion
    /// `d E_d = sum_k k x_k E_{d-k}` on nil-degree components.
    pub(crate) fn p_exp(&self, x: &Poly) -> Result<Poly> {
        self.require_q("exp")?;
        if !self.p_is_nil(x) {
            return Err(Error::NotSharp("exp of a non-nilpotent coefficient".into()));
        }
        let xs = self.homogeneous_parts(x);
        let dmax = xs.len() - 1;
        let mut es: Vec<Poly> = vec![self.p_one()];
        for d in 1..=dmax {
            let mut acc = BTreeMap::new();
            for k in 1..=d {
                if xs[k].is_zero() || es[d - k].is_zero() {
                    continue;
                }
                let xk = self.p_scale(&xs[k], &int(k as i64));
                self.p_mul_into(&mut acc, &xk, &es[d - k]);
            }
            es.push(self.p_scale(&Poly { terms: acc }, &ratio(1, d as i64)));
        }
        let mut out = Poly::default();
        for e in &es {
            self.p_add_assign(&mut out, e);
        }
        Ok(out)
    }

    /// `log` of an element of `1 + Nil`.
    pub(crate) fn p_log(&self, y: &Poly) -> Result<Poly> {
        self.require_q("log")?;
        let x = self.p_sub(y, &self.p_one());
        if !self.p_is_nil(&x) {
            return Err(Error::NotSharp("log of a coefficient outside 1 + Nil".into()));
        }
        let xs = self.homogeneous_parts(&x);
        let dmax = xs.len() - 1;
        let mut ls: Vec<Poly> = vec![Poly::default()];
        for d in 1..=dmax {
            let mut acc = BTreeMap::new();
            for k in 1..d {
                if xs[k].is_zero() || ls[d - k].is_zero() {
                    continue;
                }
                let lk = self.p_scale(&ls[d - k], &int((d - k) as i64));
                self.p_mul_into(&mut acc, &xs[k], &lk);
            }
            let corr = self.p_scale(&Poly { terms: acc }, &ratio(1, d as i64));
            ls.push(self.p_sub(&xs[d], &corr));
        }
        let mut out = Poly::default();
        for l in &ls {
            self.p_add_assign(&mut out, l);
        }
        Ok(out)
    }

    /// Applies a ring map given by images of the generators, with scalars
    /// converted into the target base.
    pub(crate) fn p_substitute(&self, a: &Poly, target: &Ring, images: &[Poly]) -> Result<Poly> {
        let mut out = Poly::default();
        for (m, c) in &a.terms {
            let s = target.scalar(c)?;
            let mut t = target.p_const(s);
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = target.p_mul(&t, &target.p_pow(&images[i], e as u32));
                }
            }
            target.p_add_assign(&mut out, &t);
        }
        Ok(out)
    }

    // ---- printing and parsing -----------------------------------------

    pub(crate) fn p_to_string(&self, a: &Poly) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let mut order: Vec<usize> = (0..self.ngens()).collect();
        order.sort_by(|&i, &j| self.0.names[i].cmp(&self.0.names[j]));
        let mut terms: Vec<(&Mono, &Scalar)> = a.terms.iter().collect();
        terms.sort_by(|(ma, _), (mb, _)| {
            let da: u32 = ma.iter().map(|&e| e as u32).sum();
            let db: u32 = mb.iter().map(|&e| e as u32).sum();
            db.cmp(&da).then_with(|| {
                let ka: Vec<u16> = order.iter().map(|&i| ma[i]).collect();
                let kb: Vec<u16> = order.iter().map(|&i| mb[i]).collect();
                kb.cmp(&ka)
            })
        });
        let mut s = String::new();
        for (k, (m, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let factors: Vec<String> =
                order.iter().filter(|&&i| m[i] > 0).map(|&i| format!("{}^{}", self.0.names[i], m[i])).collect();
            if factors.is_empty() {
                s.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    s.push_str(&mag.to_string());
                    s.push('*');
                }
                s.push_str(&factors.join("*"));
            }
        }
        s
    }

    pub(crate) fn p_parse(&self, text: &str) -> Result<Poly> {
        let err = |msg: &str| Error::Parse(format!("cannot parse coefficient {text:?}: {msg}"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty"));
        }
        let mut pieces: Vec<(bool, String)> = vec![];
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && !(i > 0 && cur.ends_with('^')) {
                if i > 0 {
                    if cur.is_empty() {
                        return Err(err("dangling sign"));
                    }
                    pieces.push((neg, std::mem::take(&mut cur)));
                }
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        if cur.is_empty() {
            return Err(err("dangling sign"));
        }
        pieces.push((neg, cur));
        let mut out = Poly::default();
        for (neg, piece) in pieces {
            let mut coef = Scalar::one();
            let mut mono = vec![0u32; self.ngens()];
            for f in piece.split('*') {
                if f.is_empty() {
                    return Err(err("empty factor"));
                }
                if f.chars().next().unwrap().is_ascii_digit() {
                    coef *= parse_rational(f).ok_or_else(|| err("bad number"))?;
                } else {
                    let (name, e) = match f.split_once('^') {
                        Some((n, e)) => (n, e.parse::<u32>().map_err(|_| err("bad exponent"))?),
                        None => (f, 1),
                    };
                    let i = self.gen_index(name).ok_or_else(|| err(&format!("unknown generator {name}")))?;
                    mono[i] += e;
                }
            }
            if neg {
                coef = -coef;
            }
            let coef = self.scalar(&coef)?;
            let mut t = self.p_const(coef);
            for (i, &e) in mono.iter().enumerate() {
                if e > 0 {
                    t = self.p_mul(&t, &self.p_pow(&self.p_gen(i), e));
                }
            }
            self.p_add_assign(&mut out, &t);
        }
        Ok(out)
    }
}

fn add_term(ring: &Ring, acc: &mut BTreeMap<Mono, Scalar>, m: Mono, c: Scalar) {
    use std::collections::btree_map::Entry;
    match acc.entry(m) {
        Entry::Vacant(v) => {
            let c = ring.reduce_scalar(c);
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            let s = ring.reduce_scalar(o.get() + c);
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

pub(crate) fn parse_rational(s: &str) -> Option<Scalar> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().ok()?;
            let q: BigInt = q.parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Raw sparse polynomial; meaningful only together with its ring.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Poly {
    pub(crate) terms: BTreeMap<Mono, Scalar>,
}

impl Poly {
    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// An element of a coefficient ring.
#[derive(Clone, Debug)]
pub struct Coef {
    pub(crate) ring: Ring,
    pub(crate) poly: Poly,
}

impl PartialEq for Coef {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.poly == other.poly
    }
}
impl Eq for Coef {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Neg,
}

pub fn arith(op: ArithOp, x: &Coef, y: &Coef) -> Result<Coef> {
    match op {
        ArithOp::Add => x.add(y),
        ArithOp::Sub => x.sub(y),
        ArithOp::Mul => x.mul(y),
        ArithOp::Neg => Ok(x.neg()),
    }
}

impl Coef {
    pub(crate) fn from_poly(ring: &Ring, poly: Poly) -> Coef {
        Coef { ring: ring.clone(), poly }
    }
    pub fn zero(ring: &Ring) -> Coef {
        Coef::from_poly(ring, Poly::default())
    }
    pub fn one(ring: &Ring) -> Coef {
        Coef::from_poly(ring, ring.p_one())
    }
    pub fn from_int(ring: &Ring, v: i64) -> Coef {
        Coef::from_poly(ring, ring.p_const(int(v)))
    }
    pub fn from_scalar(ring: &Ring, q: &Scalar) -> Result<Coef> {
        Ok(Coef::from_poly(ring, ring.p_const(ring.scalar(q)?)))
    }
    pub fn generator(ring: &Ring, name: &str) -> Result<Coef> {
        let i = ring.gen_index(name).ok_or_else(|| Error::InvalidArgument(format!("unknown generator {name}")))?;
        Ok(Coef::from_poly(ring, ring.p_gen(i)))
    }
    pub fn parse(ring: &Ring, s: &str) -> Result<Coef> {
        Ok(Coef::from_poly(ring, ring.p_parse(s)?))
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.poly == self.ring.p_one()
    }
    pub fn num_terms(&self) -> usize {
        self.poly.terms.len()
    }
    pub fn constant_term(&self) -> Scalar {
        self.ring.p_constant(&self.poly)
    }
    /// The nonzero terms as `(exponents, scalar)`; exponents follow `ring.names()`.
    pub fn terms(&self) -> Vec<(Vec<u32>, Scalar)> {
        self.poly.terms.iter().map(|(m, c)| (m.iter().map(|&e| e as u32).collect(), c.clone())).collect()
    }

    pub fn add(&self, o: &Coef) -> Result<Coef> {
        self.ring.check_same(&o.ring)?;
        Ok(Coef::from_poly(&self.ring, self.ring.p_add(&self.poly, &o.poly)))
    }
    pub fn sub(&self, o: &Coef) -> Result<Coef> {
        self.ring.check_same(&o.ring)?;
        Ok(Coef::from_poly(&self.ring, self.ring.p_sub(&self.poly, &o.poly)))
    }
    pub fn mul(&self, o: &Coef) -> Result<Coef> {
        self.ring.check_same(&o.ring)?;
        Ok(Coef::from_poly(&self.ring, self.ring.p_mul(&self.poly, &o.poly)))
    }
    pub fn neg(&self) -> Coef {
        Coef::from_poly(&self.ring, self.ring.p_neg(&self.poly))
    }
    pub fn scale(&self, q: &Scalar) -> Result<Coef> {
        let q = self.ring.scalar(q)?;
        Ok(Coef::from_poly(&self.ring, self.ring.p_scale(&self.poly, &q)))
    }
    pub fn pow(&self, e: u32) -> Coef {
        Coef::from_poly(&self.ring, self.ring.p_pow(&self.poly, e))
    }
    /// Integer power; negative exponents require invertibility.
    pub fn powi(&self, e: i64) -> Result<Coef> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            Ok(self.inverse()?.pow((-e) as u32))
        }
    }

    pub fn is_nilpotent(&self) -> Result<bool> {
        self.ring.p_is_nilpotent(&self.poly)
    }

    /// Smallest `e` with `x^e = 0`, if `x` is nilpotent.
    pub fn nil_order(&self) -> Result<Option<usize>> {
        if !self.is_nilpotent()? {
            return Ok(None);
        }
        let mut p = self.ring.p_one();
        for e in 1..=self.ring.nil_index().max(1) {
            p = self.ring.p_mul(&p, &self.poly);
            if p.is_zero() {
                return Ok(Some(e));
            }
        }
        Err(Error::InternalConsistency("nilpotent element survived past the nilpotency index".into()))
    }

    pub fn is_invertible(&self) -> bool {
        self.ring.p_is_invertible(&self.poly)
    }

    pub fn inverse(&self) -> Result<Coef> {
        self.ring
            .p_inverse(&self.poly)
            .map(|p| Coef::from_poly(&self.ring, p))
            .ok_or_else(|| Error::NotInvertible(format!("{self} is not a unit")))
    }

    pub fn div_int(&self, k: u64) -> Result<Coef> {
        self.ring
            .p_div_int(&self.poly, k)
            .map(|p| Coef::from_poly(&self.ring, p))
            .ok_or_else(|| Error::InexactDivision(format!("{self} is not divisible by {k}")))
    }

    pub fn exp(&self) -> Result<Coef> {
        Ok(Coef::from_poly(&self.ring, self.ring.p_exp(&self.poly)?))
    }

    pub fn log(&self) -> Result<Coef> {
        Ok(Coef::from_poly(&self.ring, self.ring.p_log(&self.poly)?))
    }

    /// Image under the ring map sending generator `i` to `images[i]`.
    pub fn substitute(&self, target: &Ring, images: &[Coef]) -> Result<Coef> {
        if images.len() != self.ring.ngens() {
            return Err(Error::InvalidArgument("wrong number of generator images".into()));
        }
        for im in images {
            target.check_same(&im.ring)?;
        }
        let ims: Vec<Poly> = images.iter().map(|c| c.poly.clone()).collect();
        Ok(Coef::from_poly(target, self.ring.p_substitute(&self.poly, target, &ims)?))
    }

    /// Moves the element into a ring with the same generator names.
    pub fn change_ring(&self, target: &Ring) -> Result<Coef> {
        let images = self.ring.names().iter().map(|n| Coef::generator(target, n)).collect::<Result<Vec<_>>>()?;
        self.substitute(target, &images)
    }

    /// The integer value of a constant element, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.poly.terms.keys().any(|m| m.iter().any(|&e| e > 0)) {
            return None;
        }
        let c = self.constant_term();
        c.is_integer().then(|| c.to_integer())
    }

    pub fn as_i64(&self) -> Option<i64> {
        self.as_integer().and_then(|v| v.to_i64())
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ring.p_to_string(&self.poly))
    }
}

impl PartialOrd for Coef {
    fn partial_cmp(&self, other: &Self) -> Option<CmpOrdering> {
        Some(self.cmp(other))
    }
}
impl Ord for Coef {
    fn cmp(&self, other: &Self) -> CmpOrdering {
        self.poly.cmp(&other.poly)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps_ring() -> Ring {
        Ring::new(RingSpec::integers().nil("e", 2)).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Ring::new(RingSpec::rationals().nil("e", 2).free("e")).is_err());
        assert!(Ring::new(RingSpec::rationals().nil("e", 1)).is_err());
    }

    #[test]
    fn eps_squared_vanishes() {
        let r = eps_ring();
        let e = Coef::generator(&r, "e").unwrap();
        assert!(e.mul(&e).unwrap().is_zero());
        assert_eq!(e.nil_order().unwrap(), Some(2));
        assert!(!Coef::parse(&r, "1+e").unwrap().is_nilpotent().unwrap());
    }

    #[test]
    fn eta_power_vanishes() {
        let r = Ring::new(RingSpec::integers().nil("h", 3)).unwrap();
        let h = Coef::generator(&r, "h").unwrap();
        assert!(h.pow(2).mul(&h).unwrap().is_zero());
    }

    #[test]
    fn rational_addition() {
        let q = Ring::rationals();
        let a = Coef::parse(&q, "1/2").unwrap();
        let b = Coef::parse(&q, "1/3").unwrap();
        assert_eq!(a.add(&b).unwrap().to_string(), "5/6");
    }

    #[test]
    fn modular_nilpotents() {
        let r = Ring::new(RingSpec::modular(4)).unwrap();
        let two = Coef::from_int(&r, 2);
        assert!(two.is_nilpotent().unwrap());
        assert_eq!(two.nil_order().unwrap(), Some(2));
        assert_eq!(r.nil_index(), 2);
        let six = Ring::new(RingSpec::modular(6)).unwrap();
        assert!(Coef::from_int(&six, 2).is_nilpotent().is_err());
        assert!(!Coef::from_int(&six, 5).is_nilpotent().unwrap());
    }

    #[test]
    fn inverses() {
        let r = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        let x = Coef::parse(&r, "1+e").unwrap();
        assert_eq!(x.inverse().unwrap(), Coef::parse(&r, "1-e").unwrap());
        let q = Ring::rationals();
        assert!(Coef::from_int(&q, 2).is_invertible());
        assert!(!Coef::from_int(&Ring::new(RingSpec::integers()).unwrap(), 2).is_invertible());
        let ru = Ring::new(RingSpec::rationals().free("u").nil("e", 3)).unwrap();
        let y = Coef::parse(&ru, "1 - u*e").unwrap();
        assert_eq!(y.inverse().unwrap(), Coef::parse(&ru, "1 + u*e + u^2*e^2").unwrap());
        assert!(!Coef::parse(&ru, "1 + u").unwrap().is_invertible());
    }

    #[test]
    fn nil_indices() {
        assert_eq!(Ring::new(RingSpec::rationals().nil("e", 2)).unwrap().nil_index(), 2);
        assert_eq!(Ring::new(RingSpec::integers().nil("a", 2).nil("b", 3)).unwrap().nil_index(), 4);
        assert_eq!(Ring::rationals().nil_index(), 1);
        assert_eq!(Ring::new(RingSpec::modular(8).nil("e", 2)).unwrap().nil_index(), 4);
    }

    #[test]
    fn exp_log() {
        let r = Ring::new(RingSpec::rationals().nil("a", 3).nil("b", 3)).unwrap();
        let e = Coef::generator(&r, "a").unwrap();
        assert_eq!(Coef::zero(&r).exp().unwrap(), Coef::one(&r));
        let r2 = Ring::new(RingSpec::rationals().nil("e", 2)).unwrap();
        assert_eq!(Coef::generator(&r2, "e").unwrap().exp().unwrap().to_string(), "e^1 + 1");
        let x = Coef::parse(&r, "a + b").unwrap();
        assert_eq!(x.exp().unwrap().log().unwrap(), x);
        assert!(e.add(&Coef::one(&r)).unwrap().exp().is_err());
        assert!(Coef::generator(&eps_ring(), "e").unwrap().exp().is_err());
    }

    #[test]
    fn printing_round_trip() {
        let r = Ring::new(RingSpec::rationals().free("u").nil("e", 2)).unwrap();
        let x = Coef::parse(&r, "3/2*e^1*u^2 + 1").unwrap();
        assert_eq!(x.to_string(), "3/2*e^1*u^2 + 1");
        let y = Coef::parse(&r, "-u - 2/3*e + 4").unwrap();
        assert_eq!(Coef::parse(&r, &y.to_string()).unwrap(), y);
        let m = Ring::new(RingSpec::modular(5)).unwrap();
        assert_eq!(Coef::parse(&m, "1/2").unwrap().to_string(), "3");
    }

    #[test]
    fn spec_json() {
        let s: RingSpec = serde_json::from_str(r#"{"base":{"mod":9},"free":["u"],"nil":[["e",2]]}"#).unwrap();
        assert_eq!(s, RingSpec::modular(9).free("u").nil("e", 2));
        let t = serde_json::to_string(&RingSpec::rationals().nil("e", 2)).unwrap();
        assert_eq!(t, r#"{"base":"Q","free":[],"nil":[["e",2]]}"#);
    }
}
