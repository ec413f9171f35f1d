//! Named verification suites, looked up by the `check` command.

use crate::verify::{self, property_ring, Report};

#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    /// Total degree for the universal series.
    pub degree: u32,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams { n: 1, seed: 0, trials: 50, degree: 4 }
    }
}

pub trait CheckSuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    /// Largest supported `n`.
    fn max_n(&self) -> usize {
        3
    }
    fn run(&self, p: &SuiteParams) -> Report;
}

macro_rules! suite {
    ($ty:ident, $name:literal, $desc:literal, $max:expr, |$p:ident| $body:expr) => {
        pub struct $ty;
        impl CheckSuite for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn describe(&self) -> &'static str {
                $desc
            }
            fn max_n(&self) -> usize {
                $max
            }
            fn run(&self, $p: &SuiteParams) -> Report {
                $body
            }
        }
    };
}

fn merged(name: &str, parts: Vec<Report>) -> Report {
    let mut r = Report::new(name);
    parts.into_iter().for_each(|p| r.merge(p));
    r
}

suite!(Multilinear, "multilinear", "cc is multiplicative in each slot", 3, |p| {
    verify::multilinear(&property_ring(), p.n, p.seed, p.trials)
});

suite!(Antisymmetric, "antisymmetric", "swapping two slots inverts cc; cc{f, -f, ..} = 1", 3, |p| {
    let r = property_ring();
    merged(
        "antisymmetric",
        vec![verify::antisymmetric(&r, p.n, p.seed, p.trials), verify::f_minus_f(&r, p.n, p.seed, p.trials)],
    )
});

suite!(Steinberg, "steinberg", "cc{f, 1 - f, ..} = 1", 3, |p| {
    verify::steinberg(&property_ring(), p.n, p.seed, p.trials)
});

suite!(ResidueDet, "residue_det", "det of valuations equals res of the dlog wedge", 3, |p| {
    verify::residue_det(&property_ring(), p.n, p.seed, p.trials)
});

suite!(EpsIdentities, "eps_identities", "first-order and top-order tangent formulas for cc", 2, |p| {
    merged(
        "eps_identities",
        vec![verify::eps_identity(p.n, p.seed, p.trials), verify::eta_identity(p.n, p.seed, p.trials)],
    )
});

suite!(WittBilinear, "witt_bilinear", "Witt arithmetic and bilinearity of the Witt pairing (n = 1)", 1, |p| {
    merged("witt_bilinear", vec![verify::witt_arithmetic(p.seed, p.trials), verify::witt_bilinear(p.seed, p.trials)])
});

suite!(PhiIntegrality, "phi_integrality", "integrality and weight zero of phi; evaluate_phi = cc", 2, |p| {
    let width = if p.n == 1 { p.degree as i64 } else { 2 };
    merged(
        "phi_integrality",
        vec![verify::phi_integrality(p.n, p.degree, width), verify::phi_vs_cc(p.n, p.seed, p.trials)],
    )
});

suite!(SgnAgreement, "sgn_agreement", "the two sign formulas agree (n = 1 exhaustive, n = 2 sampled)", 2, |p| {
    let r = if p.n == 1 { 3 } else { 2 };
    verify::sgn_agreement(p.n, r, p.trials, p.seed)
});

suite!(Forms, "forms", "res(d eta) = 0, d d = 0 and the Leibniz rule", 3, |p| {
    verify::forms(&property_ring(), p.n, p.seed, p.trials)
});

suite!(Tame, "tame", "tame_symbol = cc over Q (n = 1)", 1, |p| verify::tame(p.seed, p.trials));

suite!(Decomposition, "decomposition", "unit decomposition round trip and additivity of nu (n cycles 1..3)", 3, |p| {
    verify::decomposition(&property_ring(), p.seed, p.trials)
});

pub fn suites() -> Vec<Box<dyn CheckSuite>> {
    vec![
        Box::new(Multilinear),
        Box::new(Antisymmetric),
        Box::new(Steinberg),
        Box::new(ResidueDet),
        Box::new(EpsIdentities),
        Box::new(WittBilinear),
        Box::new(PhiIntegrality),
        Box::new(SgnAgreement),
        Box::new(Forms),
        Box::new(Tame),
        Box::new(Decomposition),
    ]
}

pub fn suite(name: &str) -> Option<Box<dyn CheckSuite>> {
    suites().into_iter().find(|s| s.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let names: Vec<_> = suites().iter().map(|s| s.name()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(suite("steinberg").is_some() && suite("nope").is_none());
    }

    #[test]
    fn deterministic_reports() {
        let p = SuiteParams { n: 2, seed: 3, trials: 4, degree: 2 };
        let s = suite("multilinear").unwrap();
        assert_eq!(s.run(&p), s.run(&p));
        assert!(s.run(&p).ok());
    }
}
