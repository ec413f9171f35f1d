//! `ccsym`: reads one JSON request, writes one JSON response.
//!
//! Exit status is 0 on success, 2 on a domain error (non-invertible input,
//! unstable truncation, unsupported ring, ...) and 1 on malformed input.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use ccsym::coeff::{Coef, Ring, RingSpec};
use ccsym::forms::{dlog_wedge_factors, res_dlog_wedge, res_log_dlog, FormJson};
use ccsym::index::MultiIndex;
use ccsym::laurent::{decompose, stable_coefficient, LaurentElt, SeriesExpr, SeriesJson, Window, DEFAULT_DOUBLINGS};
use ccsym::sign::sign_rule;
use ccsym::suites::{suite, suites, SuiteParams};
use ccsym::symbol::{additive_symbol, cc_traced, tame_symbol};
use ccsym::universal::{
    check_constant_term, check_integrality, check_weight_zero, evaluate_phi, phi_coefficients, PhiKey,
};
use ccsym::witt::{witt_pair, IndexSet, WittVector};
use ccsym::Error;
use clap::Parser;
use serde::Deserialize;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "ccsym",
    version,
    about = "Exact higher Contou-Carrere symbols, residues, Witt pairings and universal series"
)]
struct Cli {
    /// Read the request from this file instead of standard input
    #[arg(long)]
    file: Option<PathBuf>,
    /// Seed for randomized check suites
    #[arg(long)]
    seed: Option<u64>,
    /// Number of trials for randomized check suites
    #[arg(long)]
    trials: Option<usize>,
    /// Doubling budget of the window stability protocol
    #[arg(long, default_value_t = DEFAULT_DOUBLINGS)]
    window_doublings: u32,
    /// Total degree for the universal series
    #[arg(long)]
    degree: Option<u32>,
    /// Indent the JSON output
    #[arg(long)]
    json_pretty: bool,
}

#[derive(Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
enum Request {
    Cc {
        ring: Option<RingSpec>,
        n: Option<usize>,
        tuple: Vec<SeriesJson>,
        sign_rule: Option<String>,
    },
    Nu {
        ring: Option<RingSpec>,
        n: Option<usize>,
        tuple: Vec<SeriesJson>,
    },
    Res {
        ring: Option<RingSpec>,
        n: Option<usize>,
        form: Option<FormJson>,
        g: Option<SeriesJson>,
        log: Option<SeriesJson>,
        dlog: Option<Vec<SeriesJson>>,
        window: Option<Window>,
    },
    Decompose {
        ring: Option<RingSpec>,
        n: Option<usize>,
        f: SeriesJson,
    },
    Tame {
        ring: Option<RingSpec>,
        f: SeriesJson,
        g: SeriesJson,
    },
    WittPair {
        ring: Option<RingSpec>,
        n: Option<usize>,
        #[serde(rename = "S")]
        s: Vec<u32>,
        f: Vec<SeriesJson>,
        g: BTreeMap<String, SeriesJson>,
    },
    Phi {
        ring: Option<RingSpec>,
        n: usize,
        #[serde(default)]
        j: Vec<usize>,
        degree: Option<u32>,
        window: Option<Window>,
        g: Option<Vec<SeriesJson>>,
    },
    Check {
        suite: String,
        n: Option<usize>,
        seed: Option<u64>,
        trials: Option<usize>,
        degree: Option<u32>,
    },
}

type Outcome = std::result::Result<Map<String, Value>, Error>;

fn ring_of(spec: Option<RingSpec>) -> ccsym::Result<Ring> {
    match spec {
        Some(s) => Ring::new(s),
        None => Ok(Ring::rationals()),
    }
}

fn series(ring: &Ring, n: Option<usize>, js: &[SeriesJson]) -> ccsym::Result<Vec<LaurentElt>> {
    js.iter()
        .map(|s| {
            if n.is_some_and(|n| n != s.n) {
                return Err(Error::Parse(format!("series has n = {} but the request has n = {}", s.n, n.unwrap())));
            }
            s.to_elt(ring)
        })
        .collect()
}

fn window(w: Window) -> ccsym::Result<Window> {
    Window::new(w.lo, w.hi)
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("responses are objects"),
    }
}

fn int_value(v: i128) -> Value {
    match i64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

fn run(req: Request, cli: &Cli) -> Outcome {
    match req {
        Request::Cc { ring, n, tuple, sign_rule: rule } => {
            let ring = ring_of(ring)?;
            let fs = series(&ring, n, &tuple)?;
            let rule = sign_rule(rule.as_deref().unwrap_or("vf"))?;
            let r = cc_traced(&fs, rule.as_ref())?;
            Ok(obj(json!({ "value": r.value.to_string(), "sign_rule": rule.name(), "branch_trace": r.trace })))
        }
        Request::Nu { ring, n, tuple } => {
            let ring = ring_of(ring)?;
            let fs = series(&ring, n, &tuple)?;
            Ok(obj(json!({ "value": int_value(additive_symbol(&fs)?) })))
        }
        Request::Res { ring, n, form, g, log, dlog, window: w } => {
            let ring = ring_of(ring)?;
            if let Some(form) = form {
                if g.is_some() || log.is_some() || dlog.is_some() {
                    return Err(Error::Parse("give either \"form\" or \"dlog\" with \"g\"/\"log\", not both".into()));
                }
                let form = form.to_form(&ring)?;
                return Ok(obj(json!({ "value": form.res()?.to_string() })));
            }
            let fs = series(&ring, n, &dlog.ok_or_else(|| Error::Parse("res needs \"form\" or \"dlog\"".into()))?)?;
            let n = fs.first().map(|f| f.n()).ok_or_else(|| Error::Parse("\"dlog\" is empty".into()))?;
            match (g, log) {
                (Some(_), Some(_)) => Err(Error::Parse("give \"g\" or \"log\", not both".into())),
                (g, Some(f1)) => {
                    if w.is_some() || g.is_some() {
                        return Err(Error::Parse("\"log\" takes neither \"g\" nor \"window\"".into()));
                    }
                    let f1 = series(&ring, Some(n), &[f1])?.remove(0);
                    Ok(obj(json!({ "value": res_log_dlog(&f1, &fs)?.to_string() })))
                }
                (g, None) => {
                    let g = match g {
                        Some(g) => series(&ring, Some(n), &[g])?.remove(0),
                        None => LaurentElt::one(&ring, n),
                    };
                    match w {
                        None => Ok(obj(json!({ "value": res_dlog_wedge(&g, &fs)?.to_string(), "certified": true }))),
                        Some(w) => {
                            let mut factors = dlog_wedge_factors(&fs)?;
                            factors.push(SeriesExpr::Exact(g));
                            let v = stable_coefficient(
                                &SeriesExpr::Mul(factors),
                                &MultiIndex::splat(n, -1),
                                &window(w)?,
                                cli.window_doublings,
                            )?;
                            Ok(obj(json!({
                                "value": v.value.to_string(),
                                "certified": v.certified,
                                "doublings": v.doublings,
                            })))
                        }
                    }
                }
            }
        }
        Request::Decompose { ring, n, f } => {
            let ring = ring_of(ring)?;
            let f = series(&ring, n, &[f])?.remove(0);
            let d = decompose(&f)?;
            Ok(obj(json!({
                "nu": d.nu.0,
                "c": d.c.to_string(),
                "v_plus": SeriesJson::from_elt(&d.v_plus),
                "v_minus": SeriesJson::from_elt(&d.v_minus),
            })))
        }
        Request::Tame { ring, f, g } => {
            let ring = ring_of(ring)?;
            let fs = series(&ring, Some(1), &[f, g])?;
            Ok(obj(json!({ "value": tame_symbol(&fs[0], &fs[1])?.to_string() })))
        }
        Request::WittPair { ring, n, s, f, g } => {
            let ring = ring_of(ring)?;
            let fs = series(&ring, n, &f)?;
            let n = fs.first().map(|f| f.n()).ok_or_else(|| Error::Parse("\"f\" is empty".into()))?;
            let set = IndexSet::new(s)?;
            let mut coords = BTreeMap::new();
            for (k, v) in &g {
                let i: u32 =
                    k.parse().map_err(|_| Error::Parse(format!("Witt index {k:?} is not a positive integer")))?;
                coords.insert(i, series(&ring, Some(n), std::slice::from_ref(v))?.remove(0));
            }
            for i in set.iter() {
                coords.entry(i).or_insert_with(|| LaurentElt::zero(&ring, n));
            }
            let p = witt_pair(&fs, &WittVector::new(set, coords)?)?;
            let show = |w: &WittVector<Coef>| -> Map<String, Value> {
                w.coords.iter().map(|(i, c)| (i.to_string(), json!(c.to_string()))).collect()
            };
            Ok(obj(json!({ "coords": show(&p.coords), "ghost": show(&p.ghost), "integral": p.integral })))
        }
        Request::Phi { ring, n, j, degree, window: w, g } => {
            let key = PhiKey::new(n, j)?;
            if let Some(g) = g {
                if w.is_some() || degree.is_some() {
                    return Err(Error::Parse("evaluation takes neither \"degree\" nor \"window\"".into()));
                }
                let ring = ring_of(ring)?;
                let gs = series(&ring, Some(n), &g)?;
                return Ok(obj(json!({ "value": evaluate_phi(&key, &gs)?.to_string() })));
            }
            let degree = cli.degree.or(degree).ok_or_else(|| Error::Parse("phi needs \"degree\"".into()))?;
            let w = window(w.ok_or_else(|| Error::Parse("phi needs \"window\"".into()))?)?;
            let s = phi_coefficients(&key, degree, &w)?;
            let terms: Vec<Value> = s
                .terms
                .iter()
                .map(|t| {
                    let m: Vec<Value> =
                        t.monomial.iter().map(|(i, l, e)| json!({ "slot": i, "l": l, "exp": e })).collect();
                    json!({ "monomial": m, "value": t.value.to_string() })
                })
                .collect();
            let (integral, weight) = (check_integrality(&s), check_weight_zero(&s));
            let violations = [integral.violations, weight.violations].concat();
            Ok(obj(json!({
                "terms": terms,
                "integral": integral.pass,
                "weight_zero": weight.pass,
                "constant_term_one": check_constant_term(&s),
                "violations": violations,
            })))
        }
        Request::Check { suite: name, n, seed, trials, degree } => {
            let s = suite(&name).ok_or_else(|| {
                let names: Vec<&str> = suites().iter().map(|s| s.name()).collect();
                Error::Parse(format!("unknown suite {name:?}; available: {}", names.join(", ")))
            })?;
            let p = SuiteParams {
                n: n.unwrap_or(1),
                seed: cli.seed.or(seed).unwrap_or(0),
                trials: cli.trials.or(trials).unwrap_or(50),
                degree: cli.degree.or(degree).unwrap_or(4),
            };
            if p.n == 0 || p.n > s.max_n() {
                return Err(Error::InvalidArgument(format!("suite {name} supports n in 1..={}", s.max_n())));
            }
            if p.trials > 100_000 || p.degree > 8 {
                return Err(Error::InvalidArgument("trials must be at most 100000 and degree at most 8".into()));
            }
            let r = s.run(&p);
            Ok(obj(json!({
                "suite": name,
                "n": p.n,
                "seed": p.seed.to_string(),
                "pass": r.ok(),
                "trials": r.trials,
                "passed": r.passed,
                "failures": r.failures,
            })))
        }
    }
}

fn emit(v: &Value, pretty: bool) {
    let s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) };
    println!("{}", s.expect("JSON values serialize"));
}

fn failure(kind: &str, detail: String, pretty: bool, code: u8) -> ExitCode {
    emit(&json!({ "ok": false, "error": { "kind": kind, "detail": detail } }), pretty);
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut text = String::new();
    let read = match &cli.file {
        Some(p) => std::fs::read_to_string(p).map(|s| text = s),
        None => std::io::stdin().read_to_string(&mut text).map(|_| ()),
    };
    if let Err(e) = read {
        return failure("ParseError", format!("cannot read the request: {e}"), cli.json_pretty, 1);
    }
    let req: Request = match serde_json::from_str(&text) {
        Ok(r) => r,
        Err(e) => return failure("ParseError", e.to_string(), cli.json_pretty, 1),
    };
    match run(req, &cli) {
        Ok(mut m) => {
            m.insert("ok".into(), json!(true));
            emit(&Value::Object(m), cli.json_pretty);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = if e.is_input_error() { 1 } else { 2 };
            failure(e.kind(), e.to_string(), cli.json_pretty, code)
        }
    }
}
