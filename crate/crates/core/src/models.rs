//! Built-in models and the JSON model format.
//!
//! ```json
//! {
//!   "name": "iwasawa", "n": 3, "coframe": ["a1", "a2", "a3"],
//!   "d": {"a3": [{"coeff": "1", "wedge": ["a1", "a2"]}]},
//!   "metric": [["1/2","0","0"], ["0","1/2","0"], ["0","0","1/2"]],
//!   "omega_coeff": "1",
//!   "bundle": {"rank": 2, "F": {"a1^ab1": [["1/4 i","0"], ["0","-1/4 i"]]}},
//!   "alpha_prime": "-4",
//!   "chart": {"coords": 3, "coframe_pullback": {"a3": "-dz3 + z1 dz2"}}
//! }
//! ```
//!
//! Generators are `a<k>` for α^k and `ab<k>` for ᾱ^k. The metric entry
//! `[a][b]` is `h_{ab̄}` with `ω = i Σ h_{ab̄} α^a∧ᾱ^b`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{bits, mask_bidegree, Form, Mask, ValueTag, VForm};
use crate::geometry::{ChartSpec, HomogeneousModel, RealLieAlgebra};
use crate::linalg::Matrix;
use crate::scalar::{parse_real, GaussRat, Scalar};

pub const BUILTIN_NAMES: [&str; 3] = ["iwasawa", "calabi-eckmann", "torus"];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub wedge: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleJson {
    pub rank: usize,
    #[serde(rename = "F", default)]
    pub f: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartJson {
    pub coords: usize,
    pub coframe_pullback: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelJson {
    pub name: String,
    pub n: usize,
    pub coframe: Vec<String>,
    #[serde(default)]
    pub d: BTreeMap<String, Vec<TermJson>>,
    pub metric: Vec<Vec<String>>,
    pub omega_coeff: String,
    pub bundle: BundleJson,
    pub alpha_prime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartJson>,
}

fn g(s: &str) -> GaussRat {
    s.parse().expect("literal")
}

fn diag_half(n: usize) -> Matrix {
    let mut h = Matrix::zeros(n, n);
    for a in 0..n {
        h.set(a, a, GaussRat::frac(1, 2));
    }
    h
}

fn zero_f(n: usize, r: usize) -> VForm {
    VForm::zero(ValueTag::End(r), n)
}

pub fn build_iwasawa() -> HomogeneousModel {
    let n = 3;
    let mut d = vec![Form::zero(n); n];
    d[2] = Form::alpha(n, 1).wedge(&Form::alpha(n, 2));
    let x = Form::alpha(n, 1)
        .wedge(&Form::alpha_bar(n, 1))
        .sub(&Form::alpha(n, 2).wedge(&Form::alpha_bar(n, 2)));
    let mut f = zero_f(n, 2);
    f.comps[0] = x.scale_g(&g("1/4 i"));
    f.comps[3] = x.scale_g(&g("-1/4 i"));
    HomogeneousModel {
        name: "iwasawa".into(),
        n,
        d_coframe: d,
        h: diag_half(n),
        omega_coeff: GaussRat::one(),
        rank: 2,
        f,
        alpha_prime: GaussRat::from(-4),
        chart: Some(ChartSpec {
            coframe_pullback: vec!["dz1".into(), "dz2".into(), "-dz3 + z1 dz2".into()],
        }),
    }
}

/// su(2)⊕su(2) with `de_i = e_j∧e_k` for cyclic (i,j,k) in each factor.
pub fn su2_su2() -> RealLieAlgebra {
    let one = GaussRat::one();
    let mut terms = Vec::new();
    for base in [0usize, 3] {
        for (i, j, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            terms.push((base + i, base + j, base + k, one.clone()));
        }
    }
    RealLieAlgebra::from_constants(6, &terms)
}

/// Coframe α¹ = e1 + i e4, α² = e2 + i e3, α³ = e5 + i e6.
pub fn calabi_eckmann_coframe() -> Matrix {
    let mut p = Matrix::zeros(3, 6);
    for (a, re, im) in [(0, 0, 3), (1, 1, 2), (2, 4, 5)] {
        p.set(a, re, GaussRat::one());
        p.set(a, im, GaussRat::i());
    }
    p
}

pub fn build_calabi_eckmann() -> HomogeneousModel {
    let alg = su2_su2();
    let d = alg
        .complex_structure_equations(&calabi_eckmann_coframe())
        .expect("invertible coframe");
    HomogeneousModel {
        name: "calabi-eckmann".into(),
        n: 3,
        d_coframe: d,
        h: diag_half(3),
        omega_coeff: GaussRat::one(),
        rank: 3,
        f: zero_f(3, 3),
        alpha_prime: GaussRat::from(-4),
        chart: None,
    }
}

pub fn build_torus() -> HomogeneousModel {
    HomogeneousModel {
        name: "torus".into(),
        n: 3,
        d_coframe: vec![Form::zero(3); 3],
        h: Matrix::identity(3),
        omega_coeff: GaussRat::one(),
        rank: 2,
        f: zero_f(3, 2),
        alpha_prime: GaussRat::from(-4),
        chart: None,
    }
}

pub fn builtin(name: &str) -> Result<HomogeneousModel> {
    match name {
        "iwasawa" => Ok(build_iwasawa()),
        "calabi-eckmann" | "ce" => Ok(build_calabi_eckmann()),
        "torus" => Ok(build_torus()),
        _ => Err(Error::UnknownModel(name.into())),
    }
}

pub fn builtins() -> Vec<HomogeneousModel> {
    BUILTIN_NAMES.iter().map(|s| builtin(s).unwrap()).collect()
}

/// Flat torus with a random Hermitian metric and a trace-free gauge
/// curvature `X α¹∧ᾱ¹`, for which tr F∧F = 0 and the anomaly holds.
pub fn random_torus_model(seed: u64) -> HomogeneousModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3;
    let mut b = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b.set(i, j, GaussRat::from_ints(rng.gen_range(-2..=2), rng.gen_range(-2..=2)));
        }
    }
    let h = b.dagger().mul(&b).add(&Matrix::identity(n));
    let x00 = GaussRat::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
    let x01 = GaussRat::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
    let x10 = GaussRat::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
    let theta = Form::alpha(n, 1).wedge(&Form::alpha_bar(n, 1));
    let mut f = zero_f(n, 2);
    f.comps[0] = theta.scale_g(&x00);
    f.comps[1] = theta.scale_g(&x01);
    f.comps[2] = theta.scale_g(&x10);
    f.comps[3] = theta.scale_g(&-x00);
    HomogeneousModel {
        name: format!("random-torus-{seed}"),
        n,
        d_coframe: vec![Form::zero(n); n],
        h,
        omega_coeff: GaussRat::one(),
        rank: 2,
        f,
        alpha_prime: GaussRat::frac(rng.gen_range(-9..=9) * 2 + 1, 3),
        chart: None,
    }
}

fn gen_name(n: usize, x: usize) -> String {
    if x < n { format!("a{}", x + 1) } else { format!("ab{}", x - n + 1) }
}

fn parse_gen(n: usize, s: &str) -> Option<usize> {
    let (off, rest) = if let Some(r) = s.strip_prefix("ab") { (n, r) } else { (0, s.strip_prefix('a')?) };
    let k: usize = rest.parse().ok()?;
    (1..=n).contains(&k).then(|| off + k - 1)
}

fn scalar_const(s: &str, at: &str, errs: &mut Vec<String>) -> GaussRat {
    match s.parse::<Scalar>() {
        Ok(x) if x.is_constant() => x.constant_term(),
        Ok(_) => {
            errs.push(format!("{at}: coefficient {s:?} depends on a"));
            GaussRat::zero()
        }
        Err(e) => {
            errs.push(format!("{at}: {e}"));
            GaussRat::zero()
        }
    }
}

fn wedge_of(n: usize, names: &[String], at: &str, errs: &mut Vec<String>) -> Option<Form> {
    let mut f = Form::one(n);
    for s in names {
        match parse_gen(n, s) {
            Some(x) => f = f.wedge(&Form::generator(n, x)),
            None => {
                errs.push(format!("{at}: unknown generator {s:?}"));
                return None;
            }
        }
    }
    Some(f)
}

/// Structural checks shared by parsed and constructed models.
pub fn validate(m: &HomogeneousModel) -> Result<()> {
    let mut errs = Vec::new();
    let n = m.n;
    if m.d_coframe.len() != n {
        errs.push(format!("d: expected {n} coframe derivatives"));
    }
    for (a, f) in m.d_coframe.iter().enumerate() {
        if f.terms().any(|(mask, _)| bits(mask).count() != 2) {
            errs.push(format!("d.a{}: not a 2-form", a + 1));
        }
        if !f.part(0, 2).is_zero() {
            errs.push(format!("d.a{}: non-integrable, (0,2) component {}", a + 1, f.part(0, 2)));
        }
    }
    if errs.is_empty() {
        for x in 0..2 * n {
            let dd = m.d(&m.d_generator(x));
            if !dd.is_zero() {
                errs.push(format!("d²{} = {} ≠ 0", gen_name(n, x), dd));
            }
        }
    }
    if m.h.rows != n || m.h.cols != n {
        errs.push(format!("metric: expected {n}×{n}"));
    } else if !m.h.is_hermitian() {
        errs.push("metric: not Hermitian".into());
    } else {
        for (k, minor) in m.h.leading_minors().iter().enumerate() {
            if !minor.im.is_zero() || !minor.re.is_positive() {
                errs.push(format!("metric: leading minor {} = {} is not positive", k + 1, minor));
            }
        }
    }
    if m.omega_coeff.is_zero() {
        errs.push("omega_coeff: must be nonzero".into());
    }
    if !m.alpha_prime.im.is_zero() {
        errs.push("alpha_prime: must be real".into());
    }
    let r = m.rank;
    if r == 0 || m.f.tag != ValueTag::End(r) {
        errs.push("bundle: F must be End(E)-valued with E of positive rank".into());
    } else {
        for (idx, c) in m.f.comps.iter().enumerate() {
            if c.bidegrees().iter().any(|&b| b != (1, 1)) {
                errs.push(format!("bundle.F[{}][{}]: not of type (1,1)", idx / r, idx % r));
            }
        }
        let tr = m.f.trace().expect("End-valued");
        if !tr.is_zero() {
            errs.push(format!("bundle.F: not trace-free, tr F = {tr}"));
        }
    }
    if let Some(c) = &m.chart {
        if c.coframe_pullback.len() != n {
            errs.push(format!("chart: expected {n} coframe pull-backs"));
        }
    }
    if errs.is_empty() { Ok(()) } else { Err(Error::InvalidModel(errs)) }
}

pub fn from_json(doc: &ModelJson) -> Result<HomogeneousModel> {
    let mut errs = Vec::new();
    let n = doc.n;
    if n == 0 || n > 6 {
        return Err(Error::InvalidModel(vec![format!("n: must be in 1..=6, got {n}")]));
    }
    let expected: Vec<String> = (1..=n).map(|k| format!("a{k}")).collect();
    if doc.coframe != expected {
        errs.push(format!("coframe: expected {expected:?}"));
    }
    let mut d = vec![Form::zero(n); n];
    for (key, terms) in &doc.d {
        let Some(a) = parse_gen(n, key).filter(|&x| x < n) else {
            errs.push(format!("d: unknown coframe element {key:?}"));
            continue;
        };
        for (t, term) in terms.iter().enumerate() {
            let at = format!("d.{key}[{t}]");
            let c = scalar_const(&term.coeff, &at, &mut errs);
            if term.wedge.len() != 2 {
                errs.push(format!("{at}: wedge must list two generators"));
                continue;
            }
            if let Some(w) = wedge_of(n, &term.wedge, &at, &mut errs) {
                d[a] = d[a].add(&w.scale_g(&c));
            }
        }
    }
    let mut h = Matrix::zeros(n, n);
    if doc.metric.len() != n || doc.metric.iter().any(|r| r.len() != n) {
        errs.push(format!("metric: expected {n}×{n}"));
    } else {
        for (a, row) in doc.metric.iter().enumerate() {
            for (b, s) in row.iter().enumerate() {
                h.set(a, b, scalar_const(s, &format!("metric[{a}][{b}]"), &mut errs));
            }
        }
    }
    let omega_coeff = scalar_const(&doc.omega_coeff, "omega_coeff", &mut errs);
    let r = doc.bundle.rank;
    let mut f = zero_f(n, r.max(1));
    for (key, mat) in &doc.bundle.f {
        let at = format!("bundle.F.{key}");
        let names: Vec<String> = key.split('^').map(|s| s.trim().to_string()).collect();
        let Some(w) = wedge_of(n, &names, &at, &mut errs) else { continue };
        if mat.len() != r || mat.iter().any(|row| row.len() != r) {
            errs.push(format!("{at}: expected {r}×{r} matrix"));
            continue;
        }
        for (i, row) in mat.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let c = scalar_const(s, &format!("{at}[{i}][{j}]"), &mut errs);
                f.comps[i * r + j] = f.comps[i * r + j].add(&w.scale_g(&c));
            }
        }
    }
    let alpha_prime = match parse_real(&doc.alpha_prime) {
        Ok(x) => x,
        Err(e) => {
            errs.push(format!("alpha_prime: {e}"));
            GaussRat::zero()
        }
    };
    let chart = match &doc.chart {
        None => None,
        Some(c) => {
            if c.coords != n {
                errs.push(format!("chart.coords: expected {n}"));
            }
            let mut pulls = Vec::new();
            for k in 1..=n {
                pulls.push(c.coframe_pullback.get(&format!("a{k}")).cloned().unwrap_or_else(|| format!("dz{k}")));
            }
            for key in c.coframe_pullback.keys() {
                if parse_gen(n, key).filter(|&x| x < n).is_none() {
                    errs.push(format!("chart.coframe_pullback: unknown coframe element {key:?}"));
                }
            }
            Some(ChartSpec { coframe_pullback: pulls })
        }
    };
    if !errs.is_empty() {
        return Err(Error::InvalidModel(errs));
    }
    let m = HomogeneousModel {
        name: doc.name.clone(),
        n,
        d_coframe: d,
        h,
        omega_coeff,
        rank: r,
        f,
        alpha_prime,
        chart,
    };
    validate(&m)?;
    Ok(m)
}

pub fn to_json(m: &HomogeneousModel) -> ModelJson {
    let n = m.n;
    let mut d = BTreeMap::new();
    for (a, f) in m.d_coframe.iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let terms = f
            .terms()
            .map(|(mask, c)| TermJson { coeff: c.to_string(), wedge: bits(mask).map(|x| gen_name(n, x)).collect() })
            .collect();
        d.insert(format!("a{}", a + 1), terms);
    }
    let metric = (0..n).map(|a| (0..n).map(|b| m.h.get(a, b).to_string()).collect()).collect();
    let r = m.rank;
    let mut fmap: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut masks: Vec<Mask> = m.f.comps.iter().flat_map(|c| c.terms().map(|(k, _)| k)).collect();
    masks.sort();
    masks.dedup();
    for mask in masks {
        debug_assert_eq!(mask_bidegree(mask, n), (1, 1));
        let key = bits(mask).map(|x| gen_name(n, x)).collect::<Vec<_>>().join("^");
        let mat = (0..r)
            .map(|i| (0..r).map(|j| m.f.comps[i * r + j].coeff(mask).to_string()).collect())
            .collect();
        fmap.insert(key, mat);
    }
    ModelJson {
        name: m.name.clone(),
        n,
        coframe: (1..=n).map(|k| format!("a{k}")).collect(),
        d,
        metric,
        omega_coeff: m.omega_coeff.to_string(),
        bundle: BundleJson { rank: r, f: fmap },
        alpha_prime: m.alpha_prime.to_string(),
        chart: m.chart.as_ref().map(|c| ChartJson {
            coords: n,
            coframe_pullback: c
                .coframe_pullback
                .iter()
                .enumerate()
                .map(|(k, s)| (format!("a{}", k + 1), s.clone()))
                .collect(),
        }),
    }
}

pub fn parse_model_file(text: &str) -> Result<HomogeneousModel> {
    let doc: ModelJson = serde_json::from_str(text)?;
    from_json(&doc)
}

/// Canonical JSON text (sorted keys, two-space indent).
pub fn print_model(m: &HomogeneousModel) -> String {
    let v = serde_json::to_value(to_json(m)).expect("serializable");
    serde_json::to_string_pretty(&v).expect("serializable")
}

/// Built-in name or path to a model file.
pub fn load(source: &str) -> Result<HomogeneousModel> {
    if let Ok(m) = builtin(source) {
        return Ok(m);
    }
    if source.ends_with(".json") || std::path::Path::new(source).exists() {
        let text = std::fs::read_to_string(source)?;
        return parse_model_file(&text);
    }
    Err(Error::UnknownModel(source.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for m in builtins() {
            validate(&m).unwrap_or_else(|e| panic!("{}: {e}", m.name));
        }
        for s in 0..5 {
            validate(&random_torus_model(s)).unwrap();
        }
    }

    #[test]
    fn round_trip() {
        for m in builtins() {
            let text = print_model(&m);
            let back = parse_model_file(&text).unwrap();
            assert_eq!(back, m, "{}", m.name);
            assert_eq!(print_model(&back), text);
        }
    }

    #[test]
    fn iwasawa_d_alpha3() {
        let m = build_iwasawa();
        assert_eq!(m.d(&Form::alpha(3, 3)), Form::alpha(3, 1).wedge(&Form::alpha(3, 2)));
        assert_eq!(m.d(&Form::alpha_bar(3, 3)), Form::alpha_bar(3, 1).wedge(&Form::alpha_bar(3, 2)));
    }

    fn doc_with_d(d: &str) -> String {
        format!(
            r#"{{"name":"t","n":2,"coframe":["a1","a2"],"d":{d},
            "metric":[["1","0"],["0","1"]],"omega_coeff":"1",
            "bundle":{{"rank":1}},"alpha_prime":"1"}}"#
        )
    }

    #[test]
    fn integrability_diagnostics() {
        let ok = doc_with_d(r#"{"a2":[{"coeff":"1","wedge":["a1","ab1"]}]}"#);
        assert!(parse_model_file(&ok).is_ok());
        let bad = doc_with_d(r#"{"a2":[{"coeff":"1","wedge":["ab1","ab2"]}]}"#);
        let err = parse_model_file(&bad).unwrap_err().to_string();
        assert!(err.contains("non-integrable"), "{err}");
    }

    #[test]
    fn rejects_bad_metric_and_trace() {
        let text = r#"{"name":"t","n":1,"coframe":["a1"],"metric":[["-1"]],"omega_coeff":"1",
            "bundle":{"rank":2,"F":{"a1^ab1":[["1","0"],["0","1"]]}},"alpha_prime":"1/2 i"}"#;
        let err = parse_model_file(text).unwrap_err().to_string();
        assert!(err.contains("alpha_prime"), "{err}");
        let text = text.replace("1/2 i", "1/2");
        let err = parse_model_file(&text).unwrap_err().to_string();
        assert!(err.contains("leading minor"), "{err}");
        assert!(err.contains("trace-free"), "{err}");
    }
}
