//! Canonical JSON reports. Objects are `serde_json::Map`, which keeps keys
//! sorted, and every scalar and form is printed in its normal form.

use num_traits::Zero;
use serde_json::{json, Value};

use crate::chartlocal::{TransitionReport, TrivializationReport};
use crate::cohomology::{CohomologyReport, SymbolReport};
use crate::exterior::VForm;
use crate::geometry::SystemReport;
use crate::scalar::GaussRat;

fn vform_strings(v: &VForm) -> Vec<String> {
    v.comps.iter().map(|c| c.to_string()).collect()
}

fn alpha_field(alpha: &GaussRat, arbitrary: bool) -> Value {
    if arbitrary {
        json!("α′ arbitrary")
    } else {
        json!(alpha.to_string())
    }
}

pub fn system_json(model: &str, r: &SystemReport) -> Value {
    let eq = |pass: bool, residual: Value| json!({ "pass": pass, "residual": residual });
    json!({
        "model": model,
        "alpha_prime": alpha_field(&r.alpha_prime, r.alpha_arbitrary()),
        "degenerate": r.alpha_prime.is_zero(),
        "F1": eq(r.f1_pass(), json!(r.f1.to_string())),
        "F2": eq(r.f2_pass(), json!(r.f2.to_string())),
        "F2_symbolic": r.f2_symbolic.to_string(),
        "D1": eq(r.d1_pass(), json!(vform_strings(&r.d1))),
        "D2": eq(r.d2_pass(), json!(r.d2.to_string())),
        "omega_norm_sq": r.omega_norm_sq.to_string(),
        "pass": r.all_pass(),
    })
}

pub fn symbol_json(r: &SymbolReport) -> Value {
    let mut v = json!({
        "model": r.model,
        "alpha_prime": r.alpha_prime.to_string(),
        "degenerate": r.alpha_prime.is_zero(),
        "samples": r.samples,
        "injective": r.injective,
    });
    if let Some(f) = &r.first_failure {
        v["first_failure"] = json!({
            "xi": f.xi.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "degree": f.degree,
            "rank": f.rank,
            "dim": f.dim,
        });
    }
    v
}

fn serre_pairs(r: &CohomologyReport) -> Value {
    json!(r.serre_pairs.iter().map(|(p, q, eq)| json!([p, q, eq])).collect::<Vec<_>>())
}

pub fn serre_json(r: &CohomologyReport, arbitrary: bool) -> Value {
    json!({
        "model": r.model,
        "alpha_prime": alpha_field(&r.alpha_prime, arbitrary),
        "invariant": true,
        "h": r.h(),
        "serre_pairs": serre_pairs(r),
        "serre": r.serre(),
        "euler": r.euler,
    })
}

pub fn cohomology_json(r: &CohomologyReport, symbol: Option<&SymbolReport>, checks: &SystemReport) -> Value {
    let col = |f: fn(&crate::cohomology::DegreeDims) -> usize| r.degrees.iter().map(f).collect::<Vec<_>>();
    let mut v = json!({
        "model": r.model,
        "alpha_prime": alpha_field(&r.alpha_prime, checks.alpha_arbitrary()),
        "degenerate": r.alpha_prime.is_zero(),
        "diagonal_dbar": r.diagonal,
        "invariant": true,
        "dims": {
            "dim": col(|d| d.dim),
            "ker": col(|d| d.ker),
            "rank": col(|d| d.rank),
            "h": r.h(),
            "harmonic": r.harmonic(),
        },
        "hodge_identity": r.hodge_identity(),
        "serre_pairs": serre_pairs(r),
        "serre": r.serre(),
        "euler": r.euler,
        "checks": system_json(&r.model, checks),
    });
    if let Some(s) = symbol {
        let mut sj = symbol_json(s);
        let obj = sj.as_object_mut().expect("object");
        obj.remove("model");
        obj.remove("alpha_prime");
        obj.remove("degenerate");
        v["symbol"] = sj;
    }
    v
}

fn transition_json(t: &TransitionReport) -> Value {
    json!({ "pair": t.name, "sections": t.sections, "holomorphic": t.holomorphic, "cocycle": t.cocycle })
}

pub fn trivialization_json(r: &TrivializationReport) -> Value {
    let mut v = json!({
        "model": r.model,
        "alpha_prime": r.alpha_prime.to_string(),
        "degenerate": r.alpha_prime.is_zero(),
        "degree": r.degree,
        "sections": r.sections,
        "dbar_A_equals_F": r.dbar_a_minus_f,
        "tau_equation": r.tau_residual_zero,
        "d_CS_equals_trFF": r.chern_simons_residual_zero,
        "phi_invertible": r.phi_inverse,
        "residual_zero": r.residual_zero,
        "transitions": r.transitions.iter().map(transition_json).collect::<Vec<_>>(),
        "A": r.a_form,
        "tau_tilde": r.tau_tilde,
        "pass": r.all_pass(),
    });
    if let Some(s) = &r.first_nonzero {
        v["first_nonzero_residual"] = json!(s);
    }
    v
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
