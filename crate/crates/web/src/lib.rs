//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each exported function has a plain Rust twin returning `Result<String,
//! String>` so the JSON payloads can be tested natively.

use dche::cli::parse_scalar;
use dche::expansions::{compute_coefficients, evaluate_partial, make_family, DcheParams, FamilyId, FamilyOptions};
use dche::oracle::{relative_dche_residual, series_u};
use dche::termination::{install_condition, q_spectrum};
use dche::{Complex, Rational, Scalar};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Parameter strings as typed in the page: `re`, `re,im` or `p/q`.
pub struct Inputs<'a> {
    pub family: &'a str,
    pub alpha: &'a str,
    pub gamma: &'a str,
    pub delta: &'a str,
    pub epsilon: &'a str,
    pub q: &'a str,
}

fn params<S: Scalar>(i: &Inputs) -> Result<DcheParams<S>, String> {
    let p = |name, text| parse_scalar::<S>(name, text).map_err(|e| e.to_string());
    Ok(DcheParams::new(
        p("alpha", i.alpha)?,
        p("gamma", i.gamma)?,
        p("delta", i.delta)?,
        p("epsilon", i.epsilon)?,
        p("q", i.q)?,
    ))
}

fn family(name: &str) -> Result<FamilyId, String> {
    name.parse().map_err(|e: dche::Error| e.to_string())
}

fn cx(c: Complex) -> Value {
    json!({ "re": c.re + 0.0, "im": c.im + 0.0 })
}

/// `u` and the relative residual on a real grid.
pub fn curve(i: &Inputs, terms: usize, start: f64, stop: f64, count: usize) -> Result<String, String> {
    let p = params::<Complex>(i)?;
    let inst = make_family(&p, family(i.family)?, &FamilyOptions::default()).map_err(|e| e.to_string())?;
    let sol = compute_coefficients(&inst, terms).map_err(|e| e.to_string())?;
    let count = count.max(2);
    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let z = Complex::new(start + (stop - start) * k as f64 / (count - 1) as f64, 0.0);
        if z.norm() == 0.0 {
            continue;
        }
        let (u, converged) = match inst.target {
            dche::expansions::Target::UEquation => match evaluate_partial(&sol, z, 1e-15, 2) {
                Ok(v) => ([v.derivatives[0], v.derivatives[1], v.derivatives[2]], v.converged),
                Err(_) => continue,
            },
            dche::expansions::Target::VEquation => match series_u(&sol, z, 1e-15) {
                Ok(u) => (u, true),
                Err(_) => continue,
            },
        };
        let residual = relative_dche_residual(&p, u, z).unwrap_or(f64::NAN);
        points.push(json!({
            "z": z.re,
            "u": cx(u[0]),
            "residual": if residual.is_finite() { json!(residual) } else { Value::Null },
            "converged": converged,
        }));
    }
    Ok(json!({ "terminated_at": sol.terminated_at, "points": points }).to_string())
}

/// Termination spectrum at order `n`; α is set from the termination
/// condition when the field is empty.
pub fn spectrum(i: &Inputs, n: usize, exact: bool) -> Result<String, String> {
    if exact {
        spectrum_in::<Rational>(i, n)
    } else {
        spectrum_in::<Complex>(i, n)
    }
}

fn spectrum_in<S: Scalar>(i: &Inputs, n: usize) -> Result<String, String> {
    let fam = family(i.family)?;
    let opts = FamilyOptions::default();
    let filled = Inputs {
        alpha: if i.alpha.trim().is_empty() { "0" } else { i.alpha },
        ..*i
    };
    let mut p = params::<S>(&filled)?;
    if i.alpha.trim().is_empty() {
        p = install_condition(&p, fam, &opts, n).map_err(|e| e.to_string())?;
    }
    let s = q_spectrum(&p, fam, &opts, n, 1e-12).map_err(|e| e.to_string())?;
    let roots: Vec<Value> = s
        .roots
        .iter()
        .map(|r| {
            json!({
                "q": cx(r.value),
                "exact": r.exact.as_ref().map(|e| e.to_string()),
                "certified": r.certified(),
                "explicit": r.certificate.as_ref().map(|c| c.explicit.to_string()),
            })
        })
        .collect();
    Ok(json!({
        "alpha": p.alpha.to_repr().to_string(),
        "condition": s.condition,
        "polynomial": s.polynomial.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "roots": roots,
    })
    .to_string())
}

/// Expansion coefficients `a_0..a_terms`.
pub fn coefficients(i: &Inputs, terms: usize, exact: bool) -> Result<String, String> {
    if exact {
        coefficients_in::<Rational>(i, terms)
    } else {
        coefficients_in::<Complex>(i, terms)
    }
}

fn coefficients_in<S: Scalar>(i: &Inputs, terms: usize) -> Result<String, String> {
    let p = params::<S>(i)?;
    let inst = make_family(&p, family(i.family)?, &FamilyOptions::default()).map_err(|e| e.to_string())?;
    let sol = compute_coefficients(&inst, terms).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = sol
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, a)| json!({ "n": n, "a": a.to_repr().to_string() }))
        .collect();
    Ok(json!({ "terminated_at": sol.terminated_at, "rows": rows }).to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn series_curve(
    family: &str,
    alpha: &str,
    gamma: &str,
    delta: &str,
    epsilon: &str,
    q: &str,
    terms: usize,
    start: f64,
    stop: f64,
    count: usize,
) -> Result<String, JsValue> {
    let i = Inputs {
        family,
        alpha,
        gamma,
        delta,
        epsilon,
        q,
    };
    js(curve(&i, terms, start, stop, count))
}

#[wasm_bindgen]
pub fn q_spectrum_json(
    family: &str,
    alpha: &str,
    gamma: &str,
    delta: &str,
    epsilon: &str,
    order: usize,
    exact: bool,
) -> Result<String, JsValue> {
    let i = Inputs {
        family,
        alpha,
        gamma,
        delta,
        epsilon,
        q: "0",
    };
    js(spectrum(&i, order, exact))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn coefficient_table(
    family: &str,
    alpha: &str,
    gamma: &str,
    delta: &str,
    epsilon: &str,
    q: &str,
    terms: usize,
    exact: bool,
) -> Result<String, JsValue> {
    let i = Inputs {
        family,
        alpha,
        gamma,
        delta,
        epsilon,
        q,
    };
    js(coefficients(&i, terms, exact))
}
