//! Browser bindings for three operations of the `coaction` library.
//!
//! Every export takes plain values and returns a JSON string, either the
//! result or `{"error": "..."}`.

use coaction::adag::{check_core_conditions, check_sufficient_covariate, Adag, RoleAssignment};
use coaction::mechanism::{classify_coaction, ResponseFunction, VariableDomain};
use coaction::simulator::{exact_risk, Dichotomization, Regime, Scenario};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const FIGURES: [(&str, &str, &str); 6] = [
    ("fig1b", include_str!("../../../data/fig1b.json"), "V"),
    ("fig1c", include_str!("../../../data/fig1c.json"), "V"),
    ("fig3a", include_str!("../../../data/fig3a.json"), "U"),
    ("fig3b", include_str!("../../../data/fig3b.json"), "U"),
    ("fig3c", include_str!("../../../data/fig3c.json"), "U"),
    ("fig3d", include_str!("../../../data/fig3d.json"), "U"),
];

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn names(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

pub fn classify(response_json: &str) -> Result<Value, String> {
    let f = ResponseFunction::from_json(response_json).map_err(|e| e.to_string())?;
    serde_json::to_value(classify_coaction(&f)).map_err(|e| e.to_string())
}

pub fn figure(name: &str, c: &str) -> Result<Value, String> {
    let (_, text, u) = FIGURES.iter().find(|(n, _, _)| *n == name).ok_or_else(|| format!("unknown figure '{name}'"))?;
    let g = Adag::from_json(text).map_err(|e| e.to_string())?;
    let c = names(c);
    let roles = RoleAssignment { c: c.clone(), u: vec![u.to_string()], ..RoleAssignment::new("A", "B", "Y") };
    let report = check_core_conditions(&g, &roles).map_err(|e| e.to_string())?;
    let sufficiency = check_sufficient_covariate(&g, &roles, &c).map_err(|e| e.to_string())?;
    Ok(json!({ "graph": g.to_file(), "conditions": report, "sufficient_covariate": sufficiency }))
}

/// Binary `A`, `B`, `U`: `f(a, b, 1)` follows the 2×2 pattern (bit `2a + b`
/// of `pattern − 1`) and `f(a, b, 0) = 0`.
pub fn excess(pattern: u32, p_a: f64, p_b: f64, p_u: f64) -> Result<Value, String> {
    if !(1..=16).contains(&pattern) {
        return Err(format!("pattern must be 1 to 16, got {pattern}"));
    }
    let bits = pattern - 1;
    let f = ResponseFunction::from_fn(
        VariableDomain::range("A", 2),
        VariableDomain::range("B", 2),
        VariableDomain::singleton("C"),
        VariableDomain::range("U", 2),
        |a, b, _, u| u == 1 && (bits >> (2 * a + b)) & 1 == 1,
    );
    let law = |p: f64| vec![1.0 - p, p];
    let scenario =
        Scenario::new(f.clone(), vec![1.0], vec![law(p_u)], vec![law(p_a)], vec![law(p_b)], Regime::Observational)
            .map_err(|e| e.to_string())?;
    let table = exact_risk(&scenario, &Dichotomization::top(&f)).map_err(|e| e.to_string())?;
    let s = &table.strata[0];
    Ok(json!({
        "risk": s.risk,
        "excess": s.excess(),
        "verdict": classify_coaction(&f),
    }))
}

#[wasm_bindgen]
pub fn classify_table(response_json: &str) -> String {
    respond(classify(response_json))
}

#[wasm_bindgen]
pub fn check_figure(name: &str, c: &str) -> String {
    respond(figure(name, c))
}

#[wasm_bindgen]
pub fn exact_excess(pattern: u32, p_a: f64, p_b: f64, p_u: f64) -> String {
    respond(excess(pattern, p_a, p_b, p_u))
}
