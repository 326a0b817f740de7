//! wasm-bindgen entry points for the static page in `www/`. Each export takes plain
//! numbers and returns a JSON string; the typed functions underneath are what the
//! native tests exercise.

use std::cell::RefCell;
use std::collections::HashMap;

use heckearg::hecke::{default_p_max, diagonalize, EigenBasis};
use heckearg::lfunction::{AfeParams, LFunction};
use heckearg::modsym::ManinSymbolSpace;
use heckearg::stats::{distribution_mu_q, limit_variance};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Levels above this take too long for an interactive page.
pub const MAX_LEVEL: u64 = 400;

thread_local! {
    static BASES: RefCell<HashMap<u64, EigenBasis>> = RefCell::new(HashMap::new());
}

fn with_basis<T>(q: u64, body: impl FnOnce(&EigenBasis) -> Result<T, String>) -> Result<T, String> {
    if q > MAX_LEVEL {
        return Err(format!("level {q} exceeds the demo limit {MAX_LEVEL}"));
    }
    if !heckearg::arith::is_prime(q) {
        return Err(format!("level {q} is not prime"));
    }
    BASES.with(|cell| {
        let mut bases = cell.borrow_mut();
        if !bases.contains_key(&q) {
            let space = ManinSymbolSpace::build(q).map_err(|e| e.to_string())?;
            let basis = diagonalize(&space, default_p_max(q)).map_err(|e| e.to_string())?;
            bases.insert(q, basis);
        }
        body(&bases[&q])
    })
}

fn l_function(basis: &EigenBasis, form: usize) -> Result<LFunction, String> {
    let f = basis
        .forms
        .get(form)
        .ok_or_else(|| format!("level {} has {} forms, no form {form}", basis.q, basis.forms.len()))?;
    LFunction::new(f, &AfeParams::default()).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormInfo {
    pub id: usize,
    pub epsilon: i32,
    pub omega: f64,
    pub lambda_2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelInfo {
    pub q: u64,
    pub dim: usize,
    pub forms: Vec<FormInfo>,
}

pub fn level(q: u64) -> Result<LevelInfo, String> {
    with_basis(q, |basis| {
        Ok(LevelInfo {
            q,
            dim: basis.dim,
            forms: basis
                .forms
                .iter()
                .map(|f| FormInfo {
                    id: f.id,
                    epsilon: f.epsilon,
                    omega: f.omega,
                    lambda_2: f.lambda_prime(2).unwrap_or(f64::NAN),
                })
                .collect(),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub t: f64,
    pub sigma: Vec<f64>,
    pub phase: Vec<f64>,
    pub s_value: f64,
}

/// Continuous argument of L(σ+it) from σ = 3 down to ½.
pub fn trace(q: u64, form: usize, t: f64) -> Result<Trace, String> {
    with_basis(q, |basis| {
        let arg = l_function(basis, form)?.s_of_t(t).map_err(|e| e.to_string())?;
        Ok(Trace { t, sigma: arg.sigma_grid, phase: arg.phase, s_value: arg.s_value })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub t: Vec<f64>,
    pub z: Vec<f64>,
}

pub fn z_curve(q: u64, form: usize, t_max: f64, points: usize) -> Result<Curve, String> {
    if !(t_max > 0.0 && t_max <= 50.0) || points < 2 {
        return Err(format!("need 0 < t_max <= 50 and at least 2 points, got {t_max}, {points}"));
    }
    with_basis(q, |basis| {
        let l = l_function(basis, form)?;
        let t: Vec<f64> = (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect();
        let z = t.iter().map(|&x| l.hardy_z(x).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
        Ok(Curve { t, z })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub q: u64,
    pub t: f64,
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub limit_variance: f64,
    pub ks_distance: f64,
    /// Forms whose trace failed, e.g. a zero too close to ½+it.
    pub skipped: Vec<usize>,
}

/// Harmonic-weighted histogram of S(t,f)/√(log log q) over the level, skipping forms
/// whose trace fails.
pub fn histogram(q: u64, t: f64, bins: usize) -> Result<Histogram, String> {
    if bins == 0 {
        return Err("bins must be positive".into());
    }
    with_basis(q, |basis| {
        let mut kept = basis.clone();
        let mut values = Vec::new();
        let mut skipped = Vec::new();
        kept.forms.clear();
        for f in &basis.forms {
            let s = LFunction::new(f, &AfeParams::default()).and_then(|l| l.s_of_t(t));
            match s {
                Ok(arg) => {
                    kept.forms.push(f.clone());
                    values.push(Some(arg.s_value));
                }
                Err(_) => skipped.push(f.id),
            }
        }
        kept.dim = kept.forms.len();
        let report = distribution_mu_q(&kept, t, &values).map_err(|e| e.to_string())?;
        let half = report
            .samples
            .iter()
            .map(|s| s.value.abs())
            .fold(3.0 * limit_variance().sqrt(), f64::max)
            * 1.05;
        let width = 2.0 * half / bins as f64;
        let mut mass = vec![0.0; bins];
        for s in &report.samples {
            let slot = (((s.value + half) / width).floor() as usize).min(bins - 1);
            mass[slot] += s.weight;
        }
        Ok(Histogram {
            q,
            t,
            edges: (0..=bins).map(|k| -half + k as f64 * width).collect(),
            density: mass.iter().map(|m| m / width).collect(),
            mean: report.mean,
            variance: report.variance,
            limit_variance: limit_variance(),
            ks_distance: report.ks_distance,
            skipped,
        })
    })
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = levelInfo)]
pub fn level_js(q: u32) -> Result<String, JsError> {
    to_js(level(q as u64))
}

#[wasm_bindgen(js_name = argumentTrace)]
pub fn trace_js(q: u32, form: u32, t: f64) -> Result<String, JsError> {
    to_js(trace(q as u64, form as usize, t))
}

#[wasm_bindgen(js_name = hardyZ)]
pub fn z_curve_js(q: u32, form: u32, t_max: f64, points: u32) -> Result<String, JsError> {
    to_js(z_curve(q as u64, form as usize, t_max, points as usize))
}

#[wasm_bindgen(js_name = familyHistogram)]
pub fn histogram_js(q: u32, t: f64, bins: u32) -> Result<String, JsError> {
    to_js(histogram(q as u64, t, bins as usize))
}
