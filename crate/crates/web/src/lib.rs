//! Browser bindings for the demo page in `www/`. Each export takes and
//! returns JSON strings; the page draws the numbers on a canvas.

use cfkit::basis::OrderedBasis;
use cfkit::christoffel::build_cf;
use cfkit::disintegration::{decay_sweep, factorization_residual, linspace, Disintegrator};
use cfkit::moments::{moment_matrix, CurveRegion, MeasureSpec, DEFAULT_QUAD_ORDER};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest degree the page may request.
pub const MAX_T: usize = 8;

/// `"square"`, `"region"`, or a full measure spec in JSON.
pub fn parse_measure(spec: &str) -> Result<MeasureSpec, String> {
    match spec.trim() {
        "square" => Ok(MeasureSpec::uniform_box(vec![[-1.0, 1.0], [-1.0, 1.0]])),
        "region" => Ok(MeasureSpec::curve_region(CurveRegion::polynomial(
            [-1.0, 1.0],
            vec![-0.8, 0.0, 0.2],
            vec![0.9, -0.1],
        ))),
        other => serde_json::from_str(other).map_err(|e| format!("measure: {e}")),
    }
}

fn check_t(t: usize) -> Result<(), String> {
    if t == 0 || t > MAX_T {
        return Err(format!("degree must be in 1..={MAX_T}"));
    }
    Ok(())
}

/// Christoffel function on a `count × count` grid over `[lo, hi]²`,
/// row-major with `y` varying fastest.
pub fn cf_grid_json(
    spec: &str,
    t: usize,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<String, String> {
    check_t(t)?;
    let spec = parse_measure(spec)?;
    let seq = spec
        .moments(t, DEFAULT_QUAD_ORDER)
        .map_err(|e| e.to_string())?;
    let basis = OrderedBasis::new(seq.dim(), 0, t);
    let e = build_cf(&moment_matrix(&seq, &basis).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let axis = linspace(lo, hi, count.clamp(2, 400));
    let mut values = Vec::with_capacity(axis.len() * axis.len());
    for &x in &axis {
        for &y in &axis {
            values.push(e.value(&[x, y]).map_err(|e| e.to_string())?);
        }
    }
    Ok(json!({
        "axis": axis,
        "values": values,
        "basis_size": basis.len(),
        "condition": e.condition(),
    })
    .to_string())
}

/// Conditional SOS, Hankel matrix, atoms and the conditional CF curve at `x`.
pub fn disintegrate_json(spec: &str, t: usize, x: f64) -> Result<String, String> {
    check_t(t)?;
    let spec = parse_measure(spec)?;
    let d = Disintegrator::from_spec(&spec, t, DEFAULT_QUAD_ORDER).map_err(|e| e.to_string())?;
    let r = d.disintegrate_at(&[x]).map_err(|e| e.to_string())?;
    let ys = linspace(-1.5, 1.5, 121);
    let curve: Vec<f64> = ys.iter().map(|&y| r.conditional_cf(y)).collect();
    let residual = factorization_residual(d.joint(), &r, &ys).map_err(|e| e.to_string())?;
    Ok(json!({
        "result": r,
        "ys": ys,
        "conditional_cf": curve,
        "factorization_residual": residual,
    })
    .to_string())
}

/// Conditional CF at `(x, y)` for degrees `1..=t_max` with the log-linear fit.
pub fn decay_json(spec: &str, x: f64, y: f64, t_max: usize) -> Result<String, String> {
    check_t(t_max)?;
    let spec = parse_measure(spec)?;
    let ts: Vec<usize> = (1..=t_max).collect();
    let s = decay_sweep(&spec, x, y, &ts, DEFAULT_QUAD_ORDER).map_err(|e| e.to_string())?;
    serde_json::to_string(&s).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn cf_grid(spec: &str, t: usize, lo: f64, hi: f64, count: usize) -> Result<String, JsValue> {
    cf_grid_json(spec, t, lo, hi, count).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn disintegrate(spec: &str, t: usize, x: f64) -> Result<String, JsValue> {
    disintegrate_json(spec, t, x).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn decay(spec: &str, x: f64, y: f64, t_max: usize) -> Result<String, JsValue> {
    decay_json(spec, x, y, t_max).map_err(|e| JsValue::from_str(&e))
}
