//! Browser bindings: the normalized level-`i` weight on the unit interval,
//! the bottom of a catalog pencil and the quasimode residual ratio.
//!
//! Each binding wraps a plain function so the same code is tested natively.

use hardy_core::discretize::scenario_pencil;
use hardy_core::eigen::bottom;
use hardy_core::quasimode::{quasimode_residual, scenario_frames, Window};
use hardy_core::scenarios::{build_weight, scenario, Domain, WeightSpec};
use hardy_core::xlog;
use wasm_bindgen::prelude::*;

/// Interleaved `(δ, 4δ²J_i(δ))` on the unit interval, `δ` log-spaced from
/// `1e-12` to `1/2`. The second entry is `X_1²⋯X_i²(δ/D)` and tends to 0 at
/// the boundary for `i ≥ 1`.
pub fn weight_profile_native(level: usize, samples: usize) -> Result<Vec<f64>, String> {
    if !(2..=100_000).contains(&samples) {
        return Err("samples must lie in [2, 100000]".into());
    }
    let dom = Domain::Interval { len: 1.0 };
    let d = xlog::select_d(0.5, None, 0.0).map_err(|e| e.to_string())?.d;
    let w = build_weight(&dom, &WeightSpec::IteratedLogJ { i: level, d }).map_err(|e| e.to_string())?;
    let (lo, hi) = (1e-12f64.ln(), 0.5f64.ln());
    let mut out = Vec::with_capacity(2 * samples);
    for k in 0..samples {
        // The last sample sits just inside the ridge at 1/2.
        let delta = (lo + (hi - lo) * k as f64 / (samples - 1) as f64).exp() * (1.0 - 1e-9);
        let v = w.value(delta).map_err(|e| e.to_string())?;
        out.push(delta);
        out.push(4.0 * delta * delta * v);
    }
    Ok(out)
}

/// Lowest eigenvalue of a catalog scenario's pencil on `n` elements.
pub fn bottom_eigenvalue_native(name: &str, n: usize) -> Result<f64, String> {
    if !(8..=20_000).contains(&n) {
        return Err("n must lie in [8, 20000]".into());
    }
    let sc = scenario(name).map_err(|e| e.to_string())?;
    let p = scenario_pencil(&sc, n, 0.7, 1e-8).map_err(|e| e.to_string())?;
    bottom(&p, 1e-10).map_err(|e| e.to_string())
}

/// Residual ratio of the cutoff quasimode at `λ = 1 + η` on the window
/// `[a, a + length]`, `a` five units past the edge of the scenario's frame.
pub fn quasimode_ratio_native(name: &str, eta: f64, length: f64) -> Result<f64, String> {
    let sc = scenario(name).map_err(|e| e.to_string())?;
    let setup = scenario_frames(&sc).map_err(|e| e.to_string())?.remove(0);
    let a = setup.frame.w_min() + 5.0;
    let win = Window::new(a, a + length).map_err(|e| e.to_string())?;
    quasimode_residual(setup.frame.as_ref(), eta, win).map(|r| r.ratio).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn weight_profile(level: usize, samples: usize) -> Result<Vec<f64>, JsValue> {
    weight_profile_native(level, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bottom_eigenvalue(name: &str, n: usize) -> Result<f64, JsValue> {
    bottom_eigenvalue_native(name, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn quasimode_ratio(name: &str, eta: f64, length: f64) -> Result<f64, JsValue> {
    quasimode_ratio_native(name, eta, length).map_err(|e| JsValue::from_str(&e))
}

/// Names accepted by the two scenario bindings, comma separated.
#[wasm_bindgen]
pub fn scenario_names() -> String {
    hardy_core::scenarios::catalog_names().join(",")
}
