//! Browser bindings. Each export takes plain numbers or a JSON string and
//! returns a JSON string; the `demo` functions behind them are ordinary
//! Rust and are tested natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js<T: serde::Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// The toy portfolio matrix as 33 row-major 0/1 cells.
#[wasm_bindgen(js_name = toyDefault)]
pub fn toy_default() -> Vec<u8> {
    demo::toy_default()
}

/// γ, Γ and diversification of an edited toy portfolio matrix, against the
/// fixed toy relatedness matrix.
#[wasm_bindgen(js_name = toyCoherence)]
pub fn toy_coherence(cells: &[u8]) -> Result<String, JsError> {
    to_js(demo::toy_coherence(cells))
}

/// Generate a synthetic population from a (partial) generator config and
/// run the full pipeline on it.
#[wasm_bindgen(js_name = synthExplore)]
pub fn synth_explore(config_json: &str) -> Result<String, JsError> {
    to_js(demo::synth_explore(config_json))
}

/// Heat grid of mean response rank over an equal-width x × y grid.
#[wasm_bindgen(js_name = heatGrid)]
pub fn heat_grid(
    x: &[f64],
    y: &[f64],
    response: &[f64],
    cells: usize,
    min_count: usize,
) -> Result<String, JsError> {
    to_js(demo::heat_grid(x, y, response, cells, min_count))
}
