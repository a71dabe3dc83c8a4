//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns plain numbers or strings (`Result<_, String>` maps
//! to a thrown JS error), so the same functions are tested natively.

use wasm_bindgen::prelude::*;

use nvmo::bounds::{beta_value, theorem1_bounds};
use nvmo::graph::Digraph;
use nvmo::liegroup::{pose_average, Rotation};
use nvmo::sim::{presets, Simulation};

/// Values per row returned by [`run_reference`].
pub const ROW: usize = 7;

/// Runs the five-camera reference setup and returns every `stride`-th
/// sample as flat rows `[t, U_p, U_R, eps_bound_p, eps_bound_R, rho_p, rho_R]`.
#[wasm_bindgen]
pub fn run_reference(
    moving: bool,
    k_e: f64,
    k_s: f64,
    dt: f64,
    horizon: f64,
    stride: usize,
) -> Result<Vec<f64>, String> {
    let mut sc = if moving {
        presets::reference_moving(k_e, k_s)
    } else {
        presets::reference_static(k_e, k_s)
    };
    sc.dt = dt;
    sc.horizon = horizon;
    let stride = stride.max(1);
    let mut sim = Simulation::new(&sc, 0).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(ROW * (sc.steps() / stride + 2));
    loop {
        let r = sim.record().map_err(|e| e.to_string())?;
        if sim.step_index() % stride == 0 || sim.is_done() {
            out.extend_from_slice(&[r.t, r.u_p, r.u_r, r.eps_bound_p, r.eps_bound_r, r.rho_p, r.rho_r]);
        }
        if sim.is_done() {
            break;
        }
        sim.advance().map_err(|e| e.to_string())?;
    }
    Ok(out)
}

/// `beta` of the reference targets for slack `c`.
#[wasm_bindgen]
pub fn reference_beta(c: f64) -> Result<f64, String> {
    let targets = presets::target_poses();
    let rots: Vec<Rotation> = targets.iter().map(|g| g.rot).collect();
    let g = pose_average(&targets).map_err(|e| e.to_string())?;
    beta_value(&rots, &g.rot, c).map_err(|e| e.to_string())
}

/// `[eps_p, eps_R]` averaging levels.
#[wasm_bindgen]
pub fn averaging_levels(k_e: f64, k_s: f64, w: u32, beta: f64, epsilon: f64) -> Result<Vec<f64>, String> {
    let (p, r) = theorem1_bounds(k_e, k_s, u64::from(w), beta, epsilon).map_err(|e| e.to_string())?;
    Ok(vec![p, r])
}

/// Graph constant of an undirected graph given as `"1-2, 2-3, ..."`.
/// Returns `W`, the witness root and its edges with loads as JSON.
#[wasm_bindgen]
pub fn graph_constant(n: usize, edges: &str) -> Result<String, String> {
    let mut pairs = Vec::new();
    for item in edges.split([',', ';', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item
            .split_once('-')
            .ok_or_else(|| format!("expected `a-b`, got `{item}`"))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad node id `{}`", s.trim()))
        };
        pairs.push((parse(a)?, parse(b)?));
    }
    let g = Digraph::bidirectional(n, pairs).map_err(|e| e.to_string())?;
    let w = g.compute_w().map_err(|e| e.to_string())?;
    let edges: Vec<serde_json::Value> = w
        .witness
        .tree_edges
        .iter()
        .map(|(a, b)| serde_json::json!({ "a": a, "b": b, "load": w.witness.per_edge_load[&(*a, *b)] }))
        .collect();
    Ok(serde_json::json!({ "w": w.w, "root": w.witness.root, "edges": edges }).to_string())
}
