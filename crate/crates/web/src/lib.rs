//! wasm-bindgen bindings for the browser demo in `www/`. Every function takes
//! the payoff matrix as JSON rows and returns JSON.

use fixgame::{residual, Norm, ProductPoint, SolveError, SolverConfig, ZeroSumGame};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn game(payoffs: &str) -> Result<ZeroSumGame, String> {
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(payoffs).map_err(|e| format!("payoffs must be a JSON matrix: {e}"))?;
    ZeroSumGame::new(rows).map_err(|e| e.to_string())
}

fn norm(name: &str) -> Result<Norm, String> {
    name.parse()
}

fn json(value: &impl Serialize) -> String {
    serde_json::to_string(value).expect("serializable")
}

#[derive(Serialize)]
struct Heatmap {
    resolution: u32,
    /// `cells[i][j]` is the residual at `p = (i/r, 1 - i/r)`, `q = (j/r, 1 - j/r)`.
    cells: Vec<Vec<f64>>,
    orbit: Vec<(f64, f64)>,
}

/// Residual of the excess-gain map over the unit square of a 2x2 game, and
/// the orbit of `(p, q)` under the map.
pub fn heatmap_json(payoffs: &str, resolution: u32, p: f64, q: f64, steps: u32) -> Result<String, String> {
    let g = game(payoffs)?;
    if g.dims() != (2, 2) {
        return Err("the heatmap needs a 2x2 game".into());
    }
    if resolution == 0 || resolution > 1000 {
        return Err("resolution must be in 1..=1000".into());
    }
    let pair = |a: f64, b: f64| ProductPoint::from_weights(vec![a, 1.0 - a], vec![b, 1.0 - b]);
    let r = f64::from(resolution);
    let map = g.gamma_map();
    let cells = (0..=resolution)
        .map(|i| {
            (0..=resolution)
                .map(|j| {
                    let x = pair(f64::from(i) / r, f64::from(j) / r).expect("grid point");
                    residual(&map, &x, Norm::Euclidean).expect("dimensions match")
                })
                .collect()
        })
        .collect();
    let mut x = pair(p.clamp(0.0, 1.0), q.clamp(0.0, 1.0)).map_err(|e| e.to_string())?;
    let mut orbit = vec![(x.row.weights()[0], x.col.weights()[0])];
    for _ in 0..steps.min(10_000) {
        x = g.gamma(&x).map_err(|e| e.to_string())?;
        orbit.push((x.row.weights()[0], x.col.weights()[0]));
    }
    Ok(json(&Heatmap { resolution, cells, orbit }))
}

#[derive(Serialize)]
struct Solution {
    certified: bool,
    profile: ProductPoint,
    value: f64,
    lambda: f64,
    lambda_prime: f64,
    #[serde(rename = "v_A")]
    v_a: f64,
    #[serde(rename = "v_B")]
    v_b: f64,
    residual: f64,
    tolerance: f64,
    epsilon_schedule: Vec<f64>,
    cauchy_moduli: Vec<f64>,
    iterates: Vec<ProductPoint>,
}

pub fn solve_json(payoffs: &str, epsilon: f64, mesh: u32, norm_name: &str) -> Result<String, String> {
    let g = game(payoffs)?;
    let mut config = SolverConfig::default().with_norm(norm(norm_name)?);
    config.epsilon = epsilon;
    config.search.base_mesh = u64::from(mesh);
    let r = match g.solve(&config) {
        Ok(r) => r,
        Err(SolveError::NotCertified { result, .. }) => *result,
        Err(e) => return Err(e.to_string()),
    };
    Ok(json(&Solution {
        certified: r.certified,
        profile: r.profile,
        value: r.value,
        lambda: r.lambda,
        lambda_prime: r.lambda_prime,
        v_a: r.v_a,
        v_b: r.v_b,
        residual: r.residual,
        tolerance: r.tolerance,
        epsilon_schedule: r.trace.epsilon_schedule,
        cauchy_moduli: r.trace.cauchy_moduli,
        iterates: r.trace.iterates.into_iter().map(|a| a.point).collect(),
    }))
}

pub fn probe_json(payoffs: &str, delta: f64, epsilons: &str, mesh: u32) -> Result<String, String> {
    let g = game(payoffs)?;
    let eps: Vec<f64> = epsilons
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad epsilon {s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let report = g
        .assumption1_probe(delta, &eps, u64::from(mesh), Norm::Euclidean)
        .map_err(|e| e.to_string())?;
    Ok(json(&report))
}

#[wasm_bindgen]
pub fn heatmap(payoffs: &str, resolution: u32, p: f64, q: f64, steps: u32) -> Result<String, JsError> {
    heatmap_json(payoffs, resolution, p, q, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(payoffs: &str, epsilon: f64, mesh: u32, norm: &str) -> Result<String, JsError> {
    solve_json(payoffs, epsilon, mesh, norm).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn probe(payoffs: &str, delta: f64, epsilons: &str, mesh: u32) -> Result<String, JsError> {
    probe_json(payoffs, delta, epsilons, mesh).map_err(|e| JsError::new(&e))
}
