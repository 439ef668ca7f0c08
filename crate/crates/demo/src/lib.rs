//! Browser demo: Moreau splits in the plane, the example 1 AKKT sequence,
//! and penalty paths. The plain functions are what the tests exercise; the
//! `#[wasm_bindgen]` wrappers flatten their results into `Float64Array`s.

use ccvp_core::certify::{verify_akkt_certificate, VerifyConfig};
use ccvp_core::fixtures;
use ccvp_core::generate::{generate_akkt, PenaltyConfig};
use ccvp_core::{Cone, Problem};
use wasm_bindgen::prelude::*;

/// `y = negative + polar` with `negative ∈ −Θ`, `polar ∈ Θ₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub negative: [f64; 2],
    pub polar: [f64; 2],
}

pub fn planar_cone(name: &str) -> Result<Cone, String> {
    let cone = match name {
        "orthant" => Cone::orthant(2),
        "zero" => Cone::zero(2),
        "soc" => Cone::second_order(2),
        "zero-orthant" => Cone::product(vec![Cone::Zero(1), Cone::Orthant(1)]),
        other => return Err(format!("unknown cone '{other}'")),
    };
    cone.map_err(|e| e.to_string())
}

pub fn split(cone: &str, y: [f64; 2]) -> Result<Split, String> {
    let c = planar_cone(cone)?;
    let neg = c.project_negative(&y).map_err(|e| e.to_string())?;
    let pol = c.project_polar(&y).map_err(|e| e.to_string())?;
    Ok(Split {
        negative: [neg[0], neg[1]],
        polar: [pol[0], pol[1]],
    })
}

/// `(k, stationarity, complementarity, ‖μ^k‖)` for the closed-form
/// sequence, `k = first..=last`.
pub fn example1_rows(first: u32, last: u32) -> Result<Vec<[f64; 4]>, String> {
    if first == 0 || last < first || last > 100_000 {
        return Err(format!("need 1 <= first <= last <= 100000, got {first}..{last}"));
    }
    let fx = fixtures::example(1).map_err(|e| e.to_string())?;
    let cert = fixtures::example1_certificate(first, last);
    let rep = verify_akkt_certificate(&fx.problem, &cert, &VerifyConfig::default()).map_err(|e| e.to_string())?;
    Ok(rep
        .residuals
        .iter()
        .zip(&rep.mu_norms)
        .zip(first..)
        .map(|((r, mu), k)| [k as f64, r.stationarity, r.complementarity, *mu])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub rho: f64,
    pub x: [f64; 2],
    pub mu_norm: f64,
    pub complementarity: f64,
}

fn demo_problem(id: u32) -> Result<Problem, String> {
    match id {
        0 => Ok(fixtures::convex_bi_objective()),
        1 => fixtures::example(1).map(|f| f.problem).map_err(|e| e.to_string()),
        other => Err(format!("unknown demo problem {other}")),
    }
}

/// Problem 0 is the convex bi-objective fixture, problem 1 is example 1;
/// the weights are `(λ₁, 1 − λ₁)`.
pub fn penalty_path(problem: u32, lambda1: f64, x0: [f64; 2], outer: usize) -> Result<Vec<PathPoint>, String> {
    if !(0.0..=1.0).contains(&lambda1) {
        return Err(format!("lambda1 must lie in [0, 1], got {lambda1}"));
    }
    if outer == 0 || outer > 14 {
        return Err(format!("outer iterations must be 1..=14, got {outer}"));
    }
    let prob = demo_problem(problem)?;
    let cfg = PenaltyConfig {
        outer_iters: outer,
        ..PenaltyConfig::default()
    };
    let g = generate_akkt(&prob, &[lambda1, 1.0 - lambda1], &x0, &cfg).map_err(|e| e.to_string())?;
    g.outer
        .iter()
        .map(|o| {
            let gx = prob.eval_constraints(&o.x).map_err(|e| e.to_string())?;
            let c: f64 = o.mu.iter().zip(&gx).map(|(m, v)| m * v).sum();
            Ok(PathPoint {
                rho: o.rho,
                x: [o.x[0], o.x[1]],
                mu_norm: o.mu.iter().map(|m| m * m).sum::<f64>().sqrt(),
                complementarity: c.abs(),
            })
        })
        .collect()
}

/// `[neg₀, neg₁, polar₀, polar₁]`.
#[wasm_bindgen(js_name = moreauSplit)]
pub fn moreau_split_js(cone: &str, y0: f64, y1: f64) -> Result<Vec<f64>, JsError> {
    let s = split(cone, [y0, y1]).map_err(|e| JsError::new(&e))?;
    Ok(vec![s.negative[0], s.negative[1], s.polar[0], s.polar[1]])
}

/// Rows of four: `k, stationarity, complementarity, ‖μ‖`.
#[wasm_bindgen(js_name = example1Residuals)]
pub fn example1_residuals_js(first: u32, last: u32) -> Result<Vec<f64>, JsError> {
    let rows = example1_rows(first, last).map_err(|e| JsError::new(&e))?;
    Ok(rows.into_iter().flatten().collect())
}

/// Rows of five: `ρ, x₁, x₂, ‖μ‖, |⟨μ, g(x)⟩|`.
#[wasm_bindgen(js_name = penaltyPath)]
pub fn penalty_path_js(problem: u32, lambda1: f64, x0: f64, x1: f64, outer: u32) -> Result<Vec<f64>, JsError> {
    let path = penalty_path(problem, lambda1, [x0, x1], outer as usize).map_err(|e| JsError::new(&e))?;
    Ok(path
        .into_iter()
        .flat_map(|p| [p.rho, p.x[0], p.x[1], p.mu_norm, p.complementarity])
        .collect())
}
