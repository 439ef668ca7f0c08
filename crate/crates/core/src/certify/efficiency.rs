use super::AkktReport;
use crate::error::{Error, Result};
use crate::model::{check_len, Problem};

/// `ψ(x) = maxᵢ (fᵢ(x) − fᵢ(x̄))`. Nonnegative on a feasible neighborhood of
/// `x̄` exactly when `x̄` is locally weakly efficient.
pub fn max_scalarization(problem: &Problem, x_bar: &[f64], x: &[f64]) -> Result<f64> {
    let fb = problem.eval_objectives(x_bar)?;
    let fx = problem.eval_objectives(x)?;
    Ok(fx
        .iter()
        .zip(&fb)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        Self {
            lo: vec![lo; n],
            hi: vec![hi; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakEfficiencyVerdict {
    /// Grid evidence only; not a proof.
    pub weak_efficient_on_grid: bool,
    /// Feasible grid point with the smallest `ψ`, reported when it dominates.
    pub worst_point: Option<Vec<f64>>,
    pub min_psi: f64,
    pub feasible_points: usize,
}

const MAX_GRID_DIM: usize = 4;
/// Feasibility slack on grid points.
const GRID_FEAS_TOL: f64 = 1e-12;

/// Enumerates a uniform grid over `bounds` and looks for a feasible point
/// that strictly improves every objective, i.e. `ψ(x) < −tol`.
pub fn weak_efficiency_oracle(
    problem: &Problem,
    x_bar: &[f64],
    bounds: &GridBox,
    steps_per_dim: usize,
    tol: f64,
) -> Result<WeakEfficiencyVerdict> {
    let n = problem.n();
    if n > MAX_GRID_DIM {
        return Err(Error::Unsupported(format!(
            "grid oracle supports at most {MAX_GRID_DIM} variables, problem has {n}"
        )));
    }
    if steps_per_dim < 3 {
        return Err(Error::Usage("grid needs at least 3 steps per dimension".into()));
    }
    check_len("x_bar", x_bar, n)?;
    check_len("box lower bounds", &bounds.lo, n)?;
    check_len("box upper bounds", &bounds.hi, n)?;
    for (i, xb) in x_bar.iter().enumerate() {
        if !(bounds.lo[i] <= *xb && *xb <= bounds.hi[i]) {
            return Err(Error::Precondition(format!("x_bar[{i}] lies outside the box")));
        }
    }
    let fb = problem.eval_objectives(x_bar)?;
    let coord = |i: usize, s: usize| {
        bounds.lo[i] + (bounds.hi[i] - bounds.lo[i]) * s as f64 / (steps_per_dim - 1) as f64
    };
    let total = steps_per_dim.pow(n as u32);
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible_points = 0;
    for _ in 0..total {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = coord(i, idx[i]);
        }
        if problem.is_feasible(&x, GRID_FEAS_TOL)? {
            feasible_points += 1;
            let fx = problem.eval_objectives(&x)?;
            let psi = fx
                .iter()
                .zip(&fb)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            if best.as_ref().is_none_or(|(b, _)| psi < *b) {
                best = Some((psi, x.clone()));
            }
        }
        for k in idx.iter_mut() {
            *k += 1;
            if *k < steps_per_dim {
                break;
            }
            *k = 0;
        }
    }
    let (min_psi, point) = best.unwrap_or((f64::INFINITY, Vec::new()));
    let dominated = min_psi < -tol;
    Ok(WeakEfficiencyVerdict {
        weak_efficient_on_grid: !dominated,
        worst_point: dominated.then_some(point),
        min_psi,
        feasible_points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexClaim {
    GlobalWeakEfficient,
    NoClaim,
}

/// On a convex problem, a feasible limit of a converged AKKT certificate is a
/// global weak efficient solution.
pub fn convex_global_claim(problem: &Problem, report: &AkktReport) -> Result<ConvexClaim> {
    if !problem.is_convex() || !report.akkt_holds() {
        return Ok(ConvexClaim::NoClaim);
    }
    if !problem.is_feasible(&report.limit, report.config.tol_final)? {
        return Ok(ConvexClaim::NoClaim);
    }
    Ok(ConvexClaim::GlobalWeakEfficient)
}
