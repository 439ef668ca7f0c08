//! Constraint qualifications at a feasible point: RCQ, MFCQ, the
//! perturbation map `K(x, r) = {∇g(x)*μ : μ ∈ Θ₊, |⟨μ, g(x)⟩| ≤ r}` and a
//! sampling probe for AKKT-regularity.

mod lp;
mod probe;

pub use lp::{lp_solve, LinearProgram, LpSolution, LpStatus, RowSense};
pub use probe::{perturbation_sample, probe_akkt_regularity, PerturbationMapSample, ProbeConfig, ProbeReport};

use nalgebra::DMatrix;

use crate::cone::{norm, BlockKind};
use crate::error::{Error, Result};
use crate::lsq::{ConstrainedLsq, Domain};
use crate::model::{check_len, Evaluation, Problem};

/// Feasibility slack for the `x̄ ∈ F` precondition.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// An orthant component with `g_j(x̄) ≥ −ACTIVE_TOL` counts as active.
pub const ACTIVE_TOL: f64 = 1e-8;
const MAX_RCQ_DIM: usize = 50;
const MFCQ_BOX: f64 = 1e3;
const MFCQ_SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RcqResult {
    pub holds: bool,
    /// A signed unit vector `±e_j` outside the generated cone.
    pub failing_direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfcqResult {
    pub holds: bool,
    pub witness_d: Option<Vec<f64>>,
    /// Optimal `t` of the LP; negative exactly when a strictly feasible
    /// linearized direction exists.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CqReport {
    pub rcq: RcqResult,
    /// `None` when `int Θ` is empty.
    pub mfcq: Option<MfcqResult>,
    pub regularity_probe: Option<ProbeReport>,
}

fn require_polyhedral(problem: &Problem, what: &str) -> Result<()> {
    if problem.cone().is_polyhedral() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{what} is implemented for orthant/zero cones only, got {}",
            problem.cone()
        )))
    }
}

fn feasible_evaluation(problem: &Problem, x_bar: &[f64]) -> Result<Evaluation> {
    check_len("x_bar", x_bar, problem.n())?;
    let ev = problem.evaluate(x_bar)?;
    let d = problem.cone().distance_to_negative_cone(&ev.g)?;
    if d > FEASIBILITY_TOL {
        return Err(Error::Precondition(format!(
            "x_bar is infeasible (distance to -cone {d:e})"
        )));
    }
    Ok(ev)
}

/// Checks `∇g(x̄)(Rⁿ) + cone(Θ + g(x̄)) = Rᵖ` by testing `±e_j` membership in
/// the cone spanned by `±∇g(x̄)` columns, the generators of `Θ`, and `g(x̄)`.
pub fn check_rcq(problem: &Problem, x_bar: &[f64]) -> Result<RcqResult> {
    require_polyhedral(problem, "RCQ")?;
    let p = problem.p();
    if p > MAX_RCQ_DIM {
        return Err(Error::Unsupported(format!("RCQ check supports p <= {MAX_RCQ_DIM}, got {p}")));
    }
    let ev = feasible_evaluation(problem, x_bar)?;
    let n = problem.n();
    let orthant: Vec<usize> = problem
        .cone()
        .blocks()
        .into_iter()
        .filter(|b| b.kind == BlockKind::Orthant)
        .flat_map(|b| b.range())
        .collect();
    let cols = n + orthant.len() + 1;
    let mut a = DMatrix::zeros(p, cols);
    for j in 0..p {
        for k in 0..n {
            a[(j, k)] = ev.jac_g[j][k];
        }
        a[(j, cols - 1)] = ev.g[j];
    }
    for (c, &j) in orthant.iter().enumerate() {
        a[(j, n + c)] = 1.0;
    }
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
    bounds.extend(std::iter::repeat_n((0.0, f64::INFINITY), cols - n));
    for j in 0..p {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; p];
            e[j] = sign;
            let lp = LinearProgram::new(a.clone(), e.clone(), vec![0.0; cols], vec![RowSense::Eq; p])
                .with_bounds(bounds.clone());
            if lp_solve(&lp)?.status == LpStatus::Infeasible {
                return Ok(RcqResult {
                    holds: false,
                    failing_direction: Some(e),
                });
            }
        }
    }
    Ok(RcqResult {
        holds: true,
        failing_direction: None,
    })
}

/// Solves `min t` over `(d, t)` with `g_j(x̄) + ⟨∇g_j(x̄), d⟩ ≤ t` and
/// `‖d‖_∞ ≤ 10³`. Returns `None` when `int Θ = ∅`.
pub fn check_mfcq(problem: &Problem, x_bar: &[f64]) -> Result<Option<MfcqResult>> {
    require_polyhedral(problem, "MFCQ")?;
    if problem.cone().interior_direction().is_none() {
        return Ok(None);
    }
    let ev = feasible_evaluation(problem, x_bar)?;
    let (n, p) = (problem.n(), problem.p());
    let mut a = DMatrix::zeros(p, n + 1);
    let mut b = vec![0.0; p];
    for j in 0..p {
        for k in 0..n {
            a[(j, k)] = ev.jac_g[j][k];
        }
        a[(j, n)] = -1.0;
        b[j] = -ev.g[j];
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut bounds = vec![(-MFCQ_BOX, MFCQ_BOX); n];
    bounds.push((f64::NEG_INFINITY, f64::INFINITY));
    let sol = lp_solve(&LinearProgram::new(a, b, c, vec![RowSense::Le; p]).with_bounds(bounds))?;
    let x = match sol.status {
        LpStatus::Optimal => sol.x.expect("optimal LP has a solution"),
        // p = 0: nothing to satisfy, every direction works
        LpStatus::Unbounded => vec![0.0; n + 1],
        LpStatus::Infeasible => unreachable!("the MFCQ LP is always feasible"),
    };
    let slack = if sol.status == LpStatus::Unbounded { f64::NEG_INFINITY } else { x[n] };
    let holds = slack < -MFCQ_SLACK_TOL;
    Ok(Some(MfcqResult {
        holds,
        witness_d: holds.then(|| x[..n].to_vec()),
        slack,
    }))
}

/// Generators of `K(x̄, 0)`: the rows `∇g_j(x̄)` with coefficient domains
/// from complementarity (inactive orthant rows drop out).
pub(crate) struct ConeAtPoint {
    a: DMatrix<f64>,
    domains: Vec<Domain>,
}

impl ConeAtPoint {
    pub(crate) fn new(problem: &Problem, x_bar: &[f64]) -> Result<Self> {
        require_polyhedral(problem, "K(x, 0)")?;
        let ev = feasible_evaluation(problem, x_bar)?;
        let mut rows = Vec::new();
        let mut domains = Vec::new();
        for b in problem.cone().blocks() {
            for j in b.range() {
                let dom = match b.kind {
                    BlockKind::Zero => Domain::Free,
                    BlockKind::Orthant if ev.g[j] >= -ACTIVE_TOL => Domain::NonNeg,
                    _ => continue,
                };
                rows.push(j);
                domains.push(dom);
            }
        }
        let n = problem.n();
        let mut a = DMatrix::zeros(n, rows.len());
        for (c, &j) in rows.iter().enumerate() {
            for k in 0..n {
                a[(k, c)] = ev.jac_g[j][k];
            }
        }
        Ok(Self { a, domains })
    }

    pub(crate) fn distance(&self, w: &[f64]) -> f64 {
        if self.domains.is_empty() {
            return norm(w);
        }
        let lsq = ConstrainedLsq::new(self.a.clone(), w.to_vec(), self.domains.clone(), None);
        lsq.solve(&vec![0.0; self.domains.len()], 5_000, 1e-14).residual
    }
}

/// `dist(w, K(x̄, 0))`.
pub fn distance_to_k0(problem: &Problem, x_bar: &[f64], w: &[f64]) -> Result<f64> {
    check_len("w", w, problem.n())?;
    Ok(ConeAtPoint::new(problem, x_bar)?.distance(w))
}

/// RCQ and MFCQ, plus the regularity probe when a config is given.
pub fn cq_report(problem: &Problem, x_bar: &[f64], probe: Option<&ProbeConfig>) -> Result<CqReport> {
    Ok(CqReport {
        rcq: check_rcq(problem, x_bar)?,
        mfcq: check_mfcq(problem, x_bar)?,
        regularity_probe: probe.map(|c| probe_akkt_regularity(problem, x_bar, c)).transpose()?,
    })
}
