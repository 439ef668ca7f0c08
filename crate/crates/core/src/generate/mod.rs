//! AKKT certificates from an exterior quadratic penalty on the weighted-sum
//! scalarization:
//!
//! ```text
//! P_ρ(x) = Σλᵢfᵢ(x) + (ρ/2)·dist(g(x), −Θ)²,   μ = ρ·Π_{Θ₊}(g(x))
//! ```
//!
//! `∇P_ρ(x) = Σλᵢ∇fᵢ(x) + ∇g(x)*μ`, so the inner stationarity residual is the
//! AKKT stationarity residual of `(x, μ)`.

use nalgebra::{DMatrix, DVector};

use crate::certify::{simplex_defect, AkktCertificate, AkktStep};
use crate::cone::{dot, norm};
use crate::error::{Error, Result};
use crate::model::{check_len, Problem};

const DIVERGENCE_NORM: f64 = 1e8;
const MIN_STEP: f64 = 1e-20;
const POLISH_STEPS: usize = 100;

/// Search direction of the inner solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentRule {
    /// `−∇P`.
    SteepestDescent,
    /// Newton step on the generalized Hessian of `P_ρ`, shifted towards the
    /// identity until positive definite.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Armijo {
    pub c: f64,
    pub backtrack: f64,
    pub initial_step: f64,
}

impl Default for Armijo {
    fn default() -> Self {
        Self {
            c: 1e-4,
            backtrack: 0.5,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub rho0: f64,
    pub gamma: f64,
    pub outer_iters: usize,
    /// `ε_k = eps0 / γᵏ`.
    pub eps0: f64,
    pub inner_max_steps: usize,
    pub armijo: Armijo,
    pub rule: DescentRule,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            rho0: 1.0,
            gamma: 10.0,
            outer_iters: 12,
            eps0: 1e-2,
            inner_max_steps: 5000,
            armijo: Armijo::default(),
            rule: DescentRule::Newton,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.armijo;
        let ok = self.rho0 > 0.0
            && self.rho0.is_finite()
            && self.gamma > 1.0
            && self.gamma.is_finite()
            && self.outer_iters > 0
            && self.eps0 > 0.0
            && self.inner_max_steps > 0
            && a.c > 0.0
            && a.c < 1.0
            && a.backtrack > 0.0
            && a.backtrack < 1.0
            && a.initial_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Usage(format!("invalid penalty configuration: {self:?}")))
        }
    }

    pub fn rho(&self, k: usize) -> f64 {
        self.rho0 * self.gamma.powi(k as i32)
    }

    pub fn eps(&self, k: usize) -> f64 {
        self.eps0 / self.gamma.powi(k as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub mu: Vec<f64>,
}

fn check_lambda(problem: &Problem, lambda: &[f64]) -> Result<()> {
    check_len("lambda", lambda, problem.m())?;
    let d = simplex_defect(lambda);
    if d > 1e-9 {
        return Err(Error::Usage(format!("lambda is not on the unit simplex (defect {d:e})")));
    }
    Ok(())
}

pub fn penalty_value_grad(problem: &Problem, lambda: &[f64], rho: f64, x: &[f64]) -> Result<PenaltyEval> {
    check_lambda(problem, lambda)?;
    penalty_eval(problem, lambda, rho, x)
}

fn penalty_eval(problem: &Problem, lambda: &[f64], rho: f64, x: &[f64]) -> Result<PenaltyEval> {
    let ev = problem.evaluate(x)?;
    let proj = problem.cone().project_polar(&ev.g)?;
    let mu: Vec<f64> = proj.iter().map(|v| rho * v).collect();
    let value = dot(lambda, &ev.f) + 0.5 * rho * dot(&proj, &proj);
    let gradient: Vec<f64> = ev
        .weighted_gradient(lambda)
        .iter()
        .zip(ev.adjoint(&mu))
        .map(|(a, b)| a + b)
        .collect();
    Ok(PenaltyEval { value, gradient, mu })
}

/// `Σλᵢ∇²fᵢ + Σμⱼ∇²gⱼ + ρ·∇gᵀ·DΠ_{Θ₊}(g)·∇g`.
fn generalized_hessian(problem: &Problem, lambda: &[f64], rho: f64, x: &[f64], mu: &[f64]) -> Result<DMatrix<f64>> {
    let n = problem.n();
    let p = problem.p();
    let mut h = DMatrix::zeros(n, n);
    for (i, &l) in lambda.iter().enumerate() {
        if l != 0.0 {
            h += DMatrix::from_row_slice(n, n, &problem.objective_hessian(i, x)) * l;
        }
    }
    for (j, &m) in mu.iter().enumerate() {
        if m != 0.0 {
            h += DMatrix::from_row_slice(n, n, &problem.constraint_hessian(j, x)) * m;
        }
    }
    let ev = problem.evaluate(x)?;
    let jac = DMatrix::from_fn(p, n, |r, c| ev.jac_g[r][c]);
    let dpi = DMatrix::from_row_slice(p, p, &problem.cone().polar_projection_jacobian(&ev.g)?);
    h += jac.transpose() * dpi * &jac * rho;
    Ok(h)
}

fn newton_direction(h: DMatrix<f64>, grad: &[f64]) -> Option<Vec<f64>> {
    let n = grad.len();
    let g = DVector::from_column_slice(grad);
    let scale = h.amax().max(1.0);
    let mut shift = 0.0;
    for _ in 0..40 {
        let shifted = &h + DMatrix::identity(n, n) * shift;
        if let Some(ch) = shifted.cholesky() {
            let d = -ch.solve(&g);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d.iter().copied().collect());
            }
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
    }
    None
}

/// One accepted line-search step: `value_after ≤ value_before + c·step·slope`
/// with `slope = ⟨∇P, d⟩ < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptedStep {
    pub step: f64,
    pub slope: f64,
    pub value_before: f64,
    pub value_after: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub grad_norm: f64,
    pub steps: usize,
    /// `‖∇P‖ ≤ ε` reached.
    pub converged: bool,
    /// The line search found no decrease above rounding level.
    pub stalled: bool,
    pub accepted: Vec<AcceptedStep>,
    /// Steps taken after a stall, accepted on a decrease of `‖∇P‖` instead of
    /// `P`.
    pub polish_steps: usize,
}

fn finite_or_err(x: &[f64], pe: &PenaltyEval) -> Result<()> {
    if pe.value.is_finite() && pe.gradient.iter().chain(&pe.mu).all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical { x: x.to_vec() })
    }
}

/// Armijo line search from `x_start` until `‖∇P_ρ‖ ≤ eps`, the step budget
/// runs out, or the line search stalls. Only the last two are reported, not
/// raised.
pub fn inner_minimize(
    problem: &Problem,
    lambda: &[f64],
    rho: f64,
    x_start: &[f64],
    eps: f64,
    config: &PenaltyConfig,
) -> Result<InnerResult> {
    config.validate()?;
    check_lambda(problem, lambda)?;
    check_len("x_start", x_start, problem.n())?;
    let arm = config.armijo;
    let mut x = x_start.to_vec();
    let mut pe = penalty_eval(problem, lambda, rho, &x)?;
    finite_or_err(&x, &pe)?;
    let mut accepted = Vec::new();
    let mut stalled = false;
    let mut steps = 0;
    while steps < config.inner_max_steps {
        let gn = norm(&pe.gradient);
        if gn <= eps {
            break;
        }
        let (d, slope) = direction(problem, lambda, rho, &x, &pe, config.rule)?;
        let mut t = arm.initial_step;
        let next = loop {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let cand = penalty_eval(problem, lambda, rho, &xt)?;
            let finite = finite_or_err(&xt, &cand).is_ok();
            if finite && cand.value < pe.value && cand.value <= pe.value + arm.c * t * slope {
                break Some((xt, cand, t));
            }
            t *= arm.backtrack;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((xt, cand, t)) = next else {
            stalled = true;
            break;
        };
        accepted.push(AcceptedStep {
            step: t,
            slope,
            value_before: pe.value,
            value_after: cand.value,
            grad_norm: gn,
        });
        x = xt;
        pe = cand;
        steps += 1;
    }
    let mut polish_steps = 0;
    if stalled {
        while polish_steps < POLISH_STEPS && norm(&pe.gradient) > eps {
            let gn = norm(&pe.gradient);
            let (d, _) = direction(problem, lambda, rho, &x, &pe, config.rule)?;
            let mut t = arm.initial_step;
            let mut next = None;
            while t >= MIN_STEP {
                let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                let cand = penalty_eval(problem, lambda, rho, &xt)?;
                if finite_or_err(&xt, &cand).is_ok() && norm(&cand.gradient) < gn {
                    next = Some((xt, cand));
                    break;
                }
                t *= arm.backtrack;
            }
            let Some((xt, cand)) = next else { break };
            x = xt;
            pe = cand;
            polish_steps += 1;
        }
    }
    let grad_norm = norm(&pe.gradient);
    Ok(InnerResult {
        converged: grad_norm <= eps,
        x,
        mu: pe.mu,
        grad_norm,
        steps,
        stalled,
        accepted,
        polish_steps,
    })
}

/// Search direction and its slope `⟨∇P, d⟩`; falls back to `−∇P` when the
/// Newton system fails or does not give descent.
fn direction(
    problem: &Problem,
    lambda: &[f64],
    rho: f64,
    x: &[f64],
    pe: &PenaltyEval,
    rule: DescentRule,
) -> Result<(Vec<f64>, f64)> {
    let steepest: Vec<f64> = pe.gradient.iter().map(|v| -v).collect();
    let d = match rule {
        DescentRule::SteepestDescent => None,
        DescentRule::Newton => {
            let h = generalized_hessian(problem, lambda, rho, x, &pe.mu)?;
            newton_direction(h, &pe.gradient)
        }
    };
    if let Some(d) = d {
        let slope = dot(&pe.gradient, &d);
        if slope < 0.0 {
            return Ok((d, slope));
        }
    }
    let slope = -dot(&pe.gradient, &pe.gradient);
    Ok((steepest, slope))
}

/// Per outer iteration summary.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub k: usize,
    pub rho: f64,
    pub eps: f64,
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub grad_norm: f64,
    pub inner_steps: usize,
    pub converged: bool,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub certificate: AkktCertificate,
    pub outer: Vec<OuterRecord>,
}

/// Runs `k = 0..outer_iters` with `ρ_k = ρ₀γᵏ` and `ε_k = ε₀/γᵏ`, warm
/// starting each inner solve; the limit is the last iterate.
pub fn generate_akkt(problem: &Problem, lambda: &[f64], x0: &[f64], config: &PenaltyConfig) -> Result<Generated> {
    config.validate()?;
    check_lambda(problem, lambda)?;
    check_len("x0", x0, problem.n())?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Usage("x0 must be finite".into()));
    }
    let mut x = x0.to_vec();
    let mut steps = Vec::with_capacity(config.outer_iters);
    let mut outer = Vec::with_capacity(config.outer_iters);
    let mut trajectory = vec![x.clone()];
    for k in 0..config.outer_iters {
        let (rho, eps) = (config.rho(k), config.eps(k));
        let inner = inner_minimize(problem, lambda, rho, &x, eps, config)?;
        let xn = norm(&inner.x);
        trajectory.push(inner.x.clone());
        if xn > DIVERGENCE_NORM {
            return Err(Error::Divergence {
                iteration: k,
                norm: xn,
                trajectory,
            });
        }
        x = inner.x.clone();
        steps.push(AkktStep {
            x: inner.x.clone(),
            mu: inner.mu.clone(),
        });
        outer.push(OuterRecord {
            k,
            rho,
            eps,
            x: inner.x,
            mu: inner.mu,
            grad_norm: inner.grad_norm,
            inner_steps: inner.steps,
            converged: inner.converged,
            stalled: inner.stalled,
        });
    }
    Ok(Generated {
        certificate: AkktCertificate {
            lambda: lambda.to_vec(),
            limit: x,
            steps,
        },
        outer,
    })
}
