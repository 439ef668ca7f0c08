use super::{kkt_residual, simplex_defect, ResidualRecord};
use crate::cone::{distance, norm};
use crate::error::{Error, Result};
use crate::model::Problem;

/// One primal-dual pair `(x^k, μ^k)` of an AKKT sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct AkktStep {
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Weights on the simplex, a candidate limit `x̄`, and a finite sequence of
/// primal-dual pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct AkktCertificate {
    pub lambda: Vec<f64>,
    pub limit: Vec<f64>,
    pub steps: Vec<AkktStep>,
}

impl AkktCertificate {
    pub fn mu_norms(&self) -> Vec<f64> {
        self.steps.iter().map(|s| norm(&s.mu)).collect()
    }

    /// The constant sequence `x^k ≡ x̄`, `μ^k ≡ μ` of length `len`.
    pub fn constant(lambda: Vec<f64>, x_bar: Vec<f64>, mu: Vec<f64>, len: usize) -> Self {
        let steps = (0..len.max(1))
            .map(|_| AkktStep {
                x: x_bar.clone(),
                mu: mu.clone(),
            })
            .collect();
        Self {
            lambda,
            limit: x_bar,
            steps,
        }
    }
}

/// Tolerances used to judge convergence of a finite sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub tol_final: f64,
    /// Fraction of the sequence, counted from the end, over which
    /// `‖x^k − x̄‖` must be non-increasing.
    pub tail_fraction: f64,
    pub bakkt_bound: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol_final: 1e-6,
            tail_fraction: 0.25,
            bakkt_bound: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AkktReport {
    pub lambda: Vec<f64>,
    pub limit: Vec<f64>,
    /// Per step, stationarity taken with `∇fᵢ` at the limit.
    pub residuals: Vec<ResidualRecord>,
    /// Per step, stationarity taken with `∇fᵢ(x^k)`; diagnostic only.
    pub variant_stationarity: Vec<f64>,
    pub limit_distances: Vec<f64>,
    pub mu_norms: Vec<f64>,
    pub converged_a0: bool,
    pub converged_a1: bool,
    pub converged_a2: bool,
    pub tail_mu_norm_sup: f64,
    pub bakkt: bool,
    pub config: VerifyConfig,
}

impl AkktReport {
    pub fn akkt_holds(&self) -> bool {
        self.converged_a0 && self.converged_a1 && self.converged_a2
    }

    pub fn last(&self) -> &ResidualRecord {
        self.residuals.last().expect("non-empty report")
    }
}

fn tail_len(len: usize, fraction: f64) -> usize {
    ((len as f64 * fraction).ceil() as usize).clamp(1, len)
}

/// Multiplier-boundedness judgment on a finite sequence of norms.
///
/// Requires the tail supremum to be finite and at most `bound`, and the
/// sequence not to be diverging: the supremum over the last quarter may be
/// at most twice the supremum over the first quarter, unless it is at most 1.
pub fn bakkt_from_norms(norms: &[f64], tail_fraction: f64, bound: f64) -> bool {
    if norms.is_empty() || norms.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let sup = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
    let tail = &norms[norms.len() - tail_len(norms.len(), tail_fraction)..];
    if sup(tail) > bound {
        return false;
    }
    let q = norms.len().div_ceil(4);
    let first = sup(&norms[..q]);
    let last = sup(&norms[norms.len() - q..]);
    last <= 2.0 * first || last <= 1.0
}

/// BAKKT judgment on a verified report; the AKKT flags themselves are the
/// caller's precondition and are not re-checked here.
pub fn check_bakkt(report: &AkktReport, bakkt_bound: f64) -> bool {
    bakkt_from_norms(&report.mu_norms, report.config.tail_fraction, bakkt_bound)
}

pub fn verify_akkt_certificate(
    problem: &Problem,
    cert: &AkktCertificate,
    config: &VerifyConfig,
) -> Result<AkktReport> {
    let (n, m, p) = (problem.n(), problem.m(), problem.p());
    if !(config.tail_fraction > 0.0 && config.tail_fraction <= 1.0) {
        return Err(Error::Usage(format!(
            "tail fraction must lie in (0, 1], got {}",
            config.tail_fraction
        )));
    }
    if cert.steps.is_empty() {
        return Err(Error::CertificateInvalid {
            step: 0,
            reason: "certificate has no steps".into(),
        });
    }
    if cert.lambda.len() != m || cert.limit.len() != n {
        return Err(Error::CertificateInvalid {
            step: 0,
            reason: format!(
                "lambda/limit lengths {}/{} do not match m = {m}, n = {n}",
                cert.lambda.len(),
                cert.limit.len()
            ),
        });
    }
    let sd = simplex_defect(&cert.lambda);
    if sd > 1e-12 {
        return Err(Error::CertificateInvalid {
            step: 0,
            reason: format!("lambda is not on the unit simplex (defect {sd:e})"),
        });
    }
    for (k, s) in cert.steps.iter().enumerate() {
        if s.x.len() != n || s.mu.len() != p {
            return Err(Error::CertificateInvalid {
                step: k,
                reason: format!("expected x of length {n} and mu of length {p}"),
            });
        }
        let slack = 1e-9 * norm(&s.mu).max(1.0);
        if !problem.cone().polar_contains(&s.mu, slack)? {
            return Err(Error::CertificateInvalid {
                step: k,
                reason: "mu is outside the polar cone".into(),
            });
        }
    }

    let mut residuals = Vec::with_capacity(cert.steps.len());
    let mut variant = Vec::with_capacity(cert.steps.len());
    for s in &cert.steps {
        residuals.push(kkt_residual(problem, &s.x, &cert.lambda, &s.mu, Some(&cert.limit))?);
        variant.push(kkt_residual(problem, &s.x, &cert.lambda, &s.mu, None)?.stationarity);
    }
    let limit_distances: Vec<f64> = cert.steps.iter().map(|s| distance(&s.x, &cert.limit)).collect();
    let mu_norms = cert.mu_norms();

    let tol = config.tol_final;
    let len = cert.steps.len();
    let tail = &limit_distances[len - tail_len(len, config.tail_fraction)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let last = residuals.last().unwrap();
    let tail_mu = &mu_norms[len - tail_len(len, config.tail_fraction)..];
    let tail_mu_norm_sup = tail_mu.iter().copied().fold(0.0, f64::max);
    let bakkt = bakkt_from_norms(&mu_norms, config.tail_fraction, config.bakkt_bound);

    Ok(AkktReport {
        lambda: cert.lambda.clone(),
        limit: cert.limit.clone(),
        converged_a0: *limit_distances.last().unwrap() <= tol && monotone,
        converged_a1: last.stationarity <= tol,
        converged_a2: last.complementarity <= tol,
        residuals,
        variant_stationarity: variant,
        limit_distances,
        mu_norms,
        tail_mu_norm_sup,
        bakkt,
        config: *config,
    })
}
