//! Certificate arithmetic: KKT residuals and multiplier search, AKKT
//! certificate verification, BAKKT boundedness, the max-scalarization and a
//! grid oracle for weak efficiency.

mod akkt;
mod certfile;
mod efficiency;

pub use akkt::{
    bakkt_from_norms, check_bakkt, verify_akkt_certificate, AkktCertificate, AkktReport, AkktStep,
    VerifyConfig,
};
pub use certfile::{parse_certificate, write_certificate};
pub use efficiency::{
    convex_global_claim, max_scalarization, weak_efficiency_oracle, ConvexClaim, GridBox,
    WeakEfficiencyVerdict,
};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{dot, norm, BlockKind};
use crate::error::{Error, Result};
use crate::lsq::{ConstrainedLsq, Domain};
use crate::model::{check_len, Problem};

/// Residuals of the KKT system for one `(x, λ, μ)` triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRecord {
    /// `‖∇g(x)*μ + Σλᵢ∇fᵢ(x_ref)‖`
    pub stationarity: f64,
    /// `|⟨μ, g(x)⟩|`
    pub complementarity: f64,
    /// `dist(g(x), −Θ)`
    pub feasibility: f64,
    /// `|Σλᵢ − 1| + Σ max(0, −λᵢ)`
    pub simplex_defect: f64,
    /// `dist(μ, Θ₊)`
    pub polar_defect: f64,
}

impl ResidualRecord {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.complementarity)
            .max(self.feasibility)
            .max(self.simplex_defect)
            .max(self.polar_defect)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn simplex_defect(lambda: &[f64]) -> f64 {
    (lambda.iter().sum::<f64>() - 1.0).abs() + lambda.iter().map(|l| (-l).max(0.0)).sum::<f64>()
}

/// KKT residuals at `x`; when `x_ref` is given the objective gradients are
/// taken there instead (the form used by the AKKT stationarity condition).
pub fn kkt_residual(
    problem: &Problem,
    x: &[f64],
    lambda: &[f64],
    mu: &[f64],
    x_ref: Option<&[f64]>,
) -> Result<ResidualRecord> {
    check_len("lambda", lambda, problem.m())?;
    check_len("mu", mu, problem.p())?;
    let at_x = problem.evaluate(x)?;
    let weighted = match x_ref {
        Some(r) => problem.evaluate(r)?.weighted_gradient(lambda),
        None => at_x.weighted_gradient(lambda),
    };
    let adj = at_x.adjoint(mu);
    let stat: Vec<f64> = adj.iter().zip(&weighted).map(|(a, b)| a + b).collect();
    let cone = problem.cone();
    Ok(ResidualRecord {
        stationarity: norm(&stat),
        complementarity: dot(mu, &at_x.g).abs(),
        feasibility: cone.distance_to_negative_cone(&at_x.g)?,
        simplex_defect: simplex_defect(lambda),
        polar_defect: cone.distance_to_polar(mu)?,
    })
}

/// Outcome of [`search_kkt_multipliers`].
#[derive(Debug, Clone, PartialEq)]
pub struct KktSearch {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub min_residual: f64,
    pub kkt_holds: bool,
}

const SEARCH_RESTARTS: usize = 12;
const SEARCH_SEED: u64 = 0x6b6b_7473;

/// Minimizes the stationarity residual over `λ` in the simplex and admissible
/// `μ ∈ Θ₊`. Complementarity is built into the admissible set: orthant
/// components with `g_j(x̄) < −tol` are pinned to zero, zero-cone components
/// are free. Only polyhedral cones are supported.
pub fn search_kkt_multipliers(problem: &Problem, x_bar: &[f64], tol: f64) -> Result<KktSearch> {
    let cone = problem.cone();
    if !cone.is_polyhedral() {
        return Err(Error::Unsupported(
            "multiplier search needs an orthant/zero cone; check SOC multipliers with kkt_residual".into(),
        ));
    }
    let ev = problem.evaluate(x_bar)?;
    let infeas = cone.distance_to_negative_cone(&ev.g)?;
    if infeas > tol {
        return Err(Error::Precondition(format!(
            "point is infeasible (distance to -cone {infeas:e} > tol {tol:e})"
        )));
    }
    let (n, m, p) = (problem.n(), problem.m(), problem.p());
    let mut a = DMatrix::zeros(n, m + p);
    for i in 0..m {
        for r in 0..n {
            a[(r, i)] = ev.grad_f[i][r];
        }
    }
    for j in 0..p {
        for r in 0..n {
            a[(r, m + j)] = ev.jac_g[j][r];
        }
    }
    let mut domains = vec![Domain::NonNeg; m + p];
    for b in cone.blocks() {
        for j in b.range() {
            domains[m + j] = match b.kind {
                BlockKind::Orthant if ev.g[j] < -tol => Domain::Zero,
                BlockKind::Orthant => Domain::NonNeg,
                BlockKind::Zero => Domain::Free,
                BlockKind::SecondOrder => unreachable!(),
            };
        }
    }
    let lsq = ConstrainedLsq::new(a, vec![0.0; n], domains.clone(), Some(0..m));

    let mut rng = ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for restart in 0..SEARCH_RESTARTS {
        let mut start = vec![0.0; m + p];
        if restart == 0 {
            start[..m].iter_mut().for_each(|l| *l = 1.0 / m as f64);
        } else {
            for (i, s) in start.iter_mut().enumerate() {
                *s = match (i < m, domains[i]) {
                    (true, _) => rng.gen_range(0.0..1.0),
                    (false, Domain::Free) => rng.gen_range(-10.0..10.0),
                    (false, _) => rng.gen_range(0.0..10.0),
                };
            }
        }
        let sol = lsq.solve(&start, 20_000, 1e-15);
        let mu_norm = norm(&sol.z[m..]);
        let better = match &best {
            None => true,
            Some((r, mn, _)) => (sol.residual, mu_norm) < (*r, *mn),
        };
        if better {
            best = Some((sol.residual, mu_norm, sol.z));
        }
    }
    let (min_residual, _, z) = best.expect("at least one restart");
    Ok(KktSearch {
        lambda: z[..m].to_vec(),
        mu: z[m..].to_vec(),
        min_residual,
        kkt_holds: min_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn example2_exact_kkt() {
        let fx = fixtures::example(2).unwrap();
        let r = kkt_residual(&fx.problem, &fx.x_bar, &[1.0], &[1.0, 0.0, 0.0], None).unwrap();
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn example1_zero_multiplier_residual() {
        let fx = fixtures::example(1).unwrap();
        let r = kkt_residual(&fx.problem, &fx.x_bar, &[0.5, 0.5], &[0.0; 3], None).unwrap();
        assert_eq!(r.stationarity, (4.0_f64 + 25.0 / 4.0).sqrt());
        assert_eq!(r.complementarity, 0.0);
        assert_eq!(r.feasibility, 0.0);
    }

    #[test]
    fn unconstrained_stationary_point() {
        let p = crate::model::parse_problem(
            "vars x1\nobjective (x1-1)^2\nconstraint -1\ncone orthant 1\n",
        )
        .unwrap();
        let r = kkt_residual(&p, &[1.0], &[1.0], &[0.0], None).unwrap();
        assert_eq!(r.max(), 0.0);
        let s = search_kkt_multipliers(&p, &[1.0], 1e-9).unwrap();
        assert!(s.kkt_holds);
        assert_eq!(s.mu, vec![0.0]);
        assert!((s.lambda[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defects_detect_bad_multipliers() {
        let fx = fixtures::example(2).unwrap();
        let r = kkt_residual(&fx.problem, &fx.x_bar, &[0.7], &[-1.0, 0.0, 0.0], None).unwrap();
        assert!((r.simplex_defect - 0.3).abs() < 1e-15);
        assert_eq!(r.polar_defect, 1.0);
    }

    #[test]
    fn search_rejects_infeasible_and_soc() {
        let fx = fixtures::example(2).unwrap();
        assert!(matches!(
            search_kkt_multipliers(&fx.problem, &[-1.0, 0.0], 1e-6),
            Err(Error::Precondition(_))
        ));
        let soc = crate::model::parse_problem(
            "vars a b\nobjective a\nconstraint -a\nconstraint b\ncone soc 2\n",
        )
        .unwrap();
        assert!(matches!(
            search_kkt_multipliers(&soc, &[1.0, 0.0], 1e-6),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn search_is_deterministic() {
        let fx = fixtures::example(1).unwrap();
        let a = search_kkt_multipliers(&fx.problem, &fx.x_bar, 1e-6).unwrap();
        let b = search_kkt_multipliers(&fx.problem, &fx.x_bar, 1e-6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn example1_has_no_kkt_multipliers() {
        let fx = fixtures::example(1).unwrap();
        let s = search_kkt_multipliers(&fx.problem, &fx.x_bar, 1e-6).unwrap();
        assert!((s.min_residual - 1.0).abs() < 1e-6, "{}", s.min_residual);
        assert!(!s.kkt_holds);
        assert!(s.lambda[0].abs() < 1e-6 && (s.lambda[1] - 1.0).abs() < 1e-6);
        assert_eq!(s.mu[0], 0.0);
    }
}
