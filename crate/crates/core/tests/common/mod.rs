#![allow(dead_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use ccvp_core::certify::{kkt_residual, verify_akkt_certificate, AkktCertificate, VerifyConfig};
use ccvp_core::cq::{check_mfcq, check_rcq, lp_solve, perturbation_sample, LinearProgram, RowSense};
use ccvp_core::fixtures;
use ccvp_core::model::parse_problem;
use ccvp_core::{Cone, Problem};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn test_cones() -> Vec<Cone> {
    vec![
        Cone::orthant(4).unwrap(),
        Cone::zero(3).unwrap(),
        Cone::second_order(2).unwrap(),
        Cone::second_order(4).unwrap(),
        Cone::product(vec![
            Cone::zero(1).unwrap(),
            Cone::second_order(3).unwrap(),
            Cone::orthant(2).unwrap(),
        ])
        .unwrap(),
    ]
}

fn random_vec(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
    (0..p).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
}

/// Moreau split, idempotence, non-expansiveness and polar membership on
/// 1000 random points per cone.
pub fn moreau_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for cone in test_cones() {
        let p = cone.dim();
        for _ in 0..1000 {
            let y = random_vec(&mut rng, p);
            let neg = cone.project_negative(&y).unwrap();
            let pol = cone.project_polar(&y).unwrap();
            let ny = norm(&y);
            let sum: Vec<f64> = neg.iter().zip(&pol).map(|(a, b)| a + b).collect();
            ensure!(dist(&y, &sum) <= 1e-10 * (1.0 + ny), "{cone}: split fails at {y:?}");
            ensure!(
                dot(&neg, &pol).abs() <= 1e-10 * (1.0 + ny * ny),
                "{cone}: parts not orthogonal at {y:?}"
            );
            ensure!(cone.polar_contains(&pol, 1e-10).unwrap(), "{cone}: polar part outside at {y:?}");
            let proj = cone.project(&y).unwrap();
            let again = cone.project(&proj).unwrap();
            ensure!(dist(&proj, &again) <= 1e-12 * (1.0 + ny), "{cone}: projection not idempotent");
            let z = random_vec(&mut rng, p);
            let pz = cone.project(&z).unwrap();
            ensure!(
                dist(&proj, &pz) <= dist(&y, &z) * (1.0 + 1e-12) + 1e-15,
                "{cone}: projection expands {y:?} {z:?}"
            );
        }
        if let Cone::Orthant(_) = cone {
            for _ in 0..1000 {
                let mu = random_vec(&mut rng, p);
                ensure!(
                    cone.polar_contains(&mu, 0.0).unwrap() == cone.contains(&mu, 0.0).unwrap(),
                    "orthant is not self-dual at {mu:?}"
                );
            }
        }
    }
    Ok(())
}

fn random_polynomial_source(rng: &mut ChaCha8Rng, n: usize) -> String {
    let terms = rng.gen_range(1..6);
    let mut parts = Vec::new();
    for _ in 0..terms {
        let c: f64 = (rng.gen_range(-5.0f64..5.0) * 100.0).round() / 100.0;
        let mut t = format!("{c}");
        for v in 0..n {
            let e = rng.gen_range(0..3u32);
            if e > 0 {
                t.push_str(&format!("*x{}^{e}", v + 1));
            }
        }
        parts.push(format!("({t})"));
    }
    if rng.gen_bool(0.5) {
        let shift = rng.gen_range(-2..3);
        parts.push(format!("(x1 - ({shift}))^3"));
    }
    parts.join(" + ")
}

/// Random problems over `n ≤ 3` variables with mixed polynomial terms.
pub fn random_problems(count: usize, seed: u64) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..4);
            let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            let mut src = format!("vars {}\n", vars.join(" "));
            src.push_str(&format!("objective {}\n", random_polynomial_source(&mut rng, n)));
            let p = rng.gen_range(1..4);
            for _ in 0..p {
                src.push_str(&format!("constraint {}\n", random_polynomial_source(&mut rng, n)));
            }
            src.push_str(&format!("cone orthant {p}\n"));
            parse_problem(&src).unwrap_or_else(|e| panic!("{e}\n{src}"))
        })
        .collect()
}

/// Symbolic gradients against central differences (step 1e−5) at 20 random
/// points in [−2, 2]ⁿ, relative error ≤ 1e−6.
pub fn gradient_suite() -> Check {
    let mut problems: Vec<Problem> = (1..=3).map(|i| fixtures::example(i).unwrap().problem).collect();
    problems.push(fixtures::convex_bi_objective());
    problems.extend(random_problems(30, 11));
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = 1e-5;
    for prob in &problems {
        let n = prob.n();
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ev = prob.evaluate(&x).unwrap();
            let rows = ev.grad_f.iter().chain(&ev.jac_g);
            for (idx, grad) in rows.enumerate() {
                for v in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[v] += h;
                    xm[v] -= h;
                    let val = |z: &[f64]| {
                        let e = prob.evaluate(z).unwrap();
                        if idx < prob.m() {
                            e.f[idx]
                        } else {
                            e.g[idx - prob.m()]
                        }
                    };
                    let fd = (val(&xp) - val(&xm)) / (2.0 * h);
                    let err = (fd - grad[v]).abs() / grad[v].abs().max(1.0);
                    ensure!(err <= 1e-6, "gradient {idx}/{v} at {x:?}: symbolic {} vs fd {fd}", grad[v]);
                }
            }
        }
    }
    Ok(())
}

/// `μ` admissible at `(x, r)` ⇒ `αμ` admissible at `(x, αr)` with
/// `∇g(x)*(αμ) = α∇g(x)*μ`.
pub fn k_scaling_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let problems = vec![
        fixtures::example(1).unwrap().problem,
        fixtures::example(2).unwrap().problem,
        fixtures::example(3).unwrap().problem,
    ];
    let mut checked = 0;
    for prob in &problems {
        let blocks = prob.cone().blocks();
        for _ in 0..300 {
            let x: Vec<f64> = (0..prob.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut mu = vec![0.0; prob.p()];
            for b in &blocks {
                for j in b.range() {
                    mu[j] = match b.kind {
                        ccvp_core::cone::BlockKind::Zero => rng.gen_range(-3.0..3.0),
                        _ => rng.gen_range(0.0..3.0),
                    };
                }
            }
            let g = prob.eval_constraints(&x).unwrap();
            let r = dot(&mu, &g).abs() * rng.gen_range(1.0..2.0);
            let Some(s) = perturbation_sample(prob, &x, r, &mu).unwrap() else {
                return Err(format!("constructed sample rejected at {x:?}"));
            };
            for alpha in [1e-3, 0.5, 7.0, 1e4] {
                let amu: Vec<f64> = mu.iter().map(|m| alpha * m).collect();
                let Some(sa) = perturbation_sample(prob, &x, alpha * r, &amu).unwrap() else {
                    return Err(format!("scaled sample rejected, alpha {alpha}"));
                };
                let want: Vec<f64> = s.w.iter().map(|w| alpha * w).collect();
                ensure!(
                    dist(&sa.w, &want) <= 1e-12 * (1.0 + alpha * norm(&s.w)),
                    "K(x, αr) != αK(x, r) at alpha {alpha}"
                );
                checked += 1;
            }
        }
    }
    ensure!(checked == 3600, "only {checked} scaled samples checked");
    Ok(())
}

fn signed(c: i32, body: &str) -> String {
    if c < 0 {
        format!(" - {}*{body}", -c)
    } else {
        format!(" + {c}*{body}")
    }
}

/// Random orthant instances at `x̄ = 0`, built from small integer data so
/// that degenerate (RCQ-failing) configurations are common.
pub fn rcq_instances(count: usize, seed: u64) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(1..4);
        let p = rng.gen_range(1..5);
        let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        let mut src = format!("vars {}\nobjective x1\n", vars.join(" "));
        let mut rows: Vec<Vec<i32>> = Vec::new();
        for _ in 0..p {
            // mirror an earlier row to create opposite gradients
            let row: Vec<i32> = if !rows.is_empty() && rng.gen_bool(0.3) {
                rows[rng.gen_range(0..rows.len())].iter().map(|c| -c).collect()
            } else {
                (0..n).map(|_| rng.gen_range(-1..=1)).collect()
            };
            let constant = if rng.gen_bool(0.7) { 0 } else { -rng.gen_range(1..3) };
            let mut expr = format!("{constant}");
            for (v, c) in row.iter().enumerate() {
                if *c != 0 {
                    expr.push_str(&signed(*c, &format!("x{}", v + 1)));
                }
                if rng.gen_bool(0.3) {
                    expr.push_str(&signed(rng.gen_range(-1..=1), &format!("x{}^2", v + 1)));
                }
            }
            src.push_str(&format!("constraint {expr}\n"));
            rows.push(row);
        }
        src.push_str(&format!("cone orthant {p}\n"));
        out.push(parse_problem(&src).unwrap_or_else(|e| panic!("{e}\n{src}")));
    }
    out
}

/// RCQ and MFCQ agree on orthant cones; returns how many instances satisfy
/// RCQ so callers can check both outcomes were exercised.
pub fn rcq_mfcq_agreement_suite() -> Result<usize, String> {
    let mut holding = 0;
    for prob in rcq_instances(50, 19) {
        let x = vec![0.0; prob.n()];
        let rcq = check_rcq(&prob, &x).map_err(|e| e.to_string())?;
        let mfcq = check_mfcq(&prob, &x).map_err(|e| e.to_string())?.ok_or("MFCQ absent on an orthant")?;
        ensure!(
            rcq.holds == mfcq.holds,
            "RCQ {} vs MFCQ {} (slack {}) on\n{}",
            rcq.holds,
            mfcq.holds,
            mfcq.slack,
            prob.to_file_string()
        );
        if let Some(d) = &mfcq.witness_d {
            let ev = prob.evaluate(&x).unwrap();
            for j in 0..prob.p() {
                ensure!(ev.g[j] + dot(&ev.jac_g[j], d) < 0.0, "witness not strictly feasible");
            }
        }
        if let Some(e) = &rcq.failing_direction {
            ensure!(norm(e) == 1.0, "failing direction is not a unit vector");
        }
        holding += usize::from(rcq.holds);
    }
    Ok(holding)
}

/// Points where KKT holds exactly, as `(problem, x̄, λ, μ)`.
/// `(problem, x̄, λ, μ)` with an exact KKT certificate.
pub type KktPoint = (Problem, Vec<f64>, Vec<f64>, Vec<f64>);

pub fn exact_kkt_points() -> Vec<KktPoint> {
    let e2 = fixtures::example(2).unwrap();
    let (l2, m2) = e2.multipliers.clone().unwrap();
    vec![
        (e2.problem, e2.x_bar, l2, m2),
        (fixtures::convex_bi_objective(), vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0]),
        (
            parse_problem("vars x y\nobjective x + y\nconstraint -x\nconstraint -y\ncone orthant 2\n").unwrap(),
            vec![0.0, 0.0],
            vec![1.0],
            vec![1.0, 1.0],
        ),
        (
            parse_problem("vars x y\nobjective x^2 + y\nobjective y\nconstraint -y - x^2\ncone zero 1\n").unwrap(),
            vec![0.0, 0.0],
            vec![0.25, 0.75],
            vec![1.0],
        ),
    ]
}

/// The constant certificate at an exact KKT point passes verification at
/// tol_final = 1e−10.
pub fn kkt_embedding_suite() -> Check {
    for (prob, x, lambda, mu) in exact_kkt_points() {
        let r = kkt_residual(&prob, &x, &lambda, &mu, None).map_err(|e| e.to_string())?;
        ensure!(r.max() <= 1e-12, "not an exact KKT point: {r:?}");
        let cert = AkktCertificate::constant(lambda, x, mu, 20);
        let cfg = VerifyConfig {
            tol_final: 1e-10,
            ..VerifyConfig::default()
        };
        let rep = verify_akkt_certificate(&prob, &cert, &cfg).map_err(|e| e.to_string())?;
        ensure!(rep.akkt_holds() && rep.bakkt, "constant certificate rejected: {:?}", rep.last());
    }
    Ok(())
}

pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let rows = rng.gen_range(1..8);
    let cols = rng.gen_range(1..8);
    let a = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-3..=3) as f64);
    let b = (0..rows).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let c = (0..cols).map(|_| rng.gen_range(-3..=3) as f64).collect();
    let senses = (0..rows)
        .map(|_| match rng.gen_range(0..3) {
            0 => RowSense::Le,
            1 => RowSense::Ge,
            _ => RowSense::Eq,
        })
        .collect();
    let bounds = (0..cols)
        .map(|_| match rng.gen_range(0..4) {
            0 => (0.0, f64::INFINITY),
            1 => (-2.0, 4.0),
            2 => (f64::NEG_INFINITY, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        })
        .collect();
    LinearProgram::new(a, b, c, senses).with_bounds(bounds)
}

/// Identical inputs give bit-identical results; optimal vertices are primal
/// feasible to 1e−9.
pub fn lp_determinism_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let lp = random_lp(&mut rng);
        let a = lp_solve(&lp).map_err(|e| e.to_string())?;
        let b = lp_solve(&lp.clone()).map_err(|e| e.to_string())?;
        ensure!(
            a.status == b.status
                && a.x.as_ref().map(|v| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>())
                    == b.x.as_ref().map(|v| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>()),
            "LP not deterministic"
        );
        if let Some(x) = &a.x {
            ensure!(lp.primal_residual(x) <= 1e-9, "vertex violates constraints by {}", lp.primal_residual(x));
        }
    }
    Ok(())
}
