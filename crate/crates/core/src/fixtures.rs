//! Built-in reference problems.
//!
//! 1. Two linear objectives with a cubic constraint: `x̄ = (1, 0)` is weakly
//!    efficient, fails KKT, and has an explicit AKKT sequence.
//! 2. A single linear objective with constraints `−x1, −x2, x2`: KKT holds at
//!    the origin with bounded multipliers while RCQ fails.
//! 3. A feasible set only, `g = (x1, x1²)` over `{0} × R₊`: RCQ fails and
//!    AKKT-regularity holds. The objective `f = 0` is a placeholder so the
//!    problem type is complete; constraint-qualification checks ignore it.

use crate::certify::{AkktCertificate, AkktStep};
use crate::error::{Error, Result};
use crate::model::{parse_problem, Problem};

pub const EXAMPLE1: &str = "\
# two objectives, three orthant constraints
vars x1 x2
objective -3*x1 - 2*x2 + 3
objective -x1 - 3*x2 + 1
constraint -x1
constraint -x2
constraint (x1 - 1)^3 + x2
cone orthant 3
convex false
point xbar 1 0
";

pub const EXAMPLE2: &str = "\
vars x1 x2
objective x1
constraint -x1
constraint -x2
constraint x2
cone orthant 3
convex false
point xbar 0 0
";

pub const EXAMPLE3: &str = "\
# feasible set only; f = 0 is a placeholder objective
vars x1 x2
objective 0
constraint x1
constraint x1^2
cone zero 1
cone orthant 1
convex false
point xbar 0 0
";

/// Convex bi-objective problem whose weighted-sum minimizer for
/// `λ = (½, ½)` sits on the constraint boundary.
pub const CONVEX_BI_OBJECTIVE: &str = "\
vars x1 x2
objective x1^2 + x2^2
objective (x1 - 2)^2 + x2^2
constraint x1 + x2 - 1
cone orthant 1
convex true
point x0 0 0
";

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: u32,
    pub source: &'static str,
    pub problem: Problem,
    pub x_bar: Vec<f64>,
    /// Reference AKKT certificate, where one is known in closed form.
    pub certificate: Option<AkktCertificate>,
    /// Reference KKT multipliers `(λ, μ)`, where they exist.
    pub multipliers: Option<(Vec<f64>, Vec<f64>)>,
}

/// The closed-form AKKT sequence for example 1:
/// `x^k = (1 + 1/k, 0)`, `μ^k = (0, 2k²/3 − 5/2, 2k²/3)`, `k = first..=last`.
pub fn example1_certificate(first: u32, last: u32) -> AkktCertificate {
    let steps = (first..=last)
        .map(|k| {
            let k = k as f64;
            let mu3 = 2.0 * k * k / 3.0;
            AkktStep {
                x: vec![1.0 + 1.0 / k, 0.0],
                mu: vec![0.0, mu3 - 2.5, mu3],
            }
        })
        .collect();
    AkktCertificate {
        lambda: vec![0.5, 0.5],
        limit: vec![1.0, 0.0],
        steps,
    }
}

pub fn example(id: u32) -> Result<Fixture> {
    let source = match id {
        1 => EXAMPLE1,
        2 => EXAMPLE2,
        3 => EXAMPLE3,
        other => return Err(Error::Usage(format!("unknown example {other}; expected 1, 2 or 3"))),
    };
    let problem = parse_problem(source)?;
    let x_bar = problem.point("xbar").expect("fixture defines xbar").to_vec();
    let (certificate, multipliers) = match id {
        1 => (Some(example1_certificate(2, 1000)), None),
        2 => (None, Some((vec![1.0], vec![1.0, 0.0, 0.0]))),
        _ => (None, None),
    };
    Ok(Fixture {
        id,
        source,
        problem,
        x_bar,
        certificate,
        multipliers,
    })
}

pub fn convex_bi_objective() -> Problem {
    parse_problem(CONVEX_BI_OBJECTIVE).expect("built-in fixture parses")
}
