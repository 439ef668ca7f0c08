//! Problem representation: polynomial objectives and constraints over a cone.

mod format;
mod parse;
mod polynomial;

pub use format::parse_problem;
pub use parse::{parse_expression, parse_expression_at};
pub use polynomial::{PolyDisplay, Polynomial};

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::cone::{BlockKind, Cone, ConeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

pub(crate) fn check_len(what: &'static str, v: &[f64], expected: usize) -> Result<(), ModelError> {
    if v.len() != expected {
        return Err(ModelError::DimensionMismatch {
            what,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// `Min f(x)` over `R^m_+` subject to `g(x) ∈ −Θ`, with polynomial data.
#[derive(Debug, Clone)]
pub struct Problem {
    var_names: Vec<String>,
    objectives: Vec<Polynomial>,
    constraints: Vec<Polynomial>,
    cone: Cone,
    declared_convex: bool,
    named_points: Vec<(String, Vec<f64>)>,
    grad_f: Vec<Vec<Polynomial>>,
    jac_g: Vec<Vec<Polynomial>>,
    hess_f: Vec<Vec<Polynomial>>,
    hess_g: Vec<Vec<Polynomial>>,
}

/// Values and exact first derivatives of a problem at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    /// `m × n`, row `i` is `∇f_i(x)`.
    pub grad_f: Vec<Vec<f64>>,
    /// `p × n`, row `j` is `∇g_j(x)`.
    pub jac_g: Vec<Vec<f64>>,
}

impl Evaluation {
    /// `∇g(x)* μ = jac_gᵀ μ`.
    pub fn adjoint(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.x.len()];
        for (row, &m) in self.jac_g.iter().zip(mu) {
            if m == 0.0 {
                continue;
            }
            for (o, r) in out.iter_mut().zip(row) {
                *o += m * r;
            }
        }
        out
    }

    /// `Σ λ_i ∇f_i(x)`.
    pub fn weighted_gradient(&self, lambda: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.x.len()];
        for (row, &l) in self.grad_f.iter().zip(lambda) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += l * r;
            }
        }
        out
    }
}

impl Problem {
    pub fn new(
        var_names: Vec<String>,
        objectives: Vec<Polynomial>,
        constraints: Vec<Polynomial>,
        cone: Cone,
        declared_convex: bool,
    ) -> Result<Self, ModelError> {
        let n = var_names.len();
        if n == 0 {
            return Err(ModelError::Invalid("at least one variable is required".into()));
        }
        for (i, name) in var_names.iter().enumerate() {
            if var_names[..i].contains(name) {
                return Err(ModelError::Invalid(format!("duplicate variable '{name}'")));
            }
        }
        if objectives.is_empty() {
            return Err(ModelError::Invalid("at least one objective is required".into()));
        }
        if constraints.is_empty() {
            return Err(ModelError::Invalid("at least one constraint is required".into()));
        }
        cone.validate()?;
        if cone.dim() != constraints.len() {
            return Err(ModelError::Invalid(format!(
                "cone dimension {} does not match {} constraint components",
                cone.dim(),
                constraints.len()
            )));
        }
        if objectives.iter().chain(&constraints).any(|p| p.nvars() != n) {
            return Err(ModelError::Invalid("polynomial variable count differs from vars".into()));
        }
        let gradient = |p: &Polynomial| (0..n).map(|v| p.differentiate(v)).collect::<Vec<_>>();
        let hessian = |p: &Polynomial| {
            let g = gradient(p);
            let mut h = Vec::with_capacity(n * n);
            for gi in &g {
                for v in 0..n {
                    h.push(gi.differentiate(v));
                }
            }
            h
        };
        Ok(Self {
            grad_f: objectives.iter().map(gradient).collect(),
            jac_g: constraints.iter().map(gradient).collect(),
            hess_f: objectives.iter().map(hessian).collect(),
            hess_g: constraints.iter().map(hessian).collect(),
            var_names,
            objectives,
            constraints,
            cone,
            declared_convex,
            named_points: Vec::new(),
        })
    }

    /// Adds or replaces a named point.
    pub fn with_point(mut self, name: &str, x: Vec<f64>) -> Result<Self, ModelError> {
        check_len("named point", &x, self.n())?;
        self.named_points.retain(|(k, _)| k != name);
        self.named_points.push((name.to_string(), x));
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.var_names.len()
    }

    pub fn m(&self) -> usize {
        self.objectives.len()
    }

    pub fn p(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn objectives(&self) -> &[Polynomial] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Polynomial] {
        &self.constraints
    }

    pub fn cone(&self) -> &Cone {
        &self.cone
    }

    pub fn declared_convex(&self) -> bool {
        self.declared_convex
    }

    pub fn named_points(&self) -> &[(String, Vec<f64>)] {
        &self.named_points
    }

    pub fn point(&self, name: &str) -> Option<&[f64]> {
        self.named_points
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn eval_objectives(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_len("point", x, self.n())?;
        Ok(self.objectives.iter().map(|p| p.eval(x)).collect())
    }

    pub fn eval_constraints(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_len("point", x, self.n())?;
        Ok(self.constraints.iter().map(|p| p.eval(x)).collect())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation, ModelError> {
        check_len("point", x, self.n())?;
        let eval_rows = |rows: &[Vec<Polynomial>]| {
            rows.iter()
                .map(|r| r.iter().map(|p| p.eval(x)).collect())
                .collect()
        };
        Ok(Evaluation {
            x: x.to_vec(),
            f: self.objectives.iter().map(|p| p.eval(x)).collect(),
            g: self.constraints.iter().map(|p| p.eval(x)).collect(),
            grad_f: eval_rows(&self.grad_f),
            jac_g: eval_rows(&self.jac_g),
        })
    }

    /// Row-major `n × n` Hessian of objective `i` at `x`.
    pub fn objective_hessian(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.hess_f[i].iter().map(|p| p.eval(x)).collect()
    }

    /// Row-major `n × n` Hessian of constraint component `j` at `x`.
    pub fn constraint_hessian(&self, j: usize, x: &[f64]) -> Vec<f64> {
        self.hess_g[j].iter().map(|p| p.eval(x)).collect()
    }

    /// `dist(g(x), −Θ) ≤ tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> Result<bool, ModelError> {
        let g = self.eval_constraints(x)?;
        Ok(self.cone.distance_to_negative_cone(&g)? <= tol)
    }

    /// Convexity is verified automatically for problems of degree at most two
    /// over polyhedral cones: every objective and every orthant component must
    /// have a positive semidefinite (constant) Hessian, and zero-cone
    /// components must be affine. Returns `None` outside that class.
    pub fn verified_convexity(&self) -> Option<bool> {
        if !self.cone.is_polyhedral() {
            return None;
        }
        if self.objectives.iter().chain(&self.constraints).any(|p| p.degree() > 2) {
            return None;
        }
        let origin = vec![0.0; self.n()];
        let psd = |h: Vec<f64>| {
            let n = self.n();
            let scale = h.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &h));
            eig.eigenvalues.iter().all(|&l| l >= -1e-12 * scale)
        };
        if !(0..self.m()).all(|i| psd(self.objective_hessian(i, &origin))) {
            return Some(false);
        }
        for b in self.cone.blocks() {
            for j in b.range() {
                let ok = match b.kind {
                    BlockKind::Orthant => psd(self.constraint_hessian(j, &origin)),
                    BlockKind::Zero => self.constraints[j].degree() <= 1,
                    BlockKind::SecondOrder => unreachable!(),
                };
                if !ok {
                    return Some(false);
                }
            }
        }
        Some(true)
    }

    /// Declared convex, or verified convex by [`Problem::verified_convexity`].
    pub fn is_convex(&self) -> bool {
        self.declared_convex || self.verified_convexity() == Some(true)
    }

    /// Problem-file rendering; [`parse_problem`] reads it back.
    pub fn to_file_string(&self) -> String {
        format::write_problem(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EXAMPLE1: &str = "\
vars x1 x2
objective -3*x1 - 2*x2 + 3
objective -x1 - 3*x2 + 1
constraint -x1
constraint -x2
constraint (x1 - 1)^3 + x2
cone orthant 3
point xbar 1 0
";

    #[test]
    fn example1_gradients_at_xbar() {
        let p = parse_problem(EXAMPLE1).unwrap();
        let e = p.evaluate(&[1.0, 0.0]).unwrap();
        assert_eq!(e.grad_f, vec![vec![-3.0, -2.0], vec![-1.0, -3.0]]);
        assert_eq!(e.jac_g, vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![0.0, 1.0]]);
        assert_eq!(e.f, vec![0.0, 0.0]);
        assert_eq!(e.g, vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn cube_derivative_along_akkt_sequence() {
        let p = parse_problem(EXAMPLE1).unwrap();
        let d = p.constraints()[2].differentiate(0);
        assert_eq!(d.eval(&[1.0, 0.0]), 0.0);
        for k in [2.0, 10.0, 100.0] {
            let v = d.eval(&[1.0 + 1.0 / k, 0.0]);
            assert!((v - 3.0 / (k * k)).abs() <= 1e-12 * (3.0 / (k * k)).max(1.0));
        }
    }

    #[test]
    fn feasibility() {
        let p = parse_problem(EXAMPLE1).unwrap();
        assert!(p.is_feasible(&[1.0, 0.0], 0.0).unwrap());
        for k in [2.0, 1e3, 1e5] {
            assert!(!p.is_feasible(&[1.0 + 1.0 / k, 0.0], 0.0).unwrap());
        }
        let ex2 = parse_problem(
            "vars x1 x2\nobjective x1\nconstraint -x1\nconstraint -x2\nconstraint x2\ncone orthant 3\n",
        )
        .unwrap();
        assert!(!ex2.is_feasible(&[-1.0, 0.0], 0.0).unwrap());
        assert!(ex2.is_feasible(&[0.0, 0.0], 0.0).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let p = parse_problem(EXAMPLE1).unwrap();
        assert!(matches!(
            p.evaluate(&[1.0]),
            Err(ModelError::DimensionMismatch { expected: 2, got: 1, .. })
        ));
    }

    #[test]
    fn symbolic_gradient_matches_central_differences() {
        let vars: Vec<String> = vec!["x1".into(), "x2".into()];
        let poly = parse_expression("x1^2*x2^3", &vars).unwrap();
        let d = poly.differentiate(0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let h = 1e-5;
            let fd = (poly.eval(&[x[0] + h, x[1]]) - poly.eval(&[x[0] - h, x[1]])) / (2.0 * h);
            let exact = 2.0 * x[0] * x[1].powi(3);
            assert_eq!(d.eval(&x), exact);
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn convexity_verification() {
        let convex = parse_problem(
            "vars x1 x2\nobjective x1^2 + x2^2\nobjective (x1-2)^2 + x2^2\nconstraint x1 + x2 - 1\ncone orthant 1\n",
        )
        .unwrap();
        assert_eq!(convex.verified_convexity(), Some(true));
        assert!(convex.is_convex());
        let ex1 = parse_problem(EXAMPLE1).unwrap();
        assert_eq!(ex1.verified_convexity(), None);
        assert!(!ex1.is_convex());
        let concave = parse_problem("vars x\nobjective -x^2\nconstraint x\ncone orthant 1\n").unwrap();
        assert_eq!(concave.verified_convexity(), Some(false));
        let quad_eq = parse_problem("vars x\nobjective x\nconstraint x^2 - 1\ncone zero 1\n").unwrap();
        assert_eq!(quad_eq.verified_convexity(), Some(false));
    }

    #[test]
    fn evaluation_is_bit_stable() {
        let p = parse_problem(EXAMPLE1).unwrap();
        let x = [0.123456789, -1.987654321];
        assert_eq!(p.evaluate(&x).unwrap(), p.evaluate(&x).unwrap());
    }
}
