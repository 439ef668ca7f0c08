//! Closed convex cones of finite dimension.
//!
//! Every supported cone lives in `R^p` with `p < ∞`, so every supported cone
//! is dually compact; no runtime decision is needed for that property.
//!
//! Second-order cones use the axis-first convention `(t, x)` with `‖x‖ ≤ t`.
//! Product cones are flattened left to right into one coordinate block.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("vector has length {got}, cone has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid cone: {0}")]
    Invalid(String),
}

/// A closed convex cone `Θ ⊂ R^p`.
#[derive(Debug, Clone, PartialEq)]
pub enum Cone {
    /// Nonnegative orthant `R^p_+`.
    Orthant(usize),
    /// The zero cone `{0} ⊂ R^p`.
    Zero(usize),
    /// Second-order cone `{(t, x) : ‖x‖ ≤ t}` of total dimension `p ≥ 2`.
    SecondOrder(usize),
    /// Cartesian product, coordinates stacked left to right.
    Product(Vec<Cone>),
}

/// Elementary (non-product) cone kind, used when walking a flattened cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Orthant,
    Zero,
    SecondOrder,
}

/// One elementary factor of a flattened cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

impl Cone {
    pub fn orthant(p: usize) -> Result<Self, ConeError> {
        Self::Orthant(p).validated()
    }

    pub fn zero(p: usize) -> Result<Self, ConeError> {
        Self::Zero(p).validated()
    }

    pub fn second_order(p: usize) -> Result<Self, ConeError> {
        Self::SecondOrder(p).validated()
    }

    /// Builds a product; a single factor is returned unwrapped.
    pub fn product(mut factors: Vec<Cone>) -> Result<Self, ConeError> {
        if factors.len() == 1 {
            return factors.pop().unwrap().validated();
        }
        Self::Product(factors).validated()
    }

    /// Checks the structural invariants and returns the cone unchanged.
    pub fn validated(self) -> Result<Self, ConeError> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConeError> {
        match self {
            Cone::Orthant(0) | Cone::Zero(0) => {
                Err(ConeError::Invalid("cone dimension must be at least 1".into()))
            }
            Cone::SecondOrder(p) if *p < 2 => Err(ConeError::Invalid(format!(
                "second-order cone needs dimension >= 2, got {p}"
            ))),
            Cone::Product(factors) => {
                if factors.is_empty() {
                    return Err(ConeError::Invalid("product cone has no factors".into()));
                }
                factors.iter().try_for_each(Cone::validate)
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Orthant(p) | Cone::Zero(p) | Cone::SecondOrder(p) => *p,
            Cone::Product(factors) => factors.iter().map(Cone::dim).sum(),
        }
    }

    /// Elementary factors with their coordinate offsets, left to right.
    pub fn blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        self.push_blocks(0, &mut out);
        out
    }

    fn push_blocks(&self, offset: usize, out: &mut Vec<Block>) -> usize {
        let (kind, len) = match self {
            Cone::Orthant(p) => (BlockKind::Orthant, *p),
            Cone::Zero(p) => (BlockKind::Zero, *p),
            Cone::SecondOrder(p) => (BlockKind::SecondOrder, *p),
            Cone::Product(factors) => {
                let mut at = offset;
                for f in factors {
                    at = f.push_blocks(at, out);
                }
                return at;
            }
        };
        out.push(Block { kind, offset, len });
        offset + len
    }

    /// True when the cone is a product of orthants and zero cones.
    pub fn is_polyhedral(&self) -> bool {
        self.blocks()
            .iter()
            .all(|b| b.kind != BlockKind::SecondOrder)
    }

    /// Always true: finite-dimensional cones are dually compact.
    pub fn is_dually_compact(&self) -> bool {
        true
    }

    fn check_len(&self, y: &[f64]) -> Result<(), ConeError> {
        if y.len() != self.dim() {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection onto `Θ`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>, ConeError> {
        self.check_len(y)?;
        let mut out = y.to_vec();
        for b in self.blocks() {
            let z = &mut out[b.range()];
            match b.kind {
                BlockKind::Orthant => z.iter_mut().for_each(|v| *v = v.max(0.0)),
                BlockKind::Zero => z.iter_mut().for_each(|v| *v = 0.0),
                BlockKind::SecondOrder => project_soc_in_place(z),
            }
        }
        Ok(out)
    }

    /// Euclidean projection onto `−Θ`, i.e. `−Π_Θ(−y)`.
    pub fn project_negative(&self, y: &[f64]) -> Result<Vec<f64>, ConeError> {
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        Ok(self.project(&neg)?.into_iter().map(|v| -v).collect())
    }

    /// Projection onto the polar cone `Θ₊ = {μ : ⟨μ, θ⟩ ≥ 0 ∀θ ∈ Θ}`,
    /// computed through the Moreau split `y = Π₋Θ(y) + Π_{Θ₊}(y)`.
    pub fn project_polar(&self, y: &[f64]) -> Result<Vec<f64>, ConeError> {
        let neg = self.project_negative(y)?;
        Ok(y.iter().zip(&neg).map(|(a, b)| a - b).collect())
    }

    /// Membership in `Θ₊` with slack `tol`.
    pub fn polar_contains(&self, mu: &[f64], tol: f64) -> Result<bool, ConeError> {
        self.check_len(mu)?;
        Ok(self.blocks().iter().all(|b| {
            let m = &mu[b.range()];
            match b.kind {
                BlockKind::Orthant => m.iter().all(|&v| v >= -tol),
                BlockKind::Zero => true,
                // self-dual
                BlockKind::SecondOrder => norm(&m[1..]) - m[0] <= tol,
            }
        }))
    }

    /// Membership in `Θ` with slack `tol`.
    pub fn contains(&self, y: &[f64], tol: f64) -> Result<bool, ConeError> {
        self.check_len(y)?;
        Ok(self.blocks().iter().all(|b| {
            let m = &y[b.range()];
            match b.kind {
                BlockKind::Orthant => m.iter().all(|&v| v >= -tol),
                BlockKind::Zero => m.iter().all(|&v| v.abs() <= tol),
                BlockKind::SecondOrder => norm(&m[1..]) - m[0] <= tol,
            }
        }))
    }

    /// `‖y − Π₋Θ(y)‖`, zero exactly when `y ∈ −Θ`.
    pub fn distance_to_negative_cone(&self, y: &[f64]) -> Result<f64, ConeError> {
        let neg = self.project_negative(y)?;
        Ok(distance(y, &neg))
    }

    /// `‖μ − Π_{Θ₊}(μ)‖`.
    pub fn distance_to_polar(&self, mu: &[f64]) -> Result<f64, ConeError> {
        let p = self.project_polar(mu)?;
        Ok(distance(mu, &p))
    }

    /// A point of `int Θ`, or `None` when the interior is empty.
    pub fn interior_direction(&self) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        for b in self.blocks() {
            match b.kind {
                BlockKind::Orthant => out[b.range()].iter_mut().for_each(|v| *v = 1.0),
                BlockKind::Zero => return None,
                BlockKind::SecondOrder => out[b.offset] = 1.0,
            }
        }
        Some(out)
    }

    /// Generalized Jacobian of `Π_{Θ₊}` at `y`, row-major `p × p`.
    ///
    /// On the kinks of the projection the element chosen is the one of the
    /// adjacent smooth piece with the larger image (identity on the boundary
    /// of the cone, zero at the apex).
    pub fn polar_projection_jacobian(&self, y: &[f64]) -> Result<Vec<f64>, ConeError> {
        self.check_len(y)?;
        let p = self.dim();
        let mut jac = vec![0.0; p * p];
        for b in self.blocks() {
            match b.kind {
                BlockKind::Orthant => {
                    for i in b.range() {
                        if y[i] > 0.0 {
                            jac[i * p + i] = 1.0;
                        }
                    }
                }
                BlockKind::Zero => {
                    for i in b.range() {
                        jac[i * p + i] = 1.0;
                    }
                }
                BlockKind::SecondOrder => {
                    let z = &y[b.range()];
                    let block = soc_projection_jacobian(z);
                    for r in 0..b.len {
                        for c in 0..b.len {
                            jac[(b.offset + r) * p + b.offset + c] = block[r * b.len + c];
                        }
                    }
                }
            }
        }
        Ok(jac)
    }

    /// Short textual form, e.g. `zero(1) x orthant(1)`.
    pub fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cone::Orthant(p) => write!(f, "orthant({p})"),
            Cone::Zero(p) => write!(f, "zero({p})"),
            Cone::SecondOrder(p) => write!(f, "soc({p})"),
            Cone::Product(factors) => {
                for (i, c) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

fn project_soc_in_place(z: &mut [f64]) {
    let t = z[0];
    let xn = norm(&z[1..]);
    if xn <= t {
        return;
    }
    if xn <= -t {
        z.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let scale = 0.5 * (t + xn);
    z[0] = scale;
    for v in &mut z[1..] {
        *v *= scale / xn;
    }
}

fn soc_projection_jacobian(z: &[f64]) -> Vec<f64> {
    let len = z.len();
    let mut jac = vec![0.0; len * len];
    let t = z[0];
    let xn = norm(&z[1..]);
    if xn <= t {
        for i in 0..len {
            jac[i * len + i] = 1.0;
        }
        return jac;
    }
    if xn <= -t {
        return jac;
    }
    let w: Vec<f64> = z[1..].iter().map(|v| v / xn).collect();
    let ratio = t / xn;
    jac[0] = 0.5;
    for i in 1..len {
        jac[i] = 0.5 * w[i - 1];
        jac[i * len] = 0.5 * w[i - 1];
        for j in 1..len {
            let eye = if i == j { 1.0 + ratio } else { 0.0 };
            jac[i * len + j] = 0.5 * (eye - ratio * w[i - 1] * w[j - 1]);
        }
    }
    jac
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
