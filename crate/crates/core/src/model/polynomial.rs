use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// Sparse multivariate polynomial over `n` variables with `f64` coefficients.
///
/// Two views are kept in sync. The canonical term map (exponent vector to
/// coefficient, no stored zeros) defines equality, degree and printing of
/// expanded forms. The expression tree records the polynomial as it was
/// built and is what [`Polynomial::eval`] walks, so `(x1 - 1)^3` near
/// `x1 = 1` is evaluated without the cancellation of its expanded form.
#[derive(Debug, Clone)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
    expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
enum Expr {
    Const(f64),
    Var(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
            expr: Expr::Const(0.0),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p.expr = Expr::Const(c);
        p
    }

    /// The monomial `x_index`.
    pub fn variable(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index {index} out of range");
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(exps, 1.0);
        p.expr = Expr::Var(index);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, collecting like terms.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p.expr = expr_from_terms(&p.terms);
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out.expr = sum(vec![self.expr.clone(), other.expr.clone()]);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c = -*c);
        out.expr = neg(self.expr.clone());
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out.expr = product(vec![Expr::Const(s), self.expr.clone()]);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out.expr = product(vec![self.expr.clone(), other.expr.clone()]);
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out.expr = power(self.expr.clone(), k);
        out
    }

    /// Exact partial derivative in `var`; panics when `var >= nvars`.
    pub fn differentiate(&self, var: usize) -> Self {
        assert!(var < self.nvars, "variable index {var} out of range");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut d = e.clone();
            d[var] = k - 1;
            out.add_term(d, c * k as f64);
        }
        out.expr = if out.terms.is_empty() {
            Expr::Const(0.0)
        } else {
            derivative(&self.expr, var)
        };
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        eval(&self.expr, x)
    }

    /// Evaluates the expanded term map instead of the expression tree.
    pub fn eval_expanded(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) })
            })
            .sum()
    }

    /// Renders the expression as built, e.g. `(x1 - 1)^3 + x2`. Re-parsing
    /// the output yields the same term map.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay {
            expr: &self.expr,
            names,
        }
    }

    /// Renders the expanded term map, highest degree first.
    pub fn display_expanded(&self, names: &[String]) -> String {
        let expr = expr_from_terms(&self.terms);
        PolyDisplay { expr: &expr, names }.to_string()
    }
}

/// `c * x^exps` for `c > 0`.
fn monomial(exps: &[u32], c: f64) -> Expr {
    let mut factors = Vec::new();
    if c != 1.0 {
        factors.push(Expr::Const(c));
    }
    for (v, &k) in exps.iter().enumerate() {
        if k > 0 {
            factors.push(power(Expr::Var(v), k));
        }
    }
    match factors.len() {
        0 => Expr::Const(1.0),
        1 => factors.pop().unwrap(),
        _ => Expr::Product(factors),
    }
}

fn expr_from_terms(terms: &BTreeMap<Vec<u32>, f64>) -> Expr {
    if terms.is_empty() {
        return Expr::Const(0.0);
    }
    let mut sorted: Vec<(&Vec<u32>, &f64)> = terms.iter().collect();
    sorted.sort_by(|a, b| {
        let da: u32 = a.0.iter().sum();
        let db: u32 = b.0.iter().sum();
        db.cmp(&da).then_with(|| b.0.cmp(a.0))
    });
    let parts: Vec<Expr> = sorted
        .into_iter()
        .map(|(e, &c)| {
            if c < 0.0 {
                neg(monomial(e, -c))
            } else {
                monomial(e, c)
            }
        })
        .collect();
    sum(parts)
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn sum(parts: Vec<Expr>) -> Expr {
    let mut flat = Vec::new();
    for p in parts {
        match p {
            Expr::Sum(inner) => flat.extend(inner),
            e if is_zero(&e) => {}
            e => flat.push(e),
        }
    }
    match flat.len() {
        0 => Expr::Const(0.0),
        1 => flat.pop().unwrap(),
        _ => Expr::Sum(flat),
    }
}

fn product(parts: Vec<Expr>) -> Expr {
    let mut flat = Vec::new();
    for p in parts {
        match p {
            Expr::Product(inner) => flat.extend(inner),
            e if is_zero(&e) => return Expr::Const(0.0),
            Expr::Const(1.0) => {}
            e => flat.push(e),
        }
    }
    match flat.len() {
        0 => Expr::Const(1.0),
        1 => flat.pop().unwrap(),
        _ => Expr::Product(flat),
    }
}

fn power(base: Expr, k: u32) -> Expr {
    match k {
        0 => Expr::Const(1.0),
        1 => base,
        _ if is_zero(&base) => Expr::Const(0.0),
        _ => Expr::Pow(Box::new(base), k),
    }
}

fn neg(e: Expr) -> Expr {
    match e {
        Expr::Neg(inner) => *inner,
        e if is_zero(&e) => e,
        e => Expr::Neg(Box::new(e)),
    }
}

fn derivative(e: &Expr, var: usize) -> Expr {
    match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var(v) => Expr::Const(if *v == var { 1.0 } else { 0.0 }),
        Expr::Sum(parts) => sum(parts.iter().map(|p| derivative(p, var)).collect()),
        Expr::Product(factors) => {
            let mut terms = Vec::new();
            for i in 0..factors.len() {
                let d = derivative(&factors[i], var);
                if is_zero(&d) {
                    continue;
                }
                let mut fs: Vec<Expr> = factors
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, f)| f.clone())
                    .collect();
                fs.insert(i, d);
                terms.push(product(fs));
            }
            sum(terms)
        }
        Expr::Pow(base, k) => {
            let d = derivative(base, var);
            if is_zero(&d) {
                return Expr::Const(0.0);
            }
            product(vec![Expr::Const(*k as f64), power((**base).clone(), k - 1), d])
        }
        Expr::Neg(inner) => neg(derivative(inner, var)),
    }
}

fn eval(e: &Expr, x: &[f64]) -> f64 {
    match e {
        Expr::Const(c) => *c,
        Expr::Var(v) => x[*v],
        Expr::Sum(parts) => parts.iter().map(|p| eval(p, x)).sum(),
        Expr::Product(factors) => factors.iter().map(|f| eval(f, x)).product(),
        Expr::Pow(base, k) => eval(base, x).powi(*k as i32),
        Expr::Neg(inner) => -eval(inner, x),
    }
}

pub struct PolyDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl PolyDisplay<'_> {
    fn write(&self, e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match e {
            Expr::Const(c) if *c < 0.0 => write!(f, "-{:?}", c.abs()),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(v) => write!(f, "{}", self.names[*v]),
            Expr::Sum(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    let (negative, body) = match p {
                        Expr::Neg(inner) => (true, &**inner),
                        other => (false, other),
                    };
                    let negative_const = matches!(body, Expr::Const(c) if *c < 0.0);
                    match (i, negative ^ negative_const) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    match body {
                        Expr::Const(c) => write!(f, "{:?}", c.abs())?,
                        Expr::Sum(_) => {
                            write!(f, "(")?;
                            self.write(body, f)?;
                            write!(f, ")")?;
                        }
                        _ => self.write(body, f)?,
                    }
                }
                Ok(())
            }
            Expr::Product(factors) => {
                for (i, fac) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    let wrap = match fac {
                        Expr::Sum(_) | Expr::Neg(_) => true,
                        Expr::Const(c) => *c < 0.0 && i > 0,
                        _ => false,
                    };
                    if wrap {
                        write!(f, "(")?;
                        self.write(fac, f)?;
                        write!(f, ")")?;
                    } else {
                        self.write(fac, f)?;
                    }
                }
                Ok(())
            }
            Expr::Pow(base, k) => {
                let plain = match &**base {
                    Expr::Var(_) => true,
                    Expr::Const(c) => *c >= 0.0,
                    _ => false,
                };
                if plain {
                    self.write(base, f)?;
                } else {
                    write!(f, "(")?;
                    self.write(base, f)?;
                    write!(f, ")")?;
                }
                write!(f, "^{k}")
            }
            Expr::Neg(inner) => {
                write!(f, "-")?;
                match &**inner {
                    Expr::Sum(_) | Expr::Neg(_) => {
                        write!(f, "(")?;
                        self.write(inner, f)?;
                        write!(f, ")")
                    }
                    Expr::Const(c) if *c < 0.0 => {
                        write!(f, "(")?;
                        self.write(inner, f)?;
                        write!(f, ")")
                    }
                    other => self.write(other, f),
                }
            }
        }
    }
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::variable(n, i)
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = x(1, 0).pow(2).sub(&x(1, 0).mul(&x(1, 0)));
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
        assert_eq!(p.eval(&[1.7]), 0.0);
    }

    #[test]
    fn power_rule() {
        // x1^2 x2^3 -> 2 x1 x2^3
        let p = Polynomial::from_terms(2, [(vec![2, 3], 1.0)]);
        let d = p.differentiate(0);
        assert_eq!(d, Polynomial::from_terms(2, [(vec![1, 3], 2.0)]));
        assert_eq!(d.eval(&[1.5, -2.0]), 2.0 * 1.5 * -8.0);
        assert!(Polynomial::constant(2, 4.0).differentiate(1).is_zero());
    }

    #[test]
    fn cubic_expansion() {
        let p = x(2, 0)
            .sub(&Polynomial::constant(2, 1.0))
            .pow(3)
            .add(&x(2, 1));
        assert_eq!(p.coefficient(&[3, 0]), 1.0);
        assert_eq!(p.coefficient(&[2, 0]), -3.0);
        assert_eq!(p.coefficient(&[1, 0]), 3.0);
        assert_eq!(p.coefficient(&[0, 0]), -1.0);
        assert_eq!(p.coefficient(&[0, 1]), 1.0);
        assert_eq!(p.num_terms(), 5);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn factored_evaluation_avoids_cancellation() {
        let p = x(1, 0).sub(&Polynomial::constant(1, 1.0)).pow(3);
        let xk = 1.0 + 1.0 / 1000.0;
        let exact = (xk - 1.0_f64).powi(3);
        assert_eq!(p.eval(&[xk]), exact);
        // the expanded form loses most of the significant digits here
        assert!((p.eval_expanded(&[xk]) - exact).abs() > 1e-9 * exact);
        let d = p.differentiate(0);
        assert_eq!(d.eval(&[xk]), 3.0 * (xk - 1.0_f64).powi(2));
    }

    #[test]
    fn display() {
        let names = vec!["x1".to_string(), "x2".to_string()];
        let p = Polynomial::from_terms(2, [(vec![2, 0], -3.0), (vec![0, 1], 1.0), (vec![0, 0], 0.5)]);
        assert_eq!(p.display_with(&names).to_string(), "-3.0*x1^2 + x2 + 0.5");
        let q = x(2, 0).sub(&Polynomial::constant(2, 1.0)).pow(3).add(&x(2, 1));
        assert_eq!(q.display_with(&names).to_string(), "(x1 - 1.0)^3 + x2");
        assert_eq!(
            q.display_expanded(&names),
            "x1^3 - 3.0*x1^2 + 3.0*x1 + x2 - 1.0"
        );
    }
}
