//! Dense two-phase tableau simplex with Bland's rule.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const PHASE1_TOL: f64 = 1e-9;
const MAX_DIM: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `min c·x` (or `max` with `maximize`) subject to `A x ⋈ b` row-wise and
/// `lo ≤ x ≤ hi`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub senses: Vec<RowSense>,
    pub bounds: Vec<(f64, f64)>,
    pub maximize: bool,
}

impl LinearProgram {
    /// All variables nonnegative, minimization.
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, c: Vec<f64>, senses: Vec<RowSense>) -> Self {
        let n = a.ncols();
        Self {
            a,
            b,
            c,
            senses,
            bounds: vec![(0.0, f64::INFINITY); n],
            maximize: false,
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn maximize(mut self) -> Self {
        self.maximize = true;
        self
    }

    /// Largest violation of a row or a bound at `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, sense) in self.senses.iter().enumerate() {
            let ax: f64 = (0..self.a.ncols()).map(|j| self.a[(r, j)] * x[j]).sum();
            let v = match sense {
                RowSense::Le => ax - self.b[r],
                RowSense::Ge => self.b[r] - ax,
                RowSense::Eq => (ax - self.b[r]).abs(),
            };
            worst = worst.max(v);
        }
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[j]).max(x[j] - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
}

/// How an original variable is rebuilt from the standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { col: usize, lo: f64 },
    Mirror { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    t: DMatrix<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.cols + 1;
        let p = self.t[(r, c)];
        for j in 0..width {
            self.t[(r, j)] /= p;
        }
        for i in 0..self.t.nrows() {
            if i == r {
                continue;
            }
            let f = self.t[(i, c)];
            if f != 0.0 {
                for j in 0..width {
                    let v = self.t[(r, j)];
                    self.t[(i, j)] -= f * v;
                }
                self.t[(i, c)] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[f64], allowed: &[bool]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| {
                if !allowed[j] {
                    return 0.0;
                }
                let z: f64 = (0..self.t.nrows()).map(|i| cost[self.basis[i]] * self.t[(i, j)]).sum();
                cost[j] - z
            })
            .collect()
    }

    /// Runs the simplex on `cost` over the `allowed` columns. Returns false if
    /// the objective is unbounded below.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        let rhs = self.cols;
        loop {
            let rc = self.reduced_costs(cost, allowed);
            let Some(enter) = (0..self.cols).find(|&j| allowed[j] && rc[j] < -PIVOT_TOL) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.nrows() {
                let a = self.t[(i, enter)];
                if a > PIVOT_TOL {
                    let ratio = self.t[(i, rhs)] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }
}

pub fn lp_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let (rows, nvar) = lp.a.shape();
    if lp.b.len() != rows || lp.senses.len() != rows || lp.c.len() != nvar || lp.bounds.len() != nvar {
        return Err(Error::Usage(format!(
            "LP dimension mismatch: A is {rows}x{nvar}, b {}, senses {}, c {}, bounds {}",
            lp.b.len(),
            lp.senses.len(),
            lp.c.len(),
            lp.bounds.len()
        )));
    }
    if rows > MAX_DIM || nvar > MAX_DIM {
        return Err(Error::Usage(format!("LP too large ({rows}x{nvar}); limit is {MAX_DIM}x{MAX_DIM}")));
    }
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::Usage(format!("invalid bounds for LP variable {j}: [{lo}, {hi}]")));
        }
    }

    // Standard form columns for the structural variables.
    let mut maps = Vec::with_capacity(nvar);
    let mut ncol = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        let m = if lo.is_finite() {
            if hi.is_finite() {
                extra_rows.push((ncol, hi - lo));
            }
            VarMap::Shift { col: ncol, lo }
        } else if hi.is_finite() {
            VarMap::Mirror { col: ncol, hi }
        } else {
            ncol += 1;
            VarMap::Split { pos: ncol - 1, neg: ncol }
        };
        ncol += 1;
        maps.push(m);
    }
    let nstruct = ncol;
    let sign = if lp.maximize { -1.0 } else { 1.0 };

    // Rows: (coefficients over structural columns, sense, rhs).
    let mut std_rows: Vec<(Vec<f64>, RowSense, f64)> = Vec::with_capacity(rows + extra_rows.len());
    for r in 0..rows {
        let mut coef = vec![0.0; nstruct];
        let mut rhs = lp.b[r];
        for (j, m) in maps.iter().enumerate() {
            let a = lp.a[(r, j)];
            match *m {
                VarMap::Shift { col, lo } => {
                    coef[col] += a;
                    rhs -= a * lo;
                }
                VarMap::Mirror { col, hi } => {
                    coef[col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    coef[pos] += a;
                    coef[neg] -= a;
                }
            }
        }
        std_rows.push((coef, lp.senses[r], rhs));
    }
    for &(col, width) in &extra_rows {
        let mut coef = vec![0.0; nstruct];
        coef[col] = 1.0;
        std_rows.push((coef, RowSense::Le, width));
    }
    for row in &mut std_rows {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|v| *v = -*v);
            row.2 = -row.2;
            row.1 = match row.1 {
                RowSense::Le => RowSense::Ge,
                RowSense::Ge => RowSense::Le,
                RowSense::Eq => RowSense::Eq,
            };
        }
    }

    let nrows = std_rows.len();
    let nslack = std_rows.iter().filter(|r| r.1 != RowSense::Eq).count();
    let nart = std_rows.iter().filter(|r| r.1 != RowSense::Le).count();
    let cols = nstruct + nslack + nart;
    let mut t = DMatrix::zeros(nrows, cols + 1);
    let mut basis = vec![0; nrows];
    let (mut s, mut art) = (nstruct, nstruct + nslack);
    for (i, (coef, sense, rhs)) in std_rows.iter().enumerate() {
        for (j, v) in coef.iter().enumerate() {
            t[(i, j)] = *v;
        }
        t[(i, cols)] = *rhs;
        match sense {
            RowSense::Le => {
                t[(i, s)] = 1.0;
                basis[i] = s;
                s += 1;
            }
            RowSense::Ge => {
                t[(i, s)] = -1.0;
                s += 1;
                t[(i, art)] = 1.0;
                basis[i] = art;
                art += 1;
            }
            RowSense::Eq => {
                t[(i, art)] = 1.0;
                basis[i] = art;
                art += 1;
            }
        }
    }
    let art_start = nstruct + nslack;
    let mut tab = Tableau { t, basis, cols };

    if nart > 0 {
        let mut cost1 = vec![0.0; cols];
        cost1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        let all = vec![true; cols];
        tab.optimize(&cost1, &all);
        let infeas: f64 = (0..nrows)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.t[(i, cols)])
            .sum();
        if infeas > PHASE1_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: None,
                objective: None,
            });
        }
        // Drive remaining artificials out of the basis; rows where that is
        // impossible are redundant and get dropped.
        let mut i = 0;
        while i < tab.t.nrows() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| tab.t[(i, j)].abs() > PIVOT_TOL) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.t = tab.t.clone().remove_row(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost2 = vec![0.0; cols];
    for (j, m) in maps.iter().enumerate() {
        let c = sign * lp.c[j];
        match *m {
            VarMap::Shift { col, .. } => cost2[col] += c,
            VarMap::Mirror { col, .. } => cost2[col] -= c,
            VarMap::Split { pos, neg } => {
                cost2[pos] += c;
                cost2[neg] -= c;
            }
        }
    }
    let allowed: Vec<bool> = (0..cols).map(|j| j < art_start).collect();
    if !tab.optimize(&cost2, &allowed) {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: None,
            objective: None,
        });
    }

    let mut z = vec![0.0; cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        z[b] = tab.t[(i, cols)];
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + z[col],
            VarMap::Mirror { col, hi } => hi - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
        })
        .collect();
    let objective = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x: Some(x),
        objective: Some(objective),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(a: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, a)
    }

    #[test]
    fn bounded_max() {
        let lp = LinearProgram::new(one(1.0), vec![3.0], vec![1.0], vec![RowSense::Le]).maximize();
        let s = lp_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x, Some(vec![3.0]));
        assert_eq!(s.objective, Some(3.0));
    }

    #[test]
    fn unbounded_max() {
        let lp = LinearProgram::new(DMatrix::zeros(0, 1), vec![], vec![1.0], vec![]).maximize();
        assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_phase1() {
        let lp = LinearProgram::new(one(1.0), vec![-1.0], vec![0.0], vec![RowSense::Le]);
        assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y : x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 3.0, 2.0]);
        let lp = LinearProgram::new(a, vec![4.0, 12.0, 18.0], vec![3.0, 5.0], vec![RowSense::Le; 3]).maximize();
        let s = lp_solve(&lp).unwrap();
        let x = s.x.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
        assert!((s.objective.unwrap() - 36.0).abs() < 1e-12);
    }

    #[test]
    fn free_and_bounded_variables() {
        // min x + y : x - y = -3, x ∈ [-5, 5], y free, y ≥ -1 via a row
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0]);
        let lp = LinearProgram::new(a, vec![-3.0, -1.0], vec![1.0, 1.0], vec![RowSense::Eq, RowSense::Ge])
            .with_bounds(vec![(-5.0, 5.0), (f64::NEG_INFINITY, f64::INFINITY)]);
        let s = lp_solve(&lp).unwrap();
        let x = s.x.clone().unwrap();
        assert!((x[0] + 4.0).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12, "{x:?}");
        assert!(lp.primal_residual(&x) <= 1e-9);
    }

    #[test]
    fn upper_bounded_only() {
        // max x : x ≤ 2 as a bound, x ≥ -7 as a row
        let lp = LinearProgram::new(one(1.0), vec![-7.0], vec![1.0], vec![RowSense::Ge])
            .with_bounds(vec![(f64::NEG_INFINITY, 2.0)])
            .maximize();
        assert_eq!(lp_solve(&lp).unwrap().x, Some(vec![2.0]));
    }

    #[test]
    fn redundant_equalities() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let lp = LinearProgram::new(a, vec![1.0, 2.0], vec![1.0, 2.0], vec![RowSense::Eq; 2]);
        let s = lp_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.x, Some(vec![1.0, 0.0]));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule without anti-cycling.
        let a = DMatrix::from_row_slice(
            3,
            4,
            &[0.25, -8.0, -1.0, 9.0, 0.5, -12.0, -0.5, 3.0, 0.0, 0.0, 1.0, 0.0],
        );
        let lp = LinearProgram::new(a, vec![0.0, 0.0, 1.0], vec![-0.75, 20.0, -0.5, 6.0], vec![RowSense::Le; 3]);
        let s = lp_solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective.unwrap() + 1.25).abs() < 1e-12);
    }

    #[test]
    fn dimension_errors() {
        let lp = LinearProgram::new(one(1.0), vec![1.0, 2.0], vec![1.0], vec![RowSense::Le]);
        assert!(matches!(lp_solve(&lp), Err(Error::Usage(_))));
        let lp = LinearProgram::new(one(1.0), vec![1.0], vec![1.0], vec![RowSense::Le]).with_bounds(vec![(1.0, 0.0)]);
        assert!(lp_solve(&lp).is_err());
    }
}
