//! Constrained linear least squares `min ½‖A z − b‖²` where every coordinate
//! is free, nonnegative or pinned to zero, and an optional coordinate range
//! is restricted to the unit simplex.
//!
//! Solved by accelerated projected gradient (FISTA with adaptive restart),
//! followed by an equality-constrained least-squares polish on the detected
//! support.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    Free,
    NonNeg,
    Zero,
}

pub(crate) struct ConstrainedLsq {
    a: DMatrix<f64>,
    b: DVector<f64>,
    domains: Vec<Domain>,
    simplex: Option<Range<usize>>,
    step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LsqSolution {
    pub z: Vec<f64>,
    pub residual: f64,
}

impl ConstrainedLsq {
    /// `a` is `rows × cols`; coordinates in `simplex` ignore their domain.
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, domains: Vec<Domain>, simplex: Option<Range<usize>>) -> Self {
        assert_eq!(a.ncols(), domains.len());
        assert_eq!(a.nrows(), b.len());
        let ata = a.transpose() * &a;
        let lip = if ata.nrows() == 0 {
            0.0
        } else {
            SymmetricEigen::new(ata).eigenvalues.max()
        };
        let step = if lip > 0.0 { 1.0 / lip } else { 1.0 };
        Self {
            a,
            b: DVector::from_vec(b),
            domains,
            simplex,
            step,
        }
    }

    pub fn cols(&self) -> usize {
        self.domains.len()
    }

    pub fn residual(&self, z: &[f64]) -> f64 {
        (&self.a * DVector::from_column_slice(z) - &self.b).norm()
    }

    pub fn project(&self, z: &mut [f64]) {
        for (i, v) in z.iter_mut().enumerate() {
            if self.simplex.as_ref().is_some_and(|r| r.contains(&i)) {
                continue;
            }
            match self.domains[i] {
                Domain::Free => {}
                Domain::NonNeg => *v = v.max(0.0),
                Domain::Zero => *v = 0.0,
            }
        }
        if let Some(r) = &self.simplex {
            project_simplex(&mut z[r.clone()]);
        }
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&(&self.a * z - &self.b))
    }

    /// Runs from `start` (projected first) and returns the best point seen.
    pub fn solve(&self, start: &[f64], max_iter: usize, tol: f64) -> LsqSolution {
        let mut x = start.to_vec();
        self.project(&mut x);
        let mut x = DVector::from_vec(x);
        let mut y = x.clone();
        let mut t = 1.0_f64;
        let mut best = (self.residual(x.as_slice()), x.clone());
        for _ in 0..max_iter {
            let g = self.gradient(&y);
            let mut next: Vec<f64> = (&y - self.step * g).iter().copied().collect();
            self.project(&mut next);
            let next = DVector::from_vec(next);
            let moved = (&next - &x).norm();
            let r = self.residual(next.as_slice());
            if r < best.0 {
                best = (r, next.clone());
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            // restart momentum when it points uphill
            if (&y - &next).dot(&(&next - &x)) > 0.0 {
                t = 1.0;
                y = next.clone();
            } else {
                y = &next + ((t - 1.0) / t_next) * (&next - &x);
                t = t_next;
            }
            x = next;
            if moved <= tol * (1.0 + x.norm()) {
                break;
            }
        }
        let mut sol = LsqSolution {
            z: best.1.iter().copied().collect(),
            residual: best.0,
        };
        if let Some(polished) = self.polish(&sol.z) {
            if polished.residual <= sol.residual {
                sol = polished;
            }
        }
        sol
    }

    /// Solves the least-squares problem restricted to the support of `z`
    /// (with the simplex sum as an equality) and keeps it when it stays
    /// inside the feasible set.
    fn polish(&self, z: &[f64]) -> Option<LsqSolution> {
        let scale = z.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let thresh = 1e-9 * scale;
        let in_simplex = |i: usize| self.simplex.as_ref().is_some_and(|r| r.contains(&i));
        let support: Vec<usize> = (0..self.cols())
            .filter(|&i| {
                if in_simplex(i) {
                    z[i] > thresh
                } else {
                    match self.domains[i] {
                        Domain::Free => true,
                        Domain::NonNeg => z[i] > thresh,
                        Domain::Zero => false,
                    }
                }
            })
            .collect();
        if support.is_empty() {
            return None;
        }
        let simplex_cols: Vec<usize> = (0..support.len()).filter(|&k| in_simplex(support[k])).collect();
        let s = support.len();
        let has_eq = self.simplex.is_some();
        let dim = s + usize::from(has_eq);
        let sub = self.a.select_columns(&support);
        let mut kkt = DMatrix::zeros(dim, dim);
        kkt.view_mut((0, 0), (s, s)).copy_from(&(sub.transpose() * &sub));
        let mut rhs = DVector::zeros(dim);
        rhs.rows_mut(0, s).copy_from(&sub.tr_mul(&self.b));
        if has_eq {
            if simplex_cols.is_empty() {
                return None;
            }
            for &k in &simplex_cols {
                kkt[(k, s)] = 1.0;
                kkt[(s, k)] = 1.0;
            }
            rhs[s] = 1.0;
        }
        let svd = kkt.svd(true, true);
        let sol = svd.solve(&rhs, 1e-12).ok()?;
        let mut out = vec![0.0; self.cols()];
        for (k, &i) in support.iter().enumerate() {
            out[i] = sol[k];
        }
        let feasible = support.iter().all(|&i| {
            in_simplex(i) && out[i] >= 0.0 || !in_simplex(i) && (self.domains[i] == Domain::Free || out[i] >= 0.0)
        });
        if !feasible || out.iter().any(|v| !v.is_finite()) {
            return None;
        }
        if let Some(r) = &self.simplex {
            let sum: f64 = out[r.clone()].iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return None;
            }
        }
        Some(LsqSolution {
            residual: self.residual(&out),
            z: out,
        })
    }
}

/// Euclidean projection onto `{z ≥ 0, Σz = 1}` (sort-based).
pub(crate) fn project_simplex(z: &mut [f64]) {
    if z.is_empty() {
        return;
    }
    let mut u = z.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let candidate = (cum - 1.0) / (i + 1) as f64;
        if ui - candidate > 0.0 {
            theta = candidate;
        }
    }
    for v in z.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}
