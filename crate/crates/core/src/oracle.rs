//! Numerical reference for the representation error: a Lawson–Hanson NNLS
//! fit at every midpoint of a uniform grid over `[0,1]^m`.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::cone::StateMatrix;
use crate::error::{Error, Result};
use crate::linalg::Vector;

pub const TOL_KKT: f64 = 1e-10;
pub const DEFAULT_SAMPLE_BUDGET: u128 = 10_000_000;

/// Nonnegative readout weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct NnlsFit {
    pub weights: Vec<f64>,
    pub residual_sq: f64,
    pub iterations: usize,
}

/// Reusable Lawson–Hanson active-set solver for a fixed design matrix.
///
/// The solver owns its scratch buffers, so repeated solves against the
/// same columns do not allocate.
#[derive(Debug, Clone)]
pub struct NnlsSolver {
    rows: usize,
    cols: usize,
    // column-major
    a: Vec<f64>,
    col_scale: f64,
    x: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
    r: Vec<f64>,
    passive: Vec<bool>,
    blocked: Vec<bool>,
    qr: Vec<f64>,
    rhs: Vec<f64>,
    idx: Vec<usize>,
}

impl NnlsSolver {
    pub fn new(columns: &[Vector]) -> Result<Self> {
        let first = columns.first().ok_or(Error::EmptyInput("NNLS columns"))?;
        let rows = first.len();
        let mut a = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: c.len(),
                });
            }
            a.extend(c.iter().copied());
        }
        Ok(Self::from_col_major(rows, columns.len(), a))
    }

    pub fn for_matrix(c: &StateMatrix) -> Self {
        let e = c.entries();
        Self::from_col_major(e.nrows(), e.ncols(), e.as_slice().to_vec())
    }

    fn from_col_major(rows: usize, cols: usize, a: Vec<f64>) -> Self {
        let col_scale = (0..cols)
            .map(|j| {
                a[j * rows..(j + 1) * rows]
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        Self {
            rows,
            cols,
            a,
            col_scale,
            x: vec![0.0; cols],
            z: vec![0.0; cols],
            w: vec![0.0; cols],
            r: vec![0.0; rows],
            passive: vec![false; cols],
            blocked: vec![false; cols],
            qr: vec![0.0; rows * cols],
            rhs: vec![0.0; rows],
            idx: Vec::with_capacity(cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.a[j * self.rows..(j + 1) * self.rows]
    }

    fn update_residual(&mut self, b: &[f64]) {
        self.r.copy_from_slice(b);
        for j in 0..self.cols {
            let xj = self.x[j];
            if xj != 0.0 {
                for i in 0..self.rows {
                    self.r[i] -= self.a[j * self.rows + i] * xj;
                }
            }
        }
        for j in 0..self.cols {
            let c = self.col(j);
            self.w[j] = c.iter().zip(&self.r).map(|(a, r)| a * r).sum();
        }
    }

    /// Unconstrained least squares over the passive columns, by Householder
    /// QR. Writes into `z`; returns false when the passive columns are
    /// numerically dependent.
    fn solve_passive(&mut self, b: &[f64]) -> bool {
        self.idx.clear();
        self.idx.extend((0..self.cols).filter(|&j| self.passive[j]));
        let k = self.idx.len();
        let m = self.rows;
        if k > m {
            return false;
        }
        for (p, &j) in self.idx.iter().enumerate() {
            let src = &self.a[j * m..(j + 1) * m];
            self.qr[p * m..(p + 1) * m].copy_from_slice(src);
        }
        self.rhs.copy_from_slice(b);
        let thresh = 1e-12 * self.col_scale.max(f64::MIN_POSITIVE);
        for p in 0..k {
            let colp = p * m;
            let norm = self.qr[colp + p..colp + m]
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt();
            if norm <= thresh {
                return false;
            }
            let alpha = if self.qr[colp + p] > 0.0 { -norm } else { norm };
            self.qr[colp + p] -= alpha;
            let vnorm2: f64 = self.qr[colp + p..colp + m].iter().map(|x| x * x).sum();
            if vnorm2 > 0.0 {
                for q in p + 1..k {
                    let colq = q * m;
                    let s: f64 = (p..m).map(|i| self.qr[colp + i] * self.qr[colq + i]).sum();
                    let f = 2.0 * s / vnorm2;
                    for i in p..m {
                        self.qr[colq + i] -= f * self.qr[colp + i];
                    }
                }
                let s: f64 = (p..m).map(|i| self.qr[colp + i] * self.rhs[i]).sum();
                let f = 2.0 * s / vnorm2;
                for i in p..m {
                    self.rhs[i] -= f * self.qr[colp + i];
                }
            }
            // R's diagonal entry; the strict upper part lives in later columns.
            self.qr[colp + p] = alpha;
        }
        for p in (0..k).rev() {
            let mut s = self.rhs[p];
            for q in p + 1..k {
                s -= self.qr[q * m + p] * self.z[self.idx[q]];
            }
            self.z[self.idx[p]] = s / self.qr[p * m + p];
        }
        true
    }

    /// Minimize `‖b − A w‖²` subject to `w ≥ 0`.
    pub fn solve(&mut self, b: &[f64]) -> Result<NnlsFit> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let n = self.cols;
        self.x.iter_mut().for_each(|x| *x = 0.0);
        self.passive.iter_mut().for_each(|p| *p = false);
        self.blocked.iter_mut().for_each(|p| *p = false);
        let bnorm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let tol = TOL_KKT * (self.col_scale * bnorm).max(1.0);
        let limit = 10 * n.max(1);
        let mut iterations = 0;

        self.update_residual(b);
        loop {
            // Largest positive gradient component among the active
            // (zero-clamped) variables; ties go to the smallest index.
            let mut t = None;
            let mut best = tol;
            for j in 0..n {
                if !self.passive[j] && !self.blocked[j] && self.w[j] > best {
                    best = self.w[j];
                    t = Some(j);
                }
            }
            let Some(t) = t else { break };
            iterations += 1;
            if iterations > limit {
                return Err(Error::IterationLimit(limit));
            }
            self.passive[t] = true;

            loop {
                if !self.solve_passive(b) {
                    self.passive[t] = false;
                    break;
                }
                if self.idx.iter().all(|&j| self.z[j] > 0.0) {
                    for j in 0..n {
                        self.x[j] = if self.passive[j] { self.z[j] } else { 0.0 };
                    }
                    break;
                }
                let mut alpha = f64::INFINITY;
                let mut leaving = t;
                for &j in &self.idx {
                    if self.z[j] <= 0.0 {
                        let denom = self.x[j] - self.z[j];
                        let step = if denom > 0.0 { self.x[j] / denom } else { 0.0 };
                        if step < alpha {
                            alpha = step;
                            leaving = j;
                        }
                    }
                }
                for j in 0..n {
                    if self.passive[j] {
                        self.x[j] += alpha * (self.z[j] - self.x[j]);
                        if j == leaving || self.x[j] <= 0.0 {
                            self.x[j] = 0.0;
                            self.passive[j] = false;
                        }
                    }
                }
                iterations += 1;
                if iterations > limit {
                    return Err(Error::IterationLimit(limit));
                }
            }
            // A variable that cannot stay free would be re-selected forever;
            // park it until another variable enters successfully.
            if self.passive[t] {
                self.blocked.iter_mut().for_each(|p| *p = false);
            } else {
                self.blocked[t] = true;
            }
            self.update_residual(b);
        }
        let residual_sq = self.r.iter().map(|x| x * x).sum();
        Ok(NnlsFit {
            weights: self.x.clone(),
            residual_sq,
            iterations,
        })
    }
}

/// Weights minimizing the readout error for `target`.
pub fn nnls(c: &StateMatrix, target: &Vector) -> Result<WeightVector> {
    let mut solver = NnlsSolver::for_matrix(c);
    Ok(WeightVector(solver.solve(target.as_slice())?.weights))
}

/// `‖target − C w‖²`.
pub fn residual_sq(c: &StateMatrix, w: &WeightVector, target: &Vector) -> Result<f64> {
    if w.0.len() != c.neurons() {
        return Err(Error::DimensionMismatch {
            expected: c.neurons(),
            found: w.0.len(),
        });
    }
    if target.len() != c.states() {
        return Err(Error::DimensionMismatch {
            expected: c.states(),
            found: target.len(),
        });
    }
    let fitted = c.entries() * Vector::from_column_slice(&w.0);
    Ok((target - fitted).norm_squared())
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureResult {
    pub ir_num: f64,
    pub irn_num: f64,
    /// Samples per axis.
    pub n: usize,
    pub total_samples: u128,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Midpoint-rule estimate of the representation error on an `n^m` grid.
///
/// The grid is split into slabs along the first axis; each slab is summed
/// in lexicographic order and slabs are reduced in index order, so the
/// result does not depend on the number of worker threads.
pub fn ir_num(c: &StateMatrix, n: usize, budget: u128) -> Result<QuadratureResult> {
    let start = Instant::now();
    let m = c.states();
    if n == 0 {
        return Err(Error::InvalidMatrix(
            "samples per axis must be at least 1".into(),
        ));
    }
    let total = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded {
            what: "quadrature samples",
            value: total,
            limit: budget,
        });
    }
    let inner = (n as u128).pow(m as u32 - 1) as usize;
    let h = 1.0 / n as f64;
    let template = NnlsSolver::for_matrix(c);

    let slabs: Vec<f64> = (0..n)
        .into_par_iter()
        .map_init(
            || (template.clone(), vec![0.0; m], vec![0usize; m]),
            |(solver, point, digits), first| -> Result<f64> {
                let mut sum = 0.0;
                digits.iter_mut().for_each(|d| *d = 0);
                digits[0] = first;
                for _ in 0..inner {
                    for (p, d) in point.iter_mut().zip(digits.iter()) {
                        *p = (*d as f64 + 0.5) * h;
                    }
                    sum += solver.solve(point)?.residual_sq;
                    // Advance the last axis fastest.
                    for axis in (1..m).rev() {
                        digits[axis] += 1;
                        if digits[axis] < n {
                            break;
                        }
                        digits[axis] = 0;
                    }
                }
                Ok(sum)
            },
        )
        .collect::<Result<Vec<f64>>>()?;

    let ir = slabs.iter().fold(0.0, |acc, x| acc + x) / total as f64;
    Ok(QuadratureResult {
        ir_num: ir,
        irn_num: ir / (m as f64 / 3.0),
        n,
        total_samples: total,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub ir_num: f64,
    pub abs_error: f64,
}

/// `ir_num` at each resolution against a known analytical value.
pub fn convergence_study(
    c: &StateMatrix,
    ns: &[usize],
    analytical: f64,
    budget: u128,
) -> Result<Vec<ConvergenceRow>> {
    ns.iter()
        .map(|&n| {
            let q = ir_num(c, n, budget)?;
            Ok(ConvergenceRow {
                n,
                ir_num: q.ir_num,
                abs_error: (q.ir_num - analytical).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[Vec<f64>]) -> StateMatrix {
        StateMatrix::from_rows(rows).unwrap()
    }

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn identity_fits_exactly() {
        let c = StateMatrix::identity(2);
        let w = nnls(&c, &v(&[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(w.0[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w.0[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(residual_sq(&c, &w, &v(&[0.5, 0.5])).unwrap(), 0.0);
    }

    #[test]
    fn single_column_projection() {
        // min (1-w)^2 + w^2 at w = 1/2, value 1/2
        let c = m(&[vec![1.0], vec![1.0]]);
        let t = v(&[1.0, 0.0]);
        let w = nnls(&c, &t).unwrap();
        assert_abs_diff_eq!(w.0[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(residual_sq(&c, &w, &t).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn orthogonal_target_keeps_zero_weight() {
        let c = m(&[vec![1.0], vec![0.0]]);
        let t = v(&[0.0, 1.0]);
        let w = nnls(&c, &t).unwrap();
        assert_eq!(w.0, vec![0.0]);
        assert_abs_diff_eq!(residual_sq(&c, &w, &t).unwrap(), 1.0);
    }

    #[test]
    fn zero_weight_residual_is_target_norm() {
        let c = m(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let t = v(&[0.3, 0.4]);
        let r = residual_sq(&c, &WeightVector(vec![0.0, 0.0]), &t).unwrap();
        assert_abs_diff_eq!(r, 0.25, epsilon = 1e-15);
        assert!(residual_sq(&c, &WeightVector(vec![0.0]), &t).is_err());
    }

    #[test]
    fn kkt_conditions_hold() {
        let c = m(&[
            vec![1., 3., 1., 2.],
            vec![1., 2., 0., 1.],
            vec![0.5, 0., 2., 1.],
        ]);
        let t = v(&[0.2, 0.9, 0.1]);
        let mut s = NnlsSolver::for_matrix(&c);
        let fit = s.solve(t.as_slice()).unwrap();
        let w = Vector::from_vec(fit.weights.clone());
        let grad = c.entries().transpose() * (&t - c.entries() * &w);
        for j in 0..4 {
            if fit.weights[j] > 0.0 {
                assert!(grad[j].abs() < 1e-10);
            } else {
                assert!(grad[j] <= 1e-10);
            }
        }
    }

    #[test]
    fn duplicate_columns_are_handled() {
        let c = m(&[vec![1., 2., 0.], vec![1., 2., 0.]]);
        let t = v(&[1.0, 0.5]);
        let w = nnls(&c, &t).unwrap();
        assert_abs_diff_eq!(residual_sq(&c, &w, &t).unwrap(), 0.125, epsilon = 1e-14);
    }

    #[test]
    fn zero_matrix_in_one_dimension() {
        let c = m(&[vec![0.0]]);
        let q = ir_num(&c, 2, DEFAULT_SAMPLE_BUDGET).unwrap();
        assert_abs_diff_eq!(q.ir_num, 0.3125, epsilon = 1e-15);
        assert_eq!(q.total_samples, 2);
    }

    #[test]
    fn identity_quadrature_is_zero() {
        for n in [1, 3, 8] {
            let q = ir_num(&StateMatrix::identity(3), n, DEFAULT_SAMPLE_BUDGET).unwrap();
            assert_eq!(q.ir_num, 0.0);
        }
    }

    #[test]
    fn zero_matrix_midpoint_sum_in_two_dimensions() {
        // (1/n²) Σ ‖p‖² = 2/3 − 1/(6n²)
        let c = StateMatrix::zeros(2, 2).unwrap();
        for n in [4usize, 8] {
            let q = ir_num(&c, n, DEFAULT_SAMPLE_BUDGET).unwrap();
            let expect = 2.0 / 3.0 - 1.0 / (6.0 * (n * n) as f64);
            assert_abs_diff_eq!(q.ir_num, expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let c = StateMatrix::identity(3);
        assert!(matches!(
            ir_num(&c, 100, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
