//! Small dense kernels: orthonormalization, generalized cross products,
//! determinants and simplex volumes.
//!
//! Everything here is sized for ambient dimensions of roughly 2 to 10.

use nalgebra::{DMatrix, DVector};
use std::cmp::Ordering;

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Relative residual below which a vector counts as dependent.
pub const TOL_RANK: f64 = 1e-9;
pub const TOL_ORTHO: f64 = 1e-10;
pub const TOL_GEOM: f64 = 1e-9;

/// Orthonormal columns spanning the same subspace as a set of source rays.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    columns: Vec<Vector>,
    sources: Vec<usize>,
}

impl OrthonormalBasis {
    /// The basis of the zero subspace of `R^dim`.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            columns: Vec::new(),
            sources: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vector] {
        &self.columns
    }

    /// Indices of the input rays that contributed a basis column.
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// Coordinates of `x` in the basis, i.e. `Bᵀx`.
    pub fn coordinates(&self, x: &Vector) -> Vector {
        Vector::from_iterator(self.columns.len(), self.columns.iter().map(|c| c.dot(x)))
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &Vector) -> Vector {
        let mut p = Vector::zeros(self.dim);
        for c in &self.columns {
            p.axpy(c.dot(x), c, 1.0);
        }
        p
    }

    /// The basis as an `m × i` matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        if self.columns.is_empty() {
            return DMatrix::zeros(self.dim, 0);
        }
        DMatrix::from_columns(&self.columns)
    }
}

fn check_dims(vectors: &[Vector]) -> Result<usize> {
    let first = vectors.first().ok_or(Error::EmptyInput("vector set"))?;
    let dim = first.len();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(dim)
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Vectors whose residual after projection falls below `TOL_RANK` times
/// their own norm are dropped, so the basis size is the numerical rank.
pub fn gram_schmidt(rays: &[Vector]) -> Result<OrthonormalBasis> {
    let dim = check_dims(rays)?;
    let mut basis = OrthonormalBasis::empty(dim);
    for (idx, ray) in rays.iter().enumerate() {
        let norm = ray.norm();
        if norm == 0.0 || !norm.is_finite() {
            continue;
        }
        let mut v = ray / norm;
        for _ in 0..2 {
            for c in &basis.columns {
                let d = c.dot(&v);
                v.axpy(-d, c, 1.0);
            }
        }
        let residual = v.norm();
        if residual < TOL_RANK {
            continue;
        }
        basis.columns.push(v / residual);
        basis.sources.push(idx);
        if basis.columns.len() == dim {
            break;
        }
    }
    Ok(basis)
}

/// Numerical rank of a vector set.
pub fn rank(vectors: &[Vector]) -> usize {
    gram_schmidt(vectors).map(|b| b.rank()).unwrap_or(0)
}

/// Dimension of the affine hull of a point set (-1 encoded as `None` for
/// an empty set).
pub fn affine_dimension(points: &[&Vector]) -> Option<usize> {
    let (first, rest) = points.split_first()?;
    let diffs: Vec<Vector> = rest.iter().map(|p| *p - *first).collect();
    if diffs.is_empty() {
        return Some(0);
    }
    // Differences can be tiny relative to unit scale; judge them on the
    // coordinate scale rather than their own norm.
    let scale = diffs.iter().map(|d| d.norm()).fold(0.0, f64::max);
    if scale < TOL_GEOM {
        return Some(0);
    }
    let scaled: Vec<Vector> = diffs.into_iter().filter(|d| d.norm() > TOL_GEOM).collect();
    Some(rank(&scaled))
}

/// Unit vector orthogonal to `m − 1` linearly independent vectors of
/// dimension `m`, computed by cofactor (Laplace) expansion of the
/// determinant whose first column is left symbolic.
///
/// The sign is arbitrary; callers orient the result.
pub fn normal_vector(vectors: &[Vector]) -> Result<Vector> {
    let dim = match vectors.first() {
        Some(v) => v.len(),
        None => return Ok(Vector::from_element(1, 1.0)),
    };
    check_dims(vectors)?;
    if vectors.len() + 1 != dim {
        return Err(Error::DimensionMismatch {
            expected: dim - 1,
            found: vectors.len(),
        });
    }
    let r = rank(vectors);
    if r < vectors.len() {
        return Err(Error::RankDeficient {
            rank: r,
            needed: vectors.len(),
        });
    }
    let units: Vec<Vector> = vectors.iter().map(|v| v.normalize()).collect();
    let m = DMatrix::from_columns(&units);
    let mut normal = Vector::zeros(dim);
    for i in 0..dim {
        let minor = m.clone().remove_row(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        normal[i] = sign * minor.determinant();
    }
    let norm = normal.norm();
    if norm < TOL_RANK {
        return Err(Error::RankDeficient {
            rank: r,
            needed: vectors.len(),
        });
    }
    Ok(normal / norm)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `|det(v₂ − v₁, …, v_{m+1} − v₁)| / m!`; zero for degenerate simplices.
pub fn simplex_volume(vertices: &[Vector]) -> f64 {
    let Some((first, rest)) = vertices.split_first() else {
        return 0.0;
    };
    let dim = first.len();
    if rest.len() != dim {
        return 0.0;
    }
    if dim == 0 {
        return 1.0;
    }
    let edges: Vec<Vector> = rest.iter().map(|v| v - first).collect();
    DMatrix::from_columns(&edges).determinant().abs() / factorial(dim)
}

/// Lexicographic order on coordinates.
pub fn lex_cmp(a: &Vector, b: &Vector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Solve a square system with LU and partial pivoting, rejecting systems
/// whose estimated condition number exceeds `max_condition`.
pub fn solve_conditioned(a: &DMatrix<f64>, b: &Vector, max_condition: f64) -> Option<Vector> {
    let sv = a.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 0.0 || smax / smin > max_condition {
        return None;
    }
    a.clone().lu().solve(b)
}
