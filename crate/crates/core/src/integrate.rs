//! Exact integration of the squared distance to a linear subspace over
//! simplices.
//!
//! The squared distance `q(x) = xᵀx − ‖Bᵀx‖²` is a homogeneous quadratic,
//! and for any quadratic form the integral over a simplex with vertices
//! `v₀ … v_m` is `vol / C(m+2, 2) · Σ_{i ≤ j} q̃(vᵢ, vⱼ)`, with `q̃` the
//! associated symmetric bilinear form.

use crate::linalg::{simplex_volume, OrthonormalBasis, Vector};

/// `m + 1` vertices in `R^m` together with their volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vector>,
    volume: f64,
}

impl Simplex {
    pub fn new(vertices: Vec<Vector>) -> Self {
        let volume = simplex_volume(&vertices);
        Self { vertices, volume }
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }
}

/// Squared Euclidean distance from `point` to the span of `basis`.
pub fn squared_distance(point: &Vector, basis: &OrthonormalBasis) -> f64 {
    let d = point.norm_squared() - basis.coordinates(point).norm_squared();
    d.max(0.0)
}

fn bilinear(x: &Vector, bx: &Vector, y: &Vector, by: &Vector) -> f64 {
    x.dot(y) - bx.dot(by)
}

/// Integral of `squared_distance(·, basis)` over `simplex`.
pub fn simplex_integral(simplex: &Simplex, basis: &OrthonormalBasis) -> f64 {
    let vol = simplex.volume();
    if vol == 0.0 {
        return 0.0;
    }
    let verts = simplex.vertices();
    let m = verts.len() - 1;
    let coords: Vec<Vector> = verts.iter().map(|v| basis.coordinates(v)).collect();
    let mut sum = 0.0;
    for i in 0..verts.len() {
        for j in i..verts.len() {
            sum += bilinear(&verts[i], &coords[i], &verts[j], &coords[j]);
        }
    }
    let pairs = ((m + 2) * (m + 1) / 2) as f64;
    (vol / pairs * sum).max(0.0)
}

/// Sum of simplex integrals, in simplex order.
pub fn region_integral<'a>(
    simplices: impl IntoIterator<Item = &'a Simplex>,
    basis: &OrthonormalBasis,
) -> f64 {
    simplices
        .into_iter()
        .map(|s| simplex_integral(s, basis))
        .fold(0.0, |acc, x| acc + x)
}
