//! Facet enumeration of pointed polyhedral cones by the double description
//! method.
//!
//! The facets of `cone(g₁, …, g_k)` are in one-to-one correspondence with
//! the extreme rays of the polar cone `{a : gᵢ·a ≤ 0}`. Those are built one
//! constraint at a time; new rays come from pairs of adjacent rays on
//! opposite sides of the constraint, where adjacency is decided from the
//! incidence sets alone. That combinatorial test is what keeps degenerate
//! inputs (coplanar points, many generators on one facet) well behaved.

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{Vector, TOL_RANK};

/// One facet of a cone: its outward unit normal and the generators lying
/// on it.
#[derive(Debug, Clone)]
pub struct FacetRecord {
    pub normal: Vector,
    pub incident: Vec<usize>,
}

struct PolarRay {
    dir: Vector,
    tight: FixedBitSet,
}

/// Pick `dim` generators greedily by largest residual against the span of
/// those already chosen.
fn pivot_basis(gens: &[Vector], dim: usize) -> Option<Vec<usize>> {
    let mut chosen = Vec::with_capacity(dim);
    let mut ortho: Vec<Vector> = Vec::with_capacity(dim);
    let mut residuals: Vec<Vector> = gens.to_vec();
    for _ in 0..dim {
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(i, r)| (i, r.norm()))
            .fold(
                (usize::MAX, 0.0),
                |acc, (i, n)| if n > acc.1 { (i, n) } else { acc },
            );
        if best == usize::MAX || norm < TOL_RANK {
            return None;
        }
        let q = &residuals[best] / norm;
        for r in residuals.iter_mut() {
            let d = q.dot(r);
            r.axpy(-d, &q, 1.0);
        }
        ortho.push(q);
        chosen.push(best);
    }
    Some(chosen)
}

/// Facets of the cone generated by `generators`, which must span the
/// ambient space. The cone is assumed pointed.
pub fn cone_facets(generators: &[Vector], tol: f64) -> Result<Vec<FacetRecord>> {
    let Some(first) = generators.first() else {
        return Err(Error::EmptyInput("generators"));
    };
    let dim = first.len();
    let k = generators.len();
    let gens: Vec<Vector> = generators
        .iter()
        .map(|g| {
            let n = g.norm();
            if n > 0.0 {
                g / n
            } else {
                g.clone()
            }
        })
        .collect();

    let basis = pivot_basis(&gens, dim).ok_or_else(|| Error::RankDeficient {
        rank: crate::linalg::rank(&gens),
        needed: dim,
    })?;

    let a_b = DMatrix::from_fn(dim, dim, |i, j| gens[basis[i]][j]);
    let inv = a_b.try_inverse().ok_or(Error::RankDeficient {
        rank: dim - 1,
        needed: dim,
    })?;

    let mut rays: Vec<PolarRay> = (0..dim)
        .map(|j| {
            let dir = -inv.column(j).into_owned();
            let dir = dir.normalize();
            let mut tight = FixedBitSet::with_capacity(k);
            for (i, &b) in basis.iter().enumerate() {
                if i != j {
                    tight.insert(b);
                }
            }
            PolarRay { dir, tight }
        })
        .collect();

    let needed = dim.saturating_sub(2);
    for (gi, g) in gens.iter().enumerate() {
        if basis.contains(&gi) {
            continue;
        }
        let slack: Vec<f64> = rays.iter().map(|r| g.dot(&r.dir)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| slack[i] > tol).collect();
        if pos.is_empty() {
            for (r, s) in rays.iter_mut().zip(&slack) {
                if s.abs() <= tol {
                    r.tight.insert(gi);
                }
            }
            continue;
        }
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| slack[i] < -tol).collect();

        let mut created = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let mut common = rays[p].tight.clone();
                common.intersect_with(&rays[n].tight);
                if common.count_ones(..) < needed {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(r, ray)| r != p && r != n && common.is_subset(&ray.tight));
                if blocked {
                    continue;
                }
                let mut dir = &rays[n].dir * slack[p] - &rays[p].dir * slack[n];
                let norm = dir.norm();
                if norm == 0.0 {
                    continue;
                }
                dir /= norm;
                common.insert(gi);
                created.push(PolarRay { dir, tight: common });
            }
        }

        let mut next: Vec<PolarRay> = Vec::with_capacity(rays.len() + created.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if slack[i] > tol {
                continue;
            }
            if slack[i] >= -tol {
                r.tight.insert(gi);
            }
            next.push(r);
        }
        next.extend(created);
        rays = next;
    }

    Ok(rays
        .into_iter()
        .filter_map(|r| {
            let incident: Vec<usize> = r.tight.ones().collect();
            let on_facet: Vec<Vector> = incident.iter().map(|&i| gens[i].clone()).collect();
            let facet_rank = if on_facet.is_empty() {
                0
            } else {
                crate::linalg::rank(&on_facet)
            };
            (facet_rank + 1 == dim).then_some(FacetRecord {
                normal: r.dir,
                incident,
            })
        })
        .collect())
}
