//! Regions of the unit hypercube served by one cone element: the adjacent
//! cone clipped to `[0,1]^m`, its vertex set, facets and triangulation.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::cone::{cone_contains, cone_sub_elements, AdjacentCone, Cone};
use crate::error::{Error, Result};
use crate::facets::cone_facets;
use crate::integrate::Simplex;
use crate::linalg::{affine_dimension, gram_schmidt, lex_cmp, Vector};
use crate::tolerance::Tolerances;

/// A face of the unit hypercube: some coordinates pinned to 0 or 1, the
/// rest free in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeElement {
    pub fixed: Vec<(usize, f64)>,
    pub free: Vec<usize>,
}

impl HypercubeElement {
    pub fn dimension(&self) -> usize {
        self.free.len()
    }
}

fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Every `dimension`-dimensional face of `[0,1]^m`.
pub fn hypercube_elements(m: usize, dimension: usize) -> Vec<HypercubeElement> {
    if dimension > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    for fixed in subsets(m, m - dimension) {
        let free: Vec<usize> = (0..m).filter(|i| !fixed.contains(i)).collect();
        for mask in 0..(1u64 << fixed.len()) {
            out.push(HypercubeElement {
                fixed: fixed
                    .iter()
                    .enumerate()
                    .map(|(b, &i)| (i, ((mask >> b) & 1) as f64))
                    .collect(),
                free: free.clone(),
            });
        }
    }
    out
}

/// Face lattice of an adjacent cone, or `None` when its generators do not
/// span the space (the region is then degenerate).
pub fn adjacent_lattice(adj: &AdjacentCone, tol: &Tolerances) -> Result<Option<Cone>> {
    let lattice = Cone::from_generators(&adj.generators, tol)?;
    if !lattice.is_full_dimensional() {
        return Ok(None);
    }
    Ok(Some(cone_sub_elements(lattice)))
}

#[derive(Debug, Clone, Default)]
pub struct Intersection {
    pub vertices: Vec<Vector>,
    /// Intersection systems skipped as ill-conditioned.
    pub skipped_systems: usize,
}

fn push_unique(points: &mut Vec<Vector>, p: Vector, tol: f64) {
    if !points.iter().any(|q| (q - &p).amax() <= tol) {
        points.push(p);
    }
}

/// Candidate vertices of `cone ∩ [0,1]^m`: the apex, plus every point
/// where a `j`-dimensional face of the cone meets an `(m − j)`-dimensional
/// face of the cube inside both. `j = m` covers cube vertices inside the
/// cone.
pub fn hypercube_intersect(lattice: &Cone, tol: &Tolerances) -> Result<Intersection> {
    let m = lattice.dim();
    let mut out = Intersection::default();
    out.vertices.push(Vector::zeros(m));

    let whole: Vec<usize> = (0..lattice.rays().len()).collect();
    let mut faces: Vec<(usize, &[usize])> = Vec::new();
    for j in 1..m {
        faces.extend(lattice.elements(j).iter().map(|e| (j, e.as_slice())));
    }
    faces.push((m, whole.as_slice()));

    for (j, face) in faces {
        let rays = lattice.element_rays(face);
        let basis = gram_schmidt(&rays)?;
        if basis.rank() != j {
            continue;
        }
        let b = basis.to_matrix();
        for pinned in subsets(m, j) {
            let sub = DMatrix::from_fn(j, j, |r, c| b[(pinned[r], c)]);
            let sv = sub.singular_values();
            let (smax, smin) = (sv.max(), sv.min());
            if smin <= 0.0 || smax / smin > tol.max_condition {
                out.skipped_systems += 1;
                continue;
            }
            let lu = sub.lu();
            for mask in 0..(1u64 << j) {
                let rhs = DVector::from_fn(j, |r, _| ((mask >> r) & 1) as f64);
                let Some(coef) = lu.solve(&rhs) else {
                    continue;
                };
                let mut x = &b * coef;
                if x.iter().any(|&xi| xi < -tol.dedup || xi > 1.0 + tol.dedup) {
                    continue;
                }
                if !cone_contains(&x, &rays, tol) {
                    continue;
                }
                for (r, &i) in pinned.iter().enumerate() {
                    x[i] = ((mask >> r) & 1) as f64;
                }
                x.iter_mut().for_each(|xi| *xi = xi.clamp(0.0, 1.0));
                push_unique(&mut out.vertices, x, tol.dedup);
            }
        }
    }
    out.vertices.sort_by(lex_cmp);
    Ok(out)
}

/// Facets of `conv(vertices)` as sets of vertex indices.
///
/// Only extreme points appear in the facet sets; points on the boundary
/// that are not vertices are dropped. Returns no facets when the points
/// are not full-dimensional.
pub fn polytope_facets(vertices: &[Vector], tol: &Tolerances) -> Result<Vec<Vec<usize>>> {
    let Some(first) = vertices.first() else {
        return Ok(Vec::new());
    };
    let m = first.len();
    let refs: Vec<&Vector> = vertices.iter().collect();
    if vertices.len() < m + 1 || affine_dimension(&refs) != Some(m) {
        return Ok(Vec::new());
    }
    let lifted: Vec<Vector> = vertices
        .iter()
        .map(|v| Vector::from_iterator(m + 1, v.iter().copied().chain([1.0])))
        .collect();
    let raw: Vec<Vec<usize>> = cone_facets(&lifted, tol.geom)?
        .into_iter()
        .map(|f| f.incident)
        .collect();

    let extreme: Vec<bool> = (0..vertices.len())
        .map(|i| {
            let mut meet: Option<BTreeSet<usize>> = None;
            for f in raw.iter().filter(|f| f.contains(&i)) {
                let s: BTreeSet<usize> = f.iter().copied().collect();
                meet = Some(match meet {
                    None => s,
                    Some(acc) => acc.intersection(&s).copied().collect(),
                });
            }
            meet.is_some_and(|s| s.len() == 1)
        })
        .collect();

    let mut facets: Vec<Vec<usize>> = raw
        .into_iter()
        .map(|f| f.into_iter().filter(|&i| extreme[i]).collect())
        .collect();
    facets.sort();
    facets.dedup();
    Ok(facets)
}

/// Pulling (recursive fan) triangulation: from the lexicographically
/// smallest vertex of each face, cone over the triangulations of the
/// sub-faces not containing it.
pub fn triangulate_polytope(facets: &[Vec<usize>], vertices: &[Vector]) -> Vec<Simplex> {
    let Some(first) = vertices.first() else {
        return Vec::new();
    };
    if facets.is_empty() {
        return Vec::new();
    }
    let m = first.len();
    let all: BTreeSet<usize> = facets.iter().flatten().copied().collect();
    let all: Vec<usize> = all.into_iter().collect();
    let mut out = Vec::new();
    pull(&all, m, facets, vertices, &mut out);
    out.into_iter()
        .map(|ix| Simplex::new(ix.into_iter().map(|i| vertices[i].clone()).collect()))
        .collect()
}

fn face_dimension(face: &[usize], vertices: &[Vector]) -> Option<usize> {
    let pts: Vec<&Vector> = face.iter().map(|&i| &vertices[i]).collect();
    affine_dimension(&pts)
}

fn pull(
    face: &[usize],
    dim: usize,
    facets: &[Vec<usize>],
    vertices: &[Vector],
    out: &mut Vec<Vec<usize>>,
) {
    if dim == 0 {
        out.push(vec![face[0]]);
        return;
    }
    let apex = *face
        .iter()
        .min_by(|&&a, &&b| lex_cmp(&vertices[a], &vertices[b]))
        .expect("faces are nonempty");
    let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for f in facets {
        if face.iter().all(|i| f.contains(i)) {
            continue;
        }
        let meet: Vec<usize> = face.iter().copied().filter(|i| f.contains(i)).collect();
        if meet.len() >= dim && face_dimension(&meet, vertices) == Some(dim - 1) {
            subfaces.insert(meet);
        }
    }
    for sub in subfaces.iter().filter(|s| !s.contains(&apex)) {
        let start = out.len();
        pull(sub, dim - 1, facets, vertices, out);
        for simplex in &mut out[start..] {
            simplex.push(apex);
        }
    }
}

/// One cell of the hypercube partition.
#[derive(Debug, Clone)]
pub struct RegionPolytope {
    pub element: Vec<usize>,
    pub vertices: Vec<Vector>,
    pub simplices: Vec<Simplex>,
    pub volume: f64,
    pub skipped_systems: usize,
}

impl RegionPolytope {
    pub fn is_degenerate(&self) -> bool {
        self.simplices.is_empty()
    }
}

/// Clip an adjacent cone to the hypercube and triangulate the result.
pub fn build_region(
    adj: &AdjacentCone,
    tol: &Tolerances,
    max_simplices: usize,
) -> Result<RegionPolytope> {
    let empty = |skipped| RegionPolytope {
        element: adj.element.clone(),
        vertices: Vec::new(),
        simplices: Vec::new(),
        volume: 0.0,
        skipped_systems: skipped,
    };
    let Some(lattice) = adjacent_lattice(adj, tol)? else {
        return Ok(empty(0));
    };
    let hit = hypercube_intersect(&lattice, tol)?;
    let facets = polytope_facets(&hit.vertices, tol)?;
    if facets.is_empty() {
        let mut r = empty(hit.skipped_systems);
        r.vertices = hit.vertices;
        return Ok(r);
    }
    let simplices = triangulate_polytope(&facets, &hit.vertices);
    if simplices.len() > max_simplices {
        return Err(Error::BudgetExceeded {
            what: "simplices per region",
            value: simplices.len() as u128,
            limit: max_simplices as u128,
        });
    }
    let keep: BTreeSet<usize> = facets.iter().flatten().copied().collect();
    let vertices: Vec<Vector> = keep.into_iter().map(|i| hit.vertices[i].clone()).collect();
    let volume = simplices
        .iter()
        .map(Simplex::volume)
        .fold(0.0, |acc, x| acc + x);
    Ok(RegionPolytope {
        element: adj.element.clone(),
        vertices,
        simplices,
        volume,
        skipped_systems: hit.skipped_systems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn cube(m: usize) -> Vec<Vector> {
        (0..1u32 << m)
            .map(|mask| Vector::from_fn(m, |i, _| ((mask >> i) & 1) as f64))
            .collect()
    }

    fn adj_from(gens: Vec<Vector>) -> AdjacentCone {
        AdjacentCone {
            element: vec![0],
            dimension: 1,
            element_rays: vec![gens[0].clone()],
            normals: gens[1..].to_vec(),
            generators: gens,
        }
    }

    #[test]
    fn cube_faces_count() {
        assert_eq!(hypercube_elements(3, 0).len(), 8);
        assert_eq!(hypercube_elements(3, 1).len(), 12);
        assert_eq!(hypercube_elements(3, 2).len(), 6);
        assert_eq!(hypercube_elements(3, 3).len(), 1);
        let e = &hypercube_elements(3, 1)[0];
        assert_eq!(e.dimension(), 1);
        assert_eq!(e.fixed.len() + e.free.len(), 3);
    }

    #[test]
    fn facets_of_square_triangle_and_cube() {
        assert_eq!(polytope_facets(&cube(2), &tol()).unwrap().len(), 4);
        let tri = [v(&[0., 0.]), v(&[1., 1.]), v(&[0., 1.])];
        assert_eq!(polytope_facets(&tri, &tol()).unwrap().len(), 3);
        let f = polytope_facets(&cube(3), &tol()).unwrap();
        assert_eq!(f.len(), 6);
        assert!(f.iter().all(|s| s.len() == 4));
    }

    #[test]
    fn boundary_points_are_not_vertices() {
        let mut pts = cube(2);
        pts.push(v(&[0.5, 0.0]));
        pts.push(v(&[0.5, 0.5]));
        let f = polytope_facets(&pts, &tol()).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f
            .iter()
            .all(|s| s.len() == 2 && !s.contains(&4) && !s.contains(&5)));
    }

    #[test]
    fn triangulations() {
        let sq = cube(2);
        let s = triangulate_polytope(&polytope_facets(&sq, &tol()).unwrap(), &sq);
        assert_eq!(s.len(), 2);
        for t in &s {
            assert_abs_diff_eq!(t.volume(), 0.5, epsilon = 1e-15);
            assert!(t.vertices().contains(&v(&[0., 0.])));
        }
        let tri = vec![v(&[0., 0.]), v(&[1., 1.]), v(&[0., 1.])];
        let s = triangulate_polytope(&polytope_facets(&tri, &tol()).unwrap(), &tri);
        assert_eq!(s.len(), 1);
        let c = cube(3);
        let s = triangulate_polytope(&polytope_facets(&c, &tol()).unwrap(), &c);
        let total: f64 = s.iter().map(Simplex::volume).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn region_above_diagonal() {
        let h = 1.0 / 2f64.sqrt();
        let adj = adj_from(vec![v(&[h, h]), v(&[-h, h])]);
        let r = build_region(&adj, &tol(), 1000).unwrap();
        let mut got = r.vertices.clone();
        got.sort_by(lex_cmp);
        assert_eq!(got, vec![v(&[0., 0.]), v(&[0., 1.]), v(&[1., 1.])]);
        assert_abs_diff_eq!(r.volume, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn region_below_axis_is_degenerate() {
        let adj = adj_from(vec![v(&[1., 0.]), v(&[0., -1.])]);
        let lattice = adjacent_lattice(&adj, &tol()).unwrap().unwrap();
        let hit = hypercube_intersect(&lattice, &tol()).unwrap();
        assert_eq!(hit.vertices, vec![v(&[0., 0.]), v(&[1., 0.])]);
        let r = build_region(&adj, &tol(), 1000).unwrap();
        assert!(r.is_degenerate());
        assert_eq!(r.volume, 0.0);
    }
}
