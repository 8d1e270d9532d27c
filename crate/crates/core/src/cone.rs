//! Conical hull of the state-matrix columns and its face lattice.
//!
//! Rays are normalized to unit length on entry; column magnitudes never
//! change which outputs a nonnegative readout can reach.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::facets::cone_facets;
use crate::linalg::{self, lex_cmp, normal_vector, Vector};
use crate::oracle::NnlsSolver;
use crate::tolerance::Tolerances;

/// Nonnegative `m × n` activity matrix: rows are input states, columns are
/// the activity vectors of individual input neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix {
    entries: DMatrix<f64>,
}

impl StateMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be at least 1x1, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if let Some(((r, c), x)) = entries
            .iter()
            .enumerate()
            .map(|(i, x)| ((i % entries.nrows(), i / entries.nrows()), x))
            .find(|(_, x)| !x.is_finite() || **x < 0.0)
        {
            return Err(Error::InvalidMatrix(format!(
                "entry ({r}, {c}) = {x} is negative or not finite"
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(m, n))
    }

    pub fn identity(m: usize) -> Self {
        Self {
            entries: DMatrix::identity(m, m),
        }
    }

    /// Number of input states `m`.
    pub fn states(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of input neurons `n`.
    pub fn neurons(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn column(&self, k: usize) -> Vector {
        self.entries.column(k).into_owned()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.neurons()).map(|k| self.column(k)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0.0)
    }

    pub fn with_column(&self, column: &[f64]) -> Result<Self> {
        if column.len() != self.states() {
            return Err(Error::DimensionMismatch {
                expected: self.states(),
                found: column.len(),
            });
        }
        let n = self.neurons();
        let e = self.entries.clone().insert_column(n, 0.0);
        let mut e = e;
        e.column_mut(n).copy_from_slice(column);
        Self::new(e)
    }

    /// Multiply column `k` by `scale[k]`.
    pub fn scale_columns(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.neurons() {
            return Err(Error::DimensionMismatch {
                expected: self.neurons(),
                found: scale.len(),
            });
        }
        let mut e = self.entries.clone();
        for (k, s) in scale.iter().enumerate() {
            e.column_mut(k).scale_mut(*s);
        }
        Self::new(e)
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let e = DMatrix::from_fn(self.states(), self.neurons(), |i, j| {
            self.entries[(perm[i], j)]
        });
        Self::new(e)
    }

    /// Column `k` of the result is column `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let e = DMatrix::from_fn(self.states(), self.neurons(), |i, j| {
            self.entries[(i, perm[j])]
        });
        Self::new(e)
    }
}

/// A pointed polyhedral cone described by its extreme rays and face lattice.
///
/// Rays are indexed `0..rays.len()`; lattice elements are sorted sets of
/// those indices. `elements[i]` holds the `i`-dimensional faces for
/// `1 ≤ i ≤ dim − 1`; `elements[0]` is empty.
#[derive(Debug, Clone)]
pub struct Cone {
    dim: usize,
    rays: Vec<Vector>,
    ray_origins: Vec<Vec<usize>>,
    redundant: Vec<usize>,
    zero: Vec<usize>,
    rank: usize,
    facets: Vec<Vec<usize>>,
    elements: Vec<Vec<Vec<usize>>>,
}

impl Cone {
    /// Extreme rays and facets of `cone(generators)`.
    ///
    /// Zero generators are dropped, parallel ones merged, and generators
    /// that are conical combinations of the remaining rays are reported as
    /// redundant. Facets are only enumerated when the rays span the
    /// ambient space.
    pub fn from_generators(generators: &[Vector], tol: &Tolerances) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::EmptyInput("generators"));
        };
        let dim = first.len();
        for g in generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: g.len(),
                });
            }
        }

        let scale = generators.iter().map(|g| g.amax()).fold(0.0, f64::max);
        let mut zero = Vec::new();
        let mut units: Vec<Vector> = Vec::new();
        let mut origins: Vec<Vec<usize>> = Vec::new();
        for (k, g) in generators.iter().enumerate() {
            let norm = g.norm();
            if norm == 0.0 || g.amax() <= scale * 1e-14 {
                zero.push(k);
                continue;
            }
            let u = g / norm;
            match units.iter().position(|w| w.dot(&u) > 1.0 - tol.ray_merge) {
                Some(i) => origins[i].push(k),
                None => {
                    units.push(u);
                    origins.push(vec![k]);
                }
            }
        }

        let mut redundant = Vec::new();
        let mut keep = vec![true; units.len()];
        for i in 0..units.len() {
            let others: Vec<Vector> = (0..units.len())
                .filter(|&j| j != i && keep[j])
                .map(|j| units[j].clone())
                .collect();
            if others.is_empty() {
                continue;
            }
            let mut solver = NnlsSolver::new(&others)?;
            let fit = solver.solve(units[i].as_slice())?;
            if fit.residual_sq.sqrt() < tol.geom {
                keep[i] = false;
                redundant.extend(origins[i].iter().copied());
            }
        }

        let mut paired: Vec<(Vector, Vec<usize>)> = units
            .into_iter()
            .zip(origins)
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        paired.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        let (rays, ray_origins): (Vec<Vector>, Vec<Vec<usize>>) = paired.into_iter().unzip();
        redundant.sort_unstable();

        let rank = if rays.is_empty() {
            0
        } else {
            linalg::rank(&rays)
        };
        let facets = if rank == dim && dim >= 2 {
            let mut f: Vec<Vec<usize>> = cone_facets(&rays, tol.geom)?
                .into_iter()
                .map(|r| r.incident)
                .collect();
            f.sort();
            f.dedup();
            f
        } else {
            Vec::new()
        };

        Ok(Self {
            dim,
            rays,
            ray_origins,
            redundant,
            zero,
            rank,
            facets,
            elements: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vector] {
        &self.rays
    }

    /// Generator (column) indices merged into each ray.
    pub fn ray_origins(&self) -> &[Vec<usize>] {
        &self.ray_origins
    }

    /// Nonzero generators that are not extreme.
    pub fn redundant_generators(&self) -> &[usize] {
        &self.redundant
    }

    pub fn zero_generators(&self) -> &[usize] {
        &self.zero
    }

    /// Dimension of the span of the rays.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.rank == self.dim && self.dim >= 1
    }

    pub fn facets(&self) -> &[Vec<usize>] {
        &self.facets
    }

    /// Faces of dimension `i`, or an empty slice outside `1..dim`.
    pub fn elements(&self, i: usize) -> &[Vec<usize>] {
        self.elements.get(i).map_or(&[], Vec::as_slice)
    }

    pub fn element_count(&self) -> usize {
        self.elements.iter().map(Vec::len).sum()
    }

    /// All lattice elements, lowest dimension first.
    pub fn all_elements(&self) -> impl Iterator<Item = (usize, &Vec<usize>)> {
        self.elements
            .iter()
            .enumerate()
            .flat_map(|(i, es)| es.iter().map(move |e| (i, e)))
    }

    pub fn element_rays(&self, element: &[usize]) -> Vec<Vector> {
        element.iter().map(|&r| self.rays[r].clone()).collect()
    }

    fn span_rank(&self, element: &[usize]) -> usize {
        if element.is_empty() {
            0
        } else {
            linalg::rank(&self.element_rays(element))
        }
    }

    pub fn contains_element(&self, element: &[usize]) -> bool {
        let i = self.span_rank(element);
        self.elements(i).iter().any(|e| e == element)
    }
}

/// Extreme rays and facets of `coni(C)`.
pub fn coni_facets(c: &StateMatrix, tol: &Tolerances) -> Result<Cone> {
    if c.is_zero() {
        return Err(Error::AllZeroMatrix);
    }
    Cone::from_generators(&c.columns(), tol)
}

/// Populate the face lattice from the facets by repeated intersection.
pub fn cone_sub_elements(mut cone: Cone) -> Cone {
    let m = cone.dim;
    let mut elements: Vec<Vec<Vec<usize>>> = vec![Vec::new(); m.max(1)];
    if m >= 2 && !cone.facets.is_empty() {
        elements[m - 1] = cone.facets.clone();
        for i in (1..m - 1).rev() {
            let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
            for upper in &elements[i + 1] {
                for facet in &cone.facets {
                    if upper.iter().all(|r| facet.contains(r)) {
                        continue;
                    }
                    let common: Vec<usize> = upper
                        .iter()
                        .copied()
                        .filter(|r| facet.contains(r))
                        .collect();
                    if common.len() >= i && cone.span_rank(&common) == i {
                        found.insert(common);
                    }
                }
            }
            elements[i] = found.into_iter().collect();
        }
    }
    cone.elements = elements;
    cone
}

/// Facets whose ray set contains `element`. A facet is its own single
/// adjacent facet.
pub fn adjacent_facets(element: &[usize], cone: &Cone) -> Result<Vec<Vec<usize>>> {
    if !cone.contains_element(element) {
        return Err(Error::UnknownElement(element.to_vec()));
    }
    Ok(cone
        .facets
        .iter()
        .filter(|f| element.iter().all(|r| f.contains(r)))
        .cloned()
        .collect())
}

/// Unit normal of a facet, pointing away from the cone.
pub fn facet_normal_outward(facet: &[usize], cone: &Cone, tol: &Tolerances) -> Result<Vector> {
    let rays = cone.element_rays(facet);
    let basis = linalg::gram_schmidt(&rays)?;
    let spanning: Vec<Vector> = basis.sources().iter().map(|&s| rays[s].clone()).collect();
    if spanning.len() + 1 != cone.dim {
        return Err(Error::RankDeficient {
            rank: spanning.len(),
            needed: cone.dim - 1,
        });
    }
    let normal = normal_vector(&spanning)?;
    let mut sign = 0.0;
    for (i, r) in cone.rays.iter().enumerate() {
        if facet.contains(&i) {
            continue;
        }
        let d = normal.dot(r);
        if d.abs() > tol.geom {
            sign = d.signum();
            break;
        }
    }
    if sign == 0.0 {
        return Err(Error::AmbiguousOrientation);
    }
    Ok(if sign > 0.0 { -normal } else { normal })
}

/// Region generators for one lattice element: the element's rays plus the
/// outward normals of all facets containing it. The generated cone holds
/// exactly the points whose nearest point of the cone lies in the element.
#[derive(Debug, Clone)]
pub struct AdjacentCone {
    pub element: Vec<usize>,
    pub dimension: usize,
    pub element_rays: Vec<Vector>,
    pub normals: Vec<Vector>,
    pub generators: Vec<Vector>,
}

pub fn adjacent_cone(element: &[usize], cone: &Cone, tol: &Tolerances) -> Result<AdjacentCone> {
    if !cone.is_full_dimensional() {
        return Err(Error::RankDeficient {
            rank: cone.rank,
            needed: cone.dim,
        });
    }
    let facets = adjacent_facets(element, cone)?;
    let normals = facets
        .iter()
        .map(|f| facet_normal_outward(f, cone, tol))
        .collect::<Result<Vec<_>>>()?;
    let element_rays = cone.element_rays(element);
    let mut generators = element_rays.clone();
    generators.extend(normals.iter().cloned());
    Ok(AdjacentCone {
        element: element.to_vec(),
        dimension: cone.span_rank(element),
        element_rays,
        normals,
        generators,
    })
}

/// Membership by NNLS: true when the best nonnegative fit of `point` by
/// the generators leaves a residual norm under `tol.member`.
pub fn cone_contains(point: &Vector, generators: &[Vector], tol: &Tolerances) -> bool {
    if point.norm() <= tol.member {
        return true;
    }
    if generators.is_empty() {
        return false;
    }
    let Ok(mut solver) = NnlsSolver::new(generators) else {
        return false;
    };
    solver
        .solve(point.as_slice())
        .map(|fit| fit.residual_sq.sqrt() < tol.member)
        .unwrap_or(false)
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

    fn lattice(rows: &[Vec<f64>]) -> Cone {
        let c = StateMatrix::from_rows(rows).unwrap();
        cone_sub_elements(coni_facets(&c, &tol()).unwrap())
    }

    fn tri_cone() -> Cone {
        lattice(&[vec![2., 3., 0.], vec![3., 1., 0.], vec![1., 1., 1.]])
    }

    fn origin_of(cone: &Cone, col: usize) -> usize {
        cone.ray_origins()
            .iter()
            .position(|o| o.contains(&col))
            .unwrap()
    }

    #[test]
    fn state_matrix_rejects_negative_entries() {
        assert!(StateMatrix::from_rows(&[vec![1.0, -0.5]]).is_err());
        assert!(StateMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(StateMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn wedge_redundant_columns() {
        let c = StateMatrix::from_rows(&[vec![1., 3., 1., 2.], vec![1., 2., 0., 1.]]).unwrap();
        let cone = coni_facets(&c, &tol()).unwrap();
        assert_eq!(cone.rays().len(), 2);
        let mut extreme: Vec<usize> = cone.ray_origins().iter().flatten().copied().collect();
        extreme.sort();
        assert_eq!(extreme, vec![0, 2]);
        assert_eq!(cone.redundant_generators(), &[1, 3]);
        assert_eq!(cone.facets().len(), 2);
    }

    #[test]
    fn orthant_lattice() {
        let cone = lattice(&[vec![1., 0., 0.], vec![0., 1., 0.], vec![0., 0., 1.]]);
        assert_eq!(cone.rays().len(), 3);
        assert_eq!(cone.facets(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(cone.elements(1), &[vec![0], vec![1], vec![2]]);
        assert_eq!(cone.elements(2).len(), 3);
    }

    #[test]
    fn tri_cone_has_three_faces_and_three_edges() {
        let cone = tri_cone();
        assert_eq!(cone.rays().len(), 3);
        assert_eq!(cone.elements(1).len(), 3);
        assert_eq!(cone.elements(2).len(), 3);
        assert_eq!(cone.element_count(), 6);
    }

    #[test]
    fn planar_cone_has_only_edges() {
        let cone = lattice(&[vec![1., 1.], vec![1., 0.]]);
        assert_eq!(cone.elements(1), &[vec![0], vec![1]]);
        assert_eq!(cone.element_count(), 2);
    }

    #[test]
    fn all_zero_matrix_is_an_error() {
        let c = StateMatrix::zeros(3, 2).unwrap();
        assert!(matches!(coni_facets(&c, &tol()), Err(Error::AllZeroMatrix)));
    }

    #[test]
    fn adjacent_facets_of_orthant() {
        let cone = lattice(&[vec![1., 0., 0.], vec![0., 1., 0.], vec![0., 0., 1.]]);
        let a = adjacent_facets(&[0], &cone).unwrap();
        assert_eq!(a, vec![vec![0, 1], vec![0, 2]]);
        let a = adjacent_facets(&[0, 1], &cone).unwrap();
        assert_eq!(a, vec![vec![0, 1]]);
        assert!(matches!(
            adjacent_facets(&[0, 1, 2], &cone),
            Err(Error::UnknownElement(_))
        ));
    }

    #[test]
    fn tri_cone_edge_u1_touches_faces_with_u2_and_u3() {
        let cone = tri_cone();
        let u1 = origin_of(&cone, 0);
        let u2 = origin_of(&cone, 1);
        let u3 = origin_of(&cone, 2);
        let mut a = adjacent_facets(&[u1], &cone).unwrap();
        a.sort();
        let mut want = vec![
            {
                let mut f = vec![u1, u2];
                f.sort();
                f
            },
            {
                let mut f = vec![u1, u3];
                f.sort();
                f
            },
        ];
        want.sort();
        assert_eq!(a, want);
        let adj = adjacent_cone(&[u1], &cone, &tol()).unwrap();
        assert_eq!(adj.generators.len(), 3);
        assert_eq!(linalg::rank(&adj.generators), 3);
    }

    #[test]
    fn outward_normals() {
        let cone = lattice(&[vec![1., 0., 0.], vec![0., 1., 0.], vec![0., 0., 1.]]);
        // rays sorted lexicographically: e3, e2, e1
        let e1 = origin_of(&cone, 0);
        let e2 = origin_of(&cone, 1);
        let mut f = vec![e1, e2];
        f.sort();
        let n = facet_normal_outward(&f, &cone, &tol()).unwrap();
        assert_abs_diff_eq!(n, v(&[0., 0., -1.]), epsilon = 1e-12);

        let planar = lattice(&[vec![1., 1.], vec![1., 0.]]);
        let diag = origin_of(&planar, 0);
        let axis = origin_of(&planar, 1);
        let h = 1.0 / 2f64.sqrt();
        let n = facet_normal_outward(&[diag], &planar, &tol()).unwrap();
        assert_abs_diff_eq!(n, v(&[-h, h]), epsilon = 1e-12);
        let n = facet_normal_outward(&[axis], &planar, &tol()).unwrap();
        assert_abs_diff_eq!(n, v(&[0., -1.]), epsilon = 1e-12);
    }

    #[test]
    fn adjacent_cone_of_orthant_edge() {
        let cone = lattice(&[vec![1., 0.], vec![0., 1.]]);
        let e1 = origin_of(&cone, 0);
        let adj = adjacent_cone(&[e1], &cone, &tol()).unwrap();
        assert_eq!(adj.generators.len(), 2);
        assert_abs_diff_eq!(adj.generators[0], v(&[1., 0.]), epsilon = 1e-12);
        assert_abs_diff_eq!(adj.generators[1], v(&[0., -1.]), epsilon = 1e-12);

        let cone = lattice(&[vec![1., 0., 0.], vec![0., 1., 0.], vec![0., 0., 1.]]);
        let e1 = origin_of(&cone, 0);
        let adj = adjacent_cone(&[e1], &cone, &tol()).unwrap();
        let mut normals: Vec<Vector> = adj.normals.clone();
        normals.sort_by(lex_cmp);
        assert_abs_diff_eq!(normals[0], v(&[0., -1., 0.]), epsilon = 1e-12);
        assert_abs_diff_eq!(normals[1], v(&[0., 0., -1.]), epsilon = 1e-12);
    }

    #[test]
    fn membership() {
        let t = tol();
        let quadrant = [v(&[1., 0.]), v(&[0., 1.])];
        assert!(cone_contains(&v(&[0.3, 0.7]), &quadrant, &t));
        let wedge = [v(&[1., 1.]), v(&[1., 0.])];
        assert!(!cone_contains(&v(&[0., 1.]), &wedge, &t));
        assert!(cone_contains(&v(&[0., 0.]), &wedge, &t));
        assert!(cone_contains(&v(&[0., 0.]), &[], &t));
    }

    #[test]
    fn column_scaling_keeps_rays() {
        let c = StateMatrix::from_rows(&[vec![2., 3., 0.], vec![3., 1., 0.], vec![1., 1., 1.]])
            .unwrap();
        let d = c.scale_columns(&[0.5, 7.0, 3.0]).unwrap();
        let a = coni_facets(&c, &tol()).unwrap();
        let b = coni_facets(&d, &tol()).unwrap();
        assert_eq!(a.facets(), b.facets());
        for (x, y) in a.rays().iter().zip(b.rays()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }
}
