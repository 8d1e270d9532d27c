use conirep::linalg::{gram_schmidt, normal_vector, rank, simplex_volume};
use conirep::Vector;
use proptest::prelude::*;

/// Rank by fraction-free elimination over the integers.
fn exact_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let (nr, nc) = (a.len(), a[0].len());
    let mut r = 0;
    let mut prev = 1i128;
    for c in 0..nc {
        let Some(p) = (r..nr).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..nr {
            for j in c + 1..nc {
                a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) / prev;
            }
            a[i][c] = 0;
        }
        prev = a[r][c];
        r += 1;
        if r == nr {
            break;
        }
    }
    r
}

fn to_vectors(rows: &[Vec<i64>]) -> Vec<Vector> {
    rows.iter()
        .map(|r| Vector::from_iterator(r.len(), r.iter().map(|&x| x as f64)))
        .collect()
}

fn vectors(dim: usize, count: usize) -> impl Strategy<Value = Vec<Vector>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), count)
        .prop_map(|vs| vs.into_iter().map(Vector::from_vec).collect())
}

fn well_conditioned(vs: &[Vector]) -> bool {
    let unit: Vec<Vector> = vs.iter().map(|v| v.normalize()).collect();
    let a = nalgebra::DMatrix::from_columns(&unit);
    a.singular_values().min() > 1e-2
}

#[test]
fn exact_rank_reference() {
    assert_eq!(exact_rank(&[vec![1, 2], vec![2, 4]]), 1);
    assert_eq!(exact_rank(&[vec![0, 0], vec![0, 0]]), 0);
    assert_eq!(
        exact_rank(&[vec![0, 1, 2], vec![1, 0, 0], vec![1, 1, 2]]),
        2
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gram_schmidt_rank_matches_exact_rank(
        rows in prop::collection::vec(prop::collection::vec(0i64..=5, 4), 4)
    ) {
        let vs = to_vectors(&rows);
        let b = gram_schmidt(&vs).unwrap();
        prop_assert_eq!(b.rank(), exact_rank(&rows));
        prop_assert_eq!(rank(&vs), exact_rank(&rows));
        for (i, x) in b.columns().iter().enumerate() {
            for (j, y) in b.columns().iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((x.dot(y) - expected).abs() < 1e-10);
            }
        }
        // Every input lies in the span.
        for v in &vs {
            prop_assert!((b.project(v) - v).norm() < 1e-9 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn normal_vector_is_orthogonal_unit(vs in (2usize..=5).prop_flat_map(|d| vectors(d, d - 1))) {
        prop_assume!(well_conditioned(&vs));
        let n = normal_vector(&vs).unwrap();
        prop_assert!((n.norm() - 1.0).abs() < 1e-12);
        for v in &vs {
            prop_assert!((n.dot(v) / v.norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn simplex_volume_invariances(
        pts in vectors(3, 4),
        shift in prop::collection::vec(-2.0f64..2.0, 3),
        rot in 0usize..4,
    ) {
        let vol = simplex_volume(&pts);
        let mut permuted = pts.clone();
        permuted.rotate_left(rot);
        permuted.swap(0, 1);
        prop_assert!((simplex_volume(&permuted) - vol).abs() < 1e-10 * (1.0 + vol));
        let t = Vector::from_vec(shift);
        let moved: Vec<Vector> = pts.iter().map(|p| p + &t).collect();
        prop_assert!((simplex_volume(&moved) - vol).abs() < 1e-9 * (1.0 + vol));
        prop_assert!(vol >= 0.0);
    }

    #[test]
    fn triangle_area_matches_shoelace(pts in vectors(2, 3)) {
        let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
        let shoelace = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
        prop_assert!((simplex_volume(&pts) - shoelace).abs() < 1e-12 * (1.0 + shoelace));
    }
}
