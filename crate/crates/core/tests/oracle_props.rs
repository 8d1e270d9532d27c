use conirep::oracle::{NnlsSolver, DEFAULT_SAMPLE_BUDGET};
use conirep::{evaluate, ir_num, nnls, residual_sq, EvalConfig, StateMatrix, Vector};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn objective(a: &DMatrix<f64>, w: &[f64], b: &Vector) -> f64 {
    (a * Vector::from_column_slice(w) - b).norm_squared()
}

#[test]
fn nnls_beats_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let m = rng.random_range(1..=5);
        let n = rng.random_range(1..=5);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(0.0..3.0));
        let b = Vector::from_fn(m, |_, _| rng.random_range(-1.0..3.0));
        let c = StateMatrix::new(a.clone()).unwrap();
        let w = nnls(&c, &b).unwrap();
        assert!(w.as_slice().iter().all(|&x| x >= 0.0));
        let best = objective(&a, w.as_slice(), &b);
        assert!((residual_sq(&c, &w, &b).unwrap() - best).abs() < 1e-10);

        for _ in 0..200 {
            let trial: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            assert!(best <= objective(&a, &trial, &b) + 1e-10);
        }
        let ls = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
        let clipped: Vec<f64> = ls.iter().map(|&x| x.max(0.0)).collect();
        assert!(best <= objective(&a, &clipped, &b) + 1e-10);

        // KKT: gradient is nonnegative, and zero on the support.
        let grad = a.transpose() * (&a * Vector::from_column_slice(w.as_slice()) - &b);
        let scale = 1e-8 * (1.0 + a.norm() * b.norm());
        for (g, x) in grad.iter().zip(w.as_slice()) {
            assert!(*g >= -scale);
            if *x > 0.0 {
                assert!(g.abs() <= scale);
            }
        }
    }
}

#[test]
fn solver_reuse_gives_same_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let cols: Vec<Vector> = (0..4)
        .map(|_| Vector::from_fn(3, |_, _| rng.random_range(0.0..3.0)))
        .collect();
    let mut solver = NnlsSolver::new(&cols).unwrap();
    let targets: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let first: Vec<f64> = targets
        .iter()
        .map(|t| solver.solve(t).unwrap().residual_sq)
        .collect();
    let mut fresh = NnlsSolver::new(&cols).unwrap();
    for (t, r) in targets.iter().zip(&first).rev() {
        assert_eq!(fresh.solve(t).unwrap().residual_sq, *r);
    }
}

#[test]
fn quadrature_is_scale_invariant() {
    let c = StateMatrix::from_rows(&[
        vec![2.0, 3.0, 0.0],
        vec![3.0, 1.0, 0.0],
        vec![1.0, 1.0, 1.0],
    ])
    .unwrap();
    let scaled = c.scale_columns(&[0.5, 7.0, 3.0]).unwrap();
    let a = ir_num(&c, 16, DEFAULT_SAMPLE_BUDGET).unwrap().ir_num;
    let b = ir_num(&scaled, 16, DEFAULT_SAMPLE_BUDGET).unwrap().ir_num;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn quadrature_approaches_exact_value() {
    let c = StateMatrix::from_rows(&[vec![1.0, 3.0, 1.0, 2.0], vec![1.0, 2.0, 0.0, 1.0]]).unwrap();
    let exact = 1.0 / 24.0;
    let mut prev = f64::INFINITY;
    for n in [8, 16, 32, 64, 128] {
        let err = (ir_num(&c, n, DEFAULT_SAMPLE_BUDGET).unwrap().ir_num - exact).abs();
        assert!(err <= prev + 1e-4, "n={n}: {err} after {prev}");
        prev = err;
    }
    assert!(prev < 1e-4);
}

#[test]
fn quadrature_independent_of_thread_count() {
    let c = StateMatrix::from_rows(&[
        vec![2.0, 3.0, 0.0],
        vec![3.0, 1.0, 0.0],
        vec![1.0, 1.0, 1.0],
    ])
    .unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ir_num(&c, 24, DEFAULT_SAMPLE_BUDGET).unwrap().ir_num)
    };
    assert_eq!(run(1).to_bits(), run(4).to_bits());
}

#[test]
fn agrees_with_analytical_within_extrapolated_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut ok = 0;
    for _ in 0..50 {
        let n = rng.random_range(3..=5);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.random_range(0.0..3.0)).collect())
            .collect();
        let c = StateMatrix::from_rows(&rows).unwrap();
        let exact = evaluate(&c, &EvalConfig::default()).unwrap().ir;
        let q: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| ir_num(&c, n, DEFAULT_SAMPLE_BUDGET).unwrap().ir_num)
            .collect();
        let bound = (q[1] - q[2]).abs().max((q[0] - q[1]).abs() / 4.0);
        if (exact - q[2]).abs() <= 5.0 * bound {
            ok += 1;
        }
    }
    assert_eq!(ok, 50);
}
