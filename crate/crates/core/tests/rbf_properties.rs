mod common;

use proptest::prelude::*;
use scatter_blur::rbf_interp::{build_matrix, mean_nearest_neighbor_distance, thin_indices};
use scatter_blur::{detrend_linear, gaussian_density, solve_weights, BlurError, MeasurementSet, Points, RbfBasis};

use common::{normal_vec, points, rel_diff, rng};

/// Composite Simpson rule on `[0, b]` with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    let inner: f64 = (1..n).map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(0.0) + inner + f(b)) * h / 3.0
}

#[test]
fn density_integrates_to_one() {
    // surface measure of the unit sphere in R^d: 2, 2 pi, 4 pi
    let shells = [2.0, 2.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI];
    for (d, shell) in (1..=3).zip(shells) {
        for var in [0.01, 1.0, 6.25] {
            let b = 12.0 * f64::sqrt(var);
            let total = simpson(|r| shell * r.powi(d as i32 - 1) * gaussian_density(r, var, d).unwrap(), b, 4000);
            assert!((total - 1.0).abs() < 1e-8, "d={d} var={var}: {total}");
        }
    }
}

#[test]
fn density_at_origin() {
    assert!((gaussian_density(0.0, 1.0, 2).unwrap() - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-16);
    assert!(gaussian_density(1.0, 0.0, 2).is_err());
}

#[test]
fn fifty_point_interpolation_is_exact_at_centers() {
    let p = points(11, 50, 2);
    let z = normal_vec(&mut rng(12), 50);
    let ms = MeasurementSet::new(p.clone(), z.clone()).unwrap();
    let itp = solve_weights(&ms, &RbfBasis::from_std_dev(0.5, 2).unwrap()).unwrap();
    let back: Vec<f64> = p.iter().map(|x| itp.eval(x).unwrap()).collect();
    assert!(rel_diff(&back, &z) < 1e-6);
}

#[test]
fn matrix_eigenvalues_positive_up_to_200_points() {
    for (seed, n, d) in [(1, 200, 2), (2, 120, 3), (3, 80, 1)] {
        let p = points(seed, n, d);
        let b = build_matrix(&p, &RbfBasis::from_std_dev(0.7, d).unwrap()).unwrap();
        assert_eq!(b, b.transpose());
        let ev = b.symmetric_eigenvalues();
        assert!(ev.min() > 0.0, "n={n} d={d}: min eigenvalue {}", ev.min());
    }
}

#[test]
fn coincident_after_rounding_is_rejected() {
    let err = Points::new(2, vec![0.0, 1.0, 2.0, 3.0, -0.0, 1.0]).unwrap_err();
    assert!(matches!(err, BlurError::DuplicateLocation { first: 0, second: 2 }));
}

#[test]
fn detrend_examples() {
    let p = points(5, 40, 2);
    let linear: Vec<f64> = p.iter().map(|x| 3.0 - 2.0 * x[0] + 0.5 * x[1]).collect();
    let (dev, coef) = detrend_linear(&MeasurementSet::new(p.clone(), linear).unwrap()).unwrap();
    assert!(dev.values().iter().all(|v| v.abs() <= 1e-10));
    assert!((coef[0] - 3.0).abs() < 1e-10 && (coef[1] + 2.0).abs() < 1e-10 && (coef[2] - 0.5).abs() < 1e-10);

    let (dev, coef) = detrend_linear(&MeasurementSet::new(p.clone(), vec![4.25; 40]).unwrap()).unwrap();
    assert!(dev.values().iter().all(|v| v.abs() <= 1e-12));
    assert!((coef[0] - 4.25).abs() < 1e-12 && coef[1].abs() < 1e-12 && coef[2].abs() < 1e-12);

    // collinear locations cannot support a planar fit
    let line = Points::new(2, (0..10).flat_map(|i| [i as f64, 2.0 * i as f64]).collect()).unwrap();
    let res = detrend_linear(&MeasurementSet::new(line, vec![1.0; 10]).unwrap());
    assert!(matches!(res, Err(BlurError::RankDeficient { .. })));
}

fn point_set() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 5usize..40, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn permutation_equivariance((seed, n, d) in point_set(), shift in 1usize..100) {
        let p = points(seed, n, d);
        let z = normal_vec(&mut rng(seed ^ 1), n);
        let basis = RbfBasis::from_std_dev(0.6, d).unwrap();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        // (i * 7 + shift) mod n is a permutation only when gcd(7, n) = 1
        prop_assume!(n % 7 != 0);
        let ms = MeasurementSet::new(p.clone(), z.clone()).unwrap();
        let a = solve_weights(&ms, &basis).unwrap();
        let b = solve_weights(&ms.select(&perm), &basis).unwrap();
        let permuted: Vec<f64> = perm.iter().map(|&i| a.weights()[i]).collect();
        prop_assert!(rel_diff(b.weights(), &permuted) < 1e-10);
        let probes = points(seed ^ 2, 5, d);
        for x in probes.iter() {
            let (va, vb) = (a.eval(x).unwrap(), b.eval(x).unwrap());
            prop_assert!((va - vb).abs() <= 1e-12 * (1.0 + va.abs()));
        }
    }

    #[test]
    fn weights_are_linear((seed, n, d) in point_set(), alpha in -5.0f64..5.0) {
        let p = points(seed, n, d);
        let mut r = rng(seed ^ 3);
        let z1 = normal_vec(&mut r, n);
        let z2 = normal_vec(&mut r, n);
        let basis = RbfBasis::from_std_dev(0.6, d).unwrap();
        let w = |z: Vec<f64>| solve_weights(&MeasurementSet::new(p.clone(), z).unwrap(), &basis).unwrap().weights().to_vec();
        let combo: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| alpha * a + b).collect();
        let lhs = w(combo);
        let rhs: Vec<f64> = w(z1).iter().zip(w(z2)).map(|(a, b)| alpha * a + b).collect();
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn factorization_succeeds_on_random_sets((seed, n, d) in point_set()) {
        let p = points(seed, n, d);
        let z = normal_vec(&mut rng(seed), n);
        let itp = solve_weights(&MeasurementSet::new(p.clone(), z.clone()).unwrap(), &RbfBasis::from_std_dev(1.0, d).unwrap());
        prop_assert!(itp.is_ok());
    }

    #[test]
    fn thinning_respects_separation((seed, n, d) in point_set(), min_sep in 0.2f64..3.0) {
        let p = points(seed, n, d);
        let kept = thin_indices(&p, min_sep).unwrap();
        prop_assert!(!kept.is_empty());
        for (a, &i) in kept.iter().enumerate() {
            for &j in &kept[a + 1..] {
                prop_assert!(p.distance(i, j) >= min_sep);
            }
        }
        for i in (0..n).filter(|i| !kept.contains(i)) {
            prop_assert!(kept.iter().any(|&k| p.distance(i, k) < min_sep));
        }
    }

    #[test]
    fn detrended_residuals_are_orthogonal((seed, n, d) in point_set()) {
        prop_assume!(n > d + 2);
        let p = points(seed, n, d);
        let z = normal_vec(&mut rng(seed ^ 5), n);
        let (dev, _) = detrend_linear(&MeasurementSet::new(p.clone(), z).unwrap()).unwrap();
        let r = dev.values();
        let scale = r.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!(r.iter().sum::<f64>().abs() / scale < 1e-10);
        for c in 0..d {
            let dot: f64 = p.iter().zip(r).map(|(x, v)| x[c] * v).sum();
            let norm: f64 = p.iter().map(|x| x[c].abs()).sum::<f64>() * scale;
            prop_assert!(dot.abs() / norm < 1e-10);
        }
    }
}

#[test]
fn grid_thinning_keeps_every_other_point() {
    let grid = Points::new(1, (0..10).map(|i| i as f64).collect()).unwrap();
    assert_eq!(thin_indices(&grid, 1.5).unwrap(), vec![0, 2, 4, 6, 8]);
    assert_eq!(thin_indices(&grid, 0.0).unwrap().len(), 10);
    assert!((mean_nearest_neighbor_distance(&grid) - 1.0).abs() < 1e-15);
}
