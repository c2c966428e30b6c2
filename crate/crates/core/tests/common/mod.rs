#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scatter_blur::synthetic::scattered_points;
use scatter_blur::Points;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random points with unit mean nearest-neighbor distance.
pub fn points(seed: u64, n: usize, dim: usize) -> Points {
    scattered_points(&mut rng(seed), n, dim, 0.5).unwrap()
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

/// Max-norm relative difference `|a - b|_inf / |b|_inf`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    num / den
}

/// `(g * psi)(r)` in the plane for a Gaussian mixture `g` and an RBF of
/// variance `xi`, by tensor trapezoid quadrature. Each term is integrated in
/// the standardized coordinates of its narrower factor on `[-10, 10]^2`.
pub fn convolution_by_quadrature(terms: &[(f64, f64)], xi: f64, r: f64, step: f64) -> f64 {
    let density = |x2: f64, var: f64| (-x2 / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var);
    let m = (10.0 / step).round() as i64;
    let grid: Vec<f64> = (-m..=m).map(|i| i as f64 * step).collect();
    terms
        .iter()
        .map(|&(c, rho)| {
            let (narrow, wide) = if rho < xi { (rho, xi) } else { (xi, rho) };
            let s = narrow.sqrt();
            let mut acc = 0.0;
            for &v1 in &grid {
                for &v2 in &grid {
                    let w = (-(v1 * v1 + v2 * v2) / 2.0).exp() / (2.0 * std::f64::consts::PI);
                    let dx = r - s * v1;
                    let dy = s * v2;
                    acc += w * density(dx * dx + dy * dy, wide);
                }
            }
            c * acc * step * step
        })
        .sum()
}

/// Least-squares amplitudes of `cos(k.x)`, `sin(k.x)` pairs for each
/// wavevector; returns one amplitude per wavevector.
pub fn mode_amplitudes(points: &Points, data: &[f64], wavevectors: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let cols = 2 * wavevectors.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(n, cols);
    for (i, x) in points.iter().enumerate() {
        for (j, k) in wavevectors.iter().enumerate() {
            let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            a[(i, 2 * j)] = phase.cos();
            a[(i, 2 * j + 1)] = phase.sin();
        }
    }
    let b = nalgebra::DVector::from_column_slice(data);
    let coef = a.svd(true, true).solve(&b, 1e-12).unwrap();
    (0..wavevectors.len()).map(|j| coef[2 * j].hypot(coef[2 * j + 1])).collect()
}
