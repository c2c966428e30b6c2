//! Gaussian radial-basis-function interpolation of scattered scalar data.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{BlurError, Result};
use crate::numeric::{max_abs, pairwise_dot};

/// A set of distinct locations in R^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    dim: usize,
    coords: Vec<f64>,
}

impl Points {
    /// Validates dimension, finiteness and pairwise distinctness.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(BlurError::Domain("dimension must be at least 1".into()));
        }
        if coords.is_empty() {
            return Err(BlurError::EmptyInput);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(BlurError::DimensionMismatch { expected: dim, found: coords.len() % dim });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(BlurError::Domain(format!("non-finite coordinate at point {}", pos / dim)));
        }
        let points = Self { dim, coords };
        points.check_distinct()?;
        Ok(points)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().ok_or(BlurError::EmptyInput)?.len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(BlurError::DimensionMismatch { expected: dim, found: row.len() });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    fn check_distinct(&self) -> Result<()> {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(self.len());
        for (i, p) in self.iter().enumerate() {
            // +0.0 folds -0.0 onto 0.0
            let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
            if let Some(&first) = seen.get(&key) {
                return Err(BlurError::DuplicateLocation { first, second: i });
            }
            seen.insert(key, i);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.point(i), self.point(j))
    }

    /// Subset in the given order; distinctness is inherited.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self { dim: self.dim, coords }
    }

    /// Apply a coordinate map to every point.
    pub fn map<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self.iter().map(f).collect();
        Self::from_rows(&rows)
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Scattered locations with one scalar value each.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    points: Points,
    values: Vec<f64>,
}

impl MeasurementSet {
    pub fn new(points: Points, values: Vec<f64>) -> Result<Self> {
        if values.len() != points.len() {
            return Err(BlurError::DimensionMismatch { expected: points.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(BlurError::Domain(format!("non-finite value at point {i}")));
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.points.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.points.clone(), values)
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self { points: self.points.select(indices), values: indices.iter().map(|&i| self.values[i]).collect() }
    }
}

/// Isotropic d-variate Gaussian density at radius `x` with the given
/// variance, without argument checks.
#[inline]
pub(crate) fn density(x: f64, variance: f64, dim: usize) -> f64 {
    let norm = (2.0 * PI * variance).powf(-(dim as f64) / 2.0);
    norm * (-x * x / (2.0 * variance)).exp()
}

/// `(2 pi v)^(-d/2) exp(-x^2 / (2 v))`.
pub fn gaussian_density(x: f64, variance: f64, dim: usize) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(BlurError::Domain(format!("variance must be positive, got {variance}")));
    }
    if dim == 0 {
        return Err(BlurError::Domain("dimension must be at least 1".into()));
    }
    Ok(density(x, variance, dim))
}

/// Gaussian RBF kernel `psi(r) = phi(r; 0, xi I)`; `xi` is a variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfBasis {
    variance: f64,
    dim: usize,
}

impl RbfBasis {
    pub fn new(variance: f64, dim: usize) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(BlurError::Domain(format!("RBF variance must be positive, got {variance}")));
        }
        if dim == 0 {
            return Err(BlurError::Domain("dimension must be at least 1".into()));
        }
        Ok(Self { variance, dim })
    }

    /// Construct from the standard deviation `xi^(1/2)`.
    pub fn from_std_dev(sd: f64, dim: usize) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(BlurError::Domain(format!("RBF standard deviation must be positive, got {sd}")));
        }
        Self::new(sd * sd, dim)
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, r: f64) -> f64 {
        density(r, self.variance, self.dim)
    }
}

/// Dense kernel matrix `K_ij = kernel(|q_i - q_j|)`, rows filled in parallel.
pub(crate) fn radial_matrix<F>(points: &Points, kernel: F) -> DMatrix<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let n = points.len();
    let rows: Vec<Vec<f64>> =
        (0..n).into_par_iter().map(|i| (0..n).map(|j| kernel(points.distance(i, j))).collect()).collect();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Interpolation matrix `B_ij = psi(|q_i - q_j|)`.
pub fn build_matrix(points: &Points, basis: &RbfBasis) -> Result<DMatrix<f64>> {
    if points.dim() != basis.dim() {
        return Err(BlurError::DimensionMismatch { expected: basis.dim(), found: points.dim() });
    }
    Ok(radial_matrix(points, |r| basis.eval(r)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Bound on `|B b - z|_inf / |z|_inf`.
    pub residual_tol: f64,
    /// Relative diagonal shift (times `psi(0)`) tried once when the plain
    /// factorization fails.
    pub jitter: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-8, jitter: 1e-12 }
    }
}

/// Solves `B b = z` for a fixed kernel matrix. Fast solvers can implement
/// this trait in place of the dense factorization.
pub trait KernelSolver: Send + Sync {
    fn size(&self) -> usize;
    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>>;
    /// Diagonal shift that was needed to factor the matrix (0 if none).
    fn jitter(&self) -> f64;
}

/// Dense Cholesky factorization with a single jittered retry.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    matrix: DMatrix<f64>,
    factor: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    jitter: f64,
    residual_tol: f64,
}

impl DenseCholesky {
    pub fn factor(matrix: DMatrix<f64>, opts: &SolveOptions) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(BlurError::Domain("kernel matrix must be square and non-empty".into()));
        }
        if let Some(factor) = nalgebra::Cholesky::new(matrix.clone()) {
            return Ok(Self { matrix, factor, jitter: 0.0, residual_tol: opts.residual_tol });
        }
        let diag_max = matrix.diagonal().max();
        let jitter = opts.jitter * diag_max;
        let mut shifted = matrix.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        match nalgebra::Cholesky::new(shifted) {
            Some(factor) => {
                log::warn!("Cholesky needed diagonal jitter {jitter:.3e}");
                Ok(Self { matrix, factor, jitter, residual_tol: opts.residual_tol })
            }
            None => Err(BlurError::Conditioning {
                detail: format!("Cholesky factorization failed even with diagonal jitter {jitter:.3e}"),
            }),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular Cholesky factor (of the jittered matrix if jitter was used).
    pub fn lower(&self) -> DMatrix<f64> {
        self.factor.l()
    }

    fn relative_residual(&self, b: &[f64], z: &[f64]) -> f64 {
        let n = z.len();
        let zmax = max_abs(z);
        let row_res: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row: Vec<f64> = self.matrix.row(i).iter().copied().collect();
                (pairwise_dot(&row, b) - z[i]).abs()
            })
            .collect();
        let rmax = max_abs(&row_res);
        if zmax == 0.0 {
            rmax
        } else {
            rmax / zmax
        }
    }
}

impl KernelSolver for DenseCholesky {
    fn size(&self) -> usize {
        self.matrix.nrows()
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.size();
        if rhs.len() != n {
            return Err(BlurError::DimensionMismatch { expected: n, found: rhs.len() });
        }
        let b = self.factor.solve(&DVector::from_column_slice(rhs));
        let b: Vec<f64> = b.iter().copied().collect();
        if b.iter().any(|x| !x.is_finite()) {
            return Err(BlurError::Conditioning { detail: "solution has non-finite entries".into() });
        }
        let res = self.relative_residual(&b, rhs);
        if !(res <= self.residual_tol) {
            return Err(BlurError::Conditioning {
                detail: format!("relative residual {res:.3e} exceeds tolerance {:.1e}", self.residual_tol),
            });
        }
        Ok(b)
    }

    fn jitter(&self) -> f64 {
        self.jitter
    }
}

/// `zeta(x) = sum_j b_j psi(|x - q_j|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    basis: RbfBasis,
    centers: Points,
    weights: Vec<f64>,
    jitter: f64,
}

impl Interpolant {
    pub(crate) fn from_parts(basis: RbfBasis, centers: Points, weights: Vec<f64>, jitter: f64) -> Self {
        Self { basis, centers, weights, jitter }
    }

    pub fn basis(&self) -> &RbfBasis {
        &self.basis
    }

    pub fn centers(&self) -> &Points {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.basis.dim() {
            return Err(BlurError::DimensionMismatch { expected: self.basis.dim(), found: x.len() });
        }
        let k: Vec<f64> = self.centers.iter().map(|q| self.basis.eval(distance(x, q))).collect();
        Ok(pairwise_dot(&k, &self.weights))
    }

    /// Evaluate at many points in parallel.
    pub fn eval_many(&self, targets: &Points) -> Result<Vec<f64>> {
        if targets.dim() != self.basis.dim() {
            return Err(BlurError::DimensionMismatch { expected: self.basis.dim(), found: targets.dim() });
        }
        let pts: Vec<&[f64]> = targets.iter().collect();
        pts.par_iter().map(|x| self.eval(x)).collect()
    }
}

/// Fit interpolation weights with the default solver options.
pub fn solve_weights(ms: &MeasurementSet, basis: &RbfBasis) -> Result<Interpolant> {
    solve_weights_with(ms, basis, &SolveOptions::default())
}

pub fn solve_weights_with(ms: &MeasurementSet, basis: &RbfBasis, opts: &SolveOptions) -> Result<Interpolant> {
    let solver = DenseCholesky::factor(build_matrix(ms.points(), basis)?, opts)?;
    let weights = solver.solve(ms.values())?;
    Ok(Interpolant::from_parts(*basis, ms.points().clone(), weights, solver.jitter()))
}

/// Greedy thinning in input order: a point is kept iff it lies at least
/// `min_sep` from every point kept before it. Returns the kept indices.
pub fn thin_indices(points: &Points, min_sep: f64) -> Result<Vec<usize>> {
    if !(min_sep >= 0.0) || !min_sep.is_finite() {
        return Err(BlurError::Domain(format!("min_sep must be non-negative, got {min_sep}")));
    }
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        if kept.iter().all(|&k| points.distance(i, k) >= min_sep) {
            kept.push(i);
        }
    }
    Ok(kept)
}

pub fn thin_points(ms: &MeasurementSet, min_sep: f64) -> Result<MeasurementSet> {
    let kept = thin_indices(ms.points(), min_sep)?;
    Ok(ms.select(&kept))
}

/// Least-squares affine fit `z ~ a0 + sum_i a_i x_i`. Returns the residuals
/// as a new measurement set and the coefficients `[a0, a1, .., ad]`.
pub fn detrend_linear(ms: &MeasurementSet) -> Result<(MeasurementSet, Vec<f64>)> {
    let n = ms.len();
    let d = ms.dim();
    let cols = d + 1;
    if n < cols {
        return Err(BlurError::RankDeficient { rank: n, cols });
    }
    // Center coordinates for conditioning, convert the intercept back after.
    let mut mean = vec![0.0; d];
    for p in ms.points().iter() {
        for (m, c) in mean.iter_mut().zip(p) {
            *m += c;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let design = DMatrix::from_fn(n, cols, |i, j| if j == 0 { 1.0 } else { ms.points().point(i)[j - 1] - mean[j - 1] });
    // Column scaling keeps the rank test independent of coordinate units.
    let scales: Vec<f64> = (0..cols)
        .map(|j| {
            let s = design.column(j).amax();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(n, cols, |i, j| design[(i, j)] / scales[j]);
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = (n.max(cols) as f64) * f64::EPSILON * smax * 16.0;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < cols {
        return Err(BlurError::RankDeficient { rank, cols });
    }
    let z = DVector::from_column_slice(ms.values());
    let coef_scaled = svd.solve(&z, tol).map_err(|e| BlurError::Domain(format!("least-squares solve failed: {e}")))?;
    let coef_centered: Vec<f64> = (0..cols).map(|j| coef_scaled[j] / scales[j]).collect();
    let fitted = &design * DVector::from_column_slice(&coef_centered);
    let residuals: Vec<f64> = (0..n).map(|i| ms.values()[i] - fitted[i]).collect();
    let mut coef = coef_centered.clone();
    coef[0] -= (1..cols).map(|j| coef_centered[j] * mean[j - 1]).sum::<f64>();
    Ok((ms.with_values(residuals)?, coef))
}

/// Distance from each point to its nearest neighbor (brute force).
pub fn nearest_neighbor_distances(points: &Points) -> Vec<f64> {
    let n = points.len();
    (0..n)
        .into_par_iter()
        .map(|i| (0..n).filter(|&j| j != i).map(|j| points.distance(i, j)).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Mean nearest-neighbor distance; a starting point for the RBF standard
/// deviation. Returns 0 for a single point.
pub fn mean_nearest_neighbor_distance(points: &Points) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let nn = nearest_neighbor_distances(points);
    nn.iter().sum::<f64>() / nn.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(rows: &[&[f64]]) -> Points {
        Points::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn density_normalization_constants() {
        let v = gaussian_density(0.0, 1.0, 1).unwrap();
        assert!((v - 0.3989422804014327).abs() < 1e-15);
        let v = gaussian_density(0.0, 2.5, 2).unwrap();
        assert!((v - 1.0 / (2.0 * PI * 2.5)).abs() < 1e-16);
        assert!(gaussian_density(1.0, 0.0, 2).is_err());
        assert!(gaussian_density(1.0, -1.0, 2).is_err());
    }

    #[test]
    fn density_decreases_with_radius() {
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let v = gaussian_density(i as f64 * 0.2, 1.3, 3).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn points_reject_duplicates_and_bad_shapes() {
        let err = Points::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![0.0, 1.0]]).unwrap_err();
        assert!(matches!(err, BlurError::DuplicateLocation { first: 0, second: 2 }));
        assert!(matches!(Points::new(2, vec![1.0, 2.0, 3.0]), Err(BlurError::DimensionMismatch { .. })));
        assert!(matches!(Points::new(1, vec![]), Err(BlurError::EmptyInput)));
        assert!(Points::new(1, vec![f64::NAN]).is_err());
        assert!(matches!(Points::new(1, vec![0.0, -0.0]), Err(BlurError::DuplicateLocation { .. })));
    }

    #[test]
    fn one_by_one_matrix() {
        let basis = RbfBasis::new(0.7, 2).unwrap();
        let b = build_matrix(&pts(&[&[1.0, 1.0]]), &basis).unwrap();
        assert_eq!(b.nrows(), 1);
        assert!((b[(0, 0)] - 1.0 / (2.0 * PI * 0.7)).abs() < 1e-16);
    }

    #[test]
    fn two_point_matrix() {
        let basis = RbfBasis::new(2.0, 3).unwrap();
        let b = build_matrix(&pts(&[&[0.0, 0.0, 0.0], &[1.0, 2.0, 2.0]]), &basis).unwrap();
        let want = (4.0 * PI).powf(-1.5) * (-9.0_f64 / 4.0).exp();
        assert!((b[(0, 1)] - want).abs() < 1e-16);
        assert_eq!(b[(0, 1)], b[(1, 0)]);
        assert_eq!(b[(0, 0)], b[(1, 1)]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let basis = RbfBasis::new(1.0, 3).unwrap();
        assert!(build_matrix(&pts(&[&[0.0, 0.0]]), &basis).is_err());
        let ms = MeasurementSet::new(pts(&[&[0.0, 0.0]]), vec![1.0]).unwrap();
        let itp = solve_weights(&ms, &RbfBasis::new(1.0, 2).unwrap()).unwrap();
        assert!(matches!(itp.eval(&[0.0]), Err(BlurError::DimensionMismatch { .. })));
    }

    #[test]
    fn single_point_interpolant() {
        let basis = RbfBasis::from_std_dev(1.5, 2).unwrap();
        let ms = MeasurementSet::new(pts(&[&[3.0, -1.0]]), vec![7.0]).unwrap();
        let itp = solve_weights(&ms, &basis).unwrap();
        assert!((itp.weights()[0] - 7.0 / basis.eval(0.0)).abs() < 1e-12);
        assert!((itp.eval(&[3.0, -1.0]).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn zero_data_gives_zero_weights() {
        let basis = RbfBasis::from_std_dev(1.0, 1).unwrap();
        let ms = MeasurementSet::new(pts(&[&[0.0], &[1.0], &[2.5]]), vec![0.0; 3]).unwrap();
        let itp = solve_weights(&ms, &basis).unwrap();
        assert!(itp.weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn far_field_decays() {
        let basis = RbfBasis::from_std_dev(1.0, 2).unwrap();
        let ms = MeasurementSet::new(pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]), vec![1.0, -2.0, 3.0]).unwrap();
        let itp = solve_weights(&ms, &basis).unwrap();
        let l1: f64 = itp.weights().iter().map(|w| w.abs()).sum();
        let v = itp.eval(&[25.0, 25.0]).unwrap();
        assert!(v.abs() <= l1 * basis.eval(20.0));
    }

    #[test]
    fn near_duplicate_points_trigger_conditioning_error() {
        let basis = RbfBasis::from_std_dev(10.0, 1).unwrap();
        let ms = MeasurementSet::new(pts(&[&[0.0], &[1e-9], &[2e-9], &[1.0]]), vec![1.0, -1.0, 1.0, 0.0]).unwrap();
        let err = solve_weights(&ms, &basis).unwrap_err();
        assert!(matches!(err, BlurError::Conditioning { .. }));
        assert!(err.to_string().contains("thin the points"));
    }

    #[test]
    fn thinning_rules() {
        let ms = MeasurementSet::new(pts(&[&[0.0], &[0.5], &[1.2], &[1.3]]), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(thin_points(&ms, 0.0).unwrap(), ms);
        let t = thin_points(&ms, 0.6).unwrap();
        assert_eq!(t.values(), &[1.0, 3.0]);
        assert!(thin_points(&ms, -1.0).is_err());
    }

    #[test]
    fn detrend_exact_linear_and_constant() {
        let p = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[2.0, 3.0], &[-1.0, 4.0]]);
        let vals: Vec<f64> = p.iter().map(|x| 1.5 - 2.0 * x[0] + 0.25 * x[1]).collect();
        let (dev, coef) = detrend_linear(&MeasurementSet::new(p.clone(), vals).unwrap()).unwrap();
        assert!(dev.values().iter().all(|v| v.abs() <= 1e-10));
        assert!((coef[0] - 1.5).abs() < 1e-12 && (coef[1] + 2.0).abs() < 1e-12 && (coef[2] - 0.25).abs() < 1e-12);

        let (dev, coef) = detrend_linear(&MeasurementSet::new(p, vec![4.0; 5]).unwrap()).unwrap();
        assert!(dev.values().iter().all(|v| v.abs() <= 1e-12));
        assert!((coef[0] - 4.0).abs() < 1e-12 && coef[1].abs() < 1e-12 && coef[2].abs() < 1e-12);
    }

    #[test]
    fn detrend_rank_deficient() {
        // collinear points in the plane
        let p = pts(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]);
        let ms = MeasurementSet::new(p, vec![1.0, 2.0, 0.0, 5.0]).unwrap();
        assert!(matches!(detrend_linear(&ms), Err(BlurError::RankDeficient { .. })));
        let p = pts(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let ms = MeasurementSet::new(p, vec![1.0, 2.0]).unwrap();
        assert!(matches!(detrend_linear(&ms), Err(BlurError::RankDeficient { .. })));
    }

    #[test]
    fn mean_nn_distance_on_a_grid() {
        let p = pts(&[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0], &[2.0, 2.0]]);
        assert_eq!(mean_nearest_neighbor_distance(&p), 2.0);
        assert_eq!(mean_nearest_neighbor_distance(&pts(&[&[1.0]])), 0.0);
    }
}
