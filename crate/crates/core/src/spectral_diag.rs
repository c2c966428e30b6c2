//! Spectral diagnostics on rotationally symmetric geometries.
//!
//! For equally spaced points on a circle both `B` and `B~` are circulant, so
//! `S` is circulant and its eigenvectors are discrete Fourier vectors. The
//! eigenvalues then follow from a DFT of the first row of `S`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::blur_op::{BlurConfig, BlurOperator};
use crate::error::{BlurError, Result};
use crate::numeric::fmt_f64;
use crate::rbf_interp::Points;

/// Residual tolerance for solves on the circle study geometry. The RBF
/// matrix there has condition number near 1e12, so high-wavenumber right
/// hand sides leave relative residuals of order 1e-4.
pub const CIRCLE_RESIDUAL_TOL: f64 = 1e-3;

/// Settings of the 100-point circle study: `ell = 1`, `beta = 1`, RBF
/// standard deviation 2.5 spacings, default quadrature, no normalization.
pub fn circle_study_config() -> BlurConfig {
    BlurConfig::new(1.0, 1.0, 2.5).with_residual_tol(CIRCLE_RESIDUAL_TOL)
}

/// `n` points on a circle about the origin, consecutive points `spacing`
/// apart; point `j` sits at angle `2 pi j / n`.
pub fn circle_locations(n: usize, spacing: f64) -> Result<Points> {
    if n < 3 {
        return Err(BlurError::Domain(format!("need at least 3 points on the circle, got {n}")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(BlurError::Domain(format!("spacing must be positive, got {spacing}")));
    }
    let radius = spacing / (2.0 * (PI / n as f64).sin());
    let coords = (0..n)
        .flat_map(|j| {
            let theta = 2.0 * PI * j as f64 / n as f64;
            [radius * theta.cos(), radius * theta.sin()]
        })
        .collect();
    Points::new(2, coords)
}

/// Tolerances for the circulant structure, relative to the largest entry of
/// `S` (structure) or the largest eigenvalue magnitude (imaginary residue).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculantTolerance {
    pub structure: f64,
    pub imaginary: f64,
}

impl Default for CirculantTolerance {
    fn default() -> Self {
        Self { structure: 1e-4, imaginary: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSpectrum {
    /// `lambda_k` for `k = 0..N`.
    pub eigenvalues: Vec<f64>,
    /// Physical wavenumber `2 pi min(k, N-k) / (N spacing)`.
    pub k_phys: Vec<f64>,
    /// Fourier comparison trace `(1 + ell^2 k_phys^2)^-beta`.
    pub reference: Vec<f64>,
    /// Largest discarded imaginary part.
    pub max_imaginary: f64,
    /// Largest deviation of `S` from circulant structure.
    pub max_deviation: f64,
    pub spacing: f64,
    pub geometry: Points,
}

impl CirculantSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Index of the Nyquist mode, `floor(N/2)`.
    pub fn nyquist(&self) -> usize {
        self.len() / 2
    }

    /// Rows `(k, k_phys, eigenvalue, reference)` for `k = 0..=N/2`, with the
    /// `k` and `N-k` duplicates merged by averaging.
    pub fn folded(&self) -> Vec<(usize, f64, f64, f64)> {
        let n = self.len();
        (0..=n / 2)
            .map(|k| {
                let mirror = (n - k) % n;
                let lam = 0.5 * (self.eigenvalues[k] + self.eigenvalues[mirror]);
                (k, self.k_phys[k], lam, self.reference[k])
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k_index,k_phys,eigenvalue,reference")?;
        for (k, kp, lam, r) in self.folded() {
            writeln!(out, "{k},{},{},{}", fmt_f64(kp), fmt_f64(lam), fmt_f64(r))?;
        }
        Ok(())
    }
}

/// Checks that consecutive points are equally spaced on a common circle and
/// returns the spacing.
fn check_circle_geometry(points: &Points) -> Result<f64> {
    let n = points.len();
    if points.dim() != 2 || n < 3 {
        return Err(BlurError::NotCirculant { deviation: f64::INFINITY, tolerance: 0.0 });
    }
    let mut center = [0.0, 0.0];
    for p in points.iter() {
        center[0] += p[0] / n as f64;
        center[1] += p[1] / n as f64;
    }
    let radii: Vec<f64> =
        points.iter().map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt()).collect();
    let spacings: Vec<f64> = (0..n).map(|i| points.distance(i, (i + 1) % n)).collect();
    let r0 = radii[0];
    let s0 = spacings[0];
    let dev_r = radii.iter().map(|r| (r - r0).abs()).fold(0.0, f64::max) / r0;
    let dev_s = spacings.iter().map(|s| (s - s0).abs()).fold(0.0, f64::max) / s0;
    let dev = dev_r.max(dev_s);
    let tol = 1e-9;
    if !(dev <= tol) {
        return Err(BlurError::NotCirculant { deviation: dev, tolerance: tol });
    }
    Ok(s0)
}

/// Largest `|S_ij - S_0,(j-i) mod N|`.
pub fn circulant_deviation(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((s[(i, j)] - s[(0, (j + n - i) % n)]).abs());
        }
    }
    dev
}

pub fn circulant_eigenvalues(op: &BlurOperator) -> Result<CirculantSpectrum> {
    circulant_eigenvalues_with(op, CirculantTolerance::default())
}

/// Eigenvalues of `S` on a circle geometry from the DFT of its first row.
pub fn circulant_eigenvalues_with(op: &BlurOperator, tol: CirculantTolerance) -> Result<CirculantSpectrum> {
    let spacing = check_circle_geometry(op.points())?;
    let s = op.dense_matrix()?;
    let n = s.nrows();
    let smax = s.amax();
    let max_deviation = circulant_deviation(&s);
    if !(max_deviation <= tol.structure * smax) {
        return Err(BlurError::NotCirculant { deviation: max_deviation / smax, tolerance: tol.structure });
    }

    let mut buf: Vec<Complex<f64>> = (0..n).map(|j| Complex::new(s[(0, j)], 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let lmax = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let max_imaginary = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if !(max_imaginary <= tol.imaginary * lmax) {
        return Err(BlurError::NotCirculant { deviation: max_imaginary / lmax, tolerance: tol.imaginary });
    }
    let eigenvalues: Vec<f64> = buf.iter().map(|c| c.re).collect();
    for k in 1..n {
        let diff = (eigenvalues[k] - eigenvalues[n - k]).abs();
        if !(diff <= tol.imaginary * lmax) {
            return Err(BlurError::NotCirculant { deviation: diff / lmax, tolerance: tol.imaginary });
        }
    }

    let ell = op.config().ell;
    let beta = op.config().beta;
    let k_phys: Vec<f64> = (0..n).map(|k| 2.0 * PI * k.min(n - k) as f64 / (n as f64 * spacing)).collect();
    let reference = k_phys.iter().map(|kp| (1.0 + ell * ell * kp * kp).powf(-beta)).collect();
    Ok(CirculantSpectrum {
        eigenvalues,
        k_phys,
        reference,
        max_imaginary,
        max_deviation,
        spacing,
        geometry: op.points().clone(),
    })
}

/// Real (cosine-phase) discrete Fourier vector `cos(2 pi j k / N)`.
pub fn fourier_vector(n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|j| (2.0 * PI * ((j * k) % n) as f64 / n as f64).cos()).collect()
}

/// Continuous eigenfunction of `S` for mode `k`: the RBF interpolant of the
/// cosine-phase Fourier eigenvector, sampled on `grid`.
pub fn eigenfunction_samples(op: &BlurOperator, k: usize, grid: &Points) -> Result<Vec<f64>> {
    check_circle_geometry(op.points())?;
    let n = op.len();
    if k >= n {
        return Err(BlurError::Domain(format!("mode index {k} out of range for {n} points")));
    }
    let itp = op.interpolant(&fourier_vector(n, k))?;
    itp.eval_many(grid)
}
