//! Seeded synthetic data: scattered point sets and random-phase sinusoid
//! fields standing in for real observation networks.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::rbf_interp::{mean_nearest_neighbor_distance, Points};

/// `n` random points in `dim` dimensions, no two closer than `min_frac`
/// times the nominal spacing, rescaled so the mean nearest-neighbor distance
/// is exactly 1.
pub fn scattered_points<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize, min_frac: f64) -> Result<Points> {
    let side = (n as f64).powf(1.0 / dim as f64);
    let mut min_sep = min_frac;
    let mut coords: Vec<f64> = Vec::with_capacity(n * dim);
    let mut attempts = 0usize;
    while coords.len() < n * dim {
        let cand: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * side).collect();
        let ok = coords
            .chunks_exact(dim)
            .all(|p| p.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= min_sep * min_sep);
        if ok {
            coords.extend(cand);
        }
        attempts += 1;
        if attempts.is_multiple_of(1000 * n) {
            // too crowded for this separation
            min_sep *= 0.8;
        }
    }
    let points = Points::new(dim, coords)?;
    let scale = 1.0 / mean_nearest_neighbor_distance(&points);
    points.map(|p| p.iter().map(|c| c * scale).collect())
}

/// One plane wave `amplitude * cos(k . x + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub wavevector: Vec<f64>,
    pub phase: f64,
    pub amplitude: f64,
}

/// Sum of plane waves; an inexpensive stand-in for a stationary Gaussian
/// random field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SinusoidField {
    pub modes: Vec<Mode>,
}

impl SinusoidField {
    /// `n_modes` waves with isotropic random directions, wavelengths
    /// log-uniform in `[min_wavelength, max_wavelength]`, uniform phases, and
    /// amplitudes giving pointwise standard deviation `sd`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        dim: usize,
        n_modes: usize,
        min_wavelength: f64,
        max_wavelength: f64,
        sd: f64,
    ) -> Self {
        let amplitude = sd * (2.0 / n_modes as f64).sqrt();
        let (lo, hi) = (min_wavelength.ln(), max_wavelength.ln());
        let modes = (0..n_modes)
            .map(|_| {
                let dir: Vec<f64> = loop {
                    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
                    let norm = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        break v.iter().map(|x| x / norm).collect();
                    }
                };
                let wavelength = (lo + (hi - lo) * rng.random::<f64>()).exp();
                let k = 2.0 * std::f64::consts::PI / wavelength;
                Mode {
                    wavevector: dir.iter().map(|d| d * k).collect(),
                    phase: 2.0 * std::f64::consts::PI * rng.random::<f64>(),
                    amplitude,
                }
            })
            .collect();
        Self { modes }
    }

    pub fn plane_wave(wavevector: Vec<f64>, phase: f64, amplitude: f64) -> Self {
        Self { modes: vec![Mode { wavevector, phase, amplitude }] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let arg: f64 = m.wavevector.iter().zip(x).map(|(k, c)| k * c).sum::<f64>() + m.phase;
                m.amplitude * arg.cos()
            })
            .sum()
    }

    pub fn sample(&self, points: &Points) -> Vec<f64> {
        points.iter().map(|p| self.eval(p)).collect()
    }

    pub fn superpose(mut self, other: SinusoidField) -> Self {
        self.modes.extend(other.modes);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn points_have_unit_mean_spacing_and_are_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let p = scattered_points(&mut a, 90, 2, 0.5).unwrap();
        let q = scattered_points(&mut b, 90, 2, 0.5).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.len(), 90);
        assert!((mean_nearest_neighbor_distance(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn field_variance_matches_request() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = SinusoidField::random(&mut rng, 2, 64, 2.0, 20.0, 1.5);
        let var: f64 = f.modes.iter().map(|m| m.amplitude * m.amplitude / 2.0).sum();
        assert!((var - 2.25).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_values() {
        let f = SinusoidField::plane_wave(vec![1.0, 0.0], 0.0, 2.0);
        assert!((f.eval(&[std::f64::consts::PI, 5.0]) + 2.0).abs() < 1e-15);
    }
}
