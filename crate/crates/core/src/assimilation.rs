//! Importance weights with blurred standardized innovations.
//!
//! With `S` the blur, member `i` gets the unnormalized weight
//! `exp(-|S R0^-1/2 (y - H x_i)|^2 / (2 sigma))`, `sigma = |S 1|^2`, which
//! amounts to a Gaussian likelihood with correlation `(S^T S)^-1`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::blur_op::{BlurConfig, BlurOperator, DENSE_GUARD};
use crate::error::{BlurError, Result};
use crate::kernel_approx::QuadratureParams;
use crate::numeric::{euclidean_norm, pairwise_sum};
use crate::rbf_interp::Points;
use crate::synthetic::{scattered_points, SinusoidField};

/// Forecast ensemble at the observation locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<Vec<f64>>,
    obs: Vec<f64>,
    obs_sd: Vec<f64>,
}

impl Ensemble {
    pub fn new(members: Vec<Vec<f64>>, obs: Vec<f64>, obs_sd: Vec<f64>) -> Result<Self> {
        let n = obs.len();
        if n == 0 || members.is_empty() {
            return Err(BlurError::EmptyInput);
        }
        if obs_sd.len() != n {
            return Err(BlurError::DimensionMismatch { expected: n, found: obs_sd.len() });
        }
        if let Some(m) = members.iter().find(|m| m.len() != n) {
            return Err(BlurError::DimensionMismatch { expected: n, found: m.len() });
        }
        if let Some(i) = obs_sd.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(BlurError::Domain(format!("observation sd at {i} must be positive, got {}", obs_sd[i])));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&obs) || !members.iter().all(|m| finite(m)) {
            return Err(BlurError::Domain("ensemble contains non-finite values".into()));
        }
        Ok(Self { members, obs, obs_sd })
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn obs(&self) -> &[f64] {
        &self.obs
    }

    pub fn obs_sd(&self) -> &[f64] {
        &self.obs_sd
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn n_obs(&self) -> usize {
        self.obs.len()
    }
}

/// `(y - H x_i) / sd`, elementwise, for every member.
pub fn standardized_innovations(ens: &Ensemble) -> Vec<Vec<f64>> {
    ens.members
        .iter()
        .map(|m| m.iter().zip(&ens.obs).zip(&ens.obs_sd).map(|((hx, y), sd)| (y - hx) / sd).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub weights: Vec<f64>,
    pub ess: f64,
    pub sigma: f64,
    pub warning: Option<String>,
}

/// Normalize log-weights with a max shift so large innovations cannot
/// overflow or produce NaN.
pub fn normalize_log_weights(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let total = pairwise_sum(&unnorm);
    unnorm.iter().map(|w| w / total).collect()
}

/// Effective sample size `1 / sum w_i^2` of normalized weights.
pub fn ess(weights: &[f64]) -> f64 {
    let sq: Vec<f64> = weights.iter().map(|w| w * w).collect();
    1.0 / pairwise_sum(&sq)
}

/// SIR weights from blurred standardized innovations.
///
/// The operator should be prepared on the observation locations without
/// normalization: `sigma = |S 1|^2` supplies the rescaling here. A normalized
/// operator is accepted with `sigma = 1` and a warning.
pub fn sir_weights(ens: &Ensemble, op: &BlurOperator) -> Result<WeightSet> {
    if op.len() != ens.n_obs() {
        return Err(BlurError::DimensionMismatch { expected: ens.n_obs(), found: op.len() });
    }
    let (sigma, warning) = if op.is_normalized() {
        let msg = "operator is already normalized; using sigma = 1".to_string();
        log::warn!("{msg}");
        (1.0, Some(msg))
    } else {
        (op.unit_response().powi(2), None)
    };
    let log_w: Vec<f64> = standardized_innovations(ens)
        .iter()
        .map(|v| {
            let blurred = op.apply(v)?;
            Ok(-euclidean_norm(&blurred).powi(2) / (2.0 * sigma))
        })
        .collect::<Result<_>>()?;
    let weights = normalize_log_weights(&log_w);
    let ess = ess(&weights);
    Ok(WeightSet { weights, ess, sigma, warning })
}

/// Diagnostics for `S^T S`, the inverse correlation implied by the blurred
/// likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub symmetric: bool,
    pub positive_definite: bool,
    /// Eigenvalues of `S^T S`, ascending.
    pub eigenvalues: Vec<f64>,
}

impl CovarianceReport {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

pub fn implied_covariance_check(op: &BlurOperator) -> Result<CovarianceReport> {
    let s = op.dense_matrix_with_limit(DENSE_GUARD)?;
    let n = s.nrows();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| s.column(j).iter().copied().collect()).collect();
    // Upper triangle mirrored, so the result is symmetric by construction.
    let mut sts = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = crate::numeric::pairwise_dot(&cols[i], &cols[j]);
            sts[(i, j)] = v;
            sts[(j, i)] = v;
        }
    }
    let symmetric = sts == sts.transpose();
    let positive_definite = nalgebra::Cholesky::new(sts.clone()).is_some();
    let mut eigenvalues: Vec<f64> = sts.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.total_cmp(b));
    Ok(CovarianceReport { symmetric, positive_definite, eigenvalues })
}

/// Seeded synthetic twin experiment: a random-field truth, a forecast
/// ensemble whose errors are dominated by small scales, and noisy
/// observations at scattered points. Lengths are in units of the mean
/// nearest-neighbor distance of the observation network.
#[derive(Debug, Clone, PartialEq)]
pub struct EssExperiment {
    pub n_obs: usize,
    pub n_members: usize,
    pub trials: usize,
    pub beta: f64,
    pub rbf_sd: f64,
    pub quadrature: QuadratureParams,
    pub obs_sd: f64,
    pub truth_sd: f64,
    /// Large-scale part of each member's forecast error.
    pub member_large_sd: f64,
    /// Small-scale part of each member's forecast error.
    pub member_small_sd: f64,
    pub small_wavelength: (f64, f64),
    pub n_modes: usize,
}

impl Default for EssExperiment {
    fn default() -> Self {
        Self {
            n_obs: 90,
            n_members: 80,
            trials: 50,
            beta: 1.0,
            rbf_sd: 1.0,
            quadrature: QuadratureParams::default(),
            obs_sd: 1.0,
            truth_sd: 1.0,
            member_large_sd: 0.3,
            member_small_sd: 1.0,
            small_wavelength: (1.0, 3.0),
            n_modes: 48,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssRecord {
    pub ell: f64,
    pub trial: usize,
    pub ess: f64,
}

/// One synthetic trial: observation locations and an ensemble.
#[derive(Debug, Clone)]
pub struct SyntheticTrial {
    pub points: Points,
    pub ensemble: Ensemble,
}

impl EssExperiment {
    /// Trial `trial` of the experiment seeded with `seed`; each trial draws
    /// from its own ChaCha stream.
    pub fn trial(&self, seed: u64, trial: usize) -> Result<SyntheticTrial> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let points = scattered_points(&mut rng, self.n_obs, 2, 0.5)?;
        let extent = (self.n_obs as f64).sqrt();
        let (ws_lo, ws_hi) = self.small_wavelength;
        let truth =
            SinusoidField::random(&mut rng, 2, self.n_modes, ws_lo, 2.0 * extent, self.truth_sd).sample(&points);
        let noise = Normal::new(0.0, self.obs_sd).map_err(|e| BlurError::Domain(e.to_string()))?;
        let obs: Vec<f64> = truth.iter().map(|t| t + noise.sample(&mut rng)).collect();
        let members = (0..self.n_members)
            .map(|_| {
                let err =
                    SinusoidField::random(&mut rng, 2, self.n_modes, extent / 2.0, 2.0 * extent, self.member_large_sd)
                        .superpose(SinusoidField::random(
                            &mut rng,
                            2,
                            self.n_modes,
                            ws_lo,
                            ws_hi,
                            self.member_small_sd,
                        ));
                truth.iter().zip(err.sample(&points)).map(|(t, e)| t + e).collect()
            })
            .collect();
        let ensemble = Ensemble::new(members, obs, vec![self.obs_sd; self.n_obs])?;
        Ok(SyntheticTrial { points, ensemble })
    }

    /// ESS for every `(ell, trial)` pair, trials outermost.
    pub fn run(&self, ells: &[f64], seed: u64) -> Result<Vec<EssRecord>> {
        let mut out = Vec::with_capacity(ells.len() * self.trials);
        for trial in 0..self.trials {
            let t = self.trial(seed, trial)?;
            for &ell in ells {
                let config = BlurConfig::new(ell, self.beta, self.rbf_sd).with_quadrature(self.quadrature);
                let op = BlurOperator::prepare(config, &t.points)?;
                let w = sir_weights(&t.ensemble, &op)?;
                out.push(EssRecord { ell, trial, ess: w.ess });
            }
        }
        Ok(out)
    }
}

/// Median ESS per `ell`, in the order of `ells`.
pub fn median_ess(records: &[EssRecord], ells: &[f64]) -> Vec<f64> {
    ells.iter()
        .map(|&ell| {
            let mut v: Vec<f64> = records.iter().filter(|r| r.ell == ell).map(|r| r.ess).collect();
            v.sort_by(|a, b| a.total_cmp(b));
            let m = v.len();
            if m == 0 {
                f64::NAN
            } else if m % 2 == 1 {
                v[m / 2]
            } else {
                0.5 * (v[m / 2 - 1] + v[m / 2])
            }
        })
        .collect()
}
