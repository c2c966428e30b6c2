//! The blur operator `S = B~ B^-1`.
//!
//! Data are interpolated with Gaussian RBFs of variance `xi`, the interpolant
//! is convolved with the Gaussian-mixture Green's function, and the result is
//! evaluated back at the data locations. Because a Gaussian convolved with a
//! Gaussian is a Gaussian with summed variance, the blurred interpolant uses
//! the same weights `b` on the blurred basis
//! `psi~(r) = sum_n c_n phi(r; 0, (rho_n + xi) I)`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{BlurError, Result};
use crate::kernel_approx::{gaussian_bsh, GreenMixture, HelmholtzParams, QuadratureParams};
use crate::numeric::{euclidean_norm, pairwise_dot, pairwise_sum};
use crate::rbf_interp::{
    build_matrix, density, detrend_linear, distance, radial_matrix, solve_weights_with, DenseCholesky, Interpolant,
    KernelSolver, MeasurementSet, Points, RbfBasis, SolveOptions,
};

/// Largest `N` for which [`BlurOperator::dense_matrix`] materializes `S`
/// without an explicit override.
pub const DENSE_GUARD: usize = 5000;

/// Parameters that fully determine the blur.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurConfig {
    /// Helmholtz length scale; 0 selects the identity operator.
    pub ell: f64,
    pub beta: f64,
    pub quadrature: QuadratureParams,
    /// RBF standard deviation `xi^(1/2)`.
    pub rbf_sd: f64,
    /// Rescale `S` by `1 / |S 1|` with `1` the unit-norm constant vector.
    pub normalize: bool,
    pub solve: SolveOptions,
}

impl BlurConfig {
    pub fn new(ell: f64, beta: f64, rbf_sd: f64) -> Self {
        Self {
            ell,
            beta,
            quadrature: QuadratureParams::default(),
            rbf_sd,
            normalize: false,
            solve: SolveOptions::default(),
        }
    }

    pub fn with_quadrature(mut self, quadrature: QuadratureParams) -> Self {
        self.quadrature = quadrature;
        self
    }

    pub fn normalized(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_residual_tol(mut self, tol: f64) -> Self {
        self.solve.residual_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell >= 0.0 && self.ell.is_finite()) {
            return Err(BlurError::Domain(format!("ell must be non-negative and finite, got {}", self.ell)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(BlurError::Domain(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.rbf_sd > 0.0 && self.rbf_sd.is_finite()) {
            return Err(BlurError::Domain(format!("rbf_sd must be positive, got {}", self.rbf_sd)));
        }
        if !(self.solve.residual_tol > 0.0) {
            return Err(BlurError::Domain("residual tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.ell == 0.0
    }
}

/// `psi~(r) = sum_n c_n phi(r; 0, (rho_n + xi) I)`, summed pairwise in
/// increasing `rho_n`.
pub fn blurred_kernel(mix: &GreenMixture, basis: &RbfBasis, r: f64) -> f64 {
    let xi = basis.variance();
    let d = basis.dim();
    let parts: Vec<f64> = mix.terms().iter().map(|t| t.weight * density(r, t.variance + xi, d)).collect();
    pairwise_sum(&parts)
}

/// Evaluates `sum_j b_j psi~(|q_i - q_j|)` at every data location. A fast
/// Gauss transform would implement this trait.
pub trait KernelSummation: Send + Sync {
    fn sum(&self, weights: &[f64]) -> Vec<f64>;
}

/// Direct summation against the cached blurred kernel matrix.
#[derive(Debug, Clone)]
pub struct DirectSummation {
    n: usize,
    // row-major psi~(|q_i - q_j|)
    rows: Vec<f64>,
}

impl DirectSummation {
    pub fn new(points: &Points, mix: &GreenMixture, basis: &RbfBasis) -> Self {
        let n = points.len();
        let rows: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| blurred_kernel(mix, basis, points.distance(i, j))))
            .collect();
        Self { n, rows }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.rows)
    }
}

impl KernelSummation for DirectSummation {
    fn sum(&self, weights: &[f64]) -> Vec<f64> {
        self.rows.par_chunks_exact(self.n).map(|row| pairwise_dot(row, weights)).collect()
    }
}

enum Engine {
    Identity,
    Blur { mixture: GreenMixture, solver: Box<dyn KernelSolver>, summation: Box<dyn KernelSummation> },
}

/// A blur prepared on a fixed set of locations. The RBF factorization and the
/// blurred kernel matrix are computed once and reused for every input.
pub struct BlurOperator {
    config: BlurConfig,
    points: Points,
    basis: RbfBasis,
    engine: Engine,
    unit_response: f64,
    norm_factor: f64,
}

impl std::fmt::Debug for BlurOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlurOperator")
            .field("config", &self.config)
            .field("n", &self.points.len())
            .field("dim", &self.points.dim())
            .field("unit_response", &self.unit_response)
            .field("norm_factor", &self.norm_factor)
            .finish()
    }
}

impl BlurOperator {
    /// Build the operator. The RBF matrix is factored eagerly, and
    /// `|S0 1|` is computed with one application of the unnormalized operator.
    pub fn prepare(config: BlurConfig, points: &Points) -> Result<Self> {
        config.validate()?;
        let dim = points.dim();
        let basis = RbfBasis::from_std_dev(config.rbf_sd, dim)?;
        if config.is_identity() {
            return Ok(Self {
                config,
                points: points.clone(),
                basis,
                engine: Engine::Identity,
                unit_response: 1.0,
                norm_factor: 1.0,
            });
        }
        let helmholtz = HelmholtzParams::new(config.ell, config.beta)?;
        let mixture = gaussian_bsh(helmholtz, config.quadrature, dim)?;
        let solver = DenseCholesky::factor(build_matrix(points, &basis)?, &config.solve)?;
        let summation = DirectSummation::new(points, &mixture, &basis);
        Self::from_parts(config, points.clone(), basis, mixture, Box::new(solver), Box::new(summation))
    }

    /// Assemble an operator from caller-supplied solver and summation backends.
    pub fn from_parts(
        config: BlurConfig,
        points: Points,
        basis: RbfBasis,
        mixture: GreenMixture,
        solver: Box<dyn KernelSolver>,
        summation: Box<dyn KernelSummation>,
    ) -> Result<Self> {
        config.validate()?;
        if solver.size() != points.len() {
            return Err(BlurError::DimensionMismatch { expected: points.len(), found: solver.size() });
        }
        let mut op = Self {
            config,
            points,
            basis,
            engine: Engine::Blur { mixture, solver, summation },
            unit_response: 1.0,
            norm_factor: 1.0,
        };
        let n = op.len();
        let unit = vec![1.0 / (n as f64).sqrt(); n];
        op.unit_response = euclidean_norm(&op.apply(&unit)?);
        if config.normalize {
            op.norm_factor = op.unit_response;
        }
        Ok(op)
    }

    pub fn config(&self) -> &BlurConfig {
        &self.config
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn basis(&self) -> &RbfBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.engine, Engine::Identity)
    }

    pub fn is_normalized(&self) -> bool {
        self.config.normalize && !self.is_identity()
    }

    pub fn mixture(&self) -> Option<&GreenMixture> {
        match &self.engine {
            Engine::Identity => None,
            Engine::Blur { mixture, .. } => Some(mixture),
        }
    }

    /// `|S0 1|` for the unnormalized operator (1 for the identity).
    pub fn unit_response(&self) -> f64 {
        self.unit_response
    }

    /// Divisor applied to every output (1 unless normalization is on).
    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    /// Diagonal jitter used when factoring `B`.
    pub fn jitter(&self) -> f64 {
        match &self.engine {
            Engine::Identity => 0.0,
            Engine::Blur { solver, .. } => solver.jitter(),
        }
    }

    /// Blur a data vector: `z~ = B~ B^-1 z / norm_factor`.
    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.len() {
            return Err(BlurError::DimensionMismatch { expected: self.len(), found: z.len() });
        }
        match &self.engine {
            Engine::Identity => Ok(z.to_vec()),
            Engine::Blur { solver, summation, .. } => {
                let b = solver.solve(z)?;
                let mut out = summation.sum(&b);
                if self.norm_factor != 1.0 {
                    for v in &mut out {
                        *v /= self.norm_factor;
                    }
                }
                Ok(out)
            }
        }
    }

    /// RBF interpolant of `z` on this operator's locations and basis.
    pub fn interpolant(&self, z: &[f64]) -> Result<Interpolant> {
        match &self.engine {
            Engine::Identity => {
                let ms = MeasurementSet::new(self.points.clone(), z.to_vec())?;
                solve_weights_with(&ms, &self.basis, &self.config.solve)
            }
            Engine::Blur { solver, .. } => {
                if z.len() != self.len() {
                    return Err(BlurError::DimensionMismatch { expected: self.len(), found: z.len() });
                }
                let b = solver.solve(z)?;
                Ok(Interpolant::from_parts(self.basis, self.points.clone(), b, solver.jitter()))
            }
        }
    }

    /// Evaluate the blurred interpolant of `z` at arbitrary targets. For the
    /// identity operator this is the plain RBF interpolant.
    pub fn eval_blurred_at(&self, z: &[f64], targets: &Points) -> Result<Vec<f64>> {
        if targets.dim() != self.points.dim() {
            return Err(BlurError::DimensionMismatch { expected: self.points.dim(), found: targets.dim() });
        }
        let itp = self.interpolant(z)?;
        let Some(mix) = self.mixture() else {
            return itp.eval_many(targets);
        };
        let b = itp.weights();
        let pts: Vec<&[f64]> = targets.iter().collect();
        Ok(pts
            .par_iter()
            .map(|x| {
                let k: Vec<f64> =
                    self.points.iter().map(|q| blurred_kernel(mix, &self.basis, distance(x, q))).collect();
                pairwise_dot(&k, b) / self.norm_factor
            })
            .collect())
    }

    /// Materialize `S` column by column, guarded at [`DENSE_GUARD`].
    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        self.dense_matrix_with_limit(DENSE_GUARD)
    }

    pub fn dense_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<f64>> {
        let n = self.len();
        if n > limit {
            return Err(BlurError::Guard { n, limit });
        }
        let columns: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.apply(&e)
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(n, n, |i, j| columns[j][i]))
    }

    /// Interpolation matrix `B` and blurred matrix `B~` (the latter already
    /// divided by the normalization factor). `None` for the identity.
    pub fn kernel_matrices(&self) -> Result<Option<(DMatrix<f64>, DMatrix<f64>)>> {
        let Some(mix) = self.mixture() else { return Ok(None) };
        let b = build_matrix(&self.points, &self.basis)?;
        let nf = self.norm_factor;
        let bt = radial_matrix(&self.points, |r| blurred_kernel(mix, &self.basis, r) / nf);
        Ok(Some((b, bt)))
    }

    /// Eigenvalues of the symmetric-definite pencil `B~ v = lambda B v`,
    /// ascending. These are the eigenvalues of `S`.
    pub fn generalized_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.len();
        if n > DENSE_GUARD {
            return Err(BlurError::Guard { n, limit: DENSE_GUARD });
        }
        let Some((b, bt)) = self.kernel_matrices()? else {
            return Ok(vec![1.0; n]);
        };
        let chol = nalgebra::Cholesky::new(b).ok_or_else(|| BlurError::Conditioning {
            detail: "Cholesky factorization of B failed in the generalized eigensolve".into(),
        })?;
        let l = chol.l();
        // C = L^-1 B~ L^-T
        let x = l
            .solve_lower_triangular(&bt)
            .ok_or_else(|| BlurError::Conditioning { detail: "singular Cholesky factor".into() })?;
        let c = l
            .solve_lower_triangular(&x.transpose())
            .ok_or_else(|| BlurError::Conditioning { detail: "singular Cholesky factor".into() })?;
        let sym = (&c + c.transpose()) * 0.5;
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    /// Split data into large- and small-scale parts. With `detrend`, a
    /// least-squares affine fit is removed first and returned separately; it is
    /// never added back.
    pub fn scale_separate(&self, ms: &MeasurementSet, detrend: bool) -> Result<ScaleSeparation> {
        if ms.points() != &self.points {
            return Err(BlurError::Domain("measurement locations differ from the prepared operator".into()));
        }
        let (deviations, trend) = if detrend {
            let (dev, coef) = detrend_linear(ms)?;
            (dev.values().to_vec(), coef)
        } else {
            (ms.values().to_vec(), vec![0.0; ms.dim() + 1])
        };
        let large = self.apply(&deviations)?;
        let small: Vec<f64> = deviations.iter().zip(&large).map(|(d, l)| d - l).collect();
        Ok(ScaleSeparation { deviations, large, small, trend })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSeparation {
    /// Input after optional detrending.
    pub deviations: Vec<f64>,
    pub large: Vec<f64>,
    /// `deviations - large`
    pub small: Vec<f64>,
    /// Affine trend coefficients `[a0, a1, .., ad]` (zeros without detrending).
    pub trend: Vec<f64>,
}
