//! Blurring (low-pass filtering) of scalar data measured at scattered points
//! in R^d.
//!
//! The data are interpolated with Gaussian radial basis functions, the
//! interpolant is convolved with a multiresolution Gaussian approximation of
//! the Green's function of `(1 - ell^2 Laplacian)^beta`, and the result is
//! evaluated back at the data locations. The resulting linear operator `S` is
//! positive definite, which makes `(S^T S)^-1` usable as an observation-error
//! correlation in particle-filter weighting.
//!
//! Modules:
//! - [`kernel_approx`]: the Gaussian-mixture Green's function.
//! - [`rbf_interp`]: Gaussian RBF interpolation, thinning and detrending.
//! - [`blur_op`]: the blur operator, scale separation and dense diagnostics.
//! - [`spectral_diag`]: circulant spectra on circle geometries.
//! - [`assimilation`]: SIR weights on blurred innovations and ESS.
//! - [`cli_io`]: CSV formats and the command implementations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assimilation;
pub mod blur_op;
pub mod cli_io;
pub mod error;
pub mod kernel_approx;
pub mod numeric;
pub mod rbf_interp;
pub mod spectral_diag;
pub mod synthetic;

pub use blur_op::{blurred_kernel, BlurConfig, BlurOperator, ScaleSeparation};
pub use error::{BlurError, Result};
pub use kernel_approx::{gaussian_bsh, GreenMixture, GreenTerm, HelmholtzParams, QuadratureParams};
pub use rbf_interp::{
    detrend_linear, gaussian_density, solve_weights, thin_points, Interpolant, MeasurementSet, Points, RbfBasis,
};
