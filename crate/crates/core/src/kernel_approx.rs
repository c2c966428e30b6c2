//! Multiresolution Gaussian approximation of the Green's function of the
//! fractional bound-state Helmholtz operator `(1 - ell^2 Laplacian)^beta`.
//!
//! In Fourier space the Green's function is `t^-beta` with
//! `t = 1 + ell^2 |k|^2`. A trapezoid discretization of the integral
//!
//! ```text
//! t^-beta = 1/Gamma(beta) * Int exp(-t e^(x - e^-x)) e^(beta (x - e^-x)) (1 + e^-x) dx
//! ```
//!
//! with step `h` and nodes `x = n h`, `n = -m_minus ..= m_plus`, gives an
//! exponential sum `sum_n v_n exp(-a_n t) / Gamma(beta)`. Each exponential in
//! `k` is a Gaussian, so the physical-space kernel is a positive mixture of
//! isotropic Gaussians with variances `rho_n = 2 ell^2 a_n`.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use statrs::function::gamma::ln_gamma;

use crate::error::{BlurError, Result};
use crate::numeric::{fmt_f64, pairwise_sum};

/// Scale and shape of `D = (1 - ell^2 Laplacian)^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzParams {
    ell: f64,
    beta: f64,
}

impl HelmholtzParams {
    pub fn new(ell: f64, beta: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(BlurError::Domain(format!("ell must be positive and finite, got {ell}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(BlurError::Domain(format!("beta must be positive and finite, got {beta}")));
        }
        Ok(Self { ell, beta })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Length above which the operator barely attenuates:
    /// `ell / (2 pi sqrt(2^(1/beta) - 1))`.
    pub fn characteristic_scale(&self) -> f64 {
        self.ell / (2.0 * PI * ((1.0 / self.beta).exp2() - 1.0).sqrt())
    }
}

/// Trapezoid step and the number of nodes on each side of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureParams {
    h: f64,
    m_minus: u32,
    m_plus: u32,
}

impl QuadratureParams {
    pub fn new(h: f64, m_minus: u32, m_plus: u32) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(BlurError::Domain(format!("quadrature step h must be positive, got {h}")));
        }
        Ok(Self { h, m_minus, m_plus })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn m_minus(&self) -> u32 {
        self.m_minus
    }

    pub fn m_plus(&self) -> u32 {
        self.m_plus
    }

    pub fn term_count(&self) -> usize {
        self.m_minus as usize + self.m_plus as usize + 1
    }

    /// Node indices `-m_minus ..= m_plus` in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        -(self.m_minus as i64)..=self.m_plus as i64
    }
}

impl Default for QuadratureParams {
    /// `h = 0.2`, `m_minus = 32`, `m_plus = 28`.
    fn default() -> Self {
        Self { h: 0.2, m_minus: 32, m_plus: 28 }
    }
}

/// One Gaussian in the mixture: weight `c_n` and variance `rho_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenTerm {
    pub weight: f64,
    pub variance: f64,
}

/// Exponential-sum node for index `n`: returns `(a_n, v_n)` with
/// `a_n = exp(nh - e^-nh)` and `v_n = h (1 + e^-nh) exp(beta (nh - e^-nh))`.
pub fn quadrature_node(n: i64, h: f64, beta: f64) -> (f64, f64) {
    let (ln_a, ln_v) = log_node(n, h, beta);
    (ln_a.exp(), ln_v.exp())
}

/// `(ln a_n, ln v_n)`.
fn log_node(n: i64, h: f64, beta: f64) -> (f64, f64) {
    let x = n as f64 * h;
    let emx = (-x).exp();
    let ln_a = x - emx;
    // ln(1 + e^-x), stable for both signs of x
    let softplus = if x >= 0.0 { emx.ln_1p() } else { -x + x.exp().ln_1p() };
    let ln_v = h.ln() + softplus + beta * ln_a;
    (ln_a, ln_v)
}

/// Positive Gaussian mixture approximating the Green's function.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenMixture {
    terms: Vec<GreenTerm>,
    dim: usize,
    helmholtz: HelmholtzParams,
    quadrature: QuadratureParams,
    // (a_n, ln v_n) for the Fourier-space exponential sum
    nodes: Vec<(f64, f64)>,
    ln_gamma_beta: f64,
}

/// Build the mixture for `D = (1 - ell^2 Laplacian)^beta` in dimension `dim`.
///
/// Weights are `c_n = v_n e^-a_n (pi / (ell^2 a_n))^(d/2 - 1) / Gamma(beta)` and
/// variances `rho_n = 2 ell^2 a_n`. Both are evaluated in log space. A term
/// whose variance or weight overflows, or whose variance underflows, is
/// rejected with its index; weights below the smallest double become 0.
pub fn gaussian_bsh(helmholtz: HelmholtzParams, quadrature: QuadratureParams, dim: usize) -> Result<GreenMixture> {
    if dim == 0 {
        return Err(BlurError::Domain("dimension must be at least 1".into()));
    }
    let ell = helmholtz.ell;
    let beta = helmholtz.beta;
    let ln_gamma_beta = ln_gamma(beta);
    let ln_ell2 = 2.0 * ell.ln();
    let half_dim_m1 = dim as f64 / 2.0 - 1.0;

    let mut terms = Vec::with_capacity(quadrature.term_count());
    let mut nodes = Vec::with_capacity(quadrature.term_count());
    for n in quadrature.indices() {
        let (ln_a, ln_v) = log_node(n, quadrature.h, beta);
        let a = ln_a.exp();
        // a direct product keeps rho exactly proportional to ell^2
        let variance = 2.0 * (ell * ell) * a;
        if !(variance > 0.0 && variance.is_finite()) || !ln_a.is_finite() {
            let ln_rho = std::f64::consts::LN_2 + ln_ell2 + ln_a;
            let reason = if ln_rho > 0.0 { "variance overflows" } else { "variance underflows" };
            return Err(BlurError::Overflow { index: n, reason: reason.into() });
        }
        let ln_c = ln_v - a + half_dim_m1 * (PI.ln() - ln_ell2 - ln_a) - ln_gamma_beta;
        // A weight below the double range is flushed to zero; such a term
        // is negligible against the others. Overflow is an error.
        let weight = ln_c.exp();
        if !weight.is_finite() || ln_c.is_nan() {
            return Err(BlurError::Overflow { index: n, reason: "weight overflows".into() });
        }
        terms.push(GreenTerm { weight, variance });
        nodes.push((a, ln_v));
    }
    Ok(GreenMixture { terms, dim, helmholtz, quadrature, nodes, ln_gamma_beta })
}

/// One sample of the Fourier-space approximation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub k: f64,
    pub approx: f64,
    pub exact: f64,
    /// `(approx - exact) / exact`
    pub signed_rel_err: f64,
}

impl ErrorSample {
    pub fn rel_err(&self) -> f64 {
        self.signed_rel_err.abs()
    }
}

impl GreenMixture {
    pub fn terms(&self) -> &[GreenTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn helmholtz(&self) -> HelmholtzParams {
        self.helmholtz
    }

    pub fn quadrature(&self) -> QuadratureParams {
        self.quadrature
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Fourier-space value of the approximation at wavenumber `k`, via the
    /// exponential sum `sum_n v_n exp(-a_n t) / Gamma(beta)`, `t = 1 + ell^2 k^2`.
    pub fn eval_fourier(&self, k: f64) -> f64 {
        let ell = self.helmholtz.ell;
        let t = 1.0 + ell * ell * k * k;
        let parts: Vec<f64> = self.nodes.iter().map(|&(a, ln_v)| (ln_v - a * t - self.ln_gamma_beta).exp()).collect();
        pairwise_sum(&parts)
    }

    /// Exact target `(1 + ell^2 k^2)^-beta`.
    pub fn exact_fourier(&self, k: f64) -> f64 {
        let ell = self.helmholtz.ell;
        (1.0 + ell * ell * k * k).powf(-self.helmholtz.beta)
    }

    /// Relative error of [`eval_fourier`](Self::eval_fourier) on a uniform
    /// grid of `n_samples` wavenumbers spanning `[0, k_max]`.
    pub fn relative_error_profile(&self, k_max: f64, n_samples: usize) -> Result<Vec<ErrorSample>> {
        if !(k_max > 0.0 && k_max.is_finite()) {
            return Err(BlurError::Domain(format!("k_max must be positive, got {k_max}")));
        }
        if n_samples < 2 {
            return Err(BlurError::Domain("need at least two samples".into()));
        }
        let step = k_max / (n_samples - 1) as f64;
        Ok((0..n_samples)
            .map(|i| {
                let k = if i + 1 == n_samples { k_max } else { i as f64 * step };
                let approx = self.eval_fourier(k);
                let exact = self.exact_fourier(k);
                ErrorSample { k, approx, exact, signed_rel_err: (approx - exact) / exact }
            })
            .collect())
    }

    /// Largest relative error over the profile grid.
    pub fn max_relative_error(&self, k_max: f64, n_samples: usize) -> Result<f64> {
        Ok(self.relative_error_profile(k_max, n_samples)?.iter().fold(0.0, |m, s| m.max(s.rel_err())))
    }

    /// Physical-space kernel value at radius `r`.
    pub fn eval_physical(&self, r: f64) -> f64 {
        let parts: Vec<f64> =
            self.terms.iter().map(|t| t.weight * crate::rbf_interp::density(r, t.variance, self.dim)).collect();
        pairwise_sum(&parts)
    }

    /// Two-column CSV `c,rho` preceded by a comment line carrying the
    /// generating parameters.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.header())?;
        writeln!(out, "c,rho")?;
        for t in &self.terms {
            writeln!(out, "{},{}", fmt_f64(t.weight), fmt_f64(t.variance))?;
        }
        Ok(())
    }

    fn header(&self) -> String {
        format!(
            "ell={},beta={},h={},m_minus={},m_plus={},d={}",
            fmt_f64(self.helmholtz.ell),
            fmt_f64(self.helmholtz.beta),
            fmt_f64(self.quadrature.h),
            self.quadrature.m_minus,
            self.quadrature.m_plus,
            self.dim
        )
    }

    /// Read a mixture written by [`write_csv`](Self::write_csv). The stored
    /// weights and variances are used verbatim; the parameters in the header
    /// drive the Fourier-space evaluation.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, first) = lines.next().ok_or(BlurError::EmptyInput)?;
        let first = first?;
        let header = first.strip_prefix('#').ok_or_else(|| BlurError::Parse {
            row: 1,
            column: "header".into(),
            reason: "expected a '#' parameter line".into(),
        })?;
        let mut ell = None;
        let mut beta = None;
        let mut h = None;
        let mut m_minus = None;
        let mut m_plus = None;
        let mut dim = None;
        for field in header.trim().split(',') {
            let (key, val) = field.split_once('=').ok_or_else(|| parse_err(1, field, "expected key=value"))?;
            let key = key.trim();
            let val = val.trim();
            match key {
                "ell" => ell = Some(parse_f64(1, key, val)?),
                "beta" => beta = Some(parse_f64(1, key, val)?),
                "h" => h = Some(parse_f64(1, key, val)?),
                "m_minus" => m_minus = Some(val.parse::<u32>().map_err(|e| parse_err(1, key, &e.to_string()))?),
                "m_plus" => m_plus = Some(val.parse::<u32>().map_err(|e| parse_err(1, key, &e.to_string()))?),
                "d" => dim = Some(val.parse::<usize>().map_err(|e| parse_err(1, key, &e.to_string()))?),
                _ => return Err(parse_err(1, key, "unknown parameter")),
            }
        }
        let missing = |name: &str| parse_err(1, name, "missing parameter");
        let helmholtz = HelmholtzParams::new(ell.ok_or_else(|| missing("ell"))?, beta.ok_or_else(|| missing("beta"))?)?;
        let quadrature = QuadratureParams::new(
            h.ok_or_else(|| missing("h"))?,
            m_minus.ok_or_else(|| missing("m_minus"))?,
            m_plus.ok_or_else(|| missing("m_plus"))?,
        )?;
        let dim = dim.ok_or_else(|| missing("d"))?;
        // Rebuild nodes from the parameters, then overwrite terms with file contents.
        let mut mix = gaussian_bsh(helmholtz, quadrature, dim)?;

        let mut terms = Vec::with_capacity(mix.terms.len());
        let mut saw_column_header = false;
        for (idx, line) in lines {
            let line = line?;
            let row = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_column_header {
                if line != "c,rho" {
                    return Err(parse_err(row, "header", "expected column header 'c,rho'"));
                }
                saw_column_header = true;
                continue;
            }
            let (c, rho) = line.split_once(',').ok_or_else(|| parse_err(row, "c", "expected two columns"))?;
            let weight = parse_f64(row, "c", c.trim())?;
            let variance = parse_f64(row, "rho", rho.trim())?;
            if !(weight >= 0.0) {
                return Err(parse_err(row, "c", "weights must be non-negative"));
            }
            if !(variance > 0.0) || terms.last().is_some_and(|t: &GreenTerm| t.variance >= variance) {
                return Err(parse_err(row, "rho", "variances must be positive and strictly increasing"));
            }
            terms.push(GreenTerm { weight, variance });
        }
        if terms.len() != quadrature.term_count() {
            return Err(parse_err(
                0,
                "c",
                &format!("expected {} terms, found {}", quadrature.term_count(), terms.len()),
            ));
        }
        mix.terms = terms;
        Ok(mix)
    }
}

impl fmt::Display for GreenMixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GreenMixture({} terms; {})", self.terms.len(), self.header())
    }
}

fn parse_err(row: usize, column: &str, reason: &str) -> BlurError {
    BlurError::Parse { row, column: column.to_string(), reason: reason.to_string() }
}

fn parse_f64(row: usize, column: &str, text: &str) -> Result<f64> {
    let v: f64 = text.parse().map_err(|_| parse_err(row, column, &format!("not a number: {text:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(row, column, "non-finite value"));
    }
    Ok(v)
}
