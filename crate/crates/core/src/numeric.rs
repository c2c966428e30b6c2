//! Small numeric helpers shared across modules.

const PAIRWISE_BLOCK: usize = 8;

/// Pairwise (cascade) summation. The summation tree depends only on the
/// slice length, so results are reproducible regardless of how callers
/// schedule work across threads.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of elementwise products.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= PAIRWISE_BLOCK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let mid = a.len() / 2;
    pairwise_dot(&a[..mid], &b[..mid]) + pairwise_dot(&a[mid..], &b[mid..])
}

pub fn euclidean_norm(xs: &[f64]) -> f64 {
    let scale = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let scaled: Vec<f64> = xs.iter().map(|x| (x / scale).powi(2)).collect();
    scale * pairwise_sum(&scaled).sqrt()
}

pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Format a value with 17 significant digits, enough for an exact
/// round trip through decimal text.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
