//! Least-squares helpers for log-log exponent fits.

use crate::error::{GleError, Result};

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(GleError::InsufficientPoints { needed: 3, have: n.min(ys.len()) });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(GleError::Domain("non-finite value in regression data".into()));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GleError::Domain("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se_slope = (sse / (nf - 2.0) / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(OlsFit { slope, intercept, se_slope, r2, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = ols(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-13);
        assert!(f.se_slope < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_few_points() {
        assert!(ols(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn standard_error_known_case() {
        // residuals ±1 alternating around y = x on x = 0..3
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.0, 3.0, 2.0];
        let f = ols(&xs, &ys).unwrap();
        // slope 0.6, sse = 3.2, sxx = 5 → se = sqrt(3.2/2/5)
        assert!((f.slope - 0.6).abs() < 1e-14);
        assert!((f.se_slope - (0.32f64).sqrt()).abs() < 1e-14);
    }
}
