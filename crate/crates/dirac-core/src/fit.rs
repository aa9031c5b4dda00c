//! Least-squares fits used to turn measured ladders into exponents.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Result of an ordinary least-squares line fit `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Coefficient of determination (1 for a perfect fit; 1 by convention for constant `y`).
    pub r_squared: f64,
    /// Standard error of the slope (`NaN` with two points).
    pub slope_stderr: f64,
    /// Half-width of the 95% confidence interval for the slope.
    pub slope_ci95: f64,
    /// Number of points.
    pub points: usize,
}

/// Two-sided 97.5% Student-t quantiles for 1..=30 degrees of freedom.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074,
    2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

fn t_quantile(dof: usize) -> f64 {
    if dof == 0 {
        f64::NAN
    } else if dof <= 30 {
        T975[dof - 1]
    } else {
        1.96
    }
}

/// Fit a straight line through `(x_i, y_i)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(LabError::Shape(format!("fit needs equal lengths, got {} and {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(LabError::domain("a line fit needs at least two points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(LabError::domain("fit data must be finite"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::domain("fit abscissae are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let (slope_stderr, slope_ci95) = if n > 2 {
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        (se, se * t_quantile(n - 2))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(LineFit { slope, intercept, r_squared, slope_stderr, slope_ci95, points: n })
}

/// Fit `log y ≈ p·log x + c` (natural logarithms) and return the exponent fit.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(LabError::domain("power-law fit needs positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

/// Largest relative spread `max/min − 1` of a set of positive values.
pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(f.slope_ci95 < 1e-12);
    }

    #[test]
    fn power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((power_law_fit(&x, &y).unwrap().slope + 0.5).abs() < 1e-14);
        assert!(power_law_fit(&x, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }
}
