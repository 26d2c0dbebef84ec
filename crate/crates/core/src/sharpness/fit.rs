//! Least-squares exponent fits on `(j, log₂ value)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r2: f64,
    /// Set when the values carry no variation, so `r2` means nothing.
    pub degenerate: bool,
    pub j_min: i32,
    pub j_max: i32,
}

/// Fits `log₂ value = intercept + slope · j`.
pub fn fit_exponent(points: &[(i32, f64)]) -> Result<SlopeFit> {
    let mut js: Vec<i32> = points.iter().map(|p| p.0).collect();
    js.sort_unstable();
    js.dedup();
    if js.len() < 3 {
        return Err(Error::Precondition(format!(
            "slope fit needs at least 3 distinct scales, got {}",
            js.len()
        )));
    }
    if let Some(bad) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return Err(Error::Numerical(format!(
            "non-positive value {} at j = {}",
            bad.1, bad.0
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let degenerate = syy <= 1e-24 * (1.0 + my * my);
    let r2 = if degenerate { 0.0 } else { 1.0 - sse / syy };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        r2,
        degenerate,
        j_min: js[0],
        j_max: *js.last().unwrap(),
    })
}
