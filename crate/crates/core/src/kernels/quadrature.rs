//! Gauss–Legendre panel quadrature for smooth oscillatory integrands.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const PANEL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Composite rule with `panels` equal panels on `[a, b]`.
pub fn integrate_panels<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    let (nodes, weights) = rule();
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut part = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(weights) {
            part += f(mid + 0.5 * h * x) * *w;
        }
        acc += part * (0.5 * h);
    }
    acc
}

/// Result of a doubling-checked integration.
#[derive(Clone, Copy, Debug)]
pub struct CheckedIntegral {
    pub value: Complex64,
    /// `|I_{2P} − I_P| / max(|I_{2P}|, floor)`.
    pub doubling_change: f64,
    pub panels: usize,
}

/// Integrates with `panels` and `2·panels` panels and fails when the
/// relative change exceeds `tol`; `floor` sets the magnitude below which
/// changes are measured absolutely.
pub fn integrate_checked<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
    floor: f64,
) -> Result<CheckedIntegral> {
    let coarse = integrate_panels(&f, a, b, panels);
    let fine = integrate_panels(&f, a, b, 2 * panels);
    let change = (fine - coarse).norm() / fine.norm().max(floor);
    if !(change <= tol) {
        return Err(Error::Convergence(format!(
            "panel doubling on [{a}, {b}] with {panels} panels changed the result by {change:e} (tolerance {tol:e})"
        )));
    }
    Ok(CheckedIntegral {
        value: fine,
        doubling_change: change,
        panels: 2 * panels,
    })
}

/// Adaptive bisection driven by panel doubling, for real integrands.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = integrate_panels(|t| Complex64::new(f(t), 0.0), a, m, 1).re;
        let right = integrate_panels(|t| Complex64::new(f(t), 0.0), m, b, 1).re;
        if (left + right - whole).abs() <= tol {
            return Ok(left + right);
        }
        if depth > 40 {
            return Err(Error::Convergence(format!("adaptive quadrature stalled on [{a}, {b}]")));
        }
        Ok(rec(f, a, m, left, tol / 2.0, depth + 1)? + rec(f, m, b, right, tol / 2.0, depth + 1)?)
    }
    let whole = integrate_panels(|t| Complex64::new(f(t), 0.0), a, b, 1).re;
    rec(&f, a, b, whole, tol, 0)
}
