//! `L¹` norms of wave-modulated cutoffs across dyadic scales.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{grid_resolving, inverse_fourier_transform, Field, RadialProfile};
use crate::norms::lp_norm;
use crate::sharpness::fit::{fit_exponent, SlopeFit};
use crate::symbols::{cutoff_g, CutoffKind, WavePhase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeVariant {
    /// `φ(ξ) θ(2^{-j}ξ)` with `θ` supported in a ball.
    Lowpass,
    /// `ζ(ξ) θ(2^{-j}ξ)` with `θ` annular.
    Highpass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub variant: ProbeVariant,
    pub n: usize,
    pub values: Vec<(i32, f64)>,
    pub fit: SlopeFit,
}

/// Samples per axis allowed for probe grids.
pub const PROBE_MAX_SAMPLES: usize = 2048;

/// Ball-supported test profile `e^{-ρ²} g(ρ)`.
pub fn ball_profile(rho: f64) -> f64 {
    (-rho * rho).exp() * cutoff_g(rho)
}

/// `‖(e^{iφ} χ θ(2^{-j}·))^∨‖_{L¹}` per `j`, with `χ = φ` or `ζ` by
/// variant, and the log-log slope across `js`.
pub fn l1_scaling_probe(
    phase: &WavePhase,
    theta: &dyn RadialProfile,
    n: usize,
    js: &[i32],
    variant: ProbeVariant,
) -> Result<ScalingReport> {
    let (_, theta_top) = theta.support();
    let mut values = Vec::new();
    for &j in js {
        let scale = 2f64.powi(j);
        // The highpass kernel concentrates near the image of ∇φ with
        // rapidly decaying tails, so a tight box and light oversampling
        // keep large j within the sample cap.
        let (top, length, oversample) = match variant {
            ProbeVariant::Lowpass => (2f64.min(theta_top * scale), 32.0, 2.0),
            ProbeVariant::Highpass => (theta_top * scale, 2.0 * phase.gradient_sup().max(1.0) + 1.0, 1.25),
        };
        if !top.is_finite() {
            return Err(Error::Precondition("probe profile must have bounded support".into()));
        }
        let grid = grid_resolving(n, top, oversample, length, PROBE_MAX_SAMPLES)?;
        let spec = Field::from_fn_frequency(grid, |xi| {
            let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cut = match variant {
                ProbeVariant::Lowpass => CutoffKind::PhiLow.eval(rho),
                ProbeVariant::Highpass => CutoffKind::Zeta.eval(rho),
            };
            Complex64::from_polar(cut * theta.value(rho / scale), phase.eval(xi))
        });
        let kernel = inverse_fourier_transform(&spec)?;
        values.push((j, lp_norm(&kernel, 1.0)?.value));
    }
    let fit = fit_exponent(&values)?;
    Ok(ScalingReport {
        variant,
        n,
        values,
        fit,
    })
}
