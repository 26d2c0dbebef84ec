//! Radial quadrature for `h_j`, its plateau near the unit sphere and the
//! off-sphere decay envelope.
//!
//! `h_j(r) = ∫_0^∞ K_n(rt) ψ(2^{-j}t) e^{-it} t^{n-1} dt` with
//! `K_n(s) = (2π)^{-n/2} J_{(n-2)/2}(s) s^{-(n-2)/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::{hankel_pq, radial_bessel_kernel};
use super::quadrature::{integrate_adaptive, integrate_checked, integrate_panels, CheckedIntegral};
use crate::error::{Error, Result};
use crate::lattice::RadialProfile;

/// Relative panel-doubling tolerance.
pub const DOUBLING_TOL: f64 = 1e-6;
/// Terms kept in the asymptotic split.
pub const SPLIT_TERMS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub j: i32,
    pub n: usize,
    pub radii: Vec<f64>,
    pub values: Vec<Complex64>,
    pub c0: f64,
    pub delta: Option<f64>,
    pub j0: Option<i32>,
    /// `(L, c_L)` once an envelope has been fitted.
    pub envelope: Option<(f64, f64)>,
    /// Largest panel-doubling change over the radii.
    pub max_doubling_change: f64,
}

impl KernelProfile {
    /// `2^{j(n+1)/2}`, the natural amplitude of `h_j` on the sphere.
    pub fn amplitude(&self) -> f64 {
        2f64.powf(self.j as f64 * (self.n as f64 + 1.0) / 2.0)
    }

    /// CSV with columns `radius,re,im,envelope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,re,im,envelope\n");
        let (l, c) = self.envelope.unwrap_or((0.0, 0.0));
        let scale = 2f64.powi(self.j);
        for (r, v) in self.radii.iter().zip(&self.values) {
            let env = c * self.amplitude() * (1.0 + scale * (1.0 - r).abs()).powf(-l);
            out.push_str(&format!("{r:.17e},{:.17e},{:.17e},{env:.17e}\n", v.re, v.im));
        }
        out
    }
}

fn scaled_support(psi: &dyn RadialProfile, j: i32) -> (f64, f64) {
    let (a, b) = psi.support();
    let s = 2f64.powi(j);
    (a * s, b * s)
}

/// Panels for an integrand oscillating at rate `speed` on `[a, b]`: one
/// 16-node panel per wavelength, and at least 24 so the cutoff itself is
/// resolved.
fn panel_count(a: f64, b: f64, speed: f64) -> usize {
    (((b - a) * speed / (2.0 * PI)).ceil() as usize).max(24)
}

/// `h_j(r)` with its panel-doubling diagnostics.
pub fn kernel_value(psi: &dyn RadialProfile, j: i32, n: usize, r: f64) -> Result<CheckedIntegral> {
    let (a, b) = scaled_support(psi, j);
    let s = 2f64.powi(-j);
    let f = |t: f64| {
        let w = radial_bessel_kernel(n, r * t) * psi.value(s * t) * t.powi(n as i32 - 1);
        Complex64::from_polar(w, -t)
    };
    let floor = 1e-8 * 2f64.powf(j as f64 * (n as f64 + 1.0) / 2.0);
    integrate_checked(f, a, b, panel_count(a, b, r + 1.0), DOUBLING_TOL, floor).map_err(|e| match e {
        Error::Convergence(msg) => Error::Convergence(format!("h_j at j={j}, n={n}, r={r}: {msg}")),
        other => other,
    })
}

/// Samples `h_j` at `radii` (strictly increasing, positive).
pub fn radial_wave_kernel(psi: &dyn RadialProfile, j: i32, n: usize, radii: &[f64]) -> Result<KernelProfile> {
    if j < 1 {
        return Err(Error::Precondition(format!("kernel scale j = {j} must be at least 1")));
    }
    if n == 0 || n > 3 {
        return Err(Error::Precondition(format!("dimension {n} is not supported")));
    }
    if radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "radii must be positive and strictly increasing".into(),
        ));
    }
    let results: Vec<CheckedIntegral> = radii
        .par_iter()
        .map(|&r| kernel_value(psi, j, n, r))
        .collect::<Result<_>>()?;
    Ok(KernelProfile {
        j,
        n,
        radii: radii.to_vec(),
        values: results.iter().map(|c| c.value).collect(),
        c0: plateau_constant(psi, n)?,
        delta: None,
        j0: None,
        envelope: None,
        max_doubling_change: results.iter().map(|c| c.doubling_change).fold(0.0, f64::max),
    })
}

/// `L^p` norms of `h_j` from its radial profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelNorms {
    pub j: i32,
    pub n: usize,
    /// `(p, ‖h_j‖_p)`; `p = ∞` is the sup over the quadrature nodes.
    pub norms: Vec<(f64, f64)>,
    /// Shell half-width around `r = 1` that was integrated.
    pub half_width: f64,
    pub max_doubling_change: f64,
}

fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// `‖h_j‖_{L^p}` by Gauss–Legendre in `r` over the shell
/// `|1 − r| ≤ min(1, 40·2^{-j})`, with panels of width `2^{-j}`.
/// Outside the shell the kernel decays faster than any power of
/// `2^j |1 − r|` and is neglected.
pub fn kernel_lp_norms(psi: &dyn RadialProfile, j: i32, n: usize, ps: &[f64]) -> Result<KernelNorms> {
    if ps.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Precondition("exponents must be positive".into()));
    }
    let scale = 2f64.powi(-j);
    let half = (40.0 * scale).min(1.0);
    let panels = ((2.0 * half) / scale).ceil() as usize;
    let (nodes, weights) = super::quadrature::gauss_legendre(super::quadrature::PANEL_ORDER);
    let width = 2.0 * half / panels as f64;
    let mut rule: Vec<(f64, f64)> = Vec::with_capacity(panels * nodes.len());
    for k in 0..panels {
        let a = 1.0 - half + k as f64 * width;
        for (x, wt) in nodes.iter().zip(&weights) {
            let r = a + 0.5 * width * (x + 1.0);
            rule.push((r, 0.5 * width * wt * sphere_area(n) * r.powi(n as i32 - 1)));
        }
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (radii, w): (Vec<f64>, Vec<f64>) = rule.into_iter().unzip();
    let profile = radial_wave_kernel(psi, j, n, &radii)?;
    let norms = ps
        .iter()
        .map(|&p| {
            let v = if p.is_infinite() {
                profile.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
            } else {
                let s: f64 = profile.values.iter().zip(&w).map(|(v, wt)| wt * v.norm().powf(p)).sum();
                s.powf(1.0 / p)
            };
            (p, v)
        })
        .collect();
    Ok(KernelNorms {
        j,
        n,
        norms,
        half_width: half,
        max_doubling_change: profile.max_doubling_change,
    })
}

/// `c_0 = (2π)^{-(n+1)/2} ∫ ψ(t) t^{(n-1)/2} dt`.
pub fn plateau_constant(psi: &dyn RadialProfile, n: usize) -> Result<f64> {
    let (a, b) = psi.support();
    let e = (n as f64 - 1.0) / 2.0;
    let integral = integrate_adaptive(|t| psi.value(t) * t.powf(e), a, b, 1e-14)?;
    Ok((2.0 * PI).powf(-(n as f64 + 1.0) / 2.0) * integral)
}

/// `e^{i((n−2)π/4 + π/4)}`, which rotates `h_j` onto the positive axis
/// at the sphere.
pub fn plateau_phase(n: usize) -> Complex64 {
    Complex64::from_polar(1.0, (n as f64 - 2.0) * PI / 4.0 + PI / 4.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauCertificate {
    pub delta: f64,
    pub j0: i32,
    pub phase: Complex64,
    pub c0: f64,
    /// `(j, max |phase·2^{-j(n+1)/2} h_j − c0| / c0)` over the window.
    pub deviations: Vec<(i32, f64)>,
}

fn window_deviation(p: &KernelProfile, c0: f64, delta: f64, phase: Complex64) -> Option<f64> {
    let half = delta * 2f64.powi(-p.j);
    let amp = p.amplitude();
    let mut worst: Option<f64> = None;
    for (r, v) in p.radii.iter().zip(&p.values) {
        if (r - 1.0).abs() < half {
            let d = (phase * v / amp - c0).norm() / c0;
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
    }
    worst
}

/// Plateau certificate with the canonical phase factor.
pub fn certify_plateau(profiles: &[KernelProfile], c0: f64, delta_grid: &[f64]) -> Result<PlateauCertificate> {
    let n = profiles.first().map(|p| p.n).unwrap_or(2);
    certify_plateau_with_phase(profiles, c0, delta_grid, plateau_phase(n))
}

/// Largest `δ` in the grid, and for it the smallest `j0`, such that every
/// profile with `j > j0` stays within `c0/10` of `c0` on
/// `|1 − r| < δ 2^{-j}` after multiplication by `phase`.
pub fn certify_plateau_with_phase(
    profiles: &[KernelProfile],
    c0: f64,
    delta_grid: &[f64],
    phase: Complex64,
) -> Result<PlateauCertificate> {
    if profiles.is_empty() || !(c0 > 0.0) {
        return Err(Error::Precondition(
            "plateau certification needs profiles and c0 > 0".into(),
        ));
    }
    let mut sorted: Vec<&KernelProfile> = profiles.iter().collect();
    sorted.sort_by_key(|p| p.j);
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    for delta in deltas {
        let mut deviations = Vec::new();
        let mut last_fail: Option<i32> = None;
        for p in &sorted {
            let dev = window_deviation(p, c0, delta, phase).ok_or_else(|| {
                Error::Precondition(format!("profile j={} has no radius inside the δ={delta} window", p.j))
            })?;
            deviations.push((p.j, dev));
            if dev > 0.1 {
                last_fail = Some(p.j);
            }
        }
        let top = sorted.last().map(|p| p.j).unwrap_or(0);
        let j0 = match last_fail {
            Some(j) if j == top => continue,
            Some(j) => j,
            None => sorted[0].j - 1,
        };
        return Ok(PlateauCertificate {
            delta,
            j0,
            phase,
            c0,
            deviations,
        });
    }
    Err(Error::Numerical(
        "no (δ, j0) certifies the plateau on the supplied scales".into(),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub l: f64,
    /// Minimal constant per scale.
    pub per_scale: Vec<(i32, f64)>,
    /// Constant valid for all scales.
    pub c: f64,
    /// Largest over smallest per-scale constant.
    pub spread: f64,
}

/// Smallest `C` with `|h_j(r)| ≤ C 2^{j(n+1)/2} (1 + 2^j|1 − r|)^{-L}` on
/// every sampled radius of every profile.
pub fn envelope_fit(profiles: &[KernelProfile], l: f64) -> Result<EnvelopeReport> {
    if profiles.len() < 4 {
        return Err(Error::Precondition("envelope fit needs at least four scales".into()));
    }
    let mut per_scale = Vec::new();
    for p in profiles {
        let s = 2f64.powi(p.j);
        let amp = p.amplitude();
        let c = p
            .radii
            .iter()
            .zip(&p.values)
            .map(|(r, v)| v.norm() / amp * (1.0 + s * (1.0 - r).abs()).powf(l))
            .fold(0.0, f64::max);
        per_scale.push((p.j, c));
    }
    let c = per_scale.iter().map(|x| x.1).fold(0.0, f64::max);
    let lo = per_scale.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    if !(c < 1e6) {
        return Err(Error::Numerical(format!("no envelope constant below 1e6 for L = {l}")));
    }
    Ok(EnvelopeReport {
        l,
        per_scale,
        c,
        spread: c / lo,
    })
}

/// `∫ ψ(t) t^{(n-1)/2} e^{-iτt} dt`.
pub fn psi_weight_transform(psi: &dyn RadialProfile, n: usize, tau: f64) -> Complex64 {
    let (a, b) = psi.support();
    let e = (n as f64 - 1.0) / 2.0;
    let panels = panel_count(a, b, tau.abs() + 1.0);
    integrate_panels(
        |t| Complex64::from_polar(psi.value(t) * t.powf(e), -tau * t),
        a,
        b,
        panels,
    )
}

/// The four pieces `I^±, K^±` of `h_j(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitTerms {
    pub i_plus: Complex64,
    pub i_minus: Complex64,
    pub k_plus: Complex64,
    pub k_minus: Complex64,
}

impl SplitTerms {
    pub fn total(&self) -> Complex64 {
        self.i_plus + self.i_minus + self.k_plus + self.k_minus
    }
}

fn b_pm(n: usize, sign: f64) -> Complex64 {
    let phi = (n as f64 - 2.0) * PI / 4.0 + PI / 4.0;
    Complex64::from_polar((2.0 * PI).powf(-(n as f64 + 1.0) / 2.0), -sign * phi)
}

/// `R^±(s) = b^± s^{(1−n)/2} (A^±(s) − 1)` with `A^± = P ± iQ` truncated.
pub fn remainder(n: usize, sign: f64, s: f64) -> Complex64 {
    let nu = (n as f64 - 2.0) / 2.0;
    let (p, q) = hankel_pq(nu, s, Some(SPLIT_TERMS));
    b_pm(n, sign) * s.powf((1.0 - n as f64) / 2.0) * Complex64::new(p - 1.0, sign * q)
}

/// Main terms in closed form via `Ψ̂`, remainder terms by quadrature.
pub fn asymptotic_split(psi: &dyn RadialProfile, j: i32, n: usize, r: f64) -> Result<SplitTerms> {
    let scale = 2f64.powi(j);
    let amp = r.powf((1.0 - n as f64) / 2.0) * scale.powf((n as f64 + 1.0) / 2.0);
    let i_plus = b_pm(n, 1.0) * amp * psi_weight_transform(psi, n, scale * (1.0 - r));
    let i_minus = b_pm(n, -1.0) * amp * psi_weight_transform(psi, n, scale * (1.0 + r));
    let (a, b) = scaled_support(psi, j);
    let floor = 1e-8 * scale.powf((n as f64 + 1.0) / 2.0);
    let k = |sign: f64| -> Result<Complex64> {
        let f = |t: f64| {
            let w = psi.value(t / scale) * t.powi(n as i32 - 1);
            remainder(n, sign, r * t) * Complex64::from_polar(w, sign * r * t - t)
        };
        Ok(integrate_checked(f, a, b, panel_count(a, b, r + 1.0), DOUBLING_TOL, floor)?.value)
    };
    Ok(SplitTerms {
        i_plus,
        i_minus,
        k_plus: k(1.0)?,
        k_minus: k(-1.0)?,
    })
}
