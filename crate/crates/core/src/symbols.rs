//! Cutoffs, wave phases, bilinear symbol families and sampled seminorms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::RadialProfile;

/// `h(t) = e^{-1/t}` for `t > 0`, zero otherwise.
fn h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = h(t);
    let b = h(1.0 - t);
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        1.0
    } else {
        a / (a + b)
    }
}

/// Base cutoff `g`: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn cutoff_g(rho: f64) -> f64 {
    smooth_step(2.0 - rho)
}

/// Shapes used across the crate. All are functions of `|ξ|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffKind {
    /// `ψ(ρ) = g(ρ) − g(2ρ)`, supported in `[1/2, 2]`.
    Psi,
    /// `φ = g`, equal to 1 on `[0, 1]`.
    PhiLow,
    /// `ζ = 1 − g`, equal to 1 on `[2, ∞)`.
    Zeta,
    /// Enlarged annular bump: 1 on `[1/2, 2]`, supported in `[1/3, 3]`.
    Theta,
    /// Enlarged low-pass: 1 on `[0, 2]`, supported in `[0, 3]`.
    PhiTilde,
}

impl CutoffKind {
    pub fn eval(self, rho: f64) -> f64 {
        match self {
            CutoffKind::Psi => cutoff_g(rho) - cutoff_g(2.0 * rho),
            CutoffKind::PhiLow => cutoff_g(rho),
            CutoffKind::Zeta => 1.0 - cutoff_g(rho),
            CutoffKind::Theta => smooth_step((rho - 1.0 / 3.0) * 6.0) * (1.0 - smooth_step(rho - 2.0)),
            CutoffKind::PhiTilde => 1.0 - smooth_step(rho - 2.0),
        }
    }

    pub fn support(self) -> (f64, f64) {
        match self {
            CutoffKind::Psi => (0.5, 2.0),
            CutoffKind::PhiLow => (0.0, 2.0),
            CutoffKind::Zeta => (1.0, f64::INFINITY),
            CutoffKind::Theta => (1.0 / 3.0, 3.0),
            CutoffKind::PhiTilde => (0.0, 3.0),
        }
    }
}

/// `amplitude · kind(2^{-scale} ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub kind: CutoffKind,
    pub scale: i32,
    pub amplitude: f64,
}

impl Cutoff {
    pub fn new(kind: CutoffKind, scale: i32) -> Self {
        Self {
            kind,
            scale,
            amplitude: 1.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

impl RadialProfile for Cutoff {
    fn value(&self, rho: f64) -> f64 {
        self.amplitude * self.kind.eval(rho * 2f64.powi(-self.scale))
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = self.kind.support();
        let s = 2f64.powi(self.scale);
        (a * s, b * s)
    }
}

/// Radial profile given by a closure and an explicit support.
pub struct FnProfile<F> {
    f: F,
    support: (f64, f64),
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnProfile<F> {
    pub fn new(f: F, support: (f64, f64)) -> Self {
        Self { f, support }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RadialProfile for FnProfile<F> {
    fn value(&self, rho: f64) -> f64 {
        (self.f)(rho)
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }
}

/// The triple `(ψ, φ, ζ)` with `ψ_j = ψ(2^{-j}·)` for `j ≥ 1`, `ψ_0 = φ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition;

pub fn make_dyadic_partition() -> DyadicPartition {
    DyadicPartition
}

impl DyadicPartition {
    pub fn psi(&self, rho: f64) -> f64 {
        CutoffKind::Psi.eval(rho)
    }

    pub fn phi_low(&self, rho: f64) -> f64 {
        CutoffKind::PhiLow.eval(rho)
    }

    pub fn zeta(&self, rho: f64) -> f64 {
        CutoffKind::Zeta.eval(rho)
    }

    /// `ψ(2^{-j} ρ)` for any integer `j`.
    pub fn psi_scaled(&self, j: i32, rho: f64) -> f64 {
        self.psi(rho * 2f64.powi(-j))
    }

    /// Littlewood–Paley piece: `φ` at `j = 0`, `ψ(2^{-j}·)` for `j ≥ 1`.
    pub fn piece(&self, j: i32, rho: f64) -> f64 {
        if j <= 0 {
            self.phi_low(rho)
        } else {
            self.psi_scaled(j, rho)
        }
    }

    pub fn psi_profile(&self, j: i32) -> Cutoff {
        Cutoff::new(CutoffKind::Psi, j)
    }
}

/// Degree-one homogeneous real phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhaseKind {
    Zero,
    Euclidean,
    /// `√(ξᵀAξ)` with `A` symmetric positive definite.
    Ellipse([[f64; 2]; 2]),
    /// `v·ξ`.
    Linear(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePhase {
    kind: PhaseKind,
    gradient_sup: f64,
}

pub fn make_wave_phase(kind: PhaseKind) -> Result<WavePhase> {
    match &kind {
        PhaseKind::Ellipse(a) => {
            let sym = (a[0][1] - a[1][0]).abs() <= 1e-12 * (a[0][1].abs() + a[1][0].abs() + 1.0);
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            if !sym || a[0][0] <= 0.0 || det <= 0.0 {
                return Err(Error::Precondition(
                    "ellipse matrix is not symmetric positive definite".into(),
                ));
            }
        }
        PhaseKind::Linear(v) if v.is_empty() || v.len() > 2 || v.iter().all(|c| *c == 0.0) => {
            return Err(Error::Precondition(
                "linear phase needs a nonzero vector in 1 or 2 dimensions".into(),
            ));
        }
        _ => {}
    }
    let mut phase = WavePhase {
        kind,
        gradient_sup: 0.0,
    };
    phase.gradient_sup = phase.max_gradient();
    Ok(phase)
}

impl WavePhase {
    pub fn zero() -> Self {
        WavePhase {
            kind: PhaseKind::Zero,
            gradient_sup: 0.0,
        }
    }

    pub fn euclidean() -> Self {
        WavePhase {
            kind: PhaseKind::Euclidean,
            gradient_sup: 1.0,
        }
    }

    pub fn kind(&self) -> &PhaseKind {
        &self.kind
    }

    /// `sup_{|ξ|=1} |∇φ(ξ)|`.
    pub fn gradient_sup(&self) -> f64 {
        self.gradient_sup
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match &self.kind {
            PhaseKind::Zero => 0.0,
            PhaseKind::Euclidean => xi.iter().map(|v| v * v).sum::<f64>().sqrt(),
            PhaseKind::Ellipse(a) => {
                let (x, y) = (xi[0], xi.get(1).copied().unwrap_or(0.0));
                (a[0][0] * x * x + (a[0][1] + a[1][0]) * x * y + a[1][1] * y * y)
                    .max(0.0)
                    .sqrt()
            }
            PhaseKind::Linear(v) => v.iter().zip(xi).map(|(a, b)| a * b).sum(),
        }
    }

    /// `∇φ(ξ)`, zero at the origin for the non-linear kinds.
    pub fn gradient(&self, xi: &[f64]) -> [f64; 2] {
        let (x, y) = (xi[0], xi.get(1).copied().unwrap_or(0.0));
        match &self.kind {
            PhaseKind::Zero => [0.0, 0.0],
            PhaseKind::Euclidean => {
                let r = x.hypot(y);
                if r == 0.0 {
                    [0.0, 0.0]
                } else {
                    [x / r, y / r]
                }
            }
            PhaseKind::Ellipse(a) => {
                let p = self.eval(xi);
                if p == 0.0 {
                    return [0.0, 0.0];
                }
                [(a[0][0] * x + a[0][1] * y) / p, (a[1][0] * x + a[1][1] * y) / p]
            }
            PhaseKind::Linear(v) => [v[0], v.get(1).copied().unwrap_or(0.0)],
        }
    }

    fn grad_norm_at(&self, angle: f64) -> f64 {
        let g = self.gradient(&[angle.cos(), angle.sin()]);
        g[0].hypot(g[1])
    }

    fn max_gradient(&self) -> f64 {
        const SAMPLES: usize = 512;
        let step = 2.0 * PI / SAMPLES as f64;
        let (mut best, mut best_at) = (f64::MIN, 0.0);
        for i in 0..SAMPLES {
            let t = i as f64 * step;
            let v = self.grad_norm_at(t);
            if v > best {
                best = v;
                best_at = t;
            }
        }
        // Golden-section refinement on the bracketing interval.
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (best_at - step, best_at + step);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (self.grad_norm_at(c), self.grad_norm_at(d));
        for _ in 0..80 {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = self.grad_norm_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = self.grad_norm_at(d);
            }
        }
        best.max(fc).max(fd)
    }
}

pub type SymbolFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

/// Bilinear symbol families.
#[derive(Clone)]
pub enum SymbolFamily {
    /// `(1 + |ξ|² + |η|²)^{m/2}`.
    Power {
        m: f64,
    },
    /// `2^{jm} θ(2^{-j}ξ) θ(2^{-j}η)`.
    SigmaJ {
        m: f64,
        j: i32,
    },
    Custom {
        m: f64,
        f: SymbolFn,
    },
}

impl std::fmt::Debug for SymbolFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymbolFamily::Power { m } => write!(f, "Power {{ m: {m} }}"),
            SymbolFamily::SigmaJ { m, j } => write!(f, "SigmaJ {{ m: {m}, j: {j} }}"),
            SymbolFamily::Custom { m, .. } => write!(f, "Custom {{ m: {m} }}"),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl SymbolFamily {
    pub fn order(&self) -> f64 {
        match self {
            SymbolFamily::Power { m } | SymbolFamily::SigmaJ { m, .. } | SymbolFamily::Custom { m, .. } => *m,
        }
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> Complex64 {
        match self {
            SymbolFamily::Power { m } => {
                let s = 1.0 + xi.iter().chain(eta).map(|v| v * v).sum::<f64>();
                Complex64::new(s.powf(m / 2.0), 0.0)
            }
            SymbolFamily::SigmaJ { m, j } => {
                let s = 2f64.powi(-j);
                let v = 2f64.powf(*j as f64 * m)
                    * CutoffKind::Theta.eval(norm(xi) * s)
                    * CutoffKind::Theta.eval(norm(eta) * s);
                Complex64::new(v, 0.0)
            }
            SymbolFamily::Custom { f, .. } => f(xi, eta),
        }
    }

    pub fn sampler(&self) -> SymbolFn {
        let me = self.clone();
        Arc::new(move |xi, eta| me.eval(xi, eta))
    }
}

/// One multi-index row of a seminorm report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormEntry {
    /// Derivative orders, first the `ξ` variables then the `η` variables.
    pub alpha: Vec<usize>,
    /// Weighted sup over the base probe set.
    pub sup: f64,
    /// Weighted sup over the probe set extended to larger radii.
    pub sup_extended: f64,
    /// Largest relative disagreement between the step-`h` and step-`h/2`
    /// extrapolations, measured against the sup.
    pub refinement_gap: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormReport {
    pub m: f64,
    pub max_order: usize,
    pub entries: Vec<SeminormEntry>,
    pub in_class: bool,
}

impl SeminormReport {
    pub fn max_ratio(&self) -> f64 {
        self.entries.iter().map(|e| e.sup).fold(0.0, f64::max)
    }
}

fn multi_indices(vars: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; vars]];
    let mut frontier = out.clone();
    for _ in 0..max_order {
        let mut next = Vec::new();
        for a in &frontier {
            // Increment only at or after the last nonzero slot to avoid duplicates.
            let start = a.iter().rposition(|&v| v > 0).unwrap_or(0);
            for i in start..vars {
                let mut b = a.clone();
                b[i] += 1;
                next.push(b);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tensor central difference of order `alpha` at `z` with step `h`.
fn central_difference(f: &dyn Fn(&[f64]) -> Complex64, z: &[f64], alpha: &[usize], h: f64) -> Complex64 {
    let active: Vec<(usize, usize)> = alpha.iter().copied().enumerate().filter(|(_, k)| *k > 0).collect();
    let total: usize = active.iter().map(|(_, k)| k).sum();
    let combos: usize = active.iter().map(|(_, k)| k + 1).product();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut point = z.to_vec();
    for mut c in 0..combos {
        let mut weight = 1.0;
        point.copy_from_slice(z);
        for &(var, k) in &active {
            let i = c % (k + 1);
            c /= k + 1;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            weight *= sign * binomial(k, i);
            point[var] += (k as f64 / 2.0 - i as f64) * h;
        }
        acc += f(&point) * weight;
    }
    acc / h.powi(total as i32)
}

fn richardson(f: &dyn Fn(&[f64]) -> Complex64, z: &[f64], alpha: &[usize], h: f64) -> Complex64 {
    let coarse = central_difference(f, z, alpha, h);
    let fine = central_difference(f, z, alpha, h / 2.0);
    (fine * 4.0 - coarse) / 3.0
}

/// Radii `2^{k/2}`, `k = -4..28`, aligned with the dyadic scales.
pub fn probe_radii() -> Vec<f64> {
    (-4..28).map(|k| 2f64.powf(k as f64 / 2.0)).collect()
}

fn probe_directions(vars: usize) -> Vec<Vec<f64>> {
    const COUNT: usize = 16;
    if vars == 2 {
        return (0..COUNT)
            .map(|i| {
                let t = (i as f64 + 0.5) * 2.0 * PI / COUNT as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..COUNT)
        .map(|_| loop {
            let v: Vec<f64> = (0..vars).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = norm(&v);
            if r > 0.2 && r <= 1.0 {
                break v.iter().map(|c| c / r).collect();
            }
        })
        .collect()
}

/// Sampled `S^m` seminorms of `σ` in dimension `n`, all orders up to
/// `max_order ≤ 4`.
pub fn symbol_seminorm(sigma: &SymbolFamily, m: f64, max_order: usize, n: usize) -> Result<SeminormReport> {
    if max_order > 4 {
        return Err(Error::Precondition(format!("derivative order {max_order} exceeds 4")));
    }
    if n != 1 && n != 2 {
        return Err(Error::Precondition(format!("dimension {n} is not 1 or 2")));
    }
    let vars = 2 * n;
    let f = |z: &[f64]| sigma.eval(&z[..n], &z[n..]);
    let radii = probe_radii();
    let extended: Vec<f64> = (28..36).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
    let dirs = probe_directions(vars);
    let mut entries = Vec::new();
    for alpha in multi_indices(vars, max_order) {
        let order: usize = alpha.iter().sum();
        let (mut sup, mut sup_ext, mut gap) = (0.0f64, 0.0f64, 0.0f64);
        for (set, r_list) in [(0, &radii), (1, &extended)] {
            for &r in r_list.iter() {
                let h = 0.02 * (1.0 + r);
                for d in &dirs {
                    let z: Vec<f64> = d.iter().map(|c| c * r).collect();
                    let weight = (1.0 + r).powf(order as f64 - m);
                    let est = richardson(&f, &z, &alpha, h);
                    let v = est.norm() * weight;
                    if set == 0 {
                        sup = sup.max(v);
                        let refined = richardson(&f, &z, &alpha, h / 2.0);
                        gap = gap.max((est - refined).norm() * weight);
                    } else {
                        sup_ext = sup_ext.max(v);
                    }
                }
            }
        }
        let rel_gap = if sup > 0.0 { gap / sup } else { 0.0 };
        let stable = sup.is_finite() && sup_ext.is_finite() && sup_ext <= 2.0 * sup.max(1e-300) && rel_gap <= 0.1;
        entries.push(SeminormEntry {
            alpha,
            sup,
            sup_extended: sup_ext,
            refinement_gap: rel_gap,
            stable,
        });
    }
    let in_class = entries.iter().all(|e| e.stable);
    Ok(SeminormReport {
        m,
        max_order,
        entries,
        in_class,
    })
}
