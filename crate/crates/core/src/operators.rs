//! Linear and bilinear Fourier multipliers on grid fields.
//!
//! Bilinear symbols carry an optional factorisation into a finite sum of
//! separable terms `Σ c·u_i(ξ)·v_k(η)`. With it, `T_σ(f, g)` costs one
//! FFT per distinct factor; without it only the dense double-sum oracle
//! is available, which is restricted to small grids.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{fourier_transform, inverse_fourier_transform, Band, Field, RadialProfile, Side};
use crate::symbols::{Cutoff, CutoffKind, SymbolFamily, SymbolFn, WavePhase};

/// Largest samples-per-axis accepted by the dense oracle.
pub const DENSE_ORACLE_MAX_SAMPLES: usize = 64;
/// Default cap on the number of separable terms applied in one call.
pub const DEFAULT_TERM_BUDGET: usize = 1 << 20;

pub type LinearFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Frequency sampler `θ(ξ)` with an optional radial support annulus.
#[derive(Clone)]
pub struct LinearSymbol {
    f: LinearFn,
    support: Option<Band>,
}

impl std::fmt::Debug for LinearSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSymbol").field("support", &self.support).finish()
    }
}

fn radius(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl LinearSymbol {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            support: None,
        }
    }

    pub fn with_support(mut self, band: Band) -> Self {
        self.support = Some(band);
        self
    }

    pub fn one() -> Self {
        Self::new(|_| Complex64::new(1.0, 0.0))
    }

    /// `p(|ξ|)`, carrying the profile support.
    pub fn radial(profile: Cutoff) -> Self {
        let (lo, hi) = profile.support();
        let s = Self::new(move |xi| Complex64::new(profile.value(radius(xi)), 0.0));
        if hi.is_finite() {
            s.with_support(Band::new(lo, hi))
        } else {
            s
        }
    }

    /// `e^{iφ(ξ)}`.
    pub fn phase(phase: &WavePhase) -> Self {
        let phase = phase.clone();
        Self::new(move |xi| Complex64::from_polar(1.0, phase.eval(xi)))
    }

    pub fn times(&self, other: &LinearSymbol) -> LinearSymbol {
        let (a, b) = (self.f.clone(), other.f.clone());
        let support = match (self.support, other.support) {
            (Some(p), Some(q)) => Some(p.intersect(&q)),
            (p, q) => p.or(q),
        };
        LinearSymbol {
            f: Arc::new(move |xi| a(xi) * b(xi)),
            support,
        }
    }

    pub fn scaled(&self, c: Complex64) -> LinearSymbol {
        let a = self.f.clone();
        LinearSymbol {
            f: Arc::new(move |xi| a(xi) * c),
            support: self.support,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.f)(xi)
    }

    pub fn support(&self) -> Option<Band> {
        self.support
    }
}

fn merge_band(a: Option<Band>, b: Option<Band>) -> Option<Band> {
    match (a, b) {
        (Some(p), Some(q)) => Some(p.intersect(&q)),
        (p, q) => p.or(q),
    }
}

fn multiply_spectrum(theta: &LinearSymbol, spec: &Field) -> Field {
    let grid = *spec.grid();
    let d = grid.dim();
    let mut out = spec.clone();
    out.data_mut().iter_mut().enumerate().for_each(|(i, v)| {
        if *v != Complex64::new(0.0, 0.0) {
            *v *= theta.eval(&grid.freq_point(i)[..d]);
        }
    });
    out.with_band(merge_band(spec.band(), theta.support()))
}

/// `(θ(ξ) f̂(ξ))^∨`.
pub fn linear_multiplier_apply(theta: &LinearSymbol, f: &Field) -> Result<Field> {
    f.require_side(Side::Physical)?;
    let spec = fourier_transform(f)?;
    let out = inverse_fourier_transform(&multiply_spectrum(theta, &spec))?;
    out.check_finite()?;
    Ok(out)
}

/// Finite separable representation `Σ_t c_t · left[i_t](ξ) · right[k_t](η)`.
#[derive(Clone, Debug, Default)]
pub struct SeparableSum {
    pub left: Vec<LinearSymbol>,
    pub right: Vec<LinearSymbol>,
    pub terms: Vec<(usize, usize, Complex64)>,
    /// Sup-norm bound on the part of the symbol not represented.
    pub truncation_bound: f64,
}

impl SeparableSum {
    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> Complex64 {
        let u: Vec<Complex64> = self.left.iter().map(|s| s.eval(xi)).collect();
        let v: Vec<Complex64> = self.right.iter().map(|s| s.eval(eta)).collect();
        self.terms.iter().map(|&(i, k, c)| c * u[i] * v[k]).sum()
    }

    /// Multiplies every left factor by `a` and every right factor by `b`.
    pub fn modulated(&self, a: &LinearSymbol, b: &LinearSymbol) -> SeparableSum {
        SeparableSum {
            left: self.left.iter().map(|u| u.times(a)).collect(),
            right: self.right.iter().map(|v| v.times(b)).collect(),
            terms: self.terms.clone(),
            truncation_bound: self.truncation_bound,
        }
    }
}

/// Sampler for `σ(ξ, η)` with an optional separable factorisation.
#[derive(Clone)]
pub struct BilinearSymbol {
    eval: SymbolFn,
    separable: Option<Arc<SeparableSum>>,
}

impl std::fmt::Debug for BilinearSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BilinearSymbol")
            .field("terms", &self.separable.as_ref().map(|s| s.terms.len()))
            .finish()
    }
}

impl BilinearSymbol {
    /// A symbol known only pointwise.
    pub fn dense(eval: SymbolFn) -> Self {
        Self { eval, separable: None }
    }

    pub fn from_sum(sum: SeparableSum) -> Self {
        let sum = Arc::new(sum);
        let s = sum.clone();
        Self {
            eval: Arc::new(move |xi, eta| s.eval(xi, eta)),
            separable: Some(sum),
        }
    }

    /// `u(ξ)·v(η)`.
    pub fn separable(u: LinearSymbol, v: LinearSymbol) -> Self {
        Self::from_sum(SeparableSum {
            left: vec![u],
            right: vec![v],
            terms: vec![(0, 0, Complex64::new(1.0, 0.0))],
            truncation_bound: 0.0,
        })
    }

    pub fn constant(c: Complex64) -> Self {
        Self::separable(LinearSymbol::one().scaled(c), LinearSymbol::one())
    }

    /// Sampler for a symbol family; `σ_j` keeps its factorisation.
    pub fn from_family(family: &SymbolFamily) -> Self {
        match family {
            SymbolFamily::SigmaJ { m, j } => {
                let theta = LinearSymbol::radial(Cutoff::new(CutoffKind::Theta, *j));
                let amp = 2f64.powf(*j as f64 * m);
                Self::separable(theta.scaled(Complex64::new(amp, 0.0)), theta)
            }
            other => Self::dense(other.sampler()),
        }
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> Complex64 {
        (self.eval)(xi, eta)
    }

    pub fn separable_sum(&self) -> Option<&SeparableSum> {
        self.separable.as_deref()
    }

    /// `e^{i(φ1(ξ) + φ2(η))} σ(ξ, η)`.
    pub fn modulated(&self, phi1: &WavePhase, phi2: &WavePhase) -> BilinearSymbol {
        let (a, b) = (LinearSymbol::phase(phi1), LinearSymbol::phase(phi2));
        match &self.separable {
            Some(sum) => BilinearSymbol::from_sum(sum.modulated(&a, &b)),
            None => {
                let inner = self.eval.clone();
                BilinearSymbol::dense(Arc::new(move |xi, eta| a.eval(xi) * b.eval(eta) * inner(xi, eta)))
            }
        }
    }
}

fn side_band(input: Option<Band>, factors: &[LinearSymbol]) -> Option<Band> {
    let mut hull: Option<Band> = None;
    for u in factors {
        let b = merge_band(input, u.support())?;
        hull = Some(match hull {
            Some(h) => Band::new(h.min.min(b.min), h.max.max(b.max)),
            None => b,
        });
    }
    hull
}

fn output_band(grid_nyquist: f64, a: Option<Band>, b: Option<Band>) -> Option<Band> {
    match (a, b) {
        // Only certify when the sumset cannot fold back through Nyquist.
        (Some(p), Some(q)) if p.max + q.max <= grid_nyquist => Some(p.sumset(&q)),
        _ => None,
    }
}

/// `T_σ(f, g)` with the default term budget.
pub fn bilinear_multiplier_apply(sigma: &BilinearSymbol, f: &Field, g: &Field) -> Result<Field> {
    bilinear_multiplier_apply_with_budget(sigma, f, g, DEFAULT_TERM_BUDGET)
}

pub fn bilinear_multiplier_apply_with_budget(
    sigma: &BilinearSymbol,
    f: &Field,
    g: &Field,
    budget: usize,
) -> Result<Field> {
    f.same_grid(g)?;
    f.require_side(Side::Physical)?;
    g.require_side(Side::Physical)?;
    let Some(sum) = sigma.separable_sum() else {
        if f.grid().samples() <= DENSE_ORACLE_MAX_SAMPLES {
            return bilinear_dense_apply(sigma, f, g);
        }
        return Err(Error::Precondition(
            "symbol has no separable representation and the grid is too large for the dense oracle".into(),
        ));
    };
    if sum.terms.len() > budget {
        return Err(Error::TermBudget {
            terms: sum.terms.len(),
            budget,
            truncation_bound: sum.truncation_bound,
        });
    }
    let grid = *f.grid();
    let fh = fourier_transform(f)?;
    let gh = fourier_transform(g)?;
    let apply = |u: &LinearSymbol, spec: &Field| -> Result<Vec<Complex64>> {
        Ok(inverse_fourier_transform(&multiply_spectrum(u, spec))?.into_data())
    };
    let a: Vec<Vec<Complex64>> = sum.left.par_iter().map(|u| apply(u, &fh)).collect::<Result<_>>()?;
    let b: Vec<Vec<Complex64>> = sum.right.par_iter().map(|v| apply(v, &gh)).collect::<Result<_>>()?;
    // Group by left factor; accumulation order follows term order.
    let mut by_left: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); sum.left.len()];
    for &(i, k, c) in &sum.terms {
        by_left[i].push((k, c));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut inner = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, row) in by_left.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        inner.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for &(k, c) in row {
            inner.iter_mut().zip(&b[k]).for_each(|(s, v)| *s += c * v);
        }
        out.iter_mut()
            .zip(a[i].iter().zip(&inner))
            .for_each(|(o, (x, y))| *o += x * y);
    }
    let band = output_band(
        grid.nyquist(),
        side_band(f.band(), &sum.left),
        side_band(g.band(), &sum.right),
    );
    let out = Field::new(grid, Side::Physical, out)?.with_band(band);
    out.check_finite()?;
    Ok(out)
}

/// Dense double-sum evaluation of `T_σ(f, g)`; exact at the grid points
/// for the periodised quadrature and used as the oracle for fast paths.
pub fn bilinear_dense_apply(sigma: &BilinearSymbol, f: &Field, g: &Field) -> Result<Field> {
    f.same_grid(g)?;
    f.require_side(Side::Physical)?;
    g.require_side(Side::Physical)?;
    let grid = *f.grid();
    if grid.samples() > DENSE_ORACLE_MAX_SAMPLES {
        return Err(Error::Precondition(format!(
            "dense oracle is limited to {DENSE_ORACLE_MAX_SAMPLES} samples per axis"
        )));
    }
    let fh = fourier_transform(f)?;
    let gh = fourier_transform(g)?;
    let d = grid.dim();
    let w = (grid.dxi() / (2.0 * PI)).powi(d as i32);
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k1, a) in fh.data().iter().enumerate() {
        let xi = grid.freq_point(k1);
        for (k2, b) in gh.data().iter().enumerate() {
            let eta = grid.freq_point(k2);
            acc[grid.add_indices(k1, k2)] += sigma.eval(&xi[..d], &eta[..d]) * a * b;
        }
    }
    acc.iter_mut().for_each(|v| *v *= w);
    let spec = Field::new(grid, Side::Frequency, acc)?;
    inverse_fourier_transform(&spec)
}

/// `T` with symbol `e^{i(φ1(ξ)+φ2(η))} σ(ξ, η)`.
pub fn wave_bilinear_apply(
    phi1: &WavePhase,
    phi2: &WavePhase,
    sigma: &BilinearSymbol,
    f: &Field,
    g: &Field,
) -> Result<Field> {
    bilinear_multiplier_apply(&sigma.modulated(phi1, phi2), f, g)
}

/// Half-wave multiplier `e^{i|ξ|} θ(2^{-j}|ξ|)`.
pub fn sj_symbol(j: i32) -> LinearSymbol {
    LinearSymbol::phase(&WavePhase::euclidean()).times(&LinearSymbol::radial(Cutoff::new(CutoffKind::Theta, j)))
}

/// `S_j f = (e^{i|ξ|} θ(2^{-j}ξ) f̂)^∨`.
pub fn sj_apply(j: i32, f: &Field) -> Result<Field> {
    let top = 2f64.powi(j + 2);
    if top > f.grid().guard() {
        return Err(Error::Precondition(format!(
            "scale j = {j} needs 2^(j+2) = {top} below the grid guard {:.3}",
            f.grid().guard()
        )));
    }
    linear_multiplier_apply(&sj_symbol(j), f)
}
