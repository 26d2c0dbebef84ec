//! Periodic grids, sampled fields and the continuum-normalised discrete
//! Fourier calculus.
//!
//! Conventions: `f̂(ξ) = ∫ e^{-iξ·x} f(x) dx` and
//! `g^∨(x) = (2π)^{-n} ∫ e^{iξ·x} g(ξ) dξ`, both approximated by periodised
//! trapezoid sums. Index `i` on an axis maps to `x = i·dx` for `i < N/2`
//! and to `(i - N)·dx` otherwise, so the origin sits at index zero; the
//! same wrap applies to frequencies with spacing `dξ = 2π/L`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the Nyquist frequency a spectral support may reach.
pub const GUARD_FRACTION: f64 = 15.0 / 16.0;

/// Uniform periodic grid on `[-L/2, L/2)^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    samples: usize,
    length: f64,
}

impl GridSpec {
    /// Validating constructor. `samples` must be a power of two ≥ 16.
    pub fn new(dim: usize, samples: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} is not 1 or 2")));
        }
        if samples < 16 || !samples.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "sample count {samples} is not a power of two >= 16"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {length} is not positive")));
        }
        Ok(Self { dim, samples, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.samples as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.samples as f64 / self.length
    }

    /// Largest radius a spectral support may reach without aliasing risk.
    pub fn guard(&self) -> f64 {
        GUARD_FRACTION * self.nyquist()
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `dx^n`, the quadrature weight of a physical sample.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// `dξ^n`, the quadrature weight of a frequency sample.
    pub fn dual_cell_volume(&self) -> f64 {
        self.dxi().powi(self.dim as i32)
    }

    fn wrap(&self, i: usize) -> f64 {
        let n = self.samples;
        if i < n / 2 {
            i as f64
        } else {
            i as f64 - n as f64
        }
    }

    /// Physical coordinate of axis index `i`.
    pub fn coordinate(&self, i: usize) -> f64 {
        self.wrap(i) * self.dx()
    }

    /// Frequency of axis index `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        self.wrap(k) * self.dxi()
    }

    /// Axis indices of a flat index (unused trailing axes are zero).
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.samples, flat % self.samples]
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.samples + idx[1]
        }
    }

    /// Physical point of a flat index; the second entry is zero in 1-D.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.unflatten(flat);
        let y = if self.dim == 2 { self.coordinate(b) } else { 0.0 };
        [self.coordinate(a), y]
    }

    /// Frequency point of a flat index; the second entry is zero in 1-D.
    pub fn freq_point(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.unflatten(flat);
        let y = if self.dim == 2 { self.frequency(b) } else { 0.0 };
        [self.frequency(a), y]
    }

    /// Flat index of the lattice frequency `k1 + k2` (periodic).
    pub fn add_indices(&self, a: usize, b: usize) -> usize {
        let n = self.samples;
        let [a0, a1] = self.unflatten(a);
        let [b0, b1] = self.unflatten(b);
        self.flatten([(a0 + b0) % n, (a1 + b1) % n])
    }
}

/// Shorthand for [`GridSpec::new`].
pub fn make_grid(dim: usize, samples: usize, length: f64) -> Result<GridSpec> {
    GridSpec::new(dim, samples, length)
}

/// Smallest power-of-two grid with side `length` whose Nyquist frequency
/// is at least `oversample · top`. When that needs more than `max_samples`
/// per axis the box shrinks instead, so that `dx · top` stays fixed and
/// families of dyadically scaled objects are sampled self-similarly.
pub fn grid_resolving(dim: usize, top: f64, oversample: f64, length: f64, max_samples: usize) -> Result<GridSpec> {
    if !(oversample >= 1.0 / GUARD_FRACTION) {
        return Err(Error::InvalidGrid(format!(
            "oversampling {oversample} leaves no aliasing margin"
        )));
    }
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::InvalidGrid(format!("band top {top} is not positive")));
    }
    let need = oversample * top * length / PI;
    let samples = (need.ceil() as usize).max(16).next_power_of_two();
    if samples <= max_samples {
        return GridSpec::new(dim, samples, length);
    }
    if !max_samples.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "sample cap {max_samples} is not a power of two"
        )));
    }
    // Keep the sampling ratio of the uncapped grid: dx · top = π/(o·2^e).
    let ratio = need / samples as f64;
    GridSpec::new(dim, max_samples, max_samples as f64 * PI * ratio / (oversample * top))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Physical,
    Frequency,
}

/// Certified annulus `ρ_min ≤ |ξ| ≤ ρ_max` containing the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

impl Band {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.min && rho <= self.max
    }

    pub fn intersect(&self, other: &Band) -> Band {
        Band::new(self.min.max(other.min), self.max.min(other.max))
    }

    /// Annulus containing `ξ + η` for `ξ` in `self` and `η` in `other`.
    pub fn sumset(&self, other: &Band) -> Band {
        let lo = (self.min - other.max).max(other.min - self.max).max(0.0);
        Band::new(lo, self.max + other.max)
    }
}

/// Radial spectral profile `ρ ↦ p(ρ)` with known support.
pub trait RadialProfile: Send + Sync {
    fn value(&self, rho: f64) -> f64;
    /// Closed interval outside which the profile vanishes.
    fn support(&self) -> (f64, f64);
}

/// Sampled complex function on a grid, on one side of the transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: GridSpec,
    side: Side,
    data: Vec<Complex64>,
    band: Option<Band>,
}

impl Field {
    pub fn new(grid: GridSpec, side: Side, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "data length {} does not match grid size {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            side,
            data,
            band: None,
        })
    }

    pub fn zeros(grid: GridSpec, side: Side) -> Self {
        Self {
            grid,
            side,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
            band: None,
        }
    }

    /// Samples `f` at every physical grid point.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let d = grid.dim();
        let data = (0..grid.len()).map(|i| f(&grid.point(i)[..d])).collect();
        Self {
            grid,
            side: Side::Physical,
            data,
            band: None,
        }
    }

    /// Samples `f` at every lattice frequency.
    pub fn from_fn_frequency<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let d = grid.dim();
        let data = (0..grid.len()).map(|i| f(&grid.freq_point(i)[..d])).collect();
        Self {
            grid,
            side: Side::Frequency,
            data,
            band: None,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn band(&self) -> Option<Band> {
        self.band
    }

    pub fn with_band(mut self, band: Option<Band>) -> Self {
        self.band = band;
        self
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn require_side(&self, side: Side) -> Result<()> {
        if self.side != side {
            return Err(Error::WrongSide { expected: side });
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `a·self + b·other`; bands merge to their hull.
    pub fn combine(&self, a: Complex64, other: &Field, b: Complex64) -> Result<Field> {
        self.same_grid(other)?;
        if self.side != other.side {
            return Err(Error::WrongSide { expected: self.side });
        }
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        let band = match (self.band, other.band) {
            (Some(p), Some(q)) => Some(Band::new(p.min.min(q.min), p.max.max(q.max))),
            _ => None,
        };
        Ok(Field {
            grid: self.grid,
            side: self.side,
            data,
            band,
        })
    }

    /// Pointwise product of two physical fields (no band certificate).
    pub fn product(&self, other: &Field) -> Result<Field> {
        self.same_grid(other)?;
        self.require_side(Side::Physical)?;
        other.require_side(Side::Physical)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x * y).collect();
        Ok(Field {
            grid: self.grid,
            side: Side::Physical,
            data,
            band: None,
        })
    }

    /// Relative ℓ² spectral mass outside `band`, the quantity the band
    /// certificate bounds.
    pub fn spectral_mass_outside(&self, band: &Band) -> Result<f64> {
        let spec = match self.side {
            Side::Physical => fourier_transform(self)?,
            Side::Frequency => self.clone(),
        };
        let (mut inside, mut outside) = (0.0, 0.0);
        for (i, v) in spec.data.iter().enumerate() {
            let p = self.grid.freq_point(i);
            let rho = p[0].hypot(p[1]);
            // Tolerate one lattice spacing of slack at the annulus edges.
            let slack = 1e-9 * (1.0 + band.max);
            if rho >= band.min - slack && rho <= band.max + slack {
                inside += v.norm_sqr();
            } else {
                outside += v.norm_sqr();
            }
        }
        let total = inside + outside;
        Ok(if total == 0.0 { 0.0 } else { (outside / total).sqrt() })
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalised in-place DFT over all axes of a row-major `N^dim` array.
pub fn dft_in_place(data: &mut [Complex64], samples: usize, dim: usize, inverse: bool) {
    let fft = plan(samples, inverse);
    // Innermost axis is contiguous.
    fft.process(data);
    if dim == 1 {
        return;
    }
    // Remaining axes: gather lines through a buffer.
    let mut line = vec![Complex64::new(0.0, 0.0); samples];
    let mut stride = samples;
    for _ in 1..dim {
        let block = stride * samples;
        for start in 0..data.len() / block {
            for offset in 0..stride {
                let base = start * block + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
        stride *= samples;
    }
}

/// `f̂` on the lattice frequencies; the band certificate is carried over.
pub fn fourier_transform(f: &Field) -> Result<Field> {
    f.require_side(Side::Physical)?;
    f.check_finite()?;
    let g = f.grid;
    let mut data = f.data.clone();
    dft_in_place(&mut data, g.samples(), g.dim(), false);
    let w = g.cell_volume();
    data.iter_mut().for_each(|v| *v *= w);
    Ok(Field {
        grid: g,
        side: Side::Frequency,
        data,
        band: f.band,
    })
}

/// `F^∨` at the physical grid points.
pub fn inverse_fourier_transform(spec: &Field) -> Result<Field> {
    spec.require_side(Side::Frequency)?;
    spec.check_finite()?;
    let g = spec.grid;
    let mut data = spec.data.clone();
    dft_in_place(&mut data, g.samples(), g.dim(), true);
    let w = (g.dxi() / (2.0 * PI)).powi(g.dim() as i32);
    data.iter_mut().for_each(|v| *v *= w);
    Ok(Field {
        grid: g,
        side: Side::Physical,
        data,
        band: spec.band,
    })
}

/// `(p(|ξ|))^∨` with a band certificate taken from the profile support.
pub fn synthesize_radial(profile: &dyn RadialProfile, grid: GridSpec) -> Result<Field> {
    let (lo, hi) = profile.support();
    if hi > grid.guard() {
        return Err(Error::Aliasing {
            support: hi,
            guard: grid.guard(),
        });
    }
    let spec = Field::from_fn_frequency(grid, |xi| {
        let rho = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        Complex64::new(profile.value(rho), 0.0)
    })
    .with_band(Some(Band::new(lo, hi)));
    inverse_fourier_transform(&spec)
}
