//! `L^p`, dyadic BMO and an `H¹` maximal surrogate on grid fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{fourier_transform, inverse_fourier_transform, Field, GridSpec, Side};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Space {
    Lp(f64),
    Bmo { max_depth: usize },
    H1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub space: Space,
    pub grid: GridSpec,
    /// Share of the mass carried by the outer sixteenth of the box; large
    /// values mean periodisation may distort the result.
    pub boundary_mass: f64,
    /// Set when the functional is only equivalent to the true norm.
    pub surrogate: bool,
}

fn boundary_mass(f: &Field, weight: impl Fn(Complex64) -> f64) -> f64 {
    let grid = f.grid();
    let edge = 7.0 * grid.length() / 16.0;
    let d = grid.dim();
    let (mut outer, mut total) = (0.0, 0.0);
    for (i, v) in f.data().iter().enumerate() {
        let w = weight(*v);
        total += w;
        if grid.point(i)[..d].iter().any(|c| c.abs() > edge) {
            outer += w;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// `(Σ |f|^p dx^n)^{1/p}`; `p = ∞` gives the sup norm and `p < 1` the
/// quasi-norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<NormReport> {
    if !(p > 0.0) {
        return Err(Error::Precondition(format!("exponent p = {p} must be positive")));
    }
    f.require_side(Side::Physical)?;
    f.check_finite()?;
    let value = if p.is_infinite() {
        f.data().iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        let s: f64 = f.data().iter().map(|v| v.norm().powf(p)).sum();
        (s * f.grid().cell_volume()).powf(1.0 / p)
    };
    let bm = if p.is_infinite() {
        boundary_mass(f, |v| v.norm_sqr())
    } else {
        boundary_mass(f, |v| v.norm().powf(p))
    };
    Ok(NormReport {
        value,
        space: Space::Lp(p),
        grid: *f.grid(),
        boundary_mass: bm,
        surrogate: false,
    })
}

/// Default BMO depth: cubes of at least four samples per side.
pub fn default_bmo_depth(grid: &GridSpec) -> usize {
    (grid.samples().trailing_zeros() as usize).saturating_sub(2)
}

/// Sup over dyadic cubes of the box, up to `max_depth` halvings, of the
/// mean oscillation `|Q|^{-1} ∫_Q |f − f_Q|`.
pub fn bmo_norm(f: &Field, max_depth: usize) -> Result<NormReport> {
    f.require_side(Side::Physical)?;
    f.check_finite()?;
    let grid = *f.grid();
    let n = grid.samples();
    let log_n = n.trailing_zeros() as usize;
    if max_depth > log_n {
        return Err(Error::Precondition(format!(
            "BMO depth {max_depth} exceeds log2 N = {log_n}"
        )));
    }
    // Reorder so that array position increases with the coordinate.
    let half = n / 2;
    let d = grid.dim();
    let centered: Vec<Complex64> = if d == 1 {
        (0..n).map(|p| f.data()[(p + half) % n]).collect()
    } else {
        (0..n * n)
            .map(|p| {
                let (a, b) = (p / n, p % n);
                f.data()[((a + half) % n) * n + (b + half) % n]
            })
            .collect()
    };
    let mut best = 0.0f64;
    for depth in 0..=max_depth {
        let side = n >> depth;
        let cubes = 1usize << depth;
        let cube_count = cubes.pow(d as u32);
        for c in 0..cube_count {
            let (c0, c1) = if d == 1 { (c, 0) } else { (c / cubes, c % cubes) };
            let idx = |a: usize, b: usize| -> usize {
                if d == 1 {
                    c0 * side + a
                } else {
                    (c0 * side + a) * n + c1 * side + b
                }
            };
            let rows = if d == 1 { 1 } else { side };
            let count = (side * rows) as f64;
            let mut mean = Complex64::new(0.0, 0.0);
            for b in 0..rows {
                for a in 0..side {
                    let (x, y) = if d == 1 { (a, 0) } else { (b, a) };
                    mean += centered[idx(x, y)];
                }
            }
            mean /= count;
            let mut osc = 0.0;
            for b in 0..rows {
                for a in 0..side {
                    let (x, y) = if d == 1 { (a, 0) } else { (b, a) };
                    osc += (centered[idx(x, y)] - mean).norm();
                }
            }
            best = best.max(osc / count);
        }
    }
    Ok(NormReport {
        value: best,
        space: Space::Bmo { max_depth },
        grid,
        boundary_mass: boundary_mass(f, |v| v.norm_sqr()),
        surrogate: true,
    })
}

/// `L¹` norm of `sup_s |Φ_s * f|` with `Φ` the unit Gaussian and `s`
/// ranging over dyadic multiples of `dx` up to `L/4`.
pub fn h1_norm(f: &Field) -> Result<NormReport> {
    f.require_side(Side::Physical)?;
    let grid = *f.grid();
    let spec = fourier_transform(f)?;
    let d = grid.dim();
    let mut maximal = vec![0.0f64; grid.len()];
    let mut s = grid.dx();
    while s <= grid.length() / 4.0 {
        let mut smoothed = spec.clone();
        smoothed.data_mut().iter_mut().enumerate().for_each(|(i, v)| {
            let xi = grid.freq_point(i);
            let r2: f64 = xi[..d].iter().map(|c| c * c).sum();
            *v *= (-0.5 * s * s * r2).exp();
        });
        let back = inverse_fourier_transform(&smoothed)?;
        maximal
            .iter_mut()
            .zip(back.data())
            .for_each(|(m, v)| *m = m.max(v.norm()));
        s *= 2.0;
    }
    let value = maximal.iter().sum::<f64>() * grid.cell_volume();
    Ok(NormReport {
        value,
        space: Space::H1,
        grid,
        boundary_mass: boundary_mass(f, |v| v.norm()),
        surrogate: true,
    })
}

/// `1/r = 1/p + 1/q`, with `∞` mapped to zero.
pub fn target_exponent(p: f64, q: f64) -> f64 {
    let inv = 1.0 / p + 1.0 / q;
    if inv == 0.0 {
        f64::INFINITY
    } else {
        1.0 / inv
    }
}

/// Norm used on the inputs when the exponent is infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfInputNorm {
    Sup,
    Bmo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioConfig {
    pub input_inf: InfInputNorm,
    /// BMO depth; `None` uses [`default_bmo_depth`].
    pub bmo_depth: Option<usize>,
}

impl Default for RatioConfig {
    fn default() -> Self {
        Self {
            input_inf: InfInputNorm::Sup,
            bmo_depth: None,
        }
    }
}

/// Input functional `F(s)`: `L^s`, with `s = ∞` per the configuration.
pub fn input_norm(f: &Field, s: f64, cfg: &RatioConfig) -> Result<f64> {
    if s.is_infinite() && cfg.input_inf == InfInputNorm::Bmo {
        let depth = cfg.bmo_depth.unwrap_or_else(|| default_bmo_depth(f.grid()));
        return Ok(bmo_norm(f, depth)?.value);
    }
    Ok(lp_norm(f, s)?.value)
}

/// Target functional `X_r`: `L^r` for finite `r`, BMO for `r = ∞`.
pub fn target_norm(out: &Field, r: f64, cfg: &RatioConfig) -> Result<f64> {
    if r.is_infinite() {
        let depth = cfg.bmo_depth.unwrap_or_else(|| default_bmo_depth(out.grid()));
        return Ok(bmo_norm(out, depth)?.value);
    }
    Ok(lp_norm(out, r)?.value)
}

/// `‖out‖_{X_r} / (‖f‖_{F(p)} ‖g‖_{F(q)})` with the default configuration.
pub fn operator_ratio(out: &Field, f: &Field, g: &Field, p: f64, q: f64, r: f64) -> Result<f64> {
    operator_ratio_with(out, f, g, p, q, r, &RatioConfig::default())
}

pub fn operator_ratio_with(
    out: &Field,
    f: &Field,
    g: &Field,
    p: f64,
    q: f64,
    r: f64,
    cfg: &RatioConfig,
) -> Result<f64> {
    let expect = target_exponent(p, q);
    let consistent = if expect.is_infinite() || r.is_infinite() {
        expect.is_infinite() && r.is_infinite()
    } else {
        (1.0 / expect - 1.0 / r).abs() <= 1e-12
    };
    if !consistent {
        return Err(Error::Precondition(format!(
            "exponents violate 1/p + 1/q = 1/r: p={p}, q={q}, r={r}"
        )));
    }
    let den = input_norm(f, p, cfg)? * input_norm(g, q, cfg)?;
    if !(den > 0.0) {
        return Err(Error::Numerical("zero denominator in operator ratio".into()));
    }
    Ok(target_norm(out, r, cfg)? / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_grid;

    #[test]
    fn constant_has_zero_oscillation() {
        let g = make_grid(2, 32, 4.0).unwrap();
        let f = Field::from_fn(g, |_| Complex64::new(2.5, -1.0));
        assert!(bmo_norm(&f, 5).unwrap().value < 1e-14);
        assert!(bmo_norm(&f, 6).is_err());
    }

    #[test]
    fn lp_of_box_indicator() {
        let g = make_grid(1, 1024, 8.0).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new(if x[0].abs() < 1.0 { 1.0 } else { 0.0 }, 0.0));
        for p in [0.5, 1.0, 2.0, 3.0] {
            let v = lp_norm(&f, p).unwrap().value;
            assert!((v / 2f64.powf(1.0 / p) - 1.0).abs() < 1e-2, "p={p} v={v}");
        }
        assert_eq!(lp_norm(&f, f64::INFINITY).unwrap().value, 1.0);
        assert!(lp_norm(&f, 0.0).is_err());
    }

    #[test]
    fn exponent_rules() {
        assert_eq!(target_exponent(1.0, 1.0), 0.5);
        assert!(target_exponent(f64::INFINITY, f64::INFINITY).is_infinite());
        assert_eq!(target_exponent(1.0, f64::INFINITY), 1.0);
    }
}
