//! The test functions of the lower-bound experiments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dft_in_place, inverse_fourier_transform, Band, Field, GridSpec};
use crate::symbols::CutoffKind;

/// `f_j = (ψ(2^{-j}|ξ|))^∨`, its wave-shifted companion
/// `f̃_j = (e^{-i|ξ|} ψ(2^{-j}|ξ|))^∨`, or a lattice superposition
/// `g = Σ_ℓ α_ℓ f_j(· − δ′2^{-j}ℓ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    FJ,
    FTildeJ,
    GLattice {
        alpha: Vec<(Vec<i64>, Complex64)>,
        delta_prime: f64,
    },
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Samples `kind` at scale `j`. Lattice translates are applied in
/// frequency, so the result is exact on the periodic box.
pub fn make_test_function(kind: &TestFunction, j: i32, grid: GridSpec) -> Result<Field> {
    let scale = 2f64.powi(j);
    if 2.0 * scale > grid.guard() {
        return Err(Error::Aliasing {
            support: 2.0 * scale,
            guard: grid.guard(),
        });
    }
    let band = Some(Band::new(0.5 * scale, 2.0 * scale));
    let d = grid.dim();
    let mut spec = Field::from_fn_frequency(grid, |xi| {
        let rho = norm(xi);
        let w = CutoffKind::Psi.eval(rho / scale);
        match kind {
            TestFunction::FTildeJ => Complex64::from_polar(w, -rho),
            _ => Complex64::new(w, 0.0),
        }
    });
    if let TestFunction::GLattice { alpha, delta_prime } = kind {
        let step = delta_prime * 2f64.powi(-j);
        let half = 0.5 * grid.length();
        for (l, _) in alpha {
            if l.len() != d || l.iter().any(|c| (*c as f64 * step).abs() >= half) {
                return Err(Error::Precondition(format!("lattice point {l:?} lies outside the box")));
            }
        }
        let comb = lattice_comb(alpha, step, grid)?;
        spec.data_mut().iter_mut().zip(&comb).for_each(|(s, c)| *s *= c);
    }
    Ok(inverse_fourier_transform(&spec)?.with_band(band))
}

/// `Σ_ℓ α_ℓ e^{-iξ·δ′2^{-j}ℓ}` at every lattice frequency. Grid-aligned
/// lattices go through one FFT of a point comb; others are summed.
fn lattice_comb(alpha: &[(Vec<i64>, Complex64)], step: f64, grid: GridSpec) -> Result<Vec<Complex64>> {
    let ratio = step / grid.dx();
    let n = grid.samples() as i64;
    let d = grid.dim();
    if (ratio - ratio.round()).abs() < 1e-9 && ratio.round() >= 1.0 {
        let k = ratio.round() as i64;
        let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (l, a) in alpha {
            let idx: Vec<usize> = l.iter().map(|c| (c * k).rem_euclid(n) as usize).collect();
            let flat = if d == 1 {
                idx[0]
            } else {
                idx[0] * grid.samples() + idx[1]
            };
            data[flat] += a;
        }
        dft_in_place(&mut data, grid.samples(), d, false);
        return Ok(data);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        let xi = grid.freq_point(i);
        *slot = alpha
            .iter()
            .map(|(l, a)| {
                let t: f64 = l.iter().zip(&xi[..d]).map(|(c, x)| *c as f64 * step * x).sum();
                a * Complex64::from_polar(1.0, -t)
            })
            .sum();
    }
    Ok(out)
}
