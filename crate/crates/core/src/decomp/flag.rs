//! Split of `σ` into the regions `|ξ| ≫ |η|`, `|ξ| ≈ |η|`, `|ξ| ≪ |η|`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{BilinearSymbol, LinearSymbol, SeparableSum};
use crate::symbols::{Cutoff, CutoffKind, DyadicPartition};

/// `σ = σ_I + σ_II + σ_III` on `|ξ|, |η| ≤ 2^J`, where
///
/// * `σ_I = σ Σ_{1≤j≤J} ψ_j(ξ) φ(2^{-j+1}η)` (first frequency dominates),
/// * `σ_II = σ Σ_{0≤j≤J} ψ_j(ξ) ψ_j(η)`,
/// * `σ_III = σ Σ_{1≤k≤J} φ(2^{-k+1}ξ) ψ_k(η)`.
#[derive(Clone, Debug)]
pub struct FlagSplit {
    pub first: BilinearSymbol,
    pub diagonal: BilinearSymbol,
    pub second: BilinearSymbol,
    pub j_max: i32,
}

impl FlagSplit {
    /// Radius up to which the three pieces add back to `σ`.
    pub fn resolvable_radius(&self) -> f64 {
        2f64.powi(self.j_max)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[derive(Clone, Copy)]
enum Region {
    First,
    Diagonal,
    Second,
}

fn weight(p: &DyadicPartition, region: Region, j_max: i32, a: f64, b: f64) -> f64 {
    match region {
        Region::First => (1..=j_max)
            .map(|j| p.piece(j, a) * p.phi_low(b * 2f64.powi(1 - j)))
            .sum(),
        Region::Diagonal => (0..=j_max).map(|j| p.piece(j, a) * p.piece(j, b)).sum(),
        Region::Second => (1..=j_max)
            .map(|k| p.phi_low(a * 2f64.powi(1 - k)) * p.piece(k, b))
            .sum(),
    }
}

fn piece_factor(j: i32) -> LinearSymbol {
    if j == 0 {
        LinearSymbol::radial(Cutoff::new(CutoffKind::PhiLow, 0))
    } else {
        LinearSymbol::radial(Cutoff::new(CutoffKind::Psi, j))
    }
}

fn low_factor(j: i32) -> LinearSymbol {
    LinearSymbol::radial(Cutoff::new(CutoffKind::PhiLow, j))
}

/// Keeps separability: every term `c u ⊗ v` becomes a sum over scales
/// of `c (u·a_j) ⊗ (v·b_j)`.
fn separable_piece(sum: &SeparableSum, region: Region, j_max: i32) -> SeparableSum {
    let pairs: Vec<(LinearSymbol, LinearSymbol)> = match region {
        Region::First => (1..=j_max).map(|j| (piece_factor(j), low_factor(j - 1))).collect(),
        Region::Diagonal => (0..=j_max).map(|j| (piece_factor(j), piece_factor(j))).collect(),
        Region::Second => (1..=j_max).map(|k| (low_factor(k - 1), piece_factor(k))).collect(),
    };
    let mut out = SeparableSum {
        truncation_bound: sum.truncation_bound,
        ..Default::default()
    };
    for (a, b) in &pairs {
        let left0 = out.left.len();
        let right0 = out.right.len();
        out.left.extend(sum.left.iter().map(|u| u.times(a)));
        out.right.extend(sum.right.iter().map(|v| v.times(b)));
        out.terms
            .extend(sum.terms.iter().map(|&(i, k, c)| (left0 + i, right0 + k, c)));
    }
    out
}

/// Flag split of `σ` over the dyadic scales `0..=j_max`.
pub fn flag_split(sigma: &BilinearSymbol, partition: &DyadicPartition, j_max: i32) -> Result<FlagSplit> {
    if !(1..=60).contains(&j_max) {
        return Err(Error::Precondition(format!(
            "dyadic range 0..={j_max} is not resolvable"
        )));
    }
    let build = |region: Region| -> BilinearSymbol {
        if let Some(sum) = sigma.separable_sum() {
            return BilinearSymbol::from_sum(separable_piece(sum, region, j_max));
        }
        let s = sigma.clone();
        let p = *partition;
        BilinearSymbol::dense(Arc::new(move |xi: &[f64], eta: &[f64]| -> Complex64 {
            let w = weight(&p, region, j_max, norm(xi), norm(eta));
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                s.eval(xi, eta) * w
            }
        }))
    };
    Ok(FlagSplit {
        first: build(Region::First),
        diagonal: build(Region::Diagonal),
        second: build(Region::Second),
        j_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::make_dyadic_partition;

    #[test]
    fn constant_symbol_recombines() {
        let one = BilinearSymbol::constant(Complex64::new(1.0, 0.0));
        let s = flag_split(&one, &make_dyadic_partition(), 6).unwrap();
        for (a, b) in [(0.0, 0.0), (3.0, 0.1), (0.4, 17.0), (40.0, 63.0), (64.0, 64.0)] {
            let (x, y) = ([a, 0.0], [0.0, b]);
            let t = s.first.eval(&x, &y) + s.diagonal.eval(&x, &y) + s.second.eval(&x, &y);
            assert!((t - 1.0).norm() < 1e-12, "({a},{b}) -> {t}");
        }
        assert!(flag_split(&one, &make_dyadic_partition(), 0).is_err());
    }
}
