//! Fourier-series expansion of dyadic blocks of a bilinear symbol into
//! separable terms.
//!
//! A block `σ(ξ, η) P_j(ξ) P_k(η)` is rescaled to the cell `[-π, π)^{2n}`,
//! where `σ(2^j ξ, 2^k η) P̃(ξ) P̃(η)` is smooth and compactly supported.
//! Its Fourier coefficients `c^{(a,b)}` give
//!
//! `σ P_j ⊗ P_k = Σ c^{(a,b)} (P_j e^{i a·2^{-j}ξ}) ⊗ (P_k e^{i b·2^{-k}η})`
//!
//! because the enlarged bump `P̃` is 1 on the support of `P`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{dft_in_place, RadialProfile};
use crate::operators::{BilinearSymbol, LinearSymbol, SeparableSum};
use crate::symbols::{Cutoff, CutoffKind};

/// One side of a block: an annulus `ψ(2^{-scale}·)` or a ball
/// `φ(2^{-scale}·)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockFactor {
    pub scale: i32,
    pub ball: bool,
}

impl BlockFactor {
    pub fn annulus(scale: i32) -> Self {
        Self { scale, ball: false }
    }

    pub fn ball(scale: i32) -> Self {
        Self { scale, ball: true }
    }

    /// The partition piece with index `j`: a ball at `j ≤ 0`.
    pub fn piece(j: i32) -> Self {
        if j <= 0 {
            Self::ball(0)
        } else {
            Self::annulus(j)
        }
    }

    /// Partition profile in unscaled frequency.
    pub fn cutoff(&self) -> Cutoff {
        let kind = if self.ball { CutoffKind::PhiLow } else { CutoffKind::Psi };
        Cutoff::new(kind, self.scale)
    }

    /// Enlarged bump in the rescaled variable, 1 on the piece's support.
    pub fn enlarged(&self, rho: f64) -> f64 {
        if self.ball {
            CutoffKind::PhiTilde.eval(rho)
        } else {
            CutoffKind::Theta.eval(rho)
        }
    }

    fn factor(&self) -> f64 {
        2f64.powi(self.scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionOptions {
    /// Retained modes satisfy `|a|_∞, |b|_∞ ≤ radius`.
    pub radius: usize,
    /// Cell samples per axis; defaults to 256 for `n = 1` and 64 for `n = 2`.
    pub cell_samples: Option<usize>,
    /// Coefficients below `floor · max|c|` are treated as round-off.
    pub floor: f64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            radius: 8,
            cell_samples: None,
            floor: 1e-13,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub c: Complex64,
}

/// Retained coefficients of one block with their error budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableExpansion {
    pub n: usize,
    pub left: BlockFactor,
    pub right: BlockFactor,
    pub radius: usize,
    pub cell_samples: usize,
    pub terms: Vec<ExpansionTerm>,
    /// `Σ |c|` over computed modes that were dropped.
    pub discarded_mass: f64,
    /// Mass in the outer shell of the cell lattice, a proxy for aliasing.
    pub alias_mass: f64,
    /// Sup-norm bound on `block − retained sum`.
    pub tail_bound: f64,
    pub max_coefficient: f64,
    /// Fitted `s` in `max_{|a| ≥ r} |c| ~ (1 + r)^{-s}`, per side.
    pub decay_a: f64,
    pub decay_b: f64,
    /// `(L, C)`: smallest `C` with `|c| ≤ C (1+|a|)^{-L} (1+|b|)^{-L}` on
    /// the retained modes.
    pub envelope: Vec<(u32, f64)>,
}

fn cell_point(p: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * p as f64 / m as f64
}

fn wrapped(k: usize, m: usize) -> i64 {
    if k >= m / 2 {
        k as i64 - m as i64
    } else {
        k as i64
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn unflatten(mut flat: usize, m: usize, dims: usize) -> Vec<usize> {
    let mut idx = vec![0; dims];
    for slot in idx.iter_mut().rev() {
        *slot = flat % m;
        flat /= m;
    }
    idx
}

/// Fourier coefficients on `[-π, π)^dims` of samples taken at
/// `-π + 2πp/m`, indexed by wrapped modes in row-major order.
fn cell_coefficients(mut data: Vec<Complex64>, m: usize, dims: usize) -> Vec<Complex64> {
    dft_in_place(&mut data, m, dims, false);
    let scale = (m as f64).powi(dims as i32).recip();
    data.iter_mut().enumerate().for_each(|(i, v)| {
        let mut flat = i;
        let mut parity = 0i64;
        for _ in 0..dims {
            parity += wrapped(flat % m, m);
            flat /= m;
        }
        let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        *v *= scale * sign;
    });
    data
}

/// Coefficients of `u(2^s ξ) P̃(ξ)` for a single factor, indexed like
/// the cell lattice in `n` dimensions. Used to check factorisation.
pub fn factor_coefficients<F>(u: F, factor: BlockFactor, n: usize, cell_samples: usize) -> Vec<(Vec<i64>, Complex64)>
where
    F: Fn(&[f64]) -> Complex64,
{
    let m = cell_samples;
    let s = factor.factor();
    let data: Vec<Complex64> = (0..m.pow(n as u32))
        .map(|i| {
            let x: Vec<f64> = unflatten(i, m, n).iter().map(|&p| cell_point(p, m)).collect();
            let w = factor.enlarged(norm(&x));
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let y: Vec<f64> = x.iter().map(|v| v * s).collect();
            u(&y) * w
        })
        .collect();
    cell_coefficients(data, m, n)
        .into_iter()
        .enumerate()
        .map(|(i, c)| (unflatten(i, m, n).iter().map(|&k| wrapped(k, m)).collect(), c))
        .collect()
}

fn fit_decay(majorant: &[f64], radius: usize, floor: f64, m: usize) -> f64 {
    let top = majorant[0];
    let hi_cap = 3 * m / 8;
    let mut hi = 1;
    while hi < hi_cap && majorant[hi + 1] > floor * top {
        hi += 1;
    }
    let lo = (2 * radius).min(hi / 2).max(1);
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&r| majorant[r] > 0.0)
        .map(|r| ((1.0 + r as f64).ln(), majorant[r].ln()))
        .collect();
    if pts.len() < 3 {
        // Decays to round-off before a fit window opens.
        return f64::MAX;
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / k, sy / k);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    -sxy / sxx
}

/// `E(r) = max_{r' ≥ r} shell(r')`.
fn suffix_max(mut shell: Vec<f64>) -> Vec<f64> {
    for r in (0..shell.len() - 1).rev() {
        shell[r] = shell[r].max(shell[r + 1]);
    }
    shell
}

/// Expands the block `σ P_left ⊗ P_right` of an `n`-dimensional bilinear
/// symbol.
pub fn fourier_symbol_expansion(
    sigma: &BilinearSymbol,
    n: usize,
    left: BlockFactor,
    right: BlockFactor,
    opts: &ExpansionOptions,
) -> Result<SeparableExpansion> {
    if !(1..=2).contains(&n) {
        return Err(Error::Precondition(format!("expansion supports n = 1, 2, got {n}")));
    }
    let m = opts.cell_samples.unwrap_or(if n == 1 { 256 } else { 64 });
    if m < 4 * opts.radius + 4 || m % 2 != 0 {
        return Err(Error::Precondition(format!(
            "cell lattice {m} is too coarse for radius {}",
            opts.radius
        )));
    }
    let dims = 2 * n;
    let (sl, sr) = (left.factor(), right.factor());
    let total = m.pow(dims as u32);
    let data: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|i| {
            let x: Vec<f64> = unflatten(i, m, dims).iter().map(|&p| cell_point(p, m)).collect();
            let w = left.enlarged(norm(&x[..n])) * right.enlarged(norm(&x[n..]));
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let xi: Vec<f64> = x[..n].iter().map(|v| v * sl).collect();
            let eta: Vec<f64> = x[n..].iter().map(|v| v * sr).collect();
            sigma.eval(&xi, &eta) * w
        })
        .collect();
    if let Some(i) = data.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let coeffs = cell_coefficients(data, m, dims);
    let half = m / 2;
    let r = opts.radius as i64;
    let outer = (3 * m / 8) as i64;
    let mut terms = Vec::new();
    let (mut discarded, mut alias, mut top) = (0.0, 0.0, 0.0f64);
    let mut shell_a = vec![0.0f64; half + 1];
    let mut shell_b = vec![0.0f64; half + 1];
    let mut k = vec![0i64; dims];
    for (i, c) in coeffs.iter().enumerate() {
        let mut flat = i;
        for slot in k.iter_mut().rev() {
            *slot = wrapped(flat % m, m);
            flat /= m;
        }
        let ra = k[..n].iter().map(|v| v.abs()).max().unwrap_or(0);
        let rb = k[n..].iter().map(|v| v.abs()).max().unwrap_or(0);
        let mag = c.norm();
        top = top.max(mag);
        shell_a[ra as usize] = shell_a[ra as usize].max(mag);
        shell_b[rb as usize] = shell_b[rb as usize].max(mag);
        if ra.max(rb) >= outer {
            alias += mag;
        }
        if ra <= r && rb <= r {
            terms.push(ExpansionTerm {
                a: k[..n].to_vec(),
                b: k[n..].to_vec(),
                c: *c,
            });
        } else {
            discarded += mag;
        }
    }
    let decay_a = fit_decay(&suffix_max(shell_a), opts.radius, opts.floor, m);
    let decay_b = fit_decay(&suffix_max(shell_b), opts.radius, opts.floor, m);
    if decay_a < 1.0 || decay_b < 1.0 {
        return Err(Error::Numerical(format!(
            "coefficients decay like (1+|a|)^-{decay_a:.2}, (1+|b|)^-{decay_b:.2}: symbol too rough for expansion"
        )));
    }
    let weight = |v: &[i64]| 1.0 + v.iter().map(|x| x.abs()).max().unwrap_or(0) as f64;
    let envelope = (1..=4u32)
        .map(|l| {
            let c = terms
                .iter()
                .map(|t| t.c.norm() * (weight(&t.a) * weight(&t.b)).powi(l as i32))
                .fold(0.0, f64::max);
            (l, c)
        })
        .collect();
    Ok(SeparableExpansion {
        n,
        left,
        right,
        radius: opts.radius,
        cell_samples: m,
        terms,
        discarded_mass: discarded,
        alias_mass: alias,
        tail_bound: discarded + 2.0 * alias,
        max_coefficient: top,
        decay_a,
        decay_b,
        envelope,
    })
}

fn plane_wave(k: &[i64], x: &[f64]) -> Complex64 {
    let t: f64 = k.iter().zip(x).map(|(a, v)| *a as f64 * v).sum();
    Complex64::from_polar(1.0, t)
}

impl SeparableExpansion {
    /// Retained sum at a cell point.
    pub fn eval_cell(&self, x: &[f64], y: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.c * plane_wave(&t.a, x) * plane_wave(&t.b, y))
            .sum()
    }

    /// `σ(2^j x, 2^k y) P̃(x) P̃(y)`, the function being expanded.
    pub fn target_cell(&self, sigma: &BilinearSymbol, x: &[f64], y: &[f64]) -> Complex64 {
        let w = self.left.enlarged(norm(x)) * self.right.enlarged(norm(y));
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let (sl, sr) = (self.left.factor(), self.right.factor());
        let xi: Vec<f64> = x.iter().map(|v| v * sl).collect();
        let eta: Vec<f64> = y.iter().map(|v| v * sr).collect();
        sigma.eval(&xi, &eta) * w
    }

    /// `σ P_left ⊗ P_right`, evaluated directly.
    pub fn block_symbol(&self, sigma: &BilinearSymbol, xi: &[f64], eta: &[f64]) -> Complex64 {
        let w = self.left.cutoff().value(norm(xi)) * self.right.cutoff().value(norm(eta));
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        sigma.eval(xi, eta) * w
    }

    /// The block as a separable sum over retained modes.
    pub fn to_separable_sum(&self) -> SeparableSum {
        let mut tables = FactorTables::default();
        let mut out = SeparableSum {
            truncation_bound: self.tail_bound,
            ..Default::default()
        };
        self.append_to(&mut tables, &mut out);
        out.left = tables.left_symbols;
        out.right = tables.right_symbols;
        out
    }

    fn append_to(&self, tables: &mut FactorTables, out: &mut SeparableSum) {
        for t in &self.terms {
            let i = tables.index(true, self.left, &t.a);
            let k = tables.index(false, self.right, &t.b);
            out.terms.push((i, k, t.c));
        }
    }
}

fn mode_factor(factor: BlockFactor, k: Vec<i64>) -> LinearSymbol {
    let cutoff = factor.cutoff();
    let s = factor.factor().recip();
    let (lo, hi) = cutoff.support();
    LinearSymbol::new(move |xi| {
        let w = cutoff.value(norm(xi));
        if w == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let t: f64 = k.iter().zip(xi).map(|(a, v)| *a as f64 * v * s).sum();
        Complex64::from_polar(w, t)
    })
    .with_support(crate::lattice::Band::new(lo, hi))
}

/// Factor symbols shared across blocks, keyed by `(factor, mode)`.
#[derive(Default)]
struct FactorTables {
    left: HashMap<(BlockFactor, Vec<i64>), usize>,
    right: HashMap<(BlockFactor, Vec<i64>), usize>,
    left_symbols: Vec<LinearSymbol>,
    right_symbols: Vec<LinearSymbol>,
}

impl FactorTables {
    fn index(&mut self, is_left: bool, factor: BlockFactor, k: &[i64]) -> usize {
        let (map, symbols) = if is_left {
            (&mut self.left, &mut self.left_symbols)
        } else {
            (&mut self.right, &mut self.right_symbols)
        };
        *map.entry((factor, k.to_vec())).or_insert_with(|| {
            symbols.push(mode_factor(factor, k.to_vec()));
            symbols.len() - 1
        })
    }
}

/// All blocks `0 ≤ j, k ≤ J`, summed into one separable representation
/// that agrees with `σ` on `|ξ|, |η| ≤ 2^J` up to the summed tail bounds.
pub fn expand_symbol(
    sigma: &BilinearSymbol,
    n: usize,
    j_max: i32,
    opts: &ExpansionOptions,
) -> Result<(SeparableSum, Vec<SeparableExpansion>)> {
    if !(0..=30).contains(&j_max) {
        return Err(Error::Precondition(format!(
            "dyadic range 0..={j_max} is not resolvable"
        )));
    }
    let blocks: Vec<(i32, i32)> = (0..=j_max).flat_map(|j| (0..=j_max).map(move |k| (j, k))).collect();
    let sigma = Arc::new(sigma.clone());
    let expansions = blocks
        .par_iter()
        .map(|&(j, k)| fourier_symbol_expansion(&sigma, n, BlockFactor::piece(j), BlockFactor::piece(k), opts))
        .collect::<Result<Vec<_>>>()?;
    let mut tables = FactorTables::default();
    let mut sum = SeparableSum::default();
    for e in &expansions {
        e.append_to(&mut tables, &mut sum);
        sum.truncation_bound += e.tail_bound;
    }
    sum.left = tables.left_symbols;
    sum.right = tables.right_symbols;
    Ok((sum, expansions))
}
