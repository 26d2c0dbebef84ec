//! Upper-bound consistency sweeps over the `σ_j` family.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::cases::{aligned_grid, pairing_driver};
use super::fit::fit_exponent;
use super::record::{CaseOutcome, Expectation, ExperimentRecord};
use super::testfn::{make_test_function, TestFunction};
use crate::error::{Error, Result};
use crate::lattice::{inverse_fourier_transform, Band, Field, GridSpec, Side};
use crate::norms::{operator_ratio_with, target_exponent, target_norm, InfInputNorm, RatioConfig};
use crate::operators::{wave_bilinear_apply, BilinearSymbol};
use crate::symbols::{CutoffKind, SymbolFamily, WavePhase};

/// Symbol families the sweep can drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    /// `2^{jm} θ(2^{-j}ξ) θ(2^{-j}η)`.
    SigmaJ,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    #[serde(with = "super::record::exponent")]
    pub p: f64,
    #[serde(with = "super::record::exponent")]
    pub q: f64,
    pub m: f64,
    pub j_min: i32,
    pub j_max: i32,
    pub family: SweepFamily,
    /// Random band-limited pairs added to the battery.
    pub random_pairs: usize,
    pub seed: u64,
    pub bmo_depth: Option<usize>,
}

impl SweepConfig {
    pub fn new(p: f64, q: f64, m: f64) -> Self {
        Self {
            n: 2,
            p,
            q,
            m,
            j_min: 4,
            j_max: 7,
            family: SweepFamily::SigmaJ,
            random_pairs: 2,
            seed: 0,
            bmo_depth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 2 {
            return Err(Error::Precondition(format!(
                "the sweep runs in dimension 2, got {}",
                self.n
            )));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v >= 1.0) {
                return Err(Error::Precondition(format!("exponent {name} = {v} must be at least 1")));
            }
        }
        if !self.m.is_finite() {
            return Err(Error::Precondition(format!("order m = {} is not finite", self.m)));
        }
        if self.j_min < 2 || self.j_max - self.j_min < 2 || self.j_max > 8 {
            return Err(Error::Precondition(format!(
                "scale window {}..={} must have at least 3 scales inside 2..=8",
                self.j_min, self.j_max
            )));
        }
        Ok(())
    }
}

fn inv(p: f64) -> f64 {
    1.0 / p
}

/// Order up to which boundedness is known for every symbol of the class.
pub fn m1(n: usize, p: f64, q: f64) -> f64 {
    let (a, b) = (inv(p), inv(q));
    let k = n as f64 - 1.0;
    if (a >= 0.5 && b >= 0.5) || (a <= 0.5 && b <= 0.5) {
        -k * ((a - 0.5).abs() + (b - 0.5).abs())
    } else if a > 0.5 {
        if a + b <= 1.0 {
            -(a - 0.5) - k * (0.5 - b)
        } else {
            -k * (a - 0.5) - (0.5 - b)
        }
    } else if a + b <= 1.0 {
        -k * (0.5 - a) - (b - 0.5)
    } else {
        -(0.5 - a) - k * (b - 0.5)
    }
}

/// Order above which boundedness is known to fail, where that is known.
pub fn necessity_threshold(n: usize, p: f64, q: f64) -> Option<f64> {
    let (a, b) = (inv(p), inv(q));
    if (a >= 0.5 && b >= 0.5) || (a <= 0.5 && b <= 0.5) {
        Some(-(n as f64 - 1.0) * ((a - 0.5).abs() + (b - 0.5).abs()))
    } else if (a + b - 1.0).abs() < 1e-12 {
        Some(-(n as f64) * (a - 0.5).abs())
    } else {
        None
    }
}

/// Verdict rule: bounded up to `m₁`, growth `m − m₁` past a known
/// necessity threshold, and no verdict in between or off the known range.
pub fn sweep_expectation(n: usize, p: f64, q: f64, m: f64) -> Expectation {
    let crit = m1(n, p, q);
    if m <= crit + 1e-12 {
        return Expectation::AtMost { bound: 0.15 };
    }
    match necessity_threshold(n, p, q) {
        Some(t) if m > t + 1e-12 => Expectation::Near {
            value: m - crit,
            tol: 0.25,
        },
        _ => Expectation::None,
    }
}

/// `θ(2^{-j}ξ)` times complex white noise, normalised in `L²`.
fn random_field(j: i32, grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<Field> {
    let scale = 2f64.powi(j);
    let d = grid.dim();
    let data = (0..grid.len())
        .map(|i| {
            let xi = grid.freq_point(i);
            let rho = xi[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
            let w = CutoffKind::Theta.eval(rho / scale);
            let (a, b): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
            Complex64::new(a, b) * w
        })
        .collect();
    let spec = Field::new(grid, Side::Frequency, data)?;
    Ok(inverse_fourier_transform(&spec)?.with_band(Some(Band::new(scale / 3.0, 3.0 * scale))))
}

/// Input pairs at scale `j`, labelled for the records.
fn battery(j: i32, cfg: &SweepConfig) -> Result<Vec<(String, Field, Field)>> {
    let grid = aligned_grid(j)?;
    let f = make_test_function(&TestFunction::FJ, j, grid)?;
    let ft = make_test_function(&TestFunction::FTildeJ, j, grid)?;
    let (_, g) = pairing_driver(j, cfg.seed)?;
    let mut out = vec![
        ("fj_fj".to_string(), f.clone(), f.clone()),
        ("ftj_ftj".to_string(), ft.clone(), ft.clone()),
        ("fj_ftj".to_string(), f.clone(), ft.clone()),
        ("fj_driver".to_string(), f.clone(), g.clone()),
        ("driver_fj".to_string(), g, f),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(j as u64));
    for k in 0..cfg.random_pairs {
        let a = random_field(j, grid, &mut rng)?;
        let b = random_field(j, grid, &mut rng)?;
        out.push((format!("random{k}"), a, b));
    }
    Ok(out)
}

/// Largest ratio `‖T(f, g)‖_{X_r} / (‖f‖_p ‖g‖_q)` over the battery at
/// each scale, for `e^{i(|ξ|+|η|)} σ_j(ξ, η)`, and the exponent fitted
/// through those maxima.
pub fn upper_bound_sweep(cfg: &SweepConfig) -> Result<CaseOutcome> {
    cfg.validate()?;
    let r = target_exponent(cfg.p, cfg.q);
    let rc = RatioConfig {
        input_inf: InfInputNorm::Sup,
        bmo_depth: cfg.bmo_depth,
    };
    let phase = WavePhase::euclidean();
    let mut records = Vec::new();
    for j in cfg.j_min..=cfg.j_max {
        let sigma = BilinearSymbol::from_family(&SymbolFamily::SigmaJ { m: cfg.m, j });
        let mut best: Option<(usize, f64, f64)> = None;
        let mut extra = BTreeMap::new();
        for (k, (label, f, g)) in battery(j, cfg)?.into_iter().enumerate() {
            let out = wave_bilinear_apply(&phase, &phase, &sigma, &f, &g)?;
            let ratio = operator_ratio_with(&out, &f, &g, cfg.p, cfg.q, r, &rc)?;
            extra.insert(format!("ratio_{label}"), ratio);
            if best.map_or(true, |b| ratio > b.1) {
                best = Some((k, ratio, target_norm(&out, r, &rc)?));
            }
        }
        let (k, ratio, value) = best.ok_or_else(|| Error::Numerical("empty input battery".into()))?;
        extra.insert("argmax".into(), k as f64);
        records.push(ExperimentRecord {
            case: "upper".into(),
            n: cfg.n,
            p: cfg.p,
            q: cfg.q,
            r,
            m: cfg.m,
            j,
            value,
            input_norms: vec![],
            ratio,
            grid: Some(aligned_grid(j)?),
            seed: cfg.seed,
            extra,
        });
    }
    let pts: Vec<(i32, f64)> = records.iter().map(|r| (r.j, r.ratio)).collect();
    let fit = fit_exponent(&pts)?;
    Ok(CaseOutcome::new(
        "upper",
        records,
        fit,
        sweep_expectation(cfg.n, cfg.p, cfg.q, cfg.m),
    ))
}
