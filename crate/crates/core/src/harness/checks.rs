//! Randomised identity checks on the partition and the transform layer.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::angular_frame;
use crate::error::Result;
use crate::lattice::{fourier_transform, inverse_fourier_transform, make_grid, Field, GridSpec};
use crate::operators::{bilinear_multiplier_apply, BilinearSymbol};
use crate::symbols::make_dyadic_partition;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub instances: usize,
    /// Worst error over the instances.
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn random_grid(rng: &mut ChaCha8Rng) -> Result<GridSpec> {
    let dim = rng.gen_range(1..=2);
    let samples = 1usize << rng.gen_range(4..=if dim == 1 { 10 } else { 6 });
    let length = rng.gen_range(1.0..40.0);
    make_grid(dim, samples, length)
}

fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> Field {
    let data: Vec<Complex64> = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    Field::new(grid, crate::lattice::Side::Physical, data).expect("length matches grid")
}

fn sup(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, f64::max)
}

/// `φ + Σ_{j≥1} ψ(2^{-j}·) = 1` at random radii up to `2^{40}`.
pub fn partition_of_unity(rng: &mut ChaCha8Rng, instances: usize) -> CheckResult {
    let p = make_dyadic_partition();
    let err = sup((0..instances).map(|_| {
        let rho = 2f64.powf(rng.gen_range(-10.0..40.0));
        let s: f64 = (0..=45).map(|j| p.piece(j, rho)).sum();
        (s - 1.0).abs()
    }));
    CheckResult {
        name: "partition-of-unity".into(),
        instances,
        max_error: err,
        tolerance: 1e-12,
    }
}

/// The angular frame sums to one at random points of random annuli.
pub fn angular_partition(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult> {
    let mut err = 0.0f64;
    for _ in 0..instances {
        let j = rng.gen_range(2..=12);
        let frame = angular_frame(j, 2)?;
        let (r, t) = (2f64.powf(j as f64 + rng.gen_range(-1.0..1.0)), rng.gen_range(-PI..PI));
        err = err.max((frame.partition_sum(&[r * t.cos(), r * t.sin()]) - 1.0).abs());
    }
    Ok(CheckResult {
        name: "angular-partition".into(),
        instances,
        max_error: err,
        tolerance: 1e-12,
    })
}

/// Inverse transform after forward transform, relative to the sup norm.
pub fn fft_round_trip(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult> {
    let mut err = 0.0f64;
    for _ in 0..instances {
        let f = random_field(random_grid(rng)?, rng);
        let back = inverse_fourier_transform(&fourier_transform(&f)?)?;
        let scale = sup(f.data().iter().map(|v| v.norm()));
        err = err.max(sup(back.data().iter().zip(f.data()).map(|(a, b)| (a - b).norm())) / scale);
    }
    Ok(CheckResult {
        name: "fft-round-trip".into(),
        instances,
        max_error: err,
        tolerance: 1e-12,
    })
}

/// `‖f‖₂² = (2π)^{-n} ‖f̂‖₂²`, relative.
pub fn parseval(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult> {
    let mut err = 0.0f64;
    for _ in 0..instances {
        let grid = random_grid(rng)?;
        let f = random_field(grid, rng);
        let fh = fourier_transform(&f)?;
        let lhs: f64 = f.data().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_volume();
        let rhs: f64 = fh.data().iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.dual_cell_volume()
            / (2.0 * PI).powi(grid.dim() as i32);
        err = err.max((lhs - rhs).abs() / lhs);
    }
    Ok(CheckResult {
        name: "parseval".into(),
        instances,
        max_error: err,
        tolerance: 1e-10,
    })
}

/// `T_1(f, g) = f g`, relative to `‖f‖_∞ ‖g‖_∞`.
pub fn product_identity(rng: &mut ChaCha8Rng, instances: usize) -> Result<CheckResult> {
    let one = BilinearSymbol::constant(Complex64::new(1.0, 0.0));
    let mut err = 0.0f64;
    for _ in 0..instances {
        let grid = random_grid(rng)?;
        let (f, g) = (random_field(grid, rng), random_field(grid, rng));
        let out = bilinear_multiplier_apply(&one, &f, &g)?;
        let scale = sup(f.data().iter().map(|v| v.norm())) * sup(g.data().iter().map(|v| v.norm()));
        let e = sup(out
            .data()
            .iter()
            .zip(f.data().iter().zip(g.data()))
            .map(|(o, (a, b))| (o - a * b).norm()));
        err = err.max(e / scale);
    }
    Ok(CheckResult {
        name: "product-identity".into(),
        instances,
        max_error: err,
        tolerance: 1e-12,
    })
}

/// All of the above, seeded.
pub fn identity_suite(seed: u64, instances: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        partition_of_unity(&mut rng, instances),
        angular_partition(&mut rng, instances)?,
        fft_round_trip(&mut rng, instances)?,
        parseval(&mut rng, instances)?,
        product_identity(&mut rng, instances)?,
    ])
}
