//! End-to-end acceptance run: one PASS/FAIL line per criterion, every
//! tolerance pinned below. Exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavelab::decomp::{angular_frame, angular_piece_bounds, expand_symbol, AngularOptions, ExpansionOptions};
use wavelab::harness::identity_suite;
use wavelab::kernels::bessel::{bessel_asymptotic, bessel_series};
use wavelab::kernels::quadrature::integrate_checked;
use wavelab::kernels::radial::kernel_value;
use wavelab::kernels::{
    bessel_j, certify_plateau, kernel_lp_norms, l1_scaling_probe, plateau_constant, radial_wave_kernel, ProbeVariant,
};
use wavelab::lattice::{grid_resolving, inverse_fourier_transform, make_grid, Field, Side};
use wavelab::operators::{bilinear_dense_apply, bilinear_multiplier_apply, BilinearSymbol};
use wavelab::sharpness::{
    fit_exponent, run_case1, run_case2, run_case3, upper_bound_sweep, SharpnessConfig, SweepConfig,
};
use wavelab::symbols::{Cutoff, CutoffKind, SymbolFamily, WavePhase};
use wavelab::{Complex64, Result};

const INF: f64 = f64::INFINITY;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Partition, FFT, Parseval and product identities on 100 random instances.
fn identities() -> Result<Outcome> {
    let results = identity_suite(20_240_101, 100)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &results {
        let tol = if r.name == "parseval" { 1e-10 } else { 1e-12 };
        let ok = r.instances == 100 && r.max_error <= tol;
        pass &= ok;
        parts.push(format!("{} {:.1e}/{:.0e}", r.name, r.max_error, tol));
    }
    outcome(pass, parts.join(", "))
}

/// `‖h_j‖_p ~ 2^{j(3/2 − 1/p)}` for `n = 2`, `j = 6..11`.
fn kernel_scaling() -> Result<Outcome> {
    let psi = Cutoff::new(CutoffKind::Psi, 0);
    let ps = [1.0, 2.0, INF];
    let mut series: Vec<Vec<(i32, f64)>> = vec![Vec::new(); ps.len()];
    for j in 6..=11 {
        let k = kernel_lp_norms(&psi, j, 2, &ps)?;
        for (s, (_, v)) in series.iter_mut().zip(&k.norms) {
            s.push((j, *v));
        }
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, pts) in ps.iter().zip(&series) {
        let slope = fit_exponent(pts)?.slope;
        let want = 1.5 - 1.0 / p;
        pass &= within(slope, want, 0.1);
        parts.push(format!("p={p}: {slope:.4} (want {want} ± 0.1)"));
    }
    outcome(pass, parts.join(", "))
}

/// Plateau certificate on `j ≤ 11` and a quadrature versus FFT cross-check.
fn plateau() -> Result<Outcome> {
    let psi = Cutoff::new(CutoffKind::Psi, 0);
    let c0 = plateau_constant(&psi, 2)?;
    let mut profiles = Vec::new();
    for j in 3..=11 {
        let w = 2f64.powi(-j);
        let radii: Vec<f64> = (0..41).map(|k| 1.0 - w + 2.0 * w * k as f64 / 40.0).collect();
        profiles.push(radial_wave_kernel(&psi, j, 2, &radii)?);
    }
    let deltas = [0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0];
    let cert = certify_plateau(&profiles, c0, &deltas)?;
    let cert_ok = (0.05..=1.0).contains(&cert.delta) && cert.j0 <= 8;

    // h_5 sampled along the first axis of a 2-D grid.
    let j = 5;
    let scale = 2f64.powi(j);
    let grid = grid_resolving(2, 2.0 * scale, 1.25, 8.0, 1024)?;
    let spec = Field::from_fn_frequency(grid, |xi| {
        let rho = xi[0].hypot(xi[1]);
        Complex64::from_polar(CutoffKind::Psi.eval(rho / scale), -rho)
    });
    let h = inverse_fourier_transform(&spec)?;
    let peak = h.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (i, v) in h.data().iter().enumerate() {
        let [x, y] = grid.point(i);
        if y == 0.0 && (0.75..=1.25).contains(&x) {
            let q = kernel_value(&psi, j, 2, x)?.value;
            worst = worst.max((q - v).norm() / peak);
        }
    }
    outcome(
        cert_ok && worst <= 1e-3,
        format!(
            "δ={} j0={} c0={c0:.6}; FFT cross-check {worst:.1e} (≤ 1e-3)",
            cert.delta, cert.j0
        ),
    )
}

/// Angular frame partition, per-piece `L¹` uniformity and the total `L¹`
/// growth against the direct probe.
fn angular() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let phase = WavePhase::euclidean();
    let mut partition_err = 0.0f64;
    let (mut lo, mut hi) = (INF, 0.0f64);
    let mut totals = Vec::new();
    for j in 4..=9 {
        let frame = angular_frame(j, 2)?;
        for _ in 0..1000 {
            let (r, t) = (2f64.powf(j as f64 + rng.gen_range(-1.0..1.0)), rng.gen_range(-PI..PI));
            partition_err = partition_err.max((frame.partition_sum(&[r * t.cos(), r * t.sin()]) - 1.0).abs());
        }
        let rep = angular_piece_bounds(&frame, &phase, &AngularOptions::default())?;
        for p in &rep.pieces {
            lo = lo.min(p.l1);
            hi = hi.max(p.l1);
        }
        totals.push((j, rep.total_l1));
    }
    let slope = fit_exponent(&totals)?.slope;
    let js: Vec<i32> = (4..=9).collect();
    let probe = l1_scaling_probe(&phase, &Cutoff::new(CutoffKind::Psi, 0), 2, &js, ProbeVariant::Highpass)?
        .fit
        .slope;
    let pass = partition_err <= 1e-10
        && hi / lo <= 2.0
        && within(slope, 0.5, 0.15)
        && within(probe, 0.5, 0.15)
        && within(slope, probe, 0.15);
    outcome(
        pass,
        format!(
            "partition {partition_err:.1e} (≤ 1e-10), piece spread {:.3} (≤ 2), slope {slope:.4} and probe {probe:.4} (0.5 ± 0.15, agree within 0.15)",
            hi / lo
        ),
    )
}

/// `(S_j f_j)²` against `f_j`.
fn case1() -> Result<Outcome> {
    let runs = [
        (SharpnessConfig::new(2, 1.0, 1.0, 3, 7), 1.0),
        (SharpnessConfig::new(2, 2.0, 2.0, 3, 7), 0.0),
        (SharpnessConfig::new(1, 1.0, 1.0, 4, 10), 0.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (cfg, want) in runs {
        let slope = run_case1(&cfg)?.fit.slope;
        pass &= within(slope, want, 0.2);
        parts.push(format!(
            "n={} ({},{}): {slope:.4} (want {want} ± 0.2)",
            cfg.n, cfg.p, cfg.q
        ));
    }
    outcome(pass, parts.join(", "))
}

/// `(S_j f̃_j)²` into dyadic BMO at `p = q = ∞`.
fn case2() -> Result<Outcome> {
    let slope = run_case2(&SharpnessConfig::new(2, INF, INF, 4, 7))?.fit.slope;
    outcome(within(slope, 1.0, 0.25), format!("(∞,∞): {slope:.4} (want 1 ± 0.25)"))
}

/// Lattice pairing statistic on the duality line `q′ = 1`.
fn case3() -> Result<Outcome> {
    let out = run_case3(&SharpnessConfig::new(2, 1.0, INF, 5, 8))?;
    let slope = out.fit.slope;
    let factor4 = |v: f64| (0.25..=4.0).contains(&v);
    let mut counts_ok = true;
    let (mut pmin, mut pmax) = (INF, 0.0f64);
    for r in &out.records {
        let e = &r.extra;
        pmin = pmin.min(e["piece_min"]);
        pmax = pmax.max(e["piece_max"]);
        counts_ok &= factor4(e["cube_ratio"]) && factor4(e["lattice_ratio"]);
    }
    let pass = within(slope, 3.0, 0.3) && factor4(pmin) && factor4(pmax) && counts_ok;
    outcome(
        pass,
        format!("slope {slope:.4} (want 3 ± 0.3), normalised pieces in [{pmin:.3}, {pmax:.3}], counts within factor 4: {counts_ok}"),
    )
}

/// `σ_j` sweeps against the critical order.
fn upper_bound() -> Result<Outcome> {
    let runs = [(1.0, INF, -1.0), (2.0, 2.0, 0.0), (1.0, 1.0, -1.0), (1.0, INF, -0.5)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, q, m) in runs {
        let slope = upper_bound_sweep(&SweepConfig::new(p, q, m))?.fit.slope;
        let (ok, want) = if m == -0.5 {
            (within(slope, 0.5, 0.25), "0.5 ± 0.25")
        } else {
            (slope <= 0.15, "≤ 0.15")
        };
        pass &= ok;
        parts.push(format!("({p},{q},{m}): {slope:.4} ({want})"));
    }
    outcome(pass, parts.join(", "))
}

/// Block expansion of `(1 + |ξ|² + |η|²)^{-1/2}` in one dimension.
fn expansion() -> Result<Outcome> {
    let sigma = BilinearSymbol::from_family(&SymbolFamily::Power { m: -1.0 });
    let (sum, blocks) = expand_symbol(&sigma, 1, 3, &ExpansionOptions::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut recon_ok = true;
    let mut worst_share = 0.0f64;
    let mut decay = INF;
    for b in &blocks {
        for _ in 0..1000 {
            let (x, y) = ([rng.gen_range(-PI..PI)], [rng.gen_range(-PI..PI)]);
            let err = (b.eval_cell(&x, &y) - b.target_cell(&sigma, &x, &y)).norm();
            recon_ok &= err <= b.tail_bound;
            worst_share = worst_share.max(err / b.tail_bound);
        }
        decay = decay.min(b.decay_a).min(b.decay_b);
    }

    let grid = make_grid(1, 32, 16.0)?;
    let random = |rng: &mut ChaCha8Rng| {
        let data = (0..32)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::new(grid, Side::Physical, data)
    };
    let (f, g) = (random(&mut rng)?, random(&mut rng)?);
    let sep = BilinearSymbol::from_sum(sum);
    let fast = bilinear_multiplier_apply(&sep, &f, &g)?;
    let dense = bilinear_dense_apply(&sep, &f, &g)?;
    let scale = dense.data().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let gap = fast
        .data()
        .iter()
        .zip(dense.data())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale;

    outcome(
        recon_ok && gap <= 1e-8 && decay >= 2.0,
        format!(
            "{} blocks, worst error/tail {worst_share:.3} (≤ 1), fast vs dense {gap:.1e} (≤ 1e-8), min decay {decay:.2} (≥ 2)",
            blocks.len()
        ),
    )
}

/// Bessel closed form, series/asymptotic overlap and panel doubling.
fn bessel() -> Result<Outcome> {
    let mut closed = 0.0f64;
    for k in 1..=400 {
        let s = 0.1 * k as f64;
        closed = closed.max((bessel_j(0.5, s)? - (2.0 / (PI * s)).sqrt() * s.sin()).abs());
    }
    let mut overlap = 0.0f64;
    for nu in [0.0, 0.5, 1.0, 1.5, 2.0] {
        for k in 0..=80 {
            let s = 10.0 + 0.05 * k as f64;
            overlap = overlap.max((bessel_series(nu, s)? - bessel_asymptotic(nu, s)?).abs());
        }
    }
    let psi = Cutoff::new(CutoffKind::Psi, 0);
    let mut doubling = 0.0f64;
    for (j, r) in [(4, 0.5), (6, 0.99), (6, 1.0), (8, 1.01), (8, 2.0)] {
        doubling = doubling.max(kernel_value(&psi, j, 2, r)?.doubling_change);
    }
    let osc = integrate_checked(
        |t| Complex64::from_polar((-t * t).exp(), 40.0 * t),
        -4.0,
        4.0,
        64,
        1e-6,
        1e-12,
    )?;
    doubling = doubling.max(osc.doubling_change);
    outcome(
        closed <= 1e-9 && overlap <= 1e-9 && doubling <= 1e-6,
        format!("J_1/2 {closed:.1e} (≤ 1e-9), overlap {overlap:.1e} (≤ 1e-9), doubling {doubling:.1e} (≤ 1e-6)"),
    )
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("partition and transform identities", identities),
        ("kernel norm scaling", kernel_scaling),
        ("plateau certificate", plateau),
        ("angular decomposition", angular),
        ("lower bound, case 1", case1),
        ("lower bound, case 2", case2),
        ("lower bound, case 3", case3),
        ("upper-bound consistency", upper_bound),
        ("separable expansion", expansion),
        ("Bessel and quadrature", bessel),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} [{:.1}s] {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            detail
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
