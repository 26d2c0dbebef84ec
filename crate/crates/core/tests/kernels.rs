use std::f64::consts::PI;

use wavelab::kernels::bessel::bessel_series;
use wavelab::kernels::probes::ball_profile;
use wavelab::kernels::quadrature::integrate_panels;
use wavelab::kernels::radial::{asymptotic_split, kernel_value};
use wavelab::kernels::{
    bessel_j, certify_plateau, certify_plateau_with_phase, envelope_fit, l1_scaling_probe, plateau_constant,
    plateau_phase, radial_wave_kernel, KernelProfile, ProbeVariant,
};
use wavelab::lattice::{grid_resolving, inverse_fourier_transform, Field};
use wavelab::sharpness::fit_exponent;
use wavelab::symbols::{Cutoff, CutoffKind, FnProfile, WavePhase};
use wavelab::Complex64;

fn psi() -> Cutoff {
    Cutoff::new(CutoffKind::Psi, 0)
}

fn shell(j: i32, points: usize) -> Vec<f64> {
    let w = 2f64.powi(-j);
    (0..points)
        .map(|k| 1.0 - w + 2.0 * w * k as f64 / (points - 1) as f64)
        .collect()
}

#[test]
fn bessel_examples() {
    assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
    for s in [1.0, 5.0, 20.0] {
        assert!((bessel_j(0.5, s).unwrap() - (2.0 / (PI * s)).sqrt() * s.sin()).abs() < 1e-9);
    }
    // First zero of J_0, bracketed by bisection on the series.
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..100 {
        let c = 0.5 * (a + b);
        if bessel_series(0.0, a).unwrap() * bessel_series(0.0, c).unwrap() <= 0.0 {
            b = c;
        } else {
            a = c;
        }
    }
    assert!((a - 2.404_825_557_695_773).abs() < 1e-12);
    assert!(bessel_j(0.0, 2.404_825_557_695_773).unwrap().abs() < 1e-8);
    assert!(bessel_j(0.25, 1.0).is_err());
}

#[test]
fn fft_grid_oracle_at_j6() {
    let (j, n) = (6, 2);
    let scale = 2f64.powi(j);
    let grid = grid_resolving(2, 2.0 * scale, 1.25, 4.0, 1024).unwrap();
    let spec = Field::from_fn_frequency(grid, |xi| {
        let rho = xi[0].hypot(xi[1]);
        Complex64::from_polar(CutoffKind::Psi.eval(rho / scale), -rho)
    });
    let h = inverse_fourier_transform(&spec).unwrap();
    let amp = scale.powf((n as f64 + 1.0) / 2.0);
    let mut checked = 0;
    for (i, v) in h.data().iter().enumerate() {
        let [x, y] = grid.point(i);
        if y == 0.0 && x > 0.0 && v.norm() > 1e-3 * amp {
            let q = kernel_value(&psi(), j, n, x).unwrap();
            assert!(q.doubling_change <= 1e-6);
            assert!(
                (q.value - v).norm() <= 1e-3 * v.norm().max(1e-2 * amp),
                "x={x}: {} vs {v}",
                q.value
            );
            checked += 1;
        }
    }
    assert!(checked >= 5);
}

#[test]
fn one_dimensional_kernel_by_direct_quadrature() {
    // h_j(x) = (2π)^{-1} ∫_0^∞ ψ(2^{-j}t) (e^{it(x−1)} + e^{−it(x+1)}) dt.
    for j in [3, 5, 7] {
        let scale = 2f64.powi(j);
        let amp = scale;
        for x in [0.0, 0.5, 0.97, 1.0, 1.03, 1.8] {
            let direct = integrate_panels(
                |t| {
                    let w = CutoffKind::Psi.eval(t / scale);
                    (Complex64::from_polar(1.0, t * (x - 1.0)) + Complex64::from_polar(1.0, -t * (x + 1.0))) * w
                },
                0.5 * scale,
                2.0 * scale,
                4096,
            ) / (2.0 * PI);
            let q = kernel_value(&psi(), j, 1, x).unwrap().value;
            assert!((q - direct).norm() <= 1e-8 * amp, "j={j} x={x}: {q} vs {direct}");
        }
    }
}

#[test]
fn panel_doubling_is_stable() {
    let radii: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
    for n in [1, 2] {
        let p = radial_wave_kernel(&psi(), 7, n, &radii).unwrap();
        assert!(p.max_doubling_change <= 1e-6);
        assert!(p.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }
    assert!(radial_wave_kernel(&psi(), 0, 2, &radii).is_err());
    assert!(radial_wave_kernel(&psi(), 4, 2, &[1.0, 0.5]).is_err());
}

#[test]
fn plateau_constant_by_independent_quadrature() {
    let c0 = plateau_constant(&psi(), 2).unwrap();
    let direct = integrate_panels(
        |t| Complex64::new(CutoffKind::Psi.eval(t) * t.sqrt(), 0.0),
        0.5,
        2.0,
        400,
    )
    .re;
    assert!((c0 - direct / (2.0 * PI).powf(1.5)).abs() <= 1e-10 * c0);
    assert!((plateau_constant(&psi().with_amplitude(2.0), 2).unwrap() - 2.0 * c0).abs() <= 1e-14);
}

fn shell_profiles(psi: &Cutoff, js: std::ops::RangeInclusive<i32>) -> Vec<KernelProfile> {
    js.map(|j| radial_wave_kernel(psi, j, 2, &shell(j, 41)).unwrap())
        .collect()
}

#[test]
fn plateau_certificate() {
    let deltas = [1.0, 0.5, 0.25, 0.1, 0.05];
    let profiles = shell_profiles(&psi(), 6..=11);
    let c0 = plateau_constant(&psi(), 2).unwrap();
    let cert = certify_plateau(&profiles, c0, &deltas).unwrap();
    assert!((0.05..=1.0).contains(&cert.delta));
    assert_eq!(cert.phase, plateau_phase(2));

    // Deviation at |x| = 1 falls like 2^{-j}.
    let at_one: Vec<(i32, f64)> = profiles
        .iter()
        .map(|p| {
            let v = p.values[20];
            (p.j, (plateau_phase(2) * v / p.amplitude() - c0).norm() / c0)
        })
        .collect();
    let slope = fit_exponent(&at_one).unwrap().slope;
    assert!((slope + 1.0).abs() <= 0.3, "{slope}");

    let doubled = psi().with_amplitude(2.0);
    let c2 = plateau_constant(&doubled, 2).unwrap();
    let cert2 = certify_plateau(&shell_profiles(&doubled, 6..=11), c2, &deltas).unwrap();
    assert_eq!((cert2.delta, cert2.j0), (cert.delta, cert.j0));

    let wrong = plateau_phase(2) * Complex64::new(0.0, 1.0);
    assert!(certify_plateau_with_phase(&profiles, c0, &deltas, wrong).is_err());
}

#[test]
fn decay_envelope() {
    let radii: Vec<f64> = (0..161).map(|k| 0.5 + 1.5 * k as f64 / 160.0).collect();
    let profiles: Vec<KernelProfile> = (6..=10)
        .map(|j| radial_wave_kernel(&psi(), j, 2, &radii).unwrap())
        .collect();
    let env = envelope_fit(&profiles, 2.0).unwrap();
    assert!(env.spread <= 2.0, "{:?}", env.per_scale);
    let c0 = plateau_constant(&psi(), 2).unwrap();
    assert!(env.c >= c0);
    assert!(envelope_fit(&profiles[..3], 2.0).is_err());

    // Far from the sphere the kernel decays faster than (2^j |1 − r|)^{-L}.
    let far: Vec<(i32, f64)> = profiles
        .iter()
        .map(|p| (p.j, p.values.last().unwrap().norm() / p.amplitude()))
        .collect();
    assert!(fit_exponent(&far).unwrap().slope <= -2.0 + 0.3);
}

#[test]
fn main_term_dominates() {
    let residual: Vec<(i32, f64)> = (6..=11)
        .map(|j| {
            let h = kernel_value(&psi(), j, 2, 1.0).unwrap().value;
            let t = asymptotic_split(&psi(), j, 2, 1.0).unwrap();
            assert!((t.total() - h).norm() <= 1e-6 * h.norm());
            (j, (h - t.i_plus).norm())
        })
        .collect();
    let slope = fit_exponent(&residual).unwrap().slope;
    assert!((slope - 0.5).abs() <= 0.3, "{slope}");
}

#[test]
fn profile_csv() {
    let p = radial_wave_kernel(&psi(), 3, 2, &[0.9, 1.0, 1.1]).unwrap();
    let csv = p.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("radius,re,im,envelope"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn probes_in_other_regimes() {
    let js: Vec<i32> = (4..=9).collect();
    let phase = WavePhase::euclidean();
    let low = l1_scaling_probe(
        &phase,
        &FnProfile::new(ball_profile, (0.0, 2.0)),
        2,
        &js,
        ProbeVariant::Lowpass,
    )
    .unwrap();
    assert!(low.fit.slope <= 0.1, "{}", low.fit.slope);
    let high = l1_scaling_probe(&phase, &psi(), 1, &js, ProbeVariant::Highpass).unwrap();
    assert!(high.fit.slope.abs() <= 0.15, "{}", high.fit.slope);
}
