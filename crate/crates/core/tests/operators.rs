use std::f64::consts::PI;

use proptest::prelude::*;
use wavelab::kernels::radial::kernel_value;
use wavelab::lattice::{fourier_transform, make_grid, Band, Field, GridSpec, Side};
use wavelab::norms::lp_norm;
use wavelab::operators::{
    bilinear_dense_apply, bilinear_multiplier_apply, linear_multiplier_apply, sj_apply, wave_bilinear_apply,
    BilinearSymbol, LinearSymbol, SeparableSum,
};
use wavelab::sharpness::{make_test_function, TestFunction};
use wavelab::symbols::{Cutoff, CutoffKind, WavePhase};
use wavelab::Complex64;

fn sup(f: &Field) -> f64 {
    f.data().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn max_gap(a: &Field, b: &Field) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn bump(grid: GridSpec, centre: f64, width: f64) -> Field {
    Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| (v - centre).powi(2)).sum();
        Complex64::new((-r2 / (width * width)).exp(), 0.2 * (3.0 * x[0]).sin() * (-r2).exp())
    })
}

#[test]
fn band_certificate_of_annular_multiplier() {
    let grid = make_grid(2, 128, 8.0).unwrap();
    let f = bump(grid, 0.3, 0.2);
    let j = 3;
    let out = linear_multiplier_apply(&LinearSymbol::radial(Cutoff::new(CutoffKind::Psi, j)), &f).unwrap();
    let band = out.band().unwrap();
    assert_eq!(band, Band::new(4.0, 16.0));
    assert!(out.spectral_mass_outside(&band).unwrap() < 1e-12);
}

#[test]
fn separable_symbol_factorises() {
    let grid = make_grid(2, 64, 6.0).unwrap();
    let (f, g) = (bump(grid, 0.5, 0.7), bump(grid, -0.4, 1.1));
    let u = LinearSymbol::new(|xi| Complex64::new((-0.1 * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.3 * xi[0].sin()));
    let out = bilinear_multiplier_apply(&BilinearSymbol::separable(u.clone(), LinearSymbol::one()), &f, &g).unwrap();
    let want = linear_multiplier_apply(&u, &f).unwrap().product(&g).unwrap();
    assert!(max_gap(&out, &want) <= 1e-12 * sup(&want));
}

#[test]
fn wave_modulation() {
    let grid = make_grid(2, 64, 6.0).unwrap();
    let (f, g) = (bump(grid, 0.5, 0.7), bump(grid, -0.4, 1.1));
    let one = BilinearSymbol::constant(Complex64::new(1.0, 0.0));
    let e = WavePhase::euclidean();
    let out = wave_bilinear_apply(&e, &e, &one, &f, &g).unwrap();
    let wave = LinearSymbol::phase(&e);
    let want = linear_multiplier_apply(&wave, &f)
        .unwrap()
        .product(&linear_multiplier_apply(&wave, &g).unwrap())
        .unwrap();
    assert!(max_gap(&out, &want) <= 1e-12 * sup(&want));

    let sigma = BilinearSymbol::separable(
        LinearSymbol::radial(Cutoff::new(CutoffKind::PhiLow, 2)),
        LinearSymbol::one(),
    );
    let z = WavePhase::zero();
    let plain = bilinear_multiplier_apply(&sigma, &f, &g).unwrap();
    assert!(max_gap(&wave_bilinear_apply(&z, &z, &sigma, &f, &g).unwrap(), &plain) <= 1e-14 * sup(&plain));
}

#[test]
fn sj_preserves_l2_of_the_band() {
    let grid = make_grid(2, 256, 8.0).unwrap();
    let f = bump(grid, 0.1, 0.15);
    let j = 4;
    let s = sj_apply(j, &f).unwrap();
    let theta = linear_multiplier_apply(&LinearSymbol::radial(Cutoff::new(CutoffKind::Theta, j)), &f).unwrap();
    let (a, b) = (lp_norm(&s, 2.0).unwrap().value, lp_norm(&theta, 2.0).unwrap().value);
    assert!((a - b).abs() <= 1e-12 * b);
    assert!(sj_apply(7, &f).is_err());
}

#[test]
fn sj_of_fj_matches_radial_quadrature() {
    let j = 5;
    let grid = make_grid(2, 1024, 16.0).unwrap();
    let s = sj_apply(j, &make_test_function(&TestFunction::FJ, j, grid).unwrap()).unwrap();
    let psi = Cutoff::new(CutoffKind::Psi, 0);
    let peak = sup(&s);
    let mut worst = 0.0f64;
    let mut points = 0;
    for (i, v) in s.data().iter().enumerate() {
        let [x, y] = grid.point(i);
        if y == 0.0 && (0.8..=1.2).contains(&x) {
            // Real radial profile: the +i|ξ| kernel is the conjugate of h_j.
            let q = kernel_value(&psi, j, 2, x).unwrap().value.conj();
            worst = worst.max((q - v).norm() / peak);
            points += 1;
        }
    }
    assert!(points > 20);
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn band_sumset() {
    let grid = make_grid(2, 128, 8.0).unwrap();
    let f = make_test_function(&TestFunction::FJ, 1, grid).unwrap();
    let g = make_test_function(&TestFunction::FTildeJ, 4, grid).unwrap();
    let sigma = BilinearSymbol::separable(
        LinearSymbol::radial(Cutoff::new(CutoffKind::Theta, 1)),
        LinearSymbol::phase(&WavePhase::euclidean()),
    );
    let out = bilinear_multiplier_apply(&sigma, &f, &g).unwrap();
    let band = f.band().unwrap().sumset(&g.band().unwrap());
    assert_eq!(band, Band::new(4.0, 36.0));
    assert!(out.spectral_mass_outside(&band).unwrap() < 1e-10);
}

/// Gaussian factor `a e^{-b|ξ|²} e^{i c·ξ}`.
#[derive(Clone, Copy, Debug)]
struct Factor {
    a: (f64, f64),
    b: f64,
    c: (f64, f64),
}

impl Factor {
    fn symbol(self) -> LinearSymbol {
        LinearSymbol::new(move |xi| {
            let r2: f64 = xi.iter().map(|v| v * v).sum();
            let phase = self.c.0 * xi[0] + self.c.1 * xi.get(1).copied().unwrap_or(0.0);
            Complex64::new(self.a.0, self.a.1) * (-self.b * r2).exp() * Complex64::from_polar(1.0, phase)
        })
    }
}

fn factor() -> impl Strategy<Value = Factor> {
    ((-1.0f64..1.0, -1.0f64..1.0), 0.0f64..0.2, (-0.5f64..0.5, -0.5f64..0.5)).prop_map(|(a, b, c)| Factor { a, b, c })
}

fn separable(terms: &[(Factor, Factor)]) -> BilinearSymbol {
    BilinearSymbol::from_sum(SeparableSum {
        left: terms.iter().map(|t| t.0.symbol()).collect(),
        right: terms.iter().map(|t| t.1.symbol()).collect(),
        terms: (0..terms.len()).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect(),
        truncation_bound: 0.0,
    })
}

fn field(grid: GridSpec, v: &[(f64, f64)]) -> Field {
    let data = (0..grid.len()).map(|i| {
        let (a, b) = v[i % v.len()];
        Complex64::new(a, b) * (1.0 + 0.5 * (i as f64 * 0.61).cos())
    });
    Field::new(grid, Side::Physical, data.collect()).unwrap()
}

fn grid() -> impl Strategy<Value = GridSpec> {
    prop_oneof![
        Just(make_grid(1, 16, 2.0 * PI).unwrap()),
        Just(make_grid(1, 32, 5.0).unwrap()),
        Just(make_grid(2, 16, 4.0).unwrap()),
    ]
}

fn values() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fast_path_matches_dense_oracle(
        g in grid(),
        terms in prop::collection::vec((factor(), factor()), 1..4),
        u in values(),
        v in values(),
    ) {
        let sigma = separable(&terms);
        let (f, h) = (field(g, &u), field(g, &v));
        let fast = bilinear_multiplier_apply(&sigma, &f, &h).unwrap();
        let dense = bilinear_dense_apply(&sigma, &f, &h).unwrap();
        let scale = sup(&dense).max(1e-300);
        prop_assert!(max_gap(&fast, &dense) <= 1e-10 * scale.max(1e-6 * sup(&f) * sup(&h)));
    }

    #[test]
    fn bilinear_in_first_argument(
        g in grid(),
        terms in prop::collection::vec((factor(), factor()), 1..3),
        u in values(),
        w in values(),
        v in values(),
        a in (-2.0f64..2.0, -2.0f64..2.0),
        b in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let sigma = separable(&terms);
        let (f1, f2, h) = (field(g, &u), field(g, &w), field(g, &v));
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let lhs = bilinear_multiplier_apply(&sigma, &f1.combine(a, &f2, b).unwrap(), &h).unwrap();
        let t1 = bilinear_multiplier_apply(&sigma, &f1, &h).unwrap();
        let t2 = bilinear_multiplier_apply(&sigma, &f2, &h).unwrap();
        let rhs = t1.combine(a, &t2, b).unwrap();
        let scale = (a.norm() * sup(&t1) + b.norm() * sup(&t2)).max(1e-300);
        prop_assert!(max_gap(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn product_identity(g in grid(), u in values(), v in values()) {
        let (f, h) = (field(g, &u), field(g, &v));
        let out = bilinear_multiplier_apply(&BilinearSymbol::constant(Complex64::new(1.0, 0.0)), &f, &h).unwrap();
        let want = f.product(&h).unwrap();
        prop_assert!(max_gap(&out, &want) <= 1e-12 * sup(&f) * sup(&h));
        prop_assert!(fourier_transform(&out).is_ok());
    }
}
