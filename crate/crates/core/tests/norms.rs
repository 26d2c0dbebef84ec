use proptest::prelude::*;
use wavelab::lattice::{make_grid, Field, GridSpec, Side};
use wavelab::norms::{bmo_norm, default_bmo_depth, h1_norm, lp_norm, operator_ratio, Space};
use wavelab::sharpness::{fit_exponent, make_test_function, SharpnessConfig, TestFunction};
use wavelab::symbols::smooth_step;
use wavelab::Complex64;

fn real(grid: GridSpec, f: impl Fn(f64) -> f64) -> Field {
    Field::from_fn(grid, |x| Complex64::new(f(x[0]), 0.0))
}

#[test]
fn smooth_box_scaling() {
    // Unit plateau on [-a, a] with short smooth edges.
    let grid = make_grid(1, 4096, 16.0).unwrap();
    for a in [1.0, 2.5] {
        let f = real(grid, |x| smooth_step((a + 0.01 - x.abs()) / 0.02));
        for p in [1.0, 2.0, 4.0] {
            let v = lp_norm(&f, p).unwrap().value;
            assert!((v / (2.0 * a).powf(1.0 / p) - 1.0).abs() < 1e-2, "a={a} p={p}: {v}");
        }
    }
}

#[test]
fn fj_norm_growth() {
    for p in [1.0, 2.0] {
        let cfg = SharpnessConfig::new(2, 1.0, 1.0, 3, 7);
        let pts: Vec<(i32, f64)> = (3..=7)
            .map(|j| {
                let f = make_test_function(&TestFunction::FJ, j, cfg.grid_for(j).unwrap()).unwrap();
                (j, lp_norm(&f, p).unwrap().value)
            })
            .collect();
        let slope = fit_exponent(&pts).unwrap().slope;
        assert!((slope - (2.0 - 2.0 / p)).abs() <= 0.05, "p={p}: {slope}");
    }
}

/// Mean oscillation over every dyadic interval, enumerated from the sorted
/// coordinates rather than by index arithmetic.
fn dyadic_oscillation(f: &Field, max_depth: usize) -> f64 {
    let grid = f.grid();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|a, b| grid.coordinate(*a).total_cmp(&grid.coordinate(*b)));
    let vals: Vec<Complex64> = order.iter().map(|&i| f.data()[i]).collect();
    let mut best = 0.0f64;
    for depth in 0..=max_depth {
        for chunk in vals.chunks(vals.len() >> depth) {
            let mean: Complex64 = chunk.iter().sum::<Complex64>() / chunk.len() as f64;
            let osc = chunk.iter().map(|v| (v - mean).norm()).sum::<f64>() / chunk.len() as f64;
            best = best.max(osc);
        }
    }
    best
}

#[test]
fn bmo_of_a_smooth_step() {
    let grid = make_grid(1, 256, 8.0).unwrap();
    let f = real(grid, |x| 2.0 * smooth_step(0.5 + x / 0.5) - 1.0);
    let depth = default_bmo_depth(&grid);
    let v = bmo_norm(&f, depth).unwrap();
    assert!(v.surrogate);
    assert_eq!(v.space, Space::Bmo { max_depth: depth });
    assert!((0.5..=1.0).contains(&v.value), "{}", v.value);
    assert!((v.value - dyadic_oscillation(&f, depth)).abs() < 1e-14);
    assert!(bmo_norm(&f, 9).is_err());
}

#[test]
fn bmo_tolerates_a_one_cell_shift() {
    let grid = make_grid(2, 128, 8.0).unwrap();
    let g = |s: f64| {
        Field::from_fn(grid, move |x| {
            Complex64::new((-((x[0] - s).powi(2) + x[1] * x[1]) / 2.0).exp(), 0.0)
        })
    };
    let depth = default_bmo_depth(&grid);
    let a = bmo_norm(&g(0.0), depth).unwrap().value;
    let b = bmo_norm(&g(grid.dx()), depth).unwrap().value;
    assert!((a - b).abs() <= 0.05 * a, "{a} {b}");
}

fn bumps(grid: GridSpec, signs: &[(f64, f64)]) -> Field {
    real(grid, |x| {
        signs.iter().map(|(c, s)| s * (-(x - c).powi(2) * 4.0).exp()).sum()
    })
}

#[test]
fn hardy_surrogate_box_doubling() {
    let dx = 1.0 / 16.0;
    let at = |length: f64, signs: &[(f64, f64)]| {
        let grid = make_grid(1, (length / dx) as usize, length).unwrap();
        h1_norm(&bumps(grid, signs)).unwrap().value
    };
    let atom = [(-0.5, 1.0), (0.5, -1.0)];
    let (a, b) = (at(32.0, &atom), at(64.0, &atom));
    assert!((b / a - 1.0).abs() <= 0.05, "{a} {b}");
    let single = [(0.0, 1.0)];
    let (a, b) = (at(32.0, &single), at(64.0, &single));
    assert!(b >= 1.1 * a, "{a} {b}");
}

#[test]
fn hardy_matches_l1_on_annular_bands() {
    let cfg = SharpnessConfig::new(2, 1.0, 1.0, 3, 6);
    let ratios: Vec<f64> = (3..=6)
        .map(|j| {
            let f = make_test_function(&TestFunction::FJ, j, cfg.grid_for(j).unwrap()).unwrap();
            h1_norm(&f).unwrap().value / lp_norm(&f, 1.0).unwrap().value
        })
        .collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(lo >= 0.5 && hi <= 10.0 && hi / lo <= 1.5, "{ratios:?}");
}

#[test]
fn ratio_rejects_inconsistent_exponents() {
    let grid = make_grid(1, 16, 1.0).unwrap();
    let f = real(grid, |x| 1.0 + x);
    assert!(operator_ratio(&f, &f, &f, 2.0, 2.0, 2.0).is_err());
    assert!(lp_norm(&f, 0.0).is_err());
}

fn field() -> impl Strategy<Value = Field> {
    (1usize..=2, prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..64)).prop_map(|(d, v)| {
        // Box of unit measure.
        let grid = make_grid(d, if d == 1 { 64 } else { 16 }, 1.0).unwrap();
        let data = (0..grid.len()).map(|i| {
            let (a, b) = v[(i * 7) % v.len()];
            Complex64::new(a, b) * (1.0 + (i as f64).sqrt().sin())
        });
        Field::new(grid, Side::Physical, data.collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_homogeneous(f in field(), c in (-3.0f64..3.0, -3.0f64..3.0)) {
        let c = Complex64::new(c.0, c.1);
        prop_assume!(c.norm() > 1e-3);
        let cf = f.scaled(c);
        let depth = default_bmo_depth(f.grid());
        let pairs = [
            (lp_norm(&f, 0.5).unwrap().value, lp_norm(&cf, 0.5).unwrap().value),
            (lp_norm(&f, 1.0).unwrap().value, lp_norm(&cf, 1.0).unwrap().value),
            (lp_norm(&f, 3.0).unwrap().value, lp_norm(&cf, 3.0).unwrap().value),
            (lp_norm(&f, f64::INFINITY).unwrap().value, lp_norm(&cf, f64::INFINITY).unwrap().value),
            (bmo_norm(&f, depth).unwrap().value, bmo_norm(&cf, depth).unwrap().value),
            (h1_norm(&f).unwrap().value, h1_norm(&cf).unwrap().value),
        ];
        for (a, b) in pairs {
            prop_assert!((b - c.norm() * a).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn lp_is_monotone_on_a_probability_box(f in field(), p in 0.3f64..8.0, dq in 0.0f64..8.0) {
        let q = p + dq;
        let a = lp_norm(&f, p).unwrap().value;
        prop_assert!(a <= lp_norm(&f, q).unwrap().value * (1.0 + 1e-12));
        prop_assert!(a <= lp_norm(&f, f64::INFINITY).unwrap().value * (1.0 + 1e-12));
    }

    #[test]
    fn oscillation_below_twice_the_sup(f in field()) {
        let depth = default_bmo_depth(f.grid());
        prop_assert!(bmo_norm(&f, depth).unwrap().value <= 2.0 * lp_norm(&f, f64::INFINITY).unwrap().value);
    }

    #[test]
    fn holder_bounds_the_product_ratio(f in field(), g in field()) {
        prop_assume!(f.grid() == g.grid());
        let out = f.product(&g).unwrap();
        prop_assert!(operator_ratio(&out, &f, &g, 2.0, 2.0, 1.0).unwrap() <= 1.0 + 1e-12);
    }
}
