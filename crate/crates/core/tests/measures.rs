mod common;

use common::{c, gauss_bump_integral, midpoint, midpoint_cells};
use itp_core::fnalg::{make_bump, PiecewisePoly, ScalarFn};
use itp_core::measures::{char_fn, integrate, plateau_mass, sample, select_levels, Budget, Measure1D, ProductMeasure, QuadratureCfg};
use itp_core::Error;
use proptest::prelude::*;

fn cfg() -> QuadratureCfg {
    QuadratureCfg::default()
}

#[test]
fn normalization() {
    let g = Measure1D::standard_gaussian();
    let e = integrate(&ScalarFn::one(), &g, &cfg()).unwrap();
    assert_eq!(e.value, c(1.0, 0.0));
    assert_eq!(char_fn(&g, 0.0, &cfg()).unwrap().value, c(1.0, 0.0));
}

#[test]
fn bump_integral_matches_closed_form() {
    let g = Measure1D::standard_gaussian();
    for k in 1..=6 {
        let e = integrate(&make_bump(k).unwrap(), &g, &cfg()).unwrap();
        let oracle = gauss_bump_integral(k as f64);
        assert!((e.value.re - oracle).abs() <= e.err + 1e-12, "k={k}: {} vs {oracle}", e.value.re);
    }
    let one = integrate(&make_bump(1).unwrap(), &g, &cfg()).unwrap().value.re;
    assert!(one > plateau_mass(&g, 1) && one < plateau_mass(&g, 2));
}

#[test]
fn bump_integrals_increase_to_one() {
    let g = Measure1D::standard_gaussian();
    let vals: Vec<f64> = (1..=9).map(|k| integrate(&make_bump(k).unwrap(), &g, &cfg()).unwrap().value.re).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    assert!(1.0 - vals[8] < 1e-14);
}

#[test]
fn characteristic_functions_match_quadrature() {
    let g = Measure1D::standard_gaussian();
    let closed = char_fn(&g, 1.0, &cfg()).unwrap().value;
    let quad = g.char_fn_quadrature(1.0, &cfg()).unwrap();
    assert!((closed - c((-0.5f64).exp(), 0.0)).norm() < 1e-15);
    assert!((closed - quad.value).norm() < 1e-8);

    let u = Measure1D::uniform(-1.0, 1.0).unwrap();
    let pi = std::f64::consts::PI;
    let closed = char_fn(&u, pi, &cfg()).unwrap().value;
    let quad = midpoint(|t| c(0.0, pi * t).exp() * 0.5, -1.0, 1.0, 20_000);
    assert!((closed - quad).norm() < 1e-8);
    assert!(closed.norm() < 1e-15);
}

#[test]
fn density_measures() {
    // triangular density on [-1, 1]
    let p = PiecewisePoly::new(vec![-1.0, 0.0, 1.0], vec![vec![0.0, 1.0], vec![1.0, -1.0]]).unwrap();
    let d = Measure1D::density(p).unwrap();
    // char fn of the triangle: (2 - 2 cos x) / x^2
    let x = 1.7f64;
    let v = char_fn(&d, x, &cfg()).unwrap();
    assert!((v.value - c((2.0 - 2.0 * x.cos()) / (x * x), 0.0)).norm() < 1e-9);
    assert!((plateau_mass(&d, 1) - 1.0).abs() < 1e-15);
    assert!(d.carried_by(1.0));
    let neg = PiecewisePoly::new(vec![0.0, 1.0], vec![vec![-1.0]]).unwrap();
    assert!(matches!(Measure1D::density(neg), Err(Error::InvalidMeasure(_))));
}

#[test]
fn plateau_mass_examples() {
    let g = Measure1D::standard_gaussian();
    assert_eq!(plateau_mass(&g, 0), 0.0);
    assert!((plateau_mass(&g, 1) - libm::erf(1.0 / 2f64.sqrt())).abs() < 1e-15);
    assert!((plateau_mass(&g, 1) - 0.682689492).abs() < 1e-9);
    let u = Measure1D::uniform(-2.0, 2.0).unwrap();
    assert!((plateau_mass(&u, 1) - 0.5).abs() < 1e-15);
}

#[test]
fn level_selection() {
    let levels = select_levels(&ProductMeasure::standard_gaussian(), &Budget::Geometric, 1).unwrap();
    assert_eq!(levels, vec![1]);
    let u = ProductMeasure::iid(Measure1D::uniform(-1.0, 1.0).unwrap());
    assert_eq!(select_levels(&u, &Budget::Geometric, 30).unwrap(), vec![1; 30]);

    let g = ProductMeasure::standard_gaussian();
    let b = Budget::inverse_power(4.0).unwrap();
    let levels = select_levels(&g, &b, 100).unwrap();
    for (i, &k) in levels.iter().enumerate() {
        let n = i + 1;
        let deficit = 1.0 - plateau_mass(g.at(n), k);
        assert!(deficit <= (n as f64).powi(-4));
        if k > 1 {
            assert!(1.0 - plateau_mass(g.at(n), k - 1) > (n as f64).powi(-4), "level {k} not least at {n}");
        }
    }
    assert!(levels.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn heavy_tails_are_reported() {
    let wide = ProductMeasure::iid(Measure1D::gaussian(1e9).unwrap());
    assert!(matches!(select_levels(&wide, &Budget::Geometric, 60), Err(Error::HeavyTail { .. })));
}

#[test]
fn sample_moments() {
    let g = ProductMeasure::standard_gaussian();
    let m = 100_000;
    let rows = sample(&g, 4, m, 7);
    for col in 0..4 {
        let mean: f64 = rows.iter().map(|r| r[col]).sum::<f64>() / m as f64;
        assert!(mean.abs() < 4.0 / (m as f64).sqrt());
    }
    let u = ProductMeasure::iid(Measure1D::uniform(-1.0, 1.0).unwrap());
    let rows = sample(&u, 2, m, 3);
    for col in 0..2 {
        let var: f64 = rows.iter().map(|r| r[col] * r[col]).sum::<f64>() / m as f64;
        assert!((var - 1.0 / 3.0).abs() < 0.01);
    }
    assert_eq!(sample(&g, 3, 20, 11), sample(&g, 3, 20, 11));
}

#[test]
fn product_measure_classes() {
    let a = Measure1D::standard_gaussian();
    let b = Measure1D::uniform(-1.0, 1.0).unwrap();
    let mu = ProductMeasure::new(vec![b.clone()], vec![a.clone(), b.clone()]).unwrap();
    assert_eq!(mu.at(1), &b);
    assert_eq!(mu.at(2), &a);
    assert_eq!(mu.at(3), &b);
    assert_eq!(mu.class_of(2), mu.class_of(4));
    assert!(ProductMeasure::new(vec![a], vec![]).is_err());
}

#[test]
fn bad_quadrature_config() {
    assert!(QuadratureCfg::with_tol(-1.0).validate().is_err());
    assert!(QuadratureCfg::with_tol(1e-10).validate().is_ok());
}

fn arb_measure() -> impl Strategy<Value = Measure1D> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|s| Measure1D::gaussian(s).unwrap()),
        (-3.0f64..0.0, 0.1f64..3.0).prop_map(|(a, w)| Measure1D::uniform(a, a + w).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn integrals_contain_riemann_oracle(mu in arb_measure(), f in common::arb_compact_fn()) {
        let e = integrate(&f, &mu, &cfg()).unwrap();
        let mut breaks = f.breakpoints();
        if let Measure1D::Uniform { a, b } = mu {
            breaks.extend([a, b]);
            breaks.retain(|&t| t >= a && t <= b);
        }
        breaks.sort_by(f64::total_cmp);
        let oracle = midpoint_cells(|t| f.eval(t) * mu.pdf(t), &breaks, 20_000);
        prop_assert!((e.value - oracle).norm() <= e.err + 1e-8, "{} vs {}", e.value, oracle);
    }

    #[test]
    fn char_fn_is_bounded_and_hermitian(mu in arb_measure(), x in -20.0f64..20.0) {
        let p = char_fn(&mu, x, &cfg()).unwrap().value;
        let m = char_fn(&mu, -x, &cfg()).unwrap().value;
        prop_assert!(p.norm() <= 1.0 + 1e-15);
        prop_assert!((m - p.conj()).norm() < 1e-14);
    }

    #[test]
    fn plateau_mass_is_monotone(mu in arb_measure()) {
        let v: Vec<f64> = (0..30).map(|k| plateau_mass(&mu, k)).collect();
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((v[29] - 1.0).abs() < 1e-12);
    }
}
