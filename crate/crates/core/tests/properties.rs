use proptest::prelude::*;
use rytov_core::*;
use std::sync::Arc;

fn slab() -> Arc<QuadratureGrid64> {
    Arc::new(
        build_grid(
            [Interval::new(0.0, 1.0), Interval::new(-0.5, 0.5), Interval::new(-0.5, 0.5)],
            [6, 6, 6],
            QuadratureRule::Midpoint,
        )
        .unwrap(),
    )
}

fn point() -> impl Strategy<Value = Point3d> {
    (-2.0..3.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn g0_is_symmetric(a in point(), b in point()) {
        prop_assume!(a.distance(&b) > 1e-3);
        let w = WaveParams64::from_wavelength(0.7).unwrap();
        prop_assert_eq!(g0(&a, &b, &w).unwrap(), g0(&b, &a, &w).unwrap());
    }

    #[test]
    fn frozen_medium_is_reciprocal(a in point(), b in point(), idx in 0u64..50) {
        prop_assume!(a.distance(&b) > 1e-3);
        let grid = slab();
        let spec = TurbulenceSpec64::new(1e-3, 0.05, grid.clone(), 17).unwrap();
        let field = sample_field(&spec, idx);
        let medium = FrozenMedium { wave: WaveParams64::from_wavelength(0.5).unwrap(), delta: 0.3, field: &field, grid: &grid };
        prop_assert!(reciprocity_defect(&medium, &[(a, b)]).unwrap() < 1e-12);
    }

    #[test]
    fn integrate_is_linear(s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let grid = slab();
        let f = |p: &Point3d| Complex::new(p.x * p.y + 1.0, p.z);
        let g = |p: &Point3d| Complex::new(p.x.cos(), p.y * p.y);
        let lhs = integrate(&grid, |p| f(p) * s + g(p) * t, &[]).unwrap().value;
        let rhs = integrate(&grid, f, &[]).unwrap().value * s + integrate(&grid, g, &[]).unwrap().value * t;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
}

#[test]
fn single_precision_core_runs() {
    let wave = WaveParams::<f32>::from_wavelength(0.5).unwrap();
    let a = Point3::new(0.0f32, 0.0, 0.0);
    let b = Point3::new(1.0f32, 0.2, -0.1);
    let single = g0(&a, &b, &wave).unwrap();
    let double = g0(&Point3d::new(0.0, 0.0, 0.0), &Point3d::new(1.0, 0.2, -0.1), &WaveParams64::from_wavelength(0.5).unwrap()).unwrap();
    assert!((single.re as f64 - double.re).abs() < 1e-5);

    let grid = build_grid(
        [Interval::new(0.2f32, 0.8), Interval::new(-0.3, 0.3), Interval::new(-0.3, 0.3)],
        [4, 4, 4],
        QuadratureRule::Midpoint,
    )
    .unwrap();
    let spec = TurbulenceSpec::new(1e-2f32, 0.01, grid, 3).unwrap();
    let field = sample_field(&spec, 0);
    let g = turbulent_green(&b, &a, 1e-2, &field, spec.grid(), &wave).unwrap();
    assert!(g.value.re.is_finite() && g.value.im.is_finite());

    let p = ApodizationProblem::new(1.0f32, 1.0, 6.0, wave, (6, 6), (6, 6)).unwrap();
    let top = solve_concentration(&p, &build_ks(&p).unwrap()).unwrap();
    assert!(top.lambda > 0.0 && top.lambda < 1.0);
}
