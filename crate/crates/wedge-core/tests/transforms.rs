use std::f64::consts::PI;

use proptest::prelude::*;
use wedge_core::geometry::{Point2, WedgeParams};
use wedge_core::jet::{euler_derivative, Jet, JetFn, SmoothFn};
use wedge_core::spaces::TestFunctionFamily;
use wedge_core::transforms::*;

/// Coefficients of the falling factorial `x(x−1)…(x−n+1)` in powers of `x`.
fn falling_factorial(n: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for m in 0..n {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &v) in c.iter().enumerate() {
            next[k + 1] += v;
            next[k] -= m as f64 * v;
        }
        c = next;
    }
    c
}

fn test_fn() -> JetFn<impl Fn(&Jet, &Jet) -> Jet + Sync> {
    JetFn(|x: &Jet, y: &Jet| {
        let r2 = *x * *x + *y * *y;
        (-(r2 * 0.3)).exp() * (*y * 1.7 + *x * 0.4).sin() * *y + *x * *x * *y * 0.1
    })
}

#[test]
fn radial_coefficients_are_signed_stirling_numbers() {
    // r^n ∂_r^n r^s = s(s−1)…(s−n+1) r^s and D_z^k r^s = s^k r^s
    for n in 0..=MAX_ORDER_TESTED {
        let want = falling_factorial(n);
        let got = radial_coefficients(n);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert_eq!(a, b, "n={n}");
        }
    }
}

const MAX_ORDER_TESTED: usize = 6;

#[test]
fn table_of_zero_order_is_identity() {
    let t = derivative_coeff_table((0, 0), 0.3).unwrap();
    assert_eq!(t.entries.len(), 1);
    assert_eq!(t.get(0, 0).eval(0.77), 1.0);
}

#[test]
fn isometry_for_the_family() {
    let p = 2.0;
    for kappa in [PI / 2.0, PI, 1.5 * PI] {
        let wedge = WedgeParams::new(kappa).unwrap();
        let grid = EulerGrid::new(kappa, 9.0, 256, 96).unwrap();
        for m in TestFunctionFamily::standard(kappa).members.iter().step_by(if kappa == PI { 1 } else { 3 }) {
            let (zl, zh) = m.z_range();
            for (g, n) in [(0.0, 0.0), (0.5, 1.0), (1.5, 3.0), (-0.5, -1.0)] {
                let cart = cartesian_weighted_norm(|x| m.value(x), &wedge, g, n, p, zl, zh).unwrap();
                for a in [-1.0, 0.0, 1.0] {
                    let v = pullback(|x| m.value(x), a, &grid).unwrap();
                    let euler = weighted_lp_norm_euler(&v, g, n + 2.0 - a * p, p).unwrap();
                    assert!((euler / cart - 1.0).abs() < 1e-6, "κ={kappa} {} a={a} ({g},{n}): {euler} {cart}", m.name);
                }
            }
        }
    }
}

#[test]
fn isometry_for_other_exponents() {
    let wedge = WedgeParams::new(2.0).unwrap();
    let grid = EulerGrid::new(2.0, 9.0, 256, 96).unwrap();
    let m = &TestFunctionFamily::standard(2.0).members[7];
    let (zl, zh) = m.z_range();
    for (p, a) in [(1.5, 0.4), (3.0, -0.7)] {
        let v = pullback(|x| m.value(x), a, &grid).unwrap();
        let euler = weighted_lp_norm_euler(&v, 0.5, 1.0 + 2.0 - a * p, p).unwrap();
        let cart = cartesian_weighted_norm(|x| m.value(x), &wedge, 0.5, 1.0, p, zl, zh).unwrap();
        assert!((euler / cart - 1.0).abs() < 1e-6, "p={p}: {euler} {cart}");
    }
}

#[test]
fn derivative_identity_on_family_with_sixth_order_convergence() {
    let kappa = PI;
    let coarse = EulerGrid::new(kappa, 9.0, 512, 128).unwrap();
    let fine = EulerGrid::new(kappa, 9.0, 1024, 257).unwrap();
    let members = TestFunctionFamily::standard(kappa).members;
    let mut worst: f64 = 0.0;
    for (k, m) in members.iter().enumerate() {
        for alpha in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let a = [-1.0, 0.0, 0.5][k % 3];
            let d = apply_derivative_identity(m, alpha, a, &coarse).unwrap();
            worst = worst.max(d);
            if k % 6 == 0 {
                let d2 = apply_derivative_identity(m, alpha, a, &fine).unwrap();
                let order = (d / d2).log2();
                assert!(order >= 5.0, "{} α={alpha:?}: {d} → {d2}", m.name);
            }
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn pushforward_inverts_pullback_to_interpolation_order() {
    let grid = EulerGrid::new(PI, 4.0, 512, 255).unwrap();
    let f = test_fn();
    let v = pullback(|x| f.value(x), 0.7, &grid).unwrap();
    let pts: Vec<Point2> = (0..40).map(|k| Point2::from_polar(0.1 + 0.07 * k as f64, 0.1 + 0.07 * k as f64)).collect();
    let back = pushforward(&v, &pts).unwrap();
    for (x, b) in pts.iter().zip(back) {
        assert!((b - f.value(*x)).abs() < 1e-3, "{x:?}");
    }
}

#[test]
fn reshift_multiplies_by_exponential() {
    let grid = EulerGrid::new(1.0, 2.0, 16, 7).unwrap();
    let f = test_fn();
    let v = pullback(|x| f.value(x), 0.3, &grid).unwrap();
    let w = pullback(|x| f.value(x), -0.4, &grid).unwrap();
    let r = v.reshift(-0.7);
    for k in 0..grid.len() {
        assert!((r.values[k] - w.values[k]).abs() < 1e-13 * w.values[k].abs().max(1e-3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The coefficient table against automatic differentiation of the composition.
    #[test]
    fn table_matches_jet_derivatives(i in 0usize..4, j in 0usize..4, a in -2.0f64..2.0,
                                     z in -1.0f64..1.0, phi in 0.05f64..3.0) {
        let f = test_fn();
        let t = derivative_coeff_table((i, j), a).unwrap();
        let x = Point2::from_polar(z.exp(), phi);
        let lhs = (a * z).exp() * f.derivative(x, i, j);
        let rhs = t.apply(z, phi, |bz, bp| euler_derivative(&f, a, z, phi, bz, bp));
        let scale: f64 = t.entries.iter()
            .map(|(&(bz, bp), p)| (p.eval(phi) * euler_derivative(&f, a, z, phi, bz, bp)).abs())
            .sum::<f64>() * (-((i + j) as f64) * z).exp();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * scale.max(lhs.abs()).max(1e-12), "{} {}", lhs, rhs);
    }

    #[test]
    fn euler_norm_reflection_invariant(seed in 0u64..500, gamma in -0.9f64..2.0, nu_hat in -1.0f64..1.0) {
        let grid = EulerGrid::new(2.5, 3.0, 32, 31).unwrap();
        let s = seed as f64 * 0.01;
        let v = GridFunction::from_euler(grid, 0.0, |z, phi| (-(z - s).powi(2)).exp() * (phi * (2.5 - phi) + s * phi)).unwrap();
        let n = grid.n;
        let mut flipped = v.clone();
        for jj in 0..grid.m {
            for ii in 0..n {
                flipped.values[jj * n + ii] = v.at(jj, n - 1 - ii);
            }
        }
        let a = weighted_lp_norm_euler(&v, gamma, nu_hat, 2.0).unwrap();
        let b = weighted_lp_norm_euler(&flipped, gamma, nu_hat, 2.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn grid_dump_round_trip(m in 2usize..5, n in 4usize..12, a in -2.0f64..2.0, seed in 0u32..100) {
        let grid = EulerGrid::new(1.0 + seed as f64 * 0.05, 1.5, 1 << m, n).unwrap();
        let v = GridFunction::from_euler(grid, a, |z, phi| (z * seed as f64).cos() * phi - 1e-9 * seed as f64).unwrap();
        prop_assert_eq!(GridFunction::from_dump(&v.to_dump()).unwrap(), v);
    }
}
