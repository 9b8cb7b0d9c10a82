use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wedge_core::geometry::Point2;
use wedge_core::kernels::*;

fn gauss(t: f64, x: Point2, y: Point2) -> f64 {
    let d2 = (x.x1 - y.x1).powi(2) + (x.x2 - y.x2).powi(2);
    (-d2 / (4.0 * t)).exp() / (4.0 * PI * t)
}

fn half_plane(t: f64, x: Point2, y: Point2) -> f64 {
    gauss(t, x, y) - gauss(t, x, Point2::new(y.x1, -y.x2))
}

fn quadrant(t: f64, x: Point2, y: Point2) -> f64 {
    gauss(t, x, y) - gauss(t, x, Point2::new(y.x1, -y.x2)) - gauss(t, x, Point2::new(-y.x1, y.x2))
        + gauss(t, x, Point2::new(-y.x1, -y.x2))
}

fn pairs(kappa: f64, count: usize, seed: u64) -> Vec<(Point2, Point2)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt = |rng: &mut ChaCha8Rng| Point2::from_polar(rng.gen_range(0.2..2.0), kappa * rng.gen_range(0.01..0.99));
    (0..count).map(|_| (pt(&mut rng), pt(&mut rng))).collect()
}

fn agrees(a: f64, b: f64) -> bool {
    if b.abs() > 1e-8 {
        (a - b).abs() <= 1e-10 * b.abs()
    } else {
        (a - b).abs() <= 1e-10
    }
}

#[test]
fn series_matches_reflection_kernels() {
    let times: Vec<f64> = (0..=12).map(|k| 10f64.powf(-2.0 + k as f64 / 4.0)).collect();
    for (kappa, oracle) in [(PI, half_plane as fn(f64, Point2, Point2) -> f64), (PI / 2.0, quadrant)] {
        for (x, y) in pairs(kappa, 50, 3) {
            for &t in &times {
                let a = heat_kernel(t, x, y, kappa, 1e-15).unwrap().value;
                let b = oracle(t, x, y);
                assert!(agrees(a, b), "κ={kappa} t={t} x={x:?} y={y:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn kernel_is_symmetric_and_nonnegative() {
    for &kappa in &[0.7, PI / 2.0, 2.0, 1.5 * PI, 5.9] {
        for (x, y) in pairs(kappa, 20, 11) {
            for &t in &[0.01, 0.3, 7.0] {
                let a = heat_kernel(t, x, y, kappa, 1e-14).unwrap().value;
                let b = heat_kernel(t, y, x, kappa, 1e-14).unwrap().value;
                assert!(a >= 0.0);
                assert!((a - b).abs() <= 1e-12 * a.max(1e-12), "{a} {b}");
            }
        }
    }
}

#[test]
fn far_pairs_use_image_integral_accurately() {
    // opposite ends of a wide wedge at small time: the mode sum cancels
    let kappa = 1.5 * PI;
    let x = Point2::from_polar(1.0, 0.2);
    let y = Point2::from_polar(1.0, kappa - 0.2);
    let e = heat_kernel(0.02, x, y, kappa, 1e-14).unwrap();
    assert_eq!(e.method, KernelMethod::ImageIntegral);
    assert!(e.value >= 0.0 && e.value < 1e-20);
}

#[test]
fn vanishes_linearly_at_the_boundary() {
    let kappa = 2.0;
    let t: f64 = 0.5;
    let x = Point2::from_polar(1.0, 1.0);
    let slopes: Vec<f64> = (1..=4)
        .map(|k| {
            let eps = 10f64.powi(-k);
            let y = Point2::from_polar(1.2, (eps * t.sqrt() / 1.2).asin());
            heat_kernel(t, x, y, kappa, 1e-14).unwrap().value / eps
        })
        .collect();
    for w in slopes.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 0.02, "{slopes:?}");
    }
    for k in 1..=4 {
        let eps = 10f64.powi(-k);
        let y = Point2::from_polar(1.2, (eps * t.sqrt() / 1.2).asin());
        let r = refined_bound_ratio(t, x, y, kappa, 0.9 * PI / kappa, 0.125).unwrap();
        assert!(r.is_finite() && r < 1e3);
    }
}

#[test]
fn refined_bound_ratio_is_bounded_and_grid_stable() {
    let kappa = PI;
    let lambda = 0.9 * PI / kappa;
    let pp = pairs(kappa, 50, 5);
    let sup = |per_decade: usize| {
        let n = 4 * per_decade;
        (0..=n)
            .flat_map(|k| {
                let t = 10f64.powf(-2.0 + 4.0 * k as f64 / n as f64);
                pp.iter().map(move |&(x, y)| refined_bound_ratio(t, x, y, kappa, lambda, 0.125).unwrap())
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (sup(6), sup(12));
    assert!(a.is_finite() && a > 0.0);
    assert!((a / b - 1.0).abs() < 0.05, "{a} {b}");
}

#[test]
fn refined_bound_fails_above_first_mode_exponent() {
    let kappa = PI;
    let near_vertex_sup = |lambda: f64, decades: i32| {
        (1..=decades)
            .flat_map(|k| {
                let rho = 10f64.powi(-k);
                [0.3, 0.5, 0.7].into_iter().map(move |s| {
                    let x = Point2::from_polar(rho, s * kappa);
                    let y = Point2::from_polar(rho, (1.0 - s) * kappa);
                    refined_bound_ratio(1.0, x, y, kappa, lambda, 0.125).unwrap()
                })
            })
            .fold(0.0, f64::max)
    };
    let bad = 1.1 * PI / kappa;
    assert!(near_vertex_sup(bad, 10) >= 10.0 * near_vertex_sup(bad, 2));
    let good = 0.9 * PI / kappa;
    assert!(near_vertex_sup(good, 10) <= 1.01 * near_vertex_sup(good, 2));
}

#[test]
fn conjugated_and_rearranged_forms() {
    let kappa = 2.5;
    let lambda = 0.9 * PI / kappa;
    let x = Point2::from_polar(0.8, 1.0);
    for &t in &[0.01, 0.1, 1.0, 10.0] {
        let diag = conjugated_gaussian_check(t, x, x, kappa, lambda, 0.125).unwrap();
        assert!(diag.is_finite() && diag > 0.0);
        let r = rearranged_bound_ratio(t, x, Point2::from_polar(1.1, 2.0), kappa, lambda).unwrap();
        assert!(r > 0.05 && r < 20.0, "t={t}: {r}");
    }
    let sup = pairs(kappa, 20, 9)
        .into_iter()
        .flat_map(|(x, y)| [0.03, 0.3, 3.0].map(|t| conjugated_gaussian_check(t, x, y, kappa, lambda, 0.125).unwrap()))
        .fold(0.0, f64::max);
    assert!(sup.is_finite() && sup < 1e3, "{sup}");
}

#[test]
fn heat_loses_mass() {
    for &(kappa, t) in &[(PI, 0.1f64), (2.0, 0.05), (1.5 * PI, 0.2)] {
        let y = Point2::from_polar(1.0, 0.5 * kappa);
        let rule = PolarRule { r_lo: 0.0, r_hi: 1.0 + 12.0 * t.sqrt(), r_panels: 24, phi_panels: 24, order: 8 };
        let m = kernel_mass(t, y, kappa, &rule).unwrap();
        assert!(m <= 1.0 + 1e-9 && m > 0.5, "κ={kappa}: {m}");
    }
}

#[test]
fn semigroup_law_in_the_half_plane() {
    let g = |y: Point2| {
        let r = y.r();
        if !(0.5..=1.5).contains(&r) {
            return 0.0;
        }
        256.0 * ((r - 0.5) * (1.5 - r)).powi(4) * y.phi().sin().powi(2)
    };
    let inner = PolarRule { r_lo: 0.5, r_hi: 1.5, r_panels: 4, phi_panels: 8, order: 8 };
    let outer = PolarRule { r_lo: 0.0, r_hi: 7.0, r_panels: 28, phi_panels: 16, order: 8 };
    let probes = [Point2::from_polar(1.0, 1.0), Point2::from_polar(0.6, 0.4), Point2::from_polar(2.0, 2.5)];
    let k = |t: f64| move |x: Point2, y: Point2| images_kernel(t, x, y, 1);
    let nodes: Vec<Point2> = outer.nodes(PI).unwrap().into_iter().map(|(p, _)| p).collect();
    let mid = semigroup_apply_with(k(0.2), g, PI, &inner, &nodes).unwrap();
    let lookup: std::collections::HashMap<(u64, u64), f64> =
        nodes.iter().zip(&mid).map(|(p, v)| ((p.x1.to_bits(), p.x2.to_bits()), *v)).collect();
    let g2 = |y: Point2| lookup[&(y.x1.to_bits(), y.x2.to_bits())];
    let two_step = semigroup_apply_with(k(0.1), g2, PI, &outer, &probes).unwrap();
    let one_step = semigroup_apply_with(k(0.3), g, PI, &inner, &probes).unwrap();
    for (a, b) in two_step.iter().zip(&one_step) {
        assert!((a - b).abs() < 1e-6, "{a} {b}");
    }
    // the series kernel gives the same single step
    let series = semigroup_apply(0.3, g, PI, &inner, &probes).unwrap();
    for (a, b) in series.iter().zip(&one_step) {
        assert!((a - b).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parabolic_scaling(kappa in 0.5f64..6.0, s in 0.2f64..5.0, t in 0.05f64..5.0,
                         r1 in 0.2f64..2.0, r2 in 0.2f64..2.0, a1 in 0.05f64..0.95, a2 in 0.05f64..0.95) {
        let x = Point2::from_polar(r1, a1 * kappa);
        let y = Point2::from_polar(r2, a2 * kappa);
        let g = heat_kernel(t, x, y, kappa, 1e-15).unwrap().value;
        let gs = heat_kernel(s * s * t, x.scale(s), y.scale(s), kappa, 1e-15).unwrap().value;
        prop_assert!((s * s * gs - g).abs() <= 1e-11 * g.max(1e-8), "{} {}", s * s * gs, g);
    }

    #[test]
    fn reflection_symmetry(kappa in 0.5f64..6.0, t in 0.05f64..5.0,
                           r1 in 0.2f64..2.0, r2 in 0.2f64..2.0, a1 in 0.05f64..0.95, a2 in 0.05f64..0.95) {
        let x = Point2::from_polar(r1, a1 * kappa);
        let y = Point2::from_polar(r2, a2 * kappa);
        let xr = Point2::from_polar(r1, (1.0 - a1) * kappa);
        let yr = Point2::from_polar(r2, (1.0 - a2) * kappa);
        let g = heat_kernel(t, x, y, kappa, 1e-15).unwrap().value;
        let h = heat_kernel(t, xr, yr, kappa, 1e-15).unwrap().value;
        prop_assert!((g - h).abs() <= 1e-11 * g.max(1e-8));
    }
}
