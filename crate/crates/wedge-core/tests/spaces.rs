use std::f64::consts::PI;

use proptest::prelude::*;
use wedge_core::geometry::WedgeParams;
use wedge_core::jet::SmoothFn;
use wedge_core::spaces::*;

/// Lanczos `Γ(x)` for `x > 0` (g = 7, n = 9).
fn gamma_fn(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_fn(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `∫₀^π sin^a φ cos^{2b} φ dφ`.
fn trig_moment(a: f64, b: f64) -> f64 {
    gamma_fn((a + 1.0) / 2.0) * gamma_fn(b + 0.5) / gamma_fn((a + 2.0) / 2.0 + b)
}

/// `∫ z^k e^{−2z² + cz} dz` for `k ≤ 2`.
fn gauss_moment(c: f64, k: usize) -> f64 {
    let m = c / 4.0;
    let base = (c * c / 8.0).exp() * (PI / 2.0).sqrt();
    base * [1.0, m, m * m + 0.25][k]
}

/// Hardy ratio for `u = e^{−(log r)²} sin φ` in the half plane, `k = 1`, `p = 2`.
/// There `w_{γ,ν} = r^ν sin^γ φ`, `∂₁u = −e^{−z−z²}(2z+1) sin φ cos φ` and
/// `∂₂u = e^{−z−z²}(cos²φ − 2z sin²φ)`.
fn half_plane_hardy_oracle(gamma: f64, nu: f64) -> f64 {
    let lower = gauss_moment(nu, 0) * trig_moment(gamma, 0.0);
    let zeroth = gauss_moment(nu, 0) * trig_moment(gamma + 2.0, 0.0);
    let d1 = (4.0 * gauss_moment(nu, 2) + 4.0 * gauss_moment(nu, 1) + gauss_moment(nu, 0)) * trig_moment(gamma + 2.0, 1.0);
    let d2 = 4.0 * gauss_moment(nu, 2) * trig_moment(gamma + 4.0, 0.0) - 4.0 * gauss_moment(nu, 1) * trig_moment(gamma + 2.0, 1.0)
        + gauss_moment(nu, 0) * trig_moment(gamma, 2.0);
    lower.sqrt() / (zeroth.sqrt() + d1.sqrt() + d2.sqrt())
}

fn first_member(kappa: f64) -> FamilyMember {
    TestFunctionFamily::standard(kappa).members[0].clone()
}

#[test]
fn oracle_gamma_values() {
    assert!((gamma_fn(0.5) - PI.sqrt()).abs() < 1e-13);
    assert!((gamma_fn(5.0) - 24.0).abs() < 1e-11);
    assert!((trig_moment(1.0, 0.0) - 2.0).abs() < 1e-13);
    assert!((trig_moment(0.0, 1.0) - PI / 2.0).abs() < 1e-13);
}

#[test]
fn hardy_ratio_matches_closed_form_in_half_plane() {
    let wedge = WedgeParams::new(PI).unwrap();
    let u = first_member(PI);
    for (g, n) in [(0.5, 1.0), (0.0, 0.0), (-0.5, -1.0), (0.9, 2.5)] {
        let got = hardy_ratio(&u, 1, 2.0, g, n, &wedge, u.z_range(), 0.0);
        let want = half_plane_hardy_oracle(g, n);
        assert!((got / want - 1.0).abs() < 1e-8, "({g},{n}): {got} vs {want}");
    }
}

#[test]
fn hardy_check_is_bounded_on_the_family() {
    for kappa in [PI / 2.0, PI, 1.5 * PI] {
        let fam = TestFunctionFamily { kappa, members: TestFunctionFamily::standard(kappa).members.into_iter().step_by(3).collect() };
        let r = hardy_check(&fam, 1, 2.0, 0.5, 1.0).unwrap();
        assert!(r.max_ratio.is_finite() && r.max_ratio < 10.0 && r.min_ratio > 0.0, "{r:?}");
    }
}

#[test]
fn hardy_ratio_is_dilation_and_amplitude_invariant() {
    let wedge = WedgeParams::new(2.0).unwrap();
    let u = TestFunctionFamily::standard(2.0).members[5].clone();
    let base = hardy_ratio(&u, 1, 2.0, 0.3, 0.7, &wedge, u.z_range(), 0.0);
    for v in [u.with_shift(1.3), u.with_shift(-2.0), u.with_amplitude(-7.5)] {
        let r = hardy_ratio(&v, 1, 2.0, 0.3, 0.7, &wedge, v.z_range(), 0.0);
        assert!((r / base - 1.0).abs() < 1e-8, "{r} {base}");
    }
}

#[test]
fn hardy_ratio_is_reflection_invariant_in_half_plane() {
    let wedge = WedgeParams::new(PI).unwrap();
    let u = TestFunctionFamily::standard(PI).members[2].clone();
    let a = hardy_ratio(&u, 1, 2.0, 0.5, 1.0, &wedge, u.z_range(), 0.0);
    let b = hardy_ratio(&u.with_reflection(), 1, 2.0, 0.5, 1.0, &wedge, u.z_range(), 0.0);
    assert!((a / b - 1.0).abs() < 1e-9);
}

#[test]
fn hardy_fails_without_dirichlet_trace() {
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let r = hardy_negative_control(PI, 1, 2.0, 0.5, 1.0, &eps).unwrap();
    for w in r.windows(2) {
        assert!(w[1] > w[0], "{r:?}");
    }
    // ∫_ε sin^{γ−2} ~ ε^{γ−1}: growth ε^{(γ−1)/2} per decade
    assert!(r[3] / r[2] > 10f64.powf(0.25) * 0.9, "{r:?}");
    assert!(r[3] > 3.0 * half_plane_hardy_oracle(0.5, 1.0));
}

#[test]
fn kk_norm_dominates_homogeneous_norm() {
    for (kappa, k, g) in [(PI / 2.0, 1, 0.5), (1.5 * PI, 2, 2.0)] {
        let fam = TestFunctionFamily { kappa, members: TestFunctionFamily::standard(kappa).members.into_iter().step_by(5).collect() };
        let r = kk_equivalence_check(&fam, k, 2.0, g, 1.0).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-12 && r.min_ratio > 0.05, "κ={kappa} k={k}: {r:?}");
    }
}

#[test]
fn kk_terms_agree_at_top_order() {
    let wedge = WedgeParams::new(PI).unwrap();
    let u = first_member(PI);
    let t = kk_terms(&u, 2, 2.0, 1.5, 1.0, &wedge, u.z_range());
    // |α| = k carries the same weight in both norms
    for &(h, kk) in &t[3..] {
        assert_eq!(h, kk);
    }
    for &(h, kk) in &t[..3] {
        assert!(h <= kk);
    }
}

#[test]
fn kk_extremes_match_recorded_baseline() {
    // first four members, k = 1, p = 2, γ = 0.5, ν = 1, half plane
    let fam = TestFunctionFamily { kappa: PI, members: TestFunctionFamily::standard(PI).members[..4].to_vec() };
    let r = kk_equivalence_check(&fam, 1, 2.0, 0.5, 1.0).unwrap();
    assert!((r.min_ratio / 8.210_616_798_533e-1 - 1.0).abs() < 1e-8, "{}", r.min_ratio);
    assert!((r.max_ratio / 9.186_440_021_520e-1 - 1.0).abs() < 1e-8, "{}", r.max_ratio);
}

#[test]
fn shifted_family_gives_same_extremes() {
    let fam = TestFunctionFamily { kappa: PI, members: TestFunctionFamily::standard(PI).members[..4].to_vec() };
    let a = kk_equivalence_check(&fam, 1, 2.0, 0.5, 1.0).unwrap();
    let b = kk_equivalence_check(&fam.shifted(0.8), 1, 2.0, 0.5, 1.0).unwrap();
    for (x, y) in a.ratios.iter().zip(&b.ratios) {
        assert!((x / y - 1.0).abs() < 1e-8);
    }
}

#[test]
fn trace_slope_on_reflex_wedge() {
    use wedge_core::transforms::{pullback, EulerGrid};
    let kappa = 1.5 * PI;
    let g = EulerGrid::new(kappa, 3.0, 16, 1023).unwrap();
    let u = FamilyMember::new(kappa, ZProfile::Shifted, AngularProfile::Modes(vec![(1, 1.0), (2, 0.3)]));
    let s = trace_vanishing_check(&pullback(|x| u.value(x), 0.5, &g).unwrap()).unwrap();
    assert!((s - 1.0).abs() < 0.01, "{s}");
}

fn family_ratios() -> &'static [f64] {
    static R: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    R.get_or_init(|| hardy_check(&TestFunctionFamily::standard(PI), 1, 2.0, 0.5, 1.0).unwrap().ratios)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn larger_family_has_larger_sup(mask in 1u16..4096, extra in 0usize..12) {
        let r = family_ratios();
        let sup = |m: u16| (0..12).filter(|i| m >> i & 1 == 1).map(|i| r[i]).fold(0.0, f64::max);
        prop_assert!(sup(mask | 1 << extra) >= sup(mask));
        prop_assert!(sup(4095) >= sup(mask));
    }
}
