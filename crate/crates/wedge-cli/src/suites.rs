//! The verification suites behind each subcommand.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wedge_core::geometry::{
    ap_power_weight_check, ball_measure_closed_form, Admissibility, Point2, RejectReason, WedgeParams, WeightSpec,
};
use wedge_core::hankel::{
    hankel_analyze, hankel_synthesize, holo_calculus_apply, lp_operator_norm_estimates, multiplier_apply,
    sectoriality_probe, ContourSpec, DecayCertificate, HankelBasis, HankelSpec, RationalEnsembleMember,
};
use wedge_core::kernels::{heat_kernel, image_integral_kernel, images_kernel, kernel_mass, refined_bound_ratio, PolarRule};
use wedge_core::spaces::TestFunctionFamily;
use wedge_core::spectral::{apriori_ratio, residual_report, shift_for, solve_poisson, solve_poisson_euler};
use wedge_core::transforms::{EulerGrid, GridFunction};
use wedge_core::WedgeError;

use crate::config::{RhsSpec, RunConfig, Suite};
use crate::report::{params, Outcome, Reporter};

#[derive(Debug, Clone, PartialEq)]
pub enum Abort {
    NoAdmissible,
    Conditioning { witness: usize, modulus: f64, nu: f64 },
}

#[derive(Debug)]
pub struct SuiteRun {
    pub reporter: Reporter,
    pub abort: Option<Abort>,
}

impl SuiteRun {
    fn done(reporter: Reporter) -> Result<Self> {
        Ok(Self { reporter, abort: None })
    }
}

pub fn run(suite: Suite, cfg: &RunConfig, out: &Path) -> Result<SuiteRun> {
    match suite {
        Suite::Geometry => geometry(cfg),
        Suite::Poisson => poisson(cfg, out),
        Suite::Kernel => kernel(cfg),
        Suite::Calculus => calculus(cfg),
    }
}

/// Classify every `(p, γ, ν)` before any computation, recording rejections.
fn classify_all(rep: &mut Reporter, w: &WedgeParams, ps: &[f64], pairs: &[(f64, f64)]) -> Result<Vec<(WeightSpec, Admissibility)>> {
    let mut out = Vec::new();
    for &p in ps {
        for &(g, n) in pairs {
            let spec = WeightSpec::new(g, n, p)?;
            let class = w.classify(&spec);
            let pr = params([("p", p), ("gamma", g), ("nu", n)]);
            match class {
                Admissibility::Rejected(reason) => rep.reject("classify", pr, reason.to_string()),
                c => rep.check("classify", pr, 1.0, None, true, c.to_string(), Instant::now()),
            }
            out.push((spec, class));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// geometry

fn sweep_points(kappa: f64) -> Vec<Point2> {
    let mut pts = Vec::new();
    for &rho in &[1e-3, 1.0, 30.0] {
        for &frac in &[1e-4, 0.02, 0.5] {
            pts.push(Point2::from_polar(rho, frac * kappa));
        }
    }
    pts
}

/// Extremes of quadrature measure / closed-form surrogate over the sweep.
pub fn measure_ratio_extremes(w: &WedgeParams, gamma: f64, nu: f64, tol: f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for x in sweep_points(w.kappa()) {
        for k in 0..=12 {
            let r = 10f64.powf(-2.0 + k as f64 / 3.0);
            let q = w.ball_measure(x, r, gamma, nu, tol)?.value;
            let c = ball_measure_closed_form(w, x, r, gamma, nu)?;
            lo = lo.min(q / c);
            hi = hi.max(q / c);
        }
    }
    Ok((lo, hi))
}

/// Windshield inclusion violations over `count` random triples.
pub fn windshield_violations(kappa: f64, count: usize, seed: u64) -> Result<usize> {
    let w = WedgeParams::new(kappa)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut bad) = (0usize, 0usize);
    while checked < count {
        let x = Point2::from_polar(10f64.powf(rng.gen_range(-3.0..2.0)), kappa * rng.gen_range(0.001..0.999));
        let r = x.r() * 10f64.powf(rng.gen_range(-2.0..1.5));
        for _ in 0..500 {
            let y = Point2::from_polar((x.r() + 4.0 * r * rng.gen_range(-1.0..1.0)).abs(), kappa * rng.gen_range(0.0..1.0));
            if !w.is_interior(y) {
                continue;
            }
            let d = x.dist(&y);
            let inside = w.windshield_contains(x, r, y);
            if d < r / PI && !inside || inside && d >= 3.0 * r {
                bad += 1;
            }
            checked += 1;
            if checked == count {
                break;
            }
        }
    }
    Ok(bad)
}

fn geometry(cfg: &RunConfig) -> Result<SuiteRun> {
    let mut rep = Reporter::new("geometry", cfg.seed);
    let w = WedgeParams::new(cfg.kappa)?;
    let classes = classify_all(&mut rep, &w, &cfg.p_list, &cfg.pairs)?;
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (s, c) in &classes {
        if !c.is_rejected() && !pairs.contains(&(s.gamma, s.nu)) {
            pairs.push((s.gamma, s.nu));
        }
    }
    if pairs.is_empty() {
        return Ok(SuiteRun { reporter: rep, abort: Some(Abort::NoAdmissible) });
    }
    let kappa = cfg.kappa;

    let t = Instant::now();
    let v = windshield_violations(kappa, 100_000, cfg.seed)?;
    rep.check("windshield", params([("kappa", kappa), ("triples", 1e5)]), v as f64, Some(0.0), v == 0, "", t);

    for &(g, n) in &pairs {
        let pr = || params([("kappa", kappa), ("gamma", g), ("nu", n)]);
        let t = Instant::now();
        let (lo, hi) = measure_ratio_extremes(&w, g, n, 1e-8)?;
        let c = hi.max(1.0 / lo);
        rep.check("ball_measure_factor", pr(), c, Some(cfg.tol.measure_factor), c < cfg.tol.measure_factor, format!("ratio in [{lo:.4}, {hi:.4}]"), t);
        let t = Instant::now();
        let (lo2, hi2) = measure_ratio_extremes(&w, g, n, 1e-10)?;
        let change = (lo2 / lo - 1.0).abs().max((hi2 / hi - 1.0).abs());
        rep.check("ball_measure_refinement", pr(), change, Some(cfg.tol.stability), change < cfg.tol.stability, "", t);

        let t = Instant::now();
        let mut worst: f64 = 0.0;
        for x in sweep_points(kappa) {
            for k in 0..=6 {
                let r = 10f64.powf(-2.0 + k as f64 * 0.5);
                worst = worst.max(w.doubling_ratio(x, r, g, n, 1e-9)?);
            }
        }
        // the surrogate doubles by at most 4·2^{|ν−γ|+|γ|}
        let bound = 4.0 * 2f64.powf((n - g).abs() + g.abs()) * c * c;
        rep.check("doubling", pr(), worst, Some(bound), worst.is_finite() && worst <= bound, "", t);
    }
    for (s, c) in &classes {
        if c.is_rejected() {
            continue;
        }
        let inside = ap_power_weight_check(s.gamma, s.nu, 0.0, 0.0, s.p);
        let note = if inside { "inside A_p range" } else { "outside A_p range" };
        rep.check("ap_range", params([("p", s.p), ("gamma", s.gamma), ("nu", s.nu)]), inside as u8 as f64, None, true, note, Instant::now());
    }
    SuiteRun::done(rep)
}

// ---------------------------------------------------------------------------
// poisson

/// `g = M_2 T_a Δu*` for `u* = e^{−(log r)²} sin(πφ/κ)`.
fn manufactured_rhs(grid: EulerGrid, a: f64) -> Result<GridFunction> {
    let alpha = PI / grid.kappa;
    Ok(GridFunction::from_euler(grid, a + 2.0, |z, phi| {
        let h = (-z * z).exp();
        (a * z).exp() * ((4.0 * z * z - 2.0) * h - alpha * alpha * h) * (alpha * phi).sin()
    })?)
}

fn conditioning_abort(mut rep: Reporter, spec: &WeightSpec, e: WedgeError) -> Result<SuiteRun> {
    match e {
        WedgeError::Conditioning { modulus, witness } => {
            let pr = params([("p", spec.p), ("gamma", spec.gamma), ("nu", spec.nu)]);
            rep.push("conditioning", pr, modulus, None, Outcome::Fail, format!("excluded lattice witness n={witness}"), 0);
            let abort = Abort::Conditioning { witness, modulus, nu: spec.nu };
            Ok(SuiteRun { reporter: rep, abort: Some(abort) })
        }
        e => Err(e.into()),
    }
}

fn poisson(cfg: &RunConfig, out: &Path) -> Result<SuiteRun> {
    let mut rep = Reporter::new("poisson", cfg.seed);
    let w = WedgeParams::new(cfg.kappa)?;
    let kappa = cfg.kappa;
    let classes = classify_all(&mut rep, &w, &cfg.p_list, &cfg.poisson_pairs)?;
    let grid = EulerGrid::new(kappa, cfg.grid.z_half, cfg.grid.m, cfg.grid.n)?;
    for (s, c) in &classes {
        if let Admissibility::Rejected(RejectReason::ExcludedLattice { .. }) = c {
            let e = solve_poisson(|_| 0.0, s, &grid).err().context("lattice weight was accepted by the solver")?;
            return conditioning_abort(rep, s, e);
        }
    }
    let specs: Vec<WeightSpec> = classes.iter().filter(|(_, c)| !c.is_rejected()).map(|(s, _)| *s).collect();
    if specs.is_empty() {
        return Ok(SuiteRun { reporter: rep, abort: Some(Abort::NoAdmissible) });
    }
    let sol_dir = out.join("solutions");
    std::fs::create_dir_all(&sol_dir)?;

    for s in &specs {
        let pr = || params([("kappa", kappa), ("p", s.p), ("gamma", s.gamma), ("nu", s.nu)]);
        let a = shift_for(s.nu, s.p);
        let t = Instant::now();
        let g = manufactured_rhs(grid, a)?;
        let sol = match solve_poisson_euler(&g, s, &w) {
            Ok(v) => v,
            Err(e) => return conditioning_abort(rep, s, e),
        };
        let alpha = PI / kappa;
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..grid.m {
            for i in 0..grid.n {
                let (z, phi) = (grid.z(j), grid.phi(i));
                let e = (a * z).exp() * (-z * z).exp() * (alpha * phi).sin();
                num += (sol.v.at(j, i) - e).powi(2);
                den += e * e;
            }
        }
        let err = (num / den).sqrt();
        let name = format!("poisson_p{}_g{}_nu{}.grid", s.p, s.gamma, s.nu);
        std::fs::write(sol_dir.join(&name), sol.v.to_dump())?;
        rep.check("manufactured", pr(), err, Some(cfg.tol.poisson), err < cfg.tol.poisson, format!("solutions/{name}"), t);

        let t = Instant::now();
        let g2 = g.scaled(2.0);
        let sol2 = solve_poisson_euler(&g2, s, &w)?;
        let dev = sol.coeffs.coeffs.iter().zip(&sol2.coeffs.coeffs).map(|(x, y)| (y - 2.0 * x).norm()).fold(0.0, f64::max);
        rep.check("linearity", pr(), dev, Some(0.0), dev == 0.0, "f vs 2f coefficients", t);

        let t = Instant::now();
        let f = |x: Point2| {
            let (z, phi) = (x.r().ln(), x.phi());
            let h = (-z * z).exp();
            (-2.0 * z).exp() * ((4.0 * z * z - 2.0) * h - alpha * alpha * h) * (alpha * phi).sin()
        };
        let sol_c = solve_poisson(f, s, &grid)?;
        let probes: Vec<Point2> = (0..100)
            .map(|k| {
                let u = k as f64 / 99.0;
                Point2::from_polar((-1.0 + 2.0 * u).exp(), kappa * (0.1 + 0.8 * ((7.0 * u) % 1.0)))
            })
            .collect();
        let r = residual_report(&sol_c, f, &probes, 2e-2);
        rep.check("residual", pr(), r, Some(1e-4), r < 1e-4, "100 interior probes", t);

        if cfg.apriori {
            let t = Instant::now();
            let fam = TestFunctionFamily::standard(kappa);
            let coarse = apriori_ratio(&fam, s, &EulerGrid::new(kappa, 40.0, 512, 64)?)?;
            let fine = apriori_ratio(&fam, s, &EulerGrid::new(kappa, 40.0, 1024, 128)?)?;
            let change = (coarse.max_ratio / fine.max_ratio - 1.0).abs().max((coarse.min_ratio / fine.min_ratio - 1.0).abs());
            let note = format!("extremes [{:.6}, {:.6}]", fine.min_ratio, fine.max_ratio);
            rep.check("apriori_ratio", pr(), change, Some(0.02), change < 0.02 && fine.max_ratio.is_finite(), note, t);
        }
    }

    if cfg.blowup {
        let t = Instant::now();
        let s0 = specs[0];
        let p = s0.p;
        let lattice = (2.0 - PI / kappa) * p - 2.0;
        let fam = TestFunctionFamily { kappa, members: TestFunctionFamily::standard(kappa).members[..1].to_vec() };
        let grid = EulerGrid::new(kappa, 40.0, 512, 32)?;
        let mut ratios = Vec::new();
        for e in 1..=5 {
            let spec = WeightSpec::new(s0.gamma, lattice + 10f64.powi(-e), p)?;
            ratios.push(apriori_ratio(&fam, &spec, &grid)?.max_ratio);
        }
        let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
        let growth = ratios[4] / ratios[0];
        let pr = params([("kappa", kappa), ("p", p), ("gamma", s0.gamma), ("nu_lattice", lattice)]);
        rep.check("excluded_blowup", pr, growth, Some(1e3), monotone && growth >= 1e3, format!("monotone={monotone}"), t);
    }

    if let RhsSpec::File(path) = &cfg.rhs {
        let t = Instant::now();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let g = GridFunction::from_dump(&text)?;
        let s = specs[0];
        let a = shift_for(s.nu, s.p);
        let g = g.reshift(a + 2.0 - g.shift_a);
        let gw = WedgeParams::new(g.grid.kappa)?;
        let sol = match solve_poisson_euler(&g, &s, &gw) {
            Ok(v) => v,
            Err(e) => return conditioning_abort(rep, &s, e),
        };
        let name = format!("file_p{}_g{}_nu{}.grid", s.p, s.gamma, s.nu);
        std::fs::write(sol_dir.join(&name), sol.v.to_dump())?;
        let pr = params([("kappa", g.grid.kappa), ("p", s.p), ("gamma", s.gamma), ("nu", s.nu)]);
        rep.check("solve_file", pr, sol.min_modulus, None, true, format!("solutions/{name}"), t);
    }
    SuiteRun::done(rep)
}

// ---------------------------------------------------------------------------
// kernel

fn random_pairs(kappa: f64, count: usize, seed: u64) -> Vec<(Point2, Point2)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt = |rng: &mut ChaCha8Rng| Point2::from_polar(rng.gen_range(0.2..2.0), kappa * rng.gen_range(0.01..0.99));
    (0..count).map(|_| (pt(&mut rng), pt(&mut rng))).collect()
}

/// `|a − b|`, relative when `|b| > 1e-8`.
fn kernel_discrepancy(a: f64, b: f64) -> f64 {
    if b.abs() > 1e-8 {
        (a - b).abs() / b.abs()
    } else {
        (a - b).abs()
    }
}

/// Sup of the refined-bound ratio over `t ∈ [1e-2, 1e2]` with the given density.
pub fn refined_sup(kappa: f64, lambda: f64, c: f64, pairs: &[(Point2, Point2)], per_decade: usize) -> Result<f64> {
    let n = 4 * per_decade;
    let mut sup: f64 = 0.0;
    for k in 0..=n {
        let t = 10f64.powf(-2.0 + 4.0 * k as f64 / n as f64);
        for &(x, y) in pairs {
            sup = sup.max(refined_bound_ratio(t, x, y, kappa, lambda, c)?);
        }
    }
    Ok(sup)
}

/// Sup over symmetric pairs at distance `10^{-1..-decades}` from the vertex.
pub fn vertex_sup(kappa: f64, lambda: f64, c: f64, decades: i32) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for k in 1..=decades {
        let rho = 10f64.powi(-k);
        for s in [0.3, 0.5, 0.7] {
            let x = Point2::from_polar(rho, s * kappa);
            let y = Point2::from_polar(rho, (1.0 - s) * kappa);
            sup = sup.max(refined_bound_ratio(1.0, x, y, kappa, lambda, c)?);
        }
    }
    Ok(sup)
}

fn kernel(cfg: &RunConfig) -> Result<SuiteRun> {
    let mut rep = Reporter::new("kernel", cfg.seed);
    let kappa = cfg.kappa;
    let pairs = random_pairs(kappa, 50, cfg.seed);
    let times: Vec<f64> = (0..=12).map(|k| 10f64.powf(-2.0 + k as f64 / 4.0)).collect();
    let tol = cfg.tol.kernel;

    let m = (PI / kappa).round();
    if m >= 1.0 && (m * kappa - PI).abs() < 1e-12 {
        let t = Instant::now();
        let mut worst: f64 = 0.0;
        for &(x, y) in &pairs {
            for &s in &times {
                let a = heat_kernel(s, x, y, kappa, 1e-15)?.value;
                worst = worst.max(kernel_discrepancy(a, images_kernel(s, x, y, m as usize)?));
            }
        }
        rep.check("images_oracle", params([("kappa", kappa), ("mirrors", m)]), worst, Some(tol), worst <= tol, "650 (t, x, y)", t);
    }

    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for &(x, y) in pairs.iter().take(20) {
        for &s in times.iter().step_by(3) {
            let a = heat_kernel(s, x, y, kappa, 1e-15)?.value;
            worst = worst.max(kernel_discrepancy(a, image_integral_kernel(s, x, y, kappa)?));
        }
    }
    rep.check("integral_representation", params([("kappa", kappa)]), worst, Some(1e-8), worst <= 1e-8, "", t);

    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5ca1e);
    let (mut scale_err, mut sym_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..48 {
        let x = Point2::from_polar(rng.gen_range(0.2..2.0), kappa * rng.gen_range(0.05..0.95));
        let y = Point2::from_polar(rng.gen_range(0.2..2.0), kappa * rng.gen_range(0.05..0.95));
        let (s, tt) = (rng.gen_range(0.2..5.0), rng.gen_range(0.05..5.0));
        let g = heat_kernel(tt, x, y, kappa, 1e-15)?.value;
        let gs = heat_kernel(s * s * tt, x.scale(s), y.scale(s), kappa, 1e-15)?.value;
        let gt = heat_kernel(tt, y, x, kappa, 1e-15)?.value;
        scale_err = scale_err.max((s * s * gs - g).abs() / g.max(1e-8));
        sym_err = sym_err.max((gt - g).abs() / g.max(1e-8));
    }
    rep.check("parabolic_scaling", params([("kappa", kappa)]), scale_err, Some(1e-11), scale_err <= 1e-11, "48 samples", t);
    rep.check("symmetry", params([("kappa", kappa)]), sym_err, Some(1e-11), sym_err <= 1e-11, "48 samples", Instant::now());

    let t = Instant::now();
    let mut mass: f64 = 0.0;
    for &(s, frac) in &[(0.1f64, 0.5), (0.05, 0.2), (0.2, 0.8)] {
        let y = Point2::from_polar(1.0, frac * kappa);
        let rule = PolarRule { r_lo: 0.0, r_hi: 1.0 + 12.0 * s.sqrt(), r_panels: 24, phi_panels: 24, order: 8 };
        mass = mass.max(kernel_mass(s, y, kappa, &rule)?);
    }
    rep.check("sub_markov", params([("kappa", kappa)]), mass, Some(1.0 + 1e-9), mass <= 1.0 + 1e-9, "", t);

    let lambda = cfg.lambda();
    let c = cfg.c_gauss;
    let t = Instant::now();
    let (a, b) = (refined_sup(kappa, lambda, c, &pairs, 6)?, refined_sup(kappa, lambda, c, &pairs, 12)?);
    let change = (a / b - 1.0).abs();
    let pr = params([("kappa", kappa), ("lambda", lambda), ("c", c)]);
    rep.check("refined_bound", pr, change, Some(cfg.tol.stability), b.is_finite() && change < cfg.tol.stability, format!("sup {b:.6}"), t);

    let t = Instant::now();
    let bad = 1.1 * PI / kappa;
    let growth = vertex_sup(kappa, bad, c, 10)? / vertex_sup(kappa, bad, c, 2)?;
    rep.check("refined_bound_negative", params([("kappa", kappa), ("lambda", bad), ("c", c)]), growth, Some(10.0), growth >= 10.0, "vertex densification", t);
    SuiteRun::done(rep)
}

// ---------------------------------------------------------------------------
// calculus

/// Smooth probe with the Bessel behaviour `r^{nα}` at the vertex.
fn calculus_probe(kappa: f64) -> impl Fn(Point2) -> f64 + Sync {
    let alpha = PI / kappa;
    move |x: Point2| {
        let r = x.r();
        let phi = x.phi();
        (-0.5 * r * r).exp() * (r.powf(alpha) * (alpha * phi).sin() + 0.4 * r.powf(3.0 * alpha) * (3.0 * alpha * phi).sin())
    }
}

fn calculus(cfg: &RunConfig) -> Result<SuiteRun> {
    let mut rep = Reporter::new("calculus", cfg.seed);
    let kappa = cfg.kappa;
    let w = WedgeParams::new(kappa)?;
    let classes = classify_all(&mut rep, &w, &cfg.p_list, &cfg.calculus_pairs)?;
    let specs: Vec<WeightSpec> = classes.iter().filter(|(_, c)| *c == Admissibility::FullCalculus).map(|(s, _)| *s).collect();
    let basis = HankelBasis::new(HankelSpec::standard(kappa))?;
    let g = hankel_analyze(&basis, calculus_probe(kappa));

    let t = Instant::now();
    let f = |z: Complex64| z / ((1.0 + z) * (1.0 + z));
    let cert = DecayCertificate { c: 2.0, eps: 1.0 };
    let direct = multiplier_apply(|s| Complex64::new(s / (1.0 + s).powi(2), 0.0), &g);
    let mut outs = Vec::new();
    let mut err: f64 = 0.0;
    for angle in [PI / 8.0, PI / 6.0, PI / 4.0] {
        let (o, _) = holo_calculus_apply(&f, &cert, PI / 2.0, &ContourSpec::new(angle), &g)?;
        err = err.max(o.sub(&direct).l2_norm() / direct.l2_norm());
        outs.push(o);
    }
    let pr = || params([("kappa", kappa)]);
    rep.check("contour_vs_multiplier", pr(), err, Some(cfg.tol.calculus), err < cfg.tol.calculus, "f = λ/(1+λ)²", t);
    let spread = outs[1..].iter().map(|o| o.sub(&outs[0]).l2_norm() / direct.l2_norm()).fold(0.0, f64::max);
    rep.check("angle_independence", pr(), spread, Some(cfg.tol.angle_independence), spread < cfg.tol.angle_independence, "π/8, π/6, π/4", Instant::now());

    let t = Instant::now();
    let radii: Vec<f64> = (0..=384).map(|k| 10f64.powf(-1.0 + 6.0 * k as f64 / 384.0)).collect();
    let angles = [PI / 6.0, PI / 4.0, PI / 2.0];
    let rows = sectoriality_probe(&basis, &angles, &radii, 32, &specs, cfg.seed)?;
    let ms = t.elapsed().as_millis();
    for row in &rows {
        let d = row.l2_estimate - 1.0 / row.angle.sin();
        let pass = (-1e-3..=1e-6).contains(&d);
        rep.push("sectoriality_l2", params([("kappa", kappa), ("theta", row.angle)]), d, Some(0.0), if pass { Outcome::Pass } else { Outcome::Fail }, format!("estimate {:.9}", row.l2_estimate), ms);
        for (s, v) in specs.iter().zip(&row.weighted) {
            let pr = params([("kappa", kappa), ("theta", row.angle), ("p", s.p), ("gamma", s.gamma), ("nu", s.nu)]);
            rep.check("sectoriality_weighted", pr, *v, None, v.is_finite() && *v > 0.0, "", Instant::now());
        }
    }

    if cfg.operator_norms && !specs.is_empty() {
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let members: Vec<RationalEnsembleMember> = (0..6).map(|_| RationalEnsembleMember::random(&mut rng, PI / 4.0)).collect();
        let coarse = lp_operator_norm_estimates(&basis, &members, &specs, 2, PI / 6.0, cfg.seed)?;
        let fine_basis = HankelBasis::new(HankelSpec::standard(kappa).refined())?;
        let fine = lp_operator_norm_estimates(&fine_basis, &members, &specs, 2, PI / 6.0, cfg.seed)?;
        let ms = t.elapsed().as_millis();
        for (a, b) in coarse.iter().zip(&fine) {
            let change = (a.estimate / b.estimate - 1.0).abs();
            let pass = a.estimate.is_finite() && change < cfg.tol.stability;
            let pr = params([("kappa", kappa), ("p", a.spec.p), ("gamma", a.spec.gamma), ("nu", a.spec.nu)]);
            let outcome = if pass { Outcome::Pass } else { Outcome::Fail };
            rep.push("operator_norm", pr, change, Some(cfg.tol.stability), outcome, format!("estimate {:.6}", b.estimate), ms);
        }
    }

    let t = Instant::now();
    let bump = wedge_core::hankel::bump_function(1.0);
    let cert = DecayCertificate { c: 8.0, eps: 1.0 };
    let (o1, _) = holo_calculus_apply(&bump, &cert, PI / 2.0, &ContourSpec::new(PI / 6.0), &g)?;
    let (o2, _) = holo_calculus_apply(&bump, &cert, PI / 2.0, &ContourSpec::new(PI / 6.0), &g)?;
    let (s1, s2) = (hankel_synthesize(&o1), hankel_synthesize(&o2));
    for s in &specs {
        s1.weighted_lp_norm(s)?;
    }
    let dev = s1.values.iter().zip(&s2.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    rep.check("cross_norm_consistency", params([("kappa", kappa), ("norms", specs.len() as f64)]), dev, Some(0.0), dev == 0.0, "", t);
    SuiteRun::done(rep)
}
