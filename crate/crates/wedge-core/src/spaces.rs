//! Test-function families and norm-level checks: Hardy embeddings,
//! Krylov-Kondratiev comparison and boundary decay of traces.

use crate::error::{Result, WedgeError};
use crate::geometry::{Point2, WedgeParams};
use crate::jet::{euler_of, Jet, SmoothFn};
use crate::transforms::{cartesian_weighted_power_cut, multi_indices, GridFunction};

/// Profile in `z = log r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZProfile {
    /// `e^{-z²}`
    Gauss,
    /// `e^{-(z-0.6)²/1.2}`
    Shifted,
    /// `(1 + 0.5 sin 1.3z) e^{-z²/1.5}`
    Modulated,
    /// `e^{-(z/L)²}`
    Wide(f64),
}

impl ZProfile {
    pub fn jet(&self, z: &Jet) -> Jet {
        match *self {
            ZProfile::Gauss => (-(*z * *z)).exp(),
            ZProfile::Shifted => {
                let u = *z - 0.6;
                (-(u * u) / 1.2).exp()
            }
            ZProfile::Modulated => ((*z * 1.3).sin() * 0.5 + 1.0) * (-(*z * *z) / 1.5).exp(),
            ZProfile::Wide(l) => {
                let u = *z / l;
                (-(u * u)).exp()
            }
        }
    }

    /// Half-width of the `z`-interval outside which the profile is below `1e-16`.
    pub fn reach(&self) -> f64 {
        match *self {
            ZProfile::Gauss => 6.1,
            ZProfile::Shifted => 7.0,
            ZProfile::Modulated => 7.6,
            ZProfile::Wide(l) => 6.1 * l,
        }
    }
}

/// Profile in `φ`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularProfile {
    /// `Σ c_m sin(m πφ/κ)`
    Modes(Vec<(u32, f64)>),
    /// `sin²(πφ/κ)`
    SineSquared,
    /// `1`, violating the Dirichlet condition
    Flat,
}

impl AngularProfile {
    pub fn jet(&self, phi: &Jet, alpha: f64) -> Jet {
        match self {
            AngularProfile::Modes(modes) => {
                let mut acc = *phi * 0.0;
                for &(m, c) in modes {
                    acc += (*phi * (m as f64 * alpha)).sin() * c;
                }
                acc
            }
            AngularProfile::SineSquared => {
                let s = (*phi * alpha).sin();
                s * s
            }
            AngularProfile::Flat => *phi * 0.0 + 1.0,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        !matches!(self, AngularProfile::Flat)
    }
}

/// `u(x) = Z(log|x| − z₀) Θ(φ)`, optionally with `φ` replaced by `κ − φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub name: String,
    pub kappa: f64,
    pub z_profile: ZProfile,
    pub angular: AngularProfile,
    pub z_shift: f64,
    pub reflected: bool,
    pub amplitude: f64,
}

impl FamilyMember {
    pub fn new(kappa: f64, z_profile: ZProfile, angular: AngularProfile) -> Self {
        Self {
            name: format!("{z_profile:?}×{angular:?}"),
            kappa,
            z_profile,
            angular,
            z_shift: 0.0,
            reflected: false,
            amplitude: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        std::f64::consts::PI / self.kappa
    }

    /// Evaluation in Euler variables, as jets in `(z, φ)`.
    pub fn euler_jet(&self, z: &Jet, phi: &Jet) -> Jet {
        let zz = *z - self.z_shift;
        let ph = if self.reflected { self.kappa - *phi } else { *phi };
        self.z_profile.jet(&zz) * self.angular.jet(&ph, self.alpha()) * self.amplitude
    }

    pub fn euler_value(&self, z: f64, phi: f64) -> f64 {
        self.euler_jet(&Jet::constant(z, 0), &Jet::constant(phi, 0)).value()
    }

    /// `log r` range carrying all of the mass.
    pub fn z_range(&self) -> (f64, f64) {
        let w = self.z_profile.reach();
        let c = self.z_shift + if self.z_profile == ZProfile::Shifted { 0.6 } else { 0.0 };
        (c - w, c + w)
    }

    pub fn is_dirichlet(&self) -> bool {
        self.angular.is_dirichlet()
    }

    pub fn with_shift(&self, z0: f64) -> Self {
        Self { z_shift: self.z_shift + z0, ..self.clone() }
    }

    pub fn with_reflection(&self) -> Self {
        Self { reflected: !self.reflected, ..self.clone() }
    }

    pub fn with_amplitude(&self, c: f64) -> Self {
        Self { amplitude: self.amplitude * c, ..self.clone() }
    }
}

impl SmoothFn for FamilyMember {
    fn jet(&self, x1: &Jet, x2: &Jet) -> Jet {
        let (z, phi) = euler_of(x1, x2);
        self.euler_jet(&z, &phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionFamily {
    pub kappa: f64,
    pub members: Vec<FamilyMember>,
}

impl TestFunctionFamily {
    /// The fixed twelve-member family: three `z`-profiles times four angular profiles.
    pub fn standard(kappa: f64) -> Self {
        let zs = [ZProfile::Gauss, ZProfile::Shifted, ZProfile::Modulated];
        let angs = [
            AngularProfile::Modes(vec![(1, 1.0)]),
            AngularProfile::Modes(vec![(2, 1.0)]),
            AngularProfile::Modes(vec![(1, 1.0), (3, 0.4)]),
            AngularProfile::Modes(vec![(1, 1.0), (2, -0.3), (4, 0.15)]),
        ];
        let mut members = Vec::new();
        for z in zs {
            for a in &angs {
                members.push(FamilyMember::new(kappa, z, a.clone()));
            }
        }
        Self { kappa, members }
    }

    pub fn reflected(&self) -> Self {
        Self { members: self.members.iter().map(|m| m.with_reflection()).collect(), ..self.clone() }
    }

    pub fn shifted(&self, z0: f64) -> Self {
        Self { members: self.members.iter().map(|m| m.with_shift(z0)).collect(), ..self.clone() }
    }
}

/// `Σ_{|α|≤k} ‖D^α u‖_{L^p(w_{γ_α, ν_α})}` with exponents chosen per order,
/// integrating over `φ ∈ (ε, κ−ε)`.
pub fn graded_norm<F, E>(u: &F, k: usize, p: f64, exps: E, wedge: &WedgeParams, z: (f64, f64), eps: f64) -> f64
where
    F: SmoothFn,
    E: Fn(usize) -> (f64, f64),
{
    let mut total = 0.0;
    for order in 0..=k {
        let (g, n) = exps(order);
        for (i, j) in multi_indices(order) {
            let pw = cartesian_weighted_power_cut(|x: Point2| u.derivative(x, i, j), wedge, g, n, p, z.0, z.1, eps);
            total += pw.powf(1.0 / p);
        }
    }
    total
}

/// `Ẇ^{k,p}(γ,ν)` norm: `Σ_{|α|≤k} ‖D^α u‖_{w_{γ, ν+(|α|−k)p}}`.
pub fn homogeneous_norm<F: SmoothFn>(
    u: &F,
    k: usize,
    p: f64,
    gamma: f64,
    nu: f64,
    wedge: &WedgeParams,
    z: (f64, f64),
    eps: f64,
) -> f64 {
    graded_norm(u, k, p, |o| (gamma, nu + (o as f64 - k as f64) * p), wedge, z, eps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

impl RatioReport {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        Self { ratios, max_ratio, min_ratio }
    }
}

fn check_dirichlet_range(k: usize, p: f64, gamma: f64) -> Result<()> {
    if k == 0 {
        return Err(WedgeError::InvalidParameter("k must be at least 1".into()));
    }
    let lo = (k as f64 - 1.0) * p - 1.0;
    let hi = k as f64 * p - 1.0;
    if !(lo < gamma && gamma < hi) {
        return Err(WedgeError::InvalidParameter(format!(
            "γ = {gamma} outside ({lo}, {hi}) for k = {k}, p = {p}"
        )));
    }
    Ok(())
}

/// `‖u‖_{Ẇ^{k−1,p}(γ−p, ν−p)} / ‖u‖_{Ẇ^{k,p}(γ, ν)}` for one function.
#[allow(clippy::too_many_arguments)]
pub fn hardy_ratio<F: SmoothFn>(
    u: &F,
    k: usize,
    p: f64,
    gamma: f64,
    nu: f64,
    wedge: &WedgeParams,
    z: (f64, f64),
    eps: f64,
) -> f64 {
    let lower = homogeneous_norm(u, k - 1, p, gamma - p, nu - p, wedge, z, eps);
    let upper = homogeneous_norm(u, k, p, gamma, nu, wedge, z, eps);
    lower / upper
}

/// Largest Hardy ratio over the family.
pub fn hardy_check(family: &TestFunctionFamily, k: usize, p: f64, gamma: f64, nu: f64) -> Result<RatioReport> {
    check_dirichlet_range(k, p, gamma)?;
    let wedge = WedgeParams::new(family.kappa)?;
    let ratios = family
        .members
        .iter()
        .map(|m| hardy_ratio(m, k, p, gamma, nu, &wedge, m.z_range(), 0.0))
        .collect();
    Ok(RatioReport::from_ratios(ratios))
}

/// Hardy ratio of a function with non-vanishing trace, with the angular
/// integration cut off at distance `ε` from the boundary.
pub fn hardy_negative_control(kappa: f64, k: usize, p: f64, gamma: f64, nu: f64, eps: &[f64]) -> Result<Vec<f64>> {
    let wedge = WedgeParams::new(kappa)?;
    let u = FamilyMember::new(kappa, ZProfile::Gauss, AngularProfile::Flat);
    Ok(eps.iter().map(|&e| hardy_ratio(&u, k, p, gamma, nu, &wedge, u.z_range(), e)).collect())
}

/// Per-order terms of the homogeneous norm and of the Krylov-Kondratiev norm
/// `Σ_{|α|≤k} ‖D^α u‖_{w_{γ+(|α|−k)p, ν+(|α|−k)p}}`.
pub fn kk_terms<F: SmoothFn>(
    u: &F,
    k: usize,
    p: f64,
    gamma: f64,
    nu: f64,
    wedge: &WedgeParams,
    z: (f64, f64),
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for order in 0..=k {
        let shift = (order as f64 - k as f64) * p;
        for (i, j) in multi_indices(order) {
            let d = |x: Point2| u.derivative(x, i, j);
            let hom = cartesian_weighted_power_cut(d, wedge, gamma, nu + shift, p, z.0, z.1, 0.0);
            let kk = cartesian_weighted_power_cut(d, wedge, gamma + shift, nu + shift, p, z.0, z.1, 0.0);
            out.push((hom.powf(1.0 / p), kk.powf(1.0 / p)));
        }
    }
    out
}

/// Extremes over the family of homogeneous norm / Krylov-Kondratiev norm.
pub fn kk_equivalence_check(family: &TestFunctionFamily, k: usize, p: f64, gamma: f64, nu: f64) -> Result<RatioReport> {
    check_dirichlet_range(k, p, gamma)?;
    let wedge = WedgeParams::new(family.kappa)?;
    let ratios = family
        .members
        .iter()
        .map(|m| {
            let t = kk_terms(m, k, p, gamma, nu, &wedge, m.z_range());
            let hom: f64 = t.iter().map(|x| x.0).sum();
            let kk: f64 = t.iter().map(|x| x.1).sum();
            hom / kk
        })
        .collect();
    Ok(RatioReport::from_ratios(ratios))
}

/// Least-squares slope of `log|v|` against `log dist(φ, {0, κ})` over nodes
/// with `dist ∈ [κ/256, κ/32]`, averaged over rows where `v` is non-negligible.
pub fn trace_vanishing_check(v: &GridFunction) -> Result<f64> {
    let g = v.grid;
    let (lo, hi) = (g.kappa / 256.0, g.kappa / 32.0);
    let idx: Vec<(usize, f64)> = (0..g.n)
        .filter_map(|i| {
            let phi = g.phi(i);
            let d = phi.min(g.kappa - phi);
            (d >= lo * (1.0 - 1e-12) && d <= hi * (1.0 + 1e-12)).then_some((i, d.ln()))
        })
        .collect();
    if idx.len() < 4 {
        return Err(WedgeError::InvalidParameter(format!(
            "N = {} leaves fewer than four nodes in the decay window",
            g.n
        )));
    }
    let scale = v.max_abs();
    let mut slopes = Vec::new();
    for j in 0..g.m {
        let pts: Vec<(f64, f64)> = idx
            .iter()
            .filter_map(|&(i, ld)| {
                let a = v.at(j, i).abs();
                (a > 1e-8 * scale).then(|| (ld, a.ln()))
            })
            .collect();
        if pts.len() < idx.len() {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        slopes.push(sxy / sxx);
    }
    if slopes.is_empty() {
        return Err(WedgeError::InvalidParameter("no rows with significant values".into()));
    }
    Ok(slopes.iter().sum::<f64>() / slopes.len() as f64)
}
