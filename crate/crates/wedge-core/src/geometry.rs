//! The wedge `D_κ = {(r cos φ, r sin φ) : r > 0, 0 < φ < κ}`, its distance
//! functions, mixed power weights and ball measures.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, WedgeError};
use crate::quad::tanh_sinh;

/// Angular slack when deciding whether a point lies in the closed wedge.
const ANGLE_SLACK: f64 = 1e-12;
/// Absolute tolerance for membership in the excluded ν-lattices.
pub const LATTICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn from_polar(r: f64, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { x1: r * c, x2: r * s }
    }

    pub fn r(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    /// Argument in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        let t = self.x2.atan2(self.x1);
        if t < 0.0 {
            let u = t + TAU;
            if u >= TAU {
                0.0
            } else {
                u
            }
        } else {
            t
        }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }

    pub fn scale(&self, s: f64) -> Point2 {
        Point2::new(s * self.x1, s * self.x2)
    }
}

/// Distance on the unit circle between two angles.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WedgeParams {
    kappa: f64,
}

impl WedgeParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < TAU) {
            return Err(WedgeError::BadAngle(kappa));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `π/κ`, the exponent of the first Dirichlet mode.
    pub fn alpha(&self) -> f64 {
        PI / self.kappa
    }

    pub fn is_interior(&self, x: Point2) -> bool {
        let phi = x.phi();
        x.r() > 0.0 && phi > 0.0 && phi < self.kappa
    }

    /// Angle of `x` if it lies in the closed wedge, with rounding slack.
    fn closed_angle(&self, x: Point2) -> Result<f64> {
        let phi = x.phi();
        if phi <= self.kappa {
            Ok(phi)
        } else if phi <= self.kappa + ANGLE_SLACK {
            Ok(self.kappa)
        } else if TAU - phi <= ANGLE_SLACK {
            Ok(0.0)
        } else {
            Err(WedgeError::OutsideWedge { x1: x.x1, x2: x.x2 })
        }
    }

    /// `ρ_D(x) = dist(x, ∂D)`, the distance to the union of the two rays.
    pub fn dist_boundary(&self, x: Point2) -> Result<f64> {
        if x.r() == 0.0 {
            return Ok(0.0);
        }
        self.closed_angle(x)?;
        let (s, c) = self.kappa.sin_cos();
        let ray = |ex: f64, ey: f64| {
            if x.x1 * ex + x.x2 * ey >= 0.0 {
                (x.x1 * ey - x.x2 * ex).abs()
            } else {
                x.r()
            }
        };
        Ok(ray(1.0, 0.0).min(ray(c, s)))
    }

    /// `ρ_D/ρ∘` on the unit circle: `sin(min(φ, κ-φ, π/2))`.
    pub fn angular_profile(&self, phi: f64) -> f64 {
        let d = phi.min(self.kappa - phi).clamp(0.0, FRAC_PI_2);
        d.sin()
    }

    /// `w_{γ,ν}(x) = ρ∘^{ν-γ} ρ_D^γ`.
    pub fn weight_value(&self, x: Point2, gamma: f64, nu: f64) -> Result<f64> {
        let r = x.r();
        let d = self.dist_boundary(x)?;
        if d == 0.0 && gamma < 0.0 || r == 0.0 && nu - gamma < 0.0 {
            return Err(WedgeError::SingularWeight { x1: x.x1, x2: x.x2 });
        }
        Ok(r.powf(nu - gamma) * d.powf(gamma))
    }

    /// `w_{γ,ν}(B(x, r) ∩ D)`.
    ///
    /// The radial integral over each ray from the vertex is done in closed
    /// form; the remaining angular integral is split at the kinks of the
    /// angular profile and at the tangent directions of the disc, and each
    /// piece is integrated by tanh-sinh quadrature.
    pub fn ball_measure(
        &self,
        x: Point2,
        r: f64,
        gamma: f64,
        nu: f64,
        tol: f64,
    ) -> Result<BallMeasureResult> {
        check_integrable(gamma, nu)?;
        if !(r > 0.0) || !(tol > 0.0) {
            return Err(WedgeError::InvalidParameter("r and tol must be positive".into()));
        }
        let kappa = self.kappa;
        let big_r = x.r();
        let theta_x = if big_r > 0.0 { self.closed_angle(x)? } else { 0.0 };
        let s = nu + 2.0;

        let mut pieces: Vec<(f64, f64)> = Vec::new();
        if big_r <= r {
            if big_r < r {
                pieces.push((0.0, kappa));
            } else {
                push_clipped(&mut pieces, theta_x - FRAC_PI_2, theta_x + FRAC_PI_2, kappa);
            }
        } else {
            let beta = (r / big_r).asin();
            push_clipped(&mut pieces, theta_x - beta, theta_x + beta, kappa);
        }

        let mut cuts = vec![kappa / 2.0];
        if kappa > PI {
            cuts.push(FRAC_PI_2);
            cuts.push(kappa - FRAC_PI_2);
        }

        let radial = |theta: f64| -> f64 {
            if big_r == 0.0 {
                return r.powf(s) / s;
            }
            let mut delta = (theta - theta_x).rem_euclid(TAU);
            if delta > PI {
                delta -= TAU;
            }
            let (sd, cd) = delta.sin_cos();
            let c = big_r * cd;
            let disc = (r - big_r * sd.abs()) * (r + big_r * sd.abs());
            if disc <= 0.0 {
                return 0.0;
            }
            let sq = disc.sqrt();
            let hi = c + sq;
            if hi <= 0.0 {
                return 0.0;
            }
            let lo = c - sq;
            if lo <= 0.0 {
                hi.powf(s) / s
            } else {
                hi.powf(s) * -(s * (-2.0 * sq / hi).ln_1p()).exp_m1() / s
            }
        };

        let mut value = 0.0;
        let mut error = 0.0;
        let mut failed = false;
        for &(a0, b0) in &pieces {
            let mut edges = vec![a0, b0];
            edges.extend(cuts.iter().copied().filter(|&c| c > a0 && c < b0));
            edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
            for e in edges.windows(2) {
                let (a, b) = (e[0], e[1]);
                if b - a <= 0.0 {
                    continue;
                }
                let integrand = |theta: f64, ga: f64, gb: f64| -> f64 {
                    let d0 = if a == 0.0 { ga } else { theta };
                    let d1 = if b == kappa { gb } else { kappa - theta };
                    let h = d0.min(d1).min(FRAC_PI_2).sin();
                    let wa = if gamma == 0.0 { 1.0 } else { h.powf(gamma) };
                    wa * radial(theta)
                };
                match tanh_sinh(integrand, a, b, tol * 0.1, 1e-300, 12) {
                    Ok(q) => {
                        value += q.value;
                        error += q.error;
                    }
                    Err(q) => {
                        value += q.value;
                        error += q.error;
                        failed = true;
                    }
                }
            }
        }
        if failed && error > tol * value {
            return Err(WedgeError::BudgetExceeded { best: value, error });
        }
        Ok(BallMeasureResult { value, abs_error_estimate: error, method: MeasureMethod::AdaptiveQuadrature })
    }

    /// Monte Carlo estimate of `w_{γ,ν}(B(x, r) ∩ D)` with a fixed seed.
    pub fn ball_measure_monte_carlo(
        &self,
        x: Point2,
        r: f64,
        gamma: f64,
        nu: f64,
        samples: usize,
        seed: u64,
    ) -> Result<BallMeasureResult> {
        check_integrable(gamma, nu)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..samples {
            let rho = r * rng.gen::<f64>().sqrt();
            let t = TAU * rng.gen::<f64>();
            let y = Point2::new(x.x1 + rho * t.cos(), x.x2 + rho * t.sin());
            let v = if self.is_interior(y) { self.weight_value(y, gamma, nu)? } else { 0.0 };
            sum += v;
            sum2 += v * v;
        }
        let n = samples as f64;
        let area = PI * r * r;
        let mean = sum / n;
        let var = (sum2 / n - mean * mean).max(0.0);
        Ok(BallMeasureResult {
            value: area * mean,
            abs_error_estimate: area * (var / n).sqrt(),
            method: MeasureMethod::MonteCarlo,
        })
    }

    pub fn doubling_ratio(&self, x: Point2, r: f64, gamma: f64, nu: f64, tol: f64) -> Result<f64> {
        let big = self.ball_measure(x, 2.0 * r, gamma, nu, tol)?;
        let small = self.ball_measure(x, r, gamma, nu, tol)?;
        Ok(big.value / small.value)
    }

    /// Membership of `y` in the windshield `S(x, r)`.
    pub fn windshield_contains(&self, x: Point2, r: f64, y: Point2) -> bool {
        let rx = x.r();
        if (y.r() - rx).abs() >= r {
            return false;
        }
        if rx == 0.0 {
            return true;
        }
        circle_dist(x.phi(), y.phi()) < r / rx
    }

    pub fn classify(&self, spec: &WeightSpec) -> Admissibility {
        classify_admissibility(spec, self)
    }
}

/// Sub-intervals of `[0, κ]` covered by `[lo, hi]` modulo `2π`.
fn push_clipped(out: &mut Vec<(f64, f64)>, lo: f64, hi: f64, kappa: f64) {
    for shift in [-TAU, 0.0, TAU] {
        let a = (lo + shift).max(0.0);
        let b = (hi + shift).min(kappa);
        if b > a {
            out.push((a, b));
        }
    }
}

fn check_integrable(gamma: f64, nu: f64) -> Result<()> {
    if gamma <= -1.0 {
        return Err(WedgeError::NonIntegrable(format!("γ = {gamma} ≤ −1")));
    }
    if nu <= -2.0 {
        return Err(WedgeError::NonIntegrable(format!("ν = {nu} ≤ −2")));
    }
    Ok(())
}

/// `r²(ρ∘(x)+r)^{ν−γ}(ρ_D(x)+r)^γ`, comparable to the ball measure.
pub fn ball_measure_closed_form(w: &WedgeParams, x: Point2, r: f64, gamma: f64, nu: f64) -> Result<f64> {
    check_integrable(gamma, nu)?;
    let d = w.dist_boundary(x)?;
    Ok(r * r * (x.r() + r).powf(nu - gamma) * (d + r).powf(gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMethod {
    AdaptiveQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMeasureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: MeasureMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub gamma: f64,
    pub nu: f64,
    pub p: f64,
}

impl WeightSpec {
    pub fn new(gamma: f64, nu: f64, p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(WedgeError::InvalidParameter(format!("p = {p} must lie in (1, ∞)")));
        }
        if !gamma.is_finite() || !nu.is_finite() {
            return Err(WedgeError::InvalidParameter("non-finite exponent".into()));
        }
        Ok(Self { gamma, nu, p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeSign {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RejectReason {
    GammaNonIntegrable,
    GammaTooLarge,
    GammaCritical,
    ExcludedLattice { n: usize, sign: LatticeSign },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::GammaNonIntegrable => write!(f, "γ ≤ −1 non-integrable"),
            RejectReason::GammaTooLarge => write!(f, "γ ≥ 2p−1"),
            RejectReason::GammaCritical => write!(f, "γ = p−1"),
            RejectReason::ExcludedLattice { n, sign } => {
                let s = match sign {
                    LatticeSign::Minus => '−',
                    LatticeSign::Plus => '+',
                };
                let m = if *n == 1 { String::new() } else { n.to_string() };
                write!(f, "excluded lattice ν = (2{s}{m}π/κ)p−2 (n={n})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    FullCalculus,
    IsomorphismOnly,
    Rejected(RejectReason),
}

impl Admissibility {
    pub fn is_rejected(&self) -> bool {
        matches!(self, Admissibility::Rejected(_))
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Admissibility::FullCalculus => write!(f, "full-calculus"),
            Admissibility::IsomorphismOnly => write!(f, "isomorphism-only"),
            Admissibility::Rejected(r) => write!(f, "rejected: {r}"),
        }
    }
}

/// Nearest lattice point `ν = (2 ± nπ/κ)p − 2` with `n ≥ 1`, if within tolerance.
pub fn lattice_witness(nu: f64, p: f64, w: &WedgeParams) -> Option<(usize, LatticeSign)> {
    let a = (nu + 2.0) / p - 2.0;
    let alpha = w.alpha();
    let n = (a.abs() / alpha).round();
    if n < 1.0 {
        return None;
    }
    if p * (a.abs() - alpha * n).abs() < LATTICE_TOL {
        let sign = if a < 0.0 { LatticeSign::Minus } else { LatticeSign::Plus };
        Some((n as usize, sign))
    } else {
        None
    }
}

pub fn classify_admissibility(spec: &WeightSpec, w: &WedgeParams) -> Admissibility {
    let WeightSpec { gamma, nu, p } = *spec;
    if gamma <= -1.0 {
        return Admissibility::Rejected(RejectReason::GammaNonIntegrable);
    }
    if gamma >= 2.0 * p - 1.0 {
        return Admissibility::Rejected(RejectReason::GammaTooLarge);
    }
    if (gamma - (p - 1.0)).abs() < LATTICE_TOL {
        return Admissibility::Rejected(RejectReason::GammaCritical);
    }
    if let Some((n, sign)) = lattice_witness(nu, p, w) {
        return Admissibility::Rejected(RejectReason::ExcludedLattice { n, sign });
    }
    let alpha = w.alpha();
    if -alpha * p - 2.0 < nu && nu < (2.0 + alpha) * p - 2.0 {
        Admissibility::FullCalculus
    } else {
        Admissibility::IsomorphismOnly
    }
}

/// Power-weight A_p range for `w_{γ,ν}` relative to the base weight `w_{Θ,θ}`.
pub fn ap_power_weight_check(gamma: f64, nu: f64, big_theta: f64, theta: f64, p: f64) -> bool {
    -(1.0 + big_theta) < gamma
        && gamma < (1.0 + big_theta) * (p - 1.0)
        && -(2.0 + theta) < nu
        && nu < (2.0 + theta) * (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let half = WedgeParams::new(PI).unwrap();
        assert!((half.dist_boundary(Point2::new(3.0, 4.0)).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(half.dist_boundary(Point2::ORIGIN).unwrap(), 0.0);
        assert!(half.dist_boundary(Point2::new(1.0, -1.0)).is_err());
        let reflex = WedgeParams::new(1.5 * PI).unwrap();
        assert!((reflex.dist_boundary(Point2::new(-1.0, -1.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weight_examples() {
        let half = WedgeParams::new(PI).unwrap();
        assert!((half.weight_value(Point2::new(0.0, 1.0), 0.7, -0.3).unwrap() - 1.0).abs() < 1e-15);
        assert!((half.weight_value(Point2::new(0.0, 2.0), 1.0, 3.0).unwrap() - 8.0).abs() < 1e-14);
        let quarter = WedgeParams::new(FRAC_PI_2).unwrap();
        assert!((quarter.weight_value(Point2::new(1.0, 1.0), 2.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(half.weight_value(Point2::new(1.0, 0.0), -0.5, 1.0).is_err());
        assert_eq!(half.weight_value(Point2::new(1.0, 0.0), 0.5, 1.0).unwrap(), 0.0);
        assert!(half.weight_value(Point2::ORIGIN, 0.5, 0.2).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let half = WedgeParams::new(PI).unwrap();
        let x = Point2::new(0.0, 1.0);
        assert!((ball_measure_closed_form(&half, x, 0.5, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((ball_measure_closed_form(&half, Point2::ORIGIN, 1.0, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ball_measure_closed_form(&half, x, 10.0, 1.0, 1.0).unwrap() - 1100.0).abs() < 1e-10);
    }

    #[test]
    fn classification_examples() {
        let half = WedgeParams::new(PI).unwrap();
        let c = |g, n| classify_admissibility(&WeightSpec::new(g, n, 2.0).unwrap(), &half);
        assert_eq!(c(0.5, 1.0), Admissibility::FullCalculus);
        assert_eq!(
            c(0.5, 0.0),
            Admissibility::Rejected(RejectReason::ExcludedLattice { n: 1, sign: LatticeSign::Minus })
        );
        assert_eq!(c(1.0, 1.0), Admissibility::Rejected(RejectReason::GammaCritical));
        assert_eq!(c(-1.5, 1.0), Admissibility::Rejected(RejectReason::GammaNonIntegrable));
        assert_eq!(c(0.5, -2.0).is_rejected(), true);
        assert_eq!(c(0.5, 5.0), Admissibility::IsomorphismOnly);
        assert_eq!(
            c(0.5, 6.0),
            Admissibility::Rejected(RejectReason::ExcludedLattice { n: 2, sign: LatticeSign::Plus })
        );
    }

    #[test]
    fn ap_examples() {
        assert!(ap_power_weight_check(0.5, 1.0, 0.0, 0.0, 2.0));
        assert!(!ap_power_weight_check(1.0, 0.0, 0.0, 0.0, 2.0));
        assert!(ap_power_weight_check(0.0, 0.0, 2.0, 1.8, 2.0));
    }
}
