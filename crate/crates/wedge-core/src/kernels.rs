//! Dirichlet heat kernel of the wedge and the pointwise bounds it satisfies.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Result, WedgeError};
use crate::geometry::{ball_measure_closed_form, Point2, WedgeParams};
use crate::quad::{adaptive_gk, composite_rule, geometric_breaks};
use crate::special::bessel_i_scaled;

/// Default truncation tolerance of the Bessel series.
pub const DEFAULT_TOL: f64 = 1e-14;

/// Above this ratio of `Σ|term|` to `|Σ term|` the image-integral form is used.
const CANCELLATION_LIMIT: f64 = 1e4;

const MAX_TERMS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    BesselSeries,
    ImageIntegral,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub t: f64,
    pub x: Point2,
    pub y: Point2,
    pub tol: f64,
    pub value: f64,
    pub terms_used: usize,
    pub method: KernelMethod,
}

/// `|x| / (|x| + √t)`.
pub fn r_factor(t: f64, x: Point2) -> f64 {
    let r = x.r();
    r / (r + t.sqrt())
}

/// `ρ_D(x) / (ρ_D(x) + √t)`.
pub fn j_factor(w: &WedgeParams, t: f64, x: Point2) -> Result<f64> {
    let d = w.dist_boundary(x)?;
    Ok(d / (d + t.sqrt()))
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(WedgeError::InvalidParameter(format!("t = {t} must be positive")));
    }
    Ok(())
}

/// `G_t(x, y)` for the Dirichlet Laplacian on the wedge of opening `kappa`.
///
/// Sum over sine modes of `e^{-(r-r')²/4t} e^{-w} I_{nπ/κ}(w)`, `w = rr'/2t`,
/// truncated once a geometric bound on the tail drops below `tol` times the
/// partial sum. When the sum cancels heavily the finite image sum plus the
/// remaining integral over `u ∈ (0, ∞)` is used instead.
pub fn heat_kernel(t: f64, x: Point2, y: Point2, kappa: f64, tol: f64) -> Result<KernelEval> {
    check_time(t)?;
    if !(tol > 0.0) {
        return Err(WedgeError::InvalidParameter("tol must be positive".into()));
    }
    let wedge = WedgeParams::new(kappa)?;
    let mut out = KernelEval { t, x, y, tol, value: 0.0, terms_used: 0, method: KernelMethod::Boundary };
    let (dx, dy) = (wedge.dist_boundary(x)?, wedge.dist_boundary(y)?);
    if dx == 0.0 || dy == 0.0 || !wedge.is_interior(x) || !wedge.is_interior(y) {
        return Ok(out);
    }
    let (r, rp) = (x.r(), y.r());
    let (phi, phip) = (x.phi(), y.phi());
    let beta = PI / kappa;
    let w = r * rp / (2.0 * t);
    let gauss = (-(r - rp).powi(2) / (4.0 * t)).exp();
    let pref = gauss / (t * kappa);

    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut prev = f64::NAN;
    let mut n = 1usize;
    loop {
        let order = n as f64 * beta;
        let i = bessel_i_scaled(order, w);
        let term = i * (order * phi).sin() * (order * phip).sin();
        sum += term;
        abs_sum += term.abs();
        // I_ν(w) decreases in ν with a decreasing ratio, so past the peak the
        // tail is dominated by a geometric series.
        let rho = if prev.is_nan() || prev == 0.0 { 1.0 } else { i / prev };
        let past_peak = order * order > w;
        if past_peak && rho < 1.0 {
            let tail = i * rho / (1.0 - rho);
            if tail <= tol * sum.abs() || pref * tail < 1e-300 || i == 0.0 {
                break;
            }
        }
        if n >= MAX_TERMS {
            return Err(WedgeError::BudgetExceeded { best: pref * sum, error: pref * i });
        }
        prev = i;
        n += 1;
    }
    out.terms_used = n;
    if abs_sum > CANCELLATION_LIMIT * sum.abs() {
        out.value = image_integral_kernel(t, x, y, kappa)?.max(0.0);
        out.method = KernelMethod::ImageIntegral;
    } else {
        out.value = (pref * sum).max(0.0);
        out.method = KernelMethod::BesselSeries;
    }
    Ok(out)
}

/// Images inside `(−π, π]` plus the correction integral, for the kernel
/// `H(θ) − H(φ+φ')` with `H` the `2κ`-periodic cone kernel.
pub fn image_integral_kernel(t: f64, x: Point2, y: Point2, kappa: f64) -> Result<f64> {
    check_time(t)?;
    let (r, rp) = (x.r(), y.r());
    let (phi, phip) = (x.phi(), y.phi());
    let beta = PI / kappa;
    let w = r * rp / (2.0 * t);

    let images = |theta: f64| -> f64 {
        let mut s = 0.0;
        let jmax = ((theta.abs() + PI) / (2.0 * kappa)).ceil() as i64 + 1;
        for j in -jmax..=jmax {
            let th = theta - 2.0 * kappa * j as f64;
            let weight = if (th.abs() - PI).abs() < 1e-14 {
                0.5
            } else if th.abs() < PI {
                1.0
            } else {
                0.0
            };
            if weight > 0.0 {
                let d2 = (r - rp).powi(2) + 4.0 * r * rp * (0.5 * th).sin().powi(2);
                s += weight * (-d2 / (4.0 * t)).exp();
            }
        }
        s / (4.0 * PI * t)
    };
    let image_part = images(phi - phip) - images(phi + phip);

    // sin x / (2cosh βu − 2cos x), summed over x = β(π ± θ)
    let xs = [
        beta * (PI + (phi - phip)),
        beta * (PI - (phi - phip)),
        beta * (PI + (phi + phip)),
        beta * (PI - (phi + phip)),
    ];
    let signs = [1.0, 1.0, -1.0, -1.0];
    // for integer π/κ the images are exact
    if (beta - beta.round()).abs() < 1e-13 {
        return Ok(image_part);
    }
    let nums: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
    let halves: Vec<f64> = xs.iter().map(|x| (0.5 * x).sin().powi(2)).collect();
    let base = (-(r + rp).powi(2) / (4.0 * t)).exp();
    if base == 0.0 {
        return Ok(image_part);
    }
    let integrand = |u: f64| -> f64 {
        let sh = (0.5 * beta * u).sinh().powi(2);
        let mut f = 0.0;
        for k in 0..4 {
            f += signs[k] * nums[k] / (4.0 * (sh + halves[k]));
        }
        (-w * 2.0 * (0.5 * u).sinh().powi(2)).exp() * f
    };
    let u_max = if w > 0.0 { (1.0 + 60.0 / w).acosh() } else { 60.0 };
    let eps = halves
        .iter()
        .map(|h| 2.0 * h.sqrt() / beta)
        .fold(u_max, f64::min)
        .max(u_max * 1e-12);
    let mut breaks = vec![0.0];
    if eps < u_max {
        breaks.extend(geometric_breaks(eps, u_max, 4.0));
    } else {
        breaks.push(u_max);
    }
    let q = adaptive_gk(integrand, &breaks, 1e-300, 1e-13, 4000).unwrap_or_else(|best| best);
    Ok(image_part - base * q.value / (4.0 * PI * kappa * t))
}

/// Method-of-images kernel for `κ = π/m`: `2m` reflected Gaussians with
/// alternating signs.
pub fn images_kernel(t: f64, x: Point2, y: Point2, m: usize) -> Result<f64> {
    check_time(t)?;
    if m == 0 {
        return Err(WedgeError::InvalidParameter("m must be positive".into()));
    }
    let kappa = PI / m as f64;
    let (rp, phip) = (y.r(), y.phi());
    let mut s = 0.0;
    for j in 0..m {
        let rot = 2.0 * kappa * j as f64;
        s += (-x.dist(&Point2::from_polar(rp, rot + phip)).powi(2) / (4.0 * t)).exp();
        s -= (-x.dist(&Point2::from_polar(rp, rot - phip)).powi(2) / (4.0 * t)).exp();
    }
    Ok(s / (4.0 * PI * t))
}

/// `R_{t,x}^{λ−1} R_{t,y}^{λ−1} J_{t,x} J_{t,y} e^{−c|x−y|²/t} / t`.
pub fn refined_bound(t: f64, x: Point2, y: Point2, kappa: f64, lambda: f64, c: f64) -> Result<f64> {
    let w = WedgeParams::new(kappa)?;
    let rr = (r_factor(t, x) * r_factor(t, y)).powf(lambda - 1.0);
    let jj = j_factor(&w, t, x)? * j_factor(&w, t, y)?;
    Ok(rr * jj * (-c * x.dist(&y).powi(2) / t).exp() / t)
}

/// `G_t(x, y)` divided by [`refined_bound`].
pub fn refined_bound_ratio(t: f64, x: Point2, y: Point2, kappa: f64, lambda: f64, c: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(c > 0.0) {
        return Err(WedgeError::InvalidParameter("λ and c must be positive".into()));
    }
    let g = heat_kernel(t, x, y, kappa, DEFAULT_TOL)?.value;
    let b = refined_bound(t, x, y, kappa, lambda, c)?;
    Ok(if g == 0.0 { 0.0 } else { g / b })
}

/// `G_t / (w_{1,λ}(x) w_{1,λ}(y))` against `e^{−c|x−y|²/t} / w_{2,2λ}(B(x, √t))`,
/// with the closed-form ball measure.
pub fn conjugated_gaussian_check(t: f64, x: Point2, y: Point2, kappa: f64, lambda: f64, c: f64) -> Result<f64> {
    let w = WedgeParams::new(kappa)?;
    let g = heat_kernel(t, x, y, kappa, DEFAULT_TOL)?.value;
    if g == 0.0 {
        return Ok(0.0);
    }
    let conj = g / (w.weight_value(x, 1.0, lambda)? * w.weight_value(y, 1.0, lambda)?);
    let ball = ball_measure_closed_form(&w, x, t.sqrt(), 2.0, 2.0 * lambda)?;
    Ok(conj * ball * (c * x.dist(&y).powi(2) / t).exp())
}

/// Ratio of the ball-measure form of the bound,
/// `w_{1,λ}(x) w_{1,λ}(y) e^{−c|x−y|²/t} / √(w(B(x,√t)) w(B(y,√t)))`
/// with `w = w_{2,2λ}` measured by quadrature, to [`refined_bound`].
pub fn rearranged_bound_ratio(t: f64, x: Point2, y: Point2, kappa: f64, lambda: f64) -> Result<f64> {
    let w = WedgeParams::new(kappa)?;
    let s = t.sqrt();
    let bx = w.ball_measure(x, s, 2.0, 2.0 * lambda, 1e-8)?.value;
    let by = w.ball_measure(y, s, 2.0, 2.0 * lambda, 1e-8)?.value;
    let num = w.weight_value(x, 1.0, lambda)? * w.weight_value(y, 1.0, lambda)? / (bx * by).sqrt();
    // the Gaussian factors cancel, so evaluate both sides at c = 0
    Ok(num / refined_bound(t, x, y, kappa, lambda, 0.0)?)
}

/// Polar product rule for kernel integrals over `r ∈ [r_lo, r_hi]`, `φ ∈ [0, κ]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRule {
    pub r_lo: f64,
    pub r_hi: f64,
    pub r_panels: usize,
    pub phi_panels: usize,
    pub order: usize,
}

impl PolarRule {
    pub fn nodes(&self, kappa: f64) -> Result<Vec<(Point2, f64)>> {
        if !(self.r_lo >= 0.0 && self.r_hi > self.r_lo) || self.r_panels == 0 || self.phi_panels == 0 || self.order == 0 {
            return Err(WedgeError::InvalidParameter("degenerate polar rule".into()));
        }
        let rb: Vec<f64> = (0..=self.r_panels)
            .map(|k| self.r_lo + (self.r_hi - self.r_lo) * k as f64 / self.r_panels as f64)
            .collect();
        let pb: Vec<f64> = (0..=self.phi_panels).map(|k| kappa * k as f64 / self.phi_panels as f64).collect();
        let (rs, rw) = composite_rule(&rb, self.order);
        let (ps, pw) = composite_rule(&pb, self.order);
        let mut out = Vec::with_capacity(rs.len() * ps.len());
        for (r, wr) in rs.iter().zip(&rw) {
            for (p, wp) in ps.iter().zip(&pw) {
                out.push((Point2::from_polar(*r, *p), wr * wp * r));
            }
        }
        Ok(out)
    }
}

/// `∫ K(x, y) g(y) dy` at each probe `x`, over the nodes of `rule`.
pub fn semigroup_apply_with<K, G>(kernel: K, g: G, kappa: f64, rule: &PolarRule, probes: &[Point2]) -> Result<Vec<f64>>
where
    K: Fn(Point2, Point2) -> Result<f64> + Sync,
    G: Fn(Point2) -> f64 + Sync,
{
    let nodes: Vec<(Point2, f64)> = rule
        .nodes(kappa)?
        .into_iter()
        .map(|(y, w)| (y, w * g(y)))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    probes
        .par_iter()
        .map(|&x| nodes.iter().map(|&(y, w)| kernel(x, y).map(|k| k * w)).sum::<Result<f64>>())
        .collect()
}

/// `(e^{−tL} g)(x)` at the probes with the series kernel.
pub fn semigroup_apply<G>(t: f64, g: G, kappa: f64, rule: &PolarRule, probes: &[Point2]) -> Result<Vec<f64>>
where
    G: Fn(Point2) -> f64 + Sync,
{
    check_time(t)?;
    semigroup_apply_with(|x, y| heat_kernel(t, x, y, kappa, DEFAULT_TOL).map(|e| e.value), g, kappa, rule, probes)
}

/// `∫_D G_t(x, y) dx` over the rule's nodes, for a fixed source point `y`.
pub fn kernel_mass(t: f64, y: Point2, kappa: f64, rule: &PolarRule) -> Result<f64> {
    check_time(t)?;
    let nodes = rule.nodes(kappa)?;
    nodes
        .par_iter()
        .map(|&(x, w)| heat_kernel(t, x, y, kappa, DEFAULT_TOL).map(|e| e.value * w))
        .sum()
}

/// Kernel values for many `(t, x, y)` triples.
pub fn heat_kernel_batch(rows: &[(f64, Point2, Point2)], kappa: f64, tol: f64) -> Vec<Result<KernelEval>> {
    rows.par_iter().map(|&(t, x, y)| heat_kernel(t, x, y, kappa, tol)).collect()
}
