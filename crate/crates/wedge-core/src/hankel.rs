//! Hankel-sine diagonalisation of the Dirichlet Laplacian `L = −Δ` on the
//! wedge, resolvents, sectoriality probes and contour-integral functional
//! calculus.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, WedgeError};
use crate::geometry::{Point2, WedgeParams, WeightSpec};
use crate::quad::{composite_rule, geometric_breaks, tanh_sinh_nodes};
use crate::special::bessel_j;

/// Resolution of a Hankel-sine discretisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelSpec {
    pub kappa: f64,
    /// Sine modes `n = 1..=modes`.
    pub modes: usize,
    /// Interior angular samples used by the sine analysis.
    pub phi_nodes: usize,
    pub r_max: f64,
    /// Panel width of the uniform part of the radial rule.
    pub r_panel: f64,
    pub mu_max: f64,
    pub mu_panel: f64,
    /// Gauss-Legendre order per panel.
    pub order: usize,
}

impl HankelSpec {
    /// Sized for the unit-scale probe functions used throughout.
    pub fn standard(kappa: f64) -> Self {
        Self { kappa, modes: 6, phi_nodes: 64, r_max: 30.0, r_panel: 0.5, mu_max: 14.0, mu_panel: 0.25, order: 12 }
    }

    /// Halved panel widths.
    pub fn refined(&self) -> Self {
        Self { r_panel: 0.5 * self.r_panel, mu_panel: 0.5 * self.mu_panel, ..*self }
    }

    fn validate(&self) -> Result<()> {
        WedgeParams::new(self.kappa)?;
        let ok = self.modes >= 1
            && self.phi_nodes >= self.modes
            && self.r_max > 1.0
            && self.r_panel > 0.0
            && self.mu_max > 1.0
            && self.mu_panel > 0.0
            && self.order >= 2;
        if !ok {
            return Err(WedgeError::InvalidParameter(format!("unusable Hankel resolution {self:?}")));
        }
        Ok(())
    }
}

/// Composite rule on `[0, hi]`: geometric panels below `knee`, uniform above.
fn graded_rule(hi: f64, knee: f64, panel: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut breaks = vec![0.0];
    breaks.extend(geometric_breaks(knee * 1e-4, knee, 2.0));
    let panels = ((hi - knee) / panel).ceil().max(1.0) as usize;
    for k in 1..=panels {
        breaks.push(knee + (hi - knee) * k as f64 / panels as f64);
    }
    composite_rule(&breaks, order)
}

/// Quadrature nodes and the table `J_{nπ/κ}(μ_q r_j)` shared by analysis and
/// synthesis.
#[derive(Debug)]
pub struct HankelBasis {
    pub spec: HankelSpec,
    pub r: Vec<f64>,
    pub r_w: Vec<f64>,
    pub mu: Vec<f64>,
    pub mu_w: Vec<f64>,
    jtab: Vec<f64>,
}

impl HankelBasis {
    pub fn new(spec: HankelSpec) -> Result<Arc<Self>> {
        spec.validate()?;
        let (r, r_w) = graded_rule(spec.r_max, 0.5, spec.r_panel, spec.order);
        let (mu, mu_w) = graded_rule(spec.mu_max, 0.25, spec.mu_panel, spec.order);
        let beta = PI / spec.kappa;
        let (nr, nq) = (r.len(), mu.len());
        let mut jtab = vec![0.0; spec.modes * nr * nq];
        jtab.par_chunks_mut(nq).enumerate().for_each(|(row, out)| {
            let (n, j) = (row / nr + 1, row % nr);
            let order = n as f64 * beta;
            for (o, m) in out.iter_mut().zip(&mu) {
                *o = bessel_j(order, m * r[j]);
            }
        });
        Ok(Arc::new(Self { spec, r, r_w, mu, mu_w, jtab }))
    }

    pub fn beta(&self) -> f64 {
        PI / self.spec.kappa
    }

    #[inline]
    fn j_row(&self, n: usize, j: usize) -> &[f64] {
        let nq = self.mu.len();
        let start = ((n - 1) * self.r.len() + j) * nq;
        &self.jtab[start..start + nq]
    }
}

/// `ĝ(n, μ_q)`, row-major by mode.
#[derive(Debug, Clone)]
pub struct HankelField {
    pub basis: Arc<HankelBasis>,
    pub coeffs: Vec<Complex64>,
}

/// Angular sine coefficients `g_n(r_j)` on the radial nodes, row-major by mode.
#[derive(Debug, Clone)]
pub struct RadialProfiles {
    pub basis: Arc<HankelBasis>,
    pub values: Vec<Complex64>,
}

impl HankelField {
    pub fn zeros(basis: &Arc<HankelBasis>) -> Self {
        Self { basis: basis.clone(), coeffs: vec![Complex64::new(0.0, 0.0); basis.spec.modes * basis.mu.len()] }
    }

    /// Build directly from `ĝ(n, μ)`.
    pub fn from_fn<F: Fn(usize, f64) -> Complex64>(basis: &Arc<HankelBasis>, f: F) -> Self {
        let nq = basis.mu.len();
        let coeffs = (0..basis.spec.modes * nq).map(|k| f(k / nq + 1, basis.mu[k % nq])).collect();
        Self { basis: basis.clone(), coeffs }
    }

    pub fn get(&self, n: usize, q: usize) -> Complex64 {
        self.coeffs[(n - 1) * self.basis.mu.len() + q]
    }

    /// Multiply every coefficient by `m(μ²)`.
    pub fn map_multiplier<M: Fn(f64) -> Complex64>(&self, m: M) -> Self {
        let nq = self.basis.mu.len();
        let table: Vec<Complex64> = self.basis.mu.iter().map(|&u| m(u * u)).collect();
        let coeffs = self.coeffs.iter().enumerate().map(|(k, c)| c * table[k % nq]).collect();
        Self { basis: self.basis.clone(), coeffs }
    }

    /// `Σ_n ∫ |ĝ|² μ dμ` weighted by `κ/2`, i.e. `‖g‖²_{L²}`.
    pub fn l2_norm(&self) -> f64 {
        let b = &self.basis;
        let nq = b.mu.len();
        let s: f64 = self.coeffs.iter().enumerate().map(|(k, c)| b.mu_w[k % nq] * b.mu[k % nq] * c.norm_sqr()).sum();
        (0.5 * b.spec.kappa * s).sqrt()
    }

    /// Energy in each sine mode.
    pub fn mode_norms(&self) -> Vec<f64> {
        let b = &self.basis;
        let nq = b.mu.len();
        (0..b.spec.modes)
            .map(|n| {
                let s: f64 = (0..nq).map(|q| b.mu_w[q] * b.mu[q] * self.coeffs[n * nq + q].norm_sqr()).sum();
                (0.5 * b.spec.kappa * s).sqrt()
            })
            .collect()
    }

    pub fn sub(&self, other: &HankelField) -> HankelField {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Self { basis: self.basis.clone(), coeffs }
    }
}

impl RadialProfiles {
    /// `‖g‖_{L²}` from the radial rule.
    pub fn l2_norm(&self) -> f64 {
        let b = &self.basis;
        let nr = b.r.len();
        let s: f64 = self.values.iter().enumerate().map(|(k, v)| b.r_w[k % nr] * b.r[k % nr] * v.norm_sqr()).sum();
        (0.5 * b.spec.kappa * s).sqrt()
    }

    /// `g(r_j, φ)` for one radial node.
    pub fn value(&self, j: usize, phi: f64) -> Complex64 {
        let b = &self.basis;
        let beta = b.beta();
        let nr = b.r.len();
        (1..=b.spec.modes).map(|n| self.values[(n - 1) * nr + j] * (n as f64 * beta * phi).sin()).sum()
    }

    /// `(∫∫ |g|^p ρ∘^{ν−γ} ρ_D^γ r dr dφ)^{1/p}` on the radial rule; the
    /// angular integral uses tanh-sinh nodes on pieces split at the kinks of
    /// `ρ_D/ρ∘`.
    pub fn weighted_lp_norm(&self, spec: &WeightSpec) -> Result<f64> {
        let b = &self.basis;
        let kappa = b.spec.kappa;
        if spec.gamma <= -1.0 {
            return Err(WedgeError::NonIntegrable(format!("γ = {} ≤ −1", spec.gamma)));
        }
        let mut cuts = vec![0.0, kappa / 2.0, kappa];
        if kappa > PI {
            cuts = vec![0.0, PI / 2.0, kappa / 2.0, kappa - PI / 2.0, kappa];
        }
        let mut ang: Vec<(f64, f64)> = Vec::new();
        for w in cuts.windows(2) {
            for (phi, ga, gb, wt) in tanh_sinh_nodes(w[0], w[1], 5) {
                // gap to the nearest wedge edge, exact near both ends
                let gap = if w[0] == 0.0 { ga } else if w[1] == kappa { gb } else { phi.min(kappa - phi) };
                let h = gap.min(PI / 2.0).sin();
                ang.push((phi, wt * h.powf(spec.gamma)));
            }
        }
        let beta = b.beta();
        let nr = b.r.len();
        let modes = b.spec.modes;
        let sines: Vec<Vec<f64>> = ang.iter().map(|(phi, _)| (1..=modes).map(|n| (n as f64 * beta * phi).sin()).collect()).collect();
        let total: f64 = (0..nr)
            .into_par_iter()
            .map(|j| {
                let r = b.r[j];
                let mut s = 0.0;
                for (k, (_, wt)) in ang.iter().enumerate() {
                    let mut v = Complex64::new(0.0, 0.0);
                    for n in 0..modes {
                        v += self.values[n * nr + j] * sines[k][n];
                    }
                    s += wt * v.norm().powf(spec.p);
                }
                b.r_w[j] * r.powf(spec.nu + 1.0) * s
            })
            .sum();
        Ok(total.powf(1.0 / spec.p))
    }
}

/// Sample `g` on the radial nodes and project onto sine modes.
pub fn sample_profiles<G: Fn(Point2) -> f64 + Sync>(basis: &Arc<HankelBasis>, g: G) -> RadialProfiles {
    let spec = &basis.spec;
    let p = spec.phi_nodes;
    let beta = basis.beta();
    let phis: Vec<f64> = (1..=p).map(|i| spec.kappa * i as f64 / (p + 1) as f64).collect();
    let nr = basis.r.len();
    let rows: Vec<Vec<f64>> = (0..nr)
        .into_par_iter()
        .map(|j| {
            let samples: Vec<f64> = phis.iter().map(|&phi| g(Point2::from_polar(basis.r[j], phi))).collect();
            (1..=spec.modes)
                .map(|n| {
                    let s: f64 = samples.iter().zip(&phis).map(|(v, phi)| v * (n as f64 * beta * phi).sin()).sum();
                    2.0 * s / (p + 1) as f64
                })
                .collect()
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); spec.modes * nr];
    for (j, row) in rows.iter().enumerate() {
        for (n, v) in row.iter().enumerate() {
            values[n * nr + j] = Complex64::new(*v, 0.0);
        }
    }
    RadialProfiles { basis: basis.clone(), values }
}

/// `ĝ(n, μ) = ∫ g_n(r) J_{nπ/κ}(μr) r dr`.
pub fn hankel_analyze_profiles(g: &RadialProfiles) -> HankelField {
    let b = &g.basis;
    let (nr, nq) = (b.r.len(), b.mu.len());
    let mut coeffs = vec![Complex64::new(0.0, 0.0); b.spec.modes * nq];
    coeffs.par_chunks_mut(nq).enumerate().for_each(|(n0, out)| {
        for j in 0..nr {
            let gv = g.values[n0 * nr + j] * (b.r_w[j] * b.r[j]);
            if gv == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, jv) in out.iter_mut().zip(b.j_row(n0 + 1, j)) {
                *o += gv * jv;
            }
        }
    });
    HankelField { basis: b.clone(), coeffs }
}

/// Hankel-sine coefficients of a function given pointwise.
pub fn hankel_analyze<G: Fn(Point2) -> f64 + Sync>(basis: &Arc<HankelBasis>, g: G) -> HankelField {
    hankel_analyze_profiles(&sample_profiles(basis, g))
}

/// Radial profiles `g_n(r_j) = ∫ ĝ(n, μ) J(μ r_j) μ dμ`.
pub fn hankel_synthesize(c: &HankelField) -> RadialProfiles {
    let b = &c.basis;
    let (nr, nq) = (b.r.len(), b.mu.len());
    let mut values = vec![Complex64::new(0.0, 0.0); b.spec.modes * nr];
    let weighted: Vec<Complex64> = c.coeffs.iter().enumerate().map(|(k, v)| v * (b.mu_w[k % nq] * b.mu[k % nq])).collect();
    values.par_chunks_mut(nr).enumerate().for_each(|(n0, out)| {
        let cw = &weighted[n0 * nq..(n0 + 1) * nq];
        for (j, o) in out.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (a, jv) in cw.iter().zip(b.j_row(n0 + 1, j)) {
                s += a * jv;
            }
            *o = s;
        }
    });
    RadialProfiles { basis: b.clone(), values }
}

/// Synthesis at arbitrary points, with direct Bessel evaluations.
pub fn hankel_synthesize_at(c: &HankelField, points: &[Point2]) -> Vec<Complex64> {
    let b = &c.basis;
    let nq = b.mu.len();
    let beta = b.beta();
    points
        .par_iter()
        .map(|x| {
            let (r, phi) = (x.r(), x.phi());
            let mut total = Complex64::new(0.0, 0.0);
            for n in 1..=b.spec.modes {
                let order = n as f64 * beta;
                let mut s = Complex64::new(0.0, 0.0);
                for q in 0..nq {
                    s += c.coeffs[(n - 1) * nq + q] * (b.mu_w[q] * b.mu[q] * bessel_j(order, b.mu[q] * r));
                }
                total += s * (order * phi).sin();
            }
            total
        })
        .collect()
}

fn check_resolvent_point(lambda: Complex64) -> Result<()> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) || (lambda.im == 0.0 && lambda.re >= 0.0) {
        return Err(WedgeError::InvalidParameter(format!("λ = {lambda} lies on the spectrum [0, ∞)")));
    }
    Ok(())
}

/// `R(λ, L) g = (λ − L)^{−1} g`.
pub fn resolvent_apply(lambda: Complex64, g: &HankelField) -> Result<HankelField> {
    check_resolvent_point(lambda)?;
    Ok(g.map_multiplier(|s| 1.0 / (lambda - s)))
}

/// `‖λ R(λ, L) g‖ / ‖g‖` in `L²`, evaluated on the transform side.
pub fn resolvent_l2_ratio(lambda: Complex64, g: &HankelField) -> Result<f64> {
    check_resolvent_point(lambda)?;
    Ok(g.map_multiplier(|s| lambda / (lambda - s)).l2_norm() / g.l2_norm())
}

/// A narrow Gaussian packet `e^{−(μ−μ_c)²/2δ²}` in mode `n`.
pub fn spectral_packet(basis: &Arc<HankelBasis>, n: usize, mu_c: f64, width: f64) -> HankelField {
    HankelField::from_fn(basis, |m, mu| {
        if m == n {
            Complex64::new((-(mu - mu_c).powi(2) / (2.0 * width * width)).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Smooth probe function: `Σ_n a_n r^{nπ/κ} e^{−r²/2s_n²} sin(nπφ/κ)` with random
/// `a_n` and `s_n ∈ [0.7, 1.4]`.
pub fn random_probe(kappa: f64, modes: usize, rng: &mut ChaCha8Rng) -> impl Fn(Point2) -> f64 + Sync {
    let beta = PI / kappa;
    let terms: Vec<(f64, f64)> = (1..=modes).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.7..1.4))).collect();
    move |x: Point2| {
        let (r, phi) = (x.r(), x.phi());
        terms
            .iter()
            .enumerate()
            .map(|(k, &(a, s))| {
                let order = (k + 1) as f64 * beta;
                a * r.powf(order) * (-r * r / (2.0 * s * s)).exp() * (order * phi).sin()
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorialityRow {
    pub angle: f64,
    pub l2_estimate: f64,
    /// Sup of weighted `L^p` ratios, aligned with the requested specs.
    pub weighted: Vec<f64>,
}

/// Sup of `‖λR(λ,L)g‖/‖g‖` over `λ = ρe^{iθ}`, `ρ ∈ radii`, per angle `θ`.
///
/// The `L²` estimate uses `trials` random spectral packets measured on the
/// transform side; the weighted estimates use physical-space probes and
/// radii clipped to `[1, 100]` and thinned to four per decade, where the
/// outputs decay inside the radial rule.
pub fn sectoriality_probe(
    basis: &Arc<HankelBasis>,
    angles: &[f64],
    radii: &[f64],
    trials: usize,
    weights: &[WeightSpec],
    seed: u64,
) -> Result<Vec<SectorialityRow>> {
    if angles.iter().any(|&a| !(a > 0.0 && a < PI)) {
        return Err(WedgeError::InvalidParameter("angles must lie in (0, π)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu_lo = 0.5;
    let mu_hi = 0.75 * basis.spec.mu_max;
    let packets: Vec<HankelField> = (0..trials)
        .map(|_| {
            let n = rng.gen_range(1..=basis.spec.modes);
            let mu_c = mu_lo * (mu_hi / mu_lo).powf(rng.gen_range(0.0..1.0));
            spectral_packet(basis, n, mu_c, 0.004 * mu_c)
        })
        .collect();
    let probes: Vec<HankelField> = if weights.is_empty() {
        Vec::new()
    } else {
        (0..trials.min(4)).map(|_| hankel_analyze(basis, random_probe(basis.spec.kappa, basis.spec.modes, &mut rng))).collect()
    };
    let probe_norms: Vec<Vec<f64>> = probes
        .iter()
        .map(|g| {
            let prof = hankel_synthesize(g);
            weights.iter().map(|w| prof.weighted_lp_norm(w)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    // four radii per decade within [1, 100]
    let mut weighted_radii: Vec<f64> = Vec::new();
    for &rho in radii.iter().filter(|&&r| (1.0..=100.0).contains(&r)) {
        if weighted_radii.last().map_or(true, |&last| rho >= last * 10f64.powf(0.25) * (1.0 - 1e-12)) {
            weighted_radii.push(rho);
        }
    }
    angles
        .iter()
        .map(|&theta| {
            let e = Complex64::from_polar(1.0, theta);
            let l2 = packets
                .par_iter()
                .map(|g| {
                    radii
                        .iter()
                        .map(|&rho| resolvent_l2_ratio(e * rho, g))
                        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
                })
                .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
            let mut weighted = vec![0.0f64; weights.len()];
            for (g, norms) in probes.iter().zip(&probe_norms) {
                for &rho in &weighted_radii {
                    let lam = e * rho;
                    let out = hankel_synthesize(&g.map_multiplier(|s| lam / (lam - s)));
                    for (k, w) in weights.iter().enumerate() {
                        weighted[k] = weighted[k].max(out.weighted_lp_norm(w)? / norms[k]);
                    }
                }
            }
            Ok(SectorialityRow { angle: theta, l2_estimate: l2, weighted })
        })
        .collect()
}

/// `|f(λ)| ≤ C min(|λ|^ε, |λ|^{−ε})` on the sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub c: f64,
    pub eps: f64,
}

/// Both rays of `∂Σ_angle`, parametrised by `log |λ| ∈ [ln r_min, ln r_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub angle: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Initial trapezoid step in `log |λ|`; halved until converged.
    pub step: f64,
}

impl ContourSpec {
    pub fn new(angle: f64) -> Self {
        Self { angle, r_min: 1e-14, r_max: 1e14, step: 0.5 }
    }

    /// Bound on the truncated tails, per unit `‖g‖`.
    pub fn tail_bound(&self, cert: &DecayCertificate) -> f64 {
        cert.c * (self.r_min.powf(cert.eps) + self.r_max.powf(-cert.eps)) / (PI * cert.eps * self.angle.min(PI / 2.0).sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalculusReport {
    pub nodes: usize,
    pub last_change: f64,
    pub tail_bound: f64,
}

/// Contour quadrature of `(1/2πi) ∮ f(λ) (λ − s)^{−1} dλ` at each `s = μ_q²`.
pub fn contour_multiplier<F>(
    f: &F,
    cert: &DecayCertificate,
    sigma: f64,
    contour: &ContourSpec,
    s_values: &[f64],
) -> Result<(Vec<Complex64>, CalculusReport)>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    if !(contour.angle > 0.0 && contour.angle < sigma && sigma <= PI) {
        return Err(WedgeError::InvalidParameter(format!(
            "contour angle {} must lie in (0, σ = {sigma})",
            contour.angle
        )));
    }
    if !(contour.r_min > 0.0 && contour.r_min < 1.0 && contour.r_max > 1.0) {
        return Err(WedgeError::InvalidParameter("need r_min < 1 < r_max".into()));
    }
    let tail = contour.tail_bound(cert);
    if tail > 1e-8 {
        return Err(WedgeError::BudgetExceeded { best: f64::NAN, error: tail });
    }
    let (lo, hi) = (contour.r_min.ln(), contour.r_max.ln());
    let up = Complex64::from_polar(1.0, contour.angle);
    let down = up.conj();
    let eval = |h: f64| -> (Vec<Complex64>, usize) {
        let count = ((hi - lo) / h).ceil() as usize;
        let h = (hi - lo) / count as f64;
        // λ = e^τ e^{∓iθ}; dλ = λ dτ; the upper ray is traversed inwards
        let nodes: Vec<(Complex64, Complex64, Complex64, Complex64)> = (0..=count)
            .map(|k| {
                let tau = lo + k as f64 * h;
                let w = if k == 0 || k == count { 0.5 * h } else { h };
                let rho = tau.exp();
                let (lu, ld) = (up * rho, down * rho);
                (lu, f(lu) * lu * w, ld, f(ld) * ld * w)
            })
            .collect();
        let vals = s_values
            .par_iter()
            .map(|&s| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(lu, fu, ld, fd) in &nodes {
                    acc += fd / (ld - s) - fu / (lu - s);
                }
                acc / Complex64::new(0.0, 2.0 * PI)
            })
            .collect();
        (vals, 2 * (count + 1))
    };
    let mut h = contour.step;
    let (mut prev, _) = eval(h);
    for _ in 0..12 {
        h *= 0.5;
        let (cur, nodes) = eval(h);
        let scale = cur.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        let change = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        if change < 1e-8 {
            return Ok((cur, CalculusReport { nodes, last_change: change, tail_bound: tail }));
        }
        prev = cur;
    }
    Err(WedgeError::BudgetExceeded { best: f64::NAN, error: tail })
}

/// `f(L) g` by contour quadrature of the resolvent.
pub fn holo_calculus_apply<F>(
    f: &F,
    cert: &DecayCertificate,
    sigma: f64,
    contour: &ContourSpec,
    g: &HankelField,
) -> Result<(HankelField, CalculusReport)>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let s: Vec<f64> = g.basis.mu.iter().map(|m| m * m).collect();
    let (m, report) = contour_multiplier(f, cert, sigma, contour, &s)?;
    let nq = s.len();
    let coeffs = g.coeffs.iter().enumerate().map(|(k, c)| c * m[k % nq]).collect();
    Ok((HankelField { basis: g.basis.clone(), coeffs }, report))
}

/// `f(L) g` applied directly as the multiplier `f(μ²)`.
pub fn multiplier_apply<F: Fn(f64) -> Complex64>(f: F, g: &HankelField) -> HankelField {
    g.map_multiplier(f)
}

/// `λ ↦ 4aλ/(1 + aλ)²`, peaking at 1 on the positive axis.
pub fn bump_function(a: f64) -> impl Fn(Complex64) -> Complex64 + Sync + Copy {
    move |z: Complex64| {
        let u = z * a;
        4.0 * u / ((1.0 + u) * (1.0 + u))
    }
}

/// `Σ_k c_k · 4a_kλ/(1+a_kλ)²` with `|c_k| = 1`, scaled to unit sup on `Σ_angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalEnsembleMember {
    pub scales: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    pub norm: f64,
}

impl RationalEnsembleMember {
    pub fn random(rng: &mut ChaCha8Rng, sector: f64) -> Self {
        let scales: Vec<f64> = (-2..=2).map(|k| 2f64.powi(k)).collect();
        let coeffs: Vec<Complex64> = scales.iter().map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))).collect();
        let mut m = Self { scales, coeffs, norm: 1.0 };
        m.norm = m.sup_on_sector(sector);
        m
    }

    fn raw(&self, z: Complex64) -> Complex64 {
        self.scales.iter().zip(&self.coeffs).map(|(&a, c)| c * bump_function(a)(z)).sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.raw(z) / self.norm
    }

    /// Sup of `|f|` over the closed sector, sampled on its two boundary rays
    /// (maximum principle) on a fine log grid.
    pub fn sup_on_sector(&self, sector: f64) -> f64 {
        let mut best = 0.0f64;
        for k in 0..=4000 {
            let rho = 10f64.powf(-6.0 + 12.0 * k as f64 / 4000.0);
            for s in [-1.0, 1.0] {
                best = best.max(self.raw(Complex64::from_polar(rho, s * sector)).norm());
            }
        }
        best
    }

    /// Every term is bounded by `4·min(a|λ|, 1/(a|λ|))/(1 − cos σ')`-type
    /// constants; this certificate is valid on sectors of angle ≤ 3π/4.
    pub fn certificate(&self) -> DecayCertificate {
        let amax = self.scales.iter().cloned().fold(0.0, f64::max);
        let amin = self.scales.iter().cloned().fold(f64::INFINITY, f64::min);
        // |1 + aλ| ≥ sin(π/4)·max(1, a|λ|) for |arg λ| ≤ 3π/4
        let c = 8.0 * self.scales.len() as f64 * amax.max(1.0 / amin) / self.norm;
        DecayCertificate { c, eps: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorNormEstimate {
    pub spec: WeightSpec,
    pub estimate: f64,
}

/// Lower bounds for `sup ‖f(L)‖_{L^p(w)→L^p(w)}` over an ensemble of unit-sup
/// functions, from random probe functions.
pub fn lp_operator_norm_estimates(
    basis: &Arc<HankelBasis>,
    members: &[RationalEnsembleMember],
    specs: &[WeightSpec],
    probes: usize,
    contour_angle: f64,
    seed: u64,
) -> Result<Vec<OperatorNormEstimate>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gs: Vec<HankelField> =
        (0..probes).map(|_| hankel_analyze(basis, random_probe(basis.spec.kappa, basis.spec.modes, &mut rng))).collect();
    let mut est = vec![0.0f64; specs.len()];
    for g in &gs {
        let prof = hankel_synthesize(g);
        let base: Vec<f64> = specs.iter().map(|s| prof.weighted_lp_norm(s)).collect::<Result<_>>()?;
        for m in members {
            let f = |z: Complex64| m.eval(z);
            let (out, _) = holo_calculus_apply(&f, &m.certificate(), 0.75 * PI, &ContourSpec::new(contour_angle), g)?;
            let out = hankel_synthesize(&out);
            for (k, s) in specs.iter().enumerate() {
                est[k] = est[k].max(out.weighted_lp_norm(s)? / base[k]);
            }
        }
    }
    Ok(specs.iter().zip(est).map(|(s, e)| OperatorNormEstimate { spec: *s, estimate: e }).collect())
}
