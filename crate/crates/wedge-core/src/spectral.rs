//! Fourier-in-`z` × sine-in-`φ` diagonalisation of `(D_z − a)² + D_φ²` and the
//! resulting Poisson solver on the wedge.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, WedgeError};
use crate::geometry::{classify_admissibility, Admissibility, Point2, RejectReason, WedgeParams, WeightSpec};
use crate::spaces::TestFunctionFamily;
use crate::transforms::{
    derivative_coeff_table, multi_indices, pullback, weighted_lp_power_euler, AngularWeight, EulerGrid, GridFunction,
};

/// Below this symbol modulus a solve is refused.
pub const CONDITIONING_FLOOR: f64 = 1e-10;

/// `n²π²/κ²`, the `n`-th Dirichlet eigenvalue of `−d²/dφ²` on `(0, κ)`.
pub fn interval_eigenvalue(n: usize, kappa: f64) -> f64 {
    let m = n as f64 * PI / kappa;
    m * m
}

/// `a = (ν+2)/p − 2`, the shift making `ν + 2 − (2+a)p` vanish.
pub fn shift_for(nu: f64, p: f64) -> f64 {
    let a = (nu + 2.0) / p - 2.0;
    debug_assert!((nu + 2.0 - (2.0 + a) * p).abs() <= 1e-12 * (1.0 + nu.abs()));
    a
}

/// Signed frequency index for FFT slot `k`.
pub fn signed_index(k: usize, m: usize) -> isize {
    if k < m / 2 {
        k as isize
    } else {
        k as isize - m as isize
    }
}

/// `(iξ − a)² − n²π²/κ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpSumSymbol {
    pub a: f64,
    pub kappa: f64,
}

impl OpSumSymbol {
    pub fn eval(&self, xi: f64, n: usize) -> Complex64 {
        let s = Complex64::new(-self.a, xi);
        s * s - interval_eigenvalue(n, self.kappa)
    }

    /// Symbol on the grid lattice; the Nyquist column uses its real part.
    pub fn on_grid(&self, grid: &EulerGrid, k: usize, n: usize) -> Complex64 {
        let xi = PI * signed_index(k, grid.m) as f64 / grid.z_half;
        let s = self.eval(xi, n);
        if k == grid.m / 2 {
            Complex64::new(s.re, 0.0)
        } else {
            s
        }
    }
}

/// `min |σ(ξ_k, n)|` over the discrete lattice, with the minimising mode.
pub fn symbol_min_modulus_with_witness(a: f64, kappa: f64, grid: &EulerGrid) -> (f64, usize) {
    let sym = OpSumSymbol { a, kappa };
    let mut best = (f64::INFINITY, 1);
    for k in 0..grid.m {
        for n in 1..=grid.n {
            let v = sym.on_grid(grid, k, n).norm();
            if v < best.0 {
                best = (v, n);
            }
        }
    }
    best
}

pub fn symbol_min_modulus(a: f64, kappa: f64, grid: &EulerGrid) -> f64 {
    symbol_min_modulus_with_witness(a, kappa, grid).0
}

/// FFT plans for one grid shape.
#[derive(Clone)]
pub struct Transformer {
    grid: EulerGrid,
    fwd_z: Arc<dyn Fft<f64>>,
    inv_z: Arc<dyn Fft<f64>>,
    fwd_phi: Arc<dyn Fft<f64>>,
}

impl Transformer {
    pub fn new(grid: &EulerGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            fwd_z: planner.plan_fft_forward(grid.m),
            inv_z: planner.plan_fft_inverse(grid.m),
            fwd_phi: planner.plan_fft_forward(2 * (grid.n + 1)),
        }
    }

    /// `b_n = (2/(N+1)) Σ_i x_i sin(πni/(N+1))` via an odd extension.
    fn dst(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = x.len();
        let l = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for i in 0..n {
            buf[i + 1] = x[i];
            buf[l - 1 - i] = -x[i];
        }
        self.fwd_phi.process(&mut buf);
        let s = Complex64::new(0.0, 1.0 / (n + 1) as f64);
        for k in 0..n {
            out[k] = buf[k + 1] * s;
        }
    }

    /// `Σ_n b_n sin(πni/(N+1))` (`odd = false`) or `Σ_n b_n cos(πni/(N+1))`.
    fn trig_synth(&self, b: &[Complex64], out: &mut [Complex64], cosine: bool) {
        let n = b.len();
        let l = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for k in 0..n {
            buf[k + 1] = b[k];
            buf[l - 1 - k] = if cosine { b[k] } else { -b[k] };
        }
        self.fwd_phi.process(&mut buf);
        let s = if cosine { Complex64::new(0.5, 0.0) } else { Complex64::new(0.0, 0.5) };
        for i in 0..n {
            out[i] = buf[i + 1] * s;
        }
    }

    pub fn analyze(&self, v: &GridFunction) -> Result<SpectralField> {
        if v.grid != self.grid {
            return Err(WedgeError::GridMismatch("transform plan built for another grid".into()));
        }
        let (m, n) = (self.grid.m, self.grid.n);
        // sine transform of each row
        let mut rows: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m * n];
        rows.par_chunks_mut(n).enumerate().for_each(|(j, out)| {
            let x: Vec<Complex64> = v.values[j * n..(j + 1) * n].iter().map(|&t| Complex64::new(t, 0.0)).collect();
            self.dst(&x, out);
        });
        // Fourier transform of each mode column
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut col: Vec<Complex64> = (0..m).map(|j| rows[j * n + i]).collect();
                self.fwd_z.process(&mut col);
                let inv_m = 1.0 / m as f64;
                for (k, c) in col.iter_mut().enumerate() {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    *c *= sign * inv_m;
                }
                col
            })
            .collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m * n];
        for (i, col) in cols.iter().enumerate() {
            for (k, c) in col.iter().enumerate() {
                coeffs[k * n + i] = *c;
            }
        }
        Ok(SpectralField { grid: self.grid, coeffs, shift_a: v.shift_a })
    }

    pub fn synthesize(&self, c: &SpectralField) -> Result<GridFunction> {
        self.synthesize_derivative(c, 0, 0)
    }

    /// Samples of `D_z^{kz} D_φ^{kφ}` of the field.
    pub fn synthesize_derivative(&self, c: &SpectralField, kz: usize, kphi: usize) -> Result<GridFunction> {
        if c.grid != self.grid {
            return Err(WedgeError::GridMismatch("transform plan built for another grid".into()));
        }
        let g = self.grid;
        let (m, n) = (g.m, g.n);
        let alpha = PI / g.kappa;
        let cols: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mode = (i + 1) as f64 * alpha;
                let phi_factor = mode.powi(kphi as i32) * if (kphi / 2) % 2 == 0 { 1.0 } else { -1.0 };
                let mut col: Vec<Complex64> = (0..m)
                    .map(|k| {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        let xi = PI * signed_index(k, m) as f64 / g.z_half;
                        let dz = if k == m / 2 {
                            if kz % 2 == 1 {
                                Complex64::new(0.0, 0.0)
                            } else {
                                Complex64::new((-xi * xi).powi(kz as i32 / 2), 0.0)
                            }
                        } else {
                            Complex64::new(0.0, xi).powu(kz as u32)
                        };
                        c.coeffs[k * n + i] * dz * (sign * phi_factor)
                    })
                    .collect();
                self.inv_z.process(&mut col);
                col
            })
            .collect();
        let cosine = kphi % 2 == 1;
        let mut values = vec![0.0; m * n];
        values.par_chunks_mut(n).enumerate().for_each(|(j, out)| {
            let b: Vec<Complex64> = (0..n).map(|i| cols[i][j]).collect();
            let mut tmp = vec![Complex64::new(0.0, 0.0); n];
            self.trig_synth(&b, &mut tmp, cosine);
            for (o, t) in out.iter_mut().zip(tmp) {
                *o = t.re;
            }
        });
        GridFunction::new(g, values, c.shift_a)
    }
}

/// Coefficients `c_{k,n}` with `v(z, φ) = Σ c_{k,n} e^{iξ_k z} sin(nπφ/κ)`,
/// stored row-major by FFT slot `k` then mode `n−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: EulerGrid,
    pub coeffs: Vec<Complex64>,
    pub shift_a: f64,
}

impl SpectralField {
    pub fn xi(&self, k: usize) -> f64 {
        PI * signed_index(k, self.grid.m) as f64 / self.grid.z_half
    }

    /// Coefficient at signed frequency index `jp` and mode `n ≥ 1`.
    pub fn get(&self, jp: isize, n: usize) -> Complex64 {
        let m = self.grid.m as isize;
        let k = jp.rem_euclid(m) as usize;
        self.coeffs[k * self.grid.n + n - 1]
    }

    /// `Σ_k |c_{k,n}|²` for mode `n`.
    pub fn mode_energy(&self, n: usize) -> f64 {
        (0..self.grid.m).map(|k| self.coeffs[k * self.grid.n + n - 1].norm_sqr()).sum()
    }

    /// Trigonometric interpolant at an arbitrary `(z, φ)`.
    pub fn evaluate(&self, z: f64, phi: f64) -> f64 {
        let g = &self.grid;
        let (m, n) = (g.m, g.n);
        let alpha = PI / g.kappa;
        let sines: Vec<f64> = (1..=n).map(|q| (q as f64 * alpha * phi).sin()).collect();
        let mut total = 0.0;
        for k in 0..m {
            let row = &self.coeffs[k * n..(k + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, s) in row.iter().zip(&sines) {
                acc += c * s;
            }
            let xi = self.xi(k);
            if k == m / 2 {
                total += acc.re * (xi * z).cos();
            } else {
                let (s, c) = (xi * z).sin_cos();
                total += acc.re * c - acc.im * s;
            }
        }
        total
    }
}

pub fn analyze(v: &GridFunction) -> Result<SpectralField> {
    Transformer::new(&v.grid).analyze(v)
}

pub fn synthesize(c: &SpectralField) -> Result<GridFunction> {
    Transformer::new(&c.grid).synthesize(c)
}

/// Solution of `Δu = f` in Euler form: `v = T_a u` with its coefficients.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub a: f64,
    pub v: GridFunction,
    pub coeffs: SpectralField,
    pub min_modulus: f64,
}

impl PoissonSolution {
    /// `u(x) = e^{-a log|x|} v(log|x|, Arg x)` by spectral interpolation.
    pub fn evaluate(&self, x: Point2) -> f64 {
        let z = x.r().ln();
        (-self.a * z).exp() * self.coeffs.evaluate(z, x.phi())
    }
}

fn precheck(spec: &WeightSpec, wedge: &WedgeParams, grid: &EulerGrid) -> Result<(f64, f64)> {
    if (grid.kappa - wedge.kappa()).abs() > 1e-15 {
        return Err(WedgeError::GridMismatch("grid and wedge angles differ".into()));
    }
    let a = shift_for(spec.nu, spec.p);
    let (modulus, witness) = symbol_min_modulus_with_witness(a, wedge.kappa(), grid);
    match classify_admissibility(spec, wedge) {
        Admissibility::Rejected(RejectReason::ExcludedLattice { n, .. }) => {
            return Err(WedgeError::Conditioning { modulus, witness: n });
        }
        Admissibility::Rejected(r) => return Err(WedgeError::Rejected(r.to_string())),
        _ => {}
    }
    if modulus < CONDITIONING_FLOOR {
        return Err(WedgeError::Conditioning { modulus, witness });
    }
    Ok((a, modulus))
}

/// Solve with right-hand side given as `g = M_2 T_a f = e^{(2+a)z} f∘Ψ` on the grid.
pub fn solve_poisson_euler(g: &GridFunction, spec: &WeightSpec, wedge: &WedgeParams) -> Result<PoissonSolution> {
    let (a, modulus) = precheck(spec, wedge, &g.grid)?;
    if (g.shift_a - (a + 2.0)).abs() > 1e-12 {
        return Err(WedgeError::GridMismatch(format!(
            "right-hand side carries shift {} but the weight needs {}",
            g.shift_a,
            a + 2.0
        )));
    }
    let tr = Transformer::new(&g.grid);
    let mut c = tr.analyze(g)?;
    let sym = OpSumSymbol { a, kappa: wedge.kappa() };
    let n = g.grid.n;
    c.coeffs.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        for (i, x) in row.iter_mut().enumerate() {
            *x /= sym.on_grid(&g.grid, k, i + 1);
        }
    });
    c.shift_a = a;
    let v = tr.synthesize(&c)?;
    Ok(PoissonSolution { a, v, coeffs: c, min_modulus: modulus })
}

/// Solve `Δu = f` for a Cartesian right-hand side sampled on `grid`.
pub fn solve_poisson<F>(f: F, spec: &WeightSpec, grid: &EulerGrid) -> Result<PoissonSolution>
where
    F: Fn(Point2) -> f64 + Sync,
{
    let wedge = WedgeParams::new(grid.kappa)?;
    let a = shift_for(spec.nu, spec.p);
    precheck(spec, &wedge, grid)?;
    let g = pullback(f, a + 2.0, grid)?;
    solve_poisson_euler(&g, spec, &wedge)
}

/// `max |Δ_h u − f|` at the probe points, with a fourth-order five-point
/// difference in each Cartesian direction and step `h·|x|`.
pub fn residual_report<F>(sol: &PoissonSolution, f: F, probes: &[Point2], h: f64) -> f64
where
    F: Fn(Point2) -> f64 + Sync,
{
    probes
        .par_iter()
        .map(|&x| {
            let s = h * x.r();
            let u = |dx: f64, dy: f64| sol.evaluate(Point2::new(x.x1 + dx, x.x2 + dy));
            let c = u(0.0, 0.0);
            let d2 = |e: (f64, f64)| {
                (-u(2.0 * e.0, 2.0 * e.1) + 16.0 * u(e.0, e.1) - 30.0 * c + 16.0 * u(-e.0, -e.1)
                    - u(-2.0 * e.0, -2.0 * e.1))
                    / (12.0 * s * s)
            };
            (d2((s, 0.0)) + d2((0.0, s)) - f(x)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

/// `‖u‖_{Ẇ^{k,p}(γ,ν)}` for `u = T_a^{-1} v`, from spectral derivatives of `v`
/// and the chain-rule tables; every term reduces to an Euler norm with
/// exponent `ν + 2 − (k+a)p`.
pub fn kondratiev_norm_spectral(c: &SpectralField, k: usize, p: f64, gamma: f64, nu: f64) -> Result<f64> {
    let tr = Transformer::new(&c.grid);
    let g = c.grid;
    let a = c.shift_a;
    let nu_hat = nu + 2.0 - (k as f64 + a) * p;
    let mut derivs = std::collections::BTreeMap::new();
    for order in 0..=k {
        for (bz, bp) in multi_indices(order) {
            derivs.insert((bz, bp), tr.synthesize_derivative(c, bz, bp)?);
        }
    }
    let mut total = 0.0;
    for order in 0..=k {
        for alpha in multi_indices(order) {
            let table = derivative_coeff_table(alpha, a)?;
            let mut w = vec![0.0; g.len()];
            for (&(bz, bp), poly) in &table.entries {
                let d = &derivs[&(bz, bp)];
                for i in 0..g.n {
                    let coef = poly.eval(g.phi(i));
                    for j in 0..g.m {
                        w[j * g.n + i] += coef * d.values[j * g.n + i];
                    }
                }
            }
            let pw = weighted_lp_power_euler(&w, &g, gamma, nu_hat, p, AngularWeight::default())?;
            total += pw.powf(1.0 / p);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AprioriReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

/// Extremes of `‖u‖_{Ẇ^{2,p}(γ,ν)} / ‖f‖_{L^p(w_{γ,ν})}` where each family
/// member, read in Euler variables, is taken as `g = M_2 T_a f`.
pub fn apriori_ratio(family: &TestFunctionFamily, spec: &WeightSpec, grid: &EulerGrid) -> Result<AprioriReport> {
    let wedge = WedgeParams::new(grid.kappa)?;
    let a = shift_for(spec.nu, spec.p);
    precheck(spec, &wedge, grid)?;
    let mut ratios = Vec::with_capacity(family.members.len());
    for m in &family.members {
        let g = GridFunction::from_euler(*grid, a + 2.0, |z, phi| m.euler_value(z, phi))?;
        // ‖f‖ in L^p(w_{γ,ν}) is the Euler norm of g with exponent ν+2−(2+a)p = 0
        let fnorm = weighted_lp_power_euler(&g.values, grid, spec.gamma, 0.0, spec.p, AngularWeight::default())?
            .powf(1.0 / spec.p);
        let sol = solve_poisson_euler(&g, spec, &wedge)?;
        let unorm = kondratiev_norm_spectral(&sol.coeffs, 2, spec.p, spec.gamma, spec.nu)?;
        ratios.push(unorm / fnorm);
    }
    let max_ratio = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(AprioriReport { ratios, max_ratio, min_ratio })
}
