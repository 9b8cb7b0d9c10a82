//! Euler coordinates `(z, φ) = (log r, φ)`, the pullback `T_a u = e^{az} u∘Ψ`,
//! weighted norms on both sides and the chain-rule calculus between them.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Result, WedgeError};
use crate::geometry::{Point2, WedgeParams};
use crate::jet::{euler_derivative, SmoothFn, MAX_ORDER};
use crate::quad::{tanh_sinh, tanh_sinh_nodes, GaussLegendre};

/// Uniform tensor grid on `[-Z, Z) × (0, κ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerGrid {
    pub kappa: f64,
    pub z_half: f64,
    pub m: usize,
    pub n: usize,
}

impl EulerGrid {
    pub fn new(kappa: f64, z_half: f64, m: usize, n: usize) -> Result<Self> {
        WedgeParams::new(kappa)?;
        if m < 4 || n < 4 || m % 2 != 0 {
            return Err(WedgeError::InvalidParameter(format!(
                "grid needs M, N ≥ 4 and M even (got M={m}, N={n})"
            )));
        }
        if !(z_half > 0.0 && z_half.is_finite()) {
            return Err(WedgeError::InvalidParameter(format!("Z = {z_half} must be positive")));
        }
        Ok(Self { kappa, z_half, m, n })
    }

    pub fn dz(&self) -> f64 {
        2.0 * self.z_half / self.m as f64
    }

    pub fn dphi(&self) -> f64 {
        self.kappa / (self.n + 1) as f64
    }

    pub fn z(&self, j: usize) -> f64 {
        -self.z_half + j as f64 * self.dz()
    }

    /// Angle of the `i`-th interior node, `i = 0..N` (that is `φ_{i+1}`).
    pub fn phi(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dphi()
    }

    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same domain, both resolutions multiplied by `f`.
    pub fn refined(&self, f: usize) -> Self {
        Self { m: self.m * f, n: (self.n + 1) * f - 1, ..*self }
    }
}

/// Choice of the angular weight on `(0, κ)` in the Euler norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngularWeight {
    /// `ρ_D/ρ∘ = sin(min(φ, κ−φ, π/2))`; the Cartesian weight factorises exactly.
    #[default]
    BoundaryRatio,
    /// `dist(φ, {0, κ})`.
    AngleDistance,
}

impl AngularWeight {
    /// Weight given the distance `d = min(φ, κ−φ)` to the endpoints.
    pub fn from_gap(self, d: f64) -> f64 {
        match self {
            AngularWeight::BoundaryRatio => d.min(FRAC_PI_2).sin(),
            AngularWeight::AngleDistance => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: EulerGrid,
    pub values: Vec<f64>,
    pub shift_a: f64,
}

impl GridFunction {
    pub fn new(grid: EulerGrid, values: Vec<f64>, shift_a: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(WedgeError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(WedgeError::NonFinite { j: k / grid.n, i: k % grid.n });
        }
        Ok(Self { grid, values, shift_a })
    }

    pub fn zeros(grid: EulerGrid, shift_a: f64) -> Self {
        Self { grid, values: vec![0.0; grid.len()], shift_a }
    }

    /// Samples `g(z_j, φ_i)` directly on the grid.
    pub fn from_euler<F: Fn(f64, f64) -> f64 + Sync>(grid: EulerGrid, shift_a: f64, g: F) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|k| g(grid.z(k / grid.n), grid.phi(k % grid.n)))
            .collect();
        Self::new(grid, values, shift_a)
    }

    #[inline]
    pub fn at(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.grid.n + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| s * v).collect(), ..self.clone() }
    }

    /// Multiply by `e^{bz}`, turning a `T_a` sample into a `T_{a+b}` sample.
    pub fn reshift(&self, b: f64) -> Self {
        let n = self.grid.n;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v * (b * self.grid.z(k / n)).exp())
            .collect();
        Self { values, shift_a: self.shift_a + b, grid: self.grid }
    }

    /// Dump: a header line followed by `M·N` values in row-major `(j, i)` order.
    pub fn to_dump(&self) -> String {
        let g = &self.grid;
        let mut s = format!(
            "euler-grid kappa={:?} Z={:?} M={} N={} a={:?}\n",
            g.kappa, g.z_half, g.m, g.n, self.shift_a
        );
        for row in self.values.chunks(g.n) {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v:?}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| WedgeError::Parse("empty dump".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("euler-grid") {
            return Err(WedgeError::Parse("dump header must start with `euler-grid`".into()));
        }
        let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
        for f in fields {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| WedgeError::Parse(format!("bad header field `{f}`")))?;
            kv.insert(k, v);
        }
        let get = |k: &str| -> Result<&str> {
            kv.get(k).copied().ok_or_else(|| WedgeError::Parse(format!("missing `{k}` in header")))
        };
        let pf = |k: &str| -> Result<f64> {
            get(k)?.parse::<f64>().map_err(|e| WedgeError::Parse(format!("{k}: {e}")))
        };
        let pu = |k: &str| -> Result<usize> {
            get(k)?.parse::<usize>().map_err(|e| WedgeError::Parse(format!("{k}: {e}")))
        };
        let grid = EulerGrid::new(pf("kappa")?, pf("Z")?, pu("M")?, pu("N")?)?;
        let a = pf("a")?;
        let mut values = Vec::with_capacity(grid.len());
        for (ln, line) in lines.enumerate() {
            for tok in line.split_whitespace() {
                let v = tok
                    .parse::<f64>()
                    .map_err(|e| WedgeError::Parse(format!("line {}: `{tok}`: {e}", ln + 2)))?;
                values.push(v);
            }
        }
        Self::new(grid, values, a)
    }
}

/// `(T_a f)(z_j, φ_i) = e^{a z_j} f(e^{z_j} cos φ_i, e^{z_j} sin φ_i)`.
pub fn pullback<F>(f: F, a: f64, grid: &EulerGrid) -> Result<GridFunction>
where
    F: Fn(Point2) -> f64 + Sync,
{
    let n = grid.n;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (z, phi) = (grid.z(k / n), grid.phi(k % n));
            (a * z).exp() * f(Point2::from_polar(z.exp(), phi))
        })
        .collect();
    GridFunction::new(*grid, values, a)
}

/// Inverse of [`pullback`] at arbitrary interior points, by bilinear
/// interpolation in `(z, φ)`; periodic in `z`, linear extrapolation in `φ`
/// between the outermost node and the boundary.
pub fn pushforward(v: &GridFunction, points: &[Point2]) -> Result<Vec<f64>> {
    let g = &v.grid;
    let (dz, dphi) = (g.dz(), g.dphi());
    points
        .iter()
        .map(|x| {
            let r = x.r();
            let phi = x.phi();
            if !(r > 0.0 && phi > 0.0 && phi < g.kappa) {
                return Err(WedgeError::OutsideWedge { x1: x.x1, x2: x.x2 });
            }
            let z = r.ln();
            if !(z > -g.z_half && z < g.z_half) {
                return Err(WedgeError::OutsideAnnulus { x1: x.x1, x2: x.x2 });
            }
            let sz = (z + g.z_half) / dz;
            let j0 = (sz.floor() as usize).min(g.m - 1);
            let tz = sz - j0 as f64;
            let j1 = (j0 + 1) % g.m;
            let sp = phi / dphi - 1.0;
            let i0 = (sp.floor().max(0.0) as usize).min(g.n - 2);
            let tp = sp - i0 as f64;
            let row = |j: usize| v.at(j, i0) * (1.0 - tp) + v.at(j, i0 + 1) * tp;
            let val = row(j0) * (1.0 - tz) + row(j1) * tz;
            Ok((-v.shift_a * z).exp() * val)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Weighted norms

const STENCIL: usize = 8;
const PANEL_GL: usize = 8;
const END_LEVEL: u32 = 6;

/// Quadrature node in φ expressed through interpolation from grid nodes.
#[derive(Debug, Clone)]
struct PhiNode {
    gap: f64,
    w: f64,
    start: usize,
    coef: [f64; STENCIL],
    len: usize,
}

fn phi_rule(grid: &EulerGrid) -> Vec<PhiNode> {
    let n = grid.n;
    let h = grid.dphi();
    let kappa = grid.kappa;
    let s_len = STENCIL.min(n);
    let gl = GaussLegendre::new(PANEL_GL);
    let mut kinks = vec![0.5 * kappa, FRAC_PI_2, kappa - FRAC_PI_2];
    kinks.retain(|&c| c > 0.0 && c < kappa);
    let mut out = Vec::new();
    for panel in 0..=n {
        let lo = panel as f64 * h;
        let hi = if panel == n { kappa } else { (panel + 1) as f64 * h };
        // grid node index (0-based) of the leftmost stencil point
        let start = (panel as isize - (s_len as isize / 2))
            .clamp(0, (n - s_len) as isize) as usize;
        let lagrange = |phi: f64| -> [f64; STENCIL] {
            let mut c = [0.0; STENCIL];
            for k in 0..s_len {
                let pk = grid.phi(start + k);
                let mut l = 1.0;
                for m in 0..s_len {
                    if m != k {
                        let pm = grid.phi(start + m);
                        l *= (phi - pm) / (pk - pm);
                    }
                }
                c[k] = l;
            }
            c
        };
        if panel == 0 || panel == n {
            for (x, ga, gb, w) in tanh_sinh_nodes(lo, hi, END_LEVEL) {
                let gap = if panel == 0 { ga } else { gb };
                out.push(PhiNode { gap, w, start, coef: lagrange(x), len: s_len });
            }
        } else {
            let mut edges = vec![lo, hi];
            edges.extend(kinks.iter().copied().filter(|&c| c > lo && c < hi));
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for e in edges.windows(2) {
                for (x, w) in gl.on(e[0], e[1]) {
                    let gap = x.min(kappa - x);
                    out.push(PhiNode { gap, w, start, coef: lagrange(x), len: s_len });
                }
            }
        }
    }
    out
}

/// `‖v‖` in `L^p(ℝ×(0,κ); e^{ν̂z} ω(φ)^γ dz dφ)` with the default angular weight.
pub fn weighted_lp_norm_euler(v: &GridFunction, gamma: f64, nu_hat: f64, p: f64) -> Result<f64> {
    weighted_lp_norm_euler_with(v, gamma, nu_hat, p, AngularWeight::default())
}

pub fn weighted_lp_norm_euler_with(
    v: &GridFunction,
    gamma: f64,
    nu_hat: f64,
    p: f64,
    weight: AngularWeight,
) -> Result<f64> {
    Ok(weighted_lp_power_euler(&v.values, &v.grid, gamma, nu_hat, p, weight)?.powf(1.0 / p))
}

/// `‖v‖^p` for raw row-major samples on `grid`.
pub fn weighted_lp_power_euler(
    values: &[f64],
    grid: &EulerGrid,
    gamma: f64,
    nu_hat: f64,
    p: f64,
    weight: AngularWeight,
) -> Result<f64> {
    if gamma <= -1.0 {
        return Err(WedgeError::NonIntegrable(format!("γ = {gamma} ≤ −1")));
    }
    if !(p >= 1.0) {
        return Err(WedgeError::InvalidParameter(format!("p = {p} must be ≥ 1")));
    }
    if values.len() != grid.len() {
        return Err(WedgeError::GridMismatch("sample count".into()));
    }
    let rule = phi_rule(grid);
    let wq: Vec<f64> = rule
        .iter()
        .map(|q| if gamma == 0.0 { q.w } else { q.w * weight.from_gap(q.gap).powf(gamma) })
        .collect();
    let n = grid.n;
    let dz = grid.dz();
    let total: f64 = (0..grid.m)
        .into_par_iter()
        .map(|j| {
            let row = &values[j * n..(j + 1) * n];
            let mut s = 0.0;
            for (q, w) in rule.iter().zip(&wq) {
                let mut val = 0.0;
                for k in 0..q.len {
                    val += q.coef[k] * row[q.start + k];
                }
                let a = val.abs();
                s += w * if p == 2.0 { a * a } else { a.powf(p) };
            }
            s * dz * (nu_hat * grid.z(j)).exp()
        })
        .sum();
    Ok(total)
}

/// `‖f‖_{L^p(D, w_{γ,ν})}` by polar quadrature over `log r ∈ [z_lo, z_hi]`,
/// using the geometric weight directly.
pub fn cartesian_weighted_norm<F>(
    f: F,
    wedge: &WedgeParams,
    gamma: f64,
    nu: f64,
    p: f64,
    z_lo: f64,
    z_hi: f64,
) -> Result<f64>
where
    F: Fn(Point2) -> f64 + Sync,
{
    Ok(cartesian_weighted_power(f, wedge, gamma, nu, p, z_lo, z_hi)?.powf(1.0 / p))
}

pub fn cartesian_weighted_power<F>(
    f: F,
    wedge: &WedgeParams,
    gamma: f64,
    nu: f64,
    p: f64,
    z_lo: f64,
    z_hi: f64,
) -> Result<f64>
where
    F: Fn(Point2) -> f64 + Sync,
{
    if gamma <= -1.0 {
        return Err(WedgeError::NonIntegrable(format!("γ = {gamma} ≤ −1")));
    }
    Ok(cartesian_weighted_power_cut(f, wedge, gamma, nu, p, z_lo, z_hi, 0.0))
}

/// Polar quadrature of `|f|^p w_{γ,ν}` over `log r ∈ [z_lo, z_hi]` and
/// `φ ∈ (ε, κ−ε)`. No integrability check: with `γ ≤ −1` the caller must
/// supply an `f` that vanishes on the boundary, or a positive cutoff.
#[allow(clippy::too_many_arguments)]
pub fn cartesian_weighted_power_cut<F>(
    f: F,
    wedge: &WedgeParams,
    gamma: f64,
    nu: f64,
    p: f64,
    z_lo: f64,
    z_hi: f64,
    eps: f64,
) -> f64
where
    F: Fn(Point2) -> f64 + Sync,
{
    let kappa = wedge.kappa();
    let mut cuts = vec![eps, kappa - eps];
    for c in [0.5 * kappa, FRAC_PI_2, kappa - FRAC_PI_2] {
        if c > eps && c < kappa - eps {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let panels = ((z_hi - z_lo) / 0.5).ceil().max(1.0) as usize;
    let gl = GaussLegendre::new(16);
    let zs: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let a = z_lo + (z_hi - z_lo) * k as f64 / panels as f64;
            let b = z_lo + (z_hi - z_lo) * (k + 1) as f64 / panels as f64;
            gl.on(a, b).collect::<Vec<_>>()
        })
        .collect();
    let last = cuts.len() - 2;
    zs.par_iter()
        .map(|&(z, wz)| {
            let r = z.exp();
            let mut total = 0.0;
            for (k, e) in cuts.windows(2).enumerate() {
                let integrand = |phi: f64, ga: f64, gb: f64| -> f64 {
                    let d0 = if k == 0 && eps == 0.0 { ga } else { phi };
                    let d1 = if k == last && eps == 0.0 { gb } else { kappa - phi };
                    if d0.min(d1) < 1e-15 {
                        return 0.0;
                    }
                    let x = Point2::from_polar(r, phi);
                    let fv = f(x).abs();
                    if fv == 0.0 {
                        return 0.0;
                    }
                    // rounding can place x a hair outside; those nodes carry no mass
                    wedge.weight_value(x, gamma, nu).map_or(0.0, |w| fv.powf(p) * w)
                };
                match tanh_sinh(integrand, e[0], e[1], 1e-11, 1e-300, 8) {
                    Ok(q) | Err(q) => total += q.value,
                }
            }
            wz * r * r * total
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Chain-rule calculus

/// Trigonometric polynomial `Σ c_{ij} cos^i φ sin^j φ`, reduced to `j ≤ 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigPoly {
    terms: BTreeMap<(u32, u32), f64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(c: f64, cos_pow: u32, sin_pow: u32) -> Self {
        let mut t = Self::zero();
        t.add_term(c, cos_pow, sin_pow);
        t
    }

    fn add_term(&mut self, c: f64, i: u32, j: u32) {
        if c == 0.0 {
            return;
        }
        if j >= 2 {
            // sin² = 1 − cos²
            self.add_term(c, i, j - 2);
            self.add_term(-c, i + 2, j - 2);
            return;
        }
        let e = self.terms.entry((i, j)).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.abs() < 1e-300)
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (i, j, c) in other.terms() {
            out.add_term(c, i, j);
        }
        out
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (i, j, c) in self.terms() {
            out.add_term(s * c, i, j);
        }
        out
    }

    pub fn mul_cos(&self) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (i, j, c) in self.terms() {
            out.add_term(c, i + 1, j);
        }
        out
    }

    pub fn mul_sin(&self) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (i, j, c) in self.terms() {
            out.add_term(c, i, j + 1);
        }
        out
    }

    /// `d/dφ`.
    pub fn derivative(&self) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (i, j, c) in self.terms() {
            if i > 0 {
                out.add_term(-c * i as f64, i - 1, j + 1);
            }
            if j > 0 {
                out.add_term(c * j as f64, i + 1, j - 1);
            }
        }
        out
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        self.terms().map(|(i, j, k)| k * c.powi(i as i32) * s.powi(j as i32)).sum()
    }
}

/// `a_{k,n}`: `D_r^n ↔ e^{-nz} Σ_k a_{k,n} D_z^k` under `r = e^z`.
pub fn radial_coefficients(n: usize) -> Vec<f64> {
    // a[k] for k = 0..=n; a_{1,1} = 1, a_{k,n+1} = a_{k-1,n} − n a_{k,n}
    let mut a = vec![0.0; n + 1];
    if n == 0 {
        a[0] = 1.0;
        return a;
    }
    a[1] = 1.0;
    for m in 1..n {
        let mut next = vec![0.0; n + 1];
        for k in 1..=m + 1 {
            let prev = if k >= 1 { a[k - 1] } else { 0.0 };
            next[k] = prev - m as f64 * a[k];
        }
        a = next;
    }
    a
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `b_{n,k} = C(n,k) (−a)^{n−k}`: `D_z^n (e^{-az} v) = e^{-az} Σ_k b_{n,k} D_z^k v`.
pub fn shift_coefficient(n: usize, k: usize, a: f64) -> f64 {
    if k > n {
        0.0
    } else {
        binomial(n, k) * (-a).powi((n - k) as i32)
    }
}

/// `T_a(D^α u) = e^{-|α|z} Σ_β P̃_{α,β}(φ) D_z^{β_z} D_φ^{β_φ} (T_a u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolyTable {
    pub alpha: (usize, usize),
    pub a: f64,
    pub entries: BTreeMap<(usize, usize), TrigPoly>,
}

impl TrigPolyTable {
    pub fn get(&self, bz: usize, bphi: usize) -> TrigPoly {
        self.entries.get(&(bz, bphi)).cloned().unwrap_or_default()
    }

    /// Evaluate the right-hand side at one node given Euler derivatives of `T_a u`.
    pub fn apply<D: Fn(usize, usize) -> f64>(&self, z: f64, phi: f64, deriv: D) -> f64 {
        let order = self.alpha.0 + self.alpha.1;
        let s: f64 = self.entries.iter().map(|(&(bz, bp), t)| t.eval(phi) * deriv(bz, bp)).sum();
        (-(order as f64) * z).exp() * s
    }
}

/// Polar chain rule: `D^α = Σ_{k,l} P_{α,(k,l)}(φ) r^{k−|α|} ∂_r^k ∂_φ^l`.
pub fn polar_chain_rule(alpha: (usize, usize)) -> BTreeMap<(usize, usize), TrigPoly> {
    let mut op: BTreeMap<(usize, usize), TrigPoly> = BTreeMap::new();
    op.insert((0, 0), TrigPoly::monomial(1.0, 0, 0));
    let steps = std::iter::repeat(true).take(alpha.0).chain(std::iter::repeat(false).take(alpha.1));
    let mut order = 0usize;
    for is_x in steps {
        let mut next: BTreeMap<(usize, usize), TrigPoly> = BTreeMap::new();
        let mut push = |key: (usize, usize), t: TrigPoly| {
            let e = next.entry(key).or_default();
            *e = e.add(&t);
        };
        // ∂_x = cos ∂_r − (sin/r) ∂_φ,  ∂_y = sin ∂_r + (cos/r) ∂_φ
        for (&(k, l), c) in &op {
            let e = k as f64 - order as f64; // current power of r
            let (radial, angular) = if is_x {
                (c.mul_cos(), c.mul_sin().scale(-1.0))
            } else {
                (c.mul_sin(), c.mul_cos())
            };
            push((k, l), radial.scale(e));
            push((k + 1, l), radial);
            push((k, l), if is_x { c.derivative().mul_sin().scale(-1.0) } else { c.derivative().mul_cos() });
            push((k, l + 1), angular);
        }
        op = next.into_iter().filter(|(_, t)| !t.is_zero()).collect();
        order += 1;
    }
    op
}

pub fn derivative_coeff_table(alpha: (usize, usize), a: f64) -> Result<TrigPolyTable> {
    let order = alpha.0 + alpha.1;
    if order > MAX_ORDER {
        return Err(WedgeError::InvalidParameter(format!("|α| = {order} exceeds {MAX_ORDER}")));
    }
    let chain = polar_chain_rule(alpha);
    let mut entries: BTreeMap<(usize, usize), TrigPoly> = BTreeMap::new();
    for ((k, l), p) in chain {
        let ak = radial_coefficients(k);
        for (j, &akj) in ak.iter().enumerate() {
            if akj == 0.0 {
                continue;
            }
            for m in 0..=j {
                let b = shift_coefficient(j, m, a);
                if b == 0.0 {
                    continue;
                }
                let e = entries.entry((m, l)).or_default();
                *e = e.add(&p.scale(akj * b));
            }
        }
    }
    entries.retain(|_, t| !t.is_zero());
    Ok(TrigPolyTable { alpha, a, entries })
}

// ---------------------------------------------------------------------------
// Finite differences

/// Fornberg weights for the `m`-th derivative at `x0` from nodes `xs`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Half-width of the centred sixth-order stencil for an `m`-th derivative.
pub fn fd_half_width(m: usize) -> usize {
    if m == 0 {
        0
    } else {
        3 + (m - 1) / 2
    }
}

fn central_weights(m: usize, h: f64) -> Vec<f64> {
    let s = fd_half_width(m) as isize;
    let xs: Vec<f64> = (-s..=s).map(|k| k as f64).collect();
    fornberg_weights(0.0, &xs, m).into_iter().map(|w| w / h.powi(m as i32)).collect()
}

/// `D_z^{kz} D_φ^{kφ} v` by centred sixth-order differences. Values are only
/// meaningful at nodes with `margin_z ≤ j < M − margin_z` and
/// `margin_φ ≤ i < N − margin_φ`; the rest are zero. Differences are taken
/// against the centre value so constants map to exact zero.
pub fn fd_euler_derivative(v: &GridFunction, kz: usize, kphi: usize) -> (Vec<f64>, usize, usize) {
    let g = v.grid;
    let (m, n) = (g.m, g.n);
    let sz = fd_half_width(kz);
    let sp = fd_half_width(kphi);
    let mut tmp = v.values.clone();
    if kz > 0 {
        let w = central_weights(kz, g.dz());
        let mut out = vec![0.0; m * n];
        for j in sz..m.saturating_sub(sz) {
            for i in 0..n {
                let c = tmp[j * n + i];
                let mut acc = 0.0;
                for (t, wt) in w.iter().enumerate() {
                    acc += wt * (tmp[(j + t - sz) * n + i] - c);
                }
                out[j * n + i] = acc;
            }
        }
        tmp = out;
    }
    if kphi > 0 {
        let w = central_weights(kphi, g.dphi());
        let mut out = vec![0.0; m * n];
        for j in 0..m {
            for i in sp..n.saturating_sub(sp) {
                let c = tmp[j * n + i];
                let mut acc = 0.0;
                for (t, wt) in w.iter().enumerate() {
                    acc += wt * (tmp[j * n + i + t - sp] - c);
                }
                out[j * n + i] = acc;
            }
        }
        tmp = out;
    }
    (tmp, sz, sp)
}

/// Largest discrepancy in `T_a(D^α f) = e^{-|α|z} Σ P̃_{α,β} D^β (T_a f)` over
/// interior nodes, with the right side differentiated numerically.
pub fn apply_derivative_identity<F: SmoothFn>(
    f: &F,
    alpha: (usize, usize),
    a: f64,
    grid: &EulerGrid,
) -> Result<f64> {
    let table = derivative_coeff_table(alpha, a)?;
    let lhs = pullback(|x| f.derivative(x, alpha.0, alpha.1), a, grid)?;
    let v = pullback(|x| f.value(x), a, grid)?;
    let mut derivs: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let (mut mz, mut mp) = (0, 0);
    for &(bz, bp) in table.entries.keys() {
        let (d, sz, sp) = fd_euler_derivative(&v, bz, bp);
        mz = mz.max(sz);
        mp = mp.max(sp);
        derivs.insert((bz, bp), d);
    }
    let n = grid.n;
    let mut worst: f64 = 0.0;
    for j in mz..grid.m - mz {
        for i in mp..n - mp {
            let (z, phi) = (grid.z(j), grid.phi(i));
            let rhs = table.apply(z, phi, |bz, bp| derivs[&(bz, bp)][j * n + i]);
            worst = worst.max((lhs.at(j, i) - rhs).abs());
        }
    }
    Ok(worst)
}

/// Euler derivative grid `D_z^{kz} D_φ^{kφ} (T_a f)` from exact jets.
pub fn euler_derivative_grid<F: SmoothFn>(
    f: &F,
    a: f64,
    grid: &EulerGrid,
    kz: usize,
    kphi: usize,
) -> Result<GridFunction> {
    GridFunction::from_euler(*grid, a, |z, phi| euler_derivative(f, a, z, phi, kz, kphi))
}

/// Multi-indices `α = (α₁, α₂)` with `|α| = k`.
pub fn multi_indices(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=k).map(move |j| (k - j, j))
}

/// `Σ_{|α|≤k} ‖D^α f‖_{L^p(w_{γ, ν+(|α|−k)p})}` by polar quadrature.
#[allow(clippy::too_many_arguments)]
pub fn kondratiev_norm<F: SmoothFn>(
    f: &F,
    k: usize,
    p: f64,
    gamma: f64,
    nu: f64,
    wedge: &WedgeParams,
    z_lo: f64,
    z_hi: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for order in 0..=k {
        let nu_o = nu + (order as f64 - k as f64) * p;
        for (i, j) in multi_indices(order) {
            total += cartesian_weighted_norm(|x| f.derivative(x, i, j), wedge, gamma, nu_o, p, z_lo, z_hi)?;
        }
    }
    Ok(total)
}

/// `Σ_{|β|≤k} ‖D^β (T_a f)‖` in the Euler norm with exponent `ν+2−(k+a)p`.
pub fn euler_sobolev_norm<F: SmoothFn>(
    f: &F,
    k: usize,
    p: f64,
    gamma: f64,
    nu: f64,
    a: f64,
    grid: &EulerGrid,
) -> Result<f64> {
    let nu_hat = nu + 2.0 - (k as f64 + a) * p;
    let mut total = 0.0;
    for order in 0..=k {
        for (bz, bp) in multi_indices(order) {
            let d = euler_derivative_grid(f, a, grid, bz, bp)?;
            total += weighted_lp_norm_euler(&d, gamma, nu_hat, p)?;
        }
    }
    Ok(total)
}

/// Angle shift helper: `φ ↦ κ − φ` reflection of a point.
pub fn reflect(x: Point2, kappa: f64) -> Point2 {
    Point2::from_polar(x.r(), kappa - x.phi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{Jet, JetFn};
    use std::f64::consts::PI;

    fn grid(kappa: f64, z: f64, m: usize, n: usize) -> EulerGrid {
        EulerGrid::new(kappa, z, m, n).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(EulerGrid::new(PI, 1.0, 5, 8).is_err());
        assert!(EulerGrid::new(PI, 1.0, 8, 3).is_err());
        assert!(EulerGrid::new(7.0, 1.0, 8, 8).is_err());
    }

    #[test]
    fn pullback_examples() {
        let g = grid(PI, 2.0, 16, 8);
        let one = pullback(|_| 1.0, 0.0, &g).unwrap();
        assert!(one.values.iter().all(|&v| v == 1.0));
        let r = pullback(|x| x.r(), -1.0, &g).unwrap();
        assert!(r.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let x2 = pullback(|x| x.x2, 0.0, &g).unwrap();
        for j in 0..g.m {
            for i in 0..g.n {
                let want = g.z(j).exp() * g.phi(i).sin();
                assert!((x2.at(j, i) - want).abs() < 1e-14 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn pushforward_constant_and_rejects_outside() {
        let g = grid(PI, 2.0, 16, 8);
        let one = pullback(|_| 1.0, 0.0, &g).unwrap();
        let pts = [Point2::new(0.3, 0.01), Point2::new(-1.0, 2.0)];
        for v in pushforward(&one, &pts).unwrap() {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(pushforward(&one, &[Point2::new(100.0, 1.0)]).is_err());
        assert!(pushforward(&one, &[Point2::new(1.0, -1.0)]).is_err());
    }

    #[test]
    fn euler_norm_of_constant() {
        let g = grid(PI, 1.0, 16, 16);
        let one = GridFunction::from_euler(g, 0.0, |_, _| 1.0).unwrap();
        let v = weighted_lp_norm_euler(&one, 0.0, 0.0, 2.0).unwrap();
        assert!((v - (2.0 * PI).sqrt()).abs() < 1e-12, "{v}");
        assert!(weighted_lp_norm_euler(&one, -1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn euler_norm_singular_weight() {
        // ∫_0^π sin(φ)^{-1/2} sin²(φ) dφ · ∫ e^{-2z²} dz
        let g = grid(PI, 6.0, 128, 63);
        let v = GridFunction::from_euler(g, 0.0, |z, phi| (-z * z).exp() * phi.sin()).unwrap();
        let got = weighted_lp_norm_euler(&v, -0.5, 0.0, 2.0).unwrap().powi(2);
        // B(5/4, 1/2)·√(π/2); B(5/4,1/2) = Γ(5/4)Γ(1/2)/Γ(7/4)
        let beta = 0.906_402_477_055_477_f64 * PI.sqrt() / 0.919_062_526_848_883_5;
        let want = beta * (PI / 2.0).sqrt();
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn dump_round_trip() {
        let g = grid(1.3, 2.0, 8, 5);
        let v = GridFunction::from_euler(g, 0.25, |z, phi| z.sin() * phi + 1e-7).unwrap();
        let back = GridFunction::from_dump(&v.to_dump()).unwrap();
        assert_eq!(back, v);
        assert!(GridFunction::from_dump("euler-grid kappa=1 Z=1 M=4 N=4 a=0\n1 2 3").is_err());
    }

    #[test]
    fn radial_coefficients_small_orders() {
        assert_eq!(radial_coefficients(1), vec![0.0, 1.0]);
        assert_eq!(radial_coefficients(2), vec![0.0, -1.0, 1.0]);
        assert_eq!(radial_coefficients(3), vec![0.0, 2.0, -3.0, 1.0]);
    }

    #[test]
    fn first_order_table() {
        let a = 0.7;
        let t = derivative_coeff_table((1, 0), a).unwrap();
        let phi = 0.4;
        assert!((t.get(1, 0).eval(phi) - phi.cos()).abs() < 1e-15);
        assert!((t.get(0, 1).eval(phi) + phi.sin()).abs() < 1e-15);
        assert!((t.get(0, 0).eval(phi) + a * phi.cos()).abs() < 1e-15);
        let t = derivative_coeff_table((0, 1), 0.0).unwrap();
        assert!((t.get(1, 0).eval(phi) - phi.sin()).abs() < 1e-15);
        assert!((t.get(0, 1).eval(phi) - phi.cos()).abs() < 1e-15);
        assert!(derivative_coeff_table((4, 3), 0.0).is_err());
    }

    #[test]
    fn identity_trivial_and_product() {
        let one = JetFn(|x: &Jet, _: &Jet| *x * 0.0 + 1.0);
        let g = grid(PI, 2.0, 64, 32);
        assert_eq!(apply_derivative_identity(&one, (1, 0), 0.0, &g).unwrap(), 0.0);
        let prod = JetFn(|x: &Jet, y: &Jet| *x * *y);
        let g = grid(PI, 2.0, 512, 128);
        let d = apply_derivative_identity(&prod, (1, 1), 0.0, &g).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn fornberg_matches_classical_stencil() {
        let w = central_weights(2, 1.0);
        let want = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
