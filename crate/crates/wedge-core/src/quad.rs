//! Quadrature rules: Gauss-Legendre, double-exponential (tanh-sinh) and
//! adaptive Gauss-Kronrod.

use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule over the given panel breakpoints.
pub fn composite_rule(breaks: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::new(order);
    let mut xs = Vec::with_capacity(order * breaks.len());
    let mut ws = Vec::with_capacity(order * breaks.len());
    for pair in breaks.windows(2) {
        for (x, w) in gl.on(pair[0], pair[1]) {
            xs.push(x);
            ws.push(w);
        }
    }
    (xs, ws)
}

/// Breakpoints `lo, lo*q, lo*q^2, ...` up to `hi` (last panel clipped).
pub fn geometric_breaks(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && ratio > 1.0);
    let mut b = vec![lo];
    let mut x = lo;
    while x * ratio < hi * (1.0 - 1e-12) {
        x *= ratio;
        b.push(x);
    }
    b.push(hi);
    b
}

pub fn uniform_breaks(lo: f64, hi: f64, panels: usize) -> Vec<f64> {
    (0..=panels)
        .map(|k| lo + (hi - lo) * k as f64 / panels as f64)
        .collect()
}

const TS_TMAX: f64 = 4.5;

/// Tanh-sinh quadrature on [a, b].
///
/// The integrand receives `(x, x - a, b - x)` with both gaps computed without
/// cancellation, so algebraic endpoint singularities can be evaluated
/// accurately. Returns `Err(best)` when the level budget is exhausted.
pub fn tanh_sinh<F>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_level: u32,
) -> Result<QuadResult, QuadResult>
where
    F: FnMut(f64, f64, f64) -> f64,
{
    let len = b - a;
    if len <= 0.0 {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    }
    let half = 0.5 * len;
    let mut evals = 0usize;
    let mut node = |t: f64, evals: &mut usize| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (2.0 * u).exp();
        let gl = len / (1.0 + 1.0 / e);
        let gr = len / (1.0 + e);
        if !(gl > 0.0 && gr > 0.0) {
            return 0.0;
        }
        let ch = u.cosh();
        let w = half * FRAC_PI_2 * t.cosh() / (ch * ch);
        if w == 0.0 || !w.is_finite() {
            return 0.0;
        }
        let x = if gl <= gr { a + gl } else { b - gr };
        *evals += 1;
        w * f(x, gl, gr)
    };

    let kmax = TS_TMAX as i64;
    let mut sum = 0.0;
    for k in -kmax..=kmax {
        sum += node(k as f64, &mut evals);
    }
    let mut h = 1.0;
    let mut prev = sum * h;
    let mut err = f64::INFINITY;
    for level in 1..=max_level {
        h *= 0.5;
        let n = (TS_TMAX / h) as i64;
        let mut add = 0.0;
        for k in (-n..=n).filter(|k| k % 2 != 0) {
            add += node(k as f64 * h, &mut evals);
        }
        sum += add;
        let cur = sum * h;
        err = (cur - prev).abs();
        if level >= 3 && err <= abs_tol.max(rel_tol * cur.abs()) {
            return Ok(QuadResult { value: cur, error: err, evals });
        }
        prev = cur;
    }
    Err(QuadResult { value: prev, error: err, evals })
}

/// Fixed-level tanh-sinh nodes and weights on [a, b]; returns `(x, gap_a, gap_b, w)`.
pub fn tanh_sinh_nodes(a: f64, b: f64, level: u32) -> Vec<(f64, f64, f64, f64)> {
    let len = b - a;
    let half = 0.5 * len;
    let h = 0.5f64.powi(level as i32);
    let n = (TS_TMAX / h) as i64;
    let mut out = Vec::with_capacity(2 * n as usize + 1);
    for k in -n..=n {
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let e = (2.0 * u).exp();
        let gl = len / (1.0 + 1.0 / e);
        let gr = len / (1.0 + e);
        if !(gl > 0.0 && gr > 0.0) {
            continue;
        }
        let ch = u.cosh();
        let w = h * half * FRAC_PI_2 * t.cosh() / (ch * ch);
        if w == 0.0 || !w.is_finite() {
            continue;
        }
        let x = if gl <= gr { a + gl } else { b - gr };
        out.push((x, gl, gr, w));
    }
    out
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Adaptive Gauss-Kronrod (7-15) with initial breakpoints.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadResult, QuadResult> {
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            evals += 15;
            intervals.push((w[0], w[1], v, e));
        }
    }
    loop {
        let total: f64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(QuadResult { value: total, error: err, evals });
        }
        if intervals.len() >= max_intervals {
            return Err(QuadResult { value: total, error: err, evals });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (a, b, _, _) = intervals.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        evals += 30;
        intervals.push((a, m, v1, e1));
        intervals.push((m, b, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(10);
        for k in 0..20 {
            let got = gl.integrate(0.0, 2.0, |x| x.powi(k));
            let want = 2f64.powi(k + 1) / (k + 1) as f64;
            assert!((got - want).abs() < 1e-13 * want, "k={k} {got} {want}");
        }
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} (1-x)^{-1/4} dx = B(1/2, 3/4)
        let r = tanh_sinh(
            |_, a, b| a.powf(-0.5) * b.powf(-0.25),
            0.0,
            1.0,
            1e-13,
            0.0,
            10,
        )
        .unwrap();
        let want = 2.396280469471184; // Γ(1/2)Γ(3/4)/Γ(5/4)
        assert!((r.value - want).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn gauss_kronrod_oscillatory() {
        let r = adaptive_gk(|x| (10.0 * x).cos(), &[0.0, 3.0], 1e-14, 1e-13, 200).unwrap();
        assert!((r.value - (30f64).sin() / 10.0).abs() < 1e-12);
    }
}
