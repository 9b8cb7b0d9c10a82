//! Bivariate truncated Taylor series ("jets") for exact partial derivatives
//! of closed-form test functions up to total order six.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::geometry::Point2;

pub const MAX_ORDER: usize = 6;
const LEN: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

const fn build_exps() -> [(usize, usize); LEN] {
    let mut out = [(0, 0); LEN];
    let mut d = 0;
    let mut k = 0;
    while d <= MAX_ORDER {
        let mut j = 0;
        while j <= d {
            out[k] = (d - j, j);
            k += 1;
            j += 1;
        }
        d += 1;
    }
    out
}

const EXPS: [(usize, usize); LEN] = build_exps();

#[inline]
pub fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

#[inline]
fn len_for(ord: usize) -> usize {
    (ord + 1) * (ord + 2) / 2
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Taylor coefficients `c[idx(i,j)] = ∂₁^i ∂₂^j f / (i! j!)`, truncated at `ord`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    ord: usize,
    c: [f64; LEN],
}

impl Jet {
    pub fn constant(v: f64, ord: usize) -> Self {
        assert!(ord <= MAX_ORDER, "jet order {ord} exceeds {MAX_ORDER}");
        let mut c = [0.0; LEN];
        c[0] = v;
        Self { ord, c }
    }

    /// The coordinate function `x_{which}` (0 or 1) expanded at `v`.
    pub fn var(v: f64, which: usize, ord: usize) -> Self {
        let mut j = Self::constant(v, ord);
        if ord >= 1 {
            j.c[if which == 0 { idx(1, 0) } else { idx(0, 1) }] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.ord
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.ord {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    /// `∂₁^i ∂₂^j` at the expansion point.
    pub fn deriv(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    fn like(&self, v: f64) -> Self {
        Self::constant(v, self.ord)
    }

    /// `F(self)` given `derivs[k] = F^{(k)}(self.value())` for `k ≤ ord`.
    pub fn compose(&self, derivs: &[f64]) -> Self {
        let mut out = self.like(derivs[0]);
        if self.ord == 0 {
            return out;
        }
        let mut h = *self;
        h.c[0] = 0.0;
        let mut hp = h;
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().take(self.ord + 1).skip(1) {
            fact *= k as f64;
            if k > 1 {
                hp = hp * h;
            }
            let s = d / fact;
            for t in 1..len_for(self.ord) {
                out.c[t] += s * hp.c[t];
            }
        }
        out
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.compose(&[e; MAX_ORDER + 1])
    }

    pub fn ln(&self) -> Self {
        let x = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        d[0] = x.ln();
        let mut p = 1.0 / x;
        for (k, dk) in d.iter_mut().enumerate().skip(1) {
            *dk = p;
            p *= -(k as f64) / x;
        }
        self.compose(&d)
    }

    pub fn powf(&self, s: f64) -> Self {
        let x = self.c[0];
        let mut d = [0.0; MAX_ORDER + 1];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate().take(self.ord + 1) {
            *dk = coef * x.powf(s - k as f64);
            coef *= s - k as f64;
        }
        self.compose(&d)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = self.like(1.0);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Self {
        self.powf(-1.0)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.ord).map(|k| cyc[k % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        let cyc = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.ord).map(|k| cyc[k % 4]).collect();
        self.compose(&d)
    }

    /// `atan2(y, x)` with the constant term in `(-π, π]`.
    pub fn atan2(y: &Jet, x: &Jet) -> Jet {
        let (x0, y0) = (x.c[0], y.c[0]);
        let theta0 = y0.atan2(x0);
        let mut u = (*y * x0 - *x * y0) / (*x * x0 + *y * y0);
        u.c[0] = 0.0;
        // atan(u) for nilpotent u, truncated at order six
        let u2 = u * u;
        let u3 = u2 * u;
        let u5 = u3 * u2;
        let mut out = u - u3 * (1.0 / 3.0) + u5 * 0.2;
        out.c[0] = theta0;
        out
    }

    fn max_ord(a: &Jet, b: &Jet) -> usize {
        a.ord.max(b.ord)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let ord = Jet::max_ord(&self, &o);
        let mut c = [0.0; LEN];
        for (t, ct) in c.iter_mut().enumerate().take(len_for(ord)) {
            *ct = self.c[t] + o.c[t];
        }
        Jet { ord, c }
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for t in 0..len_for(self.ord) {
            self.c[t] = -self.c[t];
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let ord = Jet::max_ord(&self, &o);
        let n = len_for(ord);
        let mut c = [0.0; LEN];
        for p in 0..n {
            let ap = self.c[p];
            if ap == 0.0 {
                continue;
            }
            let (i1, j1) = EXPS[p];
            let rest = ord - i1 - j1;
            for q in 0..len_for(rest) {
                let (i2, j2) = EXPS[q];
                c[idx(i1 + i2, j1 + j2)] += ap * o.c[q];
            }
        }
        Jet { ord, c }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, s: f64) -> Jet {
        self.c[0] += s;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, s: f64) -> Jet {
        self.c[0] -= s;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, s: f64) -> Jet {
        for t in 0..len_for(self.ord) {
            self.c[t] *= s;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, s: f64) -> Jet {
        self * (1.0 / s)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j * self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, j: Jet) -> Jet {
        j + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        (-j) + self
    }
}

/// A function on the plane whose partial derivatives are available through jets.
pub trait SmoothFn: Sync {
    fn jet(&self, x1: &Jet, x2: &Jet) -> Jet;

    fn value(&self, x: Point2) -> f64 {
        self.jet(&Jet::constant(x.x1, 0), &Jet::constant(x.x2, 0)).value()
    }

    /// `∂₁^{i} ∂₂^{j} f(x)`.
    fn derivative(&self, x: Point2, i: usize, j: usize) -> f64 {
        let ord = i + j;
        self.jet(&Jet::var(x.x1, 0, ord), &Jet::var(x.x2, 1, ord)).deriv(i, j)
    }
}

/// Adapter turning a closure over jets into a [`SmoothFn`].
pub struct JetFn<F>(pub F);

impl<F> SmoothFn for JetFn<F>
where
    F: Fn(&Jet, &Jet) -> Jet + Sync,
{
    fn jet(&self, x1: &Jet, x2: &Jet) -> Jet {
        (self.0)(x1, x2)
    }
}

/// `(log r, φ)` as jets in the Cartesian variables, with `φ ∈ [0, 2π)`.
pub fn euler_of(x1: &Jet, x2: &Jet) -> (Jet, Jet) {
    let z = (*x1 * *x1 + *x2 * *x2).ln() * 0.5;
    let mut phi = Jet::atan2(x2, x1);
    if phi.value() < 0.0 {
        phi = phi + std::f64::consts::TAU;
    }
    (z, phi)
}

/// `(e^z cos φ, e^z sin φ)` as jets in `(z, φ)`.
pub fn cartesian_of(z: &Jet, phi: &Jet) -> (Jet, Jet) {
    let e = z.exp();
    (e * phi.cos(), e * phi.sin())
}

/// `∂_z^{kz} ∂_φ^{kφ}` of `e^{az} f(e^z cos φ, e^z sin φ)`.
pub fn euler_derivative<F: SmoothFn + ?Sized>(f: &F, a: f64, z: f64, phi: f64, kz: usize, kphi: usize) -> f64 {
    let ord = kz + kphi;
    let zj = Jet::var(z, 0, ord);
    let pj = Jet::var(phi, 1, ord);
    let (x1, x2) = cartesian_of(&zj, &pj);
    let mut v = f.jet(&x1, &x2);
    if a != 0.0 {
        v = v * (zj * a).exp();
    }
    v.deriv(kz, kphi)
}
