//! Log-gamma and Bessel functions of real (fractional) order.
//!
//! `bessel_i_scaled` returns `e^{-w} I_ν(w)`, which stays O(1) for large `w`.
//! `bessel_j` covers the oscillatory regime with a Hankel expansion and the
//! transition region with normalised backward recurrence.

use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 15.0 {
        let mut prod = 1.0;
        let mut y = x;
        while y < 15.0 {
            prod *= y;
            y += 1.0;
        }
        return stirling(y) - prod.ln();
    }
    stirling(x)
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut s = 0.0;
    let mut p = inv;
    for c in STIRLING {
        s += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + s
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// `e^{-w} I_ν(w)` for `ν ≥ 0`, `w ≥ 0`.
pub fn bessel_i_scaled(nu: f64, w: f64) -> f64 {
    debug_assert!(nu >= 0.0 && w >= 0.0);
    if w == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if w >= 20.0 {
        if let Some(v) = i_scaled_asymptotic(nu, w) {
            return v;
        }
    }
    i_scaled_series(nu, w)
}

/// Large-argument expansion; `None` when it cannot reach full precision.
fn i_scaled_asymptotic(nu: f64, w: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * kf * w);
        if term.abs() > 0.5 {
            return None;
        }
        if term.abs() < 1e-17 * sum.abs() {
            sum += term;
            return Some(sum / (2.0 * PI * w).sqrt());
        }
        if term.abs() > last && odd * odd > mu {
            return None;
        }
        last = term.abs();
        sum += term;
    }
    None
}

/// Power series summed outwards from its largest term, in scaled form.
fn i_scaled_series(nu: f64, w: f64) -> f64 {
    let q = 0.5 * w;
    let q2 = q * q;
    let kstar = 0.5 * ((nu * nu + w * w).sqrt() - nu);
    let k0 = kstar.floor().max(0.0);
    let log_peak = (2.0 * k0 + nu) * q.ln() - ln_gamma(k0 + 1.0) - ln_gamma(k0 + nu + 1.0) - w;
    if log_peak < -800.0 {
        return 0.0;
    }
    let mut sum = 1.0;
    let mut t = 1.0;
    let mut k = k0;
    loop {
        t *= q2 / ((k + 1.0) * (k + 1.0 + nu));
        sum += t;
        k += 1.0;
        if t < 1e-17 * sum {
            break;
        }
    }
    let mut t = 1.0;
    let mut k = k0;
    while k >= 1.0 {
        t *= k * (k + nu) / q2;
        sum += t;
        k -= 1.0;
        if t < 1e-17 * sum {
            break;
        }
    }
    (log_peak + sum.ln()).exp()
}

/// `J_ν(x)` for `ν ≥ 0`, `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    debug_assert!(nu >= 0.0 && x >= 0.0);
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 8.0 || x * x <= 4.0 * (nu + 1.0) {
        return j_series(nu, x);
    }
    if x >= 25.0 {
        if let Some(v) = j_asymptotic(nu, x) {
            return v;
        }
    }
    j_miller(nu, x)
}

fn j_series(nu: f64, x: f64) -> f64 {
    let q = 0.5 * x;
    let log_t0 = nu * q.ln() - ln_gamma(nu + 1.0);
    if log_t0 < -745.0 {
        return 0.0;
    }
    let q2 = q * q;
    let mut t = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        t *= -q2 / (k * (k + nu));
        sum += t;
        if t.abs() < 1e-17 * sum.abs().max(1e-300) && k > q {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum * log_t0.exp()
}

fn j_asymptotic(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0;
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 1..400 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        t *= (mu - odd * odd) / (kf * 8.0 * x);
        if t.abs() > 0.5 {
            break;
        }
        match k % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if t.abs() < 1e-17 {
            converged = true;
            break;
        }
        if t.abs() > last && odd * odd > mu {
            break;
        }
        last = t.abs();
    }
    if !converged {
        return None;
    }
    // χ = x − (ν/2 + 1/4)π, with the phase reduced before multiplying by π
    let phase = (0.5 * nu + 0.25).rem_euclid(2.0) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    Some((2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi))
}

/// Backward recurrence in integer steps from above, normalised by
/// `(x/2)^{ν₀} = Σ_m (ν₀+2m) Γ(ν₀+m)/m! · J_{ν₀+2m}(x)`.
fn j_miller(nu: f64, x: f64) -> f64 {
    let nt = nu.floor();
    let nu0 = nu - nt;
    let top = x.max(nt);
    let mut m_start = (top + 30.0 + 10.0 * top.sqrt()) as usize;
    if m_start % 2 == 1 {
        m_start += 1;
    }
    let half = m_start / 2;
    let mut coef = vec![0.0; half + 1];
    if nu0 == 0.0 {
        coef[0] = 1.0;
        for c in coef.iter_mut().skip(1) {
            *c = 2.0;
        }
    } else {
        coef[0] = gamma(nu0 + 1.0);
        let mut g = coef[0];
        for (m, c) in coef.iter_mut().enumerate().skip(1) {
            if m > 1 {
                let mf = m as f64;
                g *= (nu0 + mf - 1.0) / mf;
            }
            *c = (nu0 + 2.0 * m as f64) * g;
        }
    }
    let target = nt as usize;
    let mut jp1 = 0.0;
    let mut j = 1e-280;
    let mut norm = if m_start % 2 == 0 { coef[half] * j } else { 0.0 };
    let mut value = if target == m_start { j } else { 0.0 };
    let mut k = m_start;
    while k > 0 {
        let jm1 = 2.0 * (nu0 + k as f64) / x * j - jp1;
        jp1 = j;
        j = jm1;
        k -= 1;
        if k % 2 == 0 {
            norm += coef[k / 2] * j;
        }
        if k == target {
            value = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            value *= 1e-250;
        }
    }
    value * (0.5 * x).powf(nu0) / norm
}
