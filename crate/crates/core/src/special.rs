//! Scalar special functions: Gamma, Bessel J_ν, its zeros, and the
//! exponentially scaled modified Bessel function e^{-x} I_ν(x).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Order of a Bessel family, restricted to `0 ≤ ν < 50`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || !(0.0..50.0).contains(&nu) {
            return Err(Error::Domain(format!("Bessel order {nu} outside [0, 50)")));
        }
        Ok(Self(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_pos(x))
}

pub(crate) fn gamma_pos(x: f64) -> f64 {
    if x.fract() == 0.0 && x <= 23.0 {
        let mut f = 1.0;
        for k in 2..(x as u32) {
            f *= k as f64;
        }
        return f;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_pos(1.0 - x));
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * ((y + 0.5) * t.ln() - t).exp() * lanczos_sum(y)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x.fract() == 0.0 && x <= 23.0 {
        return gamma_pos(x).ln();
    }
    let y = x - 1.0;
    let t = y + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + lanczos_sum(y).ln()
}

/// Bessel function of the first kind J_ν(x).
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("bessel_j requires x >= 0, got {x}")));
    }
    Ok(jv(order.0, x))
}

/// J_ν(x) without argument checks; `nu ≥ 0`, `x ≥ 0`.
pub(crate) fn jv(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if let Some(v) = half_integer_j(nu, x) {
        return v;
    }
    if x <= 8.0 || x * x <= 4.0 * (nu + 1.0) {
        return series_j(nu, x);
    }
    if x >= 25.0_f64.max(nu * nu) {
        if let Some(v) = hankel_asymptotic_j(nu, x) {
            return v;
        }
    }
    miller_j(nu, x)
}

/// d/dx J_ν(x) = (ν/x) J_ν(x) − J_{ν+1}(x).
pub(crate) fn jv_prime(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return match nu {
            n if n == 1.0 => 0.5,
            n if n == 0.0 || n > 1.0 => 0.0,
            _ => f64::INFINITY,
        };
    }
    nu / x * jv(nu, x) - jv(nu + 1.0, x)
}

fn half_integer_j(nu: f64, x: f64) -> Option<f64> {
    let shifted = nu - 0.5;
    if shifted < 0.0 || shifted.fract() != 0.0 {
        return None;
    }
    let n = shifted as usize;
    let amp = (2.0 / (PI * x)).sqrt();
    if n == 0 {
        return Some(amp * x.sin());
    }
    if x < 1.0 || x < n as f64 {
        return None;
    }
    let mut prev = amp * x.cos();
    let mut cur = amp * x.sin();
    for k in 0..n {
        let mu = k as f64 + 0.5;
        let next = 2.0 * mu / x * cur - prev;
        prev = cur;
        cur = next;
    }
    Some(cur)
}

fn series_j(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let pref = (nu * h.ln() - ln_gamma(nu + 1.0)).exp();
    let q = h * h;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..500 {
        let m = m as f64;
        term *= -q / (m * (m + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && m > q.sqrt() {
            break;
        }
    }
    pref * sum
}

fn hankel_asymptotic_j(nu: f64, x: f64) -> Option<f64> {
    let mu4 = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut converged = false;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * (mu4 - odd * odd) / (8.0 * kf * x);
        if next.abs() > term.abs() && k > 2 {
            break;
        }
        term = next;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (s, c) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = c * cp + s * sp;
    let sin_chi = s * cp - c * sp;
    Some((2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi))
}

/// Backward recurrence normalized by (x/2)^μ = Σ_k α_k J_{μ+2k}(x), μ = ν − ⌊ν⌋.
fn miller_j(nu: f64, x: f64) -> f64 {
    let n = nu.floor() as usize;
    let mu = nu - n as f64;
    let top = (n as f64).max(x);
    let mut m = (top + 12.0 * top.cbrt() + 30.0).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut f_next = 0.0;
    let mut f = 1e-280;
    let mut target = 0.0;
    let mut norm = 0.0;
    // α_k for k = m/2 down to 0, where α_k = (μ + 2k) Γ(μ + k) / k!.
    let kmax = m / 2;
    let mut g = vec![0.0; kmax + 1];
    g[0] = gamma_pos(mu + 1.0);
    if kmax >= 1 {
        g[1] = if mu == 0.0 { 1.0 } else { gamma_pos(mu + 1.0) };
        for k in 1..kmax {
            g[k + 1] = g[k] * (mu + k as f64) / (k as f64 + 1.0);
        }
    }
    let alpha = |k: usize| -> f64 {
        if k == 0 {
            g[0]
        } else {
            (mu + 2.0 * k as f64) * g[k]
        }
    };
    let mut j = m;
    loop {
        if j % 2 == 0 {
            norm += alpha(j / 2) * f;
        }
        if j == n {
            target = f;
        }
        if j == 0 {
            break;
        }
        let order = mu + j as f64;
        let f_prev = 2.0 * order / x * f - f_next;
        f_next = f;
        f = f_prev;
        j -= 1;
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            target *= 1e-250;
            norm *= 1e-250;
        }
    }
    let scale = if mu == 0.0 { 1.0 } else { (mu * (0.5 * x).ln()).exp() };
    target * scale / norm
}

fn mcmahon(nu: f64, k: usize) -> f64 {
    let b = (k as f64 + 0.5 * nu - 0.25) * PI;
    let mu = 4.0 * nu * nu;
    let e = 8.0 * b;
    b - (mu - 1.0) / e
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e.powi(5))
}

/// First `count` positive zeros of J_ν in increasing order.
pub fn bessel_zeros(order: BesselOrder, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let nu = order.0;
    let mut zeros: Vec<f64> = Vec::with_capacity(count);
    for k in 1..=count {
        let expect_positive = k % 2 == 1;
        let positive_at = |x: f64| jv(nu, x) > 0.0;
        let prev = zeros.last().copied();
        let lo_bound = prev.map_or(nu.max(2.0), |p| p + 0.05);
        let bracket = match prev {
            Some(p) if k > 2 => {
                let guess = if k as f64 > nu + 5.0 {
                    mcmahon(nu, k)
                } else {
                    2.0 * p - zeros[k - 3]
                };
                let left = (guess - 0.75).max(lo_bound);
                let right = guess + 0.75;
                let ok = right > left
                    && left < p + 3.0
                    && positive_at(left) == expect_positive
                    && positive_at(right) != expect_positive;
                ok.then_some((left, right))
            }
            _ => None,
        };
        let (mut lo, mut hi) = match bracket {
            Some(b) => b,
            None => scan_bracket(nu, lo_bound, expect_positive)?,
        };
        let mut x = 0.5 * (lo + hi);
        let mut done = false;
        for _ in 0..100 {
            let f = jv(nu, x);
            if f == 0.0 {
                done = true;
                break;
            }
            if (f > 0.0) == expect_positive {
                lo = x;
            } else {
                hi = x;
            }
            let df = jv_prime(nu, x);
            let mut xn = x - f / df;
            if !(xn > lo && xn < hi) || !xn.is_finite() {
                xn = 0.5 * (lo + hi);
            }
            let step = (xn - x).abs();
            x = xn;
            if step <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Convergence(format!("zero {k} of J_{nu} did not converge")));
        }
        zeros.push(x);
    }
    Ok(zeros)
}

fn scan_bracket(nu: f64, start: f64, expect_positive: bool) -> Result<(f64, f64)> {
    let h = 0.5;
    let mut a = start;
    for _ in 0..10_000 {
        let b = a + h;
        if (jv(nu, b) > 0.0) != expect_positive {
            return Ok((a, b));
        }
        a = b;
    }
    Err(Error::Convergence(format!("no sign change of J_{nu} found above {start}")))
}

/// e^{-x} I_ν(x), overflow free.
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("bessel_i_scaled requires x >= 0, got {x}")));
    }
    Ok(iv_scaled(order.0, x))
}

pub(crate) fn iv_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x >= 30.0_f64.max(nu * nu) {
        if let Some(v) = asymptotic_i_scaled(nu, x) {
            return v;
        }
    }
    series_i_scaled(nu, x)
}

fn asymptotic_i_scaled(nu: f64, x: f64) -> Option<f64> {
    let mu4 = 4.0 * nu * nu;
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu4 - odd * odd) / (8.0 * kf * x);
        if next.abs() > term.abs() && k > 2 {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(sum / (2.0 * PI * x).sqrt());
        }
    }
    None
}

fn series_i_scaled(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let q = h * h;
    let disc = (nu * nu + x * x).sqrt();
    let peak = ((disc - nu - 2.0) / 2.0).ceil().max(0.0) as usize;
    let pf = peak as f64;
    let log_peak = (2.0 * pf + nu) * h.ln() - ln_gamma(pf + 1.0) - ln_gamma(pf + nu + 1.0);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut m = pf;
    loop {
        term *= q / ((m + 1.0) * (m + 1.0 + nu));
        sum += term;
        m += 1.0;
        if term < 1e-17 * sum {
            break;
        }
    }
    term = 1.0;
    let mut m = pf;
    while m > 0.0 {
        term *= m * (m + nu) / q;
        sum += term;
        m -= 1.0;
        if term < 1e-17 * sum {
            break;
        }
    }
    (log_peak - x).exp() * sum
}
