//! Gauss–Legendre rules and graded composite integration for closed-form
//! radial integrands that may be singular (integrably) at the origin and
//! decay algebraically at infinity.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite rule with geometrically graded panels, built once and reused.
#[derive(Debug, Clone)]
pub struct GradedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

const ORDER: usize = 24;
const RATIO: f64 = 0.6;

impl GradedRule {
    /// ∫₀^∞ with panels clustered toward 0 and, through r = 1/s, toward ∞.
    pub fn half_line() -> Self {
        let (gx, gw) = gauss_legendre(ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut hi = 1.0;
        while hi > 1e-40 {
            let lo = hi * RATIO;
            for (x, w) in gx.iter().zip(&gw) {
                let s = 0.5 * (hi + lo) + 0.5 * (hi - lo) * x;
                let ws = 0.5 * (hi - lo) * w;
                nodes.push(s);
                weights.push(ws);
                nodes.push(1.0 / s);
                weights.push(ws / (s * s));
            }
            hi = lo;
        }
        Self { nodes, weights }
    }

    /// ∫₀^b with panels clustered toward 0.
    pub fn interval(b: f64) -> Self {
        let (gx, gw) = gauss_legendre(ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut hi = b;
        while hi > 1e-40 * b {
            let lo = hi * RATIO;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(0.5 * (hi + lo) + 0.5 * (hi - lo) * x);
                weights.push(0.5 * (hi - lo) * w);
            }
            hi = lo;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(r)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn half_line_integrals() {
        let rule = GradedRule::half_line();
        let g = rule.integrate(|r| (-r * r).exp());
        assert!((g - PI.sqrt() / 2.0).abs() < 1e-14);
        // ∫ r^{-1/2} (1 + r)^{-1} dr = π
        let s = rule.integrate(|r| 1.0 / (r.sqrt() * (1.0 + r)));
        assert!((s - PI).abs() < 1e-12);
        // ∫ 4π r² (1 + r²)^{-3} dr = π²/4
        let b = rule.integrate(|r| 4.0 * PI * r * r / (1.0 + r * r).powi(3));
        assert!((b - PI * PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn interval_integral() {
        let rule = GradedRule::interval(2.0);
        let v = rule.integrate(|r| r.powf(-0.75));
        assert!((v - 4.0 * 2f64.powf(0.25)).abs() < 1e-9);
    }
}
