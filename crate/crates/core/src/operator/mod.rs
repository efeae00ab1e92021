//! The operator `L_a`: parameters, quadratic form, spectral multipliers,
//! the closed-form radial heat kernel, Bernstein and Sobolev-equivalence ratios.

mod params;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

pub use params::{derive_params, CouplingParams};

use crate::error::{Error, Result};
use crate::hankel::{HankelPlan, RadialField, RadialGrid};
use crate::quadrature::gauss_legendre;
use crate::special::iv_scaled;

/// Spectral multiplier m(λ) applied to `L_a`.
#[derive(Clone)]
pub enum MultiplierSpec {
    /// e^{−itλ}
    Propagator { t: f64 },
    /// e^{−tλ}
    Heat { t: f64 },
    /// λ^{s/2}
    Fractional { s: f64 },
    /// e^{−λ/N²} − e^{−4λ/N²}
    LpBand { n: f64 },
    Custom(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Propagator { t } => write!(f, "Propagator({t})"),
            Self::Heat { t } => write!(f, "Heat({t})"),
            Self::Fractional { s } => write!(f, "Fractional({s})"),
            Self::LpBand { n } => write!(f, "LpBand({n})"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl MultiplierSpec {
    pub fn custom(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        match *self {
            Self::Propagator { t } if !t.is_finite() => bad(format!("propagator time {t}")),
            Self::Heat { t } if !(t >= 0.0) || !t.is_finite() => bad(format!("heat time {t} < 0")),
            Self::Fractional { s } if !(-2.0..=2.0).contains(&s) => {
                bad(format!("fractional power {s} outside [-2, 2]"))
            }
            Self::LpBand { n } if !(n > 0.0) || !n.is_finite() => bad(format!("band {n} <= 0")),
            _ => Ok(()),
        }
    }

    pub fn symbol(&self, lambda: f64) -> Complex64 {
        match self {
            Self::Propagator { t } => Complex64::from_polar(1.0, -t * lambda),
            Self::Heat { t } => Complex64::new((-t * lambda).exp(), 0.0),
            Self::Fractional { s } => Complex64::new(lambda.powf(0.5 * s), 0.0),
            Self::LpBand { n } => {
                let x = lambda / (n * n);
                Complex64::new((-x).exp() - (-4.0 * x).exp(), 0.0)
            }
            Self::Custom(f) => f(lambda),
        }
    }
}

/// `synthesize(m(λ_k) · analyze(u))`.
pub fn apply_multiplier(
    plan: &HankelPlan,
    u: &RadialField,
    spec: &MultiplierSpec,
) -> Result<RadialField> {
    spec.validate()?;
    plan.apply_diagonal(u, |lam| spec.symbol(lam))
}

fn smooth_step_part(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C^∞ cutoff: 1 on [0, 1], 0 on [2, ∞), monotone in between.
pub fn lp_cutoff(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        let a = smooth_step_part(2.0 - x);
        let b = smooth_step_part(x - 1.0);
        a / (a + b)
    }
}

/// Symbol of P_N = φ(√λ/N) − φ(2√λ/N).
pub fn lp_piece(lambda: f64, n: f64) -> f64 {
    let k = lambda.sqrt();
    lp_cutoff(k / n) - lp_cutoff(2.0 * k / n)
}

/// The three evaluations of `Q(u) = ‖L_a^{1/2} u‖²` on ℝ^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    /// ω Σ λ_k |c_k|²
    pub spectral: f64,
    /// ω ∫ (|∂_r u|² + a|u|²/r²) r^{d−1} dr
    pub gradient_potential: f64,
    /// ω ∫ |∂_r u + σu/r|² r^{d−1} dr
    pub completed_square: f64,
    /// The integrand near the innermost node carries a non-negligible share.
    pub origin_unresolved: bool,
}

impl QuadraticForm {
    pub fn max_relative_spread(&self) -> f64 {
        let v = [self.spectral, self.gradient_potential, self.completed_square];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        if hi == 0.0 {
            0.0
        } else {
            (hi - lo) / hi.abs()
        }
    }
}

pub fn quadratic_form_q(
    plan: &HankelPlan,
    u: &RadialField,
    params: &CouplingParams,
) -> Result<QuadraticForm> {
    let c = plan.analyze(u)?;
    let du = plan.derivative_of_spectral(&c)?;
    let grid = plan.grid();
    let omega = params.omega();
    let spectral = omega * c.energy_sum();
    let mut grad = 0.0;
    let mut square = 0.0;
    let mut first = None;
    for (((&r, &w), z), dz) in grid.nodes().iter().zip(grid.quad_weights()).zip(&u.values).zip(&du.values) {
        let g = w * (dz.norm_sqr() + params.a * z.norm_sqr() / (r * r));
        let s = w * (dz + z * (params.sigma / r)).norm_sqr();
        grad += g;
        square += s;
        first.get_or_insert(s);
    }
    Ok(QuadraticForm {
        spectral,
        gradient_potential: omega * grad,
        completed_square: omega * square,
        origin_unresolved: first.unwrap_or(0.0).abs() > 1e-6 * square.abs(),
    })
}

/// Spectral value of `Q(u)` only.
pub fn kinetic(plan: &HankelPlan, u: &RadialField, params: &CouplingParams) -> Result<f64> {
    Ok(params.omega() * plan.analyze(u)?.energy_sum())
}

/// Radial-sector heat kernel with respect to `r′^{d−1} dr′`.
pub fn heat_kernel_radial(params: &CouplingParams, t: f64, r: f64, r2: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel requires t > 0, got {t}")));
    }
    if !(r > 0.0 && r2 > 0.0) {
        return Err(Error::Domain("heat kernel requires r, r' > 0".into()));
    }
    let z = r * r2 / (2.0 * t);
    let p = params.half_dim();
    Ok((r * r2).powf(-p) / (2.0 * t) * (-(r - r2).powi(2) / (4.0 * t)).exp() * iv_scaled(params.nu, z))
}

/// `∫₀^∞ k(t, r, r′) f(r′) r′^{d−1} dr′` by composite Gauss–Legendre on [0, r_max].
pub fn heat_kernel_apply(
    params: &CouplingParams,
    t: f64,
    r: f64,
    r_max: f64,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    let (x, w) = gauss_legendre(20);
    let width = (0.25 * t.sqrt()).min(0.25);
    let panels = (r_max / width).ceil() as usize;
    let h = r_max / panels as f64;
    let d1 = params.d as i32 - 1;
    let mut total = 0.0;
    for i in 0..panels {
        let a = i as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let s = a + 0.5 * h * (1.0 + xi);
            total += 0.5 * h * wi * heat_kernel_radial(params, t, r, s)? * f(s) * s.powi(d1);
        }
    }
    Ok(total)
}

/// Supremum and infimum of `k / [(1∨√t/r)^σ (1∨√t/r′)^σ t^{−d/2} e^{−(r−r′)²/(ct)}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub c: f64,
    pub upper: f64,
    pub lower: f64,
    pub points: usize,
}

/// Fit over a log-spaced grid of `n` points per axis in t, r, r′ ∈ [lo, hi].
pub fn heat_envelope_fit(
    params: &CouplingParams,
    c: f64,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<EnvelopeFit> {
    if !(c >= 4.0) || !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(Error::InvalidParameter(format!("envelope fit with c={c}, range [{lo}, {hi}], n={n}")));
    }
    let axis: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n as f64 - 1.0)))
        .collect();
    let d = params.d as f64;
    let mut upper: f64 = 0.0;
    let mut lower = f64::INFINITY;
    for &t in &axis {
        let st = t.sqrt();
        for &r in &axis {
            for &r2 in &axis {
                let z = r * r2 / (2.0 * t);
                let gap = (r - r2).powi(2);
                let q = (r * r2).powf(-params.half_dim()) / (2.0 * t)
                    * (-gap / (4.0 * t) + gap / (c * t)).exp()
                    * iv_scaled(params.nu, z)
                    / ((st / r).max(1.0).powf(params.sigma)
                        * (st / r2).max(1.0).powf(params.sigma)
                        * t.powf(-d / 2.0));
                upper = upper.max(q);
                lower = lower.min(q);
            }
        }
    }
    Ok(EnvelopeFit { c, upper, lower, points: n * n * n })
}

/// `(ω ∫|u|^p r^{d−1} dr)^{1/p}`; `p = ∞` gives the sup norm over nodes.
pub fn lebesgue_norm(u: &RadialField, p: f64) -> f64 {
    if p.is_infinite() {
        return u.max_abs();
    }
    let grid = u.grid();
    let omega = omega_of(grid);
    let s: f64 = u.values.iter().zip(grid.quad_weights()).map(|(z, w)| w * z.norm().powf(p)).sum();
    (omega * s).powf(1.0 / p)
}

pub(crate) fn omega_of(grid: &RadialGrid) -> f64 {
    let h = grid.d() as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / crate::special::gamma_pos(h)
}

/// Lower edge r₀ = d/(d−σ) of the Bernstein window for a < 0.
pub fn bernstein_lower_exponent(params: &CouplingParams) -> f64 {
    let d = params.d as f64;
    d / (d - params.sigma)
}

fn check_bernstein_window(params: &CouplingParams, p: f64, q: f64) -> Result<()> {
    if !(p <= q) {
        return Err(Error::ExponentWindow(format!("need p <= q, got p={p}, q={q}")));
    }
    if params.a >= 0.0 {
        if p > 1.0 {
            return Ok(());
        }
        return Err(Error::ExponentWindow(format!("need 1 < p, got p={p}")));
    }
    let r0 = bernstein_lower_exponent(params);
    let r0p = params.d as f64 / params.sigma;
    if p > r0 && q < r0p {
        Ok(())
    } else {
        Err(Error::ExponentWindow(format!("need {r0} < p <= q < {r0p}, got p={p}, q={q}")))
    }
}

/// `‖P̃_N u‖_q / (N^{d/p−d/q} ‖u‖_p)`.
pub fn bernstein_ratio(
    plan: &HankelPlan,
    u: &RadialField,
    band: f64,
    p: f64,
    q: f64,
    params: &CouplingParams,
) -> Result<f64> {
    check_bernstein_window(params, p, q)?;
    let pu = apply_multiplier(plan, u, &MultiplierSpec::LpBand { n: band })?;
    let d = params.d as f64;
    let gain = if q.is_infinite() { d / p } else { d / p - d / q };
    Ok(lebesgue_norm(&pu, q) / (band.powf(gain) * lebesgue_norm(u, p)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevRatios {
    /// ‖(−Δ)^{s/2}u‖_p / ‖L_a^{s/2}u‖_p
    pub forward: f64,
    /// ‖L_a^{s/2}u‖_p / ‖(−Δ)^{s/2}u‖_p
    pub reverse: f64,
    /// p lies in the window where the forward ratio is bounded.
    pub forward_in_window: bool,
}

/// Both ratios, with the free operator evaluated on `free_plan` (order (d−2)/2)
/// after exact evaluation of u's eigen-expansion at its nodes.
pub fn sobolev_equiv_ratio(
    plan: &HankelPlan,
    free_plan: &HankelPlan,
    u: &RadialField,
    s: f64,
    p: f64,
    params: &CouplingParams,
) -> Result<SobolevRatios> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::InvalidParameter(format!("power s = {s} outside (0, 2)")));
    }
    let d = params.d as f64;
    let inv = 1.0 / p;
    let top = 1.0f64.min((d - params.sigma) / d);
    let reverse_lo = (s / d).max(params.sigma / d);
    if !(inv > reverse_lo && inv < top) {
        return Err(Error::ExponentWindow(format!(
            "need {reverse_lo} < 1/p < {top}, got 1/p = {inv}"
        )));
    }
    let forward_in_window = inv > (s + params.sigma) / d;
    let la = apply_multiplier(plan, u, &MultiplierSpec::Fractional { s })?;
    let c = plan.analyze(u)?;
    let resampled = plan.evaluate(&c, free_plan.grid().nodes())?;
    let uf = free_plan.field(resampled)?;
    let free = apply_multiplier(free_plan, &uf, &MultiplierSpec::Fractional { s })?;
    let forward = lebesgue_norm(&free, p) / lebesgue_norm(&la, p);
    Ok(SobolevRatios { forward, reverse: 1.0 / forward, forward_in_window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn params_examples() {
        let p = derive_params(3, 0.0).unwrap();
        assert_eq!((p.sigma, p.beta, p.nu), (0.0, 1.0, 0.5));
        let p = derive_params(3, 0.75).unwrap();
        assert_eq!((p.sigma, p.beta, p.nu), (-0.5, 2.0, 1.0));
        let p = derive_params(3, -0.21).unwrap();
        assert!((p.sigma - 0.3).abs() < 1e-15);
        assert!(!p.evolution_admissible);
        assert!(derive_params(3, -0.2).unwrap().evolution_admissible);
        assert!(!derive_params(4, 0.0).unwrap().evolution_admissible);
    }

    #[test]
    fn hardy_violation() {
        assert!(matches!(derive_params(3, -0.25), Err(Error::HardyViolation { .. })));
        assert!(matches!(derive_params(5, -2.25), Err(Error::HardyViolation { .. })));
        assert!(derive_params(2, 0.0).is_err());
    }

    #[test]
    fn omega_values() {
        assert!((derive_params(3, 0.0).unwrap().omega() - 4.0 * PI).abs() < 1e-13);
        assert!((derive_params(4, 0.0).unwrap().omega() - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(lp_cutoff(0.3), 1.0);
        assert_eq!(lp_cutoff(2.5), 0.0);
        assert!((lp_cutoff(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = lp_cutoff(1.0 + i as f64 / 1000.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(MultiplierSpec::Heat { t: -1.0 }.validate().is_err());
        assert!(MultiplierSpec::Fractional { s: 2.5 }.validate().is_err());
        assert!(MultiplierSpec::LpBand { n: 0.0 }.validate().is_err());
        assert!(MultiplierSpec::Propagator { t: -3.0 }.validate().is_ok());
    }

    #[test]
    fn free_heat_kernel_is_sphere_average() {
        let p = derive_params(3, 0.0).unwrap();
        for &(t, r, s) in &[(0.1, 1.0, 1.3), (2.0, 0.5, 3.0), (0.01, 4.0, 4.05)] {
            let k = heat_kernel_radial(&p, t, r, s).unwrap();
            let avg = (4.0 * PI * t).powf(-1.5)
                * 2.0
                * PI
                * (4.0 * t / (r * s))
                * (-(r - s).powi(2) / (4.0 * t)).exp()
                * 0.5
                * (1.0 - (-r * s / t).exp());
            assert!(((k - avg) / avg).abs() < 1e-12);
        }
        assert!(heat_kernel_radial(&p, 0.0, 1.0, 1.0).is_err());
    }
}
