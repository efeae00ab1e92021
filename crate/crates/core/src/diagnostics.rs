//! Conserved quantities, virial and truncated-mass monitors, space-time norms,
//! Strichartz and local-smoothing ratios.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::hankel::{HankelPlan, RadialField};
use crate::operator::{kinetic, lebesgue_norm, CouplingParams};
use crate::quadrature::gauss_legendre;
use crate::variational::energy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub mass: f64,
    pub energy: f64,
    pub kinetic: f64,
}

pub fn mass(u: &RadialField, params: &CouplingParams) -> f64 {
    params.omega() * u.radial_l2_squared()
}

pub fn conserved_quantities(
    u: &RadialField,
    plan: &HankelPlan,
    params: &CouplingParams,
    mu: f64,
) -> Result<Conserved> {
    Ok(Conserved { mass: mass(u, params), energy: energy(plan, u, params, mu)?, kinetic: kinetic(plan, u, params)? })
}

/// Degree-7 smoothstep `35x⁴ − 84x⁵ + 70x⁶ − 20x⁷` and its derivatives.
fn smoothstep(x: f64) -> [f64; 4] {
    if x <= 0.0 {
        return [0.0; 4];
    }
    if x >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let x2 = x * x;
    let x3 = x2 * x;
    [
        x3 * x * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x3),
        x3 * (140.0 - 420.0 * x + 420.0 * x2 - 140.0 * x3),
        x2 * (420.0 - 1680.0 * x + 2100.0 * x2 - 840.0 * x3),
        x * (840.0 - 5040.0 * x + 8400.0 * x2 - 4200.0 * x3),
    ]
}

/// Virial profile `φ` and its first four derivatives.
///
/// `φ(s) = s` for `s ≤ 1`, `φ(s) = s − (7x⁵ − 14x⁶ + 10x⁷ − 5x⁸/2)` with
/// `x = s − 1` on `(1, 2)`, and `φ ≡ 3/2` for `s ≥ 2`. Equivalently
/// `φ′ = 1 − S(s − 1)` with `S` the degree-7 smoothstep, so `φ` is C⁴ with
/// `φ′(2) = … = φ⁗(2) = 0`.
pub fn virial_profile(s: f64) -> [f64; 5] {
    if s <= 1.0 {
        return [s, 1.0, 0.0, 0.0, 0.0];
    }
    if s >= 2.0 {
        return [1.5, 0.0, 0.0, 0.0, 0.0];
    }
    let x = s - 1.0;
    let x5 = x.powi(5);
    let value = s - x5 * (7.0 - 14.0 * x + 10.0 * x * x - 2.5 * x * x * x);
    let st = smoothstep(x);
    [value, 1.0 - st[0], -st[1], -st[2], -st[3]]
}

/// Cutoff of the truncated mass: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
pub fn mass_cutoff(rho: f64) -> [f64; 2] {
    let p = virial_profile(2.0 * rho);
    [p[1], 2.0 * p[2]]
}

/// `ψ(x) = R²φ(|x|²/R²)` sampled on a grid with the radial quantities the
/// virial identities need.
#[derive(Debug, Clone)]
pub struct VirialWeights {
    pub radius: f64,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub d2psi: Vec<f64>,
    pub laplacian: Vec<f64>,
    pub bilaplacian: Vec<f64>,
    /// `φ′(|x|²/R²)`.
    pub phi_prime: Vec<f64>,
}

impl VirialWeights {
    pub fn new(radius: f64, d: u32, nodes: &[f64]) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("virial radius must be positive, got {radius}")));
        }
        let d = d as f64;
        let r2 = radius * radius;
        let n = nodes.len();
        let mut w = Self {
            radius,
            psi: Vec::with_capacity(n),
            dpsi: Vec::with_capacity(n),
            d2psi: Vec::with_capacity(n),
            laplacian: Vec::with_capacity(n),
            bilaplacian: Vec::with_capacity(n),
            phi_prime: Vec::with_capacity(n),
        };
        for &r in nodes {
            let s = r * r / r2;
            let [p0, p1, p2, p3, p4] = virial_profile(s);
            w.psi.push(r2 * p0);
            w.dpsi.push(2.0 * r * p1);
            w.d2psi.push(2.0 * p1 + 4.0 * s * p2);
            w.laplacian.push(2.0 * d * p1 + 4.0 * s * p2);
            let g1 = (2.0 * d + 4.0) * p2 + 4.0 * s * p3;
            let g2 = (2.0 * d + 8.0) * p3 + 4.0 * s * p4;
            w.bilaplacian.push((2.0 * d * g1 + 4.0 * s * g2) / r2);
            w.phi_prime.push(p1);
        }
        Ok(w)
    }
}

fn weighted_sum(u: &RadialField, omega: f64, f: impl Fn(usize, f64, Complex64) -> f64) -> f64 {
    let g = u.grid();
    omega
        * g.nodes()
            .iter()
            .zip(g.quad_weights())
            .zip(&u.values)
            .enumerate()
            .map(|(i, ((&r, &w), &z))| w * f(i, r, z))
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialSample {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

/// `V_R`, `4 Im∫φ′ ū x·∇u` and the second-derivative formula at one instant.
pub fn virial_at(
    u: &RadialField,
    weights: &VirialWeights,
    plan: &HankelPlan,
    params: &CouplingParams,
    mu: f64,
) -> Result<VirialSample> {
    let omega = params.omega();
    let ur = plan.radial_derivative(u)?;
    let q = params.critical_exponent();
    let d = params.d as f64;
    let v = weighted_sum(u, omega, |i, _, z| weights.psi[i] * z.norm_sqr());
    let dv = weighted_sum(u, omega, |i, r, z| 4.0 * weights.phi_prime[i] * r * (z.conj() * ur.values[i]).im);
    // Where ψ = |x|² the derivative terms add up to 8Q(u), taken spectrally;
    // the node rule only sees the corrections supported in r > R.
    let corrections = weighted_sum(u, omega, |i, r, z| {
        let m = z.norm_sqr();
        4.0 * (weights.d2psi[i] - 2.0) * ur.values[i].norm_sqr()
            + mu * (4.0 / d) * weights.laplacian[i] * m.powf(q / 2.0)
            - weights.bilaplacian[i] * m
            + 4.0 * params.a * (weights.dpsi[i] / r - 2.0) * m / (r * r)
    });
    let d2v = 8.0 * kinetic(plan, u, params)? + corrections;
    Ok(VirialSample { v, dv, d2v })
}

/// Derivatives of sampled data by three-point (nonuniform) differences.
pub fn finite_differences(t: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = t.len();
    if n < 3 || y.len() != n {
        return Err(Error::InvalidParameter("insufficient sampling: need at least 3 samples".into()));
    }
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let j = i.clamp(1, n - 2);
        let (h0, h1) = (t[j] - t[j - 1], t[j + 1] - t[j]);
        let (y0, y1, y2) = (y[j - 1], y[j], y[j + 1]);
        let second = 2.0 * (h0 * y2 - (h0 + h1) * y1 + h1 * y0) / (h0 * h1 * (h0 + h1));
        d2[i] = second;
        let centre = (h0 * h0 * y2 + (h1 * h1 - h0 * h0) * y1 - h1 * h1 * y0) / (h0 * h1 * (h0 + h1));
        d1[i] = centre + second * (t[i] - t[j]);
    }
    Ok((d1, d2))
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub l6: Vec<f64>,
    pub sup: Vec<f64>,
    pub v_r: Vec<f64>,
    pub dv_r: Vec<f64>,
    pub d2v_r_formula: Vec<f64>,
    pub d2v_r_fd: Vec<f64>,
    pub m_r: Vec<f64>,
    pub l10_accum: Vec<f64>,
    /// `Q(u) − ∫|u|^{2d/(d−2)}`, the focusing virial functional.
    pub virial_functional: Vec<f64>,
}

impl DiagnosticsSeries {
    pub const COLUMNS: [&'static str; 12] =
        ["t", "mass", "energy", "kinetic", "L6", "sup", "V_R", "dV_R", "d2V_R_formula", "d2V_R_fd", "M_R", "L10_accum"];

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |formula − difference| / max |formula|` over interior samples.
    pub fn virial_mismatch(&self) -> f64 {
        let n = self.len();
        if n < 3 {
            return f64::NAN;
        }
        let scale = self.d2v_r_formula.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let diff = (1..n - 1).map(|i| (self.d2v_r_formula[i] - self.d2v_r_fd[i]).abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    pub fn relative_drift(series: &[f64]) -> f64 {
        let first = series.first().copied().unwrap_or(0.0);
        let worst = series.iter().map(|x| (x - first).abs()).fold(0.0, f64::max);
        if first == 0.0 {
            worst
        } else {
            worst / first.abs()
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::COLUMNS.join(","))?;
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.mass[i],
                self.energy[i],
                self.kinetic[i],
                self.l6[i],
                self.sup[i],
                self.v_r[i],
                self.dv_r[i],
                self.d2v_r_formula[i],
                self.d2v_r_fd[i],
                self.m_r[i],
                self.l10_accum[i],
            ];
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Full diagnostics along a trajectory, with `V_R` and `M_R` at radius `R`.
pub fn virial_report(
    traj: &Trajectory,
    radius: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
    mu: f64,
) -> Result<DiagnosticsSeries> {
    if traj.times.len() < 3 {
        return Err(Error::InvalidParameter("insufficient sampling: need at least 3 samples".into()));
    }
    let weights = VirialWeights::new(radius, params.d, plan.grid().nodes())?;
    let q = params.critical_exponent();
    let mut s = DiagnosticsSeries::default();
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        let c = conserved_quantities(u, plan, params, mu)?;
        let vir = virial_at(u, &weights, plan, params, mu)?;
        s.times.push(*t);
        s.mass.push(c.mass);
        s.energy.push(c.energy);
        s.kinetic.push(c.kinetic);
        let lq = lebesgue_norm(u, q);
        s.l6.push(lq);
        s.sup.push(u.max_abs());
        s.v_r.push(vir.v);
        s.dv_r.push(vir.dv);
        s.d2v_r_formula.push(vir.d2v);
        s.m_r.push(truncated_mass(u, radius, params));
        s.virial_functional.push(c.kinetic - lq.powf(q));
    }
    s.d2v_r_fd = finite_differences(&s.times, &s.v_r)?.1;
    let l10: Vec<f64> = traj.fields.iter().map(|u| lebesgue_norm(u, 10.0).powi(10)).collect();
    s.l10_accum = cumulative_simpson(&s.times, &l10);
    Ok(s)
}

/// `ω∫φ_M(|x|/R)|u|²` with `φ_M = 1` on `[0, 1/2]` and 0 beyond 1.
pub fn truncated_mass(u: &RadialField, radius: f64, params: &CouplingParams) -> f64 {
    weighted_sum(u, params.omega(), |_, r, z| mass_cutoff(r / radius)[0] * z.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassRate {
    /// `∂_t M_R = (2/R) Im∫φ_M′(|x|/R) ū ∂_r u`.
    pub rate: f64,
    /// `√Q(u) · √(∫|u|²/|x|²)`.
    pub bound: f64,
}

/// Time derivative of the truncated mass along the flow, with the right-hand
/// side of its Lipschitz bound.
pub fn truncated_mass_rate(
    u: &RadialField,
    radius: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<MassRate> {
    let omega = params.omega();
    let ur = plan.radial_derivative(u)?;
    let rate = weighted_sum(u, omega, |i, r, z| {
        2.0 / radius * mass_cutoff(r / radius)[1] * (z.conj() * ur.values[i]).im
    });
    let hardy = weighted_sum(u, omega, |_, r, z| z.norm_sqr() / (r * r));
    Ok(MassRate { rate, bound: kinetic(plan, u, params)?.sqrt() * hardy.sqrt() })
}

/// Composite Simpson on arbitrary sample times; the running integral at
/// each sample. An odd final interval uses the quadratic through the last
/// three points.
pub fn cumulative_simpson(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (t[1] - t[0]) * (y[0] + y[1]);
        return out;
    }
    let mut even = 0.0;
    for k in 1..n {
        if k % 2 == 0 {
            let (h0, h1) = (t[k - 1] - t[k - 2], t[k] - t[k - 1]);
            let hs = h0 + h1;
            even += hs / 6.0
                * ((2.0 - h1 / h0) * y[k - 2] + hs * hs / (h0 * h1) * y[k - 1] + (2.0 - h0 / h1) * y[k]);
            out[k] = even;
        } else if k == 1 {
            // Quadratic through the first three points over [t0, t1].
            let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
            let alpha = (2.0 * h0 * h0 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
            let beta = (h0 * h0 + 3.0 * h0 * h1) / (6.0 * h1);
            let eta = h0 * h0 * h0 / (6.0 * h1 * (h0 + h1));
            out[1] = alpha * y[0] + beta * y[1] - eta * y[2];
        } else {
            let (h0, h1) = (t[k - 1] - t[k - 2], t[k] - t[k - 1]);
            let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
            let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
            let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
            out[k] = even + alpha * y[k] + beta * y[k - 1] - eta * y[k - 2];
        }
    }
    out
}

/// `∫∫|u|^{10} dx dt` over the sampled trajectory.
pub fn spacetime_l10(traj: &Trajectory) -> f64 {
    let vals: Vec<f64> = traj.fields.iter().map(|u| lebesgue_norm(u, 10.0).powi(10)).collect();
    cumulative_simpson(&traj.times, &vals).last().copied().unwrap_or(0.0)
}

fn free_flow(plan: &HankelPlan, c0: &[Complex64], lam: &[f64], t: f64) -> Result<RadialField> {
    let c: Vec<Complex64> = c0.iter().zip(lam).map(|(z, l)| z * Complex64::from_polar(1.0, -l * t)).collect();
    plan.synthesize(&plan.spectral_field(c)?)
}

/// Gauss–Legendre nodes and weights on `[lo, hi]` split into `panels`.
fn panel_rule(lo: f64, hi: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let a = lo + p as f64 * h;
            x.iter().zip(&w).map(move |(xi, wi)| (a + 0.5 * h * (1.0 + xi), 0.5 * h * wi)).collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrichartzOptions {
    pub panels: usize,
    pub order: usize,
}

impl Default for StrichartzOptions {
    fn default() -> Self {
        Self { panels: 64, order: 8 }
    }
}

/// `‖e^{−itL_a}u0‖_{L^q_t L^r_x([0,T])} / ‖u0‖_{L²}` for an admissible pair
/// `2/q + d/r = d/2`, `q > 2` (`q = ∞` allowed).
pub fn strichartz_ratio(
    u0: &RadialField,
    q: f64,
    r: f64,
    t_final: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<f64> {
    strichartz_ratio_with(u0, q, r, t_final, plan, params, StrichartzOptions::default())
}

pub fn strichartz_ratio_with(
    u0: &RadialField,
    q: f64,
    r: f64,
    t_final: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
    opts: StrichartzOptions,
) -> Result<f64> {
    let d = params.d as f64;
    let lhs = if q.is_infinite() { 0.0 } else { 2.0 / q } + d / r;
    if !(q > 2.0) || !(r >= 2.0) || (lhs - d / 2.0).abs() > 1e-12 {
        return Err(Error::ExponentWindow(format!("inadmissible pair (q, r) = ({q}, {r})")));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_final}")));
    }
    let c0 = plan.analyze(u0)?.coeffs;
    let omega = params.omega();
    let l2 = (omega * c0.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    if l2 == 0.0 {
        return Err(Error::ZeroField);
    }
    let lam = plan.grid().eigenvalues();
    let space_norm = |t: f64| -> Result<f64> {
        if r == 2.0 {
            return Ok(l2);
        }
        Ok(lebesgue_norm(&free_flow(plan, &c0, &lam, t)?, r))
    };
    let value = if q.is_infinite() {
        let mut best: f64 = space_norm(0.0)?;
        for (t, _) in panel_rule(0.0, t_final, opts.panels, opts.order) {
            best = best.max(space_norm(t)?);
        }
        best
    } else {
        let mut s = 0.0;
        for (t, w) in panel_rule(0.0, t_final, opts.panels, opts.order) {
            s += w * space_norm(t)?.powf(q);
        }
        s.powf(1.0 / q)
    };
    Ok(value / l2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSmoothingOptions {
    /// First window is `[0, start_factor·ℓ²]` with `ℓ` the data's mass radius;
    /// windows then double.
    pub start_factor: f64,
    /// Horizon cap; `None` uses the time for the rms group velocity to carry
    /// the data from its mass radius to the wall.
    pub t_max: Option<f64>,
    pub tail_tolerance: f64,
    pub panels_per_window: usize,
    pub order: usize,
    /// Integrate over `[−T, T]` for this `T` with no tail test.
    pub fixed_horizon: Option<f64>,
}

impl Default for LocalSmoothingOptions {
    fn default() -> Self {
        Self {
            start_factor: 0.25,
            t_max: None,
            tail_tolerance: 0.01,
            panels_per_window: 8,
            order: 8,
            fixed_horizon: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSmoothingReport {
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub horizon: f64,
    /// Geometric estimate of the integral beyond the horizon, relative to the total.
    pub tail_estimate: f64,
}

/// `∫ ψ|∂_r u|² + c|u|²/r²` for an even weight `ψ` with `ψ′(r)/r` given.
///
/// With `Du = ∂_r u + σu/r` and one integration by parts,
/// `∫χ|u|²/r² = −(1/2ν)∫[(χ′/r)|u|² + 2χ Re(ū Du)/r]`; every integrand is then
/// `r^{−2σ}` times an even function, which the grid rule integrates accurately.
fn class_gradient_integral(
    u: &RadialField,
    plan: &HankelPlan,
    params: &CouplingParams,
    psi: impl Fn(f64) -> f64,
    psi_prime_over_r: impl Fn(f64) -> f64,
    c: f64,
) -> Result<f64> {
    let (sigma, nu) = (params.sigma, params.nu);
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter("gradient integrals need ν > 0".into()));
    }
    let ur = plan.radial_derivative(u)?;
    Ok(weighted_sum(u, params.omega(), |i, r, z| {
        let du = ur.values[i] + z * (sigma / r);
        let cross = (z.conj() * du).re / r;
        let p = psi(r);
        let chi = sigma * sigma * p + c;
        let chi_prime_over_r = sigma * sigma * psi_prime_over_r(r);
        p * du.norm_sqr() - 2.0 * sigma * p * cross - chi * cross / nu - chi_prime_over_r * z.norm_sqr() / (2.0 * nu)
    }))
}

/// `∫∫ |∇u|²/(R⟨x/R⟩³) + |u|²/(R|x|²)` over `t ∈ [−T, T]` for the free flow,
/// divided by `‖u0‖‖∇u0‖ + R^{−1}‖u0‖²`.
pub fn local_smoothing_ratio(
    u0: &RadialField,
    radius: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<f64> {
    Ok(local_smoothing_with(u0, radius, plan, params, LocalSmoothingOptions::default())?.ratio)
}

pub fn local_smoothing_with(
    u0: &RadialField,
    radius: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
    opts: LocalSmoothingOptions,
) -> Result<LocalSmoothingReport> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("R must be positive, got {radius}")));
    }
    let omega = params.omega();
    let m0 = mass(u0, params);
    if m0 == 0.0 {
        return Err(Error::ZeroField);
    }
    let lam = plan.grid().eigenvalues();
    let c_plus = plan.analyze(u0)?.coeffs;
    let c_minus = plan.analyze(&u0.map(|z| z.conj()))?.coeffs;
    let rr = radius * radius;
    let density = |u: &RadialField| -> Result<f64> {
        class_gradient_integral(
            u,
            plan,
            params,
            |r| (1.0 + r * r / rr).powf(-1.5) / radius,
            |r| -3.0 / (radius * rr) * (1.0 + r * r / rr).powf(-2.5),
            1.0 / radius,
        )
    };
    // u(−t) is the conjugate of the forward flow of ū0.
    let window = |lo: f64, hi: f64| -> Result<f64> {
        let mut s = 0.0;
        for (t, w) in panel_rule(lo, hi, opts.panels_per_window, opts.order) {
            s += w * (density(&free_flow(plan, &c_plus, &lam, t)?)? + density(&free_flow(plan, &c_minus, &lam, t)?)?);
        }
        Ok(s)
    };
    let (total, horizon, tail_estimate) = if let Some(h) = opts.fixed_horizon {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {h}")));
        }
        let steps = 8usize;
        let mut s = 0.0;
        for k in 0..steps {
            let lo = h * k as f64 / steps as f64;
            let hi = h * (k + 1) as f64 / steps as f64;
            s += window(lo, hi)?;
        }
        (s, h, f64::NAN)
    } else {
        let spread = (weighted_sum(u0, omega, |_, r, z| r * r * z.norm_sqr()) / m0).sqrt();
        let cap = match opts.t_max {
            Some(t) => t,
            None => {
                let speed = 2.0 * (kinetic(plan, u0, params)? / m0).sqrt();
                (plan.grid().radius() - spread) / speed
            }
        };
        let mut hi = opts.start_factor * spread * spread;
        if !(hi > 0.0) || hi > cap {
            return Err(Error::Convergence(format!("tail-not-converged: first window {hi} exceeds horizon cap {cap}")));
        }
        let mut total = window(0.0, hi)?;
        let mut prev = total;
        loop {
            if 2.0 * hi > cap {
                return Err(Error::Convergence(format!(
                    "tail-not-converged: horizon cap {cap:.3} reached at T = {hi:.3}"
                )));
            }
            let add = window(hi, 2.0 * hi)?;
            total += add;
            hi *= 2.0;
            let q = add / prev;
            prev = add;
            if q < 1.0 {
                let tail = add * q / (1.0 - q) / total;
                if tail <= opts.tail_tolerance {
                    break (total, hi, tail);
                }
            }
        }
    };
    let l2 = m0.sqrt();
    let grad_l2 = class_gradient_integral(u0, plan, params, |_| 1.0, |_| 0.0, 0.0)?.sqrt();
    let denominator = l2 * grad_l2 + l2 * l2 / radius;
    Ok(LocalSmoothingReport { ratio: total / denominator, numerator: total, denominator, horizon, tail_estimate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_matches_derivatives_by_differences() {
        let h = 1e-5;
        for &s in &[0.5, 1.2, 1.5, 1.9, 2.5] {
            let p = virial_profile(s);
            let hi = virial_profile(s + h);
            let lo = virial_profile(s - h);
            for k in 0..4 {
                let fd = (hi[k] - lo[k]) / (2.0 * h);
                assert!((fd - p[k + 1]).abs() < 1e-6, "s={s} k={k} {fd} {}", p[k + 1]);
            }
        }
    }

    #[test]
    fn profile_is_c4_at_the_joins() {
        let e = 1e-12;
        for &s in &[1.0, 2.0] {
            let a = virial_profile(s - e);
            let b = virial_profile(s + e);
            for k in 0..5 {
                assert!((a[k] - b[k]).abs() < 1e-8, "s={s} k={k}");
            }
        }
        assert_eq!(virial_profile(3.0)[0], 1.5);
    }

    #[test]
    fn simpson_exactness() {
        let even: Vec<f64> = (0..9).map(|k| 0.15 * k as f64).collect();
        let cubic: Vec<f64> = even.iter().map(|x| x * x * x - 2.0 * x + 1.0).collect();
        let acc = cumulative_simpson(&even, &cubic);
        for k in (0..even.len()).step_by(2) {
            let tk = even[k];
            assert!((acc[k] - (tk.powi(4) / 4.0 - tk * tk + tk)).abs() < 1e-13, "k={k}");
        }
        let t = [0.0, 0.1, 0.35, 0.4, 0.8, 1.0, 1.3];
        let quad: Vec<f64> = t.iter().map(|x| 3.0 * x * x - 2.0 * x + 1.0).collect();
        let acc = cumulative_simpson(&t, &quad);
        for (k, &tk) in t.iter().enumerate() {
            assert!((acc[k] - (tk.powi(3) - tk * tk + tk)).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn differences_are_exact_on_quadratics() {
        let t = [0.0, 0.2, 0.3, 0.7, 1.0];
        let y: Vec<f64> = t.iter().map(|x| 3.0 * x * x - x).collect();
        let (d1, d2) = finite_differences(&t, &y).unwrap();
        for i in 0..t.len() {
            assert!((d1[i] - (6.0 * t[i] - 1.0)).abs() < 1e-12);
            assert!((d2[i] - 6.0).abs() < 1e-11);
        }
    }
}
