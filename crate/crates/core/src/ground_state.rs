//! The explicit static solution `W_a` of the focusing equation, its residual,
//! Pohozaev identities, the first-order invariant and the focusing thresholds.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hankel::{HankelPlan, RadialField, RadialGrid};
use crate::operator::{derive_params, CouplingParams};
use crate::quadrature::GradedRule;
use crate::special::gamma_pos;

/// `W_a(r) = [d(d−2)β²]^{(d−2)/4} · [r^{β−1}/(1+r^{2β})]^{(d−2)/2}`.
pub fn ground_state_profile(params: &CouplingParams, r: f64) -> f64 {
    let h = params.half_dim();
    amplitude(params) * emden_fowler(params, r).powf(h) * r.powf(-h)
}

/// `∂_r W_a(r)`.
pub fn ground_state_derivative(params: &CouplingParams, r: f64) -> f64 {
    let h = params.half_dim();
    let b = params.beta;
    let x = r.powf(2.0 * b);
    let log_slope = -params.sigma / r - 2.0 * h * b * x / (r * (1.0 + x));
    ground_state_profile(params, r) * log_slope
}

fn amplitude(params: &CouplingParams) -> f64 {
    let d = params.d as f64;
    (d * (d - 2.0) * params.beta * params.beta).powf((d - 2.0) / 4.0)
}

/// `r^β/(1+r^{2β}) = 1/(2 cosh(β log r))`, stable for all r > 0.
fn emden_fowler(params: &CouplingParams, r: f64) -> f64 {
    0.5 / (params.beta * r.ln()).cosh()
}

/// Focusing nonlinearity exponent `(d+2)/(d−2)`.
fn power(params: &CouplingParams) -> f64 {
    let d = params.d as f64;
    (d + 2.0) / (d - 2.0)
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub params: CouplingParams,
    pub field: RadialField,
}

pub fn eval_ground_state(params: &CouplingParams, grid: &std::sync::Arc<RadialGrid>) -> Result<GroundState> {
    if grid.d() != params.d || (grid.nu() - params.nu).abs() > 1e-14 {
        return Err(Error::GridMismatch);
    }
    let field = RadialField::from_fn(grid.clone(), |r| ground_state_profile(params, r));
    Ok(GroundState { params: *params, field })
}

impl GroundState {
    pub fn scaled(&self, s: f64) -> Self {
        Self { params: self.params, field: self.field.scaled(s) }
    }
}

/// Smooth step equal to 1 on `[0, start]` and 0 on `[end, ∞)`.
pub fn wall_taper(r: f64, start: f64, end: f64) -> f64 {
    let g = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    if r <= start {
        return 1.0;
    }
    if r >= end {
        return 0.0;
    }
    let x = (r - start) / (end - start);
    let a = g(1.0 - x);
    a / (a + g(x))
}

/// `W_a` multiplied by a taper that vanishes before the wall.
pub fn tapered_ground_state(params: &CouplingParams, plan: &HankelPlan, start_fraction: f64) -> RadialField {
    let radius = plan.grid().radius();
    plan.field_from_fn(|r| {
        ground_state_profile(params, r) * wall_taper(r, start_fraction * radius, 0.95 * radius)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// Relative weighted L² residual over `r ≤ R/2`, where the taper is identically 1.
    pub interior: f64,
    /// Same ratio over every node, including the taper zone.
    pub full: f64,
    /// `|W(r_N)| / max |W|` before tapering.
    pub boundary_tail: f64,
    pub tail_warning: bool,
}

/// `‖L_a W − |W|^{4/(d−2)}W‖ / ‖|W|^{4/(d−2)}W‖` with `L_a` applied spectrally.
///
/// The samples are tapered from `R/2` to `0.95R` so the field is compatible
/// with the Dirichlet wall.
pub fn pde_residual(ws: &GroundState, plan: &HankelPlan) -> Result<ResidualReport> {
    let grid = plan.grid();
    if !grid.same_layout(ws.field.grid()) {
        return Err(Error::GridMismatch);
    }
    let radius = grid.radius();
    let cut = 0.5 * radius;
    let u = RadialField::new(
        grid.clone(),
        ws.field
            .values
            .iter()
            .zip(grid.nodes())
            .map(|(z, &r)| z * wall_taper(r, cut, 0.95 * radius))
            .collect(),
    )?;
    let lu = plan.apply_diagonal(&u, |lam| Complex64::new(lam, 0.0))?;
    let p = power(&ws.params);
    let (mut num_in, mut den_in, mut num, mut den) = (0.0, 0.0, 0.0, 0.0);
    for (((&r, &w), z), lz) in grid.nodes().iter().zip(grid.quad_weights()).zip(&u.values).zip(&lu.values) {
        let f = z * z.norm().powf(p - 1.0);
        let res = (lz - f).norm_sqr() * w;
        let rhs = f.norm_sqr() * w;
        num += res;
        den += rhs;
        if r <= cut {
            num_in += res;
            den_in += rhs;
        }
    }
    if den == 0.0 || den_in == 0.0 {
        return Err(Error::ZeroField);
    }
    let peak = ws.field.max_abs();
    let boundary_tail = ws.field.values.last().map(|z| z.norm()).unwrap_or(0.0) / peak;
    Ok(ResidualReport {
        interior: (num_in / den_in).sqrt(),
        full: (num / den).sqrt(),
        boundary_tail,
        tail_warning: boundary_tail > 1e-3,
    })
}

/// `(ω∫(|f′|² + a f²/r²) r^{d−1} dr, ω∫|f|^{2d/(d−2)} r^{d−1} dr)` on `(0, ∞)`.
pub fn radial_functionals(
    params: &CouplingParams,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let rule = GradedRule::half_line();
    let d1 = params.d as i32 - 1;
    let q = params.critical_exponent();
    let omega = params.omega();
    let kinetic = rule.integrate(|r| {
        let v = f(r);
        let dv = df(r);
        (dv * dv + params.a * v * v / (r * r)) * r.powi(d1)
    });
    let lp = rule.integrate(|r| f(r).abs().powf(q) * r.powi(d1));
    (omega * kinetic, omega * lp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PohozaevReport {
    /// `‖W_a‖²_{Ḣ¹_a}` by graded Gauss–Legendre quadrature of the closed form.
    pub q_kinetic: f64,
    /// `∫ W_a^{2d/(d−2)}` by the same quadrature.
    pub q_l6: f64,
    /// `[πd(d−2)/4]^{d/2} · 2√π β^{d−1} / Γ((d+1)/2)`.
    pub closed_form: f64,
    /// `(πd(d−2)/4) · [2√π β^{d−1} / Γ((d+1)/2)]^{2/d}`, the alternative displayed expression.
    pub printed_form: f64,
    /// Node sums of the tapered integrands plus the exact untapered remainder.
    pub grid_kinetic: f64,
    pub grid_l6: f64,
    /// `|printed_form − q_l6| / q_l6 > 1e-6`.
    pub printed_mismatch: bool,
}

pub fn pohozaev_closed_form(params: &CouplingParams) -> f64 {
    let d = params.d as f64;
    (PI * d * (d - 2.0) / 4.0).powf(d / 2.0) * 2.0 * PI.sqrt() * params.beta.powf(d - 1.0)
        / gamma_pos((d + 1.0) / 2.0)
}

pub fn pohozaev_printed_form(params: &CouplingParams) -> f64 {
    let d = params.d as f64;
    PI * d * (d - 2.0) / 4.0
        * (2.0 * PI.sqrt() * params.beta.powf(d - 1.0) / gamma_pos((d + 1.0) / 2.0)).powf(2.0 / d)
}

pub fn pohozaev_report(params: &CouplingParams, plan: &HankelPlan) -> Result<PohozaevReport> {
    let grid = plan.grid();
    if grid.d() != params.d || (grid.nu() - params.nu).abs() > 1e-14 {
        return Err(Error::GridMismatch);
    }
    let w = |r: f64| ground_state_profile(params, r);
    let dw = |r: f64| ground_state_derivative(params, r);
    let (q_kinetic, q_l6) = radial_functionals(params, w, dw);

    let q = params.critical_exponent();
    let d1 = params.d as i32 - 1;
    let kin = |r: f64| {
        let v = w(r);
        dw(r).powi(2) + params.a * v * v / (r * r)
    };
    // Node sums see only the tapered part; the remainder beyond the taper start
    // is integrated exactly from the closed form.
    let radius = grid.radius();
    let (start, end) = (0.5 * radius, 0.95 * radius);
    let mut grid_kinetic = 0.0;
    let mut grid_l6 = 0.0;
    for (&r, &wt) in grid.nodes().iter().zip(grid.quad_weights()) {
        let chi = wall_taper(r, start, end);
        grid_kinetic += wt * chi * kin(r);
        grid_l6 += wt * chi * w(r).powf(q);
    }
    let rule = GradedRule::half_line();
    let outer = |g: &dyn Fn(f64) -> f64| {
        rule.integrate(|s| {
            let r = start + s;
            (1.0 - wall_taper(r, start, end)) * g(r) * r.powi(d1)
        })
    };
    grid_kinetic += outer(&kin);
    grid_l6 += outer(&|r| w(r).powf(q));
    let omega = params.omega();
    let printed_form = pohozaev_printed_form(params);
    Ok(PohozaevReport {
        q_kinetic,
        q_l6,
        closed_form: pohozaev_closed_form(params),
        printed_form,
        grid_kinetic: omega * grid_kinetic,
        grid_l6: omega * grid_l6,
        printed_mismatch: ((printed_form - q_l6) / q_l6).abs() > 1e-6,
    })
}

/// `−r²(∂_r v)² + ν²v² − ((d−2)/d) v^{2d/(d−2)}` with `v = r^{(d−2)/2} f`.
pub fn first_order_invariant_of(params: &CouplingParams, r: f64, f: f64, df: f64) -> f64 {
    let h = params.half_dim();
    let d = params.d as f64;
    let v = r.powf(h) * f;
    let dv = h * r.powf(h - 1.0) * f + r.powf(h) * df;
    -r * r * dv * dv + params.nu * params.nu * v * v - (d - 2.0) / d * v.abs().powf(2.0 * d / (d - 2.0))
}

/// The invariant evaluated on `W_a`; identically zero.
pub fn first_order_invariant(params: &CouplingParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("first-order invariant needs r > 0, got {r}")));
    }
    Ok(first_order_invariant_of(params, r, ground_state_profile(params, r), ground_state_derivative(params, r)))
}

/// Scale of the middle term `ν² v²`, used to normalize the invariant.
pub fn first_order_invariant_scale(params: &CouplingParams, r: f64) -> f64 {
    let v = r.powf(params.half_dim()) * ground_state_profile(params, r);
    params.nu * params.nu * v * v
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// Parameters for `a ∧ 0`.
    pub reference: CouplingParams,
    /// `‖W_{a∧0}‖²_{Ḣ¹_{a∧0}}` in closed form.
    pub kinetic_threshold: f64,
    /// `E_{a∧0}(W_{a∧0}) = kinetic_threshold / d`.
    pub energy_threshold: f64,
    pub kinetic_quadrature: f64,
    pub energy_quadrature: f64,
    pub discrepancy: f64,
}

pub fn thresholds(params: &CouplingParams) -> ThresholdReport {
    let reference = derive_params(params.d, params.a.min(0.0)).expect("a ∧ 0 is admissible");
    let d = params.d as f64;
    let kinetic_threshold = pohozaev_closed_form(&reference);
    let (kin, lp) = radial_functionals(
        &reference,
        |r| ground_state_profile(&reference, r),
        |r| ground_state_derivative(&reference, r),
    );
    let energy_quadrature = 0.5 * kin - (d - 2.0) / (2.0 * d) * lp;
    ThresholdReport {
        reference,
        kinetic_threshold,
        energy_threshold: kinetic_threshold / d,
        kinetic_quadrature: kin,
        energy_quadrature,
        discrepancy: ((kin - kinetic_threshold) / kinetic_threshold).abs(),
    }
}
