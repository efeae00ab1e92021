//! Sharp Sobolev quotient, its maximization, the shifted-bubble witness,
//! energies and the sub-threshold classifier.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ground_state::{pohozaev_closed_form, thresholds};
use crate::hankel::{HankelPlan, RadialField};
use crate::logradial::{LogRadialField, LogRadialGrid};
use crate::operator::{kinetic, lebesgue_norm, CouplingParams};
use crate::quadrature::GradedRule;

/// `‖u‖_{L^{2d/(d−2)}} / ‖u‖_{Ḣ¹_a}` on a Bessel grid.
pub fn sobolev_quotient(plan: &HankelPlan, u: &RadialField, params: &CouplingParams) -> Result<f64> {
    let k = kinetic(plan, u, params)?;
    if k == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(lebesgue_norm(u, params.critical_exponent()) / k.sqrt())
}

/// `K(a)^{−1/d}`, the quotient of `W_a`.
pub fn reference_constant(params: &CouplingParams) -> f64 {
    pohozaev_closed_form(params).powf(-1.0 / params.d as f64)
}

#[derive(Debug, Clone)]
pub struct MaximizeOptions {
    pub log_points: usize,
    /// Half width of the ρ interval; `None` picks one from the decay rate of `W_a`.
    pub half_width: Option<f64>,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self { log_points: 1024, half_width: None, max_iterations: 100_000, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct VariationalReport {
    pub best_quotient: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Maximizer sampled back on the Bessel grid.
    pub final_field: RadialField,
    pub final_log: LogRadialField,
    pub reference_constant: f64,
    /// `reference_constant − best_quotient`.
    pub gap: f64,
    /// Dilation `λ` of the best-fitting `λ^{(d−2)/2} W_a(λ·)`.
    pub fitted_scale: f64,
    /// `‖û − Ŵ_λ‖_{Ḣ¹_a}` between unit-normalized maximizer and fitted `W_a`.
    pub alignment: f64,
    /// Quotient after every accepted step.
    pub trace: Vec<f64>,
}

/// Projected gradient ascent for the Sobolev quotient on the unit `Ḣ¹_a` sphere.
///
/// The iteration runs in Emden–Fowler variables. The ascent direction is the
/// Riesz representative `L_a^{−1}(q|u|^{q−2}u)` projected onto the tangent space,
/// with a backtracking step starting at 1.
pub fn maximize_quotient(
    params: &CouplingParams,
    plan: &HankelPlan,
    init: &RadialField,
    opts: &MaximizeOptions,
) -> Result<VariationalReport> {
    let grid = Arc::new(match opts.half_width {
        Some(l) => LogRadialGrid::new(params, l, opts.log_points)?,
        None => LogRadialGrid::for_ground_state(params, opts.log_points)?,
    });
    let start = LogRadialField::from_bessel(grid.clone(), plan, init)?;
    let (field, iterations, converged, trace) = ascend(start, opts)?;
    let best_quotient = field.quotient()?;
    let (shift, alignment) = fit_dilation(&field)?;
    let reference = reference_constant(params);
    Ok(VariationalReport {
        best_quotient,
        iterations,
        converged,
        final_field: field.to_bessel(plan),
        final_log: field,
        reference_constant: reference,
        gap: reference - best_quotient,
        fitted_scale: shift.exp(),
        alignment,
        trace,
    })
}

fn normalize(w: &LogRadialField) -> Result<LogRadialField> {
    let k = w.kinetic();
    if !(k > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(w.scaled(1.0 / k.sqrt()))
}

/// Ascent on `F(w) = ∫|w|^q` over `{‖w‖_{Ḣ¹_a} = 1}`.
pub fn ascend(
    start: LogRadialField,
    opts: &MaximizeOptions,
) -> Result<(LogRadialField, usize, bool, Vec<f64>)> {
    let grid = start.grid().clone();
    let params = *grid.params();
    let q = params.critical_exponent();
    let omega = params.omega();
    let symbol = grid.symbol();
    let mut w = normalize(&start)?;
    let mut f = w.critical_integral();
    let mut trace = vec![w.quotient()?];
    let mut step: f64 = 1.0;
    for it in 1..=opts.max_iterations {
        let g: Vec<f64> = w.values.iter().map(|v| q * v.abs().powf(q - 2.0) * v).collect();
        let gc: Vec<f64> = grid.analyze(&g).iter().zip(&symbol).map(|(c, s)| c / (omega * s)).collect();
        let riesz = LogRadialField::new(grid.clone(), grid.synthesize(&gc))?;
        let along = riesz.inner(&w);
        let tangent: Vec<f64> = riesz.values.iter().zip(&w.values).map(|(r, v)| r - along * v).collect();
        let tangent = LogRadialField::new(grid.clone(), tangent)?;
        let tn = tangent.kinetic().sqrt();
        if tn == 0.0 {
            return Ok((w, it, true, trace));
        }
        let mut accepted = None;
        let mut tau = step;
        while tau > 1e-14 {
            let trial: Vec<f64> = w.values.iter().zip(&tangent.values).map(|(v, t)| v + tau * t / tn).collect();
            let trial = normalize(&LogRadialField::new(grid.clone(), trial)?)?;
            let ft = trial.critical_integral();
            if ft > f {
                accepted = Some((trial, ft));
                break;
            }
            tau *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            return Ok((w, it, true, trace));
        };
        let rel = (fnext - f) / f / q;
        w = next;
        f = fnext;
        step = (2.0 * tau).min(1.0);
        trace.push(w.quotient()?);
        if rel < opts.tolerance {
            return Ok((w, it, true, trace));
        }
    }
    Ok((w, opts.max_iterations, false, trace))
}

/// Golden-section fit of the translation `s` (dilation `e^s`) aligning `w` with `W_a`.
///
/// Returns the shift and the `Ḣ¹_a` distance between the unit-normalized fields.
pub fn fit_dilation(w: &LogRadialField) -> Result<(f64, f64)> {
    let grid = w.grid().clone();
    let u = normalize(w)?;
    let sign = if u.values.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let u = u.scaled(sign);
    let dist = |s: f64| -> f64 {
        let wg = normalize(&LogRadialField::ground_state(grid.clone(), s)).expect("nonzero profile");
        let diff: Vec<f64> = u.values.iter().zip(&wg.values).map(|(a, b)| a - b).collect();
        LogRadialField::new(grid.clone(), diff).expect("same grid").kinetic().sqrt()
    };
    let l = grid.half_width();
    let samples = 201;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..samples {
        let s = -0.5 * l + l * i as f64 / (samples - 1) as f64;
        let v = dist(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    let h = l / (samples - 1) as f64;
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (dist(c), dist(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = dist(d);
        }
    }
    let s = 0.5 * (a + b);
    Ok((s, dist(s)))
}

fn free_bubble_squared(r: f64) -> f64 {
    3f64.sqrt() / (1.0 + r * r)
}

/// `∫_{ℝ³} W₀(x − t e₁)² / |x|² dx` by two-dimensional quadrature in `(|x|, cos θ)`.
pub fn shifted_potential_integral(shift: f64) -> f64 {
    let t = shift;
    let angular = GradedRule::interval(2.0);
    let inner = |r: f64| {
        angular.integrate(|v| {
            let mu = 1.0 - v;
            free_bubble_squared((r * r + t * t - 2.0 * r * t * mu).max(0.0).sqrt())
        })
    };
    let outer = GradedRule::half_line();
    let mut total = outer.integrate(|s| inner(t + s));
    if t > 0.0 {
        total += GradedRule::interval(t).integrate(|s| inner(t - s));
    }
    2.0 * PI * total
}

/// Closed form of the angular integral, used as an oracle for the 2D rule.
pub fn shifted_potential_integral_1d(shift: f64) -> f64 {
    let t = shift;
    let rule = GradedRule::half_line();
    let f = |r: f64| {
        if t == 0.0 {
            return 2.0 * free_bubble_squared(r);
        }
        let x = 2.0 * r * t;
        // ∫_{−1}^{1} dμ / (1 + r² + t² − 2rtμ)
        ((1.0 + (r + t).powi(2)) / (1.0 + (r - t).powi(2))).ln() / x * 3f64.sqrt()
    };
    let mut total = rule.integrate(|s| f(t + s));
    if t > 0.0 {
        total += GradedRule::interval(t).integrate(|s| f(t - s));
    }
    2.0 * PI * total
}

/// Sobolev quotient of the translated free bubble `W₀(· − t e₁)` for `L_a`, d = 3.
pub fn shifted_bubble_quotient(a: f64, shift: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("shifted bubble needs a > 0, got {a}")));
    }
    if !(shift >= 0.0) || !shift.is_finite() {
        return Err(Error::InvalidParameter(format!("shift {shift}")));
    }
    let k0 = 3f64.powf(1.5) * PI * PI / 4.0;
    let p = shifted_potential_integral(shift);
    if !p.is_finite() {
        return Err(Error::Convergence("potential quadrature".into()));
    }
    Ok(k0.powf(1.0 / 6.0) / (k0 + a * p).sqrt())
}

/// `½Q(u) + μ(d−2)/(2d)∫|u|^{2d/(d−2)}`; μ = +1 defocusing, −1 focusing.
pub fn energy(plan: &HankelPlan, u: &RadialField, params: &CouplingParams, mu: f64) -> Result<f64> {
    let d = params.d as f64;
    let q = params.critical_exponent();
    let k = kinetic(plan, u, params)?;
    Ok(0.5 * k + mu * (d - 2.0) / (2.0 * d) * lebesgue_norm(u, q).powf(q))
}

/// Same functional in Emden–Fowler variables.
pub fn energy_log(w: &LogRadialField, mu: f64) -> f64 {
    let p = w.grid().params();
    let d = p.d as f64;
    0.5 * w.kinetic() + mu * (d - 2.0) / (2.0 * d) * w.critical_integral()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrapLabel {
    TrappedBelow,
    BlowupRegion,
    AboveThresholdEnergy,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapClass {
    pub label: TrapLabel,
    pub delta0: f64,
    /// `‖u₀‖²_{Ḣ¹_a} / ‖W_{a∧0}‖²_{Ḣ¹_{a∧0}}`.
    pub kinetic_ratio: f64,
    /// `E_a(u₀) / E_{a∧0}(W_{a∧0})`.
    pub energy_ratio: f64,
    /// a exceeds `−((d−2)/2)² + ((d−2)/(d+2))²`, where finite-time blowup is asserted.
    pub blowup_window: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    pub delta0: f64,
    /// Relative tolerance for the boundary case.
    pub degenerate_tolerance: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { delta0: 0.0, degenerate_tolerance: 1e-6 }
    }
}

/// Classify from precomputed focusing energy and kinetic norm.
pub fn classify_values(params: &CouplingParams, energy: f64, kinetic: f64, opts: ClassifyOptions) -> TrapClass {
    let th = thresholds(params);
    let e = energy / th.energy_threshold;
    let k = kinetic / th.kinetic_threshold;
    let tol = opts.degenerate_tolerance;
    let label = if (e - 1.0).abs() <= tol && (k - 1.0).abs() <= tol {
        TrapLabel::Degenerate
    } else if e < 1.0 - opts.delta0 {
        if k < 1.0 {
            TrapLabel::TrappedBelow
        } else if k > 1.0 {
            TrapLabel::BlowupRegion
        } else {
            TrapLabel::Degenerate
        }
    } else {
        TrapLabel::AboveThresholdEnergy
    };
    TrapClass {
        label,
        delta0: opts.delta0,
        kinetic_ratio: k,
        energy_ratio: e,
        blowup_window: params.a > params.blowup_window_bound(),
    }
}

pub fn classify_initial_data(
    plan: &HankelPlan,
    u0: &RadialField,
    params: &CouplingParams,
    opts: ClassifyOptions,
) -> Result<TrapClass> {
    let e = energy(plan, u0, params, -1.0)?;
    let k = kinetic(plan, u0, params)?;
    Ok(classify_values(params, e, k, opts))
}

pub fn classify_log(w: &LogRadialField, opts: ClassifyOptions) -> TrapClass {
    classify_values(w.grid().params(), energy_log(w, -1.0), w.kinetic(), opts)
}

/// `∫|∇u|² + a|x|^{−2}|u|² − |u|^{2d/(d−2)}`.
pub fn virial_functional(plan: &HankelPlan, u: &RadialField, params: &CouplingParams) -> Result<f64> {
    let q = params.critical_exponent();
    Ok(kinetic(plan, u, params)? - lebesgue_norm(u, q).powf(q))
}
