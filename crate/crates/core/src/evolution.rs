//! Radial quintic NLS `(i∂_t − L_a)u = μ|u|^{4/(d−2)}u` on the Dirichlet ball.
//!
//! The state is kept as eigen-coefficients, so the linear flow is an exact
//! phase and each Strang step costs one synthesis and one analysis.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hankel::{HankelPlan, RadialField, SpectralField};
use crate::operator::CouplingParams;
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// +1 defocusing, −1 focusing, 0 switches the nonlinearity off.
    pub mu: f64,
    pub t_end: f64,
    pub dt_init: f64,
    pub local_error_tol: f64,
    pub blowup_factor: f64,
    /// Largest |u| tolerated on the outer `wall_fraction` of the ball.
    pub wall_guard: f64,
    pub wall_fraction: f64,
    /// Record every k-th accepted step when `sample_interval` is unset.
    pub sample_every: usize,
    /// Land steps on multiples of this time and record there.
    pub sample_interval: Option<f64>,
    pub max_steps: usize,
    pub override_admissibility: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            t_end: 1.0,
            dt_init: 1e-3,
            local_error_tol: 1e-8,
            blowup_factor: 10.0,
            wall_guard: 1e-6,
            wall_fraction: 0.02,
            sample_every: 1,
            sample_interval: None,
            max_steps: 2_000_000,
            override_admissibility: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if ![-1.0, 0.0, 1.0].contains(&self.mu) {
            return bad(format!("mu must be -1, 0 or +1, got {}", self.mu));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dt_init > 0.0) {
            return bad(format!("dt_init must be positive, got {}", self.dt_init));
        }
        if !(self.local_error_tol > 0.0) {
            return bad(format!("local_error_tol must be positive, got {}", self.local_error_tol));
        }
        if !(self.blowup_factor > 1.0) {
            return bad(format!("blowup_factor must exceed 1, got {}", self.blowup_factor));
        }
        if !(self.wall_guard > 0.0) || !(self.wall_fraction > 0.0 && self.wall_fraction < 1.0) {
            return bad("wall guard and fraction must be positive".into());
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if let Some(h) = self.sample_interval {
            if !(h > 0.0) {
                return bad(format!("sample_interval must be positive, got {h}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Completed,
    BlowupDetected,
    WallContamination,
    StepUnderflow,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::BlowupDetected => "blowup_detected",
            Self::WallContamination => "wall_contamination",
            Self::StepUnderflow => "step_underflow",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub error: f64,
    pub accepted: bool,
    /// `‖u‖²_{Ḣ¹_a}` after the step (accepted steps only; NaN otherwise).
    pub kinetic: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: CouplingParams,
    pub mu: f64,
    pub times: Vec<f64>,
    pub fields: Vec<RadialField>,
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
    pub initial_kinetic: f64,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial sample")
    }

    pub fn final_field(&self) -> &RadialField {
        self.fields.last().expect("trajectory holds the initial sample")
    }

    pub fn accepted_steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.accepted)
    }
}

/// Precomputed data for stepping on one plan.
pub struct Stepper<'a> {
    plan: &'a HankelPlan,
    mu: f64,
    eigenvalues: Vec<f64>,
    half_power: f64,
    omega: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(plan: &'a HankelPlan, params: &CouplingParams, mu: f64) -> Self {
        let d = params.d as f64;
        Self {
            plan,
            mu,
            eigenvalues: plan.grid().eigenvalues(),
            half_power: 2.0 / (d - 2.0),
            omega: params.omega(),
        }
    }

    fn phase(&self, c: &mut [Complex64], t: f64) {
        for (z, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *z *= Complex64::from_polar(1.0, -l * t);
        }
    }

    /// One Strang step on coefficients.
    pub fn step_coeffs(&self, c: &[Complex64], dt: f64) -> Vec<Complex64> {
        let n = c.len();
        let mut a = c.to_vec();
        self.phase(&mut a, 0.5 * dt);
        if self.mu != 0.0 {
            let mut u = vec![Complex64::new(0.0, 0.0); n];
            self.plan.synthesize_values(&a, &mut u);
            for z in u.iter_mut() {
                let m = z.norm_sqr().powf(self.half_power);
                *z *= Complex64::from_polar(1.0, -self.mu * m * dt);
            }
            self.plan.analyze_values(&u, &mut a);
        }
        self.phase(&mut a, 0.5 * dt);
        a
    }

    pub fn kinetic(&self, c: &[Complex64]) -> f64 {
        self.omega * c.iter().zip(&self.eigenvalues).map(|(z, l)| l * z.norm_sqr()).sum::<f64>()
    }

    fn l2_distance(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        (self.omega * a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>()).sqrt()
    }

    fn field(&self, c: &[Complex64]) -> RadialField {
        let mut u = vec![Complex64::new(0.0, 0.0); c.len()];
        self.plan.synthesize_values(c, &mut u);
        RadialField::new(self.plan.grid().clone(), u).expect("plan layout")
    }
}

/// Half linear step, exact nonlinear phase, half linear step.
pub fn strang_step(
    u: &RadialField,
    dt: f64,
    mu: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<RadialField> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let c = plan.analyze(u)?;
    let s = Stepper::new(plan, params, mu);
    plan.synthesize(&plan.spectral_field(s.step_coeffs(&c.coeffs, dt))?)
}

fn check_admissible(params: &CouplingParams, config: &EvolutionConfig) -> Result<()> {
    config.validate()?;
    if !params.evolution_admissible && !config.override_admissibility {
        return Err(Error::Inadmissible);
    }
    Ok(())
}

fn wall_max(stepper: &Stepper, c: &[Complex64], first_wall_node: usize) -> f64 {
    let s = stepper.plan.synthesis_matrix();
    (first_wall_node..c.len())
        .map(|i| s.row(i).iter().zip(c).map(|(a, z)| z * a).sum::<Complex64>().norm())
        .fold(0.0, f64::max)
}

/// Adaptive step-doubling integration.
///
/// The local error is `‖u_{dt} − u_{dt/2,×2}‖_{L²}`; a step is accepted when it
/// is at most the tolerance, and the next step is `dt·min(2, 0.9(tol/err)^{1/3})`.
pub fn evolve(
    u0: &RadialField,
    config: &EvolutionConfig,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<Trajectory> {
    check_admissible(params, config)?;
    let stepper = Stepper::new(plan, params, config.mu);
    let c0 = plan.analyze(u0)?.coeffs;
    let initial_kinetic = stepper.kinetic(&c0);
    let grid = plan.grid();
    let first_wall_node =
        grid.nodes().iter().position(|&r| r >= (1.0 - config.wall_fraction) * grid.radius()).unwrap_or(grid.len());

    let mut traj = Trajectory {
        params: *params,
        mu: config.mu,
        times: vec![0.0],
        fields: vec![u0.clone()],
        steps: Vec::new(),
        termination: Termination::Completed,
        initial_kinetic,
    };
    let mut c = c0;
    let mut t = 0.0;
    let mut dt = config.dt_init.min(config.t_end);
    let mut accepted = 0usize;
    let sample_time = |k: usize| -> f64 {
        let h = config.sample_interval.unwrap_or(config.t_end);
        let s = k as f64 * h;
        if s >= config.t_end * (1.0 - 1e-12) {
            config.t_end
        } else {
            s
        }
    };
    let mut sample_index = 1usize;
    let mut next_sample = config.sample_interval.map(|_| sample_time(1));
    let min_dt = 1e-14 * config.t_end;
    let blowup_level = config.blowup_factor * initial_kinetic.sqrt();

    while t < config.t_end {
        if traj.steps.len() >= config.max_steps {
            traj.termination = Termination::StepUnderflow;
            break;
        }
        let mut target = config.t_end;
        if let Some(ns) = next_sample {
            target = target.min(ns);
        }
        let landing = t + dt >= target * (1.0 - 1e-13);
        let h = if landing { target - t } else { dt };
        if h < min_dt {
            traj.termination = Termination::StepUnderflow;
            break;
        }
        let coarse = stepper.step_coeffs(&c, h);
        let half = stepper.step_coeffs(&c, 0.5 * h);
        let fine = stepper.step_coeffs(&half, 0.5 * h);
        let err = stepper.l2_distance(&coarse, &fine);
        let factor = if err == 0.0 { 2.0 } else { (0.9 * (config.local_error_tol / err).powf(1.0 / 3.0)).min(2.0) };
        if err > config.local_error_tol || !err.is_finite() {
            traj.steps.push(StepRecord { t, dt: h, error: err, accepted: false, kinetic: f64::NAN });
            dt = h * factor.max(0.1);
            continue;
        }
        c = fine;
        t = if landing { target } else { t + h };
        accepted += 1;
        let kin = stepper.kinetic(&c);
        traj.steps.push(StepRecord { t, dt: h, error: err, accepted: true, kinetic: kin });
        if !landing {
            dt = h * factor;
        } else {
            dt = dt.max(h * factor);
        }

        let sample_now = match next_sample {
            Some(ns) => {
                if landing && t == ns {
                    sample_index += 1;
                    next_sample = if ns >= config.t_end { None } else { Some(sample_time(sample_index)) };
                    true
                } else {
                    false
                }
            }
            None => accepted % config.sample_every == 0 || t >= config.t_end,
        };
        if sample_now || t >= config.t_end {
            if traj.times.last() != Some(&t) {
                traj.times.push(t);
                traj.fields.push(stepper.field(&c));
            }
        }
        if kin.sqrt() > blowup_level {
            traj.termination = Termination::BlowupDetected;
            break;
        }
        if wall_max(&stepper, &c, first_wall_node) > config.wall_guard {
            traj.termination = Termination::WallContamination;
            break;
        }
    }
    if traj.times.last() != Some(&t) {
        traj.times.push(t);
        traj.fields.push(stepper.field(&c));
    }
    Ok(traj)
}

/// Fixed-step Strang integration over `steps` steps of size `dt`.
pub fn evolve_fixed(
    u0: &RadialField,
    mu: f64,
    dt: f64,
    steps: usize,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<RadialField> {
    let stepper = Stepper::new(plan, params, mu);
    let mut c = plan.analyze(u0)?.coeffs;
    for _ in 0..steps {
        c = stepper.step_coeffs(&c, dt);
    }
    Ok(stepper.field(&c))
}

/// Replays a given step sequence; used to compare nearby solutions in lockstep.
pub fn evolve_with_steps(
    u0: &RadialField,
    mu: f64,
    step_sizes: &[f64],
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<Vec<RadialField>> {
    let stepper = Stepper::new(plan, params, mu);
    let mut c = plan.analyze(u0)?.coeffs;
    let mut out = Vec::with_capacity(step_sizes.len() + 1);
    out.push(stepper.field(&c));
    for &h in step_sizes {
        c = stepper.step_coeffs(&c, h);
        out.push(stepper.field(&c));
    }
    Ok(out)
}

/// `‖u − v‖_{Ḣ¹_a}`.
pub fn h1_distance(plan: &HankelPlan, u: &RadialField, v: &RadialField, params: &CouplingParams) -> Result<f64> {
    let a = plan.analyze(u)?;
    let b = plan.analyze(v)?;
    let omega = params.omega();
    Ok((omega
        * a.coeffs
            .iter()
            .zip(&b.coeffs)
            .zip(plan.grid().eigenvalues())
            .map(|((x, y), l)| l * (x - y).norm_sqr())
            .sum::<f64>())
    .sqrt())
}

pub fn h1_norm(plan: &HankelPlan, u: &RadialField, params: &CouplingParams) -> Result<f64> {
    Ok((params.omega() * plan.analyze(u)?.energy_sum()).sqrt())
}

#[derive(Debug, Clone)]
pub struct PicardReport {
    pub solution: RadialField,
    /// `‖u^{(k+1)}(T) − u^{(k)}(T)‖_{Ḣ¹_a}` for each iteration.
    pub increments: Vec<f64>,
    pub contracting: bool,
}

/// Picard iteration on the Duhamel formula over `[0, T]`.
///
/// The iterates are stored at the Gauss–Legendre nodes of `panels` equal
/// panels; the time integral is taken in the interaction picture
/// `e^{isL_a}|u|⁴u(s)` with Lagrange interpolation inside each panel.
pub fn picard_short_time(
    u0: &RadialField,
    t_final: f64,
    iters: usize,
    mu: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<PicardReport> {
    picard_with_panels(u0, t_final, iters, mu, plan, params, 16, 10)
}

#[allow(clippy::too_many_arguments)]
pub fn picard_with_panels(
    u0: &RadialField,
    t_final: f64,
    iters: usize,
    mu: f64,
    plan: &HankelPlan,
    params: &CouplingParams,
    panels: usize,
    order: usize,
) -> Result<PicardReport> {
    if iters == 0 {
        return Err(Error::InvalidParameter("Picard needs at least one iteration".into()));
    }
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_final}")));
    }
    let stepper = Stepper::new(plan, params, mu);
    let c0 = plan.analyze(u0)?.coeffs;
    let n = c0.len();
    let h = t_final / panels as f64;
    let (gx, gw) = gauss_legendre(order);
    let local: Vec<f64> = gx.iter().map(|x| 0.5 * (1.0 + x)).collect();
    // ∫_0^{x_m} ℓ_j(s) ds on the unit panel.
    let partial = lagrange_partial_integrals(&local);
    let times: Vec<f64> = (0..panels).flat_map(|p| local.iter().map(move |x| (p as f64 + x) * h)).collect();

    let propagate = |c: &[Complex64], t: f64| -> Vec<Complex64> {
        let mut a = c.to_vec();
        stepper.phase(&mut a, t);
        a
    };
    let physical = |c: &[Complex64]| -> Vec<Complex64> {
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        plan.synthesize_values(c, &mut u);
        u
    };
    // Interaction-picture coefficients at every node; iterate 0 is the free flow.
    let mut v: Vec<Vec<Complex64>> = vec![c0.clone(); times.len()];
    let mut v_end = c0.clone();
    let power = stepper.half_power;
    let mut increments = Vec::with_capacity(iters);
    for _ in 0..iters {
        let integrand: Vec<Vec<Complex64>> = times
            .iter()
            .zip(&v)
            .map(|(&s, vs)| {
                let mut u = physical(&propagate(vs, s));
                for z in u.iter_mut() {
                    *z *= mu * z.norm_sqr().powf(power);
                }
                let mut g = vec![Complex64::new(0.0, 0.0); n];
                plan.analyze_values(&u, &mut g);
                propagate(&g, -s)
            })
            .collect();
        let mut next = Vec::with_capacity(times.len());
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for p in 0..panels {
            let block = &integrand[p * order..(p + 1) * order];
            for m in 0..order {
                let mut val = acc.clone();
                for (j, g) in block.iter().enumerate() {
                    let w = h * partial[m][j];
                    for (x, y) in val.iter_mut().zip(g) {
                        *x += y * w;
                    }
                }
                next.push(c0.iter().zip(&val).map(|(a, b)| a - Complex64::i() * b).collect::<Vec<_>>());
            }
            for (j, g) in block.iter().enumerate() {
                let w = 0.5 * h * gw[j];
                for (x, y) in acc.iter_mut().zip(g) {
                    *x += y * w;
                }
            }
        }
        let new_end: Vec<Complex64> = c0.iter().zip(&acc).map(|(a, b)| a - Complex64::i() * b).collect();
        let inc = (stepper.omega
            * new_end
                .iter()
                .zip(&v_end)
                .zip(&stepper.eigenvalues)
                .map(|((x, y), l)| l * (x - y).norm_sqr())
                .sum::<f64>())
        .sqrt();
        increments.push(inc);
        if !inc.is_finite() || next.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            break;
        }
        v = next;
        v_end = new_end;
    }
    let contracting = increments.iter().all(|x| x.is_finite())
        && increments.windows(2).all(|w| w[1] <= w[0] || w[1] < 1e-13);
    let solution = stepper.field(&propagate(&v_end, t_final));
    Ok(PicardReport { solution, increments, contracting })
}

fn lagrange_partial_integrals(x: &[f64]) -> Vec<Vec<f64>> {
    let m = x.len();
    let (gx, gw) = gauss_legendre(m + 2);
    let basis = |j: usize, s: f64| -> f64 {
        (0..m).filter(|&k| k != j).map(|k| (s - x[k]) / (x[j] - x[k])).product()
    };
    x.iter()
        .map(|&upper| {
            (0..m)
                .map(|j| {
                    gx.iter()
                        .zip(&gw)
                        .map(|(g, w)| {
                            let s = 0.5 * upper * (1.0 + g);
                            0.5 * upper * w * basis(j, s)
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScatteringReport {
    pub u_plus: RadialField,
    /// `(t, ‖w(2t) − w(t)‖_{Ḣ¹_a})` over dyadic t.
    pub cauchy_defects: Vec<(f64, f64)>,
    pub decreasing: bool,
}

/// `w(t) = e^{itL_a}u(t)` at the dyadic times `t = 1, 2, 4, …, ≤ t_end` and
/// its Cauchy defects; `u_plus = w(t_end)`.
pub fn extract_scattering_state(traj: &Trajectory, plan: &HankelPlan, params: &CouplingParams) -> Result<ScatteringReport> {
    let t_end = traj.final_time();
    let find = |t: f64| -> Option<usize> {
        traj.times.iter().position(|&s| (s - t).abs() <= 1e-9 * t_end.max(1.0))
    };
    let lam = plan.grid().eigenvalues();
    let pulled = |i: usize| -> Result<SpectralField> {
        let t = traj.times[i];
        let c = plan.analyze(&traj.fields[i])?;
        Ok(c.map_with_eigenvalue(|l, z| z * Complex64::from_polar(1.0, l * t)))
    };
    let omega = params.omega();
    let mut dyadic = Vec::new();
    let mut t = 1.0;
    while t <= t_end * (1.0 + 1e-12) {
        if find(t).is_none() {
            return Err(Error::InvalidParameter(format!("trajectory has no sample at dyadic time {t}")));
        }
        dyadic.push(t);
        t *= 2.0;
    }
    if dyadic.len() < 2 {
        return Err(Error::InvalidParameter(format!("scattering extraction needs t_end >= 2, got {t_end}")));
    }
    let mut defects = Vec::new();
    for pair in dyadic.windows(2) {
        let a = pulled(find(pair[0]).unwrap())?;
        let b = pulled(find(pair[1]).unwrap())?;
        let d = (omega
            * a.coeffs.iter().zip(&b.coeffs).zip(&lam).map(|((x, y), l)| l * (x - y).norm_sqr()).sum::<f64>())
        .sqrt();
        defects.push((pair[0], d));
    }
    let last = traj.times.len() - 1;
    let u_plus = plan.synthesize(&pulled(last)?)?;
    let decreasing = defects.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ScatteringReport { u_plus, cauchy_defects: defects, decreasing })
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub epsilon: f64,
    /// `sup_t ‖u(t) − v(t)‖_{Ḣ¹_a} / ε`.
    pub ratio: f64,
    pub termination: Termination,
}

/// Evolves `u0` adaptively and `u0 + ε·p̂` on the same step sequence, with
/// `p̂` the perturbation normalized in `Ḣ¹_a`.
pub fn stability_compare(
    u0: &RadialField,
    perturbation: &RadialField,
    epsilon: f64,
    config: &EvolutionConfig,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<StabilityReport> {
    let base = evolve(u0, config, plan, params)?;
    let steps: Vec<f64> = base.accepted_steps().map(|s| s.dt).collect();
    let pn = h1_norm(plan, perturbation, params)?;
    if pn == 0.0 {
        return Err(Error::ZeroField);
    }
    let v0 = u0.add(&perturbation.scaled(epsilon / pn))?;
    let u_path = evolve_with_steps(u0, config.mu, &steps, plan, params)?;
    let v_path = evolve_with_steps(&v0, config.mu, &steps, plan, params)?;
    let mut sup: f64 = 0.0;
    for (a, b) in u_path.iter().zip(&v_path) {
        sup = sup.max(h1_distance(plan, a, b, params)?);
    }
    let ratio = if epsilon == 0.0 { sup } else { sup / epsilon };
    Ok(StabilityReport { epsilon, ratio, termination: base.termination })
}

/// Runs forward to `t_end`, then evolves the conjugate forward again and
/// conjugates back. Returns `‖ū(T→0) − u0‖_{Ḣ¹_a} / ‖u0‖_{Ḣ¹_a}`.
pub fn reversibility(
    u0: &RadialField,
    config: &EvolutionConfig,
    plan: &HankelPlan,
    params: &CouplingParams,
) -> Result<f64> {
    let fwd = evolve(u0, config, plan, params)?;
    if fwd.termination != Termination::Completed {
        return Err(Error::Convergence(format!("forward run ended with {}", fwd.termination.as_str())));
    }
    let back0 = fwd.final_field().map(|z| z.conj());
    let back = evolve(&back0, config, plan, params)?;
    let returned = back.final_field().map(|z| z.conj());
    Ok(h1_distance(plan, &returned, u0, params)? / h1_norm(plan, u0, params)?)
}
