//! Acceptance criteria 1–12, each a list of named checks.

use std::time::Instant;

use invsq_core::diagnostics::{conserved_quantities, virial_report, LocalSmoothingOptions};
use invsq_core::evolution::{evolve, evolve_fixed, h1_distance, h1_norm, reversibility, EvolutionConfig, Termination};
use invsq_core::ground_state::{eval_ground_state, pde_residual, pohozaev_report, thresholds};
use invsq_core::operator::{apply_multiplier, kinetic, MultiplierSpec};
use invsq_core::special::{bessel_j, BesselOrder};
use invsq_core::variational::{
    classify_initial_data, energy, maximize_quotient, shifted_bubble_quotient, ClassifyOptions,
    MaximizeOptions, TrapLabel,
};
use invsq_core::{derive_params, HankelPlan};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::experiments::{
    ground_state_checks, growth, growth_json, heat_checks, picard_distance, scattering_checks, virial_checks,
    FREE_CONSTANT_LISTED, RESOLUTION_SPREAD,
};
use crate::lab::{fit_two_resolutions, smoothing_sweep, strichartz_sweep, Lab, RandomBumps};
use crate::report::{Check, Outcome};

pub const TITLES: [&str; 12] = [
    "transform correctness",
    "spectral calculus",
    "ground state",
    "pohozaev",
    "sharp constants",
    "conservation",
    "oracle agreement",
    "static soliton",
    "virial",
    "blowup",
    "scattering",
    "inequality sweeps",
];

/// Checks that cannot pass at the stated tolerance with this discretization.
/// They are evaluated and reported as failures like every other check.
pub const KNOWN_UNATTAINABLE: [&str; 5] = [
    "residual a=-0.1875",
    "residual decreasing a=0",
    "shifted bubble within 2%",
    "static drift",
    "monotone last decade",
];

pub const SUITE_BUDGET_SECONDS: f64 = 900.0;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// Every failing check is one of [`KNOWN_UNATTAINABLE`].
    pub fn only_known_failures(&self) -> bool {
        self.error.is_none() && self.failures().iter().all(|c| KNOWN_UNATTAINABLE.contains(&c.name.as_str()))
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!("criterion {:>2} {:<22} {verdict} ({:.1} s)", self.id, self.title, self.seconds);
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        for c in self.failures() {
            let known = if KNOWN_UNATTAINABLE.contains(&c.name.as_str()) { ", known" } else { "" };
            match c.threshold {
                Some(t) => s.push_str(&format!(" [{}: {:.4e} vs {:.1e}{known}]", c.name, c.value, t)),
                None => s.push_str(&format!(" [{}{known}]", c.name)),
            }
        }
        s
    }
}

pub fn run_criterion(id: u32) -> CriterionReport {
    assert!((1..=12).contains(&id), "criteria are numbered 1 to 12");
    let start = Instant::now();
    let mut out = Outcome::default();
    let result = match id {
        1 => transform(&mut out),
        2 => spectral(&mut out),
        3 => ground_state(&mut out),
        4 => pohozaev(&mut out),
        5 => sharp_constants(&mut out),
        6 => conservation(&mut out),
        7 => oracle(&mut out),
        8 => static_soliton(&mut out),
        9 => virial(&mut out),
        10 => blowup(&mut out),
        11 => scattering(&mut out),
        _ => inequalities(&mut out),
    };
    if let Err(e) = result {
        out.fail(e);
    }
    let seconds = start.elapsed().as_secs_f64();
    let budget = match id {
        1 => Some(5.0),
        5 => Some(120.0),
        _ => None,
    };
    if let Some(b) = budget {
        out.check(Check::below("runtime seconds", seconds, b));
    }
    CriterionReport {
        id,
        title: TITLES[id as usize - 1],
        checks: out.checks,
        metrics: out.metrics,
        error: out.error,
        seconds,
    }
}

/// The acceptance-suite experiment.
pub fn suite(cfg: &ExperimentConfig, out: &mut Outcome) {
    let ids: Vec<u32> = cfg.options.criteria.clone().unwrap_or_else(|| (1..=12).collect());
    let start = Instant::now();
    let mut reports = Vec::new();
    for id in ids {
        let r = run_criterion(id);
        eprintln!("{}", r.line());
        out.check(Check::flag(format!("criterion {id}"), r.passed()));
        reports.push(r);
    }
    let total = start.elapsed().as_secs_f64();
    out.check(Check::below("suite runtime seconds", total, SUITE_BUDGET_SECONDS));
    out.metric("criteria", serde_json::to_value(&reports).expect("reports serialize"));
    out.metric("known_unattainable", json!(KNOWN_UNATTAINABLE));
}

type Step = invsq_core::Result<()>;

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

fn plan_for_nu(nu: f64, radius: f64, n: usize) -> invsq_core::Result<(invsq_core::CouplingParams, HankelPlan)> {
    let p = derive_params(3, nu * nu - 0.25)?;
    let plan = HankelPlan::new(&p, radius, n)?;
    Ok((p, plan))
}

fn transform(out: &mut Outcome) -> Step {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for nu in [0.3, 0.5, 1.0] {
        let (_, plan) = plan_for_nu(nu, 15.0, 256)?;
        let coeffs: Vec<Complex64> =
            (0..256).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let back = plan.analyze(&plan.synthesize(&plan.spectral_field(coeffs.clone())?)?)?;
        let u = plan.field_from_fn(|r| (-(r - 4.0).powi(2)).exp() * (1.0 + 0.3 * r));
        let again = plan.synthesize(&plan.analyze(&u)?)?;
        let err = max_rel(&back.coeffs, &coeffs).max(max_rel(&again.values, &u.values));
        out.check(Check::at_most(format!("round trip nu={nu}"), err, 1e-10));
    }
    let (_, plan) = plan_for_nu(0.5, 20.0, 512)?;
    let u = plan.field_from_fn(|r| (-0.5 * r * r).exp());
    let c = plan.analyze(&u)?;
    let order = BesselOrder::new(1.5)?;
    let wall = plan.grid().radius();
    let mut worst: f64 = 0.0;
    for (k, &rho) in plan.grid().spectral_nodes().iter().enumerate() {
        let norm = wall * bessel_j(order, rho * wall)?.abs() / 2f64.sqrt();
        let profile = c.coeffs[k].re * norm * rho.powf(-0.5);
        worst = worst.max((profile - (-0.5 * rho * rho).exp()).abs());
    }
    out.check(Check::at_most("gaussian pair", worst, 1e-6));
    Ok(())
}

fn spectral(out: &mut Outcome) -> Step {
    let mut drift: f64 = 0.0;
    for a in [-3.0 / 16.0, 0.0, 0.75] {
        let lab = Lab::new(3, a, 25.0, 256)?;
        let u = RandomBumps::batch(2, 1, (0.5, 2.0))[0].sample(&lab);
        let m0 = u.radial_l2_squared();
        for i in 0..=12 {
            let t = 1e-4 * 10f64.powf(i as f64 / 2.0);
            let v = apply_multiplier(&lab.plan, &u, &MultiplierSpec::Propagator { t })?;
            drift = drift.max(((v.radial_l2_squared() - m0) / m0).abs());
        }
        heat_checks(&lab.params, 0.3, out, &format!(" a={a}"))?;
    }
    out.check(Check::at_most("propagator unitarity drift", drift, 1e-12));
    Ok(())
}

fn ground_state(out: &mut Outcome) -> Step {
    for a in [-3.0 / 16.0, 0.0, 0.75] {
        let mut residuals = Vec::new();
        for n in [256, 512, 1024] {
            let lab = Lab::new(3, a, 60.0, n)?;
            let ws = eval_ground_state(&lab.params, lab.plan.grid())?;
            residuals.push(pde_residual(&ws, &lab.plan)?.interior);
            if n == 1024 {
                let mut sub = Outcome::default();
                ground_state_checks(&lab, &mut sub, "")?;
                let invariant = sub.checks.iter().find(|c| c.name == "first-order invariant").unwrap().value;
                out.check(Check::at_most(format!("first-order invariant a={a}"), invariant, 1e-10));
            }
        }
        out.check(Check::at_most(format!("residual a={a}"), residuals[2], 1e-4));
        let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
        out.check(Check::flag(format!("residual decreasing a={a}"), decreasing));
        out.metric(&format!("residuals a={a} (N=256,512,1024)"), json!(residuals));
    }
    Ok(())
}

fn pohozaev(out: &mut Outcome) -> Step {
    for (a, listed) in [(0.0, 12.82100), (-3.0 / 16.0, 3.205250)] {
        let lab = Lab::new(3, a, 40.0, 256)?;
        let rep = pohozaev_report(&lab.params, &lab.plan)?;
        out.check(Check::at_most(
            format!("kinetic=l6 a={a}"),
            ((rep.q_kinetic - rep.q_l6) / rep.q_l6).abs(),
            1e-6,
        ));
        out.check(Check::at_most(format!("listed value a={a}"), (rep.q_l6 - listed).abs(), 1e-5));
        out.check(Check::flag(format!("printed expression flagged a={a}"), rep.printed_mismatch));
        out.metric(
            &format!("a={a}"),
            json!({ "q_l6": rep.q_l6, "q_kinetic": rep.q_kinetic, "printed_form": rep.printed_form }),
        );
    }
    Ok(())
}

fn sharp_constants(out: &mut Outcome) -> Step {
    let opts = MaximizeOptions { log_points: 512, ..Default::default() };
    for (a, listed) in [(0.0, FREE_CONSTANT_LISTED), (-3.0 / 16.0, 0.67821)] {
        let lab = Lab::new(3, a, 20.0, 256)?;
        let init = lab.plan.field_from_fn(|r| (-r * r / 2.0).exp());
        let rep = maximize_quotient(&lab.params, &lab.plan, &init, &opts)?;
        out.check(Check::at_most(format!("quotient a={a}"), (rep.best_quotient - listed).abs(), 1e-3));
        out.check(Check::at_most(format!("alignment a={a}"), rep.alignment, 1e-3));
        out.metric(&format!("best a={a}"), rep.best_quotient);
    }
    let lab = Lab::new(3, 0.5, 20.0, 256)?;
    let mut best: f64 = 0.0;
    for (amp, width) in [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)] {
        let rep = maximize_quotient(&lab.params, &lab.plan, &lab.bump(amp, width), &opts)?;
        best = best.max(rep.best_quotient);
    }
    out.check(Check::below("radial runs below free constant a=0.5", best, FREE_CONSTANT_LISTED));
    let q = shifted_bubble_quotient(0.5, 20.0)?;
    out.check(Check::at_most("shifted bubble within 2%", (FREE_CONSTANT_LISTED - q) / FREE_CONSTANT_LISTED, 0.02));
    out.metric("radial best a=0.5", best);
    out.metric("shifted bubble a=0.5 t=20", q);
    Ok(())
}

fn conservation(out: &mut Outcome) -> Step {
    let lab = Lab::new(3, 0.75, 40.0, 512)?;
    let u0 = lab.bump(1.0, 1.0);
    let cfg = EvolutionConfig { mu: 1.0, t_end: 1.0, ..Default::default() };
    let traj = evolve(&u0, &cfg, &lab.plan, &lab.params)?;
    out.check(Check::flag("completed", traj.termination == Termination::Completed));
    let c0 = conserved_quantities(&u0, &lab.plan, &lab.params, 1.0)?;
    let (mut dm, mut de): (f64, f64) = (0.0, 0.0);
    for f in &traj.fields {
        let c = conserved_quantities(f, &lab.plan, &lab.params, 1.0)?;
        dm = dm.max(((c.mass - c0.mass) / c0.mass).abs());
        de = de.max(((c.energy - c0.energy) / c0.energy).abs());
    }
    out.check(Check::at_most("mass drift", dm, 1e-6));
    out.check(Check::at_most("energy drift", de, 1e-6));
    out.check(Check::at_most("time reversal", reversibility(&u0, &cfg, &lab.plan, &lab.params)?, 1e-6));
    let fields: Vec<_> = [128usize, 256, 512, 1024]
        .iter()
        .map(|&k| evolve_fixed(&u0, 1.0, 1.0 / k as f64, k, &lab.plan, &lab.params))
        .collect::<invsq_core::Result<_>>()?;
    let diffs: Vec<f64> = fields
        .windows(2)
        .map(|w| h1_distance(&lab.plan, &w[0], &w[1], &lab.params))
        .collect::<invsq_core::Result<_>>()?;
    let slopes: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for (i, s) in slopes.iter().enumerate() {
        out.check(Check::at_most(format!("strang slope {i}"), (s - 2.0).abs(), 0.1));
    }
    out.metric("slopes", json!(slopes));
    Ok(())
}

fn oracle(out: &mut Outcome) -> Step {
    for a in [0.0, 0.75, -3.0 / 16.0] {
        let lab = Lab::new(3, a, 40.0, 512)?;
        let cfg = EvolutionConfig { mu: 1.0, ..Default::default() };
        let (d, contracting) = picard_distance(&lab, &lab.bump(0.3, 1.0), 0.05, 12, &cfg)?;
        out.check(Check::flag(format!("contracting a={a}"), contracting));
        out.check(Check::at_most(format!("picard vs evolve a={a}"), d, 1e-6));
    }
    Ok(())
}

fn static_soliton(out: &mut Outcome) -> Step {
    let lab = Lab::new(3, -3.0 / 16.0, 40.0, 1024)?;
    let w = lab.ground_state(1.0, 0.05);
    let cfg = EvolutionConfig { mu: -1.0, t_end: 0.25, sample_interval: Some(0.025), wall_guard: 1.0, ..Default::default() };
    let traj = evolve(&w, &cfg, &lab.plan, &lab.params)?;
    let norm = h1_norm(&lab.plan, &w, &lab.params)?;
    let mut drift: f64 = 0.0;
    let mut path = Vec::new();
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        let d = h1_distance(&lab.plan, u, &w, &lab.params)? / norm;
        path.push((*t, d));
        drift = drift.max(d);
    }
    out.check(Check::flag("completed", traj.termination == Termination::Completed));
    out.check(Check::at_most("static drift", drift, 1e-3));
    out.metric("drift_path", json!(path));
    out.metric("quotient_of_tapered_data", kinetic(&lab.plan, &w, &lab.params)?);
    Ok(())
}

fn virial(out: &mut Outcome) -> Step {
    let radius = 8.0;
    let c = 1.0;
    out.metric("trap_constant", c);
    let lab = Lab::new(3, 0.75, 40.0, 512)?;
    let cfg = EvolutionConfig { mu: 1.0, t_end: 1.0, sample_interval: Some(0.005), ..Default::default() };
    let traj = evolve(&lab.bump(1.0, 1.0), &cfg, &lab.plan, &lab.params)?;
    let s = virial_report(&traj, radius, &lab.plan, &lab.params, 1.0)?;
    virial_checks(&traj, &s, &lab, c, out, " defocusing")?;

    let trapped = Lab::new(3, 0.75, 80.0, 1024)?;
    let cfg = EvolutionConfig { mu: -1.0, t_end: 1.0, sample_interval: Some(0.01), wall_guard: 1.0, ..Default::default() };
    let traj = evolve(&trapped.ground_state(0.4, 0.5), &cfg, &trapped.plan, &trapped.params)?;
    let s = virial_report(&traj, radius, &trapped.plan, &trapped.params, -1.0)?;
    let cls = classify_initial_data(&trapped.plan, &traj.fields[0], &trapped.params, ClassifyOptions::default())?;
    out.check(Check::flag("trapped data classified", cls.label == TrapLabel::TrappedBelow));
    virial_checks(&traj, &s, &trapped, c, out, " trapped")?;

    let cfg = EvolutionConfig { mu: -1.0, t_end: 0.2, sample_interval: Some(0.002), wall_guard: 1.0, ..Default::default() };
    let traj = evolve(&lab.ground_state(1.5, 0.5), &cfg, &lab.plan, &lab.params)?;
    let s = virial_report(&traj, radius, &lab.plan, &lab.params, -1.0)?;
    let cls = classify_initial_data(&lab.plan, &traj.fields[0], &lab.params, ClassifyOptions::default())?;
    out.check(Check::flag("blowup-region data classified", cls.label == TrapLabel::BlowupRegion));
    virial_checks(&traj, &s, &lab, c, out, " blowup-region")?;
    out.metric("blowup-region termination", traj.termination.as_str());
    Ok(())
}

fn blowup(out: &mut Outcome) -> Step {
    let lab = Lab::new(3, -3.0 / 16.0, 40.0, 1024)?;
    let u0 = lab.ground_state(1.2, 0.05);
    let cls = classify_initial_data(&lab.plan, &u0, &lab.params, ClassifyOptions::default())?;
    out.metric(
        "classification",
        json!({ "label": format!("{:?}", cls.label), "energy_ratio": cls.energy_ratio, "kinetic_ratio": cls.kinetic_ratio }),
    );
    let cfg = EvolutionConfig { mu: -1.0, t_end: 1.0, sample_every: 1000, wall_guard: 1.0, ..Default::default() };
    let traj = evolve(&u0, &cfg, &lab.plan, &lab.params)?;
    let g = growth(&traj);
    out.check(Check::flag("blowup detected", traj.termination == Termination::BlowupDetected));
    out.check(Check::flag("monotone last decade", g.last_decade_monotone));
    out.metric("blowup_time", traj.final_time());
    out.metric("accepted_steps", traj.accepted_steps().count());
    out.metric("growth", growth_json(&g));
    Ok(())
}

fn scattering(out: &mut Outcome) -> Step {
    let lab = Lab::new(3, 0.75, 80.0, 512)?;
    let cfg = EvolutionConfig { mu: 1.0, t_end: 8.0, sample_interval: Some(0.125), ..Default::default() };
    let traj = evolve(&lab.bump(0.5, 2.0), &cfg, &lab.plan, &lab.params)?;
    scattering_checks(&traj, &lab, out, "")
}

fn inequalities(out: &mut Outcome) -> Step {
    let a = -3.0 / 16.0;
    let lab = Lab::new(3, a, 40.0, 512)?;
    let k = thresholds(&lab.params).kinetic_threshold;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let data = RandomBumps::batch(rng.gen(), 50, (0.3, 3.0));
    let slacks: Vec<f64> = data
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            // Amplitudes spread the kinetic ratio y over (0, 3].
            let u = b.sample(&lab);
            let y_target = 3.0 * (i as f64 + 1.0) / 50.0;
            let u = u.scaled((y_target * k / kinetic(&lab.plan, &u, &lab.params)?).sqrt());
            let y = kinetic(&lab.plan, &u, &lab.params)? / k;
            let e = energy(&lab.plan, &u, &lab.params, -1.0)?;
            Ok(2.0 * e / k - (y - y.powi(3) / 3.0))
        })
        .collect::<invsq_core::Result<_>>()?;
    let min_slack = slacks.iter().cloned().fold(f64::INFINITY, f64::min);
    out.check(Check::at_least("sharp sobolev energy bound slack", min_slack, -1e-6));
    out.metric("sse_min_slack", min_slack);

    let strich = RandomBumps::batch(rng.gen(), 20, (0.6, 1.0));
    let fit = fit_two_resolutions(3, a, 40.0, 512, |lab| strichartz_sweep(lab, &strich, 10.0 / 3.0, 10.0 / 3.0, 4.0))?;
    out.check(Check::at_most("strichartz constant spread", fit.spread(), RESOLUTION_SPREAD));
    out.metric("strichartz_constant", json!({ "N=256": fit.coarse, "N=512": fit.fine }));

    let smooth = RandomBumps::batch(rng.gen(), 10, (0.6, 1.0));
    let radii = [1.0, 2.0, 4.0, 8.0];
    let fit = fit_two_resolutions(3, a, 240.0, 1024, |lab| smoothing_sweep(lab, &smooth, &radii))?;
    out.check(Check::at_most("local smoothing constant spread", fit.spread(), RESOLUTION_SPREAD));
    out.metric("local_smoothing_constant", json!({ "N=512": fit.coarse, "N=1024": fit.fine }));
    out.metric("local_smoothing_tail_tolerance", LocalSmoothingOptions::default().tail_tolerance);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_failures_are_recognized() {
        let r = CriterionReport {
            id: 1,
            title: TITLES[0],
            checks: vec![Check::at_most("static drift", 2.0, 1.0), Check::at_most("x", 0.0, 1.0)],
            metrics: Map::new(),
            error: None,
            seconds: 0.0,
        };
        assert!(!r.passed());
        assert!(r.only_known_failures());
        assert!(r.line().contains("FAIL") && r.line().contains("known"));
        let other = CriterionReport { checks: vec![Check::at_most("mass drift", 2.0, 1.0)], ..r.clone() };
        assert!(!other.only_known_failures());
        let errored = CriterionReport { checks: vec![], error: Some("boom".into()), ..r };
        assert!(!errored.only_known_failures());
    }

    #[test]
    fn transform_criterion_passes_quickly() {
        let r = run_criterion(1);
        assert!(r.passed(), "{}", r.line());
    }
}
