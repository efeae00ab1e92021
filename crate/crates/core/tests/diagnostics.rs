use invsq_core::diagnostics::*;
use invsq_core::evolution::{evolve, EvolutionConfig, Termination};
use invsq_core::ground_state::{pohozaev_closed_form, tapered_ground_state};
use invsq_core::operator::CouplingParams;
use invsq_core::{derive_params, Error, HankelPlan, RadialField, RadialGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(a: f64, radius: f64, n: usize) -> (CouplingParams, HankelPlan) {
    let p = derive_params(3, a).unwrap();
    let plan = HankelPlan::new(&p, radius, n).unwrap();
    (p, plan)
}

fn bump(plan: &HankelPlan, p: &CouplingParams, amp: f64, width: f64) -> RadialField {
    plan.field_from_fn(|r| amp * r.powf(-p.sigma) * (-r * r / (width * width)).exp())
}

/// Same node count, radius scaled by `1/λ`: the nodes are exactly `r_k/λ`.
fn dilated_plan(plan: &HankelPlan, lambda: f64) -> HankelPlan {
    let g = plan.grid();
    HankelPlan::from_grid(RadialGrid::new(g.d(), g.nu(), g.radius() / lambda, g.len()).unwrap()).unwrap()
}

fn random_field(plan: &HankelPlan, p: &CouplingParams, rng: &mut ChaCha8Rng) -> RadialField {
    let terms: Vec<(f64, f64, f64)> =
        (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5), rng.gen_range(0.0..1.0))).collect();
    plan.field_from_fn(|r| {
        let s: f64 = terms.iter().map(|(c, w, k)| c * (-r * r / (w * w)).exp() * (1.0 + k * r * r)).sum();
        r.powf(-p.sigma) * s
    })
}

#[test]
fn zero_field_has_zero_quantities() {
    let (p, plan) = setup(0.75, 10.0, 64);
    let z = RadialField::zeros(plan.grid().clone());
    let c = conserved_quantities(&z, &plan, &p, -1.0).unwrap();
    assert_eq!((c.mass, c.energy, c.kinetic), (0.0, 0.0, 0.0));
}

#[test]
fn gaussian_mass_is_pi_three_halves() {
    let (p, plan) = setup(0.0, 20.0, 256);
    let u = plan.field_from_fn(|r| (-r * r / 2.0).exp());
    let m = mass(&u, &p);
    let exact = std::f64::consts::PI.powf(1.5);
    assert!((m - exact).abs() < 1e-8, "{m} vs {exact}");
}

#[test]
fn ground_state_energy_is_a_third_of_the_constant() {
    // The wall taper from R/2 cuts the r^{−3/2} tail, an O(R^{−2}) energy excess.
    let target = pohozaev_closed_form(&derive_params(3, 0.75).unwrap()) / 3.0;
    let excess = |radius: f64, n: usize| {
        let (p, plan) = setup(0.75, radius, n);
        let w = tapered_ground_state(&p, &plan, 0.5);
        (conserved_quantities(&w, &plan, &p, -1.0).unwrap().energy - target) / target
    };
    let (coarse, fine) = (excess(30.0, 512), excess(60.0, 1024));
    assert!(fine > 0.0 && fine < 2e-3, "{fine}");
    assert!((coarse / fine - 4.0).abs() < 0.4, "{coarse} / {fine}");
}

#[test]
fn profile_matches_its_published_shape() {
    for s in [0.0, 0.3, 0.999] {
        let [f, f1, f2, ..] = virial_profile(s);
        assert_eq!((f, f1, f2), (s, 1.0, 0.0));
    }
    for s in [2.0, 2.5, 10.0] {
        assert_eq!(virial_profile(s), [1.5, 0.0, 0.0, 0.0, 0.0]);
    }
    let mid = virial_profile(1.5);
    assert!(mid[1] > 0.0 && mid[1] < 1.0 && mid[2] < 0.0);
    assert_eq!(mass_cutoff(0.4), [1.0, 0.0]);
    assert_eq!(mass_cutoff(1.2), [0.0, 0.0]);
}

#[test]
fn weights_reduce_to_the_quadratic_inside() {
    let nodes: Vec<f64> = (1..200).map(|k| k as f64 * 0.05).collect();
    let w = VirialWeights::new(2.0, 3, &nodes).unwrap();
    for (i, r) in nodes.iter().enumerate() {
        if *r <= 1.99 {
            assert!((w.psi[i] - r * r).abs() < 1e-12);
            assert!((w.laplacian[i] - 6.0).abs() < 1e-12);
            assert!(w.bilaplacian[i].abs() < 1e-12);
        }
        if *r >= 2.0 * 2f64.sqrt() * 1.001 {
            assert!((w.psi[i] - 6.0).abs() < 1e-12 && w.dpsi[i] == 0.0);
        }
    }
}

#[test]
fn virial_formula_matches_differences_and_is_positive_when_defocusing() {
    let (p, plan) = setup(0.75, 40.0, 512);
    let u0 = bump(&plan, &p, 1.0, 1.0);
    let cfg = EvolutionConfig { mu: 1.0, t_end: 1.0, sample_interval: Some(0.005), ..Default::default() };
    let traj = evolve(&u0, &cfg, &plan, &p).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    let s = virial_report(&traj, 8.0, &plan, &p, 1.0).unwrap();
    assert_eq!(s.len(), traj.times.len());
    let mismatch = s.virial_mismatch();
    assert!(mismatch < 1e-3, "{mismatch}");
    assert!(s.d2v_r_formula.iter().all(|&x| x > 0.0));
    assert!(s.energy.iter().all(|&e| e >= 0.0));
    assert!(DiagnosticsSeries::relative_drift(&s.mass) < 1e-6);
    let mut csv = Vec::new();
    s.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), DiagnosticsSeries::COLUMNS.join(","));
    assert_eq!(text.lines().count(), s.len() + 1);
}

#[test]
fn virial_momentum_matches_finite_difference_of_v() {
    let (p, plan) = setup(0.75, 40.0, 512);
    let u0 = bump(&plan, &p, 1.0, 1.0);
    let cfg = EvolutionConfig { mu: 1.0, t_end: 0.5, sample_interval: Some(0.005), ..Default::default() };
    let traj = evolve(&u0, &cfg, &plan, &p).unwrap();
    let s = virial_report(&traj, 8.0, &plan, &p, 1.0).unwrap();
    let (d1, _) = finite_differences(&s.times, &s.v_r).unwrap();
    let scale = s.dv_r.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let worst = (1..s.len() - 1).map(|i| (d1[i] - s.dv_r[i]).abs()).fold(0.0, f64::max);
    assert!(worst / scale < 1e-3, "{}", worst / scale);
}

#[test]
fn static_ground_state_has_vanishing_virial_acceleration() {
    let (p, plan) = setup(0.75, 40.0, 512);
    let w = tapered_ground_state(&p, &plan, 0.5);
    let weights = VirialWeights::new(8.0, 3, plan.grid().nodes()).unwrap();
    let v = virial_at(&w, &weights, &plan, &p, -1.0).unwrap();
    let k = pohozaev_closed_form(&p);
    assert!(v.dv.abs() < 1e-12);
    assert!(v.d2v.abs() / k < 1e-2, "{}", v.d2v / k);
}

#[test]
fn virial_report_needs_three_samples() {
    let (p, plan) = setup(0.75, 20.0, 64);
    let u0 = bump(&plan, &p, 0.1, 1.0);
    let cfg = EvolutionConfig { t_end: 0.01, sample_interval: Some(0.01), ..Default::default() };
    let traj = evolve(&u0, &cfg, &plan, &p).unwrap();
    assert_eq!(traj.times.len(), 2);
    assert!(virial_report(&traj, 4.0, &plan, &p, 1.0).is_err());
}

#[test]
fn truncated_mass_limits() {
    let (p, plan) = setup(0.0, 20.0, 256);
    let u = plan.field_from_fn(|r| (-r * r).exp());
    assert_eq!(truncated_mass(&u, 25.0, &p), mass(&u, &p));
    let compact = plan.field_from_fn(|r| if r < 2.0 { (1.0 - r * r / 4.0).powi(4) } else { 0.0 });
    assert_eq!(truncated_mass(&compact, 4.0, &p), mass(&compact, &p));
    assert!(truncated_mass(&u, 0.5, &p) < mass(&u, &p));
}

#[test]
fn truncated_mass_rate_obeys_its_bound_along_a_run() {
    let (p, plan) = setup(0.75, 40.0, 512);
    let u0 = bump(&plan, &p, 1.0, 1.0);
    let cfg = EvolutionConfig { mu: 1.0, t_end: 0.5, sample_interval: Some(0.0025), ..Default::default() };
    let traj = evolve(&u0, &cfg, &plan, &p).unwrap();
    let radius = 2.0;
    let m: Vec<f64> = traj.fields.iter().map(|u| truncated_mass(u, radius, &p)).collect();
    let (dm, _) = finite_differences(&traj.times, &m).unwrap();
    for (i, u) in traj.fields.iter().enumerate() {
        let rate = truncated_mass_rate(u, radius, &plan, &p).unwrap();
        // |φ_M′| ≤ 35/8 and |x| ≤ R on its support.
        assert!(rate.rate.abs() <= 35.0 / 4.0 * rate.bound);
        if i > 0 && i + 1 < traj.fields.len() {
            let scale = rate.bound / radius;
            assert!((dm[i] - rate.rate).abs() < 1e-3 * scale, "t={} {} vs {}", traj.times[i], dm[i], rate.rate);
        }
    }
}

#[test]
fn l10_of_zero_is_zero_and_linear_value_is_resolution_stable() {
    let (p, plan) = setup(0.75, 30.0, 128);
    let z = RadialField::zeros(plan.grid().clone());
    let cfg = EvolutionConfig { mu: 0.0, t_end: 1.0, sample_interval: Some(0.05), ..Default::default() };
    assert_eq!(spacetime_l10(&evolve(&z, &cfg, &plan, &p).unwrap()), 0.0);
    let value = |n: usize| {
        let (p, plan) = setup(0.75, 30.0, n);
        let u0 = bump(&plan, &p, 1.0, 1.0);
        spacetime_l10(&evolve(&u0, &cfg, &plan, &p).unwrap())
    };
    let (a, b) = (value(256), value(512));
    assert!(a > 0.0 && a.is_finite());
    assert!((a - b).abs() / b < 1e-4, "{a} vs {b}");
}

#[test]
fn l10_accumulation_is_monotone() {
    let (p, plan) = setup(0.75, 40.0, 512);
    let u0 = bump(&plan, &p, 1.0, 1.0);
    let cfg = EvolutionConfig { mu: 1.0, t_end: 0.5, sample_interval: Some(0.01), ..Default::default() };
    let s = virial_report(&evolve(&u0, &cfg, &plan, &p).unwrap(), 8.0, &plan, &p, 1.0).unwrap();
    assert!(s.l10_accum.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn local_smoothing_denominator_matches_closed_form_for_singular_data() {
    let (p, plan) = setup(-3.0 / 16.0, 40.0, 512);
    let s = p.sigma;
    let u = bump(&plan, &p, 1.0, 1.0);
    let radius = 2.0;
    let rep = local_smoothing_with(&u, radius, &plan, &p, LocalSmoothingOptions { fixed_horizon: Some(1.0), ..Default::default() })
        .unwrap();
    let rule = invsq_core::quadrature::GradedRule::interval(40.0);
    let omega = p.omega();
    let m = omega * rule.integrate(|r| r.powf(2.0 - 2.0 * s) * (-2.0 * r * r).exp());
    let g = omega
        * rule.integrate(|r| {
            let du = (-s / r - 2.0 * r) * r.powf(-s) * (-r * r).exp();
            du * du * r * r
        });
    let want = (m * g).sqrt() + m / radius;
    assert!(((rep.denominator - want) / want).abs() < 1e-8, "{} {want}", rep.denominator);
}

#[test]
fn local_smoothing_ratio_is_resolution_stable_for_singular_data() {
    let (p, coarse) = setup(-3.0 / 16.0, 80.0, 256);
    let (_, fine) = setup(-3.0 / 16.0, 80.0, 512);
    let opts = LocalSmoothingOptions { fixed_horizon: Some(4.0), ..Default::default() };
    let a = local_smoothing_with(&bump(&coarse, &p, 1.0, 0.8), 1.0, &coarse, &p, opts).unwrap();
    let b = local_smoothing_with(&bump(&fine, &p, 1.0, 0.8), 1.0, &fine, &p, opts).unwrap();
    assert!(((a.ratio - b.ratio) / b.ratio).abs() < 1e-3, "{} {}", a.ratio, b.ratio);
}

#[test]
fn strichartz_energy_pair_is_exactly_one() {
    let (p, plan) = setup(-3.0 / 16.0, 20.0, 128);
    let u = bump(&plan, &p, 1.0, 1.0);
    let r = strichartz_ratio(&u, f64::INFINITY, 2.0, 4.0, &plan, &p).unwrap();
    assert!((r - 1.0).abs() < 1e-12, "{r}");
}

#[test]
fn strichartz_rejects_inadmissible_pairs() {
    let (p, plan) = setup(0.0, 20.0, 64);
    let u = bump(&plan, &p, 1.0, 1.0);
    for (q, r) in [(2.0, 6.0), (4.0, 4.0), (1.0, 1.0)] {
        assert!(matches!(strichartz_ratio(&u, q, r, 1.0, &plan, &p), Err(Error::ExponentWindow(_))));
    }
    let z = RadialField::zeros(plan.grid().clone());
    assert!(matches!(strichartz_ratio(&z, 10.0 / 3.0, 10.0 / 3.0, 1.0, &plan, &p), Err(Error::ZeroField)));
}

#[test]
fn strichartz_ratio_is_dilation_invariant() {
    let (p, plan) = setup(-3.0 / 16.0, 40.0, 256);
    let lambda = 1.7;
    let scaled = dilated_plan(&plan, lambda);
    let u = bump(&plan, &p, 1.0, 1.0);
    let v = bump(&scaled, &p, 1.0, 1.0 / lambda);
    for (q, r) in [(10.0 / 3.0, 10.0 / 3.0), (4.0, 3.0), (8.0, 2.4)] {
        let a = strichartz_ratio(&u, q, r, 4.0, &plan, &p).unwrap();
        let b = strichartz_ratio(&v, q, r, 4.0 / (lambda * lambda), &scaled, &p).unwrap();
        assert!((a - b).abs() / a < 1e-6, "({q},{r}): {a} vs {b}");
    }
}

#[test]
fn strichartz_constant_is_resolution_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = [0.0f64; 2];
    for _ in 0..5 {
        let seed: u64 = rng.gen();
        for (j, n) in [128, 256].into_iter().enumerate() {
            let (p, plan) = setup(-3.0 / 16.0, 40.0, n);
            let u = random_field(&plan, &p, &mut ChaCha8Rng::seed_from_u64(seed));
            worst[j] = worst[j].max(strichartz_ratio(&u, 10.0 / 3.0, 10.0 / 3.0, 4.0, &plan, &p).unwrap());
        }
    }
    assert!((worst[0] - worst[1]).abs() / worst[1] < 0.05, "{worst:?}");
}

#[test]
fn local_smoothing_is_dilation_covariant() {
    let (p, plan) = setup(-3.0 / 16.0, 160.0, 256);
    let lambda = 2.0;
    let scaled = dilated_plan(&plan, lambda);
    let u = bump(&plan, &p, 1.0, 0.5);
    let v = bump(&scaled, &p, 3.0, 0.5 / lambda);
    let a = local_smoothing_with(&u, 2.0, &plan, &p, LocalSmoothingOptions::default()).unwrap();
    let b = local_smoothing_with(&v, 2.0 / lambda, &scaled, &p, LocalSmoothingOptions::default()).unwrap();
    assert!((a.ratio - b.ratio).abs() / a.ratio < 1e-6, "{} vs {}", a.ratio, b.ratio);
    assert!((a.horizon - b.horizon * lambda * lambda).abs() < 1e-9 * a.horizon);
    assert!(a.tail_estimate <= 0.01);
}

#[test]
fn local_smoothing_of_an_eigenmode_is_positive() {
    let (p, plan) = setup(0.75, 10.0, 64);
    let mut c = vec![Complex64::new(0.0, 0.0); plan.len()];
    c[0] = Complex64::new(1.0, 0.0);
    let u = plan.synthesize(&plan.spectral_field(c).unwrap()).unwrap();
    let opts = LocalSmoothingOptions { fixed_horizon: Some(5.0), ..Default::default() };
    let r = local_smoothing_with(&u, 1.0, &plan, &p, opts).unwrap();
    assert!(r.ratio > 0.0 && r.ratio.is_finite() && r.numerator.is_finite());
    // An eigenmode never disperses, so the adaptive horizon cannot converge.
    let err = local_smoothing_ratio(&u, 1.0, &plan, &p).unwrap_err();
    assert!(err.to_string().contains("tail-not-converged"), "{err}");
}

#[test]
fn local_smoothing_is_bounded_over_radii() {
    let (p, plan) = setup(-3.0 / 16.0, 160.0, 256);
    let u = bump(&plan, &p, 1.0, 0.5);
    for radius in [1.0, 2.0, 4.0, 8.0] {
        let r = local_smoothing_ratio(&u, radius, &plan, &p).unwrap();
        assert!(r > 0.1 && r < 5.0, "R={radius}: {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mass_is_quadratic_and_truncation_monotone(seed in any::<u64>(), s in 0.1f64..3.0, r1 in 0.5f64..4.0, r2 in 0.5f64..4.0) {
        let (p, plan) = setup(0.75, 20.0, 128);
        let u = random_field(&plan, &p, &mut ChaCha8Rng::seed_from_u64(seed));
        let m = mass(&u, &p);
        prop_assert!((mass(&u.scaled(s), &p) - s * s * m).abs() <= 1e-12 * s * s * m.max(1e-300));
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(truncated_mass(&u, lo, &p) <= truncated_mass(&u, hi, &p) + 1e-14 * m);
        prop_assert!(truncated_mass(&u, hi, &p) <= m * (1.0 + 1e-14));
    }
}
