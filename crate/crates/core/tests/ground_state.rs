use std::f64::consts::PI;

use invsq_core::ground_state::{
    eval_ground_state, first_order_invariant, first_order_invariant_of, first_order_invariant_scale,
    ground_state_derivative, ground_state_profile, pde_residual, pohozaev_report, radial_functionals,
    thresholds,
};
use invsq_core::{derive_params, HankelPlan};

const K0: f64 = 12.820_992_204_969_127;

fn k_of(beta: f64) -> f64 {
    beta * beta * 3f64.powf(1.5) * PI * PI / 4.0
}

#[test]
fn free_constant() {
    assert!((3f64.powf(1.5) * PI * PI / 4.0 - K0).abs() < 1e-12);
}

#[test]
fn pohozaev_identities() {
    for &a in &[-0.21, -3.0 / 16.0, 0.0, 0.5, 0.75] {
        let p = derive_params(3, a).unwrap();
        let plan = HankelPlan::new(&p, 40.0, 256).unwrap();
        let rep = pohozaev_report(&p, &plan).unwrap();
        let k = k_of(p.beta);
        assert!(((rep.q_kinetic - rep.q_l6) / rep.q_l6).abs() < 1e-10, "a={a}");
        assert!(((rep.q_l6 - k) / k).abs() < 1e-10, "a={a} {}", rep.q_l6);
        assert!(((rep.closed_form - k) / k).abs() < 1e-13);
        assert!(rep.printed_mismatch);
    }
    let p = derive_params(3, 0.0).unwrap();
    let plan = HankelPlan::new(&p, 40.0, 256).unwrap();
    let rep = pohozaev_report(&p, &plan).unwrap();
    // (3π/4)(2√π)^{2/3}
    assert!((rep.printed_form - 5.477_904_089_531_33).abs() < 1e-12, "{}", rep.printed_form);
    assert!((rep.q_l6 - 12.82100).abs() < 1e-5);
    let q = derive_params(3, -3.0 / 16.0).unwrap();
    let plan = HankelPlan::new(&q, 40.0, 256).unwrap();
    assert!((pohozaev_report(&q, &plan).unwrap().q_l6 - 3.205250).abs() < 1e-5);
}

#[test]
fn grid_quadrature_approaches_closed_form() {
    let p = derive_params(3, 0.0).unwrap();
    let plan = HankelPlan::new(&p, 40.0, 1024).unwrap();
    let rep = pohozaev_report(&p, &plan).unwrap();
    assert!(((rep.grid_l6 - K0) / K0).abs() < 1e-5, "{}", rep.grid_l6);
    assert!(((rep.grid_kinetic - K0) / K0).abs() < 1e-5, "{}", rep.grid_kinetic);
}

#[test]
fn scaling_covariance_of_functionals() {
    for &a in &[-3.0 / 16.0, 0.0, 0.75] {
        let p = derive_params(3, a).unwrap();
        for &lam in &[0.25f64, 3.0] {
            let (k, l) = radial_functionals(
                &p,
                |r| lam.sqrt() * ground_state_profile(&p, lam * r),
                |r| lam.powf(1.5) * ground_state_derivative(&p, lam * r),
            );
            let want = k_of(p.beta);
            assert!(((k - want) / want).abs() < 1e-6 && ((l - want) / want).abs() < 1e-6);
        }
    }
}

#[test]
fn invariant_vanishes_on_log_grid() {
    for &a in &[-0.21, -3.0 / 16.0, 0.0, 0.75] {
        let p = derive_params(3, a).unwrap();
        for i in 0..30 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 29.0);
            let v = first_order_invariant(&p, r).unwrap() / first_order_invariant_scale(&p, r);
            assert!(v.abs() < 1e-10, "a={a} r={r} v={v}");
        }
    }
    let p = derive_params(3, 0.0).unwrap();
    assert!(first_order_invariant(&p, 1.0).unwrap().abs() < 1e-10);
    let r = 1.0;
    let wrong = first_order_invariant_of(&p, r, 1.1 * ground_state_profile(&p, r), 1.1 * ground_state_derivative(&p, r));
    assert!(wrong.abs() > 1e-2);
    assert!(first_order_invariant(&p, 0.0).is_err());
}

#[test]
fn threshold_examples() {
    let t = thresholds(&derive_params(3, 0.0).unwrap());
    assert!((t.kinetic_threshold - 12.82100).abs() < 1e-5);
    assert!((t.energy_threshold - 4.27367).abs() < 1e-5);
    assert!(t.discrepancy < 1e-10);
    assert!(((t.energy_quadrature - t.energy_threshold) / t.energy_threshold).abs() < 1e-10);
    let u = thresholds(&derive_params(3, 0.5).unwrap());
    assert_eq!(u.kinetic_threshold, t.kinetic_threshold);
    let v = thresholds(&derive_params(3, -3.0 / 16.0).unwrap());
    assert!((v.kinetic_threshold - 3.205250).abs() < 1e-5);
    assert!((v.energy_threshold - 1.068417).abs() < 1e-6);
}

#[test]
fn residual_detects_wrong_amplitude_and_refines() {
    for &a in &[0.0, 0.75] {
        let p = derive_params(3, a).unwrap();
        let mut last = f64::INFINITY;
        for &n in &[128, 256, 512] {
            let plan = HankelPlan::new(&p, 60.0, n).unwrap();
            let ws = eval_ground_state(&p, plan.grid()).unwrap();
            let rep = pde_residual(&ws, &plan).unwrap();
            println!("a={a} N={n} interior={:.3e} full={:.3e} tail={:.3e}", rep.interior, rep.full, rep.boundary_tail);
            assert!(rep.interior < last);
            assert!(rep.tail_warning);
            last = rep.interior;
            let doubled = pde_residual(&ws.scaled(2.0), &plan).unwrap();
            // L(2W) − (2W)⁵ = −30W⁵, so the relative residual is 30/32.
            assert!((doubled.interior - 30.0 / 32.0).abs() < 10.0 * rep.interior + 1e-6);
        }
        assert!(last < 1e-4);
    }
}
