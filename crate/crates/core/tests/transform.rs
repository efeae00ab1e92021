use std::f64::consts::PI;

use invsq_core::special::{bessel_j, BesselOrder};
use invsq_core::{derive_params, HankelPlan, RadialField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn plan_for_nu(nu: f64, r: f64, n: usize) -> HankelPlan {
    let a = nu * nu - 0.25;
    HankelPlan::new(&derive_params(3, a).unwrap(), r, n).unwrap()
}

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn round_trip_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &nu in &[0.3, 0.5, 1.0] {
        let plan = plan_for_nu(nu, 15.0, 256);
        let coeffs: Vec<Complex64> =
            (0..256).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let c = plan.spectral_field(coeffs.clone()).unwrap();
        let back = plan.analyze(&plan.synthesize(&c).unwrap()).unwrap();
        assert!(max_rel(&back.coeffs, &coeffs) < 1e-10, "nu={nu}");

        let u = plan.field_from_fn(|r| (-(r - 4.0).powi(2)).exp() * (1.0 + 0.3 * r));
        let again = plan.synthesize(&plan.analyze(&u).unwrap()).unwrap();
        assert!(max_rel(&again.values, &u.values) < 1e-10, "nu={nu}");
    }
}

#[test]
fn zero_field_has_zero_coefficients() {
    let plan = plan_for_nu(0.3, 10.0, 64);
    let z = RadialField::zeros(plan.grid().clone());
    assert!(plan.analyze(&z).unwrap().coeffs.iter().all(|c| c.norm() == 0.0));
    assert!(plan.radial_derivative(&z).unwrap().values.iter().all(|c| c.norm() == 0.0));
}

#[test]
fn gaussian_is_its_own_radial_fourier_transform() {
    let plan = plan_for_nu(0.5, 20.0, 512);
    let grid = plan.grid().clone();
    let u = plan.field_from_fn(|r| (-0.5 * r * r).exp());
    let c = plan.analyze(&u).unwrap();
    let order = BesselOrder::new(1.5).unwrap();
    let wall = 20.0;
    let mut worst: f64 = 0.0;
    for (k, &rho) in grid.spectral_nodes().iter().enumerate() {
        let jk = rho * wall;
        let norm = wall * bessel_j(order, jk).unwrap().abs() / 2f64.sqrt();
        let profile = c.coeffs[k].re * norm * rho.powf(-0.5);
        worst = worst.max((profile - (-0.5 * rho * rho).exp()).abs());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn parseval_on_random_bandlimited_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &nu in &[0.3, 0.5, 1.0, 1.7] {
        let plan = plan_for_nu(nu, 12.0, 256);
        for _ in 0..5 {
            let coeffs: Vec<Complex64> = (0..256)
                .map(|k| {
                    if k < 128 {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let c = plan.spectral_field(coeffs).unwrap();
            let u = plan.synthesize(&c).unwrap();
            let physical = u.radial_l2_squared();
            let spectral = c.norm_squared();
            assert!(((physical - spectral) / spectral).abs() < 1e-9, "nu={nu}");
        }
    }
}

fn shifted_gaussian(r: f64, c: f64, w: f64) -> (f64, f64, f64) {
    let x = (r - c) / w;
    let g = (-x * x).exp();
    let g1 = -2.0 * x / w * g;
    let g2 = (4.0 * x * x - 2.0) / (w * w) * g;
    (g, g1, g2)
}

#[test]
fn transform_diagonalizes_the_operator() {
    for &a in &[-0.21, -3.0 / 16.0, 0.0, 0.75] {
        let params = derive_params(3, a).unwrap();
        let plan = HankelPlan::new(&params, 30.0, 384).unwrap();
        let u = plan.field_from_fn(|r| shifted_gaussian(r, 8.0, 1.5).0);
        let lu = plan.field_from_fn(|r| {
            let (g, g1, g2) = shifted_gaussian(r, 8.0, 1.5);
            -g2 - 2.0 / r * g1 + a / (r * r) * g
        });
        let c = plan.analyze(&u).unwrap();
        let lc = plan.analyze(&lu).unwrap();
        let expected: Vec<Complex64> =
            c.coeffs.iter().zip(plan.grid().eigenvalues()).map(|(z, l)| z * l).collect();
        let err = max_rel(&lc.coeffs, &expected);
        assert!(err < 1e-6, "a={a} err={err}");
    }
}

#[test]
fn halving_resolution_leaves_coefficients_unchanged() {
    for &nu in &[0.3, 0.5, 1.0] {
        let fine = plan_for_nu(nu, 20.0, 256);
        let coarse = plan_for_nu(nu, 20.0, 128);
        let f = |r: f64| (-(r - 5.0).powi(2) / 2.0).exp();
        let cf = fine.analyze(&fine.field_from_fn(f)).unwrap();
        let cc = coarse.analyze(&coarse.field_from_fn(f)).unwrap();
        let diff = cc.coeffs.iter().zip(&cf.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "nu={nu} diff={diff}");
    }
}

#[test]
fn gaussian_derivative() {
    let plan = plan_for_nu(0.5, 20.0, 512);
    let u = plan.field_from_fn(|r| (-0.5 * r * r).exp());
    let du = plan.radial_derivative(&u).unwrap();
    for (r, z) in plan.grid().nodes().iter().zip(&du.values) {
        if *r < 15.0 {
            assert!((z.re + r * (-0.5 * r * r).exp()).abs() < 1e-6, "r={r}");
        }
    }
}

#[test]
fn derivative_of_singular_profile_for_negative_coupling() {
    let params = derive_params(3, -3.0 / 16.0).unwrap();
    let plan = HankelPlan::new(&params, 20.0, 384).unwrap();
    // r^{-σ} e^{-r²} lies in the span's natural class: its derivative is analytic.
    let s = params.sigma;
    let u = plan.field_from_fn(|r| r.powf(-s) * (-r * r).exp());
    let du = plan.radial_derivative(&u).unwrap();
    for (r, z) in plan.grid().nodes().iter().zip(&du.values) {
        let exact = (-s / r - 2.0 * r) * r.powf(-s) * (-r * r).exp();
        assert!((z.re - exact).abs() < 1e-6 * (1.0 + exact.abs()), "r={r}");
    }
}

#[test]
fn gaussian_mass() {
    let plan = plan_for_nu(0.5, 20.0, 256);
    let u = plan.field_from_fn(|r| (-0.5 * r * r).exp());
    let mass = 4.0 * PI * u.radial_l2_squared();
    assert!((mass - PI.powf(1.5)).abs() < 1e-8);
}
