//! Grids, initial data and the random-data sweeps shared by experiments and
//! acceptance criteria.

use invsq_core::diagnostics::{local_smoothing_ratio, strichartz_ratio};
use invsq_core::ground_state::tapered_ground_state;
use invsq_core::operator::sobolev_equiv_ratio;
use invsq_core::{derive_params, CouplingParams, HankelPlan, RadialField, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{DataBlock, Profile};

pub struct Lab {
    pub params: CouplingParams,
    pub plan: HankelPlan,
}

impl Lab {
    pub fn new(d: u32, a: f64, radius: f64, n: usize) -> Result<Self> {
        let params = derive_params(d, a)?;
        let plan = HankelPlan::new(&params, radius, n)?;
        Ok(Self { params, plan })
    }

    /// `amp · r^{−σ} e^{−r²/w²}`, which stays in the span of the eigenbasis.
    pub fn bump(&self, amp: f64, width: f64) -> RadialField {
        let s = self.params.sigma;
        self.plan.field_from_fn(|r| amp * r.powf(-s) * (-r * r / (width * width)).exp())
    }

    pub fn ground_state(&self, amp: f64, taper_start: f64) -> RadialField {
        tapered_ground_state(&self.params, &self.plan, taper_start).scaled(amp)
    }

    pub fn data(&self, spec: &DataBlock) -> RadialField {
        match spec.profile {
            Profile::Bump => self.bump(spec.amplitude, spec.width),
            Profile::GroundState => self.ground_state(spec.amplitude, spec.taper_start),
        }
    }
}

/// `r^{−σ} Σ c_i e^{−r²/w_i²}` with random signs, weights and widths.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBumps {
    pub terms: Vec<(f64, f64)>,
}

impl RandomBumps {
    pub fn draw(rng: &mut ChaCha8Rng, widths: (f64, f64)) -> Self {
        let terms = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(widths.0..widths.1))).collect();
        Self { terms }
    }

    pub fn batch(seed: u64, count: usize, widths: (f64, f64)) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::draw(&mut rng, widths)).collect()
    }

    pub fn sample(&self, lab: &Lab) -> RadialField {
        let s = lab.params.sigma;
        lab.plan.field_from_fn(|r| {
            r.powf(-s) * self.terms.iter().map(|(c, w)| c * (-r * r / (w * w)).exp()).sum::<f64>()
        })
    }
}

/// Largest ratio of a sweep at two resolutions and their relative spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedConstant {
    pub coarse: f64,
    pub fine: f64,
}

impl FittedConstant {
    pub fn spread(&self) -> f64 {
        (self.fine - self.coarse).abs() / self.fine
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

pub fn strichartz_sweep(
    lab: &Lab,
    data: &[RandomBumps],
    q: f64,
    r: f64,
    horizon: f64,
) -> Result<Vec<f64>> {
    data.par_iter().map(|b| strichartz_ratio(&b.sample(lab), q, r, horizon, &lab.plan, &lab.params)).collect()
}

/// One ratio per (datum, radius) pair, datum-major.
pub fn smoothing_sweep(lab: &Lab, data: &[RandomBumps], radii: &[f64]) -> Result<Vec<f64>> {
    let jobs: Vec<(usize, f64)> = (0..data.len()).flat_map(|i| radii.iter().map(move |&r| (i, r))).collect();
    jobs.par_iter().map(|&(i, r)| local_smoothing_ratio(&data[i].sample(lab), r, &lab.plan, &lab.params)).collect()
}

/// Forward ratios `‖(−Δ)^{s/2}u‖_p / ‖L_a^{s/2}u‖_p`.
pub fn sobolev_sweep(lab: &Lab, free: &HankelPlan, data: &[RandomBumps], s: f64, p: f64) -> Result<Vec<f64>> {
    data.par_iter()
        .map(|b| Ok(sobolev_equiv_ratio(&lab.plan, free, &b.sample(lab), s, p, &lab.params)?.forward))
        .collect()
}

/// Runs `sweep` on `N/2` and `N` grids and fits the constant as the maximum.
pub fn fit_two_resolutions(
    d: u32,
    a: f64,
    radius: f64,
    n: usize,
    sweep: impl Fn(&Lab) -> Result<Vec<f64>>,
) -> Result<FittedConstant> {
    let coarse = Lab::new(d, a, radius, n / 2)?;
    let fine = Lab::new(d, a, radius, n)?;
    Ok(FittedConstant { coarse: max_of(&sweep(&coarse)?), fine: max_of(&sweep(&fine)?) })
}

/// Caps the global rayon pool at `INVSQ_NLS_THREADS` when set.
pub fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("INVSQ_NLS_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("INVSQ_NLS_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("INVSQ_NLS_THREADS must be at least 1".into());
    }
    // A second initialization (e.g. in tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
