use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::gamma_pos;

/// Dimension, coupling and the exponents derived from them.
///
/// `σ = (d−2)/2 − √((d−2)²/4 + a)`, `ν = √((d−2)²/4 + a)`, `β = 2ν/(d−2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub d: u32,
    pub a: f64,
    pub sigma: f64,
    pub beta: f64,
    pub nu: f64,
    pub evolution_admissible: bool,
}

pub fn derive_params(d: u32, a: f64) -> Result<CouplingParams> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("dimension {d} < 3")));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter(format!("coupling {a} is not finite")));
    }
    let half = (d as f64 - 2.0) / 2.0;
    let bound = -half * half;
    if a <= bound {
        return Err(Error::HardyViolation { a, bound });
    }
    let nu = (half * half + a).sqrt();
    Ok(CouplingParams {
        d,
        a,
        sigma: half - nu,
        beta: nu / half,
        nu,
        evolution_admissible: d == 3 && a > -0.25 + 0.04,
    })
}

impl CouplingParams {
    /// (d−2)/2, the exponent relating u to the Bessel variable.
    pub fn half_dim(&self) -> f64 {
        (self.d as f64 - 2.0) / 2.0
    }

    /// Surface area of the unit sphere S^{d−1}.
    pub fn omega(&self) -> f64 {
        let h = self.d as f64 / 2.0;
        2.0 * PI.powf(h) / gamma_pos(h)
    }

    /// Critical Sobolev exponent 2d/(d−2).
    pub fn critical_exponent(&self) -> f64 {
        2.0 * self.d as f64 / (self.d as f64 - 2.0)
    }

    /// Parameters for the coupling a ∧ 0.
    pub fn nonpositive_part(&self) -> CouplingParams {
        derive_params(self.d, self.a.min(0.0)).expect("a ∧ 0 satisfies the Hardy bound")
    }

    /// Lower end of the blowup window, −((d−2)/2)² + ((d−2)/(d+2))².
    pub fn blowup_window_bound(&self) -> f64 {
        let d = self.d as f64;
        let h = (d - 2.0) / 2.0;
        -h * h + ((d - 2.0) / (d + 2.0)).powi(2)
    }
}
