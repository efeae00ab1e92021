//! Emden–Fowler variables `ρ = log r`, `w = r^{(d−2)/2} u`.
//!
//! In these variables `‖u‖²_{Ḣ¹_a} = ω∫(w_ρ² + ν²w²) dρ` and
//! `∫|u|^{2d/(d−2)} = ω∫|w|^{2d/(d−2)} dρ`, so dilations become translations
//! and `W_a` decays exponentially in both directions. Fields are expanded in
//! the Dirichlet sine basis on `[−L, L]`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::ground_state::ground_state_profile;
use crate::hankel::{HankelPlan, RadialField};
use crate::operator::CouplingParams;

#[derive(Debug)]
pub struct LogRadialGrid {
    params: CouplingParams,
    half_width: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    sines: DenseMatrix,
}

impl LogRadialGrid {
    pub fn new(params: &CouplingParams, half_width: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidParameter(format!("log-radial grid needs n >= 16, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!("half width {half_width}")));
        }
        let m = (n + 1) as f64;
        let nodes = (1..=n).map(|j| -half_width + 2.0 * half_width * j as f64 / m).collect();
        let wavenumbers = (1..=n).map(|k| k as f64 * PI / (2.0 * half_width)).collect();
        let sines = DenseMatrix::from_fn(n, n, |j, k| (PI * ((j + 1) * (k + 1)) as f64 / m).sin());
        Ok(Self { params: *params, half_width, nodes, wavenumbers, sines })
    }

    /// Half width chosen so `W_a` has decayed by `e^{−18}` at `ρ = ±L`.
    pub fn for_ground_state(params: &CouplingParams, n: usize) -> Result<Self> {
        let rate = params.beta * params.half_dim();
        Self::new(params, 36.0 / rate, n)
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.len() + 1) as f64
    }

    /// Eigenvalues `κ_k² + ν²` of `−∂_ρ² + ν²`.
    pub fn symbol(&self) -> Vec<f64> {
        let nu2 = self.params.nu * self.params.nu;
        self.wavenumbers.iter().map(|k| k * k + nu2).collect()
    }

    pub fn analyze(&self, w: &[f64]) -> Vec<f64> {
        let s = 2.0 / (self.len() + 1) as f64;
        self.sines.apply_real(w).into_iter().map(|c| c * s).collect()
    }

    pub fn synthesize(&self, c: &[f64]) -> Vec<f64> {
        self.sines.apply_real(c)
    }

    /// Sine series at an arbitrary `ρ`; zero outside `[−L, L]`.
    pub fn evaluate(&self, c: &[f64], rho: f64) -> f64 {
        if rho <= -self.half_width || rho >= self.half_width {
            return 0.0;
        }
        let x = rho + self.half_width;
        c.iter().zip(&self.wavenumbers).map(|(ck, k)| ck * (k * x).sin()).sum()
    }
}

/// A real field in Emden–Fowler variables.
#[derive(Debug, Clone)]
pub struct LogRadialField {
    grid: Arc<LogRadialGrid>,
    pub values: Vec<f64>,
}

impl LogRadialField {
    pub fn new(grid: Arc<LogRadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<LogRadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&rho| f(rho)).collect();
        Self { grid, values }
    }

    /// `w(ρ) = r^{(d−2)/2} u(r)` from a radial profile `u`.
    pub fn from_radial(grid: Arc<LogRadialGrid>, u: impl Fn(f64) -> f64) -> Self {
        let h = grid.params.half_dim();
        Self::from_fn(grid, |rho| {
            let r = rho.exp();
            r.powf(h) * u(r)
        })
    }

    /// `W_a` dilated by `e^{shift}`: `w(ρ) = w_W(ρ + shift)`.
    pub fn ground_state(grid: Arc<LogRadialGrid>, shift: f64) -> Self {
        let p = grid.params;
        let h = p.half_dim();
        Self::from_fn(grid, |rho| {
            let r = (rho + shift).exp();
            r.powf(h) * ground_state_profile(&p, r)
        })
    }

    /// Samples the spectral interpolant of a Bessel-grid field.
    pub fn from_bessel(grid: Arc<LogRadialGrid>, plan: &HankelPlan, u: &RadialField) -> Result<Self> {
        let c = plan.analyze(u)?;
        let h = grid.params.half_dim();
        let radii: Vec<f64> = grid.nodes.iter().map(|rho| rho.exp()).collect();
        let vals = plan.evaluate(&c, &radii)?;
        let values = radii.iter().zip(vals).map(|(r, z)| r.powf(h) * z.re).collect();
        Ok(Self { grid, values })
    }

    /// Samples `u(r) = r^{−(d−2)/2} w(log r)` on the nodes of a Bessel plan.
    pub fn to_bessel(&self, plan: &HankelPlan) -> RadialField {
        let c = self.coefficients();
        let h = self.grid.params.half_dim();
        plan.field_from_fn(|r| r.powf(-h) * self.grid.evaluate(&c, r.ln()))
    }

    pub fn grid(&self) -> &Arc<LogRadialGrid> {
        &self.grid
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.grid.analyze(&self.values)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    /// `‖u‖²_{Ḣ¹_a} = ω L Σ (κ_k² + ν²) c_k²`.
    pub fn kinetic(&self) -> f64 {
        let c = self.coefficients();
        let omega = self.grid.params.omega();
        omega * self.grid.half_width * c.iter().zip(self.grid.symbol()).map(|(c, s)| s * c * c).sum::<f64>()
    }

    /// `∫|u|^p r^{d−1} dr · ω` with `p = 2d/(d−2)`, by the trapezoid rule in ρ.
    pub fn critical_integral(&self) -> f64 {
        let q = self.grid.params.critical_exponent();
        self.grid.params.omega() * self.grid.spacing() * self.values.iter().map(|w| w.abs().powf(q)).sum::<f64>()
    }

    /// `‖u‖_{L^{2d/(d−2)}} / ‖u‖_{Ḣ¹_a}`.
    pub fn quotient(&self) -> Result<f64> {
        let k = self.kinetic();
        if k == 0.0 {
            return Err(Error::ZeroField);
        }
        let q = self.grid.params.critical_exponent();
        Ok(self.critical_integral().powf(1.0 / q) / k.sqrt())
    }

    /// `⟨u, v⟩_{Ḣ¹_a}`.
    pub fn inner(&self, other: &Self) -> f64 {
        let a = self.coefficients();
        let b = other.coefficients();
        let omega = self.grid.params.omega();
        omega
            * self.grid.half_width
            * a.iter().zip(&b).zip(self.grid.symbol()).map(|((x, y), s)| s * x * y).sum::<f64>()
    }
}
