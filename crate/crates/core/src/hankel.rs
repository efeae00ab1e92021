//! Bessel-zero grids and the order-ν discrete Hankel transform.
//!
//! A radial function u on [0, R] with a Dirichlet wall at R is expanded as
//! `u(r) = Σ c_k φ_k(r)` with
//!
//! ```text
//! φ_k(r) = r^{-(d-2)/2} · √2 / (R |J_{ν+1}(j_k)|) · J_ν(j_k r / R),
//! ```
//!
//! orthonormal in `L²(r^{d−1} dr)` and eigenfunctions of the radial part of
//! `L_a` with eigenvalue `(j_k/R)²`. Collocation happens at
//! `r_k = j_k R / j_{N+1}`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::operator::CouplingParams;
use crate::special::{bessel_zeros, gamma_pos, jv, BesselOrder};

pub struct RadialGrid {
    d: u32,
    nu: f64,
    radius: f64,
    zeros: Vec<f64>,
    wall_zero: f64,
    next_order_abs: Vec<f64>,
    nodes: Vec<f64>,
    spectral_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("d", &self.d)
            .field("nu", &self.nu)
            .field("radius", &self.radius)
            .field("n", &self.nodes.len())
            .finish()
    }
}

/// Grid of order ν taken from `params`.
pub fn make_grid(params: &CouplingParams, radius: f64, n: usize) -> Result<RadialGrid> {
    RadialGrid::new(params.d, params.nu, radius, n)
}

impl RadialGrid {
    pub fn new(d: u32, nu: f64, radius: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidParameter(format!("N = {n} < 16")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("R = {radius} must be positive")));
        }
        if d < 3 {
            return Err(Error::InvalidParameter(format!("dimension {d} < 3")));
        }
        let mut zeros = bessel_zeros(BesselOrder::new(nu)?, n + 1)?;
        let wall_zero = zeros.pop().expect("n + 1 zeros");
        let next_order_abs: Vec<f64> = zeros.iter().map(|&j| jv(nu + 1.0, j).abs()).collect();
        let nodes: Vec<f64> = zeros.iter().map(|&j| j * radius / wall_zero).collect();
        let spectral_nodes = zeros.iter().map(|&j| j / radius).collect();
        let p = d as f64 - 2.0;
        let quad_weights = nodes
            .iter()
            .zip(&next_order_abs)
            .map(|(&r, &b)| 2.0 * radius * radius / (wall_zero * wall_zero * b * b) * r.powf(p))
            .collect();
        Ok(Self {
            d,
            nu,
            radius,
            zeros,
            wall_zero,
            next_order_abs,
            nodes,
            spectral_nodes,
            quad_weights,
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn radius(&self) -> f64 {
        self.radius
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

    pub fn spectral_nodes(&self) -> &[f64] {
        &self.spectral_nodes
    }

    /// Weights for `∫₀^R f(r) r^{d−1} dr ≈ Σ w_k f(r_k)`.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// Dirichlet eigenvalues λ_k = (j_k/R)².
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectral_nodes.iter().map(|r| r * r).collect()
    }

    fn half_dim(&self) -> f64 {
        (self.d as f64 - 2.0) / 2.0
    }

    fn normalization(&self, k: usize) -> f64 {
        std::f64::consts::SQRT_2 / (self.radius * self.next_order_abs[k])
    }

    /// φ_k(r).
    pub fn basis(&self, k: usize, r: f64) -> f64 {
        let alpha = self.zeros[k] / self.radius;
        self.normalization(k) * r.powf(-self.half_dim()) * jv(self.nu, alpha * r)
    }

    /// φ_k′(r).
    pub fn basis_derivative(&self, k: usize, r: f64) -> f64 {
        let alpha = self.zeros[k] / self.radius;
        let x = alpha * r;
        let p = self.half_dim();
        let j = jv(self.nu, x);
        let jp = self.nu / x * j - jv(self.nu + 1.0, x);
        self.normalization(k) * (-p * r.powf(-p - 1.0) * j + r.powf(-p) * alpha * jp)
    }

    /// Same order, radius, size and dimension.
    pub fn same_layout(&self, other: &RadialGrid) -> bool {
        self.d == other.d
            && self.nu.to_bits() == other.nu.to_bits()
            && self.radius.to_bits() == other.radius.to_bits()
            && self.len() == other.len()
    }
}

/// Complex samples u(r_k) on a grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
}

/// Coefficients c_k in the orthonormal eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<RadialGrid>,
    pub coeffs: Vec<Complex64>,
}

fn same_grid(a: &Arc<RadialGrid>, b: &Arc<RadialGrid>) -> bool {
    Arc::ptr_eq(a, b) || a.same_layout(b)
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| Complex64::new(f(r), 0.0)).collect();
        Self { grid, values }
    }

    pub fn from_complex_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `∫₀^R |u|² r^{d−1} dr` by the grid quadrature.
    pub fn radial_l2_squared(&self) -> f64 {
        self.values.iter().zip(self.grid.quad_weights()).map(|(z, w)| w * z.norm_sqr()).sum()
    }
}

impl SpectralField {
    pub fn new(grid: Arc<RadialGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a grid of {} nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Σ λ_k |c_k|².
    pub fn energy_sum(&self) -> f64 {
        self.coeffs.iter().zip(self.grid.spectral_nodes()).map(|(c, s)| s * s * c.norm_sqr()).sum()
    }

    pub fn map_with_eigenvalue(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.spectral_nodes())
            .map(|(&c, &s)| f(s * s, c))
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }
}

/// `Σ w_k s_k r_k^{e−(d−1)} ≈ ∫₀^R f r^e dr`.
pub fn quad_integrate(grid: &RadialGrid, samples: &[Complex64], weight_exponent: i32) -> Complex64 {
    assert_eq!(samples.len(), grid.len());
    let shift = weight_exponent - (grid.d as i32 - 1);
    grid.nodes
        .iter()
        .zip(&grid.quad_weights)
        .zip(samples)
        .map(|((&r, &w), &s)| s * (w * r.powi(shift)))
        .sum()
}

/// Precomputed dense transform matrices for one grid.
pub struct HankelPlan {
    grid: Arc<RadialGrid>,
    synthesis: DenseMatrix,
    analysis: DenseMatrix,
    derivative: OnceLock<DenseMatrix>,
    validation: [f64; 3],
}

impl fmt::Debug for HankelPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HankelPlan").field("grid", &self.grid).finish()
    }
}

impl HankelPlan {
    pub fn new(params: &CouplingParams, radius: f64, n: usize) -> Result<Self> {
        Self::from_grid(make_grid(params, radius, n)?)
    }

    pub fn from_grid(grid: RadialGrid) -> Result<Self> {
        let n = grid.len();
        let nu = grid.nu;
        let p = grid.half_dim();
        let jw = grid.wall_zero;
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for k in i..n {
                let v = jv(nu, grid.zeros[i] * grid.zeros[k] / jw);
                kernel[i * n + k] = v;
                kernel[k * n + i] = v;
            }
        }
        let b = &grid.next_order_abs;
        let synthesis = DenseMatrix::from_fn(n, n, |i, k| {
            grid.nodes[i].powf(-p) * grid.normalization(k) * kernel[i * n + k]
        });
        let symmetric =
            DenseMatrix::from_fn(n, n, |i, k| 2.0 * kernel[i * n + k] / (jw * b[i] * b[k]));
        drop(kernel);
        let inv = symmetric
            .inverse()
            .ok_or_else(|| Error::Convergence("singular Hankel matrix".into()))?;
        let sqrt2r = std::f64::consts::SQRT_2 * grid.radius;
        let analysis = DenseMatrix::from_fn(n, n, |k, j| {
            inv.get(k, j) * sqrt2r / (jw * b[j]) * grid.nodes[j].powf(p)
        });
        let mut plan = Self {
            grid: Arc::new(grid),
            synthesis,
            analysis,
            derivative: OnceLock::new(),
            validation: [0.0; 3],
        };
        plan.validation = plan.validate();
        Ok(plan)
    }

    /// Relative errors of `∫ r^{−2σ+2m} e^{−r²/ℓ²} r^{d−1} dr`, m = 0, 1, 2, with ℓ = R/8.
    fn validate(&self) -> [f64; 3] {
        let g = &self.grid;
        let ell = g.radius / 8.0;
        let sigma = g.half_dim() - g.nu;
        let mut out = [0.0; 3];
        for (m, slot) in out.iter_mut().enumerate() {
            let samples: Vec<Complex64> = g
                .nodes
                .iter()
                .map(|&r| {
                    let s = r / ell;
                    Complex64::new(r.powf(-2.0 * sigma) * s.powi(2 * m as i32) * (-s * s).exp(), 0.0)
                })
                .collect();
            let got = quad_integrate(g, &samples, g.d as i32 - 1).re;
            let want = 0.5 * ell.powf(2.0 * g.nu + 2.0) * gamma_pos(g.nu + 1.0 + m as f64);
            *slot = ((got - want) / want).abs();
        }
        out
    }

    /// Relative quadrature errors recorded at construction.
    pub fn quadrature_validation(&self) -> [f64; 3] {
        self.validation
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn synthesis_matrix(&self) -> &DenseMatrix {
        &self.synthesis
    }

    pub fn analysis_matrix(&self) -> &DenseMatrix {
        &self.analysis
    }

    /// Spectral-to-physical matrix of ∂_r: entries φ_k′(r_j).
    pub fn derivative_matrix(&self) -> &DenseMatrix {
        self.derivative.get_or_init(|| {
            let g = &self.grid;
            let n = g.len();
            DenseMatrix::from_fn(n, n, |j, k| g.basis_derivative(k, g.nodes[j]))
        })
    }

    fn check(&self, grid: &Arc<RadialGrid>) -> Result<()> {
        if same_grid(&self.grid, grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn analyze(&self, u: &RadialField) -> Result<SpectralField> {
        self.check(&u.grid)?;
        Ok(SpectralField { grid: self.grid.clone(), coeffs: self.analysis.apply(&u.values) })
    }

    pub fn synthesize(&self, c: &SpectralField) -> Result<RadialField> {
        self.check(&c.grid)?;
        Ok(RadialField { grid: self.grid.clone(), values: self.synthesis.apply(&c.coeffs) })
    }

    pub fn analyze_values(&self, values: &[Complex64], out: &mut [Complex64]) {
        self.analysis.apply_into(values, out);
    }

    pub fn synthesize_values(&self, coeffs: &[Complex64], out: &mut [Complex64]) {
        self.synthesis.apply_into(coeffs, out);
    }

    pub fn spectral_field(&self, coeffs: Vec<Complex64>) -> Result<SpectralField> {
        SpectralField::new(self.grid.clone(), coeffs)
    }

    pub fn field(&self, values: Vec<Complex64>) -> Result<RadialField> {
        RadialField::new(self.grid.clone(), values)
    }

    pub fn field_from_fn(&self, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField::from_fn(self.grid.clone(), f)
    }

    /// ∂_r u at the nodes, by differentiating the eigen-expansion.
    pub fn radial_derivative(&self, u: &RadialField) -> Result<RadialField> {
        let c = self.analyze(u)?;
        self.derivative_of_spectral(&c)
    }

    pub fn derivative_of_spectral(&self, c: &SpectralField) -> Result<RadialField> {
        self.check(&c.grid)?;
        Ok(RadialField {
            grid: self.grid.clone(),
            values: self.derivative_matrix().apply(&c.coeffs),
        })
    }

    /// Σ c_k φ_k(r) at arbitrary radii.
    pub fn evaluate(&self, c: &SpectralField, radii: &[f64]) -> Result<Vec<Complex64>> {
        self.check(&c.grid)?;
        let g = &self.grid;
        Ok(radii
            .iter()
            .map(|&r| {
                if r >= g.radius {
                    return Complex64::new(0.0, 0.0);
                }
                c.coeffs.iter().enumerate().map(|(k, &ck)| ck * g.basis(k, r)).sum()
            })
            .collect())
    }

    /// Apply a diagonal multiplier m(λ_k) in spectral space.
    pub fn apply_diagonal(
        &self,
        u: &RadialField,
        m: impl Fn(f64) -> Complex64,
    ) -> Result<RadialField> {
        let c = self.analyze(u)?;
        self.synthesize(&c.map_with_eigenvalue(|lam, z| z * m(lam)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::derive_params;
    use std::f64::consts::PI;

    fn plan(d: u32, a: f64, r: f64, n: usize) -> HankelPlan {
        HankelPlan::new(&derive_params(d, a).unwrap(), r, n).unwrap()
    }

    #[test]
    fn free_grid_nodes_are_uniform() {
        let g = make_grid(&derive_params(3, 0.0).unwrap(), 10.0, 64).unwrap();
        for (k, &r) in g.nodes().iter().enumerate() {
            assert!((r - 10.0 * (k + 1) as f64 / 65.0).abs() < 1e-12);
        }
        assert!(*g.nodes().last().unwrap() < 10.0);
        assert!(g.quad_weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        let p = derive_params(3, 0.0).unwrap();
        assert!(make_grid(&p, 10.0, 15).is_err());
        assert!(make_grid(&p, 0.0, 64).is_err());
        assert!(make_grid(&p, -1.0, 64).is_err());
    }

    #[test]
    fn gaussian_moment() {
        let g = make_grid(&derive_params(3, 0.0).unwrap(), 10.0, 256).unwrap();
        let s: Vec<Complex64> =
            g.nodes().iter().map(|&r| Complex64::new((-r * r).exp(), 0.0)).collect();
        let v = quad_integrate(&g, &s, 2).re;
        assert!((v - PI.sqrt() / 4.0).abs() < 1e-10);
    }

    // On the ν = 1/2 grid the rule is the uniform trapezoid rule with the
    // endpoint samples r = 0 and r = R omitted, so Euler–Maclaurin gives the
    // exact discrete value for integrands that do not vanish at the ends.
    #[test]
    fn open_trapezoid_identity_for_non_vanishing_integrands() {
        let big_r = 3.0;
        let g = make_grid(&derive_params(3, 0.0).unwrap(), big_r, 1024).unwrap();
        let h = big_r / 1025.0;
        let ones = vec![Complex64::new(1.0, 0.0); g.len()];
        let v = quad_integrate(&g, &ones, 2).re;
        let em = big_r.powi(3) / 3.0 - h / 2.0 * big_r * big_r + h * h / 12.0 * 2.0 * big_r;
        assert!(((v - em) / em).abs() < 1e-12, "{v} vs {em}");

        let g = make_grid(&derive_params(3, 0.0).unwrap(), 10.0, 256).unwrap();
        let h = 10.0 / 257.0;
        let s: Vec<Complex64> =
            g.nodes().iter().map(|&r| Complex64::new((-r * r).exp(), 0.0)).collect();
        let v0 = quad_integrate(&g, &s, 0).re;
        assert!((v0 + h / 2.0 - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn construction_validation_is_tight() {
        for &a in &[-0.21, -3.0 / 16.0, 0.0, 0.75] {
            let pl = plan(3, a, 20.0, 128);
            for e in pl.quadrature_validation() {
                assert!(e < 1e-10, "a={a} err={e}");
            }
        }
    }

    #[test]
    fn analysis_inverts_synthesis() {
        for &a in &[-0.16, 0.0, 0.75] {
            let pl = plan(3, a, 10.0, 64);
            let defect = pl.analysis_matrix().identity_defect(pl.synthesis_matrix());
            assert!(defect < 1e-10, "a={a} defect={defect}");
        }
    }

    #[test]
    fn basis_function_derivative() {
        let pl = plan(3, -3.0 / 16.0, 12.0, 48);
        let g = pl.grid().clone();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); g.len()];
        coeffs[0] = Complex64::new(1.0, 0.0);
        let c = pl.spectral_field(coeffs).unwrap();
        let du = pl.derivative_of_spectral(&c).unwrap();
        for (j, &r) in g.nodes().iter().enumerate() {
            let h = 1e-5 * r;
            let fd = (g.basis(0, r + h) - g.basis(0, r - h)) / (2.0 * h);
            let scale = g.basis_derivative(0, r).abs().max(1.0);
            assert!((du.values[j].re - fd).abs() < 1e-8 * scale, "r={r}");
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = plan(3, 0.0, 10.0, 32);
        let b = plan(3, 0.0, 11.0, 32);
        let u = b.field_from_fn(|r| (-r * r).exp());
        assert_eq!(a.analyze(&u).unwrap_err(), Error::GridMismatch);
    }
}
