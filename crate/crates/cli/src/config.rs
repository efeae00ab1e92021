//! Experiment configuration files.
//!
//! Configs are JSON objects; every block is optional and unknown keys are
//! rejected. Defaults:
//!
//! | key | default |
//! |-----|---------|
//! | `params.d`, `params.a`, `params.mu` | 3, 0, +1 |
//! | `grid.R`, `grid.N` | 40, 512 |
//! | `evolution.*` | as in [`EvolutionConfig::default`] |
//! | `data.profile`, `amplitude`, `width`, `taper_start` | `bump`, 1, 1, 0.5 |
//! | `options.virial_radius` | 8 |
//! | `options.trap_constant` | 1 |
//! | `options.shift` | 20 |
//! | `options.samples` | 20 |
//! | `options.q`, `options.r`, `options.horizon` | 10/3, 10/3, 4 |
//! | `options.smoothing_radii` | [1, 2, 4, 8] |
//! | `options.sobolev_s`, `options.sobolev_p` | 1, 2 |
//! | `options.picard_time`, `options.picard_iterations` | 0.05, 12 |
//! | `options.heat_time` | 0.5 |
//! | `options.log_points` | 512 |
//! | `options.criteria` | all |
//! | `output` | `results` |
//! | `seed` | 0 |

use std::fmt;
use std::path::PathBuf;

use invsq_core::evolution::EvolutionConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GroundState,
    SharpConstant,
    ShiftedBubble,
    Evolve,
    Virial,
    Blowup,
    Scattering,
    HeatCheck,
    Strichartz,
    LocalSmoothing,
    SobolevEquiv,
    PicardCrosscheck,
    AcceptanceSuite,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Self::GroundState,
        Self::SharpConstant,
        Self::ShiftedBubble,
        Self::Evolve,
        Self::Virial,
        Self::Blowup,
        Self::Scattering,
        Self::HeatCheck,
        Self::Strichartz,
        Self::LocalSmoothing,
        Self::SobolevEquiv,
        Self::PicardCrosscheck,
        Self::AcceptanceSuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::GroundState => "ground-state",
            Self::SharpConstant => "sharp-constant",
            Self::ShiftedBubble => "shifted-bubble",
            Self::Evolve => "evolve",
            Self::Virial => "virial",
            Self::Blowup => "blowup",
            Self::Scattering => "scattering",
            Self::HeatCheck => "heat-check",
            Self::Strichartz => "strichartz",
            Self::LocalSmoothing => "local-smoothing",
            Self::SobolevEquiv => "sobolev-equiv",
            Self::PicardCrosscheck => "picard-crosscheck",
            Self::AcceptanceSuite => "acceptance-suite",
        }
    }

    pub fn summary(&self) -> &'static str {
        match self {
            Self::GroundState => "W_a on the grid: PDE residual, Pohozaev integrals, first-order invariant",
            Self::SharpConstant => "maximize the Sobolev quotient and compare with K(a)^(-1/3)",
            Self::ShiftedBubble => "quotient of the translated free bubble for a > 0",
            Self::Evolve => "adaptive Strang evolution with the full diagnostics series",
            Self::Virial => "virial identity: formula vs differences, sign and trap checks",
            Self::Blowup => "focusing evolution until the gradient-norm monitor fires",
            Self::Scattering => "defocusing evolution and dyadic scattering-state extraction",
            Self::HeatCheck => "heat semigroup, closed-form kernel and envelope constants",
            Self::Strichartz => "Strichartz ratios over random data at two resolutions",
            Self::LocalSmoothing => "local-smoothing ratios over random data and radii at two resolutions",
            Self::SobolevEquiv => "L_a vs free Sobolev norms over random data at two resolutions",
            Self::PicardCrosscheck => "Picard iteration of the Duhamel formula vs the Strang integrator",
            Self::AcceptanceSuite => "every acceptance criterion with an aggregated verdict",
        }
    }

    /// Experiments that integrate the NLS and therefore need an admissible coupling.
    pub fn evolves(&self) -> bool {
        matches!(self, Self::Evolve | Self::Virial | Self::Blowup | Self::Scattering | Self::PicardCrosscheck)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsBlock {
    pub d: u32,
    pub a: f64,
    pub mu: f64,
}

impl Default for ParamsBlock {
    fn default() -> Self {
        Self { d: 3, a: 0.0, mu: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { radius: 40.0, n: 512 }
    }
}

/// [`EvolutionConfig`] without `mu`, which lives in the params block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionBlock {
    pub t_end: f64,
    pub dt_init: f64,
    pub local_error_tol: f64,
    pub blowup_factor: f64,
    pub wall_guard: f64,
    pub wall_fraction: f64,
    pub sample_every: usize,
    pub sample_interval: Option<f64>,
    pub max_steps: usize,
    pub override_admissibility: bool,
}

impl Default for EvolutionBlock {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        Self {
            t_end: e.t_end,
            dt_init: e.dt_init,
            local_error_tol: e.local_error_tol,
            blowup_factor: e.blowup_factor,
            wall_guard: e.wall_guard,
            wall_fraction: e.wall_fraction,
            sample_every: e.sample_every,
            sample_interval: e.sample_interval,
            max_steps: e.max_steps,
            override_admissibility: e.override_admissibility,
        }
    }
}

impl EvolutionBlock {
    pub fn to_config(&self, mu: f64) -> EvolutionConfig {
        EvolutionConfig {
            mu,
            t_end: self.t_end,
            dt_init: self.dt_init,
            local_error_tol: self.local_error_tol,
            blowup_factor: self.blowup_factor,
            wall_guard: self.wall_guard,
            wall_fraction: self.wall_fraction,
            sample_every: self.sample_every,
            sample_interval: self.sample_interval,
            max_steps: self.max_steps,
            override_admissibility: self.override_admissibility,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `A r^{−σ} e^{−r²/w²}`
    Bump,
    /// `A W_a` tapered to zero between `taper_start·R` and `0.95R`.
    GroundState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataBlock {
    pub profile: Profile,
    pub amplitude: f64,
    pub width: f64,
    pub taper_start: f64,
}

impl Default for DataBlock {
    fn default() -> Self {
        Self { profile: Profile::Bump, amplitude: 1.0, width: 1.0, taper_start: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsBlock {
    pub virial_radius: f64,
    pub trap_constant: f64,
    pub shift: f64,
    pub samples: usize,
    pub q: f64,
    pub r: f64,
    pub horizon: f64,
    pub smoothing_radii: Vec<f64>,
    pub sobolev_s: f64,
    pub sobolev_p: f64,
    pub picard_time: f64,
    pub picard_iterations: usize,
    pub heat_time: f64,
    pub log_points: usize,
    pub criteria: Option<Vec<u32>>,
}

impl Default for OptionsBlock {
    fn default() -> Self {
        Self {
            virial_radius: 8.0,
            trap_constant: 1.0,
            shift: 20.0,
            samples: 20,
            q: 10.0 / 3.0,
            r: 10.0 / 3.0,
            horizon: 4.0,
            smoothing_radii: vec![1.0, 2.0, 4.0, 8.0],
            sobolev_s: 1.0,
            sobolev_p: 2.0,
            picard_time: 0.05,
            picard_iterations: 12,
            heat_time: 0.5,
            log_points: 512,
            criteria: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub params: ParamsBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub evolution: EvolutionBlock,
    #[serde(default)]
    pub data: DataBlock,
    #[serde(default)]
    pub options: OptionsBlock,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending field and position.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, why: String| Err(ConfigError(format!("invalid `{field}`: {why}")));
        if ![-1.0, 0.0, 1.0].contains(&self.params.mu) {
            return bad("params.mu", format!("must be -1, 0 or 1, got {}", self.params.mu));
        }
        if let Err(e) = invsq_core::derive_params(self.params.d, self.params.a) {
            return bad("params", e.to_string());
        }
        if !(self.grid.radius > 0.0) || !self.grid.radius.is_finite() {
            return bad("grid.R", format!("must be positive, got {}", self.grid.radius));
        }
        if self.grid.n < 8 {
            return bad("grid.N", format!("must be at least 8, got {}", self.grid.n));
        }
        if let Err(e) = self.evolution.to_config(self.params.mu).validate() {
            return bad("evolution", e.to_string());
        }
        if !(self.data.width > 0.0) || !self.data.amplitude.is_finite() {
            return bad("data", "width must be positive and amplitude finite".into());
        }
        if !(self.data.taper_start > 0.0 && self.data.taper_start < 0.95) {
            return bad("data.taper_start", format!("must lie in (0, 0.95), got {}", self.data.taper_start));
        }
        let o = &self.options;
        if !(o.virial_radius > 0.0) {
            return bad("options.virial_radius", format!("must be positive, got {}", o.virial_radius));
        }
        if !(o.trap_constant > 0.0) {
            return bad("options.trap_constant", format!("must be positive, got {}", o.trap_constant));
        }
        if o.samples == 0 {
            return bad("options.samples", "must be at least 1".into());
        }
        if !(o.horizon > 0.0) || !(o.picard_time > 0.0) || !(o.heat_time > 0.0) {
            return bad("options", "horizon, picard_time and heat_time must be positive".into());
        }
        if o.smoothing_radii.is_empty() || o.smoothing_radii.iter().any(|r| !(*r > 0.0)) {
            return bad("options.smoothing_radii", "must be a non-empty list of positive radii".into());
        }
        if let Some(ids) = &o.criteria {
            if let Some(bad_id) = ids.iter().find(|i| !(1..=12).contains(*i)) {
                return bad("options.criteria", format!("unknown criterion {bad_id}"));
            }
        }
        Ok(())
    }
}
