//! JSON scene schema. Every struct rejects unknown keys.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constitutive::ConstitutiveModel;
use crate::error::{Result, SimError};
use crate::ignition::SeedSpec;
use crate::mpm::ShrinkMode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub dimension: usize,
    pub domain: DomainConfig,
    pub dx: f64,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to `-9.8` along the up (last) axis.
    #[serde(default)]
    pub gravity: Option<Vec<f64>>,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub shrink: ShrinkSettings,
    pub ignition: IgnitionConfig,
    #[serde(default)]
    pub fluid: FluidConfig,
    #[serde(default)]
    pub smoke: SmokeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub geometry: Vec<ShapeConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub origin: Vec<f64>,
    /// Side lengths; each must be a whole number of cells.
    pub size: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// Burnt material; defaults to the intact values.
    pub burnt_youngs_modulus: Option<f64>,
    pub burnt_poisson_ratio: Option<f64>,
    pub friction_angle_deg: f64,
    pub rho_solid: f64,
    pub rho_air: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self {
            youngs_modulus: 1e3,
            poisson_ratio: 0.3,
            burnt_youngs_modulus: None,
            burnt_poisson_ratio: None,
            friction_angle_deg: 30.0,
            rho_solid: 1.0,
            rho_air: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalConfig {
    pub k_air: f64,
    pub k_solid: f64,
    pub cp_air: f64,
    pub cp_solid: f64,
    pub t_bar: f64,
    /// Cells whose centers fall inside a region are held at its temperature.
    pub fixed_regions: Vec<FixedRegion>,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            k_air: 0.01,
            k_solid: 0.1,
            cp_air: 1.0,
            cp_solid: 1.0,
            t_bar: 298.0,
            fixed_regions: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedRegion {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShrinkSettings {
    pub mode: ShrinkMode,
    pub c_shrink: f64,
    pub c_radial: f64,
    pub c_longitudinal: f64,
    pub axis_origin: Option<Vec<f64>>,
    pub axis_direction: Option<Vec<f64>>,
    pub t_evap: f64,
    pub t_max: f64,
}

impl Default for ShrinkSettings {
    fn default() -> Self {
        Self {
            mode: ShrinkMode::None,
            c_shrink: 1.0,
            c_radial: 1.0,
            c_longitudinal: 1.0,
            axis_origin: None,
            axis_direction: None,
            t_evap: 373.0,
            t_max: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IgnitionConfig {
    #[serde(default = "defaults::f0")]
    pub f0: f64,
    #[serde(default = "defaults::f_min")]
    pub f_min: f64,
    pub gamma: f64,
    pub beta: f64,
    #[serde(default = "defaults::t_ignition")]
    pub t_ignition: f64,
    pub t_max: f64,
    pub c_flame: f64,
    #[serde(default)]
    pub seeds: Vec<SeedSpec>,
}

/// Per-shape replacement of ignition constants.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IgnitionOverride {
    pub f0: Option<f64>,
    pub f_min: Option<f64>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub t_ignition: Option<f64>,
    pub t_max: Option<f64>,
    pub c_flame: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidConfig {
    /// Buoyancy coefficient.
    pub alpha: f64,
    pub alpha_flip: f64,
    pub rho_fluid: f64,
    /// Move smoke with the blended velocity instead of the previous one.
    pub move_with_blended_velocity: bool,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            alpha_flip: 0.99,
            rho_fluid: 1.0,
            move_with_blended_velocity: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmokeConfig {
    /// Particles emitted per burning particle per step.
    pub n_s: usize,
    pub mass: f64,
    pub max_age: Option<f64>,
}

impl Default for SmokeConfig {
    fn default() -> Self {
        Self {
            n_s: 0,
            mass: 1.0,
            max_age: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub cfl_number: f64,
    pub cg_tol_pressure: f64,
    pub cg_tol_diffusion: f64,
    pub max_iter: usize,
    pub max_dt: Option<f64>,
    /// Lower bound on the speed used in the CFL rule is `1e-3 · speed_scale`.
    pub speed_scale: f64,
    /// Also bound `dt` by the elastic wave crossing time.
    pub elastic_cfl: bool,
    /// Width in nodes of the slip band at the domain walls.
    pub wall_band: i32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl_number: 0.5,
            cg_tol_pressure: 1e-6,
            cg_tol_diffusion: 1e-8,
            max_iter: 5000,
            max_dt: None,
            speed_scale: 1.0,
            elastic_cfl: true,
            wall_band: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub frame_dt: f64,
    pub frame_count: u32,
    pub grid_temperature: bool,
    pub grid_velocity: bool,
    pub grid_labels: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            frame_dt: 1.0 / 24.0,
            frame_count: 100,
            grid_temperature: false,
            grid_velocity: false,
            grid_labels: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ShapeKind {
    Box {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    /// Solid cylinder from `base` along `axis` (its length is the height).
    Cylinder {
        base: Vec<f64>,
        axis: Vec<f64>,
        radius: f64,
    },
    /// CSV of particle positions, one per row; relative paths resolve
    /// against the scene file.
    Points {
        file: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub shape: ShapeKind,
    /// Particles per cell; 4 in 2D and 8 in 3D by default.
    #[serde(default)]
    pub ppc: Option<usize>,
    #[serde(default = "defaults::yes")]
    pub jitter: bool,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub velocity: Option<Vec<f64>>,
    #[serde(default = "defaults::yes")]
    pub combustible: bool,
    #[serde(default)]
    pub model: Option<ConstitutiveModel>,
    #[serde(default)]
    pub ignition: Option<IgnitionOverride>,
    /// Initial fuel `1 + r/R` clamped to `[1, 2]`, `r` measured from the
    /// cylinder axis or sphere center.
    #[serde(default)]
    pub radial_fuel: bool,
}

mod defaults {
    pub fn f0() -> f64 {
        1.0
    }
    pub fn f_min() -> f64 {
        0.3
    }
    pub fn t_ignition() -> f64 {
        600.0
    }
    pub fn yes() -> bool {
        true
    }
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            SimError::config(
                "scene",
                format!("{e}"),
            )
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Stable JSON form, used to match checkpoints with scenes.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scene config serializes")
    }
}
