//! Validated runtime parameters derived from a [`SceneConfig`].

use super::config::SceneConfig;
use crate::constitutive::{ElasticParams, MaterialModels, PlasticParams};
use crate::error::{Result, SimError};
use crate::fluid::ProjectionSettings;
use crate::grid::{DenseField, GridDescriptor};
use crate::ignition::IgnitionParams;
use crate::linalg::Vector;
use crate::mpm::{ShrinkConfig, ShrinkMode, WallBoundary};
use crate::scalar::Real;
use crate::solver::CgSettings;
use crate::thermal::ThermalConstants;

#[derive(Clone, Debug)]
pub struct SceneParams<T: Real, const D: usize> {
    /// Cell-centered lattice shared by MPM, pressure, temperature and level set.
    pub cells: GridDescriptor<T, D>,
    /// Corner lattice of the fluid velocity.
    pub corners: GridDescriptor<T, D>,
    pub gravity: Vector<T, D>,
    pub models: MaterialModels<T>,
    pub rho_solid: T,
    pub thermal: ThermalConstants<T>,
    pub t_bar: T,
    pub fixed: DenseField<T, Option<T>, D>,
    pub shrink: ShrinkConfig<T, D>,
    /// Entry 0 holds the scene-wide constants; shapes with overrides append.
    pub ignition: Vec<IgnitionParams<T>>,
    pub alpha: T,
    pub alpha_flip: T,
    pub rho_fluid: T,
    pub move_with_blended: bool,
    pub n_s: usize,
    pub smoke_mass: T,
    pub max_age: Option<T>,
    pub cfl: T,
    pub pressure: ProjectionSettings<T>,
    pub diffusion: CgSettings<T>,
    pub max_dt: Option<T>,
    pub speed_floor: T,
    pub elastic_cfl: bool,
    pub walls: WallBoundary,
    pub frame_dt: T,
    pub frame_count: u32,
    pub seed: u64,
}

pub(crate) fn vector<T: Real, const D: usize>(field: &str, v: &[f64]) -> Result<Vector<T, D>> {
    if v.len() != D {
        return Err(SimError::config(field, format!("expected {D} components, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(SimError::config(field, "must be finite"));
    }
    Ok(Vector::<T, D>::from_fn(|a, _| T::lit(v[a])))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::config(field, "must be positive"))
    }
}

impl<T: Real, const D: usize> SceneParams<T, D> {
    pub fn from_config(cfg: &SceneConfig) -> Result<Self> {
        if cfg.dimension != D {
            return Err(SimError::config(
                "dimension",
                format!("scene is {}D, simulator is {D}D", cfg.dimension),
            ));
        }
        positive("dx", cfg.dx)?;
        let origin = vector::<T, D>("domain.origin", &cfg.domain.origin)?;
        if cfg.domain.size.len() != D {
            return Err(SimError::config("domain.size", format!("expected {D} components")));
        }
        let mut cells = [0usize; D];
        for a in 0..D {
            let n = cfg.domain.size[a] / cfg.dx;
            if !(n >= 3.0) || (n - n.round()).abs() > 1e-9 * n.max(1.0) {
                return Err(SimError::config(
                    "domain.size",
                    "each side must be a whole number (at least 3) of cells",
                ));
            }
            cells[a] = n.round() as usize;
        }
        let dx = T::lit(cfg.dx);
        let cell_grid = GridDescriptor::cell_centers(origin, dx, cells)?;
        let corners = GridDescriptor::cell_corners(origin, dx, cells)?;

        let gravity = match &cfg.gravity {
            Some(g) => vector::<T, D>("gravity", g)?,
            None => {
                let mut g = Vector::<T, D>::zeros();
                g[D - 1] = T::lit(-9.8);
                g
            }
        };

        let m = &cfg.material;
        positive("material.rho_solid", m.rho_solid)?;
        positive("material.rho_air", m.rho_air)?;
        let elastic = ElasticParams::from_youngs(T::lit(m.youngs_modulus), T::lit(m.poisson_ratio))?;
        let burnt = ElasticParams::from_youngs(
            T::lit(m.burnt_youngs_modulus.unwrap_or(m.youngs_modulus)),
            T::lit(m.burnt_poisson_ratio.unwrap_or(m.poisson_ratio)),
        )?;
        let plastic = PlasticParams::from_friction_angle(T::lit(m.friction_angle_deg))?;

        let th = &cfg.thermal;
        for (f, v) in [
            ("thermal.k_air", th.k_air),
            ("thermal.k_solid", th.k_solid),
            ("thermal.cp_air", th.cp_air),
            ("thermal.cp_solid", th.cp_solid),
        ] {
            positive(f, v)?;
        }
        if !(th.t_bar >= 0.0) {
            return Err(SimError::config("thermal.t_bar", "must be non-negative"));
        }
        let thermal = ThermalConstants {
            k_air: T::lit(th.k_air),
            k_solid: T::lit(th.k_solid),
            cp_air: T::lit(th.cp_air),
            cp_solid: T::lit(th.cp_solid),
            rho_air: T::lit(m.rho_air),
            rho_solid: T::lit(m.rho_solid),
        };
        let mut fixed = DenseField::filled(cell_grid, None);
        for (i, r) in th.fixed_regions.iter().enumerate() {
            let lo = vector::<T, D>(&format!("thermal.fixed_regions[{i}].min"), &r.min)?;
            let hi = vector::<T, D>(&format!("thermal.fixed_regions[{i}].max"), &r.max)?;
            let t = T::lit(r.temperature);
            for lin in 0..cell_grid.node_count() {
                let x = cell_grid.node_position(cell_grid.node_index(lin));
                if (0..D).all(|a| x[a] >= lo[a] && x[a] <= hi[a]) {
                    fixed.values_mut()[lin] = Some(t);
                }
            }
        }

        let s = &cfg.shrink;
        let mut shrink = ShrinkConfig::<T, D>::disabled();
        shrink.mode = s.mode;
        shrink.c_shrink = T::lit(s.c_shrink);
        shrink.c_radial = T::lit(s.c_radial);
        shrink.c_longitudinal = T::lit(s.c_longitudinal);
        shrink.t_evap = T::lit(s.t_evap);
        shrink.t_max = T::lit(s.t_max);
        if let Some(o) = &s.axis_origin {
            shrink.axis_origin = vector("shrink.axis_origin", o)?;
        }
        if let Some(d) = &s.axis_direction {
            shrink.axis_direction = vector("shrink.axis_direction", d)?;
        } else if s.mode == ShrinkMode::AnisotropicCylindrical {
            return Err(SimError::config("shrink.axis_direction", "required for cylindrical shrinking"));
        }
        shrink.validate()?;

        let ig = &cfg.ignition;
        let base = IgnitionParams {
            f0: T::lit(ig.f0),
            f_min: T::lit(ig.f_min),
            gamma: T::lit(ig.gamma),
            beta: T::lit(ig.beta),
            t_ignition: T::lit(ig.t_ignition),
            t_max: T::lit(ig.t_max),
            c_flame: T::lit(ig.c_flame),
        };
        base.validate()?;

        let fl = &cfg.fluid;
        if !(fl.alpha >= 0.0) {
            return Err(SimError::config("fluid.alpha", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&fl.alpha_flip) {
            return Err(SimError::config("fluid.alpha_flip", "must lie in [0, 1]"));
        }
        positive("fluid.rho_fluid", fl.rho_fluid)?;
        positive("smoke.mass", cfg.smoke.mass)?;
        if let Some(a) = cfg.smoke.max_age {
            positive("smoke.max_age", a)?;
        }

        let sv = &cfg.solver;
        if !(sv.cfl_number > 0.0 && sv.cfl_number <= 1.0) {
            return Err(SimError::config("solver.cfl_number", "must lie in (0, 1]"));
        }
        positive("solver.cg_tol_pressure", sv.cg_tol_pressure)?;
        positive("solver.cg_tol_diffusion", sv.cg_tol_diffusion)?;
        positive("solver.speed_scale", sv.speed_scale)?;
        if sv.max_iter == 0 {
            return Err(SimError::config("solver.max_iter", "must be positive"));
        }
        if let Some(m) = sv.max_dt {
            positive("solver.max_dt", m)?;
        }
        if sv.wall_band < 0 {
            return Err(SimError::config("solver.wall_band", "must be non-negative"));
        }
        positive("output.frame_dt", cfg.output.frame_dt)?;

        Ok(Self {
            cells: cell_grid,
            corners,
            gravity,
            models: MaterialModels {
                elastic,
                burnt,
                plastic,
            },
            rho_solid: T::lit(m.rho_solid),
            thermal,
            t_bar: T::lit(th.t_bar),
            fixed,
            shrink,
            ignition: vec![base],
            alpha: T::lit(fl.alpha),
            alpha_flip: T::lit(fl.alpha_flip),
            rho_fluid: T::lit(fl.rho_fluid),
            move_with_blended: fl.move_with_blended_velocity,
            n_s: cfg.smoke.n_s,
            smoke_mass: T::lit(cfg.smoke.mass),
            max_age: cfg.smoke.max_age.map(T::lit),
            cfl: T::lit(sv.cfl_number),
            pressure: ProjectionSettings {
                tol: T::lit(sv.cg_tol_pressure),
                max_iter: sv.max_iter,
            },
            diffusion: CgSettings {
                tol: T::lit(sv.cg_tol_diffusion),
                max_iter: sv.max_iter,
            },
            max_dt: sv.max_dt.map(T::lit),
            speed_floor: T::lit(1e-3 * sv.speed_scale),
            elastic_cfl: sv.elastic_cfl,
            walls: WallBoundary { band: sv.wall_band },
            frame_dt: T::lit(cfg.output.frame_dt),
            frame_count: cfg.output.frame_count,
            seed: cfg.seed,
        })
    }
}
