//! Simulation state and the four-phase time step.

use std::path::Path;
use std::time::Instant;

use super::config::SceneConfig;
use super::params::SceneParams;
use super::sample::sample_geometry;
use crate::constitutive::{drucker_prager_project, ConstitutiveModel};
use crate::error::{Result, SimError};
use crate::fluid::{
    advect_smoke_particles, advect_velocity, apply_buoyancy, default_domain_bcs, enforce_velocity_bcs,
    flip_p2g, mark_solid_cells, CellLabel, PressureSystem, SmokeParticle,
};
use crate::grid::{clamp_to_stencil_region, quadratic_weights, DenseField, KernelKind, SparseField, SpatialHash};
use crate::ignition::{
    advance_states, compute_surface_set, ignite_neighbors, seed_ignition, update_burn_temperature, update_fuel,
    update_smoke_fuel, BurnState,
};
use crate::linalg::Vector;
use crate::mpm::{
    apply_anisotropic_shrinking, apply_isotropic_shrinking, build_particle_level_set, find_boundary_particles,
    g2p, grid_forces, grid_update, p2g, sample_smoke, update_constitutive_model, MpmParticle, ShrinkMode,
    SmokeRng,
};
use crate::scalar::Real;
use crate::thermal::{
    advect_temperature, diffusion_solve, extrapolate_fluid_temperature, heaviside_coefficients,
    merge_temperatures, temperature_g2p, temperature_p2g, ThermalSample,
};

/// Everything that evolves in time.
#[derive(Clone, Debug)]
pub struct SimState<T: Real, const D: usize> {
    pub time: T,
    pub step: u64,
    /// Index of the last frame reached.
    pub frame: u32,
    pub mpm: Vec<MpmParticle<T, D>>,
    pub smoke: Vec<SmokeParticle<T, D>>,
    /// Corner velocities.
    pub velocity: DenseField<T, Vector<T, D>, D>,
    /// Cell temperatures with solids filled by extrapolation.
    pub fluid_temperature: DenseField<T, T, D>,
    pub pressure: DenseField<T, T, D>,
    pub labels: DenseField<T, CellLabel, D>,
}

/// Per-step diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub dt: f64,
    pub pressure_iterations: usize,
    pub diffusion_iterations: usize,
    pub smoke_emitted: usize,
    pub smoke_removed: usize,
    pub ignited: usize,
    pub burnt_out: usize,
    pub clamped: usize,
}

impl StepStats {
    pub fn accumulate(&mut self, o: &StepStats) {
        self.dt += o.dt;
        self.pressure_iterations += o.pressure_iterations;
        self.diffusion_iterations += o.diffusion_iterations;
        self.smoke_emitted += o.smoke_emitted;
        self.smoke_removed += o.smoke_removed;
        self.ignited += o.ignited;
        self.burnt_out += o.burnt_out;
        self.clamped += o.clamped;
    }
}

#[derive(Clone, Debug)]
pub struct Simulation<T: Real, const D: usize> {
    pub config: SceneConfig,
    pub params: SceneParams<T, D>,
    pub state: SimState<T, D>,
    pressure_system: Option<PressureSystem<T, D>>,
}

impl<T: Real, const D: usize> Simulation<T, D> {
    /// Validates the config, samples geometry and applies ignition seeds.
    /// Relative point-cloud paths resolve against `base_dir`.
    pub fn new(config: SceneConfig, base_dir: &Path) -> Result<Self> {
        let mut params = SceneParams::<T, D>::from_config(&config)?;
        let mut mpm = sample_geometry(&config, &mut params, base_dir)?;
        for spec in &config.ignition.seeds {
            seed_ignition(&mut mpm, spec, &params.ignition, T::zero())?;
        }
        let state = Self::initial_state(&params, mpm);
        Ok(Self {
            config,
            params,
            state,
            pressure_system: None,
        })
    }

    /// Builds a simulation from explicit particles, bypassing geometry.
    pub fn from_particles(config: SceneConfig, particles: Vec<MpmParticle<T, D>>) -> Result<Self> {
        let params = SceneParams::<T, D>::from_config(&config)?;
        let state = Self::initial_state(&params, particles);
        Ok(Self {
            config,
            params,
            state,
            pressure_system: None,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let config = SceneConfig::load(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::new(config, base)
    }

    fn initial_state(params: &SceneParams<T, D>, mpm: Vec<MpmParticle<T, D>>) -> SimState<T, D> {
        let cells = params.cells;
        SimState {
            time: T::zero(),
            step: 0,
            frame: 0,
            mpm,
            smoke: Vec::new(),
            velocity: DenseField::filled(params.corners, Vector::zeros()),
            fluid_temperature: DenseField::filled(cells, params.t_bar),
            pressure: DenseField::filled(cells, T::zero()),
            labels: default_domain_bcs(&cells),
        }
    }

    /// Largest speed over MPM particles, smoke particles and fluid nodes.
    pub fn max_speed(&self) -> T {
        let s = &self.state;
        let mut vmax = T::zero();
        for v in s.mpm.iter().map(|p| &p.v).chain(s.smoke.iter().map(|p| &p.v)) {
            vmax = vmax.max(v.norm());
        }
        for v in s.velocity.values() {
            vmax = vmax.max(v.norm());
        }
        vmax
    }

    /// CFL-limited step, capped so that it never overshoots `t_end`.
    pub fn compute_dt(&self, t_end: T) -> T {
        let p = &self.params;
        let dx = p.cells.dx;
        let mut dt = p.cfl * dx / self.max_speed().max(p.speed_floor);
        if p.elastic_cfl && !self.state.mpm.is_empty() {
            let c = p.models.max_wave_speed(p.rho_solid);
            if c > T::zero() {
                dt = dt.min(p.cfl * dx / c);
            }
        }
        if let Some(m) = p.max_dt {
            dt = dt.min(m);
        }
        dt.min(t_end - self.state.time)
    }

    /// Absolute time of frame `index`.
    pub fn frame_time(&self, index: u32) -> T {
        T::lit(index as f64) * self.params.frame_dt
    }

    /// Sub-steps until the next frame boundary, landing on it exactly.
    pub fn advance_frame(&mut self) -> Result<StepStats> {
        let t_end = self.frame_time(self.state.frame + 1);
        let mut total = StepStats::default();
        while self.state.time < t_end {
            let dt = self.compute_dt(t_end);
            let target = if dt >= t_end - self.state.time { t_end } else { self.state.time + dt };
            let stats = self.step_to(target)?;
            total.accumulate(&stats);
        }
        self.state.frame += 1;
        Ok(total)
    }

    pub fn step(&mut self, dt: T) -> Result<StepStats> {
        self.step_to(self.state.time + dt)
    }

    /// One full step ending at absolute time `t_next`.
    pub fn step_to(&mut self, t_next: T) -> Result<StepStats> {
        let dt = t_next - self.state.time;
        if !(dt > T::zero()) {
            return Err(SimError::config("dt", "time step must be positive"));
        }
        let step = self.state.step;
        let mut stats = StepStats {
            dt: dt.as_f64(),
            ..StepStats::default()
        };
        let clock = Instant::now();
        let mpm = self.mpm_phase(dt, &mut stats).map_err(|e| e.in_step(step, "mpm"))?;
        let t_mpm = clock.elapsed();
        self.fluid_phase(&mpm, dt, &mut stats).map_err(|e| e.in_step(step, "fluid"))?;
        let t_fluid = clock.elapsed();
        self.thermal_phase(&mpm, dt, &mut stats)
            .map_err(|e| e.in_step(step, "temperature"))?;
        let t_thermal = clock.elapsed();
        self.ignition_phase(&mpm, t_next, dt, &mut stats)
            .map_err(|e| e.in_step(step, "ignition"))?;
        log::debug!(
            "step {step}: dt={:.3e} mpm {:?} fluid {:?} ({} cg) temperature {:?} ({} cg) ignition {:?}",
            dt.as_f64(),
            t_mpm,
            t_fluid - t_mpm,
            stats.pressure_iterations,
            t_thermal - t_fluid,
            stats.diffusion_iterations,
            clock.elapsed() - t_thermal
        );
        self.state.time = t_next;
        self.state.step += 1;
        Ok(stats)
    }

    fn mpm_phase(&mut self, dt: T, stats: &mut StepStats) -> Result<MpmStepOutput<T, D>> {
        let p = &self.params;
        let s = &mut self.state;
        let cells = p.cells;
        for (id, q) in s.mpm.iter_mut().enumerate() {
            if quadratic_weights(&q.x, &cells).is_err() {
                let (x, _) = clamp_to_stencil_region(&q.x, &cells, KernelKind::Quadratic);
                log::warn!("particle {id} left the stencil region; clamped");
                q.x = x;
                stats.clamped += 1;
            }
        }
        let mut grid = p2g(&s.mpm, &cells)?;
        let eps_r = cells.dx * T::lit(1e-6);
        for q in s.mpm.iter_mut() {
            match p.shrink.mode {
                ShrinkMode::None => false,
                ShrinkMode::Isotropic => apply_isotropic_shrinking(q, dt, &p.shrink),
                ShrinkMode::AnisotropicCylindrical => apply_anisotropic_shrinking(q, dt, &p.shrink, eps_r),
            };
        }
        for (id, q) in s.mpm.iter_mut().enumerate() {
            if q.model == ConstitutiveModel::StvkHenckyDp {
                q.f = drucker_prager_project(&q.f, &p.models.burnt, &p.models.plastic)
                    .map_err(|e| e.with_particle(id))?;
            }
        }
        grid_forces(&s.mpm, &p.models, &p.gravity, &mut grid)?;
        grid_update(&mut grid, dt, &p.walls);
        g2p(&grid, &mut s.mpm, dt)?;
        for q in s.mpm.iter_mut() {
            update_constitutive_model(q);
        }

        let combustible: Vec<(usize, Vector<T, D>)> = s
            .mpm
            .iter()
            .enumerate()
            .filter(|(_, q)| q.combustible)
            .map(|(i, q)| (i, q.x))
            .collect();
        let positions: Vec<Vector<T, D>> = combustible.iter().map(|(_, x)| *x).collect();
        let level_set = build_particle_level_set(&positions, &cells);
        let hash = SpatialHash::build(cells.origin, cells.dx, combustible)?;
        let boundary = find_boundary_particles(&hash);
        let boundary_positions: Vec<Vector<T, D>> = boundary.iter().map(|&i| s.mpm[i].x).collect();
        let boundary_hash = SpatialHash::build(
            cells.origin,
            cells.dx,
            boundary.iter().map(|&i| (i, s.mpm[i].x)),
        )?;
        let emitted = sample_smoke(
            &s.mpm,
            &boundary_hash,
            p.n_s,
            cells.dx,
            &p.ignition,
            p.smoke_mass,
            s.time,
            SmokeRng {
                seed: p.seed,
                step: s.step,
            },
        );
        stats.smoke_emitted = emitted.len();
        s.smoke.extend(emitted);
        Ok(MpmStepOutput {
            grid,
            level_set,
            boundary_positions,
        })
    }

    fn fluid_phase(&mut self, mpm: &MpmStepOutput<T, D>, dt: T, stats: &mut StepStats) -> Result<()> {
        let p = &self.params;
        let s = &mut self.state;
        let cache = &mut self.pressure_system;
        let cells = p.cells;
        let mut labels = default_domain_bcs(&cells);
        let mut solid_velocity = DenseField::filled(cells, Vector::zeros());
        mark_solid_cells(&mpm.grid, &mut labels, &mut solid_velocity);

        let flip = flip_p2g(&s.smoke, &s.velocity);
        let mut u = advect_velocity(&s.velocity, &flip, dt);
        enforce_velocity_bcs(&mut u, &labels, &solid_velocity);
        let u_old = u.clone();
        apply_buoyancy(&mut u, &s.fluid_temperature, p.alpha, p.t_bar, dt);
        if labels.values().contains(&CellLabel::Fluid) {
            if !cache.as_ref().is_some_and(|sys| sys.matches(&labels)) {
                log::debug!("rebuilding pressure system");
                *cache = Some(PressureSystem::new(&labels));
            }
            let sys = cache.as_ref().expect("pressure system built");
            let res = sys.solve(&mut u, &solid_velocity, p.rho_fluid, dt, p.pressure)?;
            stats.pressure_iterations = res.report.iterations;
            s.pressure = res.pressure;
            enforce_velocity_bcs(&mut u, &labels, &solid_velocity);
        } else {
            s.pressure = DenseField::filled(cells, T::zero());
        }
        stats.smoke_removed = advect_smoke_particles(&mut s.smoke, &u_old, &u, p.alpha_flip, dt, p.move_with_blended);
        if let Some(max_age) = p.max_age {
            let t_next = s.time + dt;
            let before = s.smoke.len();
            s.smoke.retain(|q| t_next - q.burn_start_time <= max_age);
            stats.smoke_removed += before - s.smoke.len();
        }
        s.velocity = u;
        s.labels = labels;
        Ok(())
    }

    fn thermal_phase(&mut self, mpm: &MpmStepOutput<T, D>, dt: T, stats: &mut StepStats) -> Result<()> {
        let p = &self.params;
        let s = &mut self.state;
        let cells = p.cells;
        let solid_samples: Vec<ThermalSample<T, D>> = s
            .mpm
            .iter()
            .map(|q| ThermalSample {
                x: q.x,
                mass: q.mass,
                temperature: q.temperature,
                temp_grad: q.temp_grad,
            })
            .collect();
        let smoke_samples: Vec<ThermalSample<T, D>> = s
            .smoke
            .iter()
            .map(|q| ThermalSample {
                x: q.x,
                mass: q.mass,
                temperature: q.temperature,
                temp_grad: q.temp_grad,
            })
            .collect();
        let solid = temperature_p2g(&solid_samples, &cells);
        let smoke = temperature_p2g(&smoke_samples, &cells);
        let advected = advect_temperature(&s.fluid_temperature, &s.velocity, &solid.combined(&smoke), p.t_bar, dt);
        let solid_mask = DenseField::from_fn(cells, |i| solid.mass.get(i) > T::zero());
        let merged = merge_temperatures(&advected, &solid, &solid_mask);
        let (k, rho_cp) = heaviside_coefficients(&mpm.level_set, &p.thermal);
        let (diffused, report) = diffusion_solve(&merged, &k, &rho_cp, &p.fixed, dt, p.diffusion)?;
        stats.diffusion_iterations = report.iterations;
        for q in s.mpm.iter_mut() {
            (q.temperature, q.temp_grad) = temperature_g2p(&diffused, &q.x);
        }
        for q in s.smoke.iter_mut() {
            (q.temperature, q.temp_grad) = temperature_g2p(&diffused, &q.x);
        }
        s.fluid_temperature = extrapolate_fluid_temperature(&diffused, &solid_mask)?;
        Ok(())
    }

    fn ignition_phase(
        &mut self,
        mpm: &MpmStepOutput<T, D>,
        t_now: T,
        dt: T,
        stats: &mut StepStats,
    ) -> Result<()> {
        let p = &self.params;
        let s = &mut self.state;
        for q in s.mpm.iter_mut() {
            let prm = &p.ignition[q.material as usize];
            if q.state == BurnState::Burning {
                if update_fuel(q, t_now, prm) {
                    update_constitutive_model(q);
                    stats.burnt_out += 1;
                } else {
                    q.temperature = update_burn_temperature(q.temperature, q.fuel, dt, prm);
                }
            }
            q.temperature = q.temperature.max(T::zero()).min(prm.t_max);
        }
        for q in s.smoke.iter_mut() {
            let prm = &p.ignition[q.material as usize];
            update_smoke_fuel(q, t_now, prm);
            q.temperature = update_burn_temperature(q.temperature, q.fuel, dt, prm);
        }
        let originals = s
            .mpm
            .iter()
            .enumerate()
            .filter(|(_, q)| q.combustible && q.state == BurnState::Original)
            .map(|(i, q)| (i, q.x));
        let hash_o = SpatialHash::build(p.cells.origin, p.cells.dx, originals)?;
        let surface = compute_surface_set(&mpm.boundary_positions, &hash_o);
        ignite_neighbors(&mut s.mpm, &surface, t_now, &p.ignition, p.cells.dx, p.cells.origin)?;
        stats.ignited = advance_states(&mut s.mpm, t_now);
        Ok(())
    }
}

/// Products of the MPM phase consumed by the later phases.
struct MpmStepOutput<T: Real, const D: usize> {
    grid: crate::mpm::MpmGridState<T, D>,
    level_set: SparseField<T, T, D>,
    boundary_positions: Vec<Vector<T, D>>,
}
