//! Incompressible smoke flow: nodal velocities on cell corners, pressure
//! and labels on cell centers.

mod advect;
mod interp;
mod labels;
mod particle;
mod projection;

pub use advect::{advect_smoke_particles, advect_velocity, apply_buoyancy, flip_p2g, FlipGrid};
pub use interp::{
    backtrace_rk3, interpolate_monotonic_cubic, interpolate_monotonic_cubic_with, sample_linear,
};
pub use labels::{
    classify_face, default_domain_bcs, label_at, mark_solid_cells, up_axis, CellLabel, Face,
};
pub use particle::SmokeParticle;
pub use projection::{
    assemble_pressure_matrix, corner_grid, divergence, enforce_velocity_bcs, pressure_solve,
    PressureSystem, ProjectionResult, ProjectionSettings,
};
