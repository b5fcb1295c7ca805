//! Temperature transfers, narrow-band advection, implicit diffusion and
//! extrapolation into solids.

mod diffusion;
mod extrapolate;
mod transfer;

pub use diffusion::{assemble_diffusion_matrix, diffusion_solve, heaviside_coefficients, ThermalConstants};
pub use extrapolate::extrapolate_fluid_temperature;
pub use transfer::{
    advect_temperature, merge_temperatures, temperature_g2p, temperature_p2g, TemperatureTransfer,
    ThermalSample,
};
