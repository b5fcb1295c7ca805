//! Burn-state machine, fuel decay, combustion heating and flame spread.

mod ops;
mod state;

pub use ops::{
    advance_states, compute_surface_set, fuel_at, ignite_neighbors, seed_ignition, update_burn_temperature,
    update_fuel, update_smoke_fuel, SeedSpec,
};
pub use state::{BurnState, IgnitionParams};
