pub mod constitutive;
pub mod error;
pub mod fluid;
pub mod grid;
pub mod ignition;
pub mod linalg;
pub mod mpm;
pub mod par;
pub mod scalar;
pub mod scene;
pub mod solver;
pub mod thermal;

pub use error::{Result, SimError};
pub use scalar::Real;

pub type Simulation2 = scene::Simulation<f64, 2>;
pub type Simulation3 = scene::Simulation<f64, 3>;
pub type Simulation2f = scene::Simulation<f32, 2>;
pub type Simulation3f = scene::Simulation<f32, 3>;
