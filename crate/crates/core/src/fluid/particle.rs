use crate::linalg::Vector;
use crate::scalar::Real;

/// Marker particle carrying heat and momentum near the flame.
#[derive(Clone, Debug, PartialEq)]
pub struct SmokeParticle<T: Real, const D: usize> {
    pub x: Vector<T, D>,
    pub v: Vector<T, D>,
    pub mass: T,
    pub temperature: T,
    pub temp_grad: Vector<T, D>,
    pub fuel: T,
    pub fuel0: T,
    /// Emission time; smoke burns from the moment it is sampled.
    pub burn_start_time: T,
    /// Ignition parameter table index inherited from the emitting particle.
    pub material: u16,
}
