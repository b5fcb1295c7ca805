use crate::constitutive::ConstitutiveModel;
use crate::ignition::BurnState;
use crate::linalg::{determinant, Matrix, Vector};
use crate::scalar::Real;

/// Lagrangian material point.
#[derive(Clone, Debug, PartialEq)]
pub struct MpmParticle<T: Real, const D: usize> {
    pub x: Vector<T, D>,
    pub v: Vector<T, D>,
    pub mass: T,
    pub volume0: T,
    /// Elastic deformation gradient.
    pub f: Matrix<T, D>,
    /// APIC affine velocity matrix.
    pub c: Matrix<T, D>,
    pub temperature: T,
    pub temp_grad: Vector<T, D>,
    pub state: BurnState,
    pub fuel: T,
    /// Fuel level at ignition.
    pub fuel0: T,
    pub burn_start_time: Option<T>,
    pub time_to_burn: Option<T>,
    pub model: ConstitutiveModel,
    /// Index into the scene's ignition parameter table.
    pub material: u16,
    pub combustible: bool,
}

impl<T: Real, const D: usize> MpmParticle<T, D> {
    /// Particle at rest in its reference state.
    pub fn at_rest(x: Vector<T, D>, mass: T, volume0: T, temperature: T, fuel0: T) -> Self {
        Self {
            x,
            v: Vector::zeros(),
            mass,
            volume0,
            f: Matrix::identity(),
            c: Matrix::zeros(),
            temperature,
            temp_grad: Vector::zeros(),
            state: BurnState::Original,
            fuel: fuel0,
            fuel0,
            burn_start_time: None,
            time_to_burn: None,
            model: ConstitutiveModel::FixedCorotated,
            material: 0,
            combustible: true,
        }
    }

    pub fn j(&self) -> T {
        determinant(&self.f)
    }
}
