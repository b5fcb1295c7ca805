//! Solid mechanics: APIC transfers, explicit grid dynamics, shrinking,
//! constitutive switching, surface extraction and smoke emission.

mod level_set;
mod particle;
mod shrink;
mod smoke;
mod transfer;

pub use level_set::{build_particle_level_set, find_boundary_particles, particle_radius};
pub use particle::MpmParticle;
pub use shrink::{
    apply_anisotropic_shrinking, apply_isotropic_shrinking, cylinder_frame, cylindrical_decompose,
    cylindrical_recompose, ShrinkConfig, ShrinkMode,
};
pub use smoke::{sample_smoke, SmokeRng};
pub use transfer::{g2p, grid_forces, grid_update, p2g, MpmGridState, WallBoundary};

use crate::constitutive::ConstitutiveModel;
use crate::ignition::BurnState;
use crate::scalar::Real;

/// Switches burnt particles to the Hencky/Drucker-Prager model. `F` is kept.
/// Returns whether the model changed.
pub fn update_constitutive_model<T: Real, const D: usize>(p: &mut MpmParticle<T, D>) -> bool {
    if p.state == BurnState::Burnt && p.model == ConstitutiveModel::FixedCorotated {
        p.model = ConstitutiveModel::StvkHenckyDp;
        true
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, Vector};

    #[test]
    fn model_switch_only_when_burnt_and_once() {
        let mut p = MpmParticle::<f64, 2>::at_rest(Vector::<f64, 2>::zeros(), 1.0, 1.0, 300.0, 1.0);
        p.f = Matrix::<f64, 2>::new(1.1, 0.1, 0.0, 0.9);
        p.state = BurnState::Burning;
        assert!(!update_constitutive_model(&mut p));
        assert_eq!(p.model, ConstitutiveModel::FixedCorotated);
        p.state = BurnState::Burnt;
        assert!(update_constitutive_model(&mut p));
        assert!(!update_constitutive_model(&mut p));
        assert_eq!(p.model, ConstitutiveModel::StvkHenckyDp);
        assert_eq!(p.f, Matrix::<f64, 2>::new(1.1, 0.1, 0.0, 0.9));
    }
}
