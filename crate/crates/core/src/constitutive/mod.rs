//! Hyperelastic energies, stresses and plastic return mapping.

mod corotated;
mod hencky;
mod svd;

pub use corotated::{fixed_corotated_energy, fixed_corotated_stress};
pub use hencky::{drucker_prager_project, drucker_prager_yield, stvk_hencky_energy, stvk_hencky_stress};
pub use svd::{svd_polar, Svd};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Determinants and singular values at or below this are treated as degenerate.
pub const DEGENERATE_LIMIT: f64 = 1e-8;

/// Lamé coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticParams<T: Real> {
    pub mu: T,
    pub lambda: T,
}

impl<T: Real> ElasticParams<T> {
    pub fn new(mu: T, lambda: T) -> Result<Self> {
        if !(mu >= T::zero()) || !(lambda >= T::zero()) {
            return Err(SimError::config(
                "elastic",
                "Lamé coefficients must be non-negative",
            ));
        }
        Ok(Self { mu, lambda })
    }

    /// From Young's modulus `e > 0` and Poisson ratio `nu ∈ [0, 0.5)`.
    pub fn from_youngs(e: T, nu: T) -> Result<Self> {
        if !(e > T::zero()) || !(nu >= T::zero() && nu < T::lit(0.5)) {
            return Err(SimError::config(
                "elastic",
                "need Young's modulus > 0 and Poisson ratio in [0, 0.5)",
            ));
        }
        let one = T::one();
        let two = T::lit(2.0);
        let mu = e / (two * (one + nu));
        let lambda = e * nu / ((one + nu) * (one - two * nu));
        Ok(Self { mu, lambda })
    }

    /// P-wave speed `sqrt((λ + 2μ)/ρ)`.
    pub fn wave_speed(&self, density: T) -> T {
        ((self.lambda + self.mu + self.mu) / density).sqrt()
    }
}

/// Cohesionless Drucker-Prager parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticParams<T: Real> {
    pub friction_angle_deg: T,
    /// `sqrt(2/3) · 2 sin φ / (3 − sin φ)`
    pub alpha: T,
}

impl<T: Real> PlasticParams<T> {
    pub fn from_friction_angle(degrees: T) -> Result<Self> {
        if !(degrees > T::zero() && degrees < T::lit(90.0)) {
            return Err(SimError::config(
                "friction_angle_deg",
                "friction angle must lie in (0, 90) degrees",
            ));
        }
        let s = (degrees * T::pi() / T::lit(180.0)).sin();
        let alpha = (T::lit(2.0) / T::lit(3.0)).sqrt() * (s + s) / (T::lit(3.0) - s);
        Ok(Self {
            friction_angle_deg: degrees,
            alpha,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstitutiveModel {
    FixedCorotated,
    StvkHenckyDp,
}

/// Material constants for both models a particle may use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialModels<T: Real> {
    pub elastic: ElasticParams<T>,
    pub burnt: ElasticParams<T>,
    pub plastic: PlasticParams<T>,
}

impl<T: Real> MaterialModels<T> {
    pub fn stress<const D: usize>(
        &self,
        model: ConstitutiveModel,
        f: &Matrix<T, D>,
    ) -> Result<Matrix<T, D>> {
        match model {
            ConstitutiveModel::FixedCorotated => fixed_corotated_stress(f, &self.elastic),
            ConstitutiveModel::StvkHenckyDp => stvk_hencky_stress(f, &self.burnt),
        }
    }

    pub fn energy<const D: usize>(&self, model: ConstitutiveModel, f: &Matrix<T, D>) -> Result<T> {
        match model {
            ConstitutiveModel::FixedCorotated => fixed_corotated_energy(f, &self.elastic),
            ConstitutiveModel::StvkHenckyDp => stvk_hencky_energy(f, &self.burnt),
        }
    }

    /// Largest P-wave speed among the models.
    pub fn max_wave_speed(&self, density: T) -> T {
        self.elastic
            .wave_speed(density)
            .max(self.burnt.wave_speed(density))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_matches_closed_form() {
        let p = PlasticParams::<f64>::from_friction_angle(30.0).unwrap();
        // sin 30° = 1/2 → sqrt(2/3) · 1 / 2.5
        assert!((p.alpha - (2.0f64 / 3.0).sqrt() / 2.5).abs() < 1e-15);
        assert!(PlasticParams::<f64>::from_friction_angle(90.0).is_err());
        assert!(PlasticParams::<f64>::from_friction_angle(0.0).is_err());
    }

    #[test]
    fn youngs_conversion() {
        let e = ElasticParams::<f64>::from_youngs(1000.0, 0.25).unwrap();
        assert!((e.mu - 400.0).abs() < 1e-12);
        assert!((e.lambda - 400.0).abs() < 1e-12);
        assert!(ElasticParams::<f64>::from_youngs(1.0, 0.5).is_err());
        assert!(ElasticParams::<f64>::new(-1.0, 0.0).is_err());
    }
}
