//! Temperature-driven shrinking of the deformation gradient.

use serde::{Deserialize, Serialize};

use super::MpmParticle;
use crate::error::{Result, SimError};
use crate::linalg::{Matrix, Vector};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShrinkMode {
    #[default]
    None,
    Isotropic,
    AnisotropicCylindrical,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkConfig<T: Real, const D: usize> {
    pub mode: ShrinkMode,
    pub c_shrink: T,
    pub c_radial: T,
    pub c_longitudinal: T,
    pub axis_origin: Vector<T, D>,
    pub axis_direction: Vector<T, D>,
    pub t_evap: T,
    pub t_max: T,
}

impl<T: Real, const D: usize> ShrinkConfig<T, D> {
    pub fn disabled() -> Self {
        let mut axis = Vector::zeros();
        axis[0] = T::one();
        Self {
            mode: ShrinkMode::None,
            c_shrink: T::one(),
            c_radial: T::one(),
            c_longitudinal: T::one(),
            axis_origin: Vector::zeros(),
            axis_direction: axis,
            t_evap: T::lit(373.0),
            t_max: T::lit(1000.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == ShrinkMode::None {
            return Ok(());
        }
        if !(self.t_max > self.t_evap) {
            return Err(SimError::config("shrink.t_max", "must exceed t_evap"));
        }
        let in_range = |c: T| c >= T::one() && c <= T::lit(1.1);
        for (name, c) in [
            ("shrink.c_shrink", self.c_shrink),
            ("shrink.c_radial", self.c_radial),
            ("shrink.c_longitudinal", self.c_longitudinal),
        ] {
            if !in_range(c) {
                return Err(SimError::config(name, "must lie in [1, 1.1]"));
            }
        }
        if self.mode == ShrinkMode::AnisotropicCylindrical {
            if D != 3 {
                return Err(SimError::config(
                    "shrink.mode",
                    "cylindrical shrinking needs a 3D scene",
                ));
            }
            if !(self.axis_direction.norm() > T::zero()) {
                return Err(SimError::config("shrink.axis_direction", "must be non-zero"));
            }
        }
        Ok(())
    }

    /// Rate `c = (c_s − 1)/(T_max − T_evap)·(T_p − T_evap) + 1`.
    pub fn rate(&self, c_s: T, temperature: T) -> T {
        (c_s - T::one()) / (self.t_max - self.t_evap) * (temperature - self.t_evap) + T::one()
    }
}

/// Scales `F` by `1 + c·dt` when the particle is hotter than `T_evap`.
/// Returns whether the particle was modified.
pub fn apply_isotropic_shrinking<T: Real, const D: usize>(
    p: &mut MpmParticle<T, D>,
    dt: T,
    cfg: &ShrinkConfig<T, D>,
) -> bool {
    if !(p.temperature > cfg.t_evap) {
        return false;
    }
    let c = cfg.rate(cfg.c_shrink, p.temperature);
    p.f *= T::one() + c * dt;
    true
}

/// Rows `u1, u2, u3` of `F` in the cylindrical basis at `(y, z)`.
/// `None` when the point lies within `eps_r` of the axis.
pub fn cylindrical_decompose<T: Real>(
    f: &Matrix<T, 3>,
    y: T,
    z: T,
    eps_r: T,
) -> Option<[Vector<T, 3>; 3]> {
    let r = (y * y + z * z).sqrt();
    if !(r > eps_r) {
        return None;
    }
    let u1 = Vector::<T, 3>::from_fn(|j, _| f[(0, j)]);
    let u2 = Vector::<T, 3>::from_fn(|j, _| (f[(1, j)] * z - f[(2, j)] * y) / r);
    let u3 = Vector::<T, 3>::from_fn(|j, _| (f[(1, j)] * y + f[(2, j)] * z) / r);
    Some([u1, u2, u3])
}

/// `F = e_x⊗u1 + e_θ⊗u2 + e_r⊗u3`.
pub fn cylindrical_recompose<T: Real>(u: &[Vector<T, 3>; 3], y: T, z: T) -> Matrix<T, 3> {
    let r = (y * y + z * z).sqrt();
    let e_theta = Vector::<T, 3>::new(T::zero(), z / r, -y / r);
    let e_r = Vector::<T, 3>::new(T::zero(), y / r, z / r);
    Vector::<T, 3>::x() * u[0].transpose() + e_theta * u[1].transpose() + e_r * u[2].transpose()
}

/// Orthonormal right-handed frame whose first column is the cylinder axis.
pub fn cylinder_frame<T: Real>(axis: &Vector<T, 3>) -> Matrix<T, 3> {
    let e = axis.normalize();
    let helper = if e.y.abs() < T::lit(0.9) {
        Vector::<T, 3>::y()
    } else {
        Vector::<T, 3>::z()
    };
    let a3 = e.cross(&helper).normalize();
    let a2 = a3.cross(&e);
    Matrix::<T, 3>::from_columns(&[e, a2, a3])
}

/// Scales the longitudinal `u11` and radial `u22` entries in the cylinder
/// frame. Only acts on 3D particles above `T_evap` and off the axis.
pub fn apply_anisotropic_shrinking<T: Real, const D: usize>(
    p: &mut MpmParticle<T, D>,
    dt: T,
    cfg: &ShrinkConfig<T, D>,
    eps_r: T,
) -> bool {
    if D != 3 || !(p.temperature > cfg.t_evap) {
        return false;
    }
    let to3 = |v: &Vector<T, D>| Vector::<T, 3>::from_fn(|i, _| v[i]);
    let q = cylinder_frame(&to3(&cfg.axis_direction));
    let rel = q.transpose() * (to3(&p.x) - to3(&cfg.axis_origin));
    let f = Matrix::<T, 3>::from_fn(|i, j| p.f[(i, j)]);
    let local = q.transpose() * f * q;
    let Some(mut u) = cylindrical_decompose(&local, rel.y, rel.z, eps_r) else {
        return false;
    };
    u[0][0] *= T::one() + cfg.rate(cfg.c_longitudinal, p.temperature) * dt;
    u[1][1] *= T::one() + cfg.rate(cfg.c_radial, p.temperature) * dt;
    let f_new = q * cylindrical_recompose(&u, rel.y, rel.z) * q.transpose();
    for i in 0..3 {
        for j in 0..3 {
            p.f[(i, j)] = f_new[(i, j)];
        }
    }
    true
}
