//! St. Venant-Kirchhoff with Hencky strain, plus Drucker-Prager return mapping
//! in Hencky-strain space.

use super::{svd_polar, ElasticParams, PlasticParams, Svd, DEGENERATE_LIMIT};
use crate::error::{Result, SimError};
use crate::linalg::{Matrix, Vector};
use crate::scalar::Real;

fn positive_svd<T: Real, const D: usize>(f: &Matrix<T, D>, limit: T) -> Result<Svd<T, D>> {
    let svd = svd_polar(f)?;
    if let Some(s) = svd.sigma.iter().find(|s| **s <= limit) {
        return Err(SimError::DegenerateElement {
            particle: None,
            detail: format!("singular value {:e} (inverted or collapsed element)", s.as_f64()),
        });
    }
    Ok(svd)
}

/// `ψ = μ tr(η²) + λ/2 tr(η)²` with `η = ½ ln(F Fᵀ)`.
pub fn stvk_hencky_energy<T: Real, const D: usize>(
    f: &Matrix<T, D>,
    p: &ElasticParams<T>,
) -> Result<T> {
    let svd = positive_svd(f, T::zero())?;
    let eps = svd.sigma.map(|s| s.ln());
    let tr = eps.sum();
    Ok(p.mu * eps.norm_squared() + p.lambda * T::lit(0.5) * tr * tr)
}

/// `P = U diag((2μ ln σᵢ + λ Σ ln σⱼ)/σᵢ) Vᵀ`
pub fn stvk_hencky_stress<T: Real, const D: usize>(
    f: &Matrix<T, D>,
    p: &ElasticParams<T>,
) -> Result<Matrix<T, D>> {
    let svd = positive_svd(f, T::lit(DEGENERATE_LIMIT))?;
    let eps = svd.sigma.map(|s| s.ln());
    let tr = eps.sum();
    let diag = Vector::<T, D>::from_fn(|i, _| {
        ((p.mu + p.mu) * eps[i] + p.lambda * tr) / svd.sigma[i]
    });
    Ok(svd.u * Matrix::from_diagonal(&diag) * svd.v.transpose())
}

fn cone_slope<T: Real, const D: usize>(e: &ElasticParams<T>, pl: &PlasticParams<T>) -> T {
    let d = T::from_usize_lossy(D);
    pl.alpha * (d * e.lambda + e.mu + e.mu) / (e.mu + e.mu)
}

/// Yield function `‖ε̂‖ + α (dλ + 2μ)/(2μ) tr ε` of a state (≤ 0 is admissible).
pub fn drucker_prager_yield<T: Real, const D: usize>(
    f: &Matrix<T, D>,
    e: &ElasticParams<T>,
    pl: &PlasticParams<T>,
) -> Result<T> {
    let svd = positive_svd(f, T::lit(DEGENERATE_LIMIT))?;
    let eps = svd.sigma.map(|s| s.ln());
    let tr = eps.sum();
    let dev = eps - Vector::<T, D>::repeat(tr / T::from_usize_lossy(D));
    Ok(dev.norm() + cone_slope::<T, D>(e, pl) * tr)
}

/// Projects a trial deformation gradient onto the Drucker-Prager cone.
pub fn drucker_prager_project<T: Real, const D: usize>(
    f_trial: &Matrix<T, D>,
    e: &ElasticParams<T>,
    pl: &PlasticParams<T>,
) -> Result<Matrix<T, D>> {
    let svd = positive_svd(f_trial, T::lit(DEGENERATE_LIMIT))?;
    let eps = svd.sigma.map(|s| s.ln());
    let tr = eps.sum();
    if tr > T::zero() {
        // tension: collapse to the cone tip
        return Ok(svd.rotation());
    }
    let dev = eps - Vector::<T, D>::repeat(tr / T::from_usize_lossy(D));
    let dev_norm = dev.norm();
    let delta_gamma = dev_norm + cone_slope::<T, D>(e, pl) * tr;
    if delta_gamma <= T::zero() {
        return Ok(*f_trial);
    }
    let projected = eps - dev * (delta_gamma / dev_norm);
    let sigma = projected.map(|x| x.exp());
    Ok(svd.u * Matrix::from_diagonal(&sigma) * svd.v.transpose())
}
