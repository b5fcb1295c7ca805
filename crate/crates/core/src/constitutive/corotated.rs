use super::{svd_polar, ElasticParams, DEGENERATE_LIMIT};
use crate::error::{Result, SimError};
use crate::linalg::{cofactor, determinant, Matrix};
use crate::scalar::Real;

/// `ψ = μ Σ(σᵢ − 1)² + λ/2 (J − 1)²`
pub fn fixed_corotated_energy<T: Real, const D: usize>(
    f: &Matrix<T, D>,
    p: &ElasticParams<T>,
) -> Result<T> {
    let svd = svd_polar(f)?;
    let j = determinant(f);
    let dev = svd
        .sigma
        .iter()
        .fold(T::zero(), |acc, s| acc + (*s - T::one()) * (*s - T::one()));
    Ok(p.mu * dev + p.lambda * T::lit(0.5) * (j - T::one()) * (j - T::one()))
}

/// First Piola-Kirchhoff stress `2μ(F − R) + λ(J − 1)·J·F⁻ᵀ`.
pub fn fixed_corotated_stress<T: Real, const D: usize>(
    f: &Matrix<T, D>,
    p: &ElasticParams<T>,
) -> Result<Matrix<T, D>> {
    let j = determinant(f);
    if j <= T::lit(DEGENERATE_LIMIT) {
        return Err(SimError::DegenerateElement {
            particle: None,
            detail: format!("det F = {:e}", j.as_f64()),
        });
    }
    let r = svd_polar(f)?.rotation();
    // J·F⁻ᵀ is the cofactor matrix
    Ok((f - r) * (p.mu + p.mu) + cofactor(f) * (p.lambda * (j - T::one())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    #[test]
    fn rest_state_is_stress_free() {
        let p = ElasticParams::new(3.0, 2.0).unwrap();
        let i = Matrix::<f64, 3>::identity();
        assert_eq!(fixed_corotated_energy(&i, &p).unwrap(), 0.0);
        assert_eq!(fixed_corotated_stress(&i, &p).unwrap(), Matrix::<f64, 3>::zeros());
    }

    #[test]
    fn energy_arithmetic() {
        let p = ElasticParams::new(1.0, 0.0).unwrap();
        let f = Matrix::from_diagonal(&Vector::<f64, 3>::new(2.0, 1.0, 1.0));
        assert!((fixed_corotated_energy(&f, &p).unwrap() - 1.0).abs() < 1e-14);
        let p = ElasticParams::new(0.0, 2.0).unwrap();
        let f = Matrix::<f64, 3>::identity() * 2.0;
        assert!((fixed_corotated_energy(&f, &p).unwrap() - 49.0).abs() < 1e-12);
    }

    #[test]
    fn pure_rotation_without_lambda() {
        let p = ElasticParams::new(5.0, 0.0).unwrap();
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r = Matrix::<f64, 2>::new(c, -s, s, c);
        assert!(fixed_corotated_stress(&r, &p).unwrap().norm() < 1e-14);
    }

    #[test]
    fn collapsed_element_is_an_error() {
        let p = ElasticParams::new(1.0, 1.0).unwrap();
        let f = Matrix::from_diagonal(&Vector::<f64, 2>::new(1.0, 1e-9));
        assert!(matches!(
            fixed_corotated_stress(&f, &p),
            Err(SimError::DegenerateElement { .. })
        ));
    }
}
