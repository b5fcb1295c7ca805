//! Small fixed-size matrix helpers for d ∈ {2, 3}.

use nalgebra::{SMatrix, SVector};

use crate::scalar::Real;

pub type Vector<T, const D: usize> = SVector<T, D>;
pub type Matrix<T, const D: usize> = SMatrix<T, D, D>;

pub fn determinant<T: Real, const D: usize>(m: &Matrix<T, D>) -> T {
    match D {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => panic!("determinant only implemented for d <= 3"),
    }
}

/// Cofactor matrix, i.e. `det(m) · m⁻ᵀ`. Defined for singular matrices too.
pub fn cofactor<T: Real, const D: usize>(m: &Matrix<T, D>) -> Matrix<T, D> {
    let mut c = Matrix::<T, D>::zeros();
    match D {
        1 => c[(0, 0)] = T::one(),
        2 => {
            c[(0, 0)] = m[(1, 1)];
            c[(0, 1)] = -m[(1, 0)];
            c[(1, 0)] = -m[(0, 1)];
            c[(1, 1)] = m[(0, 0)];
        }
        3 => {
            for i in 0..3 {
                for j in 0..3 {
                    let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                    let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                    c[(i, j)] = m[(i1, j1)] * m[(i2, j2)] - m[(i1, j2)] * m[(i2, j1)];
                }
            }
        }
        _ => panic!("cofactor only implemented for d <= 3"),
    }
    c
}

/// Inverse via the adjugate; `None` when the determinant vanishes.
pub fn inverse<T: Real, const D: usize>(m: &Matrix<T, D>) -> Option<Matrix<T, D>> {
    let det = determinant(m);
    if det == T::zero() {
        return None;
    }
    Some(cofactor(m).transpose() / det)
}

/// Skew-symmetric matrix of an angular velocity. In 2D only `omega[2]` is used.
pub fn skew<T: Real, const D: usize>(omega: &Vector<T, 3>) -> Matrix<T, D> {
    let mut s = Matrix::<T, D>::zeros();
    match D {
        2 => {
            s[(0, 1)] = -omega[2];
            s[(1, 0)] = omega[2];
        }
        3 => {
            s[(0, 1)] = -omega[2];
            s[(0, 2)] = omega[1];
            s[(1, 0)] = omega[2];
            s[(1, 2)] = -omega[0];
            s[(2, 0)] = -omega[1];
            s[(2, 1)] = omega[0];
        }
        _ => panic!("skew only implemented for d in {{2, 3}}"),
    }
    s
}

pub fn all_finite<T: Real, const R: usize, const C: usize>(m: &SMatrix<T, R, C>) -> bool {
    m.iter().all(|x| x.is_finite())
}
