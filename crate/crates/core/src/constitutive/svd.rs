//! Polar-friendly singular value decomposition for small square matrices.

use crate::error::{Result, SimError};
use crate::linalg::{determinant, Matrix, Vector};
use crate::scalar::Real;

/// `F = U · diag(sigma) · Vᵀ` with proper rotations `U`, `V`.
///
/// Singular values are sorted by decreasing magnitude; a reflection, if any,
/// is carried by the last (smallest) entry, which is then negative.
#[derive(Clone, Copy, Debug)]
pub struct Svd<T: Real, const D: usize> {
    pub u: Matrix<T, D>,
    pub sigma: Vector<T, D>,
    pub v: Matrix<T, D>,
}

impl<T: Real, const D: usize> Svd<T, D> {
    pub fn recompose(&self) -> Matrix<T, D> {
        self.u * Matrix::from_diagonal(&self.sigma) * self.v.transpose()
    }

    /// Rotation part `R = U Vᵀ` of the polar decomposition.
    pub fn rotation(&self) -> Matrix<T, D> {
        self.u * self.v.transpose()
    }
}

const MAX_SWEEPS: usize = 40;

/// One-sided Jacobi SVD.
pub fn svd_polar<T: Real, const D: usize>(f: &Matrix<T, D>) -> Result<Svd<T, D>> {
    if f.iter().any(|x| !x.is_finite()) {
        return Err(SimError::NonFinite {
            what: "deformation gradient",
            id: usize::MAX,
        });
    }
    let eps = T::machine_eps();
    let mut a = *f;
    let mut v = Matrix::<T, D>::identity();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..D {
            for q in (p + 1)..D {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let root = (T::one() + zeta * zeta).sqrt();
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + root)
                } else {
                    -T::one() / (-zeta + root)
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for k in 0..D {
                    let (ap, aq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * ap - s * aq;
                    a[(k, q)] = s * ap + c * aq;
                    let (vp, vq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vp - s * vq;
                    v[(k, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // sort columns by decreasing norm (stable, so equal values keep order)
    let norms: [T; D] = std::array::from_fn(|i| a.column(i).norm());
    let mut order: [usize; D] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut sigma = Vector::<T, D>::zeros();
    let mut u = Matrix::<T, D>::zeros();
    let mut vs = Matrix::<T, D>::zeros();
    let mut have = [false; D];
    let scale = norms[order[0]];
    let tiny = eps * scale * T::lit(16.0);
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = norms[src];
        vs.set_column(dst, &v.column(src));
        if norms[src] > tiny && norms[src] > T::zero() {
            u.set_column(dst, &(a.column(src) / norms[src]));
            have[dst] = true;
        }
    }
    complete_basis(&mut u, &have);

    if determinant(&vs) < T::zero() {
        let last = D - 1;
        let c = -vs.column(last);
        vs.set_column(last, &c);
        let c = -u.column(last);
        u.set_column(last, &c);
    }
    if determinant(&u) < T::zero() {
        let last = D - 1;
        let c = -u.column(last);
        u.set_column(last, &c);
        sigma[last] = -sigma[last];
    }
    Ok(Svd { u, sigma, v: vs })
}

/// Fills the missing columns of `u` with an orthonormal complement.
fn complete_basis<T: Real, const D: usize>(u: &mut Matrix<T, D>, have: &[bool; D]) {
    for col in 0..D {
        if have[col] {
            continue;
        }
        let mut best: Option<(T, Vector<T, D>)> = None;
        for k in 0..D {
            let mut cand = Vector::<T, D>::zeros();
            cand[k] = T::one();
            for other in 0..D {
                if other != col && (have[other] || other < col) {
                    let o = u.column(other).into_owned();
                    cand -= o * o.dot(&cand);
                }
            }
            let n = cand.norm();
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, cand));
            }
        }
        let (n, c) = best.expect("dimension is positive");
        u.set_column(col, &(c / n));
    }
}
