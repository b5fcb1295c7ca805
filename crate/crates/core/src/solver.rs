//! Preconditioned conjugate gradients (Hestenes-Stiefel recurrences) for the
//! symmetric systems assembled by the pressure and diffusion solves.

use crate::error::{Result, SimError};
use crate::par::ordered_dot;
use crate::scalar::Real;

/// Symmetric positive (semi-)definite operator applied matrix-free.
pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    /// Diagonal of the operator, used for Jacobi preconditioning.
    fn diagonal(&self) -> Vec<T>;
    /// Factor used instead of Jacobi when present.
    fn incomplete_cholesky(&self) -> Option<&IncompleteCholesky<T>> {
        None
    }
}

/// Zero fill-in Cholesky factor `L` of a symmetric matrix in compressed rows,
/// keeping the sparsity of the lower triangle.
#[derive(Clone, Debug, Default)]
pub struct IncompleteCholesky<T> {
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    diag: Vec<T>,
}

impl<T: Real> IncompleteCholesky<T> {
    /// `cols` must be sorted within each row. A pivot that collapses below
    /// a small fraction of the original diagonal is replaced by that diagonal.
    pub fn factor(row_start: &[usize], cols: &[usize], vals: &[T]) -> Self {
        let n = row_start.len() - 1;
        let mut l_start = vec![0];
        let mut l_cols: Vec<usize> = Vec::new();
        let mut l_vals: Vec<T> = Vec::new();
        let mut diag = vec![T::zero(); n];
        for i in 0..n {
            let row = row_start[i]..row_start[i + 1];
            let mut a_ii = T::zero();
            let begin = l_cols.len();
            for (&j, &a) in cols[row.clone()].iter().zip(&vals[row]) {
                if j > i {
                    break;
                }
                if j == i {
                    a_ii = a;
                    break;
                }
                // dot of the partial rows i and j over columns below j
                let mut s = a;
                let (mut p, mut q) = (begin, l_start[j]);
                let q_end = l_start[j + 1];
                while p < l_cols.len() && q < q_end {
                    match l_cols[p].cmp(&l_cols[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            s -= l_vals[p] * l_vals[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                l_cols.push(j);
                l_vals.push(s / diag[j]);
            }
            let sq = l_vals[begin..].iter().fold(T::zero(), |acc, &v| acc + v * v);
            let pivot = a_ii - sq;
            diag[i] = if pivot > T::lit(1e-6) * a_ii {
                pivot.sqrt()
            } else if a_ii > T::zero() {
                a_ii.sqrt()
            } else {
                T::one()
            };
            l_start.push(l_cols.len());
        }
        Self {
            row_start: l_start,
            cols: l_cols,
            vals: l_vals,
            diag,
        }
    }

    /// `z = (L Lᵀ)⁻¹ r`.
    pub fn solve(&self, r: &[T], z: &mut [T]) {
        let n = self.diag.len();
        for i in 0..n {
            let row = self.row_start[i]..self.row_start[i + 1];
            let s = self.cols[row.clone()]
                .iter()
                .zip(&self.vals[row])
                .fold(r[i], |acc, (&j, &v)| acc - v * z[j]);
            z[i] = s / self.diag[i];
        }
        for i in (0..n).rev() {
            z[i] /= self.diag[i];
            let zi = z[i];
            let row = self.row_start[i]..self.row_start[i + 1];
            for (&j, &v) in self.cols[row.clone()].iter().zip(&self.vals[row]) {
                z[j] -= v * zi;
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgSettings<T> {
    /// Stop when `max|r| ≤ tol · max|b|`.
    pub tol: T,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Solves `A x = b` starting from the given `x`.
pub fn conjugate_gradient<T: Real, A: LinearOperator<T>>(
    a: &A,
    b: &[T],
    x: &mut [T],
    settings: CgSettings<T>,
    name: &'static str,
) -> Result<CgReport> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let b_norm = max_abs(b);
    if n == 0 || b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(CgReport::default());
    }
    let ic = a.incomplete_cholesky();
    let inv_diag: Vec<T> = if ic.is_some() {
        Vec::new()
    } else {
        a.diagonal()
            .into_iter()
            .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
            .collect()
    };
    let precondition = |r: &[T], z: &mut [T]| match ic {
        Some(f) => f.solve(r, z),
        None => {
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
        }
    };

    let mut r = vec![T::zero(); n];
    a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let threshold = settings.tol * b_norm;
    let mut res = max_abs(&r);
    if res <= threshold {
        return Ok(CgReport {
            iterations: 0,
            relative_residual: (res / b_norm).as_f64(),
        });
    }
    let mut z = vec![T::zero(); n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = ordered_dot(&r, &z);

    for it in 1..=settings.max_iter {
        a.apply(&p, &mut ap);
        let pap = ordered_dot(&p, &ap);
        if pap <= T::zero() {
            // search direction in the null space: the residual cannot shrink further
            return Err(SimError::NonConvergence {
                solver: name,
                iterations: it,
                residual: (res / b_norm).as_f64(),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = max_abs(&r);
        if res <= threshold {
            return Ok(CgReport {
                iterations: it,
                relative_residual: (res / b_norm).as_f64(),
            });
        }
        precondition(&r, &mut z);
        let rz_new = ordered_dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SimError::NonConvergence {
        solver: name,
        iterations: settings.max_iter,
        residual: (res / b_norm).as_f64(),
    })
}
