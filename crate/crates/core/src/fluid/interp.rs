//! Field sampling: multilinear, monotone cubic, and RK3 backtracing.

use std::ops::{Add, Mul};

use num_traits::Zero;

use crate::grid::{for_each_offset, linear_weights_clamped, DenseField, GridDescriptor};
use crate::linalg::Vector;
use crate::scalar::Real;

/// Multilinear sample with `x` clamped to the lattice hull.
pub fn sample_linear<T, V, const D: usize>(field: &DenseField<T, V, D>, x: &Vector<T, D>) -> V
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
{
    let g = field.descriptor();
    match linear_weights_clamped(x, g) {
        Ok(st) => {
            let mut acc = V::zero();
            st.for_each(|idx, w, _| acc = acc + field.get(idx) * w);
            acc
        }
        // single-node axis: nothing to interpolate
        Err(_) => field.get_clamped(nearest_index(g, x)),
    }
}

fn nearest_index<T: Real, const D: usize>(g: &GridDescriptor<T, D>, x: &Vector<T, D>) -> [i32; D] {
    let fx = g.node_coordinates(x);
    std::array::from_fn(|a| fx[a].round().as_f64() as i32)
}

/// Monotone cubic Hermite on `[f0, f1]` with Fedkiw slopes and
/// Fritsch-Carlson limiting.
fn monotone_cubic_1d<T: Real>(fm: T, f0: T, f1: T, f2: T, t: T) -> T {
    let half = T::lit(0.5);
    let delta = f1 - f0;
    if delta == T::zero() {
        return f0;
    }
    let mut m0 = (f1 - fm) * half;
    let mut m1 = (f2 - f0) * half;
    if m0.signum() != delta.signum() {
        m0 = T::zero();
    }
    if m1.signum() != delta.signum() {
        m1 = T::zero();
    }
    let a = m0 / delta;
    let b = m1 / delta;
    let r2 = a * a + b * b;
    let nine = T::lit(9.0);
    if r2 > nine {
        let tau = T::lit(3.0) / r2.sqrt();
        m0 *= tau;
        m1 *= tau;
    }
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let c2 = three * delta - two * m0 - m1;
    let c3 = m0 + m1 - two * delta;
    let v = f0 + t * (m0 + t * (c2 + t * c3));
    // rounding may leave the interval by an ulp
    v.max(f0.min(f1)).min(f0.max(f1))
}

/// Tensor-product monotone cubic sample of a scalar field. Points whose
/// 4-wide stencil leaves the lattice use multilinear interpolation.
pub fn interpolate_monotonic_cubic<T: Real, const D: usize>(
    field: &DenseField<T, T, D>,
    x: &Vector<T, D>,
) -> T {
    interpolate_monotonic_cubic_with(field.descriptor(), x, |idx| field.get(idx))
        .unwrap_or_else(|| sample_linear(field, x))
}

/// Monotone cubic sample reading nodes through `sample`. `None` when the
/// 4-wide stencil does not fit.
pub fn interpolate_monotonic_cubic_with<T: Real, const D: usize>(
    g: &GridDescriptor<T, D>,
    x: &Vector<T, D>,
    sample: impl Fn([i32; D]) -> T,
) -> Option<T> {
    let fx = g.node_coordinates(x);
    let mut base = [0i32; D];
    let mut t = [T::zero(); D];
    for a in 0..D {
        if !fx[a].is_finite() {
            return None;
        }
        let last = g.dims[a] as i32 - 1;
        let mut i = fx[a].floor().as_f64() as i32;
        if i == last {
            i -= 1;
        }
        if i < 1 || i + 2 > last {
            return None;
        }
        base[a] = i - 1;
        t[a] = fx[a] - T::lit(i as f64);
    }
    // 4^D samples, axis 0 fastest, reduced one axis at a time
    let mut vals = Vec::with_capacity(4usize.pow(D as u32));
    for_each_offset::<D>(4, |off| {
        let mut idx = base;
        for a in 0..D {
            idx[a] += off[a];
        }
        vals.push(sample(idx));
    });
    for ta in t.iter() {
        vals = vals
            .chunks_exact(4)
            .map(|c| monotone_cubic_1d(c[0], c[1], c[2], c[3], *ta))
            .collect();
    }
    Some(vals[0])
}

/// Ralston third-order backward trace through `vel`.
pub fn backtrace_rk3<T: Real, const D: usize>(
    x: &Vector<T, D>,
    dt: T,
    vel: impl Fn(&Vector<T, D>) -> Vector<T, D>,
) -> Vector<T, D> {
    let k1 = vel(x);
    let k2 = vel(&(x - k1 * (T::lit(0.5) * dt)));
    let k3 = vel(&(x - k2 * (T::lit(0.75) * dt)));
    x - (k1 * T::lit(2.0) + k2 * T::lit(3.0) + k3 * T::lit(4.0)) * (dt / T::lit(9.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NodeSite;

    fn grid1(n: usize) -> GridDescriptor<f64, 1> {
        GridDescriptor::new(Vector::<f64, 1>::zeros(), 1.0, [n], NodeSite::CellCorner).unwrap()
    }

    #[test]
    fn cubic_reproduces_linear_and_limits_steps() {
        let g = grid1(10);
        let lin = DenseField::from_fn(g, |i| 2.0 + 0.5 * i[0] as f64);
        for k in 0..50 {
            let x = 1.0 + 7.0 * k as f64 / 50.0;
            let v = interpolate_monotonic_cubic(&lin, &Vector::<f64, 1>::new(x));
            assert!((v - (2.0 + 0.5 * x)).abs() < 1e-12);
        }
        let step = DenseField::from_fn(g, |i| if i[0] < 5 { 0.0 } else { 1.0 });
        for k in 0..100 {
            let x = 1.0 + 7.0 * k as f64 / 100.0;
            let v = interpolate_monotonic_cubic(&step, &Vector::<f64, 1>::new(x));
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn backtrace_constant_and_zero() {
        let x = Vector::<f64, 2>::new(0.3, 0.7);
        assert_eq!(backtrace_rk3(&x, 0.1, |_| Vector::<f64, 2>::zeros()), x);
        let u0 = Vector::<f64, 2>::new(1.5, -0.5);
        let up = backtrace_rk3(&x, 0.1, |_| u0);
        assert!((up - (x - u0 * 0.1)).norm() < 1e-15);
    }

    #[test]
    fn linear_sample_clamps_outside() {
        let g = grid1(4);
        let f = DenseField::from_fn(g, |i| i[0] as f64);
        assert_eq!(sample_linear(&f, &Vector::<f64, 1>::new(-3.0)), 0.0);
        assert!((sample_linear(&f, &Vector::<f64, 1>::new(1.25)) - 1.25).abs() < 1e-15);
        assert!((sample_linear(&f, &Vector::<f64, 1>::new(9.0)) - 3.0).abs() < 1e-6);
    }
}
