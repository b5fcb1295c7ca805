//! Tensor-product B-spline interpolation kernels.

use super::descriptor::{GridDescriptor, NodeIndex};
use super::for_each_offset;
use crate::error::{Result, SimError};
use crate::linalg::Vector;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Quadratic,
}

impl KernelKind {
    pub fn width(self) -> usize {
        match self {
            KernelKind::Linear => 2,
            KernelKind::Quadratic => 3,
        }
    }
}

/// Per-axis weights of one particle's interpolation stencil.
///
/// `weights[a][k]` and `grads[a][k]` are the 1D weight and its world-space
/// derivative for node `base[a] + k` along axis `a`.
#[derive(Clone, Copy, Debug)]
pub struct Stencil<T: Real, const D: usize> {
    pub base: NodeIndex<D>,
    pub width: usize,
    pub weights: [[T; 3]; D],
    pub grads: [[T; 3]; D],
}

impl<T: Real, const D: usize> Stencil<T, D> {
    /// Visits `(node, weight, weight gradient)` for every stencil node.
    #[inline]
    pub fn for_each(&self, mut f: impl FnMut(NodeIndex<D>, T, Vector<T, D>)) {
        for_each_offset::<D>(self.width, |off| {
            let mut idx = self.base;
            let mut w = T::one();
            for a in 0..D {
                idx[a] += off[a];
                w *= self.weights[a][off[a] as usize];
            }
            let grad = Vector::<T, D>::from_fn(|a, _| {
                let mut g = self.grads[a][off[a] as usize];
                for b in 0..D {
                    if b != a {
                        g *= self.weights[b][off[b] as usize];
                    }
                }
                g
            });
            f(idx, w, grad);
        });
    }

    /// Collected form of [`Stencil::for_each`].
    pub fn nodes(&self) -> Vec<(NodeIndex<D>, T, Vector<T, D>)> {
        let mut out = Vec::with_capacity(self.width.pow(D as u32));
        self.for_each(|i, w, g| out.push((i, w, g)));
        out
    }
}

/// Quadratic B-spline stencil (3^D nodes).
pub fn quadratic_weights<T: Real, const D: usize>(
    xp: &Vector<T, D>,
    g: &GridDescriptor<T, D>,
) -> Result<Stencil<T, D>> {
    let fx = g.node_coordinates(xp);
    let half = T::lit(0.5);
    let inv_dx = T::one() / g.dx;
    let mut st = Stencil {
        base: [0; D],
        width: 3,
        weights: [[T::zero(); 3]; D],
        grads: [[T::zero(); 3]; D],
    };
    for a in 0..D {
        if !fx[a].is_finite() {
            return Err(SimError::StencilOutOfBounds {
                axis: a,
                coordinate: xp[a].as_f64(),
            });
        }
        let base = (fx[a] - half).floor();
        let b = base.as_f64() as i64;
        if b < 0 || b + 2 > g.dims[a] as i64 - 1 {
            return Err(SimError::StencilOutOfBounds {
                axis: a,
                coordinate: xp[a].as_f64(),
            });
        }
        // t ∈ [0.5, 1.5): distance from the first stencil node
        let t = fx[a] - base;
        let d0 = T::lit(1.5) - t;
        let d1 = t - T::one();
        let d2 = t - half;
        st.base[a] = b as i32;
        st.weights[a] = [half * d0 * d0, T::lit(0.75) - d1 * d1, half * d2 * d2];
        st.grads[a] = [-d0 * inv_dx, -(d1 + d1) * inv_dx, d2 * inv_dx];
    }
    Ok(st)
}

/// Multilinear stencil (2^D nodes).
pub fn linear_weights<T: Real, const D: usize>(
    xp: &Vector<T, D>,
    g: &GridDescriptor<T, D>,
) -> Result<Stencil<T, D>> {
    let fx = g.node_coordinates(xp);
    let inv_dx = T::one() / g.dx;
    let mut st = Stencil {
        base: [0; D],
        width: 2,
        weights: [[T::zero(); 3]; D],
        grads: [[T::zero(); 3]; D],
    };
    for a in 0..D {
        if !fx[a].is_finite() {
            return Err(SimError::StencilOutOfBounds {
                axis: a,
                coordinate: xp[a].as_f64(),
            });
        }
        let mut base = fx[a].floor();
        let last = T::from_usize_lossy(g.dims[a] - 1);
        // a particle exactly on the last node uses the cell below it
        if base == last && g.dims[a] > 1 {
            base = last - T::one();
        }
        let b = base.as_f64() as i64;
        if b < 0 || b + 1 > g.dims[a] as i64 - 1 || fx[a] > last {
            return Err(SimError::StencilOutOfBounds {
                axis: a,
                coordinate: xp[a].as_f64(),
            });
        }
        let t = fx[a] - base;
        st.base[a] = b as i32;
        st.weights[a] = [T::one() - t, t, T::zero()];
        st.grads[a] = [-inv_dx, inv_dx, T::zero()];
    }
    Ok(st)
}

/// Clamps `xp` into the region where the given kernel's stencil fits the
/// lattice. Returns the clamped point and whether it moved.
pub fn clamp_to_stencil_region<T: Real, const D: usize>(
    xp: &Vector<T, D>,
    g: &GridDescriptor<T, D>,
    kind: KernelKind,
) -> (Vector<T, D>, bool) {
    let off = g.site_offset();
    // valid node-coordinate interval per axis
    let (lo_n, hi_pad) = match kind {
        KernelKind::Linear => (T::zero(), T::one()),
        KernelKind::Quadratic => (T::lit(0.5), T::lit(1.5)),
    };
    // keep clear of the open upper end by a relative hair
    let eps = T::lit(1e-9);
    let mut out = *xp;
    let mut moved = false;
    for a in 0..D {
        let hi_n = T::from_usize_lossy(g.dims[a]) - hi_pad;
        let lo = g.origin[a] + (lo_n + off) * g.dx;
        let hi = g.origin[a] + (hi_n + off) * g.dx - eps * g.dx;
        let v = if out[a].is_finite() { out[a] } else { lo };
        let c = v.max(lo).min(hi);
        if c != out[a] {
            moved = true;
            out[a] = c;
        }
    }
    (out, moved)
}

/// Linear stencil at `xp`, or at its clamped position when `xp` lies
/// outside the stencil region.
pub fn linear_weights_clamped<T: Real, const D: usize>(
    xp: &Vector<T, D>,
    g: &GridDescriptor<T, D>,
) -> Result<Stencil<T, D>> {
    linear_weights(xp, g).or_else(|_| {
        let (xc, _) = clamp_to_stencil_region(xp, g, KernelKind::Linear);
        linear_weights(&xc, g)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NodeSite;

    fn grid1() -> GridDescriptor<f64, 1> {
        GridDescriptor::new(Vector::zeros(), 0.1, [20], NodeSite::CellCenter).unwrap()
    }

    #[test]
    fn quadratic_at_node_center() {
        let g = grid1();
        let x = g.node_position([7]);
        let st = quadratic_weights(&x, &g).unwrap();
        assert_eq!(st.base, [6]);
        let w = st.weights[0];
        assert!((w[0] - 0.125).abs() < 1e-15);
        assert!((w[1] - 0.75).abs() < 1e-15);
        assert!((w[2] - 0.125).abs() < 1e-15);
    }

    /// Piecewise quadratic B-spline evaluated directly from its definition.
    fn bspline2(r: f64) -> f64 {
        let r = r.abs();
        if r < 0.5 {
            0.75 - r * r
        } else if r < 1.5 {
            0.5 * (1.5 - r) * (1.5 - r)
        } else {
            0.0
        }
    }

    #[test]
    fn quadratic_offset_matches_polynomial() {
        let g = grid1();
        let x = g.node_position([7]) + Vector::<f64, 1>::new(0.25 * g.dx);
        let st = quadratic_weights(&x, &g).unwrap();
        for (idx, w, _) in st.nodes() {
            let r = (x[0] - g.node_position(idx)[0]) / g.dx;
            assert!((w - bspline2(r)).abs() < 1e-14, "node {idx:?}");
        }
    }

    #[test]
    fn out_of_bounds_names_axis() {
        let g = GridDescriptor::<f64, 2>::new(Vector::zeros(), 1.0, [8, 8], NodeSite::CellCenter)
            .unwrap();
        let err = quadratic_weights(&Vector::<f64, 2>::new(4.0, 0.7), &g).unwrap_err();
        assert!(matches!(err, SimError::StencilOutOfBounds { axis: 1, .. }));
        let err = linear_weights(&Vector::<f64, 2>::new(8.2, 3.0), &g).unwrap_err();
        assert!(matches!(err, SimError::StencilOutOfBounds { axis: 0, .. }));
    }

    #[test]
    fn linear_at_node_and_midpoint() {
        let g = grid1();
        let st = linear_weights(&g.node_position([4]), &g).unwrap();
        let nodes = st.nodes();
        assert_eq!(nodes[0].0, [4]);
        assert_eq!(nodes[0].1, 1.0);
        assert_eq!(nodes[1].1, 0.0);
        let mid = (g.node_position([4]) + g.node_position([5])) * 0.5;
        let st = linear_weights(&mid, &g).unwrap();
        assert!((st.weights[0][0] - 0.5).abs() < 1e-14);
        assert!((st.weights[0][1] - 0.5).abs() < 1e-14);
        // the very last node is still reachable
        let st = linear_weights(&g.node_position([19]), &g).unwrap();
        assert_eq!(st.base, [18]);
        assert_eq!(st.weights[0][1], 1.0);
    }

    #[test]
    fn clamped_points_are_valid() {
        let g = GridDescriptor::<f64, 2>::new(Vector::zeros(), 0.5, [10, 10], NodeSite::CellCenter)
            .unwrap();
        for kind in [KernelKind::Linear, KernelKind::Quadratic] {
            for x in [[-3.0, 2.0], [2.0, 99.0], [4.999, 0.0], [2.5, 2.5]] {
                let (c, _) = clamp_to_stencil_region(&Vector::<f64, 2>::from(x), &g, kind);
                let ok = match kind {
                    KernelKind::Linear => linear_weights(&c, &g).is_ok(),
                    KernelKind::Quadratic => quadratic_weights(&c, &g).is_ok(),
                };
                assert!(ok, "{kind:?} {x:?} -> {c:?}");
            }
        }
        let (c, moved) = clamp_to_stencil_region(
            &Vector::<f64, 2>::new(2.5, 2.5),
            &g,
            KernelKind::Quadratic,
        );
        assert!(!moved);
        assert_eq!(c, Vector::<f64, 2>::new(2.5, 2.5));
    }
}
