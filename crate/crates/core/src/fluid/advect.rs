//! Narrow-band FLIP advection, buoyancy and smoke particle transport.

use rayon::prelude::*;

use super::interp::{backtrace_rk3, interpolate_monotonic_cubic_with, sample_linear};
use super::SmokeParticle;
use crate::grid::{linear_weights_clamped, DenseField, SparseField};
use crate::linalg::Vector;
use crate::par::chunked_reduce;
use crate::scalar::Real;

/// Smoke momentum on the velocity lattice.
#[derive(Clone, Debug)]
pub struct FlipGrid<T: Real, const D: usize> {
    pub mass: SparseField<T, T, D>,
    /// `Σ N m v / Σ N m` where mass is positive.
    pub velocity: SparseField<T, Vector<T, D>, D>,
}

/// Mass-weighted linear transfer of smoke velocity to the corner lattice.
pub fn flip_p2g<T: Real, const D: usize>(
    smoke: &[SmokeParticle<T, D>],
    u: &DenseField<T, Vector<T, D>, D>,
) -> FlipGrid<T, D> {
    let g = *u.descriptor();
    let (mass, momentum) = chunked_reduce(
        smoke,
        || {
            (
                SparseField::<T, T, D>::new(g, T::zero()),
                SparseField::<T, Vector<T, D>, D>::new(g, Vector::zeros()),
            )
        },
        |(mass, mom), _, p| {
            let st = linear_weights_clamped(&p.x, &g).expect("clamped into the stencil region");
            st.for_each(|idx, w, _| {
                if w > T::zero() {
                    mass.add(idx, w * p.mass);
                    mom.add(idx, p.v * (w * p.mass));
                }
            });
        },
        |(m0, p0), (m1, p1)| {
            m0.merge_add(&m1);
            p0.merge_add(&p1);
        },
    );
    let mut velocity = SparseField::new(g, Vector::zeros());
    for (idx, m) in mass.iter_sorted() {
        if m > T::zero() {
            velocity.set(idx, momentum.get(idx) / m);
        }
    }
    FlipGrid { mass, velocity }
}

/// `u^A`: FLIP values where smoke deposited mass, semi-Lagrangian elsewhere.
pub fn advect_velocity<T: Real, const D: usize>(
    u: &DenseField<T, Vector<T, D>, D>,
    flip: &FlipGrid<T, D>,
    dt: T,
) -> DenseField<T, Vector<T, D>, D> {
    let g = *u.descriptor();
    let lo = g.domain_min();
    let hi = g.domain_max();
    let clamp = |x: Vector<T, D>| Vector::<T, D>::from_fn(|a, _| x[a].max(lo[a]).min(hi[a]));
    let values: Vec<Vector<T, D>> = (0..g.node_count())
        .into_par_iter()
        .map(|lin| {
            let idx = g.node_index(lin);
            if flip.mass.get(idx) > T::zero() {
                return flip.velocity.get(idx);
            }
            let x = g.node_position(idx);
            let up = clamp(backtrace_rk3(&x, dt, |y| sample_linear(u, &clamp(*y))));
            Vector::<T, D>::from_fn(|a, _| {
                interpolate_monotonic_cubic_with(&g, &up, |n| u.get(n)[a])
                    .unwrap_or_else(|| sample_linear(u, &up)[a])
            })
        })
        .collect();
    DenseField::from_vec(g, values)
}

/// Adds `dt·α·(T − T̄)` to the vertical velocity. `temperature` lives on
/// cell centers and is interpolated to the corners.
pub fn apply_buoyancy<T: Real, const D: usize>(
    u: &mut DenseField<T, Vector<T, D>, D>,
    temperature: &DenseField<T, T, D>,
    alpha: T,
    t_bar: T,
    dt: T,
) {
    if alpha == T::zero() {
        return;
    }
    let g = *u.descriptor();
    let up = D - 1;
    u.values_mut().par_iter_mut().enumerate().for_each(|(lin, v)| {
        let x = g.node_position(g.node_index(lin));
        let t = sample_linear(temperature, &x);
        v[up] += dt * alpha * (t - t_bar);
    });
}

/// FLIP/PIC velocity blend and particle advection; particles that leave the
/// domain are removed. Returns the number removed.
pub fn advect_smoke_particles<T: Real, const D: usize>(
    smoke: &mut Vec<SmokeParticle<T, D>>,
    u_old: &DenseField<T, Vector<T, D>, D>,
    u_new: &DenseField<T, Vector<T, D>, D>,
    alpha_flip: T,
    dt: T,
    move_with_blended: bool,
) -> usize {
    let g = *u_new.descriptor();
    smoke.par_iter_mut().for_each(|p| {
        let v_pic = sample_linear(u_new, &p.x);
        let v_flip = p.v + v_pic - sample_linear(u_old, &p.x);
        let blended = v_pic * (T::one() - alpha_flip) + v_flip * alpha_flip;
        let step_v = if move_with_blended { blended } else { p.v };
        p.x += step_v * dt;
        p.v = blended;
    });
    let before = smoke.len();
    smoke.retain(|p| g.in_domain(&p.x));
    before - smoke.len()
}
