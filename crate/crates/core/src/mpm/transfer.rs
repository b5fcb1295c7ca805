//! Quadratic APIC transfers and explicit grid dynamics.

use rayon::prelude::*;

use super::MpmParticle;
use crate::constitutive::MaterialModels;
use crate::error::{Result, SimError};
use crate::grid::{quadratic_weights, GridDescriptor, NodeIndex, SparseField};
use crate::linalg::{Matrix, Vector};
use crate::par::chunked_reduce;
use crate::scalar::Real;

/// Sparse MPM grid after a particle-to-grid transfer.
#[derive(Clone, Debug)]
pub struct MpmGridState<T: Real, const D: usize> {
    pub mass: SparseField<T, T, D>,
    pub momentum: SparseField<T, Vector<T, D>, D>,
    pub velocity: SparseField<T, Vector<T, D>, D>,
    pub force: SparseField<T, Vector<T, D>, D>,
}

impl<T: Real, const D: usize> MpmGridState<T, D> {
    pub fn empty(grid: GridDescriptor<T, D>) -> Self {
        Self {
            mass: SparseField::new(grid, T::zero()),
            momentum: SparseField::new(grid, Vector::zeros()),
            velocity: SparseField::new(grid, Vector::zeros()),
            force: SparseField::new(grid, Vector::zeros()),
        }
    }

    pub fn descriptor(&self) -> &GridDescriptor<T, D> {
        self.mass.descriptor()
    }

    pub fn total_mass(&self) -> T {
        self.mass
            .iter_sorted()
            .into_iter()
            .fold(T::zero(), |a, (_, m)| a + m)
    }

    pub fn total_momentum(&self) -> Vector<T, D> {
        self.momentum
            .iter_sorted()
            .into_iter()
            .fold(Vector::zeros(), |a, (_, m)| a + m)
    }

    /// Solid velocity `momentum / mass` at a node with mass.
    pub fn solid_velocity(&self, idx: NodeIndex<D>) -> Option<Vector<T, D>> {
        let m = self.mass.get_opt(idx)?;
        (m > T::zero()).then(|| self.momentum.get(idx) / m)
    }
}

/// Slip walls: grid nodes within `band` nodes of a domain side lose the
/// velocity component pointing into that side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WallBoundary {
    pub band: i32,
}

impl Default for WallBoundary {
    fn default() -> Self {
        Self { band: 2 }
    }
}

impl WallBoundary {
    pub fn apply<T: Real, const D: usize>(
        &self,
        idx: NodeIndex<D>,
        dims: &[usize; D],
        v: &mut Vector<T, D>,
    ) {
        for a in 0..D {
            if idx[a] < self.band && v[a] < T::zero() {
                v[a] = T::zero();
            }
            if idx[a] > dims[a] as i32 - 1 - self.band && v[a] > T::zero() {
                v[a] = T::zero();
            }
        }
    }
}

/// Mass and APIC momentum transfer with quadratic weights.
pub fn p2g<T: Real, const D: usize>(
    particles: &[MpmParticle<T, D>],
    grid: &GridDescriptor<T, D>,
) -> Result<MpmGridState<T, D>> {
    // stencils are computed up front so out-of-range particles surface as errors
    let stencils: Vec<_> = particles
        .par_iter()
        .map(|p| quadratic_weights(&p.x, grid))
        .collect::<Result<_>>()?;
    let (mass, momentum) = chunked_reduce(
        particles,
        || {
            (
                SparseField::<T, T, D>::new(*grid, T::zero()),
                SparseField::<T, Vector<T, D>, D>::new(*grid, Vector::zeros()),
            )
        },
        |(mass, mom), i, p| {
            stencils[i].for_each(|idx, w, _| {
                let xi = grid.node_position(idx);
                let wm = w * p.mass;
                mass.add(idx, wm);
                mom.add(idx, (p.v + p.c * (xi - p.x)) * wm);
            });
        },
        |(m0, p0), (m1, p1)| {
            m0.merge_add(&m1);
            p0.merge_add(&p1);
        },
    );
    let mut velocity = SparseField::new(*grid, Vector::zeros());
    for (idx, m) in mass.iter_sorted() {
        if m > T::zero() {
            velocity.set(idx, momentum.get(idx) / m);
        }
    }
    Ok(MpmGridState {
        mass,
        momentum,
        velocity,
        force: SparseField::new(*grid, Vector::zeros()),
    })
}

/// Weak-form elastic force plus gravity: `fᵢ = −Σₚ V⁰ₚ P Fᵀ ∇wᵢₚ + mᵢ g`.
pub fn grid_forces<T: Real, const D: usize>(
    particles: &[MpmParticle<T, D>],
    models: &MaterialModels<T>,
    gravity: &Vector<T, D>,
    state: &mut MpmGridState<T, D>,
) -> Result<()> {
    let grid = *state.descriptor();
    let stress: Vec<Matrix<T, D>> = particles
        .par_iter()
        .enumerate()
        .map(|(id, p)| {
            models
                .stress(p.model, &p.f)
                .map(|pk| pk * p.f.transpose() * p.volume0)
                .map_err(|e| e.with_particle(id))
        })
        .collect::<Result<_>>()?;
    let mut force = chunked_reduce(
        particles,
        || SparseField::<T, Vector<T, D>, D>::new(grid, Vector::zeros()),
        |force, i, p| {
            // p2g already validated every stencil
            let st = quadratic_weights(&p.x, &grid).expect("stencil validated in p2g");
            st.for_each(|idx, _, grad| force.add(idx, -(stress[i] * grad)));
        },
        |a, b| a.merge_add(&b),
    );
    for (idx, m) in state.mass.iter_sorted() {
        force.add(idx, *gravity * m);
    }
    state.force = force;
    Ok(())
}

/// Explicit velocity update followed by wall conditions.
pub fn grid_update<T: Real, const D: usize>(
    state: &mut MpmGridState<T, D>,
    dt: T,
    walls: &WallBoundary,
) {
    let dims = state.descriptor().dims;
    let mut velocity = state.velocity.like(Vector::zeros());
    for (idx, m) in state.mass.iter_sorted() {
        if m > T::zero() {
            let mut v = (state.momentum.get(idx) + state.force.get(idx) * dt) / m;
            walls.apply(idx, &dims, &mut v);
            velocity.set(idx, v);
        }
    }
    state.velocity = velocity;
}

/// APIC grid-to-particle transfer, deformation update and advection.
pub fn g2p<T: Real, const D: usize>(
    state: &MpmGridState<T, D>,
    particles: &mut [MpmParticle<T, D>],
    dt: T,
) -> Result<()> {
    let grid = *state.descriptor();
    let apic_scale = T::lit(4.0) / (grid.dx * grid.dx);
    particles
        .par_iter_mut()
        .enumerate()
        .try_for_each(|(id, p)| {
            let st = quadratic_weights(&p.x, &grid)?;
            let mut v = Vector::<T, D>::zeros();
            let mut b = Matrix::<T, D>::zeros();
            let mut grad_v = Matrix::<T, D>::zeros();
            st.for_each(|idx, w, grad| {
                let vi = state.velocity.get(idx);
                v += vi * w;
                b += vi * (grid.node_position(idx) - p.x).transpose() * w;
                grad_v += vi * grad.transpose();
            });
            p.v = v;
            p.c = b * apic_scale;
            p.f = (Matrix::<T, D>::identity() + grad_v * dt) * p.f;
            p.x += v * dt;
            if p.x.iter().any(|c| !c.is_finite()) {
                return Err(SimError::NonFinite {
                    what: "particle position",
                    id,
                });
            }
            Ok(())
        })
}
