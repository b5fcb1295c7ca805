//! Pressure projection on nodal velocities with cell-centered pressure.
//!
//! Face velocities are averages of the face's corner nodes. The discrete
//! divergence `D` maps corner velocities to fluid cells, and the velocity
//! correction uses `Dᵀ`, so the pressure matrix `D Dᵀ` is symmetric.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::labels::{classify_face, label_at, CellLabel, Face};
use crate::error::{Result, SimError};
use crate::grid::{for_each_offset, DenseField, GridDescriptor, NodeIndex};
use crate::linalg::Vector;
use crate::scalar::Real;
use crate::solver::{conjugate_gradient, CgReport, CgSettings, IncompleteCholesky, LinearOperator};

const NOT_FLUID: usize = usize::MAX;

/// Cell-to-corner lattice (one more node per axis).
pub fn corner_grid<T: Real, const D: usize>(cells: &GridDescriptor<T, D>) -> GridDescriptor<T, D> {
    GridDescriptor {
        dims: cells.dims.map(|n| n + 1),
        site: crate::grid::NodeSite::CellCorner,
        ..*cells
    }
}

/// Mean of the given axis component over the corners of a cell face.
fn face_average<T: Real, const D: usize>(
    u: &DenseField<T, Vector<T, D>, D>,
    cell: NodeIndex<D>,
    axis: usize,
    side: i32,
) -> T {
    let mut sum = T::zero();
    let mut n = 0usize;
    for_each_offset::<D>(2, |off| {
        if off[axis] != side {
            return;
        }
        let mut idx = cell;
        for a in 0..D {
            idx[a] += off[a];
        }
        sum += u.get(idx)[axis];
        n += 1;
    });
    sum / T::from_usize_lossy(n)
}

/// Discrete divergence at each fluid cell, zero elsewhere.
pub fn divergence<T: Real, const D: usize>(
    u: &DenseField<T, Vector<T, D>, D>,
    labels: &DenseField<T, CellLabel, D>,
    solid_velocity: &DenseField<T, Vector<T, D>, D>,
) -> DenseField<T, T, D> {
    let cells = *labels.descriptor();
    let values: Vec<T> = (0..cells.node_count())
        .into_par_iter()
        .map(|lin| {
            let c = cells.node_index(lin);
            if labels.get(c) != CellLabel::Fluid {
                return T::zero();
            }
            let mut div = T::zero();
            for a in 0..D {
                let mut lo = c;
                lo[a] -= 1;
                for (side, face_lo, sign) in [(0, lo, -T::one()), (1, c, T::one())] {
                    let flux = match classify_face(labels, solid_velocity, face_lo, a) {
                        Face::Free => face_average(u, c, a, side),
                        Face::Prescribed(v) => v,
                        Face::Inactive => T::zero(),
                    };
                    div += sign * flux;
                }
            }
            div / cells.dx
        })
        .collect();
    DenseField::from_vec(cells, values)
}

/// `D Dᵀ` over the fluid cells of one labeling. Depends only on the labels,
/// so it can be reused while they stay unchanged.
#[derive(Clone, Debug)]
pub struct PressureSystem<T: Real, const D: usize> {
    labels: DenseField<T, CellLabel, D>,
    corners: GridDescriptor<T, D>,
    fluid: Vec<NodeIndex<D>>,
    /// Unknown number per cell, `NOT_FLUID` for other cells.
    slot: Vec<usize>,
    /// Whether face `(lo, axis)` is free, for `lo` in `[-1, dims]` per axis.
    free: Vec<bool>,
    /// `D Dᵀ` in compressed rows.
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
    factor: IncompleteCholesky<T>,
    /// Slots of each connected fluid region and whether it touches an open wall.
    components: Vec<(Vec<usize>, bool)>,
}

impl<T: Real, const D: usize> PressureSystem<T, D> {
    pub fn new(labels: &DenseField<T, CellLabel, D>) -> Self {
        let cells = *labels.descriptor();
        // face freedom does not depend on solid velocities
        let solid_velocity = DenseField::filled(cells, Vector::<T, D>::zeros());
        let mut slot = vec![NOT_FLUID; cells.node_count()];
        let mut fluid = Vec::new();
        for (lin, l) in labels.values().iter().enumerate() {
            if *l == CellLabel::Fluid {
                slot[lin] = fluid.len();
                fluid.push(cells.node_index(lin));
            }
        }
        let ext = cells.dims.map(|n| n + 2);
        let total: usize = ext.iter().product();
        let mut free = vec![false; total * D];
        for (lin, f) in free.chunks_exact_mut(D).enumerate() {
            let mut lo = [0i32; D];
            let mut rem = lin;
            for b in 0..D {
                lo[b] = (rem % ext[b]) as i32 - 1;
                rem /= ext[b];
            }
            for (a, v) in f.iter_mut().enumerate() {
                *v = classify_face(labels, &solid_velocity, lo, a) == Face::Free;
            }
        }
        let mut op = Self {
            labels: labels.clone(),
            corners: corner_grid(&cells),
            fluid,
            slot,
            free,
            row_start: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
            factor: IncompleteCholesky::default(),
            components: Vec::new(),
        };
        op.assemble();
        op.components = op.find_components();
        op
    }

    /// Whether this system was built for `labels`.
    pub fn matches(&self, labels: &DenseField<T, CellLabel, D>) -> bool {
        self.labels.descriptor() == labels.descriptor() && self.labels.values() == labels.values()
    }

    pub fn unknowns(&self) -> usize {
        self.fluid.len()
    }

    fn slot_of(&self, c: NodeIndex<D>) -> Option<usize> {
        if !self.cells().contains(c) {
            return None;
        }
        match self.slot[self.cells().linear_index(c)] {
            NOT_FLUID => None,
            s => Some(s),
        }
    }

    /// Row `c` of `D Dᵀ`: each free face of `c` spreads over its corners,
    /// and each corner gathers from the free faces it touches.
    fn assemble(&mut self) {
        let k = self.face_weight();
        let mut row_start = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut entries: Vec<(usize, T)> = Vec::new();
        for &c in &self.fluid {
            entries.clear();
            for a in 0..D {
                for side in [0, 1] {
                    let mut face = c;
                    face[a] -= 1 - side;
                    if !self.is_free(face, a) {
                        continue;
                    }
                    let sign = if side == 0 { -T::one() } else { T::one() };
                    let coef = sign * k;
                    for_each_offset::<D>(2, |off| {
                        if off[a] != side {
                            return;
                        }
                        let mut n = c;
                        for b in 0..D {
                            n[b] += off[b];
                        }
                        for_each_offset::<D>(2, |off2| {
                            if off2[a] != 0 {
                                return;
                            }
                            let mut minus = n;
                            for b in 0..D {
                                minus[b] -= if b == a { 1 } else { off2[b] };
                            }
                            if !self.is_free(minus, a) {
                                return;
                            }
                            let mut plus = minus;
                            plus[a] += 1;
                            if let Some(sm) = self.slot_of(minus) {
                                entries.push((sm, coef * k));
                            }
                            if let Some(sp) = self.slot_of(plus) {
                                entries.push((sp, -coef * k));
                            }
                        });
                    });
                }
            }
            entries.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < entries.len() {
                let col = entries[i].0;
                let mut v = T::zero();
                while i < entries.len() && entries[i].0 == col {
                    v += entries[i].1;
                    i += 1;
                }
                if v != T::zero() {
                    cols.push(col);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        self.row_start = row_start;
        self.cols = cols;
        self.vals = vals;
        self.factor = IncompleteCholesky::factor(&self.row_start, &self.cols, &self.vals);
    }

    fn is_free(&self, lo: NodeIndex<D>, axis: usize) -> bool {
        let dims = self.cells().dims;
        let mut lin = 0usize;
        for b in (0..D).rev() {
            let i = lo[b] + 1;
            if i < 0 || i as usize >= dims[b] + 2 {
                // both sides lie outside the lattice
                return false;
            }
            lin = lin * (dims[b] + 2) + i as usize;
        }
        self.free[lin * D + axis]
    }

    fn cells(&self) -> &GridDescriptor<T, D> {
        self.labels.descriptor()
    }

    fn q_at(&self, q: &[T], c: NodeIndex<D>) -> T {
        if !self.cells().contains(c) {
            return T::zero();
        }
        match self.slot[self.cells().linear_index(c)] {
            NOT_FLUID => T::zero(),
            s => q[s],
        }
    }

    fn face_weight(&self) -> T {
        T::one() / (self.cells().dx * T::from_usize_lossy(1 << (D - 1)))
    }

    /// Velocity correction `Dᵀ q` at every corner node.
    fn transpose_apply(&self, q: &[T]) -> DenseField<T, Vector<T, D>, D> {
        let k = self.face_weight();
        let values: Vec<Vector<T, D>> = (0..self.corners.node_count())
            .into_par_iter()
            .map(|lin| {
                let n = self.corners.node_index(lin);
                Vector::<T, D>::from_fn(|a, _| {
                    let mut acc = T::zero();
                    // faces normal to `a` that touch this corner
                    for_each_offset::<D>(2, |off| {
                        if off[a] != 0 {
                            return;
                        }
                        let mut minus = n;
                        for b in 0..D {
                            minus[b] -= if b == a { 1 } else { off[b] };
                        }
                        if !self.is_free(minus, a) {
                            return;
                        }
                        let mut plus = minus;
                        plus[a] += 1;
                        acc += self.q_at(q, minus) - self.q_at(q, plus);
                    });
                    acc * k
                })
            })
            .collect();
        DenseField::from_vec(self.corners, values)
    }

    /// Linear part of the divergence over fluid cells.
    #[cfg(test)]
    fn divergence_apply(&self, w: &DenseField<T, Vector<T, D>, D>, y: &mut [T]) {
        let dx = self.cells().dx;
        y.par_iter_mut().zip(self.fluid.par_iter()).for_each(|(out, &c)| {
            let mut div = T::zero();
            for a in 0..D {
                let mut lo = c;
                lo[a] -= 1;
                if self.is_free(lo, a) {
                    div -= face_average(w, c, a, 0);
                }
                if self.is_free(c, a) {
                    div += face_average(w, c, a, 1);
                }
            }
            *out = div / dx;
        });
    }

    #[cfg(test)]
    fn free_faces(&self, c: NodeIndex<D>) -> usize {
        let mut n = 0;
        for a in 0..D {
            let mut lo = c;
            lo[a] -= 1;
            for f in [lo, c] {
                if self.is_free(f, a) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Fluid components as lists of slots, with whether each touches an open wall.
    fn find_components(&self) -> Vec<(Vec<usize>, bool)> {
        let mut seen = vec![false; self.fluid.len()];
        let mut out = Vec::new();
        for start in 0..self.fluid.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut members = vec![];
            let mut open = false;
            let mut queue = VecDeque::from([start]);
            while let Some(s) = queue.pop_front() {
                members.push(s);
                let c = self.fluid[s];
                for a in 0..D {
                    for d in [-1, 1] {
                        let mut nb = c;
                        nb[a] += d;
                        match label_at(&self.labels, nb) {
                            CellLabel::DirichletWall => open = true,
                            CellLabel::Fluid => {
                                let ns = self.slot[self.cells().linear_index(nb)];
                                if !seen[ns] {
                                    seen[ns] = true;
                                    queue.push_back(ns);
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
            out.push((members, open));
        }
        out
    }
}

impl<T: Real, const D: usize> LinearOperator<T> for PressureSystem<T, D> {
    fn dim(&self) -> usize {
        self.fluid.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().enumerate().for_each(|(i, out)| {
            let range = self.row_start[i]..self.row_start[i + 1];
            *out = self.cols[range.clone()]
                .iter()
                .zip(&self.vals[range])
                .fold(T::zero(), |acc, (&j, &v)| acc + v * x[j]);
        });
    }

    fn diagonal(&self) -> Vec<T> {
        (0..self.fluid.len())
            .map(|i| {
                let range = self.row_start[i]..self.row_start[i + 1];
                self.cols[range.clone()]
                    .iter()
                    .zip(&self.vals[range])
                    .find(|(&j, _)| j == i)
                    .map_or(T::zero(), |(_, &v)| v)
            })
            .collect()
    }

    fn incomplete_cholesky(&self) -> Option<&IncompleteCholesky<T>> {
        Some(&self.factor)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectionSettings<T> {
    pub tol: T,
    pub max_iter: usize,
}

#[derive(Clone, Debug)]
pub struct ProjectionResult<T: Real, const D: usize> {
    /// Pressure at cell centers, zero outside fluid cells.
    pub pressure: DenseField<T, T, D>,
    pub report: CgReport,
}

/// Makes `u` discretely divergence free on fluid cells.
pub fn pressure_solve<T: Real, const D: usize>(
    u: &mut DenseField<T, Vector<T, D>, D>,
    labels: &DenseField<T, CellLabel, D>,
    solid_velocity: &DenseField<T, Vector<T, D>, D>,
    rho: T,
    dt: T,
    settings: ProjectionSettings<T>,
) -> Result<ProjectionResult<T, D>> {
    PressureSystem::new(labels).solve(u, solid_velocity, rho, dt, settings)
}

impl<T: Real, const D: usize> PressureSystem<T, D> {
    /// [`pressure_solve`] with this system's labels.
    pub fn solve(
        &self,
        u: &mut DenseField<T, Vector<T, D>, D>,
        solid_velocity: &DenseField<T, Vector<T, D>, D>,
        rho: T,
        dt: T,
        settings: ProjectionSettings<T>,
    ) -> Result<ProjectionResult<T, D>> {
        let cells = *self.labels.descriptor();
        let div = divergence(u, &self.labels, solid_velocity);
        let mut b: Vec<T> = self.fluid.iter().map(|&c| -div.get(c)).collect();

        let any_open = self.components.iter().any(|(_, open)| *open);
        for (members, open) in &self.components {
            if *open {
                continue;
            }
            let sum = members.iter().fold(T::zero(), |s, &i| s + b[i]);
            let scale = members.iter().fold(T::zero(), |s, &i| s + b[i].abs());
            let net = if scale > T::zero() { sum / scale } else { T::zero() };
            if !any_open && net.abs() > T::lit(1e-6) {
                return Err(SimError::Incompatible { net: sum.as_f64() });
            }
            if net != T::zero() {
                log::debug!("closed fluid pocket of {} cells: removing net flux {:e}", members.len(), sum.as_f64());
            }
            let mean = sum / T::from_usize_lossy(members.len());
            for &i in members {
                b[i] -= mean;
            }
        }

        let mut q = vec![T::zero(); self.dim()];
        let report = conjugate_gradient(
            self,
            &b,
            &mut q,
            CgSettings {
                tol: settings.tol,
                max_iter: settings.max_iter,
            },
            "pressure",
        )?;
        let correction = self.transpose_apply(&q);
        for (v, c) in u.values_mut().iter_mut().zip(correction.values()) {
            *v += *c;
        }
        let mut pressure = DenseField::filled(cells, T::zero());
        let scale = rho / dt;
        for (s, &c) in self.fluid.iter().enumerate() {
            pressure.set(c, q[s] * scale);
        }
        Ok(ProjectionResult { pressure, report })
    }
}

/// Dense copy of the pressure matrix, for verification.
pub fn assemble_pressure_matrix<T: Real, const D: usize>(
    labels: &DenseField<T, CellLabel, D>,
    solid_velocity: &DenseField<T, Vector<T, D>, D>,
) -> (Vec<NodeIndex<D>>, Vec<Vec<T>>) {
    let _ = solid_velocity;
    let op = PressureSystem::new(labels);
    let n = op.dim();
    let mut cols = vec![vec![T::zero(); n]; n];
    let mut e = vec![T::zero(); n];
    for (j, col) in cols.iter_mut().enumerate() {
        e[j] = T::one();
        op.apply(&e, col);
        e[j] = T::zero();
    }
    // transpose columns into rows
    let rows = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    (op.fluid.clone(), rows)
}

/// Sets velocities at corners that no fluid cell touches: solid-adjacent
/// corners take the mean solid velocity, then lattice-boundary corners copy
/// their inward neighbor and the floor loses its vertical component.
pub fn enforce_velocity_bcs<T: Real, const D: usize>(
    u: &mut DenseField<T, Vector<T, D>, D>,
    labels: &DenseField<T, CellLabel, D>,
    solid_velocity: &DenseField<T, Vector<T, D>, D>,
) {
    let corners = *u.descriptor();
    let up = D - 1;
    let snapshot: Vec<(usize, Vector<T, D>)> = (0..corners.node_count())
        .into_par_iter()
        .filter_map(|lin| {
            let n = corners.node_index(lin);
            let mut fluid = false;
            let mut solid_sum = Vector::<T, D>::zeros();
            let mut solid_n = 0usize;
            for_each_offset::<D>(2, |off| {
                let mut c = n;
                for a in 0..D {
                    c[a] -= off[a];
                }
                match label_at(labels, c) {
                    CellLabel::Fluid => fluid = true,
                    CellLabel::Solid => {
                        solid_sum += solid_velocity.get(c);
                        solid_n += 1;
                    }
                    _ => {}
                }
            });
            (!fluid && solid_n > 0).then(|| (lin, solid_sum / T::from_usize_lossy(solid_n)))
        })
        .collect();
    for (lin, v) in snapshot {
        u.values_mut()[lin] = v;
    }
    for lin in 0..corners.node_count() {
        let n = corners.node_index(lin);
        if !corners.is_boundary_node(n) {
            continue;
        }
        let mut inner = n;
        for a in 0..D {
            inner[a] = n[a].clamp(1, (corners.dims[a] as i32 - 2).max(1));
        }
        let mut v = u.get_clamped(inner);
        if n[up] == 0 {
            v[up] = T::zero();
        }
        u.set(n, v);
    }
}
