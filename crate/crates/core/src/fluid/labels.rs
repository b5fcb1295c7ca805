//! Pressure-cell classification and prescribed face velocities.

use crate::grid::{DenseField, GridDescriptor, NodeIndex};
use crate::linalg::Vector;
use crate::mpm::MpmGridState;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellLabel {
    #[default]
    Fluid = 0,
    Solid = 1,
    /// Open boundary with `p = 0`.
    DirichletWall = 2,
    /// Closed boundary with zero normal velocity.
    NeumannWall = 3,
}

/// Treatment of the face between two cells along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Face<T> {
    /// Velocity comes from the corner nodes.
    Free,
    /// Normal velocity is imposed.
    Prescribed(T),
    /// Neither side is fluid.
    Inactive,
}

/// Up axis of a `D`-dimensional scene.
pub const fn up_axis<const D: usize>() -> usize {
    D - 1
}

/// Closed floor, open sides and top.
pub fn default_domain_bcs<T: Real, const D: usize>(
    cells: &GridDescriptor<T, D>,
) -> DenseField<T, CellLabel, D> {
    let up = up_axis::<D>();
    DenseField::from_fn(*cells, |idx| {
        if idx[up] == 0 {
            CellLabel::NeumannWall
        } else if cells.is_boundary_node(idx) {
            CellLabel::DirichletWall
        } else {
            CellLabel::Fluid
        }
    })
}

/// Cells whose collocated MPM node carries mass become solid with velocity
/// `momentum / mass`.
pub fn mark_solid_cells<T: Real, const D: usize>(
    mpm: &MpmGridState<T, D>,
    labels: &mut DenseField<T, CellLabel, D>,
    solid_velocity: &mut DenseField<T, Vector<T, D>, D>,
) -> usize {
    let mut count = 0;
    for (idx, m) in mpm.mass.iter_sorted() {
        if m > T::zero() && labels.descriptor().contains(idx) {
            labels.set(idx, CellLabel::Solid);
            solid_velocity.set(idx, mpm.momentum.get(idx) / m);
            count += 1;
        }
    }
    count
}

/// Label lookup treating out-of-range cells as closed walls.
#[inline]
pub fn label_at<T: Real, const D: usize>(
    labels: &DenseField<T, CellLabel, D>,
    idx: NodeIndex<D>,
) -> CellLabel {
    if labels.descriptor().contains(idx) {
        labels.get(idx)
    } else {
        CellLabel::NeumannWall
    }
}

/// Face between `lo` and its `+axis` neighbor.
pub fn classify_face<T: Real, const D: usize>(
    labels: &DenseField<T, CellLabel, D>,
    solid_velocity: &DenseField<T, Vector<T, D>, D>,
    lo: NodeIndex<D>,
    axis: usize,
) -> Face<T> {
    let mut hi = lo;
    hi[axis] += 1;
    let (a, b) = (label_at(labels, lo), label_at(labels, hi));
    let other = match (a, b) {
        (CellLabel::Fluid, CellLabel::Fluid) => return Face::Free,
        (CellLabel::Fluid, o) => (o, hi),
        (o, CellLabel::Fluid) => (o, lo),
        _ => return Face::Inactive,
    };
    match other.0 {
        CellLabel::DirichletWall => Face::Free,
        CellLabel::NeumannWall => Face::Prescribed(T::zero()),
        CellLabel::Solid => Face::Prescribed(solid_velocity.get(other.1)[axis]),
        CellLabel::Fluid => unreachable!(),
    }
}
