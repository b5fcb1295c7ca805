//! Uniform-lattice field storage, interpolation kernels and particle hashing.

mod dense;
mod descriptor;
mod hash;
mod kernels;
mod sparse;

pub use dense::DenseField;
pub use descriptor::{GridDescriptor, NodeIndex, NodeSite};
pub use hash::SpatialHash;
pub use kernels::{
    clamp_to_stencil_region, linear_weights, linear_weights_clamped, quadratic_weights, KernelKind, Stencil,
};
pub use sparse::SparseField;

/// Iterates every offset in `{0..width}^D` with axis 0 varying fastest.
pub(crate) fn for_each_offset<const D: usize>(width: usize, mut f: impl FnMut([i32; D])) {
    let total = width.pow(D as u32);
    for n in 0..total {
        let mut rem = n;
        let mut off = [0i32; D];
        for o in off.iter_mut() {
            *o = (rem % width) as i32;
            rem /= width;
        }
        f(off);
    }
}

/// Offsets of the 3^D neighborhood `{-1, 0, 1}^D`.
pub(crate) fn neighborhood_offsets<const D: usize>() -> Vec<[i32; D]> {
    let mut out = Vec::with_capacity(3usize.pow(D as u32));
    for_each_offset::<D>(3, |o| out.push(o.map(|v| v - 1)));
    out
}

/// Visits every index in the inclusive box `lo..=hi`, axis 0 fastest.
/// Does nothing when the box is empty along any axis.
pub(crate) fn for_each_in_box<const D: usize>(
    lo: [i32; D],
    hi: [i32; D],
    mut f: impl FnMut([i32; D]),
) {
    if (0..D).any(|a| lo[a] > hi[a]) {
        return;
    }
    let mut idx = lo;
    'outer: loop {
        f(idx);
        for a in 0..D {
            idx[a] += 1;
            if idx[a] <= hi[a] {
                continue 'outer;
            }
            idx[a] = lo[a];
        }
        return;
    }
}
