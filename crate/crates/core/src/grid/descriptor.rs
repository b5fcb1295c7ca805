use crate::error::{Result, SimError};
use crate::linalg::Vector;
use crate::scalar::Real;

/// Integer lattice coordinate of a grid node.
pub type NodeIndex<const D: usize> = [i32; D];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeSite {
    /// Nodes at `origin + (i + 1/2)·dx`.
    CellCenter,
    /// Nodes at `origin + i·dx`.
    CellCorner,
}

/// Placement of a uniform lattice in world space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridDescriptor<T: Real, const D: usize> {
    pub origin: Vector<T, D>,
    pub dx: T,
    pub dims: [usize; D],
    pub site: NodeSite,
}

impl<T: Real, const D: usize> GridDescriptor<T, D> {
    pub fn new(origin: Vector<T, D>, dx: T, dims: [usize; D], site: NodeSite) -> Result<Self> {
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(SimError::config("dx", "cell width must be positive and finite"));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(SimError::config("dims", "every axis needs at least one node"));
        }
        if origin.iter().any(|x| !x.is_finite()) {
            return Err(SimError::config("origin", "must be finite"));
        }
        Ok(Self {
            origin,
            dx,
            dims,
            site,
        })
    }

    /// Cell-centered lattice over `cells` cells per axis.
    pub fn cell_centers(origin: Vector<T, D>, dx: T, cells: [usize; D]) -> Result<Self> {
        Self::new(origin, dx, cells, NodeSite::CellCenter)
    }

    /// Corner lattice over `cells` cells per axis (`cells + 1` nodes per axis).
    pub fn cell_corners(origin: Vector<T, D>, dx: T, cells: [usize; D]) -> Result<Self> {
        Self::new(origin, dx, cells.map(|n| n + 1), NodeSite::CellCorner)
    }

    /// Node offset from the cell corner, in cells.
    #[inline]
    pub fn site_offset(&self) -> T {
        match self.site {
            NodeSite::CellCenter => T::lit(0.5),
            NodeSite::CellCorner => T::zero(),
        }
    }

    /// Number of cells per axis spanned by this lattice.
    pub fn cells(&self) -> [usize; D] {
        match self.site {
            NodeSite::CellCenter => self.dims,
            NodeSite::CellCorner => self.dims.map(|n| n - 1),
        }
    }

    pub fn domain_min(&self) -> Vector<T, D> {
        self.origin
    }

    pub fn domain_max(&self) -> Vector<T, D> {
        let cells = self.cells();
        Vector::<T, D>::from_fn(|a, _| self.origin[a] + self.dx * T::from_usize_lossy(cells[a]))
    }

    pub fn in_domain(&self, x: &Vector<T, D>) -> bool {
        let hi = self.domain_max();
        (0..D).all(|a| x[a] >= self.origin[a] && x[a] <= hi[a])
    }

    #[inline]
    pub fn node_position(&self, idx: NodeIndex<D>) -> Vector<T, D> {
        let off = self.site_offset();
        Vector::<T, D>::from_fn(|a, _| {
            self.origin[a] + (T::lit(idx[a] as f64) + off) * self.dx
        })
    }

    /// Position in node units: node `i` sits at coordinate `i`.
    #[inline]
    pub fn node_coordinates(&self, x: &Vector<T, D>) -> Vector<T, D> {
        let off = self.site_offset();
        (x - self.origin) / self.dx - Vector::<T, D>::repeat(off)
    }

    #[inline]
    pub fn contains(&self, idx: NodeIndex<D>) -> bool {
        (0..D).all(|a| idx[a] >= 0 && (idx[a] as usize) < self.dims[a])
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// x-fastest linear offset of an in-range node.
    #[inline]
    pub fn linear_index(&self, idx: NodeIndex<D>) -> usize {
        debug_assert!(self.contains(idx), "node {idx:?} outside {:?}", self.dims);
        let mut lin = 0usize;
        for a in (0..D).rev() {
            lin = lin * self.dims[a] + idx[a] as usize;
        }
        lin
    }

    #[inline]
    pub fn node_index(&self, mut lin: usize) -> NodeIndex<D> {
        let mut idx = [0i32; D];
        for a in 0..D {
            idx[a] = (lin % self.dims[a]) as i32;
            lin /= self.dims[a];
        }
        idx
    }

    /// Whether the node lies on the outermost layer of the lattice.
    pub fn is_boundary_node(&self, idx: NodeIndex<D>) -> bool {
        (0..D).any(|a| idx[a] == 0 || idx[a] as usize == self.dims[a] - 1)
    }

    /// Nearest in-range node, componentwise clamped.
    pub fn clamp_index(&self, idx: NodeIndex<D>) -> NodeIndex<D> {
        let mut out = idx;
        for a in 0..D {
            out[a] = idx[a].clamp(0, self.dims[a] as i32 - 1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_positions_follow_site() {
        let o = Vector::<f64, 2>::new(1.0, -1.0);
        let c = GridDescriptor::cell_centers(o, 0.5, [4, 3]).unwrap();
        let k = GridDescriptor::cell_corners(o, 0.5, [4, 3]).unwrap();
        assert_eq!(c.node_position([0, 0]), Vector::<f64, 2>::new(1.25, -0.75));
        assert_eq!(k.node_position([0, 0]), o);
        assert_eq!(k.dims, [5, 4]);
        assert_eq!(c.domain_max(), k.domain_max());
    }

    #[test]
    fn linear_index_round_trip() {
        let g = GridDescriptor::cell_centers(Vector::<f64, 3>::zeros(), 1.0, [3, 4, 5]).unwrap();
        for lin in 0..g.node_count() {
            assert_eq!(g.linear_index(g.node_index(lin)), lin);
        }
        assert_eq!(g.linear_index([1, 0, 0]), 1);
        assert_eq!(g.linear_index([0, 1, 0]), 3);
    }

    #[test]
    fn rejects_bad_descriptors() {
        let o = Vector::<f64, 2>::zeros();
        assert!(GridDescriptor::cell_centers(o, 0.0, [2, 2]).is_err());
        assert!(GridDescriptor::cell_centers(o, 1.0, [0, 2]).is_err());
    }
}
