//! Union-of-spheres level set and surface particle detection.

use crate::grid::{for_each_in_box, neighborhood_offsets, GridDescriptor, SparseField, SpatialHash};
use crate::linalg::Vector;
use crate::scalar::Real;

/// Particle sphere radius `(√d/2)·dx`.
pub fn particle_radius<T: Real, const D: usize>(dx: T) -> T {
    T::from_usize_lossy(D).sqrt() * T::lit(0.5) * dx
}

/// `φ(x) = minₚ(‖x − xₚ‖ − r)` on a narrow band, `+2·dx` elsewhere.
pub fn build_particle_level_set<T: Real, const D: usize>(
    positions: &[Vector<T, D>],
    grid: &GridDescriptor<T, D>,
) -> SparseField<T, T, D> {
    let dx = grid.dx;
    let band = dx + dx;
    let r = particle_radius::<T, D>(dx);
    let reach = (band + r) / dx;
    let mut phi = SparseField::new(*grid, band);
    for x in positions {
        let fx = grid.node_coordinates(x);
        let mut lo = [0i32; D];
        let mut hi = [0i32; D];
        for a in 0..D {
            lo[a] = ((fx[a] - reach).ceil().as_f64() as i32).max(0);
            hi[a] = ((fx[a] + reach).floor().as_f64() as i32).min(grid.dims[a] as i32 - 1);
        }
        if (0..D).any(|a| lo[a] > hi[a]) {
            continue;
        }
        for_each_in_box(lo, hi, |idx| {
            let d = (grid.node_position(idx) - x).norm() - r;
            if d < band {
                let e = phi.entry(idx);
                if d < *e {
                    *e = d;
                }
            }
        });
    }
    phi
}

/// Particles with at least one empty bin among the 3^d bins around them.
/// Returned ids are sorted.
pub fn find_boundary_particles<T: Real, const D: usize>(hash: &SpatialHash<T, D>) -> Vec<usize> {
    let offsets = neighborhood_offsets::<D>();
    let mut out: Vec<usize> = Vec::new();
    for key in hash.bin_keys() {
        let exposed = offsets.iter().any(|off| {
            let mut k = key;
            for a in 0..D {
                k[a] += off[a];
            }
            !hash.is_bin_occupied(k)
        });
        if exposed {
            out.extend(hash.bin(key).iter().map(|(id, _)| *id));
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NodeSite;

    fn grid() -> GridDescriptor<f64, 2> {
        GridDescriptor::new(Vector::zeros(), 0.1, [20, 20], NodeSite::CellCenter).unwrap()
    }

    #[test]
    fn node_on_particle_and_background() {
        let g = grid();
        let x = g.node_position([10, 10]);
        let phi = build_particle_level_set(&[x], &g);
        let r = particle_radius::<f64, 2>(0.1);
        assert!((phi.get([10, 10]) + r).abs() < 1e-15);
        assert_eq!(phi.get([0, 0]), 0.2);
        assert_eq!(phi.get([10, 14]), 0.2);
    }

    #[test]
    fn two_particle_min_matches_brute_force() {
        let g = grid();
        let ps = [Vector::<f64, 2>::new(0.93, 1.01), Vector::<f64, 2>::new(1.12, 0.88)];
        let phi = build_particle_level_set(&ps, &g);
        let r = particle_radius::<f64, 2>(0.1);
        for i in 0..20 {
            for j in 0..20 {
                let n = g.node_position([i, j]);
                let brute = ps
                    .iter()
                    .map(|p| (n - p).norm() - r)
                    .fold(f64::INFINITY, f64::min)
                    .min(0.2);
                assert!((phi.get([i, j]) - brute).abs() < 1e-14, "node {i},{j}");
            }
        }
    }

    #[test]
    fn isolated_particle_is_boundary() {
        let h = SpatialHash::build(Vector::zeros(), 0.1, [(7, Vector::<f64, 2>::new(0.55, 0.55))]).unwrap();
        assert_eq!(find_boundary_particles(&h), vec![7]);
    }

    #[test]
    fn dense_block_center_is_interior() {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                pts.push((i * 5 + j, Vector::<f64, 2>::new(0.05 + 0.1 * i as f64, 0.05 + 0.1 * j as f64)));
            }
        }
        let h = SpatialHash::build(Vector::zeros(), 0.1, pts).unwrap();
        let b = find_boundary_particles(&h);
        assert!(!b.contains(&12));
        assert_eq!(b.len(), 16);
    }
}
