//! Linear APIC temperature transfers and narrow-band advection.

use rayon::prelude::*;

use crate::fluid::{backtrace_rk3, interpolate_monotonic_cubic, sample_linear};
use crate::grid::{linear_weights_clamped, DenseField, GridDescriptor, SparseField};
use crate::linalg::Vector;
use crate::par::chunked_reduce;
use crate::scalar::Real;

/// Heat-carrying sample of a particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalSample<T: Real, const D: usize> {
    pub x: Vector<T, D>,
    pub mass: T,
    pub temperature: T,
    pub temp_grad: Vector<T, D>,
}

/// Accumulated `m` and `m·T` per cell.
#[derive(Clone, Debug)]
pub struct TemperatureTransfer<T: Real, const D: usize> {
    pub mass: SparseField<T, T, D>,
    pub mass_temperature: SparseField<T, T, D>,
}

impl<T: Real, const D: usize> TemperatureTransfer<T, D> {
    pub fn temperature(&self, idx: [i32; D]) -> Option<T> {
        let m = self.mass.get_opt(idx)?;
        (m > T::zero()).then(|| self.mass_temperature.get(idx) / m)
    }

    /// Sum of two transfers on the same lattice.
    pub fn combined(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.mass.merge_add(&other.mass);
        out.mass_temperature.merge_add(&other.mass_temperature);
        out
    }

    /// `Σ m·T` over the lattice.
    pub fn total(&self) -> T {
        self.mass_temperature
            .iter_sorted()
            .into_iter()
            .fold(T::zero(), |a, (_, v)| a + v)
    }
}

/// `mᵢTᵢ = Σₚ mₚ Nᵢ(xₚ)(Tₚ + (xᵢ − xₚ)·∇Tₚ)` with linear weights.
pub fn temperature_p2g<T: Real, const D: usize>(
    samples: &[ThermalSample<T, D>],
    cells: &GridDescriptor<T, D>,
) -> TemperatureTransfer<T, D> {
    let (mass, mass_temperature) = chunked_reduce(
        samples,
        || {
            (
                SparseField::<T, T, D>::new(*cells, T::zero()),
                SparseField::<T, T, D>::new(*cells, T::zero()),
            )
        },
        |(m, mt), _, s| {
            let st = linear_weights_clamped(&s.x, cells).expect("clamped into the stencil region");
            st.for_each(|idx, w, _| {
                if w > T::zero() {
                    let wm = w * s.mass;
                    let affine = (cells.node_position(idx) - s.x).dot(&s.temp_grad);
                    m.add(idx, wm);
                    mt.add(idx, wm * (s.temperature + affine));
                }
            });
        },
        |(m0, t0), (m1, t1)| {
            m0.merge_add(&m1);
            t0.merge_add(&t1);
        },
    );
    TemperatureTransfer {
        mass,
        mass_temperature,
    }
}

/// Particle temperature and gradient from the grid.
pub fn temperature_g2p<T: Real, const D: usize>(
    field: &DenseField<T, T, D>,
    x: &Vector<T, D>,
) -> (T, Vector<T, D>) {
    let g = field.descriptor();
    let st = linear_weights_clamped(x, g).expect("clamped into the stencil region");
    let mut t = T::zero();
    let mut grad = Vector::<T, D>::zeros();
    st.for_each(|idx, w, dw| {
        let v = field.get(idx);
        t += v * w;
        grad += dw * v;
    });
    (t, grad)
}

/// `T^A`: particle values where particles deposited mass, semi-Lagrangian
/// elsewhere. Backtraces that leave the domain read `t_bar`.
pub fn advect_temperature<T: Real, const D: usize>(
    temperature: &DenseField<T, T, D>,
    u: &DenseField<T, Vector<T, D>, D>,
    particles: &TemperatureTransfer<T, D>,
    t_bar: T,
    dt: T,
) -> DenseField<T, T, D> {
    let g = *temperature.descriptor();
    let values: Vec<T> = (0..g.node_count())
        .into_par_iter()
        .map(|lin| {
            let idx = g.node_index(lin);
            if let Some(t) = particles.temperature(idx) {
                return t;
            }
            let x = g.node_position(idx);
            let up = backtrace_rk3(&x, dt, |y| sample_linear(u, y));
            if !g.in_domain(&up) {
                return t_bar;
            }
            interpolate_monotonic_cubic(temperature, &up)
        })
        .collect();
    DenseField::from_vec(g, values)
}

/// Solid cells take the solid temperature, others keep the fluid value.
pub fn merge_temperatures<T: Real, const D: usize>(
    fluid: &DenseField<T, T, D>,
    solid: &TemperatureTransfer<T, D>,
    solid_mask: &DenseField<T, bool, D>,
) -> DenseField<T, T, D> {
    let g = *fluid.descriptor();
    DenseField::from_fn(g, |idx| {
        if solid_mask.get(idx) {
            solid.temperature(idx).unwrap_or_else(|| fluid.get(idx))
        } else {
            fluid.get(idx)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells() -> GridDescriptor<f64, 2> {
        GridDescriptor::cell_centers(Vector::<f64, 2>::zeros(), 0.25, [8, 8]).unwrap()
    }

    fn sample(x: Vector<f64, 2>, t: f64) -> ThermalSample<f64, 2> {
        ThermalSample {
            x,
            mass: 1.0,
            temperature: t,
            temp_grad: Vector::<f64, 2>::zeros(),
        }
    }

    #[test]
    fn particle_on_node() {
        let g = cells();
        let tr = temperature_p2g(&[sample(g.node_position([3, 3]), 640.0)], &g);
        assert_eq!(tr.temperature([3, 3]), Some(640.0));
        assert_eq!(tr.temperature([4, 3]), None);
    }

    #[test]
    fn g2p_reproduces_affine() {
        let g = cells();
        let b = Vector::<f64, 2>::new(3.0, -2.0);
        let f = DenseField::from_fn(g, |i| 300.0 + g.node_position(i).dot(&b));
        let x = Vector::<f64, 2>::new(0.77, 1.31);
        let (t, grad) = temperature_g2p(&f, &x);
        assert!((t - (300.0 + x.dot(&b))).abs() < 1e-10);
        assert!((grad - b).norm() < 1e-10);
    }

    #[test]
    fn still_air_is_unchanged() {
        let g = cells();
        let f = DenseField::from_fn(g, |i| 300.0 + i[0] as f64);
        let u = DenseField::filled(crate::fluid::corner_grid(&g), Vector::<f64, 2>::zeros());
        let none = temperature_p2g(&[], &g);
        let out = advect_temperature(&f, &u, &none, 298.0, 0.1);
        assert_eq!(out, f);
    }

    #[test]
    fn merge_rules() {
        let g = cells();
        let fluid = DenseField::filled(g, 300.0);
        let tr = temperature_p2g(&[sample(g.node_position([2, 2]), 500.0)], &g);
        let none = DenseField::filled(g, false);
        assert_eq!(merge_temperatures(&fluid, &tr, &none), fluid);
        let mut mask = none.clone();
        mask.set([2, 2], true);
        let m = merge_temperatures(&fluid, &tr, &mask);
        assert_eq!(m.get([2, 2]), 500.0);
        assert_eq!(m.get([3, 2]), 300.0);
    }
}
