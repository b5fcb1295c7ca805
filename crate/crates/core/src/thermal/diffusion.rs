//! Backward-Euler heat diffusion with level-set switched coefficients.

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{DenseField, GridDescriptor, NodeIndex, SparseField};
use crate::scalar::Real;
use crate::solver::{conjugate_gradient, CgReport, CgSettings, LinearOperator};

/// Air and solid thermal constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalConstants<T> {
    pub k_air: T,
    pub k_solid: T,
    pub cp_air: T,
    pub cp_solid: T,
    pub rho_air: T,
    pub rho_solid: T,
}

/// Conductivity and volumetric heat capacity per cell. `φ < 0` is solid.
pub fn heaviside_coefficients<T: Real, const D: usize>(
    phi: &SparseField<T, T, D>,
    c: &ThermalConstants<T>,
) -> (DenseField<T, T, D>, DenseField<T, T, D>) {
    let g = *phi.descriptor();
    let k = DenseField::from_fn(g, |i| if phi.get(i) < T::zero() { c.k_solid } else { c.k_air });
    let rho_cp = DenseField::from_fn(g, |i| {
        if phi.get(i) < T::zero() {
            c.rho_solid * c.cp_solid
        } else {
            c.rho_air * c.cp_air
        }
    });
    (k, rho_cp)
}

fn harmonic<T: Real>(a: T, b: T) -> T {
    let s = a + b;
    if s > T::zero() {
        (a + a) * b / s
    } else {
        T::zero()
    }
}

struct DiffusionOperator<'a, T: Real, const D: usize> {
    cells: GridDescriptor<T, D>,
    k: &'a DenseField<T, T, D>,
    rho_cp: &'a DenseField<T, T, D>,
    fixed: &'a DenseField<T, Option<T>, D>,
    unknowns: Vec<NodeIndex<D>>,
    slot: Vec<usize>,
    inv_dt: T,
}

impl<T: Real, const D: usize> DiffusionOperator<'_, T, D> {
    fn neighbors(&self, c: NodeIndex<D>, mut f: impl FnMut(NodeIndex<D>, T)) {
        let inv_dx2 = T::one() / (self.cells.dx * self.cells.dx);
        for a in 0..D {
            for d in [-1, 1] {
                let mut n = c;
                n[a] += d;
                if self.cells.contains(n) {
                    f(n, harmonic(self.k.get(c), self.k.get(n)) * inv_dx2);
                }
            }
        }
    }
}

impl<T: Real, const D: usize> LinearOperator<T> for DiffusionOperator<'_, T, D> {
    fn dim(&self) -> usize {
        self.unknowns.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().zip(self.unknowns.par_iter()).enumerate().for_each(|(s, (out, &c))| {
            let mut acc = self.rho_cp.get(c) * self.inv_dt * x[s];
            self.neighbors(c, |n, w| {
                let xn = match self.slot[self.cells.linear_index(n)] {
                    usize::MAX => T::zero(),
                    j => x[j],
                };
                acc += w * (x[s] - xn);
            });
            *out = acc;
        });
    }

    fn diagonal(&self) -> Vec<T> {
        self.unknowns
            .iter()
            .map(|&c| {
                let mut d = self.rho_cp.get(c) * self.inv_dt;
                self.neighbors(c, |_, w| d += w);
                d
            })
            .collect()
    }
}

/// Solves `ρc_p (T' − T)/dt = ∇·(K∇T')` with insulated lattice walls. Cells
/// with a `fixed` value are held at that temperature.
pub fn diffusion_solve<T: Real, const D: usize>(
    temperature: &DenseField<T, T, D>,
    k: &DenseField<T, T, D>,
    rho_cp: &DenseField<T, T, D>,
    fixed: &DenseField<T, Option<T>, D>,
    dt: T,
    settings: CgSettings<T>,
) -> Result<(DenseField<T, T, D>, CgReport)> {
    let cells = *temperature.descriptor();
    let mut slot = vec![usize::MAX; cells.node_count()];
    let mut unknowns = Vec::new();
    for lin in 0..cells.node_count() {
        if fixed.values()[lin].is_none() {
            slot[lin] = unknowns.len();
            unknowns.push(cells.node_index(lin));
        }
    }
    let op = DiffusionOperator {
        cells,
        k,
        rho_cp,
        fixed,
        unknowns,
        slot,
        inv_dt: T::one() / dt,
    };
    let b: Vec<T> = op
        .unknowns
        .iter()
        .map(|&c| {
            let mut rhs = rho_cp.get(c) * op.inv_dt * temperature.get(c);
            op.neighbors(c, |n, w| {
                if let Some(tf) = op.fixed.get(n) {
                    rhs += w * tf;
                }
            });
            rhs
        })
        .collect();
    let mut x: Vec<T> = op.unknowns.iter().map(|&c| temperature.get(c)).collect();
    let report = conjugate_gradient(&op, &b, &mut x, settings, "diffusion")?;
    let mut out = DenseField::from_fn(cells, |i| fixed.get(i).unwrap_or(T::zero()));
    for (s, &c) in op.unknowns.iter().enumerate() {
        out.set(c, x[s]);
    }
    Ok((out, report))
}

/// Dense copy of the diffusion matrix over all cells (no fixed cells).
pub fn assemble_diffusion_matrix<T: Real, const D: usize>(
    k: &DenseField<T, T, D>,
    rho_cp: &DenseField<T, T, D>,
    dt: T,
) -> Vec<Vec<T>> {
    let cells = *k.descriptor();
    let fixed = DenseField::filled(cells, None);
    let n = cells.node_count();
    let op = DiffusionOperator {
        cells,
        k,
        rho_cp,
        fixed: &fixed,
        unknowns: (0..n).map(|l| cells.node_index(l)).collect(),
        slot: (0..n).collect(),
        inv_dt: T::one() / dt,
    };
    let mut rows = vec![vec![T::zero(); n]; n];
    let mut e = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        op.apply(&e, &mut col);
        e[j] = T::zero();
        for i in 0..n {
            rows[i][j] = col[i];
        }
    }
    rows
}
