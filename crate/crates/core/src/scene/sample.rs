//! Initial particle sampling of scene geometry.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{IgnitionOverride, SceneConfig, ShapeConfig, ShapeKind};
use super::params::{vector, SceneParams};
use crate::constitutive::ConstitutiveModel;
use crate::error::{Result, SimError};
use crate::grid::{for_each_in_box, quadratic_weights};
use crate::ignition::IgnitionParams;
use crate::linalg::Vector;
use crate::mpm::MpmParticle;
use crate::scalar::Real;

enum Region<T: Real, const D: usize> {
    Box { lo: Vector<T, D>, hi: Vector<T, D> },
    Sphere { c: Vector<T, D>, r: T },
    Cylinder { base: Vector<T, D>, dir: Vector<T, D>, len: T, r: T },
}

impl<T: Real, const D: usize> Region<T, D> {
    fn bounds(&self) -> (Vector<T, D>, Vector<T, D>) {
        match self {
            Region::Box { lo, hi } => (*lo, *hi),
            Region::Sphere { c, r } => (c.add_scalar(-*r), c.add_scalar(*r)),
            Region::Cylinder { base, dir, len, r } => {
                let top = base + dir * *len;
                let lo = base.inf(&top).add_scalar(-*r);
                let hi = base.sup(&top).add_scalar(*r);
                (lo, hi)
            }
        }
    }

    fn contains(&self, x: &Vector<T, D>) -> bool {
        match self {
            Region::Box { lo, hi } => (0..D).all(|a| x[a] >= lo[a] && x[a] < hi[a]),
            Region::Sphere { c, r } => (x - c).norm() <= *r,
            Region::Cylinder { base, dir, len, r } => {
                let rel = x - base;
                let t = rel.dot(dir);
                t >= T::zero() && t <= *len && (rel - dir * t).norm() <= *r
            }
        }
    }

    /// Normalized distance from the center or axis, for radial fuel.
    fn radial_fraction(&self, x: &Vector<T, D>) -> Option<T> {
        match self {
            Region::Box { .. } => None,
            Region::Sphere { c, r } => Some((x - c).norm() / *r),
            Region::Cylinder { base, dir, r, .. } => {
                let rel = x - base;
                Some((rel - dir * rel.dot(dir)).norm() / *r)
            }
        }
    }
}

fn region<T: Real, const D: usize>(i: usize, kind: &ShapeKind) -> Result<Option<Region<T, D>>> {
    let f = |name: &str| format!("geometry[{i}].{name}");
    Ok(Some(match kind {
        ShapeKind::Box { min, max } => {
            let lo = vector(&f("min"), min)?;
            let hi = vector(&f("max"), max)?;
            if (0..D).any(|a| !(hi[a] > lo[a])) {
                return Err(SimError::config(f("max"), "must exceed min on every axis"));
            }
            Region::Box { lo, hi }
        }
        ShapeKind::Sphere { center, radius } => {
            if !(*radius > 0.0) {
                return Err(SimError::config(f("radius"), "must be positive"));
            }
            Region::Sphere {
                c: vector(&f("center"), center)?,
                r: T::lit(*radius),
            }
        }
        ShapeKind::Cylinder { base, axis, radius } => {
            let a: Vector<T, D> = vector(&f("axis"), axis)?;
            let len = a.norm();
            if !(len > T::zero()) || !(*radius > 0.0) {
                return Err(SimError::config(f("axis"), "axis and radius must be non-zero"));
            }
            Region::Cylinder {
                base: vector(&f("base"), base)?,
                dir: a / len,
                len,
                r: T::lit(*radius),
            }
        }
        ShapeKind::Points { .. } => return Ok(None),
    }))
}

fn override_params<T: Real>(
    base: &IgnitionParams<T>,
    o: &IgnitionOverride,
) -> IgnitionParams<T> {
    let pick = |v: Option<f64>, d: T| v.map(T::lit).unwrap_or(d);
    IgnitionParams {
        f0: pick(o.f0, base.f0),
        f_min: pick(o.f_min, base.f_min),
        gamma: pick(o.gamma, base.gamma),
        beta: pick(o.beta, base.beta),
        t_ignition: pick(o.t_ignition, base.t_ignition),
        t_max: pick(o.t_max, base.t_max),
        c_flame: pick(o.c_flame, base.c_flame),
    }
}

fn read_points<T: Real, const D: usize>(path: &Path, shape: usize) -> Result<Vec<Vector<T, D>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| SimError::config(format!("geometry[{shape}].file"), format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| SimError::config(format!("geometry[{shape}].file"), e.to_string()))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| {
                SimError::config(format!("geometry[{shape}].file"), format!("row {}: {e}", row + 1))
            })?;
        out.push(vector(&format!("geometry[{shape}].file row {}", row + 1), &vals)?);
    }
    Ok(out)
}

/// Samples every shape and appends per-shape ignition constants to
/// `params.ignition`.
pub fn sample_geometry<T: Real, const D: usize>(
    cfg: &SceneConfig,
    params: &mut SceneParams<T, D>,
    base_dir: &Path,
) -> Result<Vec<MpmParticle<T, D>>> {
    if cfg.geometry.is_empty() {
        return Err(SimError::config("geometry", "scene has no shapes"));
    }
    let dx = params.cells.dx;
    let mut particles = Vec::new();
    for (i, shape) in cfg.geometry.iter().enumerate() {
        let material = match &shape.ignition {
            Some(o) => {
                let p = override_params(&params.ignition[0], o);
                p.validate()?;
                params.ignition.push(p);
                u16::try_from(params.ignition.len() - 1)
                    .map_err(|_| SimError::config("geometry", "too many ignition overrides"))?
            }
            None => 0,
        };
        let before = particles.len();
        sample_shape(i, shape, params, material, base_dir, dx, &mut particles)?;
        if particles.len() == before {
            return Err(SimError::config(format!("geometry[{i}]"), "shape produced no particles"));
        }
    }
    for (id, p) in particles.iter().enumerate() {
        if quadratic_weights(&p.x, &params.cells).is_err() {
            return Err(SimError::config(
                "geometry",
                format!("particle {id} at {:?} is too close to the domain boundary", p.x.as_slice()),
            ));
        }
    }
    Ok(particles)
}

fn sample_shape<T: Real, const D: usize>(
    i: usize,
    shape: &ShapeConfig,
    params: &SceneParams<T, D>,
    material: u16,
    base_dir: &Path,
    dx: T,
    out: &mut Vec<MpmParticle<T, D>>,
) -> Result<()> {
    let ppc = shape.ppc.unwrap_or(if D == 2 { 4 } else { 8 });
    let per_axis = (ppc as f64).powf(1.0 / D as f64).round() as usize;
    if ppc == 0 || per_axis.pow(D as u32) != ppc {
        return Err(SimError::config(
            format!("geometry[{i}].ppc"),
            format!("must be a perfect {D}-th power"),
        ));
    }
    let volume0 = dx.powi(D as i32) / T::from_usize_lossy(ppc);
    let mass = params.rho_solid * volume0;
    let temperature = T::lit(shape.temperature.unwrap_or(params.t_bar.as_f64()));
    if !(temperature >= T::zero()) {
        return Err(SimError::config(format!("geometry[{i}].temperature"), "must be non-negative"));
    }
    let velocity = match &shape.velocity {
        Some(v) => vector(&format!("geometry[{i}].velocity"), v)?,
        None => Vector::zeros(),
    };
    let prm = params.ignition[material as usize];
    let region = region::<T, D>(i, &shape.shape)?;
    if shape.radial_fuel && !matches!(region, Some(Region::Sphere { .. } | Region::Cylinder { .. })) {
        return Err(SimError::config(
            format!("geometry[{i}].radial_fuel"),
            "needs a sphere or cylinder",
        ));
    }
    let mut push = |x: Vector<T, D>, fuel0: T| {
        let mut p = MpmParticle::at_rest(x, mass, volume0, temperature, fuel0);
        p.v = velocity;
        p.material = material;
        p.combustible = shape.combustible;
        p.model = shape.model.unwrap_or(ConstitutiveModel::FixedCorotated);
        out.push(p);
    };
    let Some(region) = region else {
        let ShapeKind::Points { file } = &shape.shape else {
            unreachable!()
        };
        let path = base_dir.join(file);
        for x in read_points::<T, D>(&path, i)? {
            push(x, prm.f0);
        }
        return Ok(());
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(i as u64 + 1);
    let g = &params.cells;
    let (lo, hi) = region.bounds();
    let mut lo_cell = [0i32; D];
    let mut hi_cell = [0i32; D];
    for a in 0..D {
        let c = |x: T| ((x - g.origin[a]) / dx).floor().as_f64() as i32;
        lo_cell[a] = c(lo[a]).max(0);
        hi_cell[a] = c(hi[a]).min(g.dims[a] as i32 - 1);
    }
    let k = T::from_usize_lossy(per_axis);
    let half = T::lit(0.5);
    for_each_in_box(lo_cell, hi_cell, |cell| {
        let corner = Vector::<T, D>::from_fn(|a, _| g.origin[a] + T::lit(cell[a] as f64) * dx);
        for_each_in_box([0; D], [per_axis as i32 - 1; D], |sub| {
            let x = Vector::<T, D>::from_fn(|a, _| {
                let j = if shape.jitter {
                    T::lit(rng.random_range(-0.5..0.5))
                } else {
                    T::zero()
                };
                corner[a] + (T::lit(sub[a] as f64) + half + j) / k * dx
            });
            if region.contains(&x) {
                let fuel0 = if shape.radial_fuel {
                    let r = region.radial_fraction(&x).unwrap_or(T::zero());
                    (T::one() + r).max(T::one()).min(T::lit(2.0))
                } else {
                    prm.f0
                };
                push(x, fuel0);
            }
        });
    });
    Ok(())
}
