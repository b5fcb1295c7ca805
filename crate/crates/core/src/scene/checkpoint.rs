//! Exact save and restore of [`SimState`].
//!
//! Scalars are stored as f64, which holds both f32 and f64 state without
//! rounding. The scene config is embedded so that a restore against a
//! different scene is refused.

use std::fs;
use std::path::Path;

use super::bytes::{ByteReader, ByteWriter};
use super::config::SceneConfig;
use super::sim::{SimState, Simulation};
use crate::constitutive::ConstitutiveModel;
use crate::error::{Result, SimError};
use crate::fluid::{CellLabel, SmokeParticle};
use crate::grid::DenseField;
use crate::ignition::BurnState;
use crate::linalg::{Matrix, Vector};
use crate::mpm::MpmParticle;
use crate::scalar::Real;

const MAGIC: [u8; 4] = *b"THMC";
const VERSION: u32 = 1;

/// Config text compared on restore. Frame count and grid dumps may differ
/// between the original run and its continuation.
fn identity_json(cfg: &SceneConfig) -> String {
    let mut c = cfg.clone();
    c.output.frame_count = 0;
    c.output.grid_temperature = false;
    c.output.grid_velocity = false;
    c.output.grid_labels = false;
    c.canonical_json()
}

fn put<T: Real>(w: &mut ByteWriter, v: T) {
    w.f64(v.as_f64());
}

fn put_all<'a, T: Real>(w: &mut ByteWriter, it: impl IntoIterator<Item = &'a T>) {
    for v in it {
        put(w, *v);
    }
}

fn get<T: Real>(r: &mut ByteReader) -> Result<T> {
    Ok(T::lit(r.f64()?))
}

fn get_vec<T: Real, const D: usize>(r: &mut ByteReader) -> Result<Vector<T, D>> {
    let mut v = Vector::<T, D>::zeros();
    for c in v.iter_mut() {
        *c = get(r)?;
    }
    Ok(v)
}

fn get_mat<T: Real, const D: usize>(r: &mut ByteReader) -> Result<Matrix<T, D>> {
    let mut m = Matrix::<T, D>::zeros();
    for c in m.iter_mut() {
        *c = get(r)?;
    }
    Ok(m)
}

fn encode<T: Real, const D: usize>(cfg: &SceneConfig, s: &SimState<T, D>) -> Result<Vec<u8>> {
    let mut w = ByteWriter::default();
    w.bytes(&MAGIC);
    w.u32(VERSION);
    w.u32(D as u32);
    let json = identity_json(cfg);
    w.len_u32(json.len())?;
    w.bytes(json.as_bytes());
    put(&mut w, s.time);
    w.u64(s.step);
    w.u32(s.frame);

    w.len_u32(s.mpm.len())?;
    for p in &s.mpm {
        put_all(&mut w, p.x.iter());
        put_all(&mut w, p.v.iter());
        put(&mut w, p.mass);
        put(&mut w, p.volume0);
        put_all(&mut w, p.f.iter());
        put_all(&mut w, p.c.iter());
        put(&mut w, p.temperature);
        put_all(&mut w, p.temp_grad.iter());
        w.u8(p.state.code());
        put(&mut w, p.fuel);
        put(&mut w, p.fuel0);
        w.opt_f64(p.burn_start_time.map(|t| t.as_f64()));
        w.opt_f64(p.time_to_burn.map(|t| t.as_f64()));
        w.u8(match p.model {
            ConstitutiveModel::FixedCorotated => 0,
            ConstitutiveModel::StvkHenckyDp => 1,
        });
        w.u16(p.material);
        w.u8(p.combustible as u8);
    }
    w.len_u32(s.smoke.len())?;
    for p in &s.smoke {
        put_all(&mut w, p.x.iter());
        put_all(&mut w, p.v.iter());
        put(&mut w, p.mass);
        put(&mut w, p.temperature);
        put_all(&mut w, p.temp_grad.iter());
        put(&mut w, p.fuel);
        put(&mut w, p.fuel0);
        put(&mut w, p.burn_start_time);
        w.u16(p.material);
    }
    for v in s.velocity.values() {
        put_all(&mut w, v.iter());
    }
    put_all(&mut w, s.fluid_temperature.values());
    put_all(&mut w, s.pressure.values());
    for l in s.labels.values() {
        w.u8(*l as u8);
    }
    Ok(w.buf)
}

fn decode<T: Real, const D: usize>(
    data: &[u8],
    cfg: &SceneConfig,
    template: &SimState<T, D>,
) -> Result<SimState<T, D>> {
    let mut r = ByteReader::new(data, "checkpoint");
    if r.take(4)? != MAGIC {
        return Err(r.err("bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.err(format!("unsupported version {version}")));
    }
    let d = r.u32()?;
    if d as usize != D {
        return Err(r.err(format!("checkpoint is {d}D")));
    }
    let n = r.u32()? as usize;
    let json = r.take(n)?;
    if json != identity_json(cfg).as_bytes() {
        return Err(SimError::config("resume", "checkpoint was written for a different scene"));
    }
    let time = get(&mut r)?;
    let step = r.u64()?;
    let frame = r.u32()?;

    let n = r.u32()? as usize;
    let mut mpm = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let x = get_vec(&mut r)?;
        let v = get_vec(&mut r)?;
        let mass = get(&mut r)?;
        let volume0 = get(&mut r)?;
        let f = get_mat(&mut r)?;
        let c = get_mat(&mut r)?;
        let temperature = get(&mut r)?;
        let temp_grad = get_vec(&mut r)?;
        let code = r.u8()?;
        let state = BurnState::from_code(code).ok_or_else(|| r.err(format!("bad state code {code}")))?;
        let fuel = get(&mut r)?;
        let fuel0 = get(&mut r)?;
        let burn_start_time = r.opt_f64()?.map(T::lit);
        let time_to_burn = r.opt_f64()?.map(T::lit);
        let model = match r.u8()? {
            0 => ConstitutiveModel::FixedCorotated,
            1 => ConstitutiveModel::StvkHenckyDp,
            m => return Err(r.err(format!("bad model code {m}"))),
        };
        let material = r.u16()?;
        let combustible = r.u8()? != 0;
        mpm.push(MpmParticle {
            x,
            v,
            mass,
            volume0,
            f,
            c,
            temperature,
            temp_grad,
            state,
            fuel,
            fuel0,
            burn_start_time,
            time_to_burn,
            model,
            material,
            combustible,
        });
    }
    let n = r.u32()? as usize;
    let mut smoke = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        smoke.push(SmokeParticle {
            x: get_vec(&mut r)?,
            v: get_vec(&mut r)?,
            mass: get(&mut r)?,
            temperature: get(&mut r)?,
            temp_grad: get_vec(&mut r)?,
            fuel: get(&mut r)?,
            fuel0: get(&mut r)?,
            burn_start_time: get(&mut r)?,
            material: r.u16()?,
        });
    }
    let corners = *template.velocity.descriptor();
    let cells = *template.pressure.descriptor();
    let velocity = (0..corners.node_count())
        .map(|_| get_vec(&mut r))
        .collect::<Result<Vec<_>>>()?;
    let fluid_temperature = (0..cells.node_count()).map(|_| get(&mut r)).collect::<Result<Vec<T>>>()?;
    let pressure = (0..cells.node_count()).map(|_| get(&mut r)).collect::<Result<Vec<T>>>()?;
    let labels = (0..cells.node_count())
        .map(|_| {
            Ok(match r.u8()? {
                0 => CellLabel::Fluid,
                1 => CellLabel::Solid,
                2 => CellLabel::DirichletWall,
                3 => CellLabel::NeumannWall,
                l => return Err(r.err(format!("bad label {l}"))),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(SimState {
        time,
        step,
        frame,
        mpm,
        smoke,
        velocity: DenseField::from_vec(corners, velocity),
        fluid_temperature: DenseField::from_vec(cells, fluid_temperature),
        pressure: DenseField::from_vec(cells, pressure),
        labels: DenseField::from_vec(cells, labels),
    })
}

impl<T: Real, const D: usize> Simulation<T, D> {
    pub fn checkpoint_bytes(&self) -> Result<Vec<u8>> {
        encode(&self.config, &self.state)
    }

    pub fn restore_bytes(&mut self, data: &[u8]) -> Result<()> {
        self.state = decode(data, &self.config, &self.state)?;
        Ok(())
    }

    /// Writes atomically through a temporary sibling file.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let bytes = self.checkpoint_bytes()?;
        let mut tmp = path.as_os_str().to_os_string();
        tmp.push(".tmp");
        fs::write(&tmp, bytes).map_err(|e| SimError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| SimError::io(path, e))
    }

    pub fn restore_checkpoint(&mut self, path: &Path) -> Result<()> {
        let data = fs::read(path).map_err(|e| SimError::io(path, e))?;
        self.restore_bytes(&data)
    }
}
