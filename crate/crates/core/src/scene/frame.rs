//! Binary frame files and their CSV mirror.
//!
//! Layout (little-endian): `"THMP"`, u32 version, u32 d, u32 mpm count,
//! u32 smoke count, u32 flags; then MPM positions, velocities (interleaved
//! per particle), temperature, fuel, state bytes and J; then smoke positions,
//! velocities and temperature. Each flagged grid block follows as u32 dims[d],
//! f32 origin[d], f32 dx and the node values in x-fastest order.

use std::fs;
use std::path::{Path, PathBuf};

use super::bytes::{ByteReader, ByteWriter};
use super::sim::Simulation;
use crate::error::{Result, SimError};
use crate::grid::{DenseField, GridDescriptor};
use crate::linalg::Vector;
use crate::scalar::Real;

pub const FRAME_MAGIC: [u8; 4] = *b"THMP";
pub const FRAME_VERSION: u32 = 1;
pub const FLAG_TEMPERATURE_GRID: u32 = 1;
pub const FLAG_VELOCITY_GRID: u32 = 1 << 1;
pub const FLAG_LABEL_GRID: u32 = 1 << 2;
const KNOWN_FLAGS: u32 = FLAG_TEMPERATURE_GRID | FLAG_VELOCITY_GRID | FLAG_LABEL_GRID;

#[derive(Clone, Debug, PartialEq)]
pub struct GridBlock<V> {
    pub dims: Vec<u32>,
    pub origin: Vec<f32>,
    pub dx: f32,
    pub values: Vec<V>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameRecord {
    pub dimension: u32,
    pub mpm_x: Vec<f32>,
    pub mpm_v: Vec<f32>,
    pub mpm_temperature: Vec<f32>,
    pub mpm_fuel: Vec<f32>,
    pub mpm_state: Vec<u8>,
    pub mpm_j: Vec<f32>,
    pub smoke_x: Vec<f32>,
    pub smoke_v: Vec<f32>,
    pub smoke_temperature: Vec<f32>,
    pub temperature_grid: Option<GridBlock<f32>>,
    /// `d` interleaved components per node.
    pub velocity_grid: Option<GridBlock<f32>>,
    pub label_grid: Option<GridBlock<u8>>,
}

pub fn frame_file_name(index: u32) -> String {
    format!("frame_{index:06}.bin")
}

fn push_vec<T: Real, const D: usize>(out: &mut Vec<f32>, v: &Vector<T, D>) {
    out.extend(v.iter().map(|c| c.as_f64() as f32));
}

fn block<T: Real, V, W, const D: usize>(
    field: &DenseField<T, V, D>,
    mut f: impl FnMut(&V, &mut Vec<W>),
) -> GridBlock<W>
where
    V: Copy,
{
    let g: &GridDescriptor<T, D> = field.descriptor();
    let mut values = Vec::new();
    for v in field.values() {
        f(v, &mut values);
    }
    GridBlock {
        dims: g.dims.iter().map(|&n| n as u32).collect(),
        origin: g.origin.iter().map(|c| c.as_f64() as f32).collect(),
        dx: g.dx.as_f64() as f32,
        values,
    }
}

impl FrameRecord {
    pub fn mpm_count(&self) -> usize {
        self.mpm_temperature.len()
    }

    pub fn smoke_count(&self) -> usize {
        self.smoke_temperature.len()
    }

    pub fn flags(&self) -> u32 {
        let mut f = 0;
        if self.temperature_grid.is_some() {
            f |= FLAG_TEMPERATURE_GRID;
        }
        if self.velocity_grid.is_some() {
            f |= FLAG_VELOCITY_GRID;
        }
        if self.label_grid.is_some() {
            f |= FLAG_LABEL_GRID;
        }
        f
    }

    /// Snapshot of the simulation in single precision.
    pub fn capture<T: Real, const D: usize>(sim: &Simulation<T, D>) -> Self {
        let s = &sim.state;
        let out = &sim.config.output;
        let mut r = FrameRecord {
            dimension: D as u32,
            ..Default::default()
        };
        for p in &s.mpm {
            push_vec(&mut r.mpm_x, &p.x);
            push_vec(&mut r.mpm_v, &p.v);
            r.mpm_temperature.push(p.temperature.as_f64() as f32);
            r.mpm_fuel.push(p.fuel.as_f64() as f32);
            r.mpm_state.push(p.state.code());
            r.mpm_j.push(p.j().as_f64() as f32);
        }
        for p in &s.smoke {
            push_vec(&mut r.smoke_x, &p.x);
            push_vec(&mut r.smoke_v, &p.v);
            r.smoke_temperature.push(p.temperature.as_f64() as f32);
        }
        if out.grid_temperature {
            r.temperature_grid = Some(block(&s.fluid_temperature, |v, o| o.push(v.as_f64() as f32)));
        }
        if out.grid_velocity {
            r.velocity_grid = Some(block(&s.velocity, |v, o| push_vec(o, v)));
        }
        if out.grid_labels {
            r.label_grid = Some(block(&s.labels, |v, o| o.push(*v as u8)));
        }
        r
    }

    fn check(&self) -> Result<()> {
        let d = self.dimension as usize;
        let (n, m) = (self.mpm_count(), self.smoke_count());
        let ok = self.mpm_x.len() == n * d
            && self.mpm_v.len() == n * d
            && self.mpm_fuel.len() == n
            && self.mpm_state.len() == n
            && self.mpm_j.len() == n
            && self.smoke_x.len() == m * d
            && self.smoke_v.len() == m * d;
        if ok {
            Ok(())
        } else {
            Err(SimError::Format {
                what: "frame",
                message: "array lengths disagree with particle counts".into(),
            })
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.check()?;
        let mut w = ByteWriter::default();
        w.bytes(&FRAME_MAGIC);
        w.u32(FRAME_VERSION);
        w.u32(self.dimension);
        w.len_u32(self.mpm_count())?;
        w.len_u32(self.smoke_count())?;
        w.u32(self.flags());
        let floats = |w: &mut ByteWriter, a: &[f32]| a.iter().for_each(|&v| w.f32(v));
        floats(&mut w, &self.mpm_x);
        floats(&mut w, &self.mpm_v);
        floats(&mut w, &self.mpm_temperature);
        floats(&mut w, &self.mpm_fuel);
        w.bytes(&self.mpm_state);
        floats(&mut w, &self.mpm_j);
        floats(&mut w, &self.smoke_x);
        floats(&mut w, &self.smoke_v);
        floats(&mut w, &self.smoke_temperature);
        let header = |w: &mut ByteWriter, dims: &[u32], origin: &[f32], dx: f32| {
            dims.iter().for_each(|&n| w.u32(n));
            floats(w, origin);
            w.f32(dx);
        };
        if let Some(b) = &self.temperature_grid {
            header(&mut w, &b.dims, &b.origin, b.dx);
            floats(&mut w, &b.values);
        }
        if let Some(b) = &self.velocity_grid {
            header(&mut w, &b.dims, &b.origin, b.dx);
            floats(&mut w, &b.values);
        }
        if let Some(b) = &self.label_grid {
            header(&mut w, &b.dims, &b.origin, b.dx);
            w.bytes(&b.values);
        }
        Ok(w.buf)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(data, "frame");
        if r.take(4)? != FRAME_MAGIC {
            return Err(r.err("bad magic"));
        }
        let version = r.u32()?;
        if version != FRAME_VERSION {
            return Err(r.err(format!("unsupported version {version}")));
        }
        let dimension = r.u32()?;
        if !(2..=3).contains(&dimension) {
            return Err(r.err(format!("bad dimension {dimension}")));
        }
        let d = dimension as usize;
        let n = r.u32()? as usize;
        let m = r.u32()? as usize;
        let flags = r.u32()?;
        if flags & !KNOWN_FLAGS != 0 {
            return Err(r.err(format!("unknown flags {flags:#x}")));
        }
        let mut f = FrameRecord {
            dimension,
            mpm_x: r.f32s(n * d)?,
            mpm_v: r.f32s(n * d)?,
            mpm_temperature: r.f32s(n)?,
            mpm_fuel: r.f32s(n)?,
            mpm_state: r.take(n)?.to_vec(),
            mpm_j: r.f32s(n)?,
            smoke_x: r.f32s(m * d)?,
            smoke_v: r.f32s(m * d)?,
            smoke_temperature: r.f32s(m)?,
            ..Default::default()
        };
        if let Some(bad) = f.mpm_state.iter().find(|&&s| s > 3) {
            return Err(r.err(format!("bad state code {bad}")));
        }
        let header = |r: &mut ByteReader| -> Result<(Vec<u32>, Vec<f32>, f32, usize)> {
            let dims: Vec<u32> = (0..d).map(|_| r.u32()).collect::<Result<_>>()?;
            let origin = r.f32s(d)?;
            let dx = r.f32()?;
            let count = dims
                .iter()
                .try_fold(1usize, |a, &n| a.checked_mul(n as usize))
                .ok_or_else(|| r.err("grid too large"))?;
            Ok((dims, origin, dx, count))
        };
        if flags & FLAG_TEMPERATURE_GRID != 0 {
            let (dims, origin, dx, count) = header(&mut r)?;
            let values = r.f32s(count)?;
            f.temperature_grid = Some(GridBlock { dims, origin, dx, values });
        }
        if flags & FLAG_VELOCITY_GRID != 0 {
            let (dims, origin, dx, count) = header(&mut r)?;
            let values = r.f32s(count * d)?;
            f.velocity_grid = Some(GridBlock { dims, origin, dx, values });
        }
        if flags & FLAG_LABEL_GRID != 0 {
            let (dims, origin, dx, count) = header(&mut r)?;
            let values = r.take(count)?.to_vec();
            f.label_grid = Some(GridBlock { dims, origin, dx, values });
        }
        r.finish()?;
        Ok(f)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| SimError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let data = fs::read(path).map_err(|e| SimError::io(path, e))?;
        Self::from_bytes(&data)
    }

    /// Writes `<stem>_mpm.csv` and `<stem>_smoke.csv` beside `stem`, one row
    /// per particle.
    pub fn write_csv(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let d = self.dimension as usize;
        let axes = ["x", "y", "z"];
        let with_suffix = |s: &str| {
            let mut name = stem.file_name().unwrap_or_default().to_os_string();
            name.push(s);
            stem.with_file_name(name)
        };
        let csv_err = |p: &Path, e: csv::Error| SimError::io(p, std::io::Error::other(e));

        let mpm_path = with_suffix("_mpm.csv");
        let mut w = csv::Writer::from_path(&mpm_path).map_err(|e| csv_err(&mpm_path, e))?;
        let mut head = vec!["id".to_string()];
        head.extend(axes[..d].iter().map(|a| a.to_string()));
        head.extend(axes[..d].iter().map(|a| format!("v{a}")));
        head.extend(["temperature", "fuel", "state", "j"].map(String::from));
        w.write_record(&head).map_err(|e| csv_err(&mpm_path, e))?;
        for i in 0..self.mpm_count() {
            let mut row = vec![i.to_string()];
            row.extend(self.mpm_x[i * d..(i + 1) * d].iter().map(f32::to_string));
            row.extend(self.mpm_v[i * d..(i + 1) * d].iter().map(f32::to_string));
            row.push(self.mpm_temperature[i].to_string());
            row.push(self.mpm_fuel[i].to_string());
            row.push(self.mpm_state[i].to_string());
            row.push(self.mpm_j[i].to_string());
            w.write_record(&row).map_err(|e| csv_err(&mpm_path, e))?;
        }
        w.flush().map_err(|e| SimError::io(&mpm_path, e))?;

        let smoke_path = with_suffix("_smoke.csv");
        let mut w = csv::Writer::from_path(&smoke_path).map_err(|e| csv_err(&smoke_path, e))?;
        let mut head = vec!["id".to_string()];
        head.extend(axes[..d].iter().map(|a| a.to_string()));
        head.extend(axes[..d].iter().map(|a| format!("v{a}")));
        head.push("temperature".into());
        w.write_record(&head).map_err(|e| csv_err(&smoke_path, e))?;
        for i in 0..self.smoke_count() {
            let mut row = vec![i.to_string()];
            row.extend(self.smoke_x[i * d..(i + 1) * d].iter().map(f32::to_string));
            row.extend(self.smoke_v[i * d..(i + 1) * d].iter().map(f32::to_string));
            row.push(self.smoke_temperature[i].to_string());
            w.write_record(&row).map_err(|e| csv_err(&smoke_path, e))?;
        }
        w.flush().map_err(|e| SimError::io(&smoke_path, e))?;
        Ok((mpm_path, smoke_path))
    }
}
