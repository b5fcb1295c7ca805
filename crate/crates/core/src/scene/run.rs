//! Frame loop with output, checkpoints and a run summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::frame::{frame_file_name, FrameRecord};
use super::sim::{Simulation, StepStats};
use crate::error::{Result, SimError};
use crate::scalar::Real;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides the configured frame count.
    pub frames: Option<u32>,
    /// Rewritten after every frame.
    pub checkpoint: Option<PathBuf>,
    pub csv: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FrameSummary {
    pub frame: u32,
    pub time: f64,
    pub wall_seconds: f64,
    pub steps: u64,
    pub mpm_count: usize,
    pub smoke_count: usize,
    pub pressure_iterations: usize,
    pub diffusion_iterations: usize,
    pub smoke_emitted: usize,
    pub ignited: usize,
    pub burnt_out: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub dimension: usize,
    pub first_frame: u32,
    pub frames: Vec<FrameSummary>,
    pub total_wall_seconds: f64,
    pub mean_seconds_per_frame: f64,
    pub total_steps: u64,
    pub total_pressure_iterations: usize,
    pub total_diffusion_iterations: usize,
    /// Set when the run stopped on an error.
    pub error: Option<String>,
}

impl RunSummary {
    fn push(&mut self, f: FrameSummary) {
        self.total_wall_seconds += f.wall_seconds;
        self.total_steps += f.steps;
        self.total_pressure_iterations += f.pressure_iterations;
        self.total_diffusion_iterations += f.diffusion_iterations;
        self.frames.push(f);
        self.mean_seconds_per_frame = self.total_wall_seconds / self.frames.len() as f64;
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("summary serializes");
        fs::write(path, text).map_err(|e| SimError::io(path, e))
    }
}

fn write_frame<T: Real, const D: usize>(sim: &Simulation<T, D>, opts: &RunOptions) -> Result<()> {
    let record = FrameRecord::capture(sim);
    let path = opts.out_dir.join(frame_file_name(sim.state.frame));
    record.write(&path)?;
    if opts.csv {
        record.write_csv(&path.with_extension(""))?;
    }
    Ok(())
}

fn advance_and_write<T: Real, const D: usize>(
    sim: &mut Simulation<T, D>,
    opts: &RunOptions,
) -> Result<FrameSummary> {
    let start = Instant::now();
    let step0 = sim.state.step;
    let stats: StepStats = sim.advance_frame()?;
    let wall_seconds = start.elapsed().as_secs_f64();
    write_frame(sim, opts)?;
    if let Some(cp) = &opts.checkpoint {
        sim.save_checkpoint(cp)?;
    }
    let s = &sim.state;
    Ok(FrameSummary {
        frame: s.frame,
        time: s.time.as_f64(),
        wall_seconds,
        steps: s.step - step0,
        mpm_count: s.mpm.len(),
        smoke_count: s.smoke.len(),
        pressure_iterations: stats.pressure_iterations,
        diffusion_iterations: stats.diffusion_iterations,
        smoke_emitted: stats.smoke_emitted,
        ignited: stats.ignited,
        burnt_out: stats.burnt_out,
    })
}

/// Writes frames up to the frame count, starting from the current state.
/// A fresh simulation first writes frame 0. `summary.json` lands in the
/// output directory even when a step fails.
pub fn run<T: Real, const D: usize>(sim: &mut Simulation<T, D>, opts: &RunOptions) -> Result<RunSummary> {
    fs::create_dir_all(&opts.out_dir).map_err(|e| SimError::io(&opts.out_dir, e))?;
    let frame_count = opts.frames.unwrap_or(sim.config.output.frame_count);
    let mut summary = RunSummary {
        dimension: D,
        first_frame: sim.state.frame,
        ..Default::default()
    };
    let summary_path = opts.out_dir.join("summary.json");
    let mut body = || -> Result<()> {
        if sim.state.frame == 0 && sim.state.step == 0 {
            write_frame(sim, opts)?;
        }
        while sim.state.frame < frame_count {
            let f = advance_and_write(sim, opts)?;
            log::info!(
                "frame {} t={:.5} steps={} smoke={} ({:.3}s)",
                f.frame,
                f.time,
                f.steps,
                f.smoke_count,
                f.wall_seconds
            );
            summary.push(f);
        }
        Ok(())
    };
    let outcome = body();
    if let Err(e) = &outcome {
        summary.error = Some(e.to_string());
    }
    summary.write(&summary_path)?;
    match outcome {
        Ok(()) => Ok(summary),
        Err(e) => Err(SimError::Run {
            completed_frames: sim.state.frame,
            source: Box::new(e),
        }),
    }
}
