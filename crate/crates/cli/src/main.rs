use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use thermo_mpm::scene::{run, RunOptions, SceneConfig, Simulation};
use thermo_mpm::SimError;

/// Runs a combustion scene and writes binary frames.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// Scene description (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// Output directory for frames and summary.json.
    #[arg(long)]
    out: PathBuf,
    /// Number of frames to produce, overriding the scene.
    #[arg(long)]
    frames: Option<u32>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Checkpoint file rewritten after every frame.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from a checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Also write per-particle CSV files.
    #[arg(long)]
    csv: bool,
}

fn simulate<const D: usize>(cfg: SceneConfig, base: &Path, args: &Args) -> Result<(), SimError> {
    let mut sim = Simulation::<f64, D>::new(cfg, base)?;
    if let Some(cp) = &args.resume {
        sim.restore_checkpoint(cp)?;
        log::info!("resumed at frame {} (t = {})", sim.state.frame, sim.state.time);
    }
    log::info!("{} MPM particles", sim.state.mpm.len());
    let opts = RunOptions {
        out_dir: args.out.clone(),
        frames: args.frames,
        checkpoint: args.checkpoint.clone(),
        csv: args.csv,
    };
    let summary = run(&mut sim, &opts)?;
    log::info!(
        "{} frames, {} steps, {:.3} s/frame",
        summary.frames.len(),
        summary.total_steps,
        summary.mean_seconds_per_frame
    );
    Ok(())
}

fn execute(args: &Args) -> Result<(), SimError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(SimError::config("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| SimError::config("--threads", e.to_string()))?;
    }
    let cfg = SceneConfig::load(&args.scene)?;
    let base = args.scene.parent().unwrap_or_else(|| Path::new("."));
    match cfg.dimension {
        2 => simulate::<2>(cfg, base, args),
        3 => simulate::<3>(cfg, base, args),
        d => Err(SimError::config("dimension", format!("must be 2 or 3, got {d}"))),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SIM_LOG", "info")).init();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
