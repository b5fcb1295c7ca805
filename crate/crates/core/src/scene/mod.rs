//! Scene description, setup and the time-stepping driver.

mod bytes;
mod checkpoint;
mod config;
mod frame;
mod params;
mod run;
mod sample;
mod sim;

pub use config::*;
pub use frame::{
    frame_file_name, FrameRecord, GridBlock, FLAG_LABEL_GRID, FLAG_TEMPERATURE_GRID, FLAG_VELOCITY_GRID,
    FRAME_MAGIC, FRAME_VERSION,
};
pub use params::SceneParams;
pub use run::{run, FrameSummary, RunOptions, RunSummary};
pub use sample::sample_geometry;
pub use sim::{SimState, Simulation, StepStats};
