use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("stencil out of bounds along axis {axis} (coordinate {coordinate})")]
    StencilOutOfBounds { axis: usize, coordinate: f64 },

    #[error("non-finite value in {what} (id {id})")]
    NonFinite { what: &'static str, id: usize },

    #[error("degenerate element{}: {detail}", particle_suffix(*.particle))]
    DegenerateElement {
        particle: Option<usize>,
        detail: String,
    },

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("incompatible right-hand side for a pure-Neumann region (net source {net:e})")]
    Incompatible { net: f64 },

    #[error("temperature extrapolation impossible: every cell is solid")]
    AllSolid,

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("step {step}, {stage}: {source}")]
    Step {
        step: u64,
        stage: &'static str,
        #[source]
        source: Box<SimError>,
    },

    #[error("run aborted after {completed_frames} completed frames: {source}")]
    Run {
        completed_frames: u32,
        #[source]
        source: Box<SimError>,
    },
}

fn particle_suffix(p: Option<usize>) -> String {
    match p {
        Some(id) => format!(" (particle {id})"),
        None => String::new(),
    }
}

impl SimError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a particle id to degenerate-element errors raised by pure kernels.
    pub fn with_particle(self, id: usize) -> Self {
        match self {
            SimError::DegenerateElement { detail, .. } => SimError::DegenerateElement {
                particle: Some(id),
                detail,
            },
            other => other,
        }
    }

    pub fn in_step(self, step: u64, stage: &'static str) -> Self {
        SimError::Step {
            step,
            stage,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        match self {
            SimError::Config { .. } | SimError::Format { .. } | SimError::Io { .. } => true,
            SimError::Step { source, .. } | SimError::Run { source, .. } => {
                source.is_config_error()
            }
            _ => false,
        }
    }
}
