//! Orchestration: configuration, OSC schema, the session clock, MIDI
//! recording and scripted scenarios.

mod config;
pub mod midi;
mod scenario;
pub mod schema;
mod session;

use thiserror::Error;

pub use config::{EngineConfig, FAITHFUL_NOISE_SCALE};
pub use midi::{MidiRecording, RecordedNote, DIVISION};
pub use scenario::{Action, Command, Scenario};
pub use schema::Inbound;
pub use session::{next_bar_step, simulate, Emitted, Session, SimulationOutput, Trace};

use crate::color::ColorError;
use crate::melody::MelodyError;
use crate::room::RoomError;

#[derive(Debug, Error)]
pub enum ConductorError {
    #[error("config: {0}")]
    Config(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("malformed {address} ,{tags}: {reason}")]
    Malformed {
        address: String,
        tags: String,
        reason: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Room(#[from] RoomError),
    #[error(transparent)]
    Melody(#[from] MelodyError),
    #[error(transparent)]
    Color(#[from] ColorError),
}
