//! Simulated room: static box geometry and bouncing virtual objects that
//! report their contacts as collision events.

mod geometry;
mod physics;

use thiserror::Error;

pub use geometry::{Aabb, Face, Furniture, RoomGeometry, RoomSize, Surface};
pub use physics::{
    maybe_mutate_gravity, CollisionEvent, GrabOutcome, GravityState, ObjectId, ObjectKind,
    PhysicsParams, VirtualObject, World, DEFAULT_GRAVITY, GRAVITY_MAGNITUDE_RANGE,
};

#[derive(Debug, Error)]
pub enum RoomError {
    #[error("unknown object id {0}")]
    UnknownObject(usize),
    #[error("invalid room: {0}")]
    Invalid(String),
    #[error("room file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}
