//! Collision-driven generative ambient music engine.
//!
//! Virtual objects bounce around a room; each collision becomes a note, short
//! bursts of notes seed a looping two-bar melody that slowly mutates, and the
//! dominant color of the scene picks the key everything is quantized to.

pub mod color;
pub mod conductor;
pub mod key;
pub mod melody;
pub mod osc;
pub mod room;
pub mod sonify;
pub mod vec3;

pub use key::{KeyScale, Mode};
pub use vec3::Vec3;
