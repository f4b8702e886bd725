//! Scripted headless sessions.
//!
//! ```toml
//! duration = 30.0
//! seed = 7                 # optional, overrides the config seed
//! room = "room.toml"       # optional
//!
//! [[command]]
//! at = 0.0
//! action = "spawn"
//! kind = "A"
//! position = [1.0, 2.5, 2.0]
//!
//! [[command]]
//! at = 1.0
//! action = "impulse"
//! object = 0
//! velocity = [2.0, 0.0, 0.0]
//! ```
//!
//! Other actions: `grab` (`object`, `position`), `release` (`object`),
//! `color` (`rgb = [r, g, b]`) and `image` (`path`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::ConductorError;
use crate::room::{ObjectKind, RoomGeometry};
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase", deny_unknown_fields)]
pub enum Action {
    Spawn { kind: ObjectKind, position: Vec3 },
    Impulse { object: usize, velocity: Vec3 },
    Grab { object: usize, position: Vec3 },
    Release { object: usize },
    Color { rgb: [u8; 3] },
    Image { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Command {
    pub at: f64,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub duration: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub room: Option<PathBuf>,
    #[serde(default, rename = "command")]
    pub commands: Vec<Command>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ConductorError> {
        let mut s: Scenario =
            toml::from_str(text).map_err(|e| ConductorError::Scenario(e.to_string()))?;
        if !(s.duration > 0.0 && s.duration.is_finite()) {
            return Err(ConductorError::Scenario(format!(
                "duration must be positive, got {}",
                s.duration
            )));
        }
        if let Some(c) = s
            .commands
            .iter()
            .find(|c| !(c.at >= 0.0 && c.at.is_finite()))
        {
            return Err(ConductorError::Scenario(format!(
                "bad command time {}",
                c.at
            )));
        }
        s.commands.sort_by(|a, b| a.at.total_cmp(&b.at));
        Ok(s)
    }

    /// Relative `room` and image paths resolve against the scenario's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConductorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConductorError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut s = Self::from_toml(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        if let Some(room) = &mut s.room {
            if room.is_relative() {
                *room = dir.join(&*room);
            }
        }
        for c in &mut s.commands {
            if let Action::Image { path } = &mut c.action {
                if path.is_relative() {
                    *path = dir.join(&*path);
                }
            }
        }
        Ok(s)
    }

    pub fn geometry(&self) -> Result<Option<RoomGeometry>, ConductorError> {
        self.room
            .as_ref()
            .map(|p| RoomGeometry::load(p).map_err(ConductorError::from))
            .transpose()
    }
}
