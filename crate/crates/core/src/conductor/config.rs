use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ConductorError;
use crate::key::KeyScale;
use crate::melody::WindowParams;
use crate::room::PhysicsParams;
use crate::vec3::Vec3;

/// Latent noise scale small enough to leave every sequence unchanged under
/// the grid codec.
pub const FAITHFUL_NOISE_SCALE: f64 = 1e-4;

/// Every tunable of the engine. Missing keys in a config file take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub bpm: f64,
    /// Collisions needed inside `window_seconds` to seed a base melody.
    pub window_count: usize,
    pub window_seconds: f64,
    pub noise_scale: f64,
    /// Complete loop passes between reincarnations.
    pub loops_before_mutation: u32,
    pub restitution: f64,
    pub rest_threshold: f64,
    /// Impact speed that maps to MIDI velocity 127.
    pub v_max: f64,
    pub kmeans_k: usize,
    /// Seconds between scene captures in live mode.
    pub capture_period: f64,
    pub tick_hz: f64,
    pub seed: u64,
    pub initial_key: KeyScale,
    pub collision_note_seconds: f64,
    pub loop_velocity: u8,
    pub loop_channel: u8,
    /// GM program per channel; index 0..3 are the three object kinds, 3 is the loop.
    pub programs: [u8; 4],
    pub object_radius: f64,
    /// `/mr4mr/state` messages per second; 0 disables them.
    pub state_hz: f64,
    /// Defaults to 1.6 m above the room center.
    pub listener_position: Option<Vec3>,
    pub listener_forward: Vec3,
    pub listen_port: u16,
    pub emit_host: String,
    pub emit_port: u16,
    pub bridge_port: u16,
    pub room: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            bpm: 120.0,
            window_count: 4,
            window_seconds: 3.0,
            noise_scale: 0.05,
            loops_before_mutation: 1,
            restitution: 0.8,
            rest_threshold: 0.05,
            v_max: 5.0,
            kmeans_k: 5,
            capture_period: 5.0,
            tick_hz: 120.0,
            seed: 0,
            initial_key: KeyScale::C_MAJOR,
            collision_note_seconds: 0.25,
            loop_velocity: 80,
            loop_channel: 3,
            programs: [14, 13, 9, 88],
            object_radius: 0.1,
            state_hz: 30.0,
            listener_position: None,
            listener_forward: Vec3::new(0.0, 0.0, -1.0),
            listen_port: 9000,
            emit_host: "127.0.0.1".into(),
            emit_port: 9001,
            bridge_port: 8080,
            room: None,
            corpus: None,
        }
    }
}

impl EngineConfig {
    /// Defaults with the tiny latent noise under which loops never change.
    pub fn faithful() -> Self {
        EngineConfig {
            noise_scale: FAITHFUL_NOISE_SCALE,
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConductorError> {
        let config: EngineConfig =
            toml::from_str(text).map_err(|e| ConductorError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Relative `room` and `corpus` paths resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConductorError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConductorError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut config = Self::from_toml(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.room, &mut config.corpus].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConductorError> {
        let positive = [
            ("bpm", self.bpm),
            ("window_seconds", self.window_seconds),
            ("restitution", self.restitution),
            ("rest_threshold", self.rest_threshold),
            ("v_max", self.v_max),
            ("capture_period", self.capture_period),
            ("tick_hz", self.tick_hz),
            ("collision_note_seconds", self.collision_note_seconds),
            ("object_radius", self.object_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConductorError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(ConductorError::Config(format!(
                "noise_scale must be non-negative, got {}",
                self.noise_scale
            )));
        }
        if !(self.state_hz >= 0.0 && self.state_hz.is_finite()) {
            return Err(ConductorError::Config(
                "state_hz must be non-negative".into(),
            ));
        }
        if self.window_count == 0 || self.kmeans_k == 0 || self.loops_before_mutation == 0 {
            return Err(ConductorError::Config(
                "window_count, kmeans_k and loops_before_mutation must be at least 1".into(),
            ));
        }
        if self.loop_channel > 15 || self.loop_velocity == 0 || self.loop_velocity > 127 {
            return Err(ConductorError::Config(
                "loop_channel ≤ 15 and loop_velocity in 1..=127".into(),
            ));
        }
        if self.programs.iter().any(|&p| p > 127) {
            return Err(ConductorError::Config("programs must be 0..=127".into()));
        }
        Ok(())
    }

    pub fn window_params(&self) -> WindowParams {
        WindowParams {
            min_events: self.window_count,
            window_seconds: self.window_seconds,
            bpm: self.bpm,
        }
    }

    pub fn physics_params(&self) -> PhysicsParams {
        PhysicsParams {
            restitution: self.restitution,
            rest_threshold: self.rest_threshold,
        }
    }

    /// Sixteenth-note length in seconds.
    pub fn grid(&self) -> f64 {
        60.0 / self.bpm / 4.0
    }

    pub fn program_for_channel(&self, channel: u8) -> u8 {
        if channel == self.loop_channel {
            self.programs[3]
        } else {
            self.programs.get(channel as usize).copied().unwrap_or(0)
        }
    }
}
