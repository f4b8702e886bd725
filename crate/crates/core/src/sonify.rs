//! Collision sonification: height → pitch, speed → velocity, kind → channel,
//! listener-relative position → constant-power pan and distance gain.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::key::{quantize_to_scale, KeyScale, PITCH_MIN};
use crate::room::CollisionEvent;
use crate::vec3::Vec3;

/// Semitone span of the height → pitch map (three octaves above C3).
pub const PITCH_SPAN: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoteEvent {
    pub pitch: u8,
    pub velocity: u8,
    pub channel: u8,
    pub pan: f64,
    pub gain: f64,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Listener {
    pub position: Vec3,
    /// Horizontal unit vector.
    pub forward: Vec3,
}

impl Listener {
    /// Normalizes `forward` after dropping its vertical component.
    pub fn new(position: Vec3, forward: Vec3) -> Option<Self> {
        let flat = Vec3::new(forward.x, 0.0, forward.z);
        let len = flat.length();
        (len > 0.0 && len.is_finite()).then(|| Listener {
            position,
            forward: flat * (1.0 / len),
        })
    }

    fn right(&self) -> Vec3 {
        self.forward.cross(Vec3::UP)
    }
}

pub fn pitch_from_height(height: f64, room_height: f64, key: KeyScale) -> u8 {
    debug_assert!(room_height > 0.0);
    let frac = (height / room_height).clamp(0.0, 1.0);
    let raw = (PITCH_MIN as f64 + PITCH_SPAN * frac).round() as i32;
    quantize_to_scale(raw, key)
}

pub fn velocity_from_speed(speed: f64, v_max: f64) -> u8 {
    debug_assert!(v_max > 0.0);
    let scaled = (127.0 * (speed / v_max).min(1.0)).round();
    scaled.clamp(1.0, 127.0) as u8
}

/// `(pan, gain)`: pan is the sine of the signed horizontal angle from the
/// listener's forward direction (positive to the right), gain is
/// `1 / max(1, distance)`.
pub fn spatialize(position: Vec3, listener: &Listener) -> (f64, f64) {
    let d = position - listener.position;
    let distance = d.length();
    let ahead = d.dot(listener.forward);
    let side = d.dot(listener.right());
    let pan = if ahead == 0.0 && side == 0.0 {
        0.0
    } else {
        side.atan2(ahead).sin()
    };
    (pan, 1.0 / distance.max(1.0))
}

/// Constant-power stereo gains `(left, right)` for a pan in `[-1, 1]`.
pub fn pan_gains(pan: f64) -> (f64, f64) {
    let a = (pan.clamp(-1.0, 1.0) + 1.0) * FRAC_PI_4;
    (a.cos(), a.sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SonifyParams {
    pub room_height: f64,
    pub v_max: f64,
}

pub fn sonify(
    event: &CollisionEvent,
    listener: &Listener,
    key: KeyScale,
    params: &SonifyParams,
) -> NoteEvent {
    let (pan, gain) = spatialize(event.position, listener);
    NoteEvent {
        pitch: pitch_from_height(event.position.y, params.room_height, key),
        velocity: velocity_from_speed(event.speed, params.v_max),
        channel: event.kind.index(),
        pan,
        gain,
        timestamp: event.timestamp,
    }
}
