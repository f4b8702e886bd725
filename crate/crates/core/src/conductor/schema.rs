//! OSC address schema shared by the engine, external synths and the browser
//! bridge.
//!
//! | address | args | direction |
//! |---|---|---|
//! | `/mr4mr/collision` | `i` kind, `f` speed, `fff` position | room → engine, echoed out |
//! | `/mr4mr/note` | `i` channel, `i` pitch, `i` velocity, `f` pan, `f` gain | engine → synth/UI |
//! | `/mr4mr/wave` | `f` height, `i` pitch | engine → UI |
//! | `/mr4mr/scene/color` | `iii` r, g, b | scene → engine |
//! | `/mr4mr/scene/frame` | `i` width, `i` height, `b` packed RGB | UI → engine |
//! | `/mr4mr/key` | `i` tonic, `s` mode | engine → UI |
//! | `/mr4mr/gravity` | `fff` g | engine → UI |
//! | `/mr4mr/state` | `i` object, `i` kind, `fff` position | engine → UI |
//! | `/mr4mr/room` | `fff` width, height, depth | engine → UI |
//! | `/mr4mr/interact/spawn` | `i` kind, `fff` position | UI → engine |
//! | `/mr4mr/interact/impulse` | `i` object, `fff` velocity change | UI → engine |
//! | `/mr4mr/interact/grab` | `i` object, `fff` position | UI → engine |
//! | `/mr4mr/interact/release` | `i` object | UI → engine |

use super::ConductorError;
use crate::color::Rgb;
use crate::key::{KeyScale, Mode};
use crate::osc::{OscArg, OscMessage};
use crate::room::{CollisionEvent, ObjectKind, RoomGeometry};
use crate::sonify::NoteEvent;
use crate::vec3::Vec3;

pub const COLLISION: &str = "/mr4mr/collision";
pub const NOTE: &str = "/mr4mr/note";
pub const WAVE: &str = "/mr4mr/wave";
pub const SCENE_COLOR: &str = "/mr4mr/scene/color";
pub const SCENE_FRAME: &str = "/mr4mr/scene/frame";
pub const KEY: &str = "/mr4mr/key";
pub const GRAVITY: &str = "/mr4mr/gravity";
pub const STATE: &str = "/mr4mr/state";
pub const ROOM: &str = "/mr4mr/room";
pub const SPAWN: &str = "/mr4mr/interact/spawn";
pub const IMPULSE: &str = "/mr4mr/interact/impulse";
pub const GRAB: &str = "/mr4mr/interact/grab";
pub const RELEASE: &str = "/mr4mr/interact/release";

fn vec_args(v: Vec3) -> [OscArg; 3] {
    [
        OscArg::Float(v.x as f32),
        OscArg::Float(v.y as f32),
        OscArg::Float(v.z as f32),
    ]
}

pub fn collision(e: &CollisionEvent) -> OscMessage {
    let mut args = vec![
        OscArg::Int(e.kind.index() as i32),
        OscArg::Float(e.speed as f32),
    ];
    args.extend(vec_args(e.position));
    OscMessage::new(COLLISION, args)
}

pub fn note(n: &NoteEvent) -> OscMessage {
    OscMessage::new(
        NOTE,
        vec![
            OscArg::Int(n.channel as i32),
            OscArg::Int(n.pitch as i32),
            OscArg::Int(n.velocity as i32),
            OscArg::Float(n.pan as f32),
            OscArg::Float(n.gain as f32),
        ],
    )
}

pub fn wave(height: f64, pitch: u8) -> OscMessage {
    OscMessage::new(
        WAVE,
        vec![OscArg::Float(height as f32), OscArg::Int(pitch as i32)],
    )
}

pub fn scene_color(c: Rgb) -> OscMessage {
    OscMessage::new(
        SCENE_COLOR,
        vec![
            OscArg::Int(c.r as i32),
            OscArg::Int(c.g as i32),
            OscArg::Int(c.b as i32),
        ],
    )
}

pub fn scene_frame(width: u32, height: u32, rgb: Vec<u8>) -> OscMessage {
    OscMessage::new(
        SCENE_FRAME,
        vec![
            OscArg::Int(width as i32),
            OscArg::Int(height as i32),
            OscArg::Blob(rgb),
        ],
    )
}

pub fn key(k: KeyScale) -> OscMessage {
    OscMessage::new(
        KEY,
        vec![
            OscArg::Int(k.tonic() as i32),
            OscArg::Str(k.mode.to_string()),
        ],
    )
}

pub fn gravity(g: Vec3) -> OscMessage {
    OscMessage::new(GRAVITY, vec_args(g).to_vec())
}

pub fn state(id: usize, kind: ObjectKind, position: Vec3) -> OscMessage {
    let mut args = vec![OscArg::Int(id as i32), OscArg::Int(kind.index() as i32)];
    args.extend(vec_args(position));
    OscMessage::new(STATE, args)
}

pub fn room(g: &RoomGeometry) -> OscMessage {
    let r = g.room;
    OscMessage::new(
        ROOM,
        vec_args(Vec3::new(r.width, r.height, r.depth)).to_vec(),
    )
}

pub fn spawn(kind: ObjectKind, position: Vec3) -> OscMessage {
    let mut args = vec![OscArg::Int(kind.index() as i32)];
    args.extend(vec_args(position));
    OscMessage::new(SPAWN, args)
}

pub fn impulse(id: usize, v: Vec3) -> OscMessage {
    let mut args = vec![OscArg::Int(id as i32)];
    args.extend(vec_args(v));
    OscMessage::new(IMPULSE, args)
}

pub fn grab(id: usize, p: Vec3) -> OscMessage {
    let mut args = vec![OscArg::Int(id as i32)];
    args.extend(vec_args(p));
    OscMessage::new(GRAB, args)
}

pub fn release(id: usize) -> OscMessage {
    OscMessage::new(RELEASE, vec![OscArg::Int(id as i32)])
}

/// A message the engine acts on.
#[derive(Debug, Clone, PartialEq)]
pub enum Inbound {
    Collision {
        kind: ObjectKind,
        speed: f64,
        position: Vec3,
    },
    SceneColor(Rgb),
    SceneFrame {
        width: u32,
        height: u32,
        rgb: Vec<u8>,
    },
    Spawn {
        kind: ObjectKind,
        position: Vec3,
    },
    Impulse {
        object: usize,
        velocity: Vec3,
    },
    Grab {
        object: usize,
        position: Vec3,
    },
    Release {
        object: usize,
    },
    Key(KeyScale),
}

fn malformed(msg: &OscMessage, why: &str) -> ConductorError {
    ConductorError::Malformed {
        address: msg.address.clone(),
        tags: msg.tags(),
        reason: why.to_string(),
    }
}

struct Args<'a> {
    msg: &'a OscMessage,
    pos: usize,
}

impl<'a> Args<'a> {
    fn new(msg: &'a OscMessage, expected: &str) -> Result<Self, ConductorError> {
        if msg.tags() != expected {
            return Err(malformed(msg, &format!("expected ,{expected}")));
        }
        Ok(Args { msg, pos: 0 })
    }

    fn next(&mut self) -> &'a OscArg {
        self.pos += 1;
        &self.msg.args[self.pos - 1]
    }

    fn int(&mut self) -> i32 {
        self.next().as_int().expect("tag checked")
    }

    fn float(&mut self) -> f64 {
        self.next().as_float().expect("tag checked") as f64
    }

    fn vec(&mut self) -> Result<Vec3, ConductorError> {
        let v = Vec3::new(self.float(), self.float(), self.float());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(malformed(self.msg, "non-finite vector"))
        }
    }

    fn kind(&mut self) -> Result<ObjectKind, ConductorError> {
        let i = self.int();
        ObjectKind::from_index(i)
            .ok_or_else(|| malformed(self.msg, "object kind must be 0, 1 or 2"))
    }

    fn object(&mut self) -> Result<usize, ConductorError> {
        usize::try_from(self.int()).map_err(|_| malformed(self.msg, "negative object id"))
    }

    fn channel(&mut self) -> Result<u8, ConductorError> {
        u8::try_from(self.int()).map_err(|_| malformed(self.msg, "color channel outside 0..=255"))
    }
}

impl Inbound {
    /// `Ok(None)` for addresses the engine does not consume.
    pub fn parse(msg: &OscMessage) -> Result<Option<Inbound>, ConductorError> {
        let parsed = match msg.address.as_str() {
            COLLISION => {
                let mut a = Args::new(msg, "iffff")?;
                let kind = a.kind()?;
                let speed = a.float();
                if !(speed >= 0.0 && speed.is_finite()) {
                    return Err(malformed(msg, "speed must be finite and non-negative"));
                }
                Inbound::Collision {
                    kind,
                    speed,
                    position: a.vec()?,
                }
            }
            SCENE_COLOR => {
                let mut a = Args::new(msg, "iii")?;
                Inbound::SceneColor(Rgb::new(a.channel()?, a.channel()?, a.channel()?))
            }
            SCENE_FRAME => {
                let mut a = Args::new(msg, "iib")?;
                let (w, h) = (a.int(), a.int());
                let (Ok(width), Ok(height)) = (u32::try_from(w), u32::try_from(h)) else {
                    return Err(malformed(msg, "negative frame size"));
                };
                let OscArg::Blob(rgb) = a.next() else {
                    unreachable!("tag checked")
                };
                Inbound::SceneFrame {
                    width,
                    height,
                    rgb: rgb.clone(),
                }
            }
            KEY => {
                let mut a = Args::new(msg, "is")?;
                let tonic = a.int();
                let mode: Mode = a
                    .next()
                    .as_str()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| malformed(msg, "mode must be Major or Minor"))?;
                if !(0..12).contains(&tonic) {
                    return Err(malformed(msg, "tonic must be 0..=11"));
                }
                Inbound::Key(KeyScale::new(tonic as u8, mode))
            }
            SPAWN => {
                let mut a = Args::new(msg, "ifff")?;
                Inbound::Spawn {
                    kind: a.kind()?,
                    position: a.vec()?,
                }
            }
            IMPULSE => {
                let mut a = Args::new(msg, "ifff")?;
                Inbound::Impulse {
                    object: a.object()?,
                    velocity: a.vec()?,
                }
            }
            GRAB => {
                let mut a = Args::new(msg, "ifff")?;
                Inbound::Grab {
                    object: a.object()?,
                    position: a.vec()?,
                }
            }
            RELEASE => {
                let mut a = Args::new(msg, "i")?;
                Inbound::Release {
                    object: a.object()?,
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(parsed))
    }
}
