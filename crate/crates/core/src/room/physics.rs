//! Sphere dynamics inside a box room.
//!
//! Integration is semi-implicit Euler (`v += g·dt; x += v·dt`). Penetrating
//! contacts are pushed back onto the surface and the velocity is reflected
//! about the contact normal with restitution `e`. A contact tick never adds
//! mechanical energy: if the positional correction would, the rebound is
//! scaled down so the object leaves the tick with at most its starting energy.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{Aabb, Face, RoomGeometry, Surface};
use super::RoomError;
use crate::vec3::Vec3;

const MAX_CONTACT_PASSES: usize = 4;
const PENETRATION_EPS: f64 = 1e-12;
const TOUCH_EPS: f64 = 1e-9;

pub const DEFAULT_GRAVITY: Vec3 = Vec3::new(0.0, -9.8, 0.0);
pub const GRAVITY_MAGNITUDE_RANGE: (f64, f64) = (1.0, 12.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectKind {
    #[serde(alias = "A", alias = "a")]
    TypeA,
    #[serde(alias = "B", alias = "b")]
    TypeB,
    #[serde(alias = "C", alias = "c")]
    TypeC,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 3] = [ObjectKind::TypeA, ObjectKind::TypeB, ObjectKind::TypeC];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: i32) -> Option<Self> {
        match i {
            0 => Some(ObjectKind::TypeA),
            1 => Some(ObjectKind::TypeB),
            2 => Some(ObjectKind::TypeC),
            _ => None,
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = ['A', 'B', 'C'][self.index() as usize];
        write!(f, "Type{c}")
    }
}

pub type ObjectId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualObject {
    pub kind: ObjectKind,
    pub position: Vec3,
    pub velocity: Vec3,
    pub radius: f64,
    /// Held objects ignore gravity and contacts until released.
    pub held: bool,
}

impl VirtualObject {
    pub fn new(kind: ObjectKind, position: Vec3, radius: f64) -> Self {
        VirtualObject {
            kind,
            position,
            velocity: Vec3::ZERO,
            radius,
            held: false,
        }
    }

    /// Kinetic plus potential energy per unit mass.
    pub fn mechanical_energy(&self, gravity: Vec3) -> f64 {
        0.5 * self.velocity.dot(self.velocity) - gravity.dot(self.position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityState {
    pub g: Vec3,
}

impl Default for GravityState {
    fn default() -> Self {
        GravityState { g: DEFAULT_GRAVITY }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionEvent {
    pub object: ObjectId,
    pub kind: ObjectKind,
    /// Pre-collision normal speed, m/s.
    pub speed: f64,
    /// Contact point on the surface.
    pub position: Vec3,
    pub surface: Surface,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub restitution: f64,
    /// Normal speeds below this resolve silently as resting contact.
    pub rest_threshold: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            restitution: 0.8,
            rest_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrabOutcome {
    /// The requested position was outside the room and got clamped.
    pub clamped: bool,
}

struct Contact {
    normal: Vec3,
    depth: f64,
    surface: Surface,
}

#[derive(Debug, Clone)]
pub struct World {
    geometry: RoomGeometry,
    objects: Vec<VirtualObject>,
    pub gravity: GravityState,
    pub params: PhysicsParams,
    time: f64,
}

impl World {
    pub fn new(geometry: RoomGeometry, params: PhysicsParams) -> Self {
        World {
            geometry,
            objects: Vec::new(),
            gravity: GravityState::default(),
            params,
            time: 0.0,
        }
    }

    pub fn geometry(&self) -> &RoomGeometry {
        &self.geometry
    }

    pub fn objects(&self) -> &[VirtualObject] {
        &self.objects
    }

    pub fn object(&self, id: ObjectId) -> Result<&VirtualObject, RoomError> {
        self.objects.get(id).ok_or(RoomError::UnknownObject(id))
    }

    fn object_mut(&mut self, id: ObjectId) -> Result<&mut VirtualObject, RoomError> {
        self.objects.get_mut(id).ok_or(RoomError::UnknownObject(id))
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spawn(
        &mut self,
        kind: ObjectKind,
        position: Vec3,
        radius: f64,
    ) -> Result<ObjectId, RoomError> {
        if radius.is_nan() || radius <= 0.0 || !position.is_finite() {
            return Err(RoomError::Invalid(format!(
                "cannot spawn object with radius {radius} at {position:?}"
            )));
        }
        let (position, _) = self.clamp_inside(position, radius);
        self.objects
            .push(VirtualObject::new(kind, position, radius));
        Ok(self.objects.len() - 1)
    }

    /// Adds `impulse` (a velocity change) to the object and releases it if held.
    pub fn apply_impulse(&mut self, id: ObjectId, impulse: Vec3) -> Result<(), RoomError> {
        let obj = self.object_mut(id)?;
        obj.velocity += impulse;
        obj.held = false;
        Ok(())
    }

    /// Places a held object; out-of-room targets are clamped to the walls
    /// inset by the object radius.
    pub fn grab_move(&mut self, id: ObjectId, position: Vec3) -> Result<GrabOutcome, RoomError> {
        let radius = self.object(id)?.radius;
        let (clamped_pos, clamped) = self.clamp_inside(position, radius);
        if clamped {
            log::warn!("grab target {position:?} outside room, clamped to {clamped_pos:?}");
        }
        let obj = self.object_mut(id)?;
        obj.position = clamped_pos;
        obj.velocity = Vec3::ZERO;
        obj.held = true;
        Ok(GrabOutcome { clamped })
    }

    pub fn release(&mut self, id: ObjectId) -> Result<(), RoomError> {
        self.object_mut(id)?.held = false;
        Ok(())
    }

    fn clamp_inside(&self, p: Vec3, radius: f64) -> (Vec3, bool) {
        let b = self.geometry.bounds();
        let lo = b.min.map(|v| v + radius);
        let hi = b.max.map(|v| v - radius);
        let c = Vec3::new(
            clamp_axis(p.x, lo.x, hi.x),
            clamp_axis(p.y, lo.y, hi.y),
            clamp_axis(p.z, lo.z, hi.z),
        );
        (c, c != p)
    }

    /// Advances the simulation by `dt` seconds and returns the audible contacts.
    pub fn step(&mut self, dt: f64) -> Vec<CollisionEvent> {
        assert!(dt > 0.0, "dt must be positive");
        self.time += dt;
        let mut events = Vec::new();
        for id in 0..self.objects.len() {
            if self.objects[id].held {
                continue;
            }
            self.step_object(id, dt, &mut events);
        }
        events
    }

    fn step_object(&mut self, id: ObjectId, dt: f64, events: &mut Vec<CollisionEvent>) {
        let g = self.gravity.g;
        let params = self.params;
        let mut obj = self.objects[id].clone();
        let start_energy = obj.mechanical_energy(g);

        // Resting contact: a surface the object already touches cancels the
        // part of gravity pushing into it.
        let mut g_eff = g;
        for contact in self.contacts(&obj, -TOUCH_EPS) {
            let n = contact.normal;
            let vn = obj.velocity.dot(n);
            if vn <= 0.0 && -vn < params.rest_threshold && g_eff.dot(n) < 0.0 {
                g_eff -= n * g_eff.dot(n);
                obj.velocity -= n * vn;
            }
        }

        obj.velocity += g_eff * dt;
        obj.position += obj.velocity * dt;

        let mut touched = false;
        for _ in 0..MAX_CONTACT_PASSES {
            let deepest = self.contacts(&obj, PENETRATION_EPS).into_iter().fold(
                None::<Contact>,
                |best, c| match best {
                    Some(b) if b.depth >= c.depth => Some(b),
                    _ => Some(c),
                },
            );
            let Some(contact) = deepest else { break };
            touched = true;
            let n = contact.normal;
            obj.position += n * contact.depth;
            let vn = obj.velocity.dot(n);
            if vn < 0.0 {
                let speed = -vn;
                if speed >= params.rest_threshold {
                    obj.velocity -= n * ((1.0 + params.restitution) * vn);
                    events.push(CollisionEvent {
                        object: id,
                        kind: obj.kind,
                        speed,
                        // snap away rounding error so the point lies on the surface
                        position: self
                            .geometry
                            .bounds()
                            .closest_point(obj.position - n * obj.radius),
                        surface: contact.surface,
                        timestamp: self.time,
                    });
                } else {
                    obj.velocity -= n * vn;
                }
            }
        }

        let (inside, clamped) = self.clamp_inside(obj.position, obj.radius);
        if clamped {
            // only reachable when furniture pushes an object into a wall
            for axis in 0..3 {
                if inside[axis] != obj.position[axis] {
                    set_axis(&mut obj.velocity, axis, 0.0);
                }
            }
            obj.position = inside;
            touched = true;
        }

        if touched {
            let allowed_kinetic = start_energy + g.dot(obj.position);
            let kinetic = 0.5 * obj.velocity.dot(obj.velocity);
            if kinetic > allowed_kinetic {
                obj.velocity = if allowed_kinetic > 0.0 {
                    obj.velocity * (allowed_kinetic / kinetic).sqrt()
                } else {
                    Vec3::ZERO
                };
            }
        }

        self.objects[id] = obj;
    }

    /// All surfaces whose penetration depth exceeds `min_depth`, room faces
    /// first then furniture in declaration order.
    fn contacts(&self, obj: &VirtualObject, min_depth: f64) -> Vec<Contact> {
        let mut out = Vec::new();
        let b = self.geometry.bounds();
        let p = obj.position;
        let r = obj.radius;
        for face in Face::ALL {
            let n = face.normal();
            let plane = match face {
                Face::Floor | Face::WallWest | Face::WallNorth => b.min.dot(n),
                _ => b.max.dot(n),
            };
            let depth = r - (p.dot(n) - plane);
            if depth > min_depth {
                out.push(Contact {
                    normal: n,
                    depth,
                    surface: Surface::Room(face),
                });
            }
        }
        for f in &self.geometry.furniture {
            if let Some((normal, depth)) = sphere_box(p, r, &f.bounds()) {
                if depth > min_depth {
                    out.push(Contact {
                        normal,
                        depth,
                        surface: Surface::Furniture(f.label.clone()),
                    });
                }
            }
        }
        out
    }
}

fn clamp_axis(v: f64, lo: f64, hi: f64) -> f64 {
    if lo > hi {
        (lo + hi) * 0.5
    } else {
        v.clamp(lo, hi)
    }
}

fn set_axis(v: &mut Vec3, axis: usize, value: f64) {
    match axis {
        0 => v.x = value,
        1 => v.y = value,
        _ => v.z = value,
    }
}

/// Outward contact normal and penetration depth of a sphere against a box,
/// or `None` when they are separated by more than the radius.
fn sphere_box(center: Vec3, radius: f64, bx: &Aabb) -> Option<(Vec3, f64)> {
    let closest = bx.closest_point(center);
    let d = center - closest;
    let dist = d.length();
    if dist > 0.0 {
        return (dist < radius + TOUCH_EPS).then(|| (d * (1.0 / dist), radius - dist));
    }
    // center inside the box: leave through the nearest face
    let mut best = (Vec3::ZERO, f64::INFINITY);
    for axis in 0..3 {
        let to_min = center[axis] - bx.min[axis];
        let to_max = bx.max[axis] - center[axis];
        let mut n = Vec3::ZERO;
        if to_min < best.1 {
            set_axis(&mut n, axis, -1.0);
            best = (n, to_min);
        }
        let mut n = Vec3::ZERO;
        if to_max < best.1 {
            set_axis(&mut n, axis, 1.0);
            best = (n, to_max);
        }
    }
    Some((best.0, best.1 + radius))
}

/// Collisions of a `TypeC` object re-roll gravity: downward, with magnitude
/// uniform in `[1, 12]` m/s². Other kinds leave gravity alone.
pub fn maybe_mutate_gravity<R: Rng + ?Sized>(
    event: &CollisionEvent,
    rng: &mut R,
) -> Option<GravityState> {
    if event.kind != ObjectKind::TypeC {
        return None;
    }
    let (lo, hi) = GRAVITY_MAGNITUDE_RANGE;
    let magnitude = rng.gen_range(lo..=hi);
    Some(GravityState {
        g: Vec3::new(0.0, -magnitude, 0.0),
    })
}
