//! Static room description: an axis-aligned room box plus furniture boxes.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RoomError;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.contains(other.min) && self.contains(other.max)
    }

    pub fn closest_point(&self, p: Vec3) -> Vec3 {
        Vec3::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
            p.z.clamp(self.min.z, self.max.z),
        )
    }

    fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && (0..3).all(|i| self.min[i] < self.max[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Furniture {
    pub label: String,
    pub min: Vec3,
    pub max: Vec3,
}

impl Furniture {
    pub fn bounds(&self) -> Aabb {
        Aabb::new(self.min, self.max)
    }
}

/// One of the six inner faces of the room box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Floor,
    Ceiling,
    WallWest,
    WallEast,
    WallNorth,
    WallSouth,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::Floor,
        Face::Ceiling,
        Face::WallWest,
        Face::WallEast,
        Face::WallNorth,
        Face::WallSouth,
    ];

    /// Normal pointing into the room.
    pub fn normal(self) -> Vec3 {
        match self {
            Face::Floor => Vec3::new(0.0, 1.0, 0.0),
            Face::Ceiling => Vec3::new(0.0, -1.0, 0.0),
            Face::WallWest => Vec3::new(1.0, 0.0, 0.0),
            Face::WallEast => Vec3::new(-1.0, 0.0, 0.0),
            Face::WallNorth => Vec3::new(0.0, 0.0, 1.0),
            Face::WallSouth => Vec3::new(0.0, 0.0, -1.0),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Face::Floor => "floor",
            Face::Ceiling => "ceiling",
            Face::WallWest => "wall-west",
            Face::WallEast => "wall-east",
            Face::WallNorth => "wall-north",
            Face::WallSouth => "wall-south",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Surface {
    Room(Face),
    Furniture(String),
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surface::Room(face) => f.write_str(face.name()),
            Surface::Furniture(label) => f.write_str(label),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomSize {
    pub width: f64,
    pub height: f64,
    pub depth: f64,
}

/// Room spans `(0,0,0)..(width,height,depth)`; the floor is `y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomGeometry {
    pub room: RoomSize,
    #[serde(default)]
    pub furniture: Vec<Furniture>,
}

impl RoomGeometry {
    pub fn new(width: f64, height: f64, depth: f64) -> Self {
        RoomGeometry {
            room: RoomSize {
                width,
                height,
                depth,
            },
            furniture: Vec::new(),
        }
    }

    pub fn with_furniture(mut self, label: &str, min: Vec3, max: Vec3) -> Self {
        self.furniture.push(Furniture {
            label: label.to_string(),
            min,
            max,
        });
        self
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::new(
            Vec3::ZERO,
            Vec3::new(self.room.width, self.room.height, self.room.depth),
        )
    }

    pub fn height(&self) -> f64 {
        self.room.height
    }

    pub fn center(&self) -> Vec3 {
        self.bounds().center()
    }

    pub fn validate(&self) -> Result<(), RoomError> {
        let bounds = self.bounds();
        if !bounds.is_valid() {
            return Err(RoomError::Invalid(format!(
                "room dimensions must be positive, got {:?}",
                self.room
            )));
        }
        for f in &self.furniture {
            if !f.bounds().is_valid() {
                return Err(RoomError::Invalid(format!(
                    "furniture {:?} has an empty or inverted box",
                    f.label
                )));
            }
            if !bounds.contains_box(&f.bounds()) {
                return Err(RoomError::Invalid(format!(
                    "furniture {:?} extends outside the room",
                    f.label
                )));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, RoomError> {
        let geometry: RoomGeometry = toml::from_str(text)?;
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RoomError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RoomError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }
}

impl Default for RoomGeometry {
    /// A 6 × 3 × 5 m room with a desk and a shelf.
    fn default() -> Self {
        RoomGeometry::new(6.0, 3.0, 5.0)
            .with_furniture("desk", Vec3::new(1.0, 0.0, 1.0), Vec3::new(2.6, 0.75, 1.8))
            .with_furniture("shelf", Vec3::new(5.4, 0.0, 2.0), Vec3::new(6.0, 1.8, 3.5))
    }
}
