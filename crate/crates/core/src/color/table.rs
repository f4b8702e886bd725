//! Color-range → key/scale table.
//!
//! Rows are scanned in order and the first row whose hue, saturation and
//! value intervals all contain the color wins. Colors that fall in no row
//! take the row with the smallest box distance (circular hue distance in
//! turns plus interval distance in saturation and value), earliest row on
//! ties.

use super::hsv::Hsv;
use crate::key::{KeyScale, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub hi_open: bool,
}

impl Interval {
    const fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            hi_open: false,
        }
    }

    const fn half_open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            hi_open: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo
            && if self.hi_open {
                x < self.hi
            } else {
                x <= self.hi
            }
    }

    /// Distance to the closure of the interval.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingRow {
    pub name: &'static str,
    /// Degrees, closed on both ends.
    pub hue: Interval,
    pub saturation: Interval,
    pub value: Interval,
    pub key: KeyScale,
}

impl MappingRow {
    pub fn contains(&self, c: Hsv) -> bool {
        self.hue.contains(c.h) && self.saturation.contains(c.s) && self.value.contains(c.v)
    }

    pub fn distance(&self, c: Hsv) -> f64 {
        let hue = if self.hue.contains(c.h) {
            0.0
        } else {
            circular_degrees(c.h, self.hue.lo).min(circular_degrees(c.h, self.hue.hi))
        };
        hue / 360.0 + self.saturation.distance(c.s) + self.value.distance(c.v)
    }
}

fn circular_degrees(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

const fn row(
    name: &'static str,
    hue: (f64, f64),
    saturation: Interval,
    value: Interval,
    tonic: u8,
    mode: Mode,
) -> MappingRow {
    MappingRow {
        name,
        hue: Interval::closed(hue.0, hue.1),
        saturation,
        value,
        key: KeyScale::new(tonic, mode),
    }
}

use Interval as I;
use Mode::{Major, Minor};

/// The 22 rows in their published order. Byzantium's value upper bound is
/// printed as "6)"; it is read as `.6` exclusive.
pub const TABLE: [MappingRow; 22] = [
    row(
        "Red",
        (331.0, 360.0),
        I::closed(0.0, 0.6),
        I::closed(0.7, 1.0),
        0,
        Major,
    ),
    row(
        "Maroon",
        (0.0, 19.0),
        I::closed(0.0, 0.6),
        I::half_open(0.0, 0.7),
        0,
        Minor,
    ),
    row(
        "Light Orange",
        (20.0, 49.0),
        I::closed(0.7, 1.0),
        I::closed(0.8, 1.0),
        7,
        Major,
    ),
    row(
        "Mustard Yellow",
        (20.0, 49.0),
        I::closed(0.3, 1.0),
        I::half_open(0.5, 0.8),
        7,
        Minor,
    ),
    row(
        "Canary Yellow",
        (50.0, 90.0),
        I::half_open(0.0, 0.7),
        I::closed(0.8, 1.0),
        2,
        Major,
    ),
    row(
        "Olive",
        (50.0, 90.0),
        I::closed(0.4, 1.0),
        I::half_open(0.2, 0.8),
        2,
        Minor,
    ),
    row(
        "Neon Green",
        (91.0, 140.0),
        I::closed(0.2, 1.0),
        I::closed(0.8, 1.0),
        9,
        Major,
    ),
    row(
        "Dark Green",
        (91.0, 140.0),
        I::closed(0.5, 1.0),
        I::half_open(0.1, 0.8),
        9,
        Minor,
    ),
    row(
        "Aquamarine",
        (141.0, 200.0),
        I::half_open(0.0, 0.3),
        I::closed(0.8, 1.0),
        4,
        Major,
    ),
    row(
        "Teal",
        (141.0, 200.0),
        I::closed(0.2, 1.0),
        I::closed(0.2, 0.7),
        4,
        Minor,
    ),
    row(
        "Blue",
        (201.0, 248.0),
        I::closed(0.2, 1.0),
        I::closed(0.6, 1.0),
        11,
        Major,
    ),
    row(
        "Navy Blue",
        (201.0, 248.0),
        I::closed(0.2, 0.7),
        I::half_open(0.0, 0.6),
        11,
        Minor,
    ),
    row(
        "Blue Violet",
        (249.0, 265.0),
        I::closed(0.6, 1.0),
        I::closed(0.7, 1.0),
        6,
        Major,
    ),
    row(
        "Indigo Purple",
        (249.0, 265.0),
        I::closed(0.0, 0.7),
        I::half_open(0.0, 0.7),
        6,
        Minor,
    ),
    row(
        "Heliotrope Purple",
        (266.0, 277.0),
        I::half_open(0.0, 0.5),
        I::closed(0.5, 1.0),
        1,
        Major,
    ),
    row(
        "Koki Murasaki",
        (266.0, 283.0),
        I::closed(0.1, 1.0),
        I::half_open(0.0, 0.5),
        1,
        Minor,
    ),
    row(
        "Magenta",
        (284.0, 310.0),
        I::closed(0.4, 1.0),
        I::closed(0.6, 1.0),
        8,
        Major,
    ),
    row(
        "Byzantium",
        (284.0, 310.0),
        I::closed(0.1, 1.0),
        I::half_open(0.2, 0.6),
        8,
        Minor,
    ),
    row(
        "Azalea Pink",
        (311.0, 330.0),
        I::closed(0.6, 1.0),
        I::closed(0.2, 1.0),
        10,
        Major,
    ),
    row(
        "English Violet",
        (311.0, 330.0),
        I::half_open(0.1, 0.6),
        I::closed(0.1, 0.4),
        10,
        Minor,
    ),
    row(
        "Flamingo Pink",
        (331.0, 350.0),
        I::closed(0.2, 0.8),
        I::closed(0.6, 1.0),
        5,
        Major,
    ),
    row(
        "Tyrian Purple",
        (331.0, 350.0),
        I::closed(0.2, 1.0),
        I::closed(0.2, 0.7),
        5,
        Minor,
    ),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableMatch {
    pub row: usize,
    pub key: KeyScale,
    /// False when no row contained the color and the nearest row was used.
    pub exact: bool,
}

pub fn lookup(c: Hsv) -> TableMatch {
    if let Some(row) = TABLE.iter().position(|r| r.contains(c)) {
        return TableMatch {
            row,
            key: TABLE[row].key,
            exact: true,
        };
    }
    let mut best = (0, f64::INFINITY);
    for (i, r) in TABLE.iter().enumerate() {
        let d = r.distance(c);
        if d < best.1 {
            best = (i, d);
        }
    }
    TableMatch {
        row: best.0,
        key: TABLE[best.0].key,
        exact: false,
    }
}

pub fn hsv_to_keyscale(c: Hsv) -> KeyScale {
    lookup(c).key
}
