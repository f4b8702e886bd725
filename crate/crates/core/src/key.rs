//! Keys, scales and scale quantization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Lowest and highest MIDI pitch the engine produces (C3..C6).
pub const PITCH_MIN: u8 = 48;
pub const PITCH_MAX: u8 = 84;

const NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

const MAJOR: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
const NATURAL_MINOR: [u8; 7] = [0, 2, 3, 5, 7, 8, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Major,
    Minor,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Major => "Major",
            Mode::Minor => "Minor",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "major" => Ok(Mode::Major),
            "minor" => Ok(Mode::Minor),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct KeyScale {
    tonic: u8,
    pub mode: Mode,
}

impl KeyScale {
    pub const C_MAJOR: KeyScale = KeyScale {
        tonic: 0,
        mode: Mode::Major,
    };

    /// `tonic` is a pitch class; values above 11 wrap.
    pub const fn new(tonic: u8, mode: Mode) -> Self {
        KeyScale {
            tonic: tonic % 12,
            mode,
        }
    }

    pub fn tonic(&self) -> u8 {
        self.tonic
    }

    pub fn tonic_name(&self) -> &'static str {
        NAMES[self.tonic as usize]
    }

    /// Pitch-class membership mask, bit `pc` set when `pc` is in the scale.
    pub fn mask(&self) -> u16 {
        scale_set(*self).iter().fold(0u16, |m, &pc| m | 1 << pc)
    }

    pub fn contains(&self, pitch: u8) -> bool {
        self.mask() & (1 << (pitch % 12)) != 0
    }
}

impl Default for KeyScale {
    fn default() -> Self {
        KeyScale::C_MAJOR
    }
}

impl fmt::Display for KeyScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.tonic_name(), self.mode)
    }
}

impl FromStr for KeyScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        let (Some(tonic), Some(mode), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("expected \"<tonic> <mode>\", got {s:?}"));
        };
        let pc = NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(tonic))
            .ok_or_else(|| format!("unknown tonic {tonic:?}"))?;
        Ok(KeyScale::new(pc as u8, mode.parse()?))
    }
}

impl TryFrom<String> for KeyScale {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<KeyScale> for String {
    fn from(k: KeyScale) -> String {
        k.to_string()
    }
}

/// Pitch classes of the key, tonic first.
pub fn scale_set(key: KeyScale) -> [u8; 7] {
    let steps = match key.mode {
        Mode::Major => MAJOR,
        Mode::Minor => NATURAL_MINOR,
    };
    steps.map(|s| (key.tonic + s) % 12)
}

/// Nearest in-scale pitch within `PITCH_MIN..=PITCH_MAX`; ties resolve downward.
pub fn quantize_to_scale(pitch: i32, key: KeyScale) -> u8 {
    let mask = key.mask();
    let target = pitch.clamp(PITCH_MIN as i32, PITCH_MAX as i32);
    let in_scale = |p: i32| mask & (1 << p.rem_euclid(12)) != 0;
    for d in 0..=(PITCH_MAX - PITCH_MIN) as i32 {
        let down = target - d;
        if down >= PITCH_MIN as i32 && in_scale(down) {
            return down as u8;
        }
        let up = target + d;
        if up <= PITCH_MAX as i32 && in_scale(up) {
            return up as u8;
        }
    }
    unreachable!("every 7-note scale has a member in any octave")
}
