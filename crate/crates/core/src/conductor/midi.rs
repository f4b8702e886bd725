//! Timed note recording and Standard MIDI File (format 0) export.

use std::collections::BTreeMap;
use std::path::Path;

use super::ConductorError;

pub const DIVISION: u16 = 480;

pub type NoteId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordedNote {
    pub channel: u8,
    pub pitch: u8,
    pub velocity: u8,
    pub on: f64,
    /// `None` while the note is still sounding.
    pub off: Option<f64>,
}

/// Notes in seconds from session start. A note-on for a channel/pitch that
/// is already sounding closes the earlier note first.
#[derive(Debug, Clone, PartialEq)]
pub struct MidiRecording {
    bpm: f64,
    notes: Vec<RecordedNote>,
    open: BTreeMap<(u8, u8), NoteId>,
    programs: BTreeMap<u8, u8>,
}

impl MidiRecording {
    pub fn new(bpm: f64) -> Self {
        MidiRecording {
            bpm,
            notes: Vec::new(),
            open: BTreeMap::new(),
            programs: BTreeMap::new(),
        }
    }

    pub fn bpm(&self) -> f64 {
        self.bpm
    }

    pub fn notes(&self) -> &[RecordedNote] {
        &self.notes
    }

    /// Program change emitted at tick 0 if the channel ends up with notes.
    pub fn set_program(&mut self, channel: u8, program: u8) {
        self.programs.insert(channel & 0x0f, program & 0x7f);
    }

    pub fn note_on(&mut self, channel: u8, pitch: u8, velocity: u8, t: f64) -> NoteId {
        let channel = channel & 0x0f;
        let pitch = pitch & 0x7f;
        if let Some(prev) = self.open.remove(&(channel, pitch)) {
            self.notes[prev].off = Some(t);
        }
        let id = self.notes.len();
        self.notes.push(RecordedNote {
            channel,
            pitch,
            velocity: velocity.clamp(1, 127),
            on: t,
            off: None,
        });
        self.open.insert((channel, pitch), id);
        id
    }

    /// Ends note `id` at `t`. Closing an already closed note does nothing.
    pub fn note_off(&mut self, id: NoteId, t: f64) {
        let Some(note) = self.notes.get_mut(id) else {
            return;
        };
        if note.off.is_some() {
            return;
        }
        note.off = Some(t.max(note.on));
        self.open.remove(&(note.channel, note.pitch));
    }

    pub fn open_notes(&self) -> usize {
        self.open.len()
    }

    /// Closes every sounding note at `t`.
    pub fn close_all(&mut self, t: f64) {
        let ids: Vec<NoteId> = self.open.values().copied().collect();
        for id in ids {
            self.note_off(id, t);
        }
    }

    pub fn ticks(&self, seconds: f64) -> u32 {
        (seconds * self.bpm / 60.0 * DIVISION as f64)
            .round()
            .max(0.0) as u32
    }

    /// Serializes to SMF bytes. Notes still open are closed at the latest
    /// recorded time with a warning.
    pub fn to_smf(&self) -> Vec<u8> {
        let end = self
            .notes
            .iter()
            .map(|n| n.off.unwrap_or(n.on).max(n.on))
            .fold(0.0, f64::max);
        if !self.open.is_empty() {
            log::warn!(
                "{} note(s) still sounding at export; closing them",
                self.open.len()
            );
        }

        // (tick, 0 = off / 1 = on, sequence, bytes)
        let mut events: Vec<(u32, u8, usize, [u8; 3])> = Vec::new();
        for (seq, n) in self.notes.iter().enumerate() {
            let on = self.ticks(n.on);
            let off = self.ticks(n.off.unwrap_or(end));
            if off <= on {
                continue;
            }
            events.push((on, 1, seq, [0x90 | n.channel, n.pitch, n.velocity]));
            events.push((off, 0, seq, [0x80 | n.channel, n.pitch, 0]));
        }
        events.sort_by_key(|&(tick, kind, seq, _)| (tick, kind, seq));

        let mut track = Vec::new();
        let tempo = (60_000_000.0 / self.bpm).round() as u32;
        track.extend(vlq(0));
        track.extend([0xFF, 0x51, 0x03]);
        track.extend(&tempo.to_be_bytes()[1..]);
        for (&channel, &program) in &self.programs {
            if events.iter().any(|e| e.3[0] & 0x0f == channel) {
                track.extend(vlq(0));
                track.extend([0xC0 | channel, program]);
            }
        }
        let mut last = 0;
        for (tick, _, _, bytes) in &events {
            track.extend(vlq(tick - last));
            track.extend(bytes);
            last = *tick;
        }
        track.extend(vlq(0));
        track.extend([0xFF, 0x2F, 0x00]);

        let mut out = Vec::with_capacity(22 + track.len());
        out.extend(b"MThd");
        out.extend(6u32.to_be_bytes());
        out.extend(0u16.to_be_bytes());
        out.extend(1u16.to_be_bytes());
        out.extend(DIVISION.to_be_bytes());
        out.extend(b"MTrk");
        out.extend((track.len() as u32).to_be_bytes());
        out.extend(track);
        out
    }

    pub fn export(&self, path: impl AsRef<Path>) -> Result<(), ConductorError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_smf()).map_err(|e| ConductorError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// MIDI variable-length quantity.
pub fn vlq(mut v: u32) -> Vec<u8> {
    let mut out = vec![(v & 0x7f) as u8];
    v >>= 7;
    while v > 0 {
        out.push(0x80 | (v & 0x7f) as u8);
        v >>= 7;
    }
    out.reverse();
    out
}
