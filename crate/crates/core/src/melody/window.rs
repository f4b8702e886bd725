//! Turning bursts of collision notes into a one-bar base melody.

use super::tokens::{Token, TokenSequence, SEQUENCE_LEN, STEPS_PER_BAR};
use crate::sonify::NoteEvent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowParams {
    /// Minimum notes inside the window.
    pub min_events: usize,
    /// Window length in seconds.
    pub window_seconds: f64,
    pub bpm: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams {
            min_events: 4,
            window_seconds: 3.0,
            bpm: 120.0,
        }
    }
}

impl WindowParams {
    /// Length of one sixteenth note in seconds.
    pub fn grid(&self) -> f64 {
        60.0 / self.bpm / 4.0
    }
}

/// Index range of the first window holding at least `min_events` notes.
fn first_window(events: &[NoteEvent], params: &WindowParams) -> Option<(usize, usize)> {
    if params.min_events == 0 || events.len() < params.min_events {
        return None;
    }
    let mut end = 0;
    for start in 0..events.len() {
        end = end.max(start);
        while end < events.len()
            && events[end].timestamp - events[start].timestamp <= params.window_seconds
        {
            end += 1;
        }
        if end - start >= params.min_events {
            return Some((start, end));
        }
    }
    None
}

/// Quantizes the first qualifying burst onto bar 1 of a sequence. Bar 2 is
/// left as rests for the continuation to fill.
pub fn window_collisions(events: &[NoteEvent], params: &WindowParams) -> Option<TokenSequence> {
    let (start, end) = first_window(events, params)?;
    let t0 = events[start].timestamp;
    let grid = params.grid();
    let mut onsets: [Option<&NoteEvent>; STEPS_PER_BAR] = [None; STEPS_PER_BAR];
    for e in &events[start..end] {
        let step = ((e.timestamp - t0) / grid)
            .round()
            .clamp(0.0, (STEPS_PER_BAR - 1) as f64) as usize;
        match onsets[step] {
            Some(kept) if kept.velocity >= e.velocity => {}
            _ => onsets[step] = Some(e),
        }
    }
    let mut tokens = [Token::Rest; SEQUENCE_LEN];
    let mut sounding = false;
    for (step, onset) in onsets.iter().enumerate() {
        tokens[step] = match onset {
            Some(e) => {
                sounding = true;
                Token::Note(e.pitch)
            }
            None if sounding => Token::Hold,
            None => Token::Rest,
        };
    }
    TokenSequence::new(tokens).ok()
}

/// Rolling buffer of recent collision notes. Emits a base melody each time
/// the window fills, then starts over.
#[derive(Debug, Clone)]
pub struct CollisionWindow {
    params: WindowParams,
    buffer: Vec<(NoteEvent, f64)>,
}

/// A base melody together with the mean collision height that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMelody {
    pub sequence: TokenSequence,
    pub origin_height: f64,
}

impl CollisionWindow {
    pub fn new(params: WindowParams) -> Self {
        CollisionWindow {
            params,
            buffer: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn push(&mut self, note: NoteEvent, height: f64) -> Option<BaseMelody> {
        let horizon = note.timestamp - self.params.window_seconds;
        self.buffer.retain(|(n, _)| n.timestamp >= horizon);
        self.buffer.push((note, height));
        if self.buffer.len() < self.params.min_events {
            return None;
        }
        let notes: Vec<NoteEvent> = self.buffer.iter().map(|(n, _)| *n).collect();
        let sequence = window_collisions(&notes, &self.params)?;
        let origin_height =
            self.buffer.iter().map(|(_, h)| h).sum::<f64>() / self.buffer.len() as f64;
        self.buffer.clear();
        Some(BaseMelody {
            sequence,
            origin_height,
        })
    }
}
