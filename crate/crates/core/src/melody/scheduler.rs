//! Bar-synchronous loop playback.
//!
//! The scheduler is driven one sixteenth step at a time. All structural
//! changes (a new base melody, a reincarnated loop, a key change) take effect
//! only on bar boundaries, so a bar is always played from a single complete
//! sequence in a single key.

use rand::RngCore;

use super::tokens::{Token, TokenSequence, SEQUENCE_LEN, STEPS_PER_BAR};
use super::{reincarnate_with, requantize_to_key, MelodyModel};
use crate::key::KeyScale;

pub const LOOP_STEPS: u64 = SEQUENCE_LEN as u64;

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveLoop {
    pub sequence: TokenSequence,
    pub key: KeyScale,
    /// Global step at which the current sequence started.
    pub start_step: u64,
    /// Complete passes since the last mutation.
    pub completed: u32,
    /// Incremented on every reincarnation.
    pub generation: u32,
    pub origin_height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Playback {
    NoteOn {
        step: u64,
        pitch: u8,
        origin_height: f64,
    },
    NoteOff {
        step: u64,
        pitch: u8,
    },
    LoopStarted {
        step: u64,
        sequence: TokenSequence,
    },
    Reincarnated {
        step: u64,
        previous: TokenSequence,
        sequence: TokenSequence,
    },
    Requantized {
        step: u64,
        key: KeyScale,
    },
}

#[derive(Debug, Clone)]
pub struct LoopScheduler {
    active: Option<ActiveLoop>,
    pending: Option<(TokenSequence, f64)>,
    target_key: KeyScale,
    sounding: Option<u8>,
    loops_before_mutation: u32,
    noise_scale: f64,
}

impl LoopScheduler {
    pub fn new(key: KeyScale, loops_before_mutation: u32, noise_scale: f64) -> Self {
        LoopScheduler {
            active: None,
            pending: None,
            target_key: key,
            sounding: None,
            loops_before_mutation: loops_before_mutation.max(1),
            noise_scale,
        }
    }

    pub fn active(&self) -> Option<&ActiveLoop> {
        self.active.as_ref()
    }

    pub fn has_pending(&self) -> bool {
        self.pending.is_some()
    }

    pub fn target_key(&self) -> KeyScale {
        self.target_key
    }

    /// Queues a new loop; it replaces the current one at the next bar line.
    pub fn queue_base(&mut self, sequence: TokenSequence, origin_height: f64) {
        self.pending = Some((sequence, origin_height));
    }

    /// Key applied to the loop from the next bar line on.
    pub fn set_key(&mut self, key: KeyScale) {
        self.target_key = key;
    }

    fn silence(&mut self, step: u64, out: &mut Vec<Playback>) {
        if let Some(pitch) = self.sounding.take() {
            out.push(Playback::NoteOff { step, pitch });
        }
    }

    /// Processes global step `step`. Steps must be fed in increasing order.
    /// `rng` supplies one seed per reincarnation.
    pub fn on_step(
        &mut self,
        step: u64,
        model: &dyn MelodyModel,
        rng: &mut dyn RngCore,
    ) -> Vec<Playback> {
        let mut out = Vec::new();
        if step.is_multiple_of(STEPS_PER_BAR as u64) {
            self.on_bar_line(step, model, rng, &mut out);
        }
        let Some(active) = &self.active else {
            return out;
        };
        let pos = ((step - active.start_step) % LOOP_STEPS) as usize;
        let origin_height = active.origin_height;
        match active.sequence[pos] {
            Token::Note(pitch) => {
                self.silence(step, &mut out);
                self.sounding = Some(pitch);
                out.push(Playback::NoteOn {
                    step,
                    pitch,
                    origin_height,
                });
            }
            Token::Rest => self.silence(step, &mut out),
            Token::Hold => {}
        }
        out
    }

    fn on_bar_line(
        &mut self,
        step: u64,
        model: &dyn MelodyModel,
        rng: &mut dyn RngCore,
        out: &mut Vec<Playback>,
    ) {
        if let Some((sequence, origin_height)) = self.pending.take() {
            self.silence(step, out);
            let sequence = requantize_to_key(&sequence, self.target_key);
            self.active = Some(ActiveLoop {
                sequence,
                key: self.target_key,
                start_step: step,
                completed: 0,
                generation: 0,
                origin_height,
            });
            out.push(Playback::LoopStarted { step, sequence });
            return;
        }
        let Some(active) = self.active.as_mut() else {
            return;
        };
        if step > active.start_step && (step - active.start_step).is_multiple_of(LOOP_STEPS) {
            active.completed += 1;
            if active.completed >= self.loops_before_mutation {
                active.completed = 0;
                let previous = active.sequence;
                let seed = rng.next_u64();
                match reincarnate_with(model, &previous, self.noise_scale, seed) {
                    Ok(next) => {
                        active.sequence = requantize_to_key(&next, active.key);
                        active.generation += 1;
                        out.push(Playback::Reincarnated {
                            step,
                            previous,
                            sequence: active.sequence,
                        });
                    }
                    Err(e) => log::warn!("reincarnation failed, keeping loop: {e}"),
                }
            }
        }
        if active.key != self.target_key {
            active.sequence = requantize_to_key(&active.sequence, self.target_key);
            active.key = self.target_key;
            out.push(Playback::Requantized {
                step,
                key: self.target_key,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::key::Mode;
    use crate::melody::{reincarnate, DefaultModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq() -> TokenSequence {
        "N60 H H H N64 H H H N67 H H H N72 H H H N71 H N67 H N64 H H H N62 H H H R R R R"
            .parse()
            .unwrap()
    }

    fn run(
        s: &mut LoopScheduler,
        steps: std::ops::Range<u64>,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Playback> {
        let model = DefaultModel::codec_only();
        steps.flat_map(|i| s.on_step(i, &model, rng)).collect()
    }

    #[test]
    fn idle_without_loop() {
        let mut s = LoopScheduler::new(KeyScale::C_MAJOR, 1, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run(&mut s, 0..64, &mut rng).is_empty());
    }

    #[test]
    fn zero_noise_loops_forever() {
        let mut s = LoopScheduler::new(KeyScale::C_MAJOR, 1, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        s.queue_base(seq(), 1.0);
        let log = run(&mut s, 0..32 * 10, &mut rng);
        let ons: Vec<(u64, u8)> = log
            .iter()
            .filter_map(|p| match p {
                Playback::NoteOn { step, pitch, .. } => Some((*step, *pitch)),
                _ => None,
            })
            .collect();
        let first: Vec<(u64, u8)> = ons.iter().filter(|(st, _)| *st < 32).cloned().collect();
        assert_eq!(first.len(), 8);
        for k in 0..10u64 {
            let pass: Vec<(u64, u8)> = ons
                .iter()
                .filter(|(st, _)| *st >= 32 * k && *st < 32 * (k + 1))
                .map(|(st, p)| (st - 32 * k, *p))
                .collect();
            assert_eq!(pass, first);
        }
        assert_eq!(s.active().unwrap().sequence, seq());
    }

    #[test]
    fn new_base_waits_for_bar_line() {
        let mut s = LoopScheduler::new(KeyScale::C_MAJOR, 1, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        s.queue_base(seq(), 1.0);
        run(&mut s, 0..21, &mut rng);
        let other: TokenSequence =
            "N48 H H H H H H H H H H H H H H H R R R R R R R R R R R R R R R R"
                .parse()
                .unwrap();
        s.queue_base(other, 2.0);
        let log = run(&mut s, 21..40, &mut rng);
        let started: Vec<u64> = log
            .iter()
            .filter_map(|p| match p {
                Playback::LoopStarted { step, .. } => Some(*step),
                _ => None,
            })
            .collect();
        assert_eq!(started, vec![32]);
        // old loop keeps playing until the swap
        assert!(log.iter().any(|p| matches!(
            p,
            Playback::NoteOn {
                step: 24,
                pitch: 62,
                ..
            }
        )));
        assert!(log.iter().any(|p| matches!(
            p,
            Playback::NoteOn {
                step: 32,
                pitch: 48,
                ..
            }
        )));
    }

    #[test]
    fn mutation_every_loop_matches_reincarnate() {
        let mut s = LoopScheduler::new(KeyScale::C_MAJOR, 1, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut mirror = ChaCha8Rng::seed_from_u64(9);
        s.queue_base(seq(), 1.0);
        let log = run(&mut s, 0..32 * 4, &mut rng);
        let mut expected = seq();
        let mut count = 0;
        for p in &log {
            if let Playback::Reincarnated {
                step,
                previous,
                sequence,
            } = p
            {
                assert_eq!(step % 32, 0);
                assert_eq!(*previous, expected);
                let next = requantize_to_key(
                    &reincarnate(previous, 0.05, mirror.next_u64()),
                    KeyScale::C_MAJOR,
                );
                assert_eq!(*sequence, next);
                expected = next;
                count += 1;
            }
        }
        assert_eq!(count, 3);
    }

    #[test]
    fn mutation_waits_for_l_loops() {
        let mut s = LoopScheduler::new(KeyScale::C_MAJOR, 3, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        s.queue_base(seq(), 1.0);
        let log = run(&mut s, 0..32 * 7, &mut rng);
        let steps: Vec<u64> = log
            .iter()
            .filter_map(|p| match p {
                Playback::Reincarnated { step, .. } => Some(*step),
                _ => None,
            })
            .collect();
        assert_eq!(steps, vec![96, 192]);
    }

    #[test]
    fn key_change_applies_on_bar_line() {
        let mut s = LoopScheduler::new(KeyScale::C_MAJOR, 100, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        s.queue_base(seq(), 1.0);
        run(&mut s, 0..5, &mut rng);
        let b_major = KeyScale::new(11, Mode::Major);
        s.set_key(b_major);
        let log = run(&mut s, 5..32, &mut rng);
        for p in &log {
            match p {
                Playback::NoteOn { step, pitch, .. } if *step < 16 => {
                    assert!(KeyScale::C_MAJOR.contains(*pitch))
                }
                Playback::NoteOn { pitch, .. } => assert!(b_major.contains(*pitch)),
                Playback::Requantized { step, key } => {
                    assert_eq!((*step, *key), (16, b_major))
                }
                _ => {}
            }
        }
    }

    #[test]
    fn every_note_on_is_closed_before_the_next() {
        let mut s = LoopScheduler::new(KeyScale::C_MAJOR, 1, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        s.queue_base(seq(), 1.0);
        let log = run(&mut s, 0..32 * 6, &mut rng);
        let mut open: Option<u8> = None;
        for p in log {
            match p {
                Playback::NoteOn { pitch, .. } => {
                    assert!(open.is_none());
                    open = Some(pitch);
                }
                Playback::NoteOff { pitch, .. } => {
                    assert_eq!(open.take(), Some(pitch));
                }
                _ => {}
            }
        }
    }
}
