//! Base-melody windowing, continuation, looping and latent-noise mutation.

mod latent;
mod markov;
mod scheduler;
mod tokens;
mod window;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use latent::{decode, encode, perturb, reincarnate, LatentVec, LATENT_DIM};
pub use markov::{parse_corpus, Backoff, MarkovModel};
pub use scheduler::{ActiveLoop, LoopScheduler, Playback, LOOP_STEPS};
pub use tokens::{Token, TokenSequence, ALPHABET_SIZE, SEQUENCE_LEN, STEPS_PER_BAR};
pub use window::{window_collisions, BaseMelody, CollisionWindow, WindowParams};

use crate::key::{quantize_to_scale, KeyScale};

#[derive(Debug, Error)]
pub enum MelodyError {
    #[error("base melody has no notes in bar 1")]
    EmptyBase,
    #[error("latent coordinate {0} is not finite")]
    NonFinite(usize),
    #[error("invalid token sequence: {0}")]
    InvalidSequence(String),
    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },
    #[error("melody model unavailable: {0}")]
    ModelUnavailable(String),
}

/// Generator behind the loop: continues a base bar and maps sequences to
/// and from a latent space.
pub trait MelodyModel: Send {
    fn continue_melody(
        &self,
        base: &TokenSequence,
        key: KeyScale,
        rng: &mut dyn RngCore,
    ) -> Result<TokenSequence, MelodyError>;

    fn encode(&self, s: &TokenSequence) -> LatentVec;

    fn decode(&self, z: &LatentVec) -> Result<TokenSequence, MelodyError>;
}

/// Grid codec plus Markov continuation. Without a trained chain,
/// `continue_melody` reports the model as unavailable.
#[derive(Debug, Clone)]
pub struct DefaultModel {
    markov: Option<MarkovModel>,
}

impl DefaultModel {
    pub fn new(markov: MarkovModel) -> Self {
        DefaultModel {
            markov: Some(markov),
        }
    }

    pub fn bundled() -> Self {
        Self::new(MarkovModel::bundled())
    }

    pub fn codec_only() -> Self {
        DefaultModel { markov: None }
    }
}

impl MelodyModel for DefaultModel {
    fn continue_melody(
        &self,
        base: &TokenSequence,
        key: KeyScale,
        rng: &mut dyn RngCore,
    ) -> Result<TokenSequence, MelodyError> {
        let markov = self
            .markov
            .as_ref()
            .ok_or_else(|| MelodyError::ModelUnavailable("no Markov chain loaded".into()))?;
        Ok(markov.continue_sequence(base, key, rng))
    }

    fn encode(&self, s: &TokenSequence) -> LatentVec {
        encode(s)
    }

    fn decode(&self, z: &LatentVec) -> Result<TokenSequence, MelodyError> {
        decode(z)
    }
}

/// Maps every NOTE to the nearest pitch of `key`; rests and holds are kept.
pub fn requantize_to_key(s: &TokenSequence, key: KeyScale) -> TokenSequence {
    s.map(|_, t| match t {
        Token::Note(p) => Token::Note(quantize_to_scale(p as i32, key)),
        other => other,
    })
}

/// Fills bar 2 of `base` and quantizes it to `key`. Bar 1 is returned
/// untouched. If the model fails, bar 1 is repeated on the nearest scale
/// tones instead.
pub fn continue_melody(
    base: &TokenSequence,
    model: &dyn MelodyModel,
    key: KeyScale,
    seed: u64,
) -> Result<TokenSequence, MelodyError> {
    if !base.bar(0).iter().any(|t| t.is_note()) {
        return Err(MelodyError::EmptyBase);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generated = match model.continue_melody(base, key, &mut rng) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("melody model failed ({e}); repeating bar 1");
            base.map(|i, t| {
                if i >= STEPS_PER_BAR {
                    base[i - STEPS_PER_BAR]
                } else {
                    t
                }
            })
        }
    };
    Ok(base.map(|i, t| {
        if i < STEPS_PER_BAR {
            t
        } else {
            match generated[i] {
                Token::Note(p) => Token::Note(quantize_to_scale(p as i32, key)),
                other => other,
            }
        }
    }))
}

/// Re-encodes `s` through the model, adds seeded `Uniform[0, noise_scale)`
/// noise to every latent coordinate and decodes.
pub fn reincarnate_with(
    model: &dyn MelodyModel,
    s: &TokenSequence,
    noise_scale: f64,
    seed: u64,
) -> Result<TokenSequence, MelodyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = perturb(&model.encode(s), noise_scale, &mut rng);
    model.decode(&z)
}
