//! Quantized-grid latent codec.
//!
//! Each step maps to the centre of its token's bin on `[0, 1)`:
//! `z[t] = (index + 0.5) / 39`. Decoding floors back to the bin, so any
//! perturbation smaller than half a bin is absorbed and larger ones move the
//! token to a neighbouring index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tokens::{Token, TokenSequence, ALPHABET_SIZE, SEQUENCE_LEN};
use super::MelodyError;

pub const LATENT_DIM: usize = SEQUENCE_LEN;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentVec(pub [f64; LATENT_DIM]);

impl LatentVec {
    pub fn values(&self) -> &[f64; LATENT_DIM] {
        &self.0
    }
}

pub fn encode(s: &TokenSequence) -> LatentVec {
    LatentVec(
        s.tokens()
            .map(|t| (t.index() as f64 + 0.5) / ALPHABET_SIZE as f64),
    )
}

pub fn decode(z: &LatentVec) -> Result<TokenSequence, MelodyError> {
    if let Some(i) = z.0.iter().position(|v| !v.is_finite()) {
        return Err(MelodyError::NonFinite(i));
    }
    let mut tokens = [Token::Rest; SEQUENCE_LEN];
    for (t, v) in tokens.iter_mut().zip(z.0) {
        let idx = (v * ALPHABET_SIZE as f64).floor();
        let idx = idx.clamp(0.0, (ALPHABET_SIZE - 1) as f64) as usize;
        *t = Token::from_index(idx).expect("index clamped into alphabet");
    }
    if tokens[0] == Token::Hold {
        tokens[0] = Token::Rest;
    }
    TokenSequence::new(tokens)
}

/// Adds `u[t] ~ Uniform[0, noise_scale)` to every latent coordinate.
pub fn perturb(z: &LatentVec, noise_scale: f64, rng: &mut (impl Rng + ?Sized)) -> LatentVec {
    let mut out = z.0;
    if noise_scale > 0.0 {
        for v in out.iter_mut() {
            *v += rng.gen_range(0.0..noise_scale);
        }
    }
    LatentVec(out)
}

/// Encode, perturb with seeded uniform noise, decode.
pub fn reincarnate(s: &TokenSequence, noise_scale: f64, seed: u64) -> TokenSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = perturb(&encode(s), noise_scale, &mut rng);
    decode(&z).expect("finite latent from finite noise")
}
