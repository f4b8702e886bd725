//! Order-2 token Markov chain with order-1 and uniform-over-scale backoff.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, RngCore};

use super::tokens::{Token, TokenSequence, SEQUENCE_LEN, STEPS_PER_BAR};
use super::MelodyError;
use crate::key::{KeyScale, PITCH_MAX, PITCH_MIN};

const BUNDLED_CORPUS: &str = include_str!("../../assets/corpus.txt");

type Counts = BTreeMap<Token, u32>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarkovModel {
    order2: BTreeMap<(Token, Token), Counts>,
    order1: BTreeMap<Token, Counts>,
}

/// Which table produced a sampled token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backoff {
    Order2,
    Order1,
    Uniform,
}

/// Parses corpus text: one melody per line, whitespace-separated token names.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<Vec<Token>>, MelodyError> {
    let mut melodies = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens = line
            .split_whitespace()
            .map(|t| {
                t.parse::<Token>().map_err(|message| MelodyError::Corpus {
                    line: i + 1,
                    message,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        melodies.push(tokens);
    }
    Ok(melodies)
}

fn transpose(melody: &[Token], shift: i32) -> Option<Vec<Token>> {
    melody
        .iter()
        .map(|t| match *t {
            Token::Note(p) => {
                let q = p as i32 + shift;
                (PITCH_MIN as i32..=PITCH_MAX as i32)
                    .contains(&q)
                    .then_some(Token::Note(q as u8))
            }
            other => Some(other),
        })
        .collect()
}

fn sample(counts: &Counts, rng: &mut dyn RngCore) -> Option<Token> {
    let total: u32 = counts.values().sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.gen_range(0..total);
    for (tok, &c) in counts {
        if r < c {
            return Some(*tok);
        }
        r -= c;
    }
    unreachable!("r < total")
}

impl MarkovModel {
    /// Counts transitions over every melody and every transposition of it
    /// that stays inside the pitch alphabet.
    pub fn train(melodies: &[Vec<Token>]) -> Self {
        let mut model = MarkovModel::default();
        let span = (PITCH_MAX - PITCH_MIN) as i32;
        for melody in melodies {
            for shift in -span..=span {
                let Some(m) = transpose(melody, shift) else {
                    continue;
                };
                for w in m.windows(2) {
                    *model
                        .order1
                        .entry(w[0])
                        .or_default()
                        .entry(w[1])
                        .or_default() += 1;
                }
                for w in m.windows(3) {
                    *model
                        .order2
                        .entry((w[0], w[1]))
                        .or_default()
                        .entry(w[2])
                        .or_default() += 1;
                }
            }
        }
        model
    }

    pub fn from_corpus(text: &str) -> Result<Self, MelodyError> {
        let melodies = parse_corpus(text)?;
        let model = Self::train(&melodies);
        if model.is_empty() {
            return Err(MelodyError::ModelUnavailable(
                "corpus has no transitions".into(),
            ));
        }
        Ok(model)
    }

    pub fn from_corpus_file(path: impl AsRef<Path>) -> Result<Self, MelodyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| MelodyError::ModelUnavailable(format!("{}: {e}", path.display())))?;
        Self::from_corpus(&text)
    }

    /// Model trained on the corpus compiled into the crate.
    pub fn bundled() -> Self {
        Self::from_corpus(BUNDLED_CORPUS).expect("bundled corpus is valid")
    }

    pub fn is_empty(&self) -> bool {
        self.order1.is_empty()
    }

    pub fn next_token(
        &self,
        prev2: Token,
        prev1: Token,
        key: KeyScale,
        rng: &mut dyn RngCore,
    ) -> (Token, Backoff) {
        if let Some(t) = self
            .order2
            .get(&(prev2, prev1))
            .and_then(|c| sample(c, rng))
        {
            return (t, Backoff::Order2);
        }
        if let Some(t) = self.order1.get(&prev1).and_then(|c| sample(c, rng)) {
            return (t, Backoff::Order1);
        }
        let choices: Vec<u8> = (PITCH_MIN..=PITCH_MAX)
            .filter(|&p| key.contains(p))
            .collect();
        let p = choices[rng.gen_range(0..choices.len())];
        (Token::Note(p), Backoff::Uniform)
    }

    /// Fills bar 2 of `base` token by token, conditioning on the two
    /// preceding steps.
    pub fn continue_sequence(
        &self,
        base: &TokenSequence,
        key: KeyScale,
        rng: &mut dyn RngCore,
    ) -> TokenSequence {
        let mut tokens = *base.tokens();
        for i in STEPS_PER_BAR..SEQUENCE_LEN {
            tokens[i] = self.next_token(tokens[i - 2], tokens[i - 1], key, rng).0;
        }
        TokenSequence::new(tokens).expect("generated tokens stay in alphabet")
    }
}
