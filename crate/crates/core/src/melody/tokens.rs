use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use super::MelodyError;
use crate::key::{PITCH_MAX, PITCH_MIN};

/// Sixteenth-note steps per bar (4/4).
pub const STEPS_PER_BAR: usize = 16;
/// Steps in a two-bar sequence.
pub const SEQUENCE_LEN: usize = 2 * STEPS_PER_BAR;
/// REST, HOLD and one NOTE per pitch in `PITCH_MIN..=PITCH_MAX`.
pub const ALPHABET_SIZE: usize = 2 + (PITCH_MAX - PITCH_MIN) as usize + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Rest,
    /// Sustains the previous note.
    Hold,
    Note(u8),
}

impl Token {
    pub fn index(self) -> usize {
        match self {
            Token::Rest => 0,
            Token::Hold => 1,
            Token::Note(p) => 2 + (p - PITCH_MIN) as usize,
        }
    }

    pub fn from_index(i: usize) -> Option<Token> {
        match i {
            0 => Some(Token::Rest),
            1 => Some(Token::Hold),
            i if i < ALPHABET_SIZE => Some(Token::Note(PITCH_MIN + (i - 2) as u8)),
            _ => None,
        }
    }

    pub fn pitch(self) -> Option<u8> {
        match self {
            Token::Note(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_note(self) -> bool {
        matches!(self, Token::Note(_))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Rest => f.write_str("R"),
            Token::Hold => f.write_str("H"),
            Token::Note(p) => write!(f, "N{p}"),
        }
    }
}

impl FromStr for Token {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R" => Ok(Token::Rest),
            "H" => Ok(Token::Hold),
            _ => {
                let p: u8 = s
                    .strip_prefix('N')
                    .and_then(|n| n.parse().ok())
                    .ok_or_else(|| format!("bad token {s:?}"))?;
                if (PITCH_MIN..=PITCH_MAX).contains(&p) {
                    Ok(Token::Note(p))
                } else {
                    Err(format!("pitch {p} outside {PITCH_MIN}..={PITCH_MAX}"))
                }
            }
        }
    }
}

/// Two bars of monophonic melody on the sixteenth grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TokenSequence([Token; SEQUENCE_LEN]);

impl TokenSequence {
    pub fn new(tokens: [Token; SEQUENCE_LEN]) -> Result<Self, MelodyError> {
        if tokens[0] == Token::Hold {
            return Err(MelodyError::InvalidSequence(
                "first step cannot be HOLD".into(),
            ));
        }
        if let Some(p) = tokens
            .iter()
            .filter_map(|t| t.pitch())
            .find(|p| !(PITCH_MIN..=PITCH_MAX).contains(p))
        {
            return Err(MelodyError::InvalidSequence(format!(
                "pitch {p} outside alphabet"
            )));
        }
        Ok(TokenSequence(tokens))
    }

    pub fn from_slice(tokens: &[Token]) -> Result<Self, MelodyError> {
        let arr: [Token; SEQUENCE_LEN] = tokens.try_into().map_err(|_| {
            MelodyError::InvalidSequence(format!(
                "expected {SEQUENCE_LEN} tokens, got {}",
                tokens.len()
            ))
        })?;
        Self::new(arr)
    }

    pub fn rests() -> Self {
        TokenSequence([Token::Rest; SEQUENCE_LEN])
    }

    pub fn tokens(&self) -> &[Token; SEQUENCE_LEN] {
        &self.0
    }

    pub fn bar(&self, bar: usize) -> &[Token] {
        &self.0[bar * STEPS_PER_BAR..(bar + 1) * STEPS_PER_BAR]
    }

    pub fn notes(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.pitch().map(|p| (i, p)))
    }

    /// Replaces tokens with `f(step, token)`, repairing a leading HOLD.
    pub fn map(&self, mut f: impl FnMut(usize, Token) -> Token) -> Self {
        let mut out = self.0;
        for (i, t) in out.iter_mut().enumerate() {
            *t = f(i, *t);
        }
        if out[0] == Token::Hold {
            out[0] = Token::Rest;
        }
        TokenSequence(out)
    }

    pub fn hamming(&self, other: &TokenSequence) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl Index<usize> for TokenSequence {
    type Output = Token;

    fn index(&self, i: usize) -> &Token {
        &self.0[i]
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for TokenSequence {
    type Err = MelodyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = s
            .split_whitespace()
            .map(|t| t.parse::<Token>().map_err(MelodyError::InvalidSequence))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_slice(&tokens)
    }
}
