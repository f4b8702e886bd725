#![allow(dead_code)]

use mr4mr::melody::{Token, TokenSequence, ALPHABET_SIZE, SEQUENCE_LEN};
use mr4mr::osc::{OscArg, OscBundle, OscMessage, OscPacket};
use proptest::prelude::*;
use rand::Rng;

pub fn address() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-zA-Z0-9_]{1,8}", 1..5).prop_map(|segs| format!("/{}", segs.join("/")))
}

pub fn arg() -> impl Strategy<Value = OscArg> {
    prop_oneof![
        any::<i32>().prop_map(OscArg::Int),
        // NaN != NaN would break equality checks; finite and infinite values are fine
        any::<f32>()
            .prop_filter("not NaN", |f| !f.is_nan())
            .prop_map(OscArg::Float),
        "[ -~]{0,20}".prop_map(OscArg::Str),
        prop::collection::vec(any::<u8>(), 0..40).prop_map(OscArg::Blob),
    ]
}

pub fn message() -> impl Strategy<Value = OscMessage> {
    (address(), prop::collection::vec(arg(), 0..8)).prop_map(|(a, args)| OscMessage::new(a, args))
}

pub fn packet() -> impl Strategy<Value = OscPacket> {
    let leaf = message().prop_map(OscPacket::Message);
    leaf.prop_recursive(3, 24, 4, |inner| {
        (any::<u64>(), prop::collection::vec(inner, 0..4))
            .prop_map(|(timetag, elements)| OscPacket::Bundle(OscBundle { timetag, elements }))
    })
}

/// Uniformly random valid sequence: any token anywhere except a leading HOLD.
pub fn random_sequence(rng: &mut impl Rng) -> TokenSequence {
    let mut tokens = [Token::Rest; SEQUENCE_LEN];
    for (i, t) in tokens.iter_mut().enumerate() {
        let idx = if i == 0 {
            // skip index 1 (HOLD)
            match rng.gen_range(0..ALPHABET_SIZE - 1) {
                0 => 0,
                k => k + 1,
            }
        } else {
            rng.gen_range(0..ALPHABET_SIZE)
        };
        *t = Token::from_index(idx).unwrap();
    }
    TokenSequence::new(tokens).unwrap()
}

pub fn asset(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("assets")
        .join(name)
}

/// One interior point per row, in row order, with the printed tonic/mode.
pub const INTERIOR: [(&str, (f64, f64, f64), &str); 22] = [
    ("Red", (340.0, 0.3, 0.9), "C Major"),
    ("Maroon", (10.0, 0.3, 0.5), "C Minor"),
    ("Light Orange", (35.0, 0.85, 0.9), "G Major"),
    ("Mustard Yellow", (35.0, 0.5, 0.65), "G Minor"),
    ("Canary Yellow", (70.0, 0.35, 0.9), "D Major"),
    ("Olive", (70.0, 0.7, 0.5), "D Minor"),
    ("Neon Green", (115.0, 0.6, 0.9), "A Major"),
    ("Dark Green", (115.0, 0.75, 0.45), "A Minor"),
    ("Aquamarine", (170.0, 0.15, 0.9), "E Major"),
    ("Teal", (170.0, 0.6, 0.45), "E Minor"),
    ("Blue", (225.0, 0.6, 0.8), "B Major"),
    ("Navy Blue", (225.0, 0.45, 0.3), "B Minor"),
    ("Blue Violet", (257.0, 0.8, 0.85), "F# Major"),
    ("Indigo Purple", (257.0, 0.35, 0.35), "F# Minor"),
    ("Heliotrope Purple", (271.0, 0.25, 0.75), "C# Major"),
    ("Koki Murasaki", (275.0, 0.55, 0.25), "C# Minor"),
    ("Magenta", (297.0, 0.7, 0.8), "G# Major"),
    ("Byzantium", (297.0, 0.55, 0.4), "G# Minor"),
    ("Azalea Pink", (320.0, 0.8, 0.6), "A# Major"),
    ("English Violet", (320.0, 0.35, 0.25), "A# Minor"),
    ("Flamingo Pink", (340.0, 0.7, 0.8), "F Major"),
    ("Tyrian Purple", (340.0, 0.9, 0.45), "F Minor"),
];
