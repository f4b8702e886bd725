mod common;

use mr4mr::key::{KeyScale, Mode};
use mr4mr::melody::*;
use mr4mr::sonify::NoteEvent;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn boundary_sequences() -> Vec<TokenSequence> {
    let parse = |s: &str| s.parse::<TokenSequence>().unwrap();
    let repeat = |tok: &str, first: &str| {
        let mut v = vec![first.to_string()];
        v.extend(std::iter::repeat_n(tok.to_string(), SEQUENCE_LEN - 1));
        parse(&v.join(" "))
    };
    vec![
        TokenSequence::rests(),
        repeat("N48", "N48"),
        repeat("N84", "N84"),
        repeat("H", "N84"),
        repeat("H", "N48"),
        repeat("R", "N84"),
        repeat("H", "R"),
        parse(
            &(0..SEQUENCE_LEN)
                .map(|i| if i % 2 == 0 { "N84" } else { "H" })
                .collect::<Vec<_>>()
                .join(" "),
        ),
        parse(
            &(0..SEQUENCE_LEN)
                .map(|i| if i % 2 == 0 { "R" } else { "N48" })
                .collect::<Vec<_>>()
                .join(" "),
        ),
    ]
}

#[test]
fn codec_identity_on_random_and_boundary_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut all = boundary_sequences();
    all.extend((0..1000).map(|_| common::random_sequence(&mut rng)));
    for s in &all {
        assert_eq!(decode(&encode(s)).unwrap(), *s);
    }
}

#[test]
fn zero_and_tiny_noise_are_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut all = boundary_sequences();
    all.extend((0..1000).map(|_| common::random_sequence(&mut rng)));
    for (i, s) in all.iter().enumerate() {
        assert_eq!(reincarnate(s, 0.0, i as u64), *s);
        assert_eq!(reincarnate(s, 1e-4, i as u64), *s);
    }
}

/// Probability that one token changes under `Uniform[0, noise)` latent
/// noise with cell width 1/39: the value moves at least one cell once the
/// draw exceeds half a cell, the top cell is clamped, and a leading REST
/// pushed onto HOLD is repaired back to REST.
fn flip_probability(step: usize, t: Token, noise: f64) -> f64 {
    let cell = 1.0 / ALPHABET_SIZE as f64;
    let p_beyond = |cells: f64| ((noise - cells * cell) / noise).clamp(0.0, 1.0);
    match t.index() {
        i if i == ALPHABET_SIZE - 1 => 0.0,
        0 if step == 0 => p_beyond(1.5),
        _ => p_beyond(0.5),
    }
}

#[test]
fn hamming_drift_matches_analytic_expectation() {
    let noise = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seeds = ChaCha8Rng::seed_from_u64(4);
    let trials = 2000;
    let mut observed = 0.0;
    let mut expected = 0.0;
    for _ in 0..trials {
        let s = common::random_sequence(&mut rng);
        expected += s
            .tokens()
            .iter()
            .enumerate()
            .map(|(i, t)| flip_probability(i, *t, noise))
            .sum::<f64>();
        observed += reincarnate(&s, noise, rand::RngCore::next_u64(&mut seeds)).hamming(&s) as f64;
    }
    let (observed, expected) = (observed / trials as f64, expected / trials as f64);
    // per-trial variance ≤ 32/4, so the standard error is below 0.07
    assert!(
        (observed - expected).abs() < 0.3,
        "observed {observed}, expected {expected}"
    );
    assert!(observed > 0.0 && observed <= 32.0);
}

#[test]
fn continuation_stays_in_every_key() {
    let model = DefaultModel::bundled();
    let base: TokenSequence =
        "N60 H N62 H N64 H H H N67 H H H N64 H N62 H R R R R R R R R R R R R R R R R"
            .parse()
            .unwrap();
    for tonic in 0..12 {
        for mode in [Mode::Major, Mode::Minor] {
            let key = KeyScale::new(tonic, mode);
            for seed in 0..5 {
                let s = continue_melody(&base, &model, key, seed).unwrap();
                assert_eq!(s.bar(0), base.bar(0));
                for (step, pitch) in s.notes().filter(|(i, _)| *i >= STEPS_PER_BAR) {
                    assert!(key.contains(pitch), "{key}: step {step} pitch {pitch}");
                }
                assert_eq!(s, continue_melody(&base, &model, key, seed).unwrap());
            }
        }
    }
}

fn note(t: f64, pitch: u8, velocity: u8) -> NoteEvent {
    NoteEvent {
        pitch,
        velocity,
        channel: 0,
        pan: 0.0,
        gain: 1.0,
        timestamp: t,
    }
}

#[test]
fn grid_placement_at_120_bpm() {
    // grid = 60 / 120 / 4 = 0.125 s
    let events = [
        note(10.0, 60, 80),
        note(10.13, 62, 80),
        note(10.5, 64, 80),
        note(11.9, 67, 80),
    ];
    let s = window_collisions(&events, &WindowParams::default()).unwrap();
    // 0.13 / 0.125 = 1.04 → 1; 0.5 → 4; 1.9 / 0.125 = 15.2 → 15
    let expected = "N60 N62 H H N64 H H H H H H H H H H N67 R R R R R R R R R R R R R R R R";
    assert_eq!(s.to_string(), expected);
}

#[test]
fn late_notes_clamp_to_last_step_and_conflicts_keep_loudest() {
    let events = [
        note(0.0, 60, 50),
        note(0.05, 72, 90), // same step 0, louder
        note(0.3, 64, 70),  // 2.4 → step 2
        note(0.31, 65, 70), // step 2 again, equal velocity keeps the earlier
        note(2.9, 67, 10),  // 23.2 → clamped to 15
    ];
    let s = window_collisions(&events, &WindowParams::default()).unwrap();
    assert_eq!(s[0], Token::Note(72));
    assert_eq!(s[2], Token::Note(64));
    assert_eq!(s[15], Token::Note(67));
}

#[test]
fn four_in_three_seconds_fire_once() {
    let mut w = CollisionWindow::new(WindowParams::default());
    let fired: Vec<_> = [0.0, 0.7, 1.4, 2.9, 3.2, 3.5]
        .iter()
        .filter_map(|&t| w.push(note(t, 60, 80), 1.0))
        .collect();
    assert_eq!(fired.len(), 1);

    let mut w = CollisionWindow::new(WindowParams::default());
    assert!([0.0, 1.0, 2.0]
        .iter()
        .all(|&t| w.push(note(t, 60, 80), 1.0).is_none()));

    // four notes, but never four inside any 3 s span
    let mut w = CollisionWindow::new(WindowParams::default());
    assert!([0.0, 1.0, 2.0, 3.5]
        .iter()
        .all(|&t| w.push(note(t, 60, 80), 1.0).is_none()));
}
