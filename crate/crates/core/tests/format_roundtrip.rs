//! Round-trip guarantees of the machine text format.
//!
//! For any machine, serializing and reparsing must reproduce it exactly,
//! and the canonical form must be a fixpoint of parse-then-serialize. Both
//! are exercised over a large sample of randomly generated machines of both
//! kinds, plus the machine files shipped in `tasks/`.

use evoguard_core::fsm::{parse_controller, parse_machine, parse_plant};
use evoguard_core::{ControllerFsm, Plant};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const STATE_PREFIXES: [&str; 4] = ["s", "state_", "q", "node-"];
const SYMBOL_PREFIXES: [&str; 4] = ["a", "sym_", "x", "sig-"];

fn names(rng: &mut ChaCha8Rng, prefixes: &[&str], count: usize) -> Vec<String> {
    let prefix = *prefixes.choose(rng).expect("non-empty prefix pool");
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

fn random_controller(rng: &mut ChaCha8Rng) -> ControllerFsm {
    let state_count = rng.random_range(1..=6);
    let input_count = rng.random_range(1..=4);
    let output_count = rng.random_range(1..=4);
    let mut fsm = ControllerFsm::new(
        format!("m{}", rng.random_range(0..1000)),
        names(rng, &SYMBOL_PREFIXES, input_count),
        names(rng, &SYMBOL_PREFIXES, output_count),
        names(rng, &STATE_PREFIXES, state_count),
    );
    for state in 0..state_count {
        for input in 0..input_count {
            fsm.set_transition(
                state,
                input,
                rng.random_range(0..state_count),
                rng.random_range(0..output_count),
            );
        }
    }
    fsm.set_initial(rng.random_range(0..state_count));
    fsm
}

fn random_plant(rng: &mut ChaCha8Rng) -> Plant {
    let state_count = rng.random_range(1..=6);
    let input_count = rng.random_range(1..=3);
    let output_count = rng.random_range(1..=3);
    let mut plant = Plant::new(
        format!("p{}", rng.random_range(0..1000)),
        names(rng, &SYMBOL_PREFIXES, input_count),
        names(rng, &SYMBOL_PREFIXES, output_count),
        names(rng, &STATE_PREFIXES, state_count),
    );
    let initial_count = rng.random_range(1..=state_count);
    for _ in 0..initial_count {
        plant.add_initial(rng.random_range(0..state_count));
    }
    for state in 0..state_count {
        plant.set_emit(state, rng.random_range(0..output_count));
        for input in 0..input_count {
            let successor_count = rng.random_range(1..=state_count);
            for _ in 0..successor_count {
                plant.add_transition(state, input, rng.random_range(0..state_count));
            }
        }
    }
    // A few hazard labels, possibly including one that labels no state.
    for h in 0..rng.random_range(0..3u32) {
        let proposition = format!("hazard_{h}");
        if rng.random_range(0..4u32) == 0 {
            plant.declare_hazard(proposition);
        } else {
            for _ in 0..rng.random_range(1..=3u32) {
                plant.add_hazard(proposition.clone(), rng.random_range(0..state_count));
            }
        }
    }
    plant
}

#[test]
fn controllers_round_trip_structurally() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF0F0);
    for case in 0..500 {
        let fsm = random_controller(&mut rng);
        let text = fsm.canonical_text();
        let reparsed = parse_controller(&text)
            .unwrap_or_else(|e| panic!("case {case}: reparse failed: {e}\n{text}"));
        assert_eq!(reparsed, fsm, "case {case} did not survive the round trip:\n{text}");
    }
}

#[test]
fn plants_round_trip_structurally() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0E0E);
    for case in 0..500 {
        let plant = random_plant(&mut rng);
        let text = plant.canonical_text();
        let reparsed = parse_plant(&text)
            .unwrap_or_else(|e| panic!("case {case}: reparse failed: {e}\n{text}"));
        assert_eq!(reparsed, plant, "case {case} did not survive the round trip:\n{text}");
    }
}

#[test]
fn canonical_text_is_a_serialization_fixpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for case in 0..250 {
        let text = if rng.random_range(0..2) == 0 {
            random_controller(&mut rng).canonical_text()
        } else {
            random_plant(&mut rng).canonical_text()
        };
        let again = parse_machine(&text).expect("canonical text parses").canonical_text();
        assert_eq!(again, text, "case {case}: canonical text changed on a second pass");
    }
}

#[test]
fn kind_detection_matches_the_header() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE);
    let controller_text = random_controller(&mut rng).canonical_text();
    let plant_text = random_plant(&mut rng).canonical_text();
    assert_eq!(parse_machine(&controller_text).unwrap().kind(), "fsm");
    assert_eq!(parse_machine(&plant_text).unwrap().kind(), "plant");
    assert!(parse_plant(&controller_text).is_err());
    assert!(parse_controller(&plant_text).is_err());
}

/// The shipped task files must be canonical below their comment banner, so
/// that any tool emitting canonical text reproduces them byte for byte.
#[test]
fn shipped_task_files_are_canonical_modulo_comments() {
    let files = [
        ("tank.plant", evoguard_core::plant::TANK_PLANT_TEXT),
        ("rover.plant", evoguard_core::plant::ROVER_PLANT_TEXT),
        ("tank_ref.fsm", evoguard_core::plant::TANK_REF_TEXT),
    ];
    for (name, text) in files {
        let body: String = text
            .lines()
            .filter(|line| !line.trim_start().starts_with('#') && !line.trim().is_empty())
            .map(|line| format!("{line}\n"))
            .collect();
        let canonical = parse_machine(text)
            .unwrap_or_else(|e| panic!("{name} does not parse: {e}"))
            .canonical_text();
        assert_eq!(canonical, body, "{name} body is not in canonical form");
    }
}
