//! Genome construction and the mutation operators.
//!
//! Every function here works on complete controllers and produces complete
//! controllers: each `(state, input)` pair keeps a filled-in table entry and
//! the initial state stays in range. This closure property is what lets the
//! engine compose and check every child without a repair step.
//!
//! Draw order is part of the contract. Changing the number or order of RNG
//! draws in any operator changes every downstream genome of existing runs,
//! so the sequences below are fixed: construction draws transitions
//! state-by-state (successor before output) and the initial state last;
//! each operator documents its own sequence inline.

use rand::Rng;

use super::{MutationKind, MutationWeights};
use crate::fsm::ControllerFsm;

/// Builds a uniformly random complete controller named `candidate`.
///
/// States are named `s0..s{n-1}`. For every state and input, the successor
/// and the output symbol are drawn uniformly; finally the initial state is
/// drawn uniformly.
pub fn random_controller<R: Rng>(
    rng: &mut R,
    inputs: &[String],
    outputs: &[String],
    state_count: usize,
) -> ControllerFsm {
    assert!(state_count > 0, "a controller needs at least one state");
    assert!(!inputs.is_empty() && !outputs.is_empty(), "alphabets must be non-empty");
    let states: Vec<String> = (0..state_count).map(|i| format!("s{i}")).collect();
    let mut fsm = ControllerFsm::new("candidate", inputs.to_vec(), outputs.to_vec(), states);
    for state in 0..state_count {
        for input in 0..inputs.len() {
            let next = rng.random_range(0..state_count);
            let output = rng.random_range(0..outputs.len());
            fsm.set_transition(state, input, next, output);
        }
    }
    fsm.set_initial(rng.random_range(0..state_count));
    fsm
}

/// Applies one mutation operator to a complete controller.
///
/// The operator is drawn from the applicable subset — `add_state` requires
/// room below `max_states`, `delete_state` requires more than one state —
/// with probabilities proportional to `weights`. If every applicable
/// operator has weight 0, `change_transition` is applied as a fallback so
/// that mutation always produces a child.
pub fn mutate<R: Rng>(
    parent: &ControllerFsm,
    weights: &MutationWeights,
    max_states: usize,
    rng: &mut R,
) -> (ControllerFsm, MutationKind) {
    let kind = draw_operator(parent, weights, max_states, rng);
    let child = match kind {
        MutationKind::AddState => add_state(parent, rng),
        MutationKind::DeleteState => delete_state(parent, rng),
        MutationKind::ChangeTransition => change_transition(parent, rng),
        MutationKind::ChangeOutput => change_output(parent, rng),
        MutationKind::ChangeInitial => change_initial(parent, rng),
    };
    (child, kind)
}

fn draw_operator<R: Rng>(
    parent: &ControllerFsm,
    weights: &MutationWeights,
    max_states: usize,
    rng: &mut R,
) -> MutationKind {
    let applicable: Vec<MutationKind> = MutationKind::ALL
        .into_iter()
        .filter(|kind| match kind {
            MutationKind::AddState => parent.state_count() < max_states,
            MutationKind::DeleteState => parent.state_count() > 1,
            _ => true,
        })
        .filter(|&kind| weights.weight_of(kind) > 0.0)
        .collect();
    let total: f64 = applicable.iter().map(|&k| weights.weight_of(k)).sum();
    if total <= 0.0 {
        return MutationKind::ChangeTransition;
    }
    let mut draw = rng.random_range(0.0..total);
    for &kind in &applicable {
        let weight = weights.weight_of(kind);
        if draw < weight {
            return kind;
        }
        draw -= weight;
    }
    // Unreachable save for float rounding at the very top of the range.
    *applicable.last().expect("total > 0 implies a non-empty subset")
}

/// Smallest `s{k}` not already used as a state name.
fn fresh_state_name(names: &[String]) -> String {
    for k in 0.. {
        let candidate = format!("s{k}");
        if !names.contains(&candidate) {
            return candidate;
        }
    }
    unreachable!("some s{{k}} is always free")
}

/// Appends a fresh state and redirects one existing transition to it.
///
/// Draws: the new row (successor then output, per input, over the grown
/// state range), then the `(state, input)` cell redirected to the new state.
fn add_state<R: Rng>(parent: &ControllerFsm, rng: &mut R) -> ControllerFsm {
    let old_count = parent.state_count();
    let inputs = parent.inputs().names().to_vec();
    let outputs = parent.outputs().names().to_vec();
    let mut names = parent.state_names().to_vec();
    names.push(fresh_state_name(&names));

    let mut child = ControllerFsm::new(parent.name(), inputs, outputs, names);
    child.set_initial(parent.initial());
    for state in 0..old_count {
        for input in 0..parent.inputs().len() {
            let entry = parent.entry(state, input).expect("parent is complete");
            child.set_transition(state, input, entry.next, entry.output);
        }
    }
    let new_state = old_count;
    for input in 0..parent.inputs().len() {
        let next = rng.random_range(0..old_count + 1);
        let output = rng.random_range(0..parent.outputs().len());
        child.set_transition(new_state, input, next, output);
    }
    let state = rng.random_range(0..old_count);
    let input = rng.random_range(0..parent.inputs().len());
    let kept_output = child.entry(state, input).expect("copied entry").output;
    child.set_transition(state, input, new_state, kept_output);
    child
}

/// Removes one state, rerouting every transition that targeted it.
///
/// Draws: the victim, then a fresh successor for each dangling entry in
/// (surviving state, input) order, then a fresh initial state if the victim
/// was initial.
fn delete_state<R: Rng>(parent: &ControllerFsm, rng: &mut R) -> ControllerFsm {
    let old_count = parent.state_count();
    debug_assert!(old_count > 1, "delete_state needs a spare state");
    let victim = rng.random_range(0..old_count);
    let new_count = old_count - 1;
    let remap = |state: usize| if state > victim { state - 1 } else { state };

    let mut names = parent.state_names().to_vec();
    names.remove(victim);
    let inputs = parent.inputs().names().to_vec();
    let outputs = parent.outputs().names().to_vec();
    let mut child = ControllerFsm::new(parent.name(), inputs, outputs, names);

    for old_state in (0..old_count).filter(|&s| s != victim) {
        for input in 0..parent.inputs().len() {
            let entry = parent.entry(old_state, input).expect("parent is complete");
            let next = if entry.next == victim {
                rng.random_range(0..new_count)
            } else {
                remap(entry.next)
            };
            child.set_transition(remap(old_state), input, next, entry.output);
        }
    }
    let initial = if parent.initial() == victim {
        rng.random_range(0..new_count)
    } else {
        remap(parent.initial())
    };
    child.set_initial(initial);
    child
}

/// Redirects one uniformly drawn `(state, input)` entry to a random
/// successor, keeping its output. Draws: state, input, successor.
fn change_transition<R: Rng>(parent: &ControllerFsm, rng: &mut R) -> ControllerFsm {
    let mut child = parent.clone();
    let state = rng.random_range(0..parent.state_count());
    let input = rng.random_range(0..parent.inputs().len());
    let next = rng.random_range(0..parent.state_count());
    let output = parent.entry(state, input).expect("parent is complete").output;
    child.set_transition(state, input, next, output);
    child
}

/// Replaces the output of one uniformly drawn `(state, input)` entry,
/// keeping its successor. Draws: state, input, output.
fn change_output<R: Rng>(parent: &ControllerFsm, rng: &mut R) -> ControllerFsm {
    let mut child = parent.clone();
    let state = rng.random_range(0..parent.state_count());
    let input = rng.random_range(0..parent.inputs().len());
    let output = rng.random_range(0..parent.outputs().len());
    let next = parent.entry(state, input).expect("parent is complete").next;
    child.set_transition(state, input, next, output);
    child
}

/// Moves the initial state to a uniform draw (possibly where it already is).
fn change_initial<R: Rng>(parent: &ControllerFsm, rng: &mut R) -> ControllerFsm {
    let mut child = parent.clone();
    child.set_initial(rng.random_range(0..parent.state_count()));
    child
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alphabets() -> (Vec<String>, Vec<String>) {
        (
            vec!["lo".into(), "ok".into(), "hi".into()],
            vec!["fill".into(), "drain".into(), "hold".into()],
        )
    }

    fn sample_parent(states: usize) -> ControllerFsm {
        let (inputs, outputs) = alphabets();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        random_controller(&mut rng, &inputs, &outputs, states)
    }

    #[test]
    fn random_controller_is_complete_and_named_candidate() {
        let fsm = sample_parent(4);
        assert_eq!(fsm.name(), "candidate");
        assert_eq!(fsm.state_count(), 4);
        assert!(fsm.validate().is_ok());
        assert!(fsm.initial() < 4);
    }

    #[test]
    fn random_controller_is_deterministic_per_seed() {
        let (inputs, outputs) = alphabets();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let one = random_controller(&mut a, &inputs, &outputs, 3);
        let two = random_controller(&mut b, &inputs, &outputs, 3);
        assert_eq!(one, two);
    }

    #[test]
    fn every_operator_preserves_completeness() {
        let weights = MutationWeights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut genome = sample_parent(2);
        for _ in 0..500 {
            let (child, _) = mutate(&genome, &weights, 5, &mut rng);
            assert!(child.validate().is_ok(), "mutation broke completeness");
            assert!(child.state_count() <= 5);
            assert!(child.state_count() >= 1);
            genome = child;
        }
    }

    #[test]
    fn add_state_grows_by_one_and_makes_the_state_reachable() {
        let parent = sample_parent(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let child = add_state(&parent, &mut rng);
        assert_eq!(child.state_count(), 3);
        assert!(child.validate().is_ok());
        let new_state = 2;
        let reachable = (0..child.state_count()).any(|s| {
            (0..child.inputs().len())
                .any(|i| s != new_state && child.entry(s, i).unwrap().next == new_state)
        });
        assert!(reachable, "no transition from an old state targets the new one");
    }

    #[test]
    fn add_state_never_reuses_a_live_name() {
        let parent = sample_parent(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let child = add_state(&parent, &mut rng);
        assert_eq!(child.state_names().last().map(String::as_str), Some("s3"));
        let mut sorted = child.state_names().to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), child.state_count());
    }

    #[test]
    fn delete_state_shrinks_by_one_and_leaves_no_dangling_targets() {
        let parent = sample_parent(4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let child = delete_state(&parent, &mut rng);
        assert_eq!(child.state_count(), 3);
        assert!(child.validate().is_ok());
        for state in 0..child.state_count() {
            for input in 0..child.inputs().len() {
                assert!(child.entry(state, input).unwrap().next < child.state_count());
            }
        }
        assert!(child.initial() < child.state_count());
    }

    #[test]
    fn operator_gating_respects_bounds() {
        let weights = MutationWeights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // One state: delete_state must never be drawn.
        let single = sample_parent(1);
        for _ in 0..200 {
            let (child, kind) = mutate(&single, &weights, 5, &mut rng);
            assert_ne!(kind, MutationKind::DeleteState);
            assert!(child.state_count() >= 1);
        }
        // At the cap: add_state must never be drawn.
        let capped = sample_parent(3);
        for _ in 0..200 {
            let (_, kind) = mutate(&capped, &weights, 3, &mut rng);
            assert_ne!(kind, MutationKind::AddState);
        }
    }

    #[test]
    fn zero_weight_disables_an_operator() {
        let weights = MutationWeights {
            change_initial: 0.0,
            ..MutationWeights::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let parent = sample_parent(3);
        for _ in 0..300 {
            let (_, kind) = mutate(&parent, &weights, 5, &mut rng);
            assert_ne!(kind, MutationKind::ChangeInitial);
        }
    }

    #[test]
    fn all_weights_zero_falls_back_to_change_transition() {
        let weights = MutationWeights {
            add_state: 0.0,
            delete_state: 0.0,
            change_transition: 0.0,
            change_output: 0.0,
            change_initial: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let parent = sample_parent(3);
        let (_, kind) = mutate(&parent, &weights, 5, &mut rng);
        assert_eq!(kind, MutationKind::ChangeTransition);
    }

    #[test]
    fn fresh_names_fill_the_smallest_gap() {
        let names = vec!["s0".to_string(), "s2".to_string()];
        assert_eq!(fresh_state_name(&names), "s1");
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(fresh_state_name(&names), "s0");
    }
}
