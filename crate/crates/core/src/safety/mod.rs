//! Safety checking by backward reachability.
//!
//! A property `AG body` holds iff no reachable state violates `body`. The
//! checker starts from the violating set and grows it backwards through the
//! transition relation until nothing new is added: a state joins the set as
//! soon as *any* successor is already in it (a single bad disturbance
//! resolution is enough to condemn a state). The system is safe exactly
//! when the final set misses every initial state.
//!
//! The growth is organised as a frontier-at-a-time worklist over the
//! reverse adjacency lists, so the total work is linear in the number of
//! product transitions. Checking never produces a counterexample path; the
//! verdict is a pure decision plus two diagnostic counters.

mod parse;

pub use parse::{BoolExpr, PropertyError, SafetyProperty};

use std::collections::BTreeMap;

use crate::fsm::{ClosedLoopSystem, ControllerFsm, StateSet};

/// The two-valued outcome of a safety check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Safe,
    Unsafe,
}

/// A checking result: the verdict plus fixpoint statistics.
///
/// `iterations` counts backward growth rounds: for a safe system, the
/// number of rounds until the flagged set stopped growing; for an unsafe
/// one, the first round at which an initial state was flagged (0 when an
/// initial state violates the predicate outright). `states_flagged` is the
/// size of the flagged set when the verdict was decided.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SafetyVerdict {
    pub value: Verdict,
    pub iterations: usize,
    pub states_flagged: usize,
}

impl SafetyVerdict {
    pub fn is_safe(&self) -> bool {
        self.value == Verdict::Safe
    }
}

/// The set of product states whose predicate evaluates to false.
pub fn bad_states(
    system: &ClosedLoopSystem,
    property: &SafetyProperty,
) -> Result<StateSet, PropertyError> {
    let mut satisfying = eval_expr(property.body(), system.len(), &|atom| {
        system.proposition(atom)
    })?;
    satisfying.complement();
    Ok(satisfying)
}

/// Evaluates a predicate to the set of states satisfying it, by structural
/// recursion with one set operation per node.
fn eval_expr<'v>(
    expr: &BoolExpr,
    universe: usize,
    lookup: &impl Fn(&str) -> Option<&'v StateSet>,
) -> Result<StateSet, PropertyError> {
    match expr {
        BoolExpr::Const(true) => Ok(StateSet::full(universe)),
        BoolExpr::Const(false) => Ok(StateSet::empty(universe)),
        BoolExpr::Atom(name) => match lookup(name) {
            Some(set) => Ok(set.clone()),
            None => Err(PropertyError::UnknownAtom { atom: name.clone() }),
        },
        BoolExpr::Not(inner) => {
            let mut set = eval_expr(inner, universe, lookup)?;
            set.complement();
            Ok(set)
        }
        BoolExpr::And(lhs, rhs) => {
            let mut set = eval_expr(lhs, universe, lookup)?;
            set.intersect_with(&eval_expr(rhs, universe, lookup)?);
            Ok(set)
        }
        BoolExpr::Or(lhs, rhs) => {
            let mut set = eval_expr(lhs, universe, lookup)?;
            set.union_with(&eval_expr(rhs, universe, lookup)?);
            Ok(set)
        }
    }
}

/// The existential one-step preimage: every state with at least one
/// successor inside `targets`.
pub fn preimage(system: &ClosedLoopSystem, targets: &StateSet) -> StateSet {
    assert_eq!(
        targets.universe(),
        system.len(),
        "state set does not belong to this system"
    );
    let mut result = StateSet::empty(system.len());
    for target in targets.iter() {
        for &source in system.predecessors(target) {
            result.insert(source);
        }
    }
    result
}

/// Decides `property` on the closed loop by backward reachability from the
/// violating states.
pub fn check_safe(
    system: &ClosedLoopSystem,
    property: &SafetyProperty,
) -> Result<SafetyVerdict, PropertyError> {
    let flagged = bad_states(system, property)?;
    Ok(backward_verdict(
        system.predecessor_lists(),
        flagged,
        system.initial_states(),
    ))
}

/// Checks a controller in isolation: atoms name output symbols, a state
/// satisfies an atom iff one of its transitions emits that symbol, and the
/// transition graph quantifies existentially over inputs.
///
/// Intended for validated (complete) machines; unspecified table entries
/// contribute neither edges nor emissions.
pub fn check_controller_alone(
    controller: &ControllerFsm,
    property: &SafetyProperty,
) -> Result<SafetyVerdict, PropertyError> {
    let n = controller.state_count();
    // Per-output-symbol valuation over controller states.
    let mut valuation: BTreeMap<&str, StateSet> = BTreeMap::new();
    for symbol in 0..controller.outputs().len() {
        let set = StateSet::from_indices(
            n,
            (0..n).filter(|&state| {
                (0..controller.inputs().len())
                    .any(|input| controller.entry(state, input).map(|e| e.output) == Some(symbol))
            }),
        );
        valuation.insert(controller.outputs().name(symbol), set);
    }
    let mut flagged = eval_expr(property.body(), n, &|atom| valuation.get(atom))?;
    flagged.complement();

    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for state in 0..n {
        for input in 0..controller.inputs().len() {
            if let Some(entry) = controller.entry(state, input) {
                predecessors[entry.next].push(state);
            }
        }
    }
    for preds in &mut predecessors {
        preds.sort_unstable();
        preds.dedup();
    }
    let initial = StateSet::from_indices(n, [controller.initial()]);
    Ok(backward_verdict(&predecessors, flagged, &initial))
}

/// Core fixpoint: grows `flagged` backwards one frontier at a time and
/// reports as soon as the verdict is decided.
///
/// Each round adds exactly the states whose some-successor lies in the set
/// built so far; monotonicity holds by construction and the round count is
/// bounded by the number of states, since a round that adds nothing ends
/// the loop.
fn backward_verdict(
    predecessors: &[Vec<usize>],
    mut flagged: StateSet,
    initial: &StateSet,
) -> SafetyVerdict {
    if flagged.intersects(initial) {
        return SafetyVerdict {
            value: Verdict::Unsafe,
            iterations: 0,
            states_flagged: flagged.len(),
        };
    }
    let mut frontier: Vec<usize> = flagged.iter().collect();
    let mut iterations = 0;
    loop {
        let mut next_frontier = Vec::new();
        let mut initial_hit = false;
        for &target in &frontier {
            for &source in &predecessors[target] {
                if flagged.insert(source) {
                    next_frontier.push(source);
                    if initial.contains(source) {
                        initial_hit = true;
                    }
                }
            }
        }
        if next_frontier.is_empty() {
            return SafetyVerdict {
                value: Verdict::Safe,
                iterations,
                states_flagged: flagged.len(),
            };
        }
        iterations += 1;
        if initial_hit {
            return SafetyVerdict {
                value: Verdict::Unsafe,
                iterations,
                states_flagged: flagged.len(),
            };
        }
        frontier = next_frontier;
    }
}
