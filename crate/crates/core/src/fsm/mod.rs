//! Finite-state machine model: deterministic Mealy controllers,
//! nondeterministic plants, and their synchronous closed-loop product.
//!
//! States are dense integer indices with display names attached; all hot-path
//! structures are index-based vectors. Construction is deliberately
//! permissive — a machine parsed from a file may be incomplete — and
//! [`ControllerFsm::validate`] / [`Plant::validate`] are the gates that decide
//! whether a machine is usable. [`compose`] refuses to build a closed loop
//! from machines that do not pass validation.

mod compose;
mod stateset;
mod text;

pub use compose::{compose, ClosedLoopSystem, ComposeError};
pub(crate) use compose::symbol_maps;
pub use stateset::StateSet;
pub use text::{parse_controller, parse_machine, parse_plant, ParseError, ParsedMachine};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Index of a state within one machine's dense state range.
pub type StateIdx = usize;
/// Index of a symbol within one alphabet.
pub type SymbolIdx = usize;

/// An ordered list of symbol names with index lookup.
///
/// Duplicates are representable on purpose: validation reports them instead
/// of construction rejecting them. Lookup by name resolves to the first
/// occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Self {
        Alphabet { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, idx: SymbolIdx) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<SymbolIdx> {
        self.names.iter().position(|n| n == name)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn duplicates(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut dups = Vec::new();
        for name in &self.names {
            if !seen.insert(name.as_str()) && !dups.contains(name) {
                dups.push(name.clone());
            }
        }
        dups
    }
}

/// One controller table entry: successor state plus emitted output symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransitionEntry {
    pub next: StateIdx,
    pub output: SymbolIdx,
}

/// A deterministic Mealy machine: the controller genome.
///
/// The transition and emission tables are stored as one entry per
/// `(state, input)` pair. A complete machine has every entry filled in;
/// completeness is checked by [`ControllerFsm::validate`], not enforced by
/// construction, so that partially specified files can be parsed and
/// reported on.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerFsm {
    name: String,
    inputs: Alphabet,
    outputs: Alphabet,
    state_names: Vec<String>,
    initial: StateIdx,
    entries: Vec<Vec<Option<TransitionEntry>>>,
}

impl ControllerFsm {
    /// Creates a machine with the given alphabets and states and an entirely
    /// unspecified transition table. The initial state starts at index 0.
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        states: Vec<String>,
    ) -> Self {
        let inputs = Alphabet::new(inputs);
        let entries = states.iter().map(|_| vec![None; inputs.len()]).collect();
        ControllerFsm {
            name: name.into(),
            inputs,
            outputs: Alphabet::new(outputs),
            state_names: states,
            initial: 0,
            entries,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, state: StateIdx) -> &str {
        &self.state_names[state]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_index(&self, name: &str) -> Option<StateIdx> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> StateIdx {
        self.initial
    }

    pub fn set_initial(&mut self, state: StateIdx) {
        assert!(state < self.state_count(), "initial state {state} out of range");
        self.initial = state;
    }

    /// Fills in the table entry for `(state, input)`.
    pub fn set_transition(
        &mut self,
        state: StateIdx,
        input: SymbolIdx,
        next: StateIdx,
        output: SymbolIdx,
    ) {
        assert!(state < self.state_count(), "state {state} out of range");
        assert!(input < self.inputs.len(), "input symbol {input} out of range");
        assert!(next < self.state_count(), "successor state {next} out of range");
        assert!(output < self.outputs.len(), "output symbol {output} out of range");
        self.entries[state][input] = Some(TransitionEntry { next, output });
    }

    /// The table entry for `(state, input)`, if one has been specified.
    pub fn entry(&self, state: StateIdx, input: SymbolIdx) -> Option<TransitionEntry> {
        self.entries[state][input]
    }

    /// Takes one step from `state` on the named input symbol.
    ///
    /// Returns the successor state and the emitted output symbol name.
    pub fn step(&self, state: StateIdx, input: &str) -> Result<(StateIdx, &str), FsmError> {
        if state >= self.state_count() {
            return Err(FsmError::UnknownState(state));
        }
        let input_idx = self
            .inputs
            .index_of(input)
            .ok_or_else(|| FsmError::UnknownSymbol(input.to_string()))?;
        let entry = self.entries[state][input_idx].ok_or_else(|| FsmError::UndefinedTransition {
            state: self.state_names[state].clone(),
            input: input.to_string(),
        })?;
        Ok((entry.next, self.outputs.name(entry.output)))
    }

    /// Checks structural well-formedness and completeness.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        check_alphabet(&self.inputs, "inputs", &mut violations);
        check_alphabet(&self.outputs, "outputs", &mut violations);
        check_states(&self.state_names, &mut violations);
        for (state, row) in self.entries.iter().enumerate() {
            for (input, entry) in row.iter().enumerate() {
                if entry.is_none() {
                    violations.push(Violation::MissingTransition {
                        state: self.state_names[state].clone(),
                        input: self.inputs.name(input).to_string(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }
}

/// A nondeterministic, input-enabled plant with Moore-style sensing.
///
/// The plant consumes actuator symbols (its `inputs`) and emits exactly one
/// sensor symbol per state (drawn from its `outputs`). Nondeterminism lives
/// in the transition relation: a `(state, input)` pair may have several
/// successor states, modelling disturbances. Hazard labels mark the states a
/// safety property may refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct Plant {
    name: String,
    inputs: Alphabet,
    outputs: Alphabet,
    state_names: Vec<String>,
    initials: Vec<StateIdx>,
    emits: Vec<Option<SymbolIdx>>,
    successors: Vec<Vec<Vec<StateIdx>>>,
    hazards: BTreeMap<String, BTreeSet<StateIdx>>,
}

impl Plant {
    pub fn new(
        name: impl Into<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        states: Vec<String>,
    ) -> Self {
        let inputs = Alphabet::new(inputs);
        let successors = states.iter().map(|_| vec![Vec::new(); inputs.len()]).collect();
        Plant {
            name: name.into(),
            inputs,
            outputs: Alphabet::new(outputs),
            emits: vec![None; states.len()],
            state_names: states,
            initials: Vec::new(),
            successors,
            hazards: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, state: StateIdx) -> &str {
        &self.state_names[state]
    }

    pub fn state_index(&self, name: &str) -> Option<StateIdx> {
        self.state_names.iter().position(|n| n == name)
    }

    /// Initial states in ascending index order.
    pub fn initials(&self) -> &[StateIdx] {
        &self.initials
    }

    pub fn add_initial(&mut self, state: StateIdx) {
        assert!(state < self.state_count(), "initial state {state} out of range");
        if let Err(pos) = self.initials.binary_search(&state) {
            self.initials.insert(pos, state);
        }
    }

    /// The sensor symbol emitted in `state`, if declared.
    pub fn emit(&self, state: StateIdx) -> Option<SymbolIdx> {
        self.emits[state]
    }

    pub fn set_emit(&mut self, state: StateIdx, output: SymbolIdx) {
        assert!(state < self.state_count(), "state {state} out of range");
        assert!(output < self.outputs.len(), "output symbol {output} out of range");
        self.emits[state] = Some(output);
    }

    /// Successor states of `(state, input)` in ascending index order.
    pub fn successors(&self, state: StateIdx, input: SymbolIdx) -> &[StateIdx] {
        &self.successors[state][input]
    }

    pub fn add_transition(&mut self, state: StateIdx, input: SymbolIdx, next: StateIdx) {
        assert!(state < self.state_count(), "state {state} out of range");
        assert!(input < self.inputs.len(), "input symbol {input} out of range");
        assert!(next < self.state_count(), "successor state {next} out of range");
        let set = &mut self.successors[state][input];
        if let Err(pos) = set.binary_search(&next) {
            set.insert(pos, next);
        }
    }

    /// Hazard labels: proposition name to the set of states carrying it.
    pub fn hazards(&self) -> impl Iterator<Item = (&str, &BTreeSet<StateIdx>)> {
        self.hazards.iter().map(|(name, states)| (name.as_str(), states))
    }

    pub fn hazard_states(&self, proposition: &str) -> Option<&BTreeSet<StateIdx>> {
        self.hazards.get(proposition)
    }

    pub fn add_hazard(&mut self, proposition: impl Into<String>, state: StateIdx) {
        assert!(state < self.state_count(), "state {state} out of range");
        self.hazards.entry(proposition.into()).or_default().insert(state);
    }

    /// Declares a hazard proposition that may label no state at all.
    pub fn declare_hazard(&mut self, proposition: impl Into<String>) {
        self.hazards.entry(proposition.into()).or_default();
    }

    /// Checks structural well-formedness: non-degenerate alphabets, at least
    /// one initial state, a declared emission for every state, and
    /// input-enabledness of the transition relation.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        check_alphabet(&self.inputs, "inputs", &mut violations);
        check_alphabet(&self.outputs, "outputs", &mut violations);
        check_states(&self.state_names, &mut violations);
        if self.initials.is_empty() {
            violations.push(Violation::NoInitialState);
        }
        for (state, emit) in self.emits.iter().enumerate() {
            if emit.is_none() {
                violations.push(Violation::MissingEmit {
                    state: self.state_names[state].clone(),
                });
            }
        }
        for (state, row) in self.successors.iter().enumerate() {
            for (input, succs) in row.iter().enumerate() {
                if succs.is_empty() {
                    violations.push(Violation::NotInputEnabled {
                        state: self.state_names[state].clone(),
                        input: self.inputs.name(input).to_string(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }
}

fn check_alphabet(alphabet: &Alphabet, which: &'static str, violations: &mut Vec<Violation>) {
    if alphabet.is_empty() {
        violations.push(Violation::EmptyAlphabet { which });
    }
    for symbol in alphabet.duplicates() {
        violations.push(Violation::DuplicateSymbol { which, symbol });
    }
}

fn check_states(names: &[String], violations: &mut Vec<Violation>) {
    if names.is_empty() {
        violations.push(Violation::NoStates);
        return;
    }
    let mut seen = BTreeSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            violations.push(Violation::DuplicateState { state: name.clone() });
        }
    }
}

/// Outcome of validating a machine: either clean or a list of violations.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

/// A single validation finding, naming the offending state, input, or symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyAlphabet { which: &'static str },
    DuplicateSymbol { which: &'static str, symbol: String },
    NoStates,
    DuplicateState { state: String },
    NoInitialState,
    MissingTransition { state: String, input: String },
    MissingEmit { state: String },
    NotInputEnabled { state: String, input: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAlphabet { which } => write!(f, "{which} alphabet is empty"),
            Violation::DuplicateSymbol { which, symbol } => {
                write!(f, "duplicate symbol `{symbol}` in {which}")
            }
            Violation::NoStates => write!(f, "machine declares no states"),
            Violation::DuplicateState { state } => write!(f, "duplicate state name `{state}`"),
            Violation::NoInitialState => write!(f, "plant declares no initial state"),
            Violation::MissingTransition { state, input } => {
                write!(f, "incomplete: no transition for state `{state}` on input `{input}`")
            }
            Violation::MissingEmit { state } => {
                write!(f, "no emitted symbol declared for state `{state}`")
            }
            Violation::NotInputEnabled { state, input } => {
                write!(f, "not input-enabled: state `{state}` has no successor on input `{input}`")
            }
        }
    }
}

/// Errors from using a machine outside its declared state or symbol range.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FsmError {
    #[error("unknown state index {0}")]
    UnknownState(StateIdx),
    #[error("unknown input symbol `{0}`")]
    UnknownSymbol(String),
    #[error("no transition defined for state `{state}` on input `{input}`")]
    UndefinedTransition { state: String, input: String },
}
