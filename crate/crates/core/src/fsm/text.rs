//! Line-oriented text format for controllers and plants.
//!
//! A file is UTF-8 text; `#` starts a comment that runs to end of line and
//! blank lines are ignored. The first meaningful line is a header, `fsm
//! <name>` for a controller or `plant <name>` for a plant, followed by the
//! declaration sections. Declarations must appear before use: a `trans:`
//! line may only reference states and symbols that earlier lines declared.
//!
//! ```text
//! fsm <name>            | plant <name>
//! inputs: a b c         # symbols the machine consumes
//! outputs: x y          # symbols the machine emits
//! states: s0 s1
//! initial: s0           # plants may list several
//! emit: s0 x            # plants only: the one symbol emitted in s0
//! hazard <prop>: s1     # plants only; repeatable
//! trans: s0 a -> s1 / x # controllers: one line per (state, input)
//! trans: s0 a -> s1     # plants: repeated lines mean nondeterminism
//! ```
//!
//! Serialization is canonical: sections in the order above, transition lines
//! sorted by (state index, input index, successor index), single spaces, a
//! trailing newline. Parsing a canonical serialization reproduces the
//! machine exactly, and serializing a parse canonicalizes the original file.

use std::fmt::Write as _;

use super::{ControllerFsm, Plant};

/// Result of parsing a machine file of either kind.
#[derive(Clone, Debug, PartialEq)]
pub enum ParsedMachine {
    Controller(ControllerFsm),
    Plant(Plant),
}

impl ParsedMachine {
    pub fn kind(&self) -> &'static str {
        match self {
            ParsedMachine::Controller(_) => "fsm",
            ParsedMachine::Plant(_) => "plant",
        }
    }

    pub fn canonical_text(&self) -> String {
        match self {
            ParsedMachine::Controller(fsm) => fsm.canonical_text(),
            ParsedMachine::Plant(plant) => plant.canonical_text(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    /// The line is not shaped like any directive of the format.
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    /// The line is well-formed but refers to something not declared, or
    /// contradicts an earlier declaration.
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
    /// A required declaration never appeared.
    #[error("missing `{section}` declaration")]
    MissingSection { section: &'static str },
    /// The file parsed, but as the other machine kind.
    #[error("expected a `{expected}` file, found `{found}`")]
    WrongKind { expected: &'static str, found: &'static str },
}

/// Parses a machine file, accepting either kind.
pub fn parse_machine(text: &str) -> Result<ParsedMachine, ParseError> {
    Parser::new().run(text)
}

/// Parses a controller file, rejecting plants.
pub fn parse_controller(text: &str) -> Result<ControllerFsm, ParseError> {
    match parse_machine(text)? {
        ParsedMachine::Controller(fsm) => Ok(fsm),
        ParsedMachine::Plant(_) => Err(ParseError::WrongKind { expected: "fsm", found: "plant" }),
    }
}

/// Parses a plant file, rejecting controllers.
pub fn parse_plant(text: &str) -> Result<Plant, ParseError> {
    match parse_machine(text)? {
        ParsedMachine::Plant(plant) => Ok(plant),
        ParsedMachine::Controller(_) => {
            Err(ParseError::WrongKind { expected: "plant", found: "fsm" })
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

fn semantic(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Semantic { line, message: message.into() }
}

/// `true` for names the format accepts for machines, states, and symbols.
fn valid_name(token: &str) -> bool {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Hazard propositions must also be usable as property atoms, which do not
/// allow `-`.
fn valid_proposition(token: &str) -> bool {
    valid_name(token) && !token.contains('-')
}

#[derive(PartialEq, Clone, Copy)]
enum Kind {
    Controller,
    Plant,
}

struct Parser {
    kind: Option<(Kind, String)>,
    inputs: Option<Vec<String>>,
    outputs: Option<Vec<String>>,
    states: Option<Vec<String>>,
    initial_line: Option<usize>,
    initials: Vec<usize>,
    emits: Vec<Option<usize>>,
    hazards: Vec<(String, Vec<usize>)>,
    controller_entries: Vec<Vec<Option<(usize, usize)>>>,
    plant_transitions: Vec<(usize, usize, usize)>,
}

impl Parser {
    fn new() -> Self {
        Parser {
            kind: None,
            inputs: None,
            outputs: None,
            states: None,
            initial_line: None,
            initials: Vec::new(),
            emits: Vec::new(),
            hazards: Vec::new(),
            controller_entries: Vec::new(),
            plant_transitions: Vec::new(),
        }
    }

    fn run(mut self, text: &str) -> Result<ParsedMachine, ParseError> {
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            self.directive(line_no, &tokens)?;
        }
        self.finish()
    }

    fn directive(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        let head = tokens[0];
        if self.kind.is_none() && head != "fsm" && head != "plant" {
            return Err(syntax(line, "expected `fsm <name>` or `plant <name>` header first"));
        }
        match head {
            "fsm" | "plant" => self.header(line, tokens),
            "inputs:" => {
                let symbols = self.symbol_list(line, tokens)?;
                set_once(&mut self.inputs, symbols).map_err(|()| {
                    syntax(line, "duplicate `inputs:` declaration")
                })
            }
            "outputs:" => {
                let symbols = self.symbol_list(line, tokens)?;
                set_once(&mut self.outputs, symbols).map_err(|()| {
                    syntax(line, "duplicate `outputs:` declaration")
                })
            }
            "states:" => self.state_list(line, tokens),
            "initial:" => self.initial(line, tokens),
            "emit:" => self.emit(line, tokens),
            "hazard" => self.hazard(line, tokens),
            "trans:" => self.transition(line, tokens),
            other => Err(syntax(line, format!("unrecognized directive `{other}`"))),
        }
    }

    fn header(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        if self.kind.is_some() {
            return Err(syntax(line, "duplicate machine header"));
        }
        if tokens.len() != 2 {
            return Err(syntax(line, format!("`{}` header takes exactly one name", tokens[0])));
        }
        if !valid_name(tokens[1]) {
            return Err(syntax(line, format!("invalid machine name `{}`", tokens[1])));
        }
        let kind = if tokens[0] == "fsm" { Kind::Controller } else { Kind::Plant };
        self.kind = Some((kind, tokens[1].to_string()));
        Ok(())
    }

    fn symbol_list(&self, line: usize, tokens: &[&str]) -> Result<Vec<String>, ParseError> {
        if tokens.len() < 2 {
            return Err(syntax(line, format!("`{}` needs at least one symbol", tokens[0])));
        }
        let mut symbols = Vec::new();
        for token in &tokens[1..] {
            if !valid_name(token) {
                return Err(syntax(line, format!("invalid symbol name `{token}`")));
            }
            symbols.push(token.to_string());
        }
        Ok(symbols)
    }

    fn state_list(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        if tokens.len() < 2 {
            return Err(syntax(line, "`states:` needs at least one state"));
        }
        let mut states = Vec::new();
        for token in &tokens[1..] {
            if !valid_name(token) {
                return Err(syntax(line, format!("invalid state name `{token}`")));
            }
            states.push(token.to_string());
        }
        self.emits = vec![None; states.len()];
        set_once(&mut self.states, states)
            .map_err(|()| syntax(line, "duplicate `states:` declaration"))
    }

    fn initial(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        if self.initial_line.is_some() {
            return Err(syntax(line, "duplicate `initial:` declaration"));
        }
        if tokens.len() < 2 {
            return Err(syntax(line, "`initial:` needs at least one state"));
        }
        let kind = self.kind.as_ref().expect("header precedes sections").0;
        if kind == Kind::Controller && tokens.len() != 2 {
            return Err(semantic(line, "controllers declare exactly one initial state"));
        }
        for token in &tokens[1..] {
            let idx = self.resolve_state(line, token)?;
            if !self.initials.contains(&idx) {
                self.initials.push(idx);
            }
        }
        self.initials.sort_unstable();
        self.initial_line = Some(line);
        Ok(())
    }

    fn emit(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        if self.kind.as_ref().expect("header precedes sections").0 != Kind::Plant {
            return Err(syntax(line, "`emit:` is only valid in plant files"));
        }
        if tokens.len() != 3 {
            return Err(syntax(line, "`emit:` takes a state and one output symbol"));
        }
        let state = self.resolve_state(line, tokens[1])?;
        let symbol = self.resolve_symbol(line, &self.outputs, "output", tokens[2])?;
        if self.emits[state].is_some() {
            return Err(semantic(line, format!("duplicate `emit:` for state `{}`", tokens[1])));
        }
        self.emits[state] = Some(symbol);
        Ok(())
    }

    fn hazard(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        if self.kind.as_ref().expect("header precedes sections").0 != Kind::Plant {
            return Err(syntax(line, "`hazard` is only valid in plant files"));
        }
        let Some(label) = tokens.get(1).and_then(|t| t.strip_suffix(':')) else {
            return Err(syntax(line, "expected `hazard <prop>: <states>`"));
        };
        if !valid_proposition(label) {
            return Err(syntax(line, format!("invalid hazard proposition `{label}`")));
        }
        let mut states = Vec::new();
        for token in &tokens[2..] {
            states.push(self.resolve_state(line, token)?);
        }
        if let Some((_, existing)) = self.hazards.iter_mut().find(|(name, _)| name == label) {
            existing.extend(states);
        } else {
            self.hazards.push((label.to_string(), states));
        }
        Ok(())
    }

    fn transition(&mut self, line: usize, tokens: &[&str]) -> Result<(), ParseError> {
        let kind = self.kind.as_ref().expect("header precedes sections").0;
        match kind {
            Kind::Controller => {
                if tokens.len() != 7 || tokens[3] != "->" || tokens[5] != "/" {
                    return Err(syntax(line, "expected `trans: <state> <input> -> <state> / <output>`"));
                }
                let state = self.resolve_state(line, tokens[1])?;
                let input = self.resolve_symbol(line, &self.inputs, "input", tokens[2])?;
                let next = self.resolve_state(line, tokens[4])?;
                let output = self.resolve_symbol(line, &self.outputs, "output", tokens[6])?;
                if self.controller_entries.is_empty() {
                    let states = self.states.as_ref().expect("states resolved above").len();
                    let inputs = self.inputs.as_ref().expect("inputs resolved above").len();
                    self.controller_entries = vec![vec![None; inputs]; states];
                }
                if self.controller_entries[state][input].is_some() {
                    return Err(semantic(
                        line,
                        format!(
                            "duplicate transition for state `{}` on input `{}`",
                            tokens[1], tokens[2]
                        ),
                    ));
                }
                self.controller_entries[state][input] = Some((next, output));
                Ok(())
            }
            Kind::Plant => {
                if tokens.len() != 5 || tokens[3] != "->" {
                    if tokens.contains(&"/") {
                        return Err(syntax(line, "plant transitions do not carry an output symbol"));
                    }
                    return Err(syntax(line, "expected `trans: <state> <input> -> <state>`"));
                }
                let state = self.resolve_state(line, tokens[1])?;
                let input = self.resolve_symbol(line, &self.inputs, "input", tokens[2])?;
                let next = self.resolve_state(line, tokens[4])?;
                self.plant_transitions.push((state, input, next));
                Ok(())
            }
        }
    }

    fn resolve_state(&self, line: usize, name: &str) -> Result<usize, ParseError> {
        let states = self
            .states
            .as_ref()
            .ok_or_else(|| semantic(line, format!("undeclared state `{name}`")))?;
        states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| semantic(line, format!("undeclared state `{name}`")))
    }

    fn resolve_symbol(
        &self,
        line: usize,
        alphabet: &Option<Vec<String>>,
        which: &str,
        name: &str,
    ) -> Result<usize, ParseError> {
        let symbols = alphabet
            .as_ref()
            .ok_or_else(|| semantic(line, format!("undeclared {which} symbol `{name}`")))?;
        symbols
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| semantic(line, format!("undeclared {which} symbol `{name}`")))
    }

    fn finish(self) -> Result<ParsedMachine, ParseError> {
        let Some((kind, name)) = self.kind else {
            return Err(ParseError::MissingSection { section: "fsm/plant header" });
        };
        let inputs = self.inputs.ok_or(ParseError::MissingSection { section: "inputs:" })?;
        let outputs = self.outputs.ok_or(ParseError::MissingSection { section: "outputs:" })?;
        let states = self.states.ok_or(ParseError::MissingSection { section: "states:" })?;
        if self.initial_line.is_none() {
            return Err(ParseError::MissingSection { section: "initial:" });
        }
        match kind {
            Kind::Controller => {
                let mut fsm = ControllerFsm::new(name, inputs, outputs, states);
                fsm.set_initial(self.initials[0]);
                for (state, row) in self.controller_entries.iter().enumerate() {
                    for (input, entry) in row.iter().enumerate() {
                        if let Some((next, output)) = entry {
                            fsm.set_transition(state, input, *next, *output);
                        }
                    }
                }
                Ok(ParsedMachine::Controller(fsm))
            }
            Kind::Plant => {
                let mut plant = Plant::new(name, inputs, outputs, states);
                for state in self.initials {
                    plant.add_initial(state);
                }
                for (state, emit) in self.emits.iter().enumerate() {
                    if let Some(symbol) = emit {
                        plant.set_emit(state, *symbol);
                    }
                }
                for (label, states) in self.hazards {
                    plant.declare_hazard(label.clone());
                    for state in states {
                        plant.add_hazard(label.clone(), state);
                    }
                }
                for (state, input, next) in self.plant_transitions {
                    plant.add_transition(state, input, next);
                }
                Ok(ParsedMachine::Plant(plant))
            }
        }
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T) -> Result<(), ()> {
    if slot.is_some() {
        return Err(());
    }
    *slot = Some(value);
    Ok(())
}

impl ControllerFsm {
    /// Serializes the machine into the canonical text form.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fsm {}", self.name());
        let _ = writeln!(out, "inputs: {}", self.inputs().names().join(" "));
        let _ = writeln!(out, "outputs: {}", self.outputs().names().join(" "));
        let _ = writeln!(out, "states: {}", self.state_names().join(" "));
        let _ = writeln!(out, "initial: {}", self.state_name(self.initial()));
        for state in 0..self.state_count() {
            for input in 0..self.inputs().len() {
                if let Some(entry) = self.entry(state, input) {
                    let _ = writeln!(
                        out,
                        "trans: {} {} -> {} / {}",
                        self.state_name(state),
                        self.inputs().name(input),
                        self.state_name(entry.next),
                        self.outputs().name(entry.output),
                    );
                }
            }
        }
        out
    }
}

impl Plant {
    /// Serializes the plant into the canonical text form.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "plant {}", self.name());
        let _ = writeln!(out, "inputs: {}", self.inputs().names().join(" "));
        let _ = writeln!(out, "outputs: {}", self.outputs().names().join(" "));
        let _ = writeln!(out, "states: {}", self.state_names_joined());
        let initials: Vec<&str> = self.initials().iter().map(|&s| self.state_name(s)).collect();
        let _ = writeln!(out, "initial: {}", initials.join(" "));
        for state in 0..self.state_count() {
            if let Some(symbol) = self.emit(state) {
                let _ = writeln!(
                    out,
                    "emit: {} {}",
                    self.state_name(state),
                    self.outputs().name(symbol)
                );
            }
        }
        for (label, states) in self.hazards() {
            let names: Vec<&str> = states.iter().map(|&s| self.state_name(s)).collect();
            if names.is_empty() {
                let _ = writeln!(out, "hazard {label}:");
            } else {
                let _ = writeln!(out, "hazard {label}: {}", names.join(" "));
            }
        }
        for state in 0..self.state_count() {
            for input in 0..self.inputs().len() {
                for &next in self.successors(state, input) {
                    let _ = writeln!(
                        out,
                        "trans: {} {} -> {}",
                        self.state_name(state),
                        self.inputs().name(input),
                        self.state_name(next),
                    );
                }
            }
        }
        out
    }

    fn state_names_joined(&self) -> String {
        (0..self.state_count()).map(|s| self.state_name(s)).collect::<Vec<_>>().join(" ")
    }
}
