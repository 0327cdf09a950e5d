//! Synchronous closed-loop composition of a controller and a plant.
//!
//! One closed-loop step: the plant emits the sensor symbol of its current
//! state, the controller consumes it and emits an actuator symbol, and the
//! plant then moves nondeterministically along one of its transitions under
//! that actuator. The product is deterministic in the controller component;
//! all branching comes from the plant.
//!
//! Only states reachable from the initial product states are constructed, so
//! downstream analyses never pay for unreachable combinations.

use std::collections::HashMap;
use std::collections::{BTreeMap, BTreeSet};

use super::{ControllerFsm, Plant, StateIdx, StateSet, SymbolIdx};

/// The reachable synchronous product of one controller and one plant.
#[derive(Clone, Debug)]
pub struct ClosedLoopSystem {
    controller_name: String,
    plant_name: String,
    /// Product state index -> (controller state, plant state).
    pairs: Vec<(StateIdx, StateIdx)>,
    initial: StateSet,
    initial_list: Vec<usize>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    valuation: BTreeMap<String, StateSet>,
}

impl ClosedLoopSystem {
    /// Number of reachable product states.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The (controller, plant) state pair behind a product index.
    pub fn state_pair(&self, state: usize) -> (StateIdx, StateIdx) {
        self.pairs[state]
    }

    pub fn initial_states(&self) -> &StateSet {
        &self.initial
    }

    pub fn initial_indices(&self) -> &[usize] {
        &self.initial_list
    }

    pub fn successors(&self, state: usize) -> &[usize] {
        &self.successors[state]
    }

    pub fn predecessors(&self, state: usize) -> &[usize] {
        &self.predecessors[state]
    }

    pub(crate) fn predecessor_lists(&self) -> &[Vec<usize>] {
        &self.predecessors
    }

    /// Atomic propositions lifted from plant hazard labels: a product state
    /// satisfies a proposition iff its plant component does.
    pub fn propositions(&self) -> impl Iterator<Item = (&str, &StateSet)> {
        self.valuation.iter().map(|(name, set)| (name.as_str(), set))
    }

    pub fn proposition(&self, name: &str) -> Option<&StateSet> {
        self.valuation.get(name)
    }

    pub fn controller_name(&self) -> &str {
        &self.controller_name
    }

    pub fn plant_name(&self) -> &str {
        &self.plant_name
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ComposeError {
    /// The two alphabets that must agree (as symbol sets) do not.
    #[error("alphabet mismatch between {controller_side} and {plant_side}: \
             controller has {missing:?} the plant lacks, plant has {extra:?} the controller lacks")]
    AlphabetMismatch {
        controller_side: &'static str,
        plant_side: &'static str,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("controller fails validation: {0}")]
    InvalidController(String),
    #[error("plant fails validation: {0}")]
    InvalidPlant(String),
}

/// Maps each controller output symbol to the plant input symbol of the same
/// name, and each plant output symbol to the controller input symbol of the
/// same name. Alphabet agreement is exact symbol-set equality; declaration
/// order may differ between the two machines.
pub(crate) struct SymbolMaps {
    /// Controller output index -> plant input index.
    pub actuator: Vec<SymbolIdx>,
    /// Plant output index -> controller input index.
    pub sensor: Vec<SymbolIdx>,
}

pub(crate) fn symbol_maps(
    controller: &ControllerFsm,
    plant: &Plant,
) -> Result<SymbolMaps, ComposeError> {
    check_alphabet_match(
        controller.outputs().names(),
        plant.inputs().names(),
        "controller outputs",
        "plant inputs",
    )?;
    check_alphabet_match(
        controller.inputs().names(),
        plant.outputs().names(),
        "controller inputs",
        "plant outputs",
    )?;
    let actuator = controller
        .outputs()
        .names()
        .iter()
        .map(|name| plant.inputs().index_of(name).expect("set equality checked"))
        .collect();
    let sensor = plant
        .outputs()
        .names()
        .iter()
        .map(|name| controller.inputs().index_of(name).expect("set equality checked"))
        .collect();
    Ok(SymbolMaps { actuator, sensor })
}

fn check_alphabet_match(
    controller_symbols: &[String],
    plant_symbols: &[String],
    controller_side: &'static str,
    plant_side: &'static str,
) -> Result<(), ComposeError> {
    let controller_set: BTreeSet<&str> = controller_symbols.iter().map(|s| s.as_str()).collect();
    let plant_set: BTreeSet<&str> = plant_symbols.iter().map(|s| s.as_str()).collect();
    if controller_set == plant_set {
        return Ok(());
    }
    Err(ComposeError::AlphabetMismatch {
        controller_side,
        plant_side,
        missing: controller_set.difference(&plant_set).map(|s| s.to_string()).collect(),
        extra: plant_set.difference(&controller_set).map(|s| s.to_string()).collect(),
    })
}

fn validation_message(report: &super::ValidationReport) -> String {
    let mut parts: Vec<String> =
        report.violations().iter().take(3).map(|v| v.to_string()).collect();
    if report.violations().len() > 3 {
        parts.push(format!("... ({} violations total)", report.violations().len()));
    }
    parts.join("; ")
}

/// Builds the reachable closed-loop product of a validated controller and a
/// validated plant.
pub fn compose(controller: &ControllerFsm, plant: &Plant) -> Result<ClosedLoopSystem, ComposeError> {
    let controller_report = controller.validate();
    if !controller_report.is_ok() {
        return Err(ComposeError::InvalidController(validation_message(&controller_report)));
    }
    let plant_report = plant.validate();
    if !plant_report.is_ok() {
        return Err(ComposeError::InvalidPlant(validation_message(&plant_report)));
    }
    let maps = symbol_maps(controller, plant)?;

    let mut index: HashMap<(StateIdx, StateIdx), usize> = HashMap::new();
    let mut pairs: Vec<(StateIdx, StateIdx)> = Vec::new();
    let mut queue: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut initial_list = Vec::new();

    let c0 = controller.initial();
    for &p0 in plant.initials() {
        let next_idx = pairs.len();
        let idx = *index.entry((c0, p0)).or_insert_with(|| {
            pairs.push((c0, p0));
            next_idx
        });
        if !initial_list.contains(&idx) {
            initial_list.push(idx);
            queue.push_back(idx);
        }
    }

    let mut successors: Vec<Vec<usize>> = Vec::new();
    while let Some(current) = queue.pop_front() {
        let (c, p) = pairs[current];
        let sensor = maps.sensor[plant.emit(p).expect("validated plant emits everywhere")];
        let entry = controller.entry(c, sensor).expect("validated controller is complete");
        let actuator = maps.actuator[entry.output];
        let mut succ = Vec::new();
        for &p_next in plant.successors(p, actuator) {
            let key = (entry.next, p_next);
            let fresh = pairs.len();
            let idx = *index.entry(key).or_insert_with(|| {
                pairs.push(key);
                fresh
            });
            if idx == fresh {
                queue.push_back(idx);
            }
            succ.push(idx);
        }
        if successors.len() <= current {
            successors.resize(pairs.len(), Vec::new());
        }
        successors[current] = succ;
    }
    successors.resize(pairs.len(), Vec::new());

    let n = pairs.len();
    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (source, succ) in successors.iter().enumerate() {
        for &target in succ {
            predecessors[target].push(source);
        }
    }

    let mut valuation = BTreeMap::new();
    for (label, plant_states) in plant.hazards() {
        let set = StateSet::from_indices(
            n,
            pairs
                .iter()
                .enumerate()
                .filter(|(_, (_, p))| plant_states.contains(p))
                .map(|(idx, _)| idx),
        );
        valuation.insert(label.to_string(), set);
    }

    Ok(ClosedLoopSystem {
        controller_name: controller.name().to_string(),
        plant_name: plant.name().to_string(),
        initial: StateSet::from_indices(n, initial_list.iter().copied()),
        pairs,
        initial_list,
        successors,
        predecessors,
        valuation,
    })
}
