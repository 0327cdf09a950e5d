//! Built-in benchmark tasks.
//!
//! A [`BenchmarkTask`] bundles everything needed to evolve and score a
//! controller against one environment: the plant model, a per-state reward
//! table, the safety property enforced during evolution, and (where one
//! exists) a hand-written reference controller for comparison.
//!
//! Two tasks ship with the crate, loaded from `tasks/` at compile time:
//!
//! * `tank` — a ten-level water tank with disturbed pump actuation. The
//!   controller sees a three-band gauge (`lo`/`ok`/`hi`) and must keep the
//!   level away from both ends of the range. Reward 1.0 accrues in the
//!   middle band (levels 4–6).
//! * `rover` — a 4×4 grid rover with slip on `advance` and two crater
//!   cells. The controller sees a two-valued proximity sensor and earns
//!   reward only on the goal cell `r3c3`.

use crate::fsm::{parse_controller, parse_plant, ControllerFsm, Plant};
use crate::safety::SafetyProperty;

/// Text of the built-in tank plant model.
pub const TANK_PLANT_TEXT: &str = include_str!("../../../tasks/tank.plant");
/// Text of the built-in rover plant model.
pub const ROVER_PLANT_TEXT: &str = include_str!("../../../tasks/rover.plant");
/// Text of the hand-written tank reference controller.
pub const TANK_REF_TEXT: &str = include_str!("../../../tasks/tank_ref.fsm");

/// A plant plus the scoring and safety context a controller is judged in.
#[derive(Debug, Clone)]
pub struct BenchmarkTask {
    name: String,
    plant: Plant,
    rewards: Vec<f64>,
    default_property: String,
    reference_controller: Option<ControllerFsm>,
}

/// Error returned when a task name does not match any built-in task.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task `{0}` (built-in tasks: tank, rover)")]
pub struct UnknownTask(pub String);

impl BenchmarkTask {
    /// Looks up a built-in task by name (`"tank"` or `"rover"`).
    pub fn builtin(name: &str) -> Result<Self, UnknownTask> {
        match name {
            "tank" => Ok(Self::tank()),
            "rover" => Ok(Self::rover()),
            other => Err(UnknownTask(other.to_owned())),
        }
    }

    /// Names of all built-in tasks.
    pub fn builtin_names() -> &'static [&'static str] {
        &["tank", "rover"]
    }

    /// The ten-level water tank task.
    pub fn tank() -> Self {
        let plant = parse_plant(TANK_PLANT_TEXT).expect("embedded tank plant parses");
        let mut rewards = vec![0.0; plant.state_count()];
        rewards[4..=6].fill(1.0);
        let reference =
            parse_controller(TANK_REF_TEXT).expect("embedded tank reference controller parses");
        Self {
            name: "tank".to_owned(),
            plant,
            rewards,
            default_property: "AG !(overflow | underflow)".to_owned(),
            reference_controller: Some(reference),
        }
    }

    /// The 4×4 grid rover task.
    pub fn rover() -> Self {
        let plant = parse_plant(ROVER_PLANT_TEXT).expect("embedded rover plant parses");
        let mut rewards = vec![0.0; plant.state_count()];
        let goal = plant
            .state_index("r3c3")
            .expect("rover goal cell is declared");
        rewards[goal] = 1.0;
        Self {
            name: "rover".to_owned(),
            plant,
            rewards,
            default_property: "AG !crater".to_owned(),
            reference_controller: None,
        }
    }

    /// Wraps an arbitrary plant as a task with all-zero rewards and the
    /// given safety property. Used for plants loaded from user files.
    pub fn custom(plant: Plant, property: &str) -> Self {
        let rewards = vec![0.0; plant.state_count()];
        Self {
            name: plant.name().to_owned(),
            plant,
            rewards,
            default_property: property.to_owned(),
            reference_controller: None,
        }
    }

    /// Task name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The plant model controllers are composed with.
    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    /// Reward accrued when an episode step lands in the given plant state.
    pub fn reward_of(&self, state: usize) -> f64 {
        self.rewards[state]
    }

    /// Per-state reward table, indexed by plant state.
    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Property text enforced by the safety gate when none is given
    /// explicitly.
    pub fn default_property(&self) -> &str {
        &self.default_property
    }

    /// Parsed form of [`BenchmarkTask::default_property`].
    pub fn parsed_default_property(&self) -> SafetyProperty {
        SafetyProperty::parse(&self.default_property)
            .expect("built-in default property parses")
    }

    /// Hand-written reference controller, if the task ships one.
    pub fn reference_controller(&self) -> Option<&ControllerFsm> {
        self.reference_controller.as_ref()
    }
}
