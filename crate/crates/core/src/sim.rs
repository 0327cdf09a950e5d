//! Closed-loop episode simulation.
//!
//! One simulator drives both fitness evaluation and the CLI transcript, so
//! the reward a user sees per step is exactly the reward evaluation counts.
//!
//! The order of random draws is part of the reproducibility contract: each
//! episode draws the initial plant state first (uniform over the plant's
//! initial states, even when there is only one), then one draw per step to
//! resolve the disturbance among the successor states. Reordering or
//! skipping draws changes every downstream result for a given seed.

use rand::Rng;

use crate::fsm::{symbol_maps, ComposeError, ControllerFsm, Plant, StateIdx};

/// Everything observable about one executed closed-loop step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimStep {
    pub index: usize,
    /// Plant state at the start of the step (the one that emitted).
    pub plant_state: StateIdx,
    /// Sensor symbol emitted by the plant (plant output alphabet index).
    pub sensor: usize,
    /// Controller state at the start of the step.
    pub controller_state: StateIdx,
    /// Actuator symbol chosen by the controller (plant input alphabet index).
    pub actuator: usize,
    pub next_plant_state: StateIdx,
    pub next_controller_state: StateIdx,
    /// Reward of the plant state the step lands in.
    pub reward: f64,
}

/// A reusable closed-loop simulator for one controller/plant pair.
///
/// `rewards` assigns a per-step reward to each plant state; a step earns
/// the reward of the state it lands in.
#[derive(Debug)]
pub struct ClosedLoopSim<'a> {
    controller: &'a ControllerFsm,
    plant: &'a Plant,
    rewards: &'a [f64],
    /// Plant output index -> controller input index.
    sensor_map: Vec<usize>,
    /// Controller output index -> plant input index.
    actuator_map: Vec<usize>,
    controller_state: StateIdx,
    plant_state: StateIdx,
    step_index: usize,
}

impl<'a> ClosedLoopSim<'a> {
    /// Builds a simulator after checking that the machines are valid and
    /// their alphabets agree.
    pub fn new(
        controller: &'a ControllerFsm,
        plant: &'a Plant,
        rewards: &'a [f64],
    ) -> Result<Self, ComposeError> {
        let report = controller.validate();
        if !report.is_ok() {
            return Err(ComposeError::InvalidController(
                report.violations()[0].to_string(),
            ));
        }
        let report = plant.validate();
        if !report.is_ok() {
            return Err(ComposeError::InvalidPlant(report.violations()[0].to_string()));
        }
        assert_eq!(
            rewards.len(),
            plant.state_count(),
            "reward table does not match plant state count"
        );
        let maps = symbol_maps(controller, plant)?;
        Ok(ClosedLoopSim {
            controller,
            plant,
            rewards,
            sensor_map: maps.sensor,
            actuator_map: maps.actuator,
            controller_state: controller.initial(),
            plant_state: plant.initials()[0],
            step_index: 0,
        })
    }

    /// Starts a fresh episode, drawing the initial plant state.
    pub fn reset<R: Rng>(&mut self, rng: &mut R) {
        let initials = self.plant.initials();
        let choice = rng.random_range(0..initials.len());
        self.plant_state = initials[choice];
        self.controller_state = self.controller.initial();
        self.step_index = 0;
    }

    pub fn controller_state(&self) -> StateIdx {
        self.controller_state
    }

    pub fn plant_state(&self) -> StateIdx {
        self.plant_state
    }

    /// Executes one step, resolving the plant's disturbance with `rng`.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> SimStep {
        let plant_state = self.plant_state;
        let controller_state = self.controller_state;
        let sensor = self.plant.emit(plant_state).expect("validated plant emits everywhere");
        let entry = self
            .controller
            .entry(controller_state, self.sensor_map[sensor])
            .expect("validated controller is complete");
        let actuator = self.actuator_map[entry.output];
        let successors = self.plant.successors(plant_state, actuator);
        let choice = rng.random_range(0..successors.len());
        let next_plant_state = successors[choice];
        let record = SimStep {
            index: self.step_index,
            plant_state,
            sensor,
            controller_state,
            actuator,
            next_plant_state,
            next_controller_state: entry.next,
            reward: self.rewards[next_plant_state],
        };
        self.plant_state = next_plant_state;
        self.controller_state = entry.next;
        self.step_index += 1;
        record
    }

    /// Runs one fresh episode of `steps` steps and returns the mean per-step
    /// reward. Zero steps yield 0.0 by the empty-mean convention.
    pub fn run_episode<R: Rng>(&mut self, steps: usize, rng: &mut R) -> f64 {
        self.reset(rng);
        if steps == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        for _ in 0..steps {
            total += self.step(rng).reward;
        }
        total / steps as f64
    }
}
