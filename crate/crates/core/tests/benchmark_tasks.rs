//! Built-in task coherence and a frozen simulation reference point.
//!
//! The central test here drives the tank's reference controller through the
//! public simulator and through a hand-rolled straight-line oracle that
//! re-implements the tank dynamics as plain arithmetic. The two share only
//! the generator and the documented draw-order contract (one initial-state
//! draw per episode, one successor draw per step), so agreement pins both
//! the dynamics encoded in `tasks/tank.plant` and the simulator's stepping.

use evoguard_core::sim::ClosedLoopSim;
use evoguard_core::{BenchmarkTask, ControllerFsm, Plant, SafetyProperty};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_SEED: u64 = 2024;
const GOLDEN_EPISODES: usize = 200;
const GOLDEN_STEPS: usize = 50;
/// Value computed by `oracle_reference_fitness` with the constants above,
/// frozen so that any change to the tank dynamics, the reward table, the
/// reference controller, or the draw-order contract shows up as a diff.
const GOLDEN_FITNESS: f64 = 0.7556000000000002;

/// Tank dynamics written out directly: levels 0..=9, clamped disturbances.
fn tank_successor_levels(level: usize, action: &str) -> Vec<usize> {
    let clamp = |v: i64| v.clamp(0, 9) as usize;
    let level = level as i64;
    let mut next = match action {
        "fill" => vec![clamp(level + 1), clamp(level + 2)],
        "drain" => vec![clamp(level - 2), clamp(level - 1)],
        "hold" => vec![clamp(level - 1), clamp(level)],
        other => panic!("unknown action {other}"),
    };
    next.dedup();
    next
}

/// The reference policy, stated directly on the band sensor.
fn reference_action(level: usize) -> &'static str {
    match level {
        0..=3 => "fill",
        4..=6 => "hold",
        _ => "drain",
    }
}

fn in_band_reward(level: usize) -> f64 {
    if (4..=6).contains(&level) {
        1.0
    } else {
        0.0
    }
}

/// Straight-line mean-reward computation for the reference controller.
fn oracle_reference_fitness(seed: u64, episodes: usize, steps: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_levels = [5usize];
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut level = initial_levels[rng.random_range(0..initial_levels.len())];
        let mut episode = 0.0;
        for _ in 0..steps {
            let successors = tank_successor_levels(level, reference_action(level));
            level = successors[rng.random_range(0..successors.len())];
            episode += in_band_reward(level);
        }
        total += episode / steps as f64;
    }
    total / episodes as f64
}

fn simulated_reference_fitness(seed: u64, episodes: usize, steps: usize) -> f64 {
    let task = BenchmarkTask::tank();
    let reference = task.reference_controller().expect("tank ships a reference");
    let mut sim = ClosedLoopSim::new(reference, task.plant(), task.rewards())
        .expect("reference controller matches the tank");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..episodes {
        total += sim.run_episode(steps, &mut rng);
    }
    total / episodes as f64
}

#[test]
fn reference_fitness_matches_the_straight_line_oracle() {
    let oracle = oracle_reference_fitness(GOLDEN_SEED, GOLDEN_EPISODES, GOLDEN_STEPS);
    let simulated = simulated_reference_fitness(GOLDEN_SEED, GOLDEN_EPISODES, GOLDEN_STEPS);
    assert_eq!(simulated, oracle, "simulator disagrees with the straight-line oracle");
    assert_eq!(oracle, GOLDEN_FITNESS, "oracle value drifted from the frozen reference");
}

#[test]
fn default_properties_parse_and_name_declared_hazards() {
    for task in [BenchmarkTask::tank(), BenchmarkTask::rover()] {
        let property = SafetyProperty::parse(task.default_property())
            .unwrap_or_else(|e| panic!("{}: default property rejected: {e}", task.name()));
        for atom in property.atoms() {
            assert!(
                task.plant().hazard_states(atom).is_some(),
                "{}: atom `{atom}` is not a declared hazard",
                task.name()
            );
        }
    }
}

#[test]
fn embedded_texts_and_constructed_tasks_agree() {
    use evoguard_core::fsm::{parse_controller, parse_plant};
    use evoguard_core::plant::{ROVER_PLANT_TEXT, TANK_PLANT_TEXT, TANK_REF_TEXT};

    assert_eq!(&parse_plant(TANK_PLANT_TEXT).unwrap(), BenchmarkTask::tank().plant());
    assert_eq!(&parse_plant(ROVER_PLANT_TEXT).unwrap(), BenchmarkTask::rover().plant());
    assert_eq!(
        &parse_controller(TANK_REF_TEXT).unwrap(),
        BenchmarkTask::tank().reference_controller().unwrap()
    );
}

/// Degenerate reward tables bound achievable fitness exactly: an
/// all-rewarding world scores 1.0 per step, a rewardless one 0.0.
#[test]
fn fitness_is_bounded_by_the_reward_table()  {
    let mut plant = Plant::new(
        "loop",
        vec!["go".into()],
        vec!["tick".into()],
        vec!["w0".into(), "w1".into()],
    );
    plant.add_initial(0);
    plant.set_emit(0, 0);
    plant.set_emit(1, 0);
    plant.add_transition(0, 0, 1);
    plant.add_transition(1, 0, 0);

    let mut controller = ControllerFsm::new(
        "trivial",
        vec!["tick".into()],
        vec!["go".into()],
        vec!["s0".into()],
    );
    controller.set_transition(0, 0, 0, 0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let full = [1.0, 1.0];
    let mut sim = ClosedLoopSim::new(&controller, &plant, &full).unwrap();
    assert_eq!(sim.run_episode(25, &mut rng), 1.0);

    let none = [0.0, 0.0];
    let mut sim = ClosedLoopSim::new(&controller, &plant, &none).unwrap();
    assert_eq!(sim.run_episode(25, &mut rng), 0.0);
}
