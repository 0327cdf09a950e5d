//! Behavioural properties of the evolution engine observable through its
//! public API: mutation closure, operator draw frequencies, byte-level
//! reproducibility, the safety gate, and elitism.

use evoguard_core::evolve::{
    genome_hash, mutate, random_controller, run_evolution, EvolutionConfig, EvolutionOutcome,
    LogRecord, MutationKind, MutationWeights,
};
use evoguard_core::{BenchmarkTask, SafetyProperty};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

fn tank_config(seed: u64) -> EvolutionConfig {
    EvolutionConfig {
        population_size: 8,
        offspring_per_parent: 2,
        max_generations: 12,
        max_states: 4,
        fitness_threshold: 2.0, // unreachable: per-step rewards are at most 1
        episode_length: 10,
        episodes_per_evaluation: 4,
        mutation_weights: MutationWeights::default(),
        seed,
        seed_genome: None,
    }
}

/// A long mutation chain never produces an incomplete machine or leaves the
/// configured size bounds, across varied alphabets and caps.
#[test]
fn mutation_chain_stays_closed_over_valid_genomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let weights = MutationWeights::default();
    for round in 0..20 {
        let input_count = rng.random_range(1..=3);
        let output_count = rng.random_range(1..=3);
        let inputs: Vec<String> = (0..input_count).map(|i| format!("in{i}")).collect();
        let outputs: Vec<String> = (0..output_count).map(|i| format!("out{i}")).collect();
        let max_states = rng.random_range(1..=6);
        let start = rng.random_range(1..=max_states);
        let mut genome = random_controller(&mut rng, &inputs, &outputs, start);
        for step in 0..1000 {
            let (child, kind) = mutate(&genome, &weights, max_states, &mut rng);
            let report = child.validate();
            assert!(
                report.is_ok(),
                "round {round} step {step}: {kind} produced an invalid genome: {}",
                report.violations()[0]
            );
            assert!(child.state_count() >= 1 && child.state_count() <= max_states);
            assert_eq!(child.inputs().names(), genome.inputs().names());
            assert_eq!(child.outputs().names(), genome.outputs().names());
            genome = child;
        }
    }
}

/// With uniform weights and both size-gated operators applicable, the five
/// operators are drawn near-uniformly.
#[test]
fn operator_draws_follow_the_weights() {
    let inputs = vec!["a".to_string(), "b".to_string()];
    let outputs = vec!["x".to_string(), "y".to_string()];
    let mut rng = ChaCha8Rng::seed_from_u64(0xABBA);
    let parent = random_controller(&mut rng, &inputs, &outputs, 3);
    let weights = MutationWeights::default();

    let draws = 50_000usize;
    let mut counts: HashMap<MutationKind, usize> = HashMap::new();
    for _ in 0..draws {
        let (_, kind) = mutate(&parent, &weights, 5, &mut rng);
        *counts.entry(kind).or_default() += 1;
    }
    for kind in MutationKind::ALL {
        let share = counts.get(&kind).copied().unwrap_or(0) as f64 / draws as f64;
        assert!(
            (share - 0.2).abs() < 0.02,
            "{kind} drawn with frequency {share:.4}, expected 0.2 +/- 0.02"
        );
    }

    // Doubling one weight doubles its share against the rest.
    let weights = MutationWeights { change_output: 2.0, ..MutationWeights::default() };
    let mut favored = 0usize;
    for _ in 0..draws {
        let (_, kind) = mutate(&parent, &weights, 5, &mut rng);
        favored += usize::from(kind == MutationKind::ChangeOutput);
    }
    let share = favored as f64 / draws as f64;
    assert!(
        (share - 1.0 / 3.0).abs() < 0.02,
        "change_output drawn with frequency {share:.4}, expected 1/3 +/- 0.02"
    );
}

/// Two runs with identical configuration serialize to byte-identical
/// record streams, and a different seed diverges.
#[test]
fn runs_are_byte_reproducible_per_seed() {
    let task = BenchmarkTask::tank();
    let property = task.parsed_default_property();
    let serialize = |config: &EvolutionConfig| -> String {
        let run = run_evolution(config, &task, &property).expect("run succeeds");
        let mut lines = Vec::new();
        for record in &run.candidates {
            lines.push(serde_json::to_string(&LogRecord::Candidate(record)).unwrap());
        }
        for stats in &run.generations {
            lines.push(serde_json::to_string(&LogRecord::Generation(stats)).unwrap());
        }
        lines.join("\n")
    };
    let config = tank_config(99);
    let first = serialize(&config);
    let second = serialize(&config);
    assert_eq!(first, second, "same configuration must reproduce the same log bytes");
    let other = serialize(&tank_config(100));
    assert_ne!(first, other, "different seeds should explore differently");
}

/// Every genome the engine creates goes through the gate: the records show
/// a safety decision for each, and fitness exists exactly for the safe ones.
#[test]
fn the_gate_is_total_over_created_genomes() {
    let task = BenchmarkTask::tank();
    let property = task.parsed_default_property();
    let config = tank_config(5);
    let run = run_evolution(&config, &task, &property).expect("run succeeds");

    let expected_records = config.population_size as u64
        + (run.generations.len() as u64 - 1)
            * (config.population_size * config.offspring_per_parent) as u64;
    assert_eq!(run.candidates.len() as u64, expected_records);
    for record in &run.candidates {
        assert_eq!(record.safe, record.fitness.is_some());
        assert_eq!(record.genome_hash.len(), 64, "hashes are hex-encoded SHA-256");
    }
    let evaluated = run.candidates.iter().filter(|r| r.safe).count() as u64;
    assert_eq!(run.total_evaluations, evaluated);
}

/// Selection is elitist, so the population's best fitness never decreases
/// from one generation to the next.
#[test]
fn best_fitness_is_monotone_across_generations() {
    let task = BenchmarkTask::tank();
    let property = task.parsed_default_property();
    for seed in [11, 12, 13] {
        let run = run_evolution(&tank_config(seed), &task, &property).expect("run succeeds");
        let mut previous: Option<f64> = None;
        for stats in &run.generations {
            if let Some(prev) = previous {
                let current = stats.best_fitness.unwrap_or_else(|| {
                    panic!(
                        "seed {seed}: generation {} lost its scored genomes",
                        stats.generation
                    )
                });
                assert!(
                    current >= prev,
                    "seed {seed}: best fitness dropped from {prev} to {current} at generation {}",
                    stats.generation
                );
            }
            if stats.best_fitness.is_some() {
                previous = stats.best_fitness;
            }
        }
    }
}

/// An unsatisfiable property turns the gate into a wall: nothing is ever
/// simulated and the run reports that no safe strategy exists.
#[test]
fn unsatisfiable_property_never_reaches_evaluation() {
    let task = BenchmarkTask::tank();
    let property = SafetyProperty::parse("AG false").unwrap();
    let mut config = tank_config(21);
    config.max_generations = 4;
    let run = run_evolution(&config, &task, &property).expect("run completes");
    assert_eq!(run.outcome, EvolutionOutcome::NoSafeStrategy);
    assert_eq!(run.total_evaluations, 0);
    assert!(run.best.is_none());
    assert!(run.generations.iter().all(|g| g.safe_candidates == 0));
    assert!(run.generations.iter().all(|g| g.best_fitness.is_none()));
}

/// A zero threshold is satisfied by the first safe genome, so the run stops
/// with the initial population.
#[test]
fn zero_threshold_stops_with_the_initial_population() {
    let task = BenchmarkTask::tank();
    let property = task.parsed_default_property();
    let mut config = tank_config(42);
    config.fitness_threshold = 0.0;
    let run = run_evolution(&config, &task, &property).expect("run succeeds");
    assert_eq!(run.outcome, EvolutionOutcome::ThresholdReached);
    assert_eq!(run.generations.len(), 1);
}

/// The recorded winner is reproducible: rerunning the configuration yields
/// the same best genome hash, and the inline hash matches the genome.
#[test]
fn best_genome_hash_matches_its_text() {
    let task = BenchmarkTask::tank();
    let property = task.parsed_default_property();
    let config = tank_config(77);
    let one = run_evolution(&config, &task, &property).expect("run succeeds");
    let two = run_evolution(&config, &task, &property).expect("run succeeds");
    let best_one = one.best.expect("tank runs find safe genomes");
    let best_two = two.best.expect("tank runs find safe genomes");
    assert_eq!(genome_hash(&best_one.controller), genome_hash(&best_two.controller));
    assert_eq!(best_one.controller.canonical_text(), best_two.controller.canonical_text());
    assert_eq!(best_one.fitness, best_two.fitness);
}
