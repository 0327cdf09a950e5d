//! The evolution engine: generation loop, safety gate, and selection.

use std::cmp::Ordering;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mutation::{mutate, random_controller};
use super::{
    Candidate, CandidateRecord, EvolutionConfig, EvolutionOutcome, EvolutionRun, EvolveError,
    GenerationStats,
};
use crate::evolve::genome_hash;
use crate::fsm::{compose, symbol_maps, ControllerFsm, Plant};
use crate::plant::BenchmarkTask;
use crate::safety::{check_safe, PropertyError, SafetyProperty, Verdict};
use crate::sim::ClosedLoopSim;

/// Stream purposes: every random decision belongs to exactly one of these.
const PURPOSE_INIT: u64 = 0;
const PURPOSE_MUTATE: u64 = 1;
const PURPOSE_EVAL: u64 = 2;

/// Derives the generator for one `(purpose, generation, slot)` stream.
///
/// The four coordinates are packed little-endian into the 32-byte cipher
/// key, so streams are independent and a run is reproducible from the
/// master seed alone.
fn stream_rng(seed: u64, purpose: u64, generation: u64, slot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.to_le_bytes());
    key[16..24].copy_from_slice(&generation.to_le_bytes());
    key[24..32].copy_from_slice(&slot.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Largest genome size drawn for initial population members.
const INITIAL_STATE_CAP: usize = 5;

/// Runs one complete evolution: initial population, generation loop with
/// safety gate and elitist truncation selection, early stop at the fitness
/// threshold.
///
/// Genomes that fail the gate are recorded but never simulated. The run
/// ends with [`EvolutionOutcome::NoSafeStrategy`] if no genome ever passed;
/// the population is elitist, so any safe genome found along the way
/// survives to the end.
pub fn run_evolution(
    config: &EvolutionConfig,
    task: &BenchmarkTask,
    property: &SafetyProperty,
) -> Result<EvolutionRun, EvolveError> {
    config.validate()?;
    let plant = task.plant();
    let plant_report = plant.validate();
    if !plant_report.is_ok() {
        return Err(EvolveError::InvalidPlant {
            name: plant.name().to_owned(),
            problem: plant_report.violations()[0].to_string(),
        });
    }
    for atom in property.atoms() {
        if plant.hazard_states(atom).is_none() {
            return Err(PropertyError::UnknownAtom { atom: atom.to_owned() }.into());
        }
    }
    let seed_controller = config
        .seed_genome
        .as_deref()
        .map(|text| prepare_seed_genome(text, plant, config))
        .transpose()?;

    // The controller speaks the plant's language mirrored: it consumes what
    // the plant emits and emits what the plant consumes.
    let controller_inputs: Vec<String> = plant.outputs().names().to_vec();
    let controller_outputs: Vec<String> = plant.inputs().names().to_vec();

    let mut candidates = Vec::new();
    let mut generations = Vec::new();
    let mut total_evaluations = 0u64;

    // Generation 0: the initial population. Slot 0 holds the seed genome if
    // one was supplied; every other slot draws a fresh random genome.
    let started = Instant::now();
    let mut population: Vec<Candidate> = Vec::with_capacity(config.population_size);
    let mut safe_candidates = 0u64;
    for slot in 0..config.population_size {
        let controller = match (&seed_controller, slot) {
            (Some(seed), 0) => seed.clone(),
            _ => {
                let mut rng = stream_rng(config.seed, PURPOSE_INIT, 0, slot as u64);
                let cap = config.max_states.min(INITIAL_STATE_CAP);
                let state_count = rng.random_range(1..=cap);
                random_controller(&mut rng, &controller_inputs, &controller_outputs, state_count)
            }
        };
        let fitness =
            gate_and_score(&controller, task, property, config, 0, slot as u64, &mut total_evaluations);
        safe_candidates += u64::from(fitness.is_some());
        candidates.push(CandidateRecord {
            generation: 0,
            slot: slot as u64,
            parent: None,
            mutation: None,
            safe: fitness.is_some(),
            fitness,
            genome_hash: genome_hash(&controller),
        });
        population.push(Candidate { controller, fitness });
    }
    generations.push(generation_stats(
        0,
        config.population_size as u64,
        safe_candidates,
        &population,
        started,
    ));

    if !threshold_reached(&population, config.fitness_threshold) {
        for generation in 1..=config.max_generations {
            let started = Instant::now();
            let mut safe_candidates = 0u64;
            let mut children: Vec<Candidate> =
                Vec::with_capacity(population.len() * config.offspring_per_parent);
            for (parent_idx, parent) in population.iter().enumerate() {
                for k in 0..config.offspring_per_parent {
                    let slot = (parent_idx * config.offspring_per_parent + k) as u64;
                    let mut rng = stream_rng(config.seed, PURPOSE_MUTATE, generation, slot);
                    let (child, kind) = mutate(
                        &parent.controller,
                        &config.mutation_weights,
                        config.max_states,
                        &mut rng,
                    );
                    let fitness = gate_and_score(
                        &child,
                        task,
                        property,
                        config,
                        generation,
                        slot,
                        &mut total_evaluations,
                    );
                    safe_candidates += u64::from(fitness.is_some());
                    candidates.push(CandidateRecord {
                        generation,
                        slot,
                        parent: Some(parent_idx as u64),
                        mutation: Some(kind),
                        safe: fitness.is_some(),
                        fitness,
                        genome_hash: genome_hash(&child),
                    });
                    children.push(Candidate { controller: child, fitness });
                }
            }
            let produced = children.len() as u64;
            population = select(population, children, config.population_size);
            generations.push(generation_stats(
                generation,
                produced,
                safe_candidates,
                &population,
                started,
            ));
            if threshold_reached(&population, config.fitness_threshold) {
                break;
            }
        }
    }

    let best = best_candidate(&population).cloned();
    let outcome = match &best {
        None => EvolutionOutcome::NoSafeStrategy,
        Some(candidate) => {
            let fitness = candidate.fitness.expect("best candidate is scored");
            if fitness >= config.fitness_threshold {
                EvolutionOutcome::ThresholdReached
            } else {
                EvolutionOutcome::GenerationsExhausted
            }
        }
    };
    Ok(EvolutionRun { outcome, best, generations, candidates, total_evaluations })
}

/// Parses and vets a user-supplied starting genome.
fn prepare_seed_genome(
    text: &str,
    plant: &Plant,
    config: &EvolutionConfig,
) -> Result<ControllerFsm, EvolveError> {
    let controller = crate::fsm::parse_controller(text)
        .map_err(|e| EvolveError::SeedGenome(e.to_string()))?;
    let report = controller.validate();
    if !report.is_ok() {
        return Err(EvolveError::SeedGenome(report.violations()[0].to_string()));
    }
    if controller.state_count() > config.max_states {
        return Err(EvolveError::SeedGenome(format!(
            "genome has {} states but max_states is {}",
            controller.state_count(),
            config.max_states
        )));
    }
    symbol_maps(&controller, plant).map_err(|e| EvolveError::SeedGenome(e.to_string()))?;
    Ok(controller)
}

/// Composes the genome with the plant, checks the property, and scores the
/// genome by simulation only if the verdict is safe.
///
/// The caller has already established that the plant is valid, every genome
/// is complete with matching alphabets, and every property atom names a
/// hazard, so composition and checking cannot fail here.
#[allow(clippy::too_many_arguments)]
fn gate_and_score(
    controller: &ControllerFsm,
    task: &BenchmarkTask,
    property: &SafetyProperty,
    config: &EvolutionConfig,
    generation: u64,
    slot: u64,
    total_evaluations: &mut u64,
) -> Option<f64> {
    let system = compose(controller, task.plant()).expect("engine genomes always compose");
    let verdict = check_safe(&system, property).expect("property atoms vetted up front");
    if verdict.value != Verdict::Safe {
        return None;
    }
    *total_evaluations += 1;
    let mut rng = stream_rng(config.seed, PURPOSE_EVAL, generation, slot);
    let mut sim = ClosedLoopSim::new(controller, task.plant(), task.rewards())
        .expect("engine genomes always simulate");
    let mut total = 0.0;
    for _ in 0..config.episodes_per_evaluation {
        total += sim.run_episode(config.episode_length, &mut rng);
    }
    Some(total / config.episodes_per_evaluation as f64)
}

/// Elitist truncation: parents and children compete in one pool, scored
/// genomes rank above unscored ones, and ties keep the earlier pool entry —
/// so a child replaces its parent only by strictly beating it.
fn select(parents: Vec<Candidate>, children: Vec<Candidate>, keep: usize) -> Vec<Candidate> {
    let mut pool = parents;
    pool.extend(children);
    pool.sort_by(|a, b| fitness_order(a.fitness, b.fitness));
    pool.truncate(keep);
    pool
}

/// Descending fitness with `None` (gate failures) sorted last.
fn fitness_order(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

fn threshold_reached(population: &[Candidate], threshold: f64) -> bool {
    best_candidate(population)
        .and_then(|c| c.fitness)
        .is_some_and(|f| f >= threshold)
}

/// Highest-scored member; earlier entries win ties.
fn best_candidate(population: &[Candidate]) -> Option<&Candidate> {
    let mut best: Option<&Candidate> = None;
    for candidate in population {
        if let Some(fitness) = candidate.fitness {
            let improves = match best.and_then(|b| b.fitness) {
                None => true,
                Some(current) => fitness > current,
            };
            if improves {
                best = Some(candidate);
            }
        }
    }
    best
}

fn generation_stats(
    generation: u64,
    produced: u64,
    safe_candidates: u64,
    population: &[Candidate],
    started: Instant,
) -> GenerationStats {
    let scored: Vec<f64> = population.iter().filter_map(|c| c.fitness).collect();
    let best_fitness = scored.iter().copied().fold(None, |acc: Option<f64>, f| {
        Some(acc.map_or(f, |a| a.max(f)))
    });
    let mean_fitness = if scored.is_empty() {
        None
    } else {
        Some(scored.iter().sum::<f64>() / scored.len() as f64)
    };
    GenerationStats {
        generation,
        candidates: produced,
        safe_candidates,
        best_fitness,
        mean_fitness,
        wall_time: started.elapsed(),
    }
}
