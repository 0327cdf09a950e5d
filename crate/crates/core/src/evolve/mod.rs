//! Evolutionary synthesis of safe controllers.
//!
//! The engine runs a mutation-only evolutionary loop over controller
//! genomes: each generation mutates every member of the population, gates
//! every new genome through the safety checker against the task's plant,
//! scores only the genomes that pass by closed-loop simulation, and keeps
//! the best under elitist truncation selection. Genomes that fail the gate
//! are never simulated; they carry no fitness and rank below every scored
//! genome.
//!
//! Determinism is a hard requirement: given the same configuration the run
//! is bit-for-bit reproducible, including every random draw. Randomness is
//! organised as independent named streams keyed by `(seed, purpose,
//! generation, slot)` so that adding draws in one place never perturbs the
//! draws made elsewhere.

mod mutation;
mod records;
mod run;

pub use records::{genome_hash, LogRecord, ResultRecord};
pub use mutation::{mutate, random_controller};
pub use run::run_evolution;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::fsm::ControllerFsm;

/// Parameters of one evolution run.
///
/// `validate` must pass before the configuration is used; [`run_evolution`]
/// calls it and refuses invalid configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Number of genomes kept after selection (and created initially).
    pub population_size: usize,
    /// Children produced per surviving genome each generation.
    #[serde(default = "default_offspring_per_parent")]
    pub offspring_per_parent: usize,
    /// Generations to run after the initial population (generation 0).
    pub max_generations: u64,
    /// Hard cap on genome size; `add_state` never grows a genome past it.
    pub max_states: usize,
    /// Fitness at which the run stops early, checked from generation 0 on.
    pub fitness_threshold: f64,
    /// Steps per simulated episode.
    pub episode_length: usize,
    /// Episodes averaged into one fitness value.
    pub episodes_per_evaluation: usize,
    /// Relative draw weights of the mutation operators.
    #[serde(default)]
    pub mutation_weights: MutationWeights,
    /// Master seed; every random stream of the run derives from it.
    #[serde(default)]
    pub seed: u64,
    /// Optional genome text placed in slot 0 of the initial population.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_genome: Option<String>,
}

fn default_offspring_per_parent() -> usize {
    1
}

impl EvolutionConfig {
    /// Checks the configuration for values the engine cannot run with.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size == 0 {
            return Err(ConfigError::ZeroPopulation);
        }
        if self.offspring_per_parent == 0 {
            return Err(ConfigError::ZeroOffspring);
        }
        if self.max_states == 0 {
            return Err(ConfigError::ZeroMaxStates);
        }
        if self.episode_length == 0 {
            return Err(ConfigError::ZeroEpisodeLength);
        }
        if self.episodes_per_evaluation == 0 {
            return Err(ConfigError::ZeroEpisodes);
        }
        if !self.fitness_threshold.is_finite() {
            return Err(ConfigError::ThresholdNotFinite);
        }
        self.mutation_weights.validate()
    }
}

/// Relative weights for drawing mutation operators.
///
/// Weights need not sum to 1; they are normalised over the operators
/// applicable to the genome at hand. A weight of 0 disables an operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationWeights {
    #[serde(default = "default_weight")]
    pub add_state: f64,
    #[serde(default = "default_weight")]
    pub delete_state: f64,
    #[serde(default = "default_weight")]
    pub change_transition: f64,
    #[serde(default = "default_weight")]
    pub change_output: f64,
    #[serde(default = "default_weight")]
    pub change_initial: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl Default for MutationWeights {
    fn default() -> Self {
        MutationWeights {
            add_state: 1.0,
            delete_state: 1.0,
            change_transition: 1.0,
            change_output: 1.0,
            change_initial: 1.0,
        }
    }
}

impl MutationWeights {
    pub fn weight_of(&self, kind: MutationKind) -> f64 {
        match kind {
            MutationKind::AddState => self.add_state,
            MutationKind::DeleteState => self.delete_state,
            MutationKind::ChangeTransition => self.change_transition,
            MutationKind::ChangeOutput => self.change_output,
            MutationKind::ChangeInitial => self.change_initial,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for kind in MutationKind::ALL {
            let weight = self.weight_of(kind);
            if !weight.is_finite() || weight < 0.0 {
                return Err(ConfigError::BadWeight { kind });
            }
        }
        Ok(())
    }
}

/// The mutation operators the engine can apply to a genome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    /// Append a fresh state with a random row and redirect one existing
    /// transition to it. Only applicable below `max_states`.
    AddState,
    /// Remove a random state, rerouting transitions that targeted it.
    /// Only applicable to genomes with more than one state.
    DeleteState,
    /// Redirect one `(state, input)` entry to a random successor.
    ChangeTransition,
    /// Replace the output symbol of one `(state, input)` entry.
    ChangeOutput,
    /// Move the initial state.
    ChangeInitial,
}

impl MutationKind {
    pub const ALL: [MutationKind; 5] = [
        MutationKind::AddState,
        MutationKind::DeleteState,
        MutationKind::ChangeTransition,
        MutationKind::ChangeOutput,
        MutationKind::ChangeInitial,
    ];
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MutationKind::AddState => "add_state",
            MutationKind::DeleteState => "delete_state",
            MutationKind::ChangeTransition => "change_transition",
            MutationKind::ChangeOutput => "change_output",
            MutationKind::ChangeInitial => "change_initial",
        };
        f.write_str(name)
    }
}

/// A configuration the engine refuses to run with.
#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("population_size must be at least 1")]
    ZeroPopulation,
    #[error("offspring_per_parent must be at least 1")]
    ZeroOffspring,
    #[error("max_states must be at least 1")]
    ZeroMaxStates,
    #[error("episode_length must be at least 1")]
    ZeroEpisodeLength,
    #[error("episodes_per_evaluation must be at least 1")]
    ZeroEpisodes,
    #[error("fitness_threshold must be finite")]
    ThresholdNotFinite,
    #[error("mutation weight for {kind} must be finite and non-negative")]
    BadWeight { kind: MutationKind },
}

/// A genome together with its score, if it earned one.
///
/// `fitness` is `None` exactly when the genome failed the safety gate; such
/// genomes are never simulated and rank below every scored genome in
/// selection.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub controller: ControllerFsm,
    pub fitness: Option<f64>,
}

/// One log entry per genome the engine created.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateRecord {
    /// Generation the genome was created in (0 = initial population).
    pub generation: u64,
    /// Creation slot within its generation; also selects its random streams.
    pub slot: u64,
    /// Index of the parent in the previous generation's population order,
    /// or `None` for initial genomes.
    pub parent: Option<u64>,
    /// Operator that produced the genome, or `None` for initial genomes.
    pub mutation: Option<MutationKind>,
    /// Whether the genome passed the safety gate.
    pub safe: bool,
    /// Mean episode reward, present only for gate-passing genomes.
    pub fitness: Option<f64>,
    /// SHA-256 of the genome's canonical text.
    pub genome_hash: String,
}

/// Aggregates for one generation, captured after selection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: u64,
    /// Genomes created this generation.
    pub candidates: u64,
    /// How many of them passed the safety gate (and were evaluated).
    pub safe_candidates: u64,
    /// Best fitness in the population at the end of the generation.
    pub best_fitness: Option<f64>,
    /// Mean fitness over the scored part of that population.
    pub mean_fitness: Option<f64>,
    /// Wall-clock time spent on the generation. Excluded from serialized
    /// records so that logs of identical runs are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Why the run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionOutcome {
    /// The best fitness reached `fitness_threshold`.
    ThresholdReached,
    /// `max_generations` elapsed with at least one gate-passing genome found.
    GenerationsExhausted,
    /// No genome ever passed the safety gate.
    NoSafeStrategy,
}

/// Complete result of one evolution run.
#[derive(Clone, Debug)]
pub struct EvolutionRun {
    pub outcome: EvolutionOutcome,
    /// Best scored genome, `None` exactly for
    /// [`EvolutionOutcome::NoSafeStrategy`].
    pub best: Option<Candidate>,
    /// One entry per generation, starting with generation 0.
    pub generations: Vec<GenerationStats>,
    /// One entry per genome created, in creation order.
    pub candidates: Vec<CandidateRecord>,
    /// Fitness evaluations performed across the whole run.
    pub total_evaluations: u64,
}

/// An evolution run that could not start or that hit an unusable input.
#[derive(Debug, thiserror::Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("safety property: {0}")]
    Property(#[from] crate::safety::PropertyError),
    #[error("plant `{name}` is not usable: {problem}")]
    InvalidPlant { name: String, problem: String },
    #[error("seed genome: {0}")]
    SeedGenome(String),
}
