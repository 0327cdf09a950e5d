//! `evoguard`: validate, check, evolve, and simulate safety-gated
//! finite-state controllers.
//!
//! Exit codes are part of the interface:
//!
//! * `0` — success (`check`: the property holds)
//! * `1` — `check` only: the property is violated
//! * `2` — any usage, parse, or configuration error
//! * `3` — `evolve` only: the run completed but no genome ever passed the
//!   safety gate

mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evoguard_core::evolve::{run_evolution, EvolutionConfig, EvolutionOutcome, MutationWeights};
use evoguard_core::fsm::{compose, parse_controller, parse_machine, parse_plant, ParsedMachine};
use evoguard_core::hash::sha256_hex;
use evoguard_core::safety::{check_controller_alone, check_safe, SafetyVerdict};
use evoguard_core::sim::ClosedLoopSim;
use evoguard_core::{BenchmarkTask, ControllerFsm, SafetyProperty, Verdict};
use manifest::{epoch_seconds, write_log, RunManifest};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "evoguard", version, about = "Evolve and verify safe finite-state controllers")]
struct Cli {
    /// Master seed; overrides the seed in an evolve configuration file.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Write the evolve run log (JSON lines) to this path.
    #[arg(long, global = true, value_name = "PATH")]
    log: Option<PathBuf>,
    /// Suppress informational stderr output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a machine file of either kind.
    Validate {
        /// Controller (`fsm`) or plant file.
        file: PathBuf,
    },
    /// Check a safety property and print SAFE or UNSAFE.
    Check(CheckArgs),
    /// Evolve a controller from a JSON configuration file.
    Evolve {
        /// Configuration file; see the README for the schema.
        config: PathBuf,
    },
    /// Simulate a controller in closed loop and print a step transcript.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct CheckArgs {
    /// Controller file.
    controller: PathBuf,
    /// Built-in task name (`tank`, `rover`) or plant file. When omitted,
    /// the controller is checked in isolation and property atoms name its
    /// output symbols.
    environment: Option<String>,
    /// Property text, e.g. `AG !(overflow | underflow)`. Defaults to the
    /// built-in task's property; required for plant files and isolation
    /// checks.
    #[arg(long, value_name = "TEXT")]
    property: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Controller file.
    controller: PathBuf,
    /// Built-in task name (`tank`, `rover`) or plant file. Plant files
    /// carry no reward table, so every step scores 0.
    environment: String,
    /// Steps per episode.
    #[arg(long, default_value_t = 20)]
    steps: usize,
    /// Episodes to run back to back.
    #[arg(long, default_value_t = 1)]
    episodes: usize,
}

/// Evolve configuration file: the engine parameters plus wiring that is the
/// front end's business (task selection, file paths).
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolveFileConfig {
    /// Built-in task name or plant file path.
    task: String,
    /// Property enforced by the gate; defaults to the built-in task's.
    #[serde(default)]
    property: Option<String>,
    population_size: usize,
    #[serde(default = "default_offspring_per_parent")]
    offspring_per_parent: usize,
    max_generations: u64,
    max_states: usize,
    fitness_threshold: f64,
    episode_length: usize,
    episodes_per_evaluation: usize,
    #[serde(default)]
    mutation_weights: MutationWeights,
    #[serde(default)]
    seed: u64,
    /// Path to a controller file used as the starting genome in slot 0.
    #[serde(default)]
    seed_genome: Option<PathBuf>,
    /// Run log destination; `--log` takes precedence.
    #[serde(default)]
    log_path: Option<PathBuf>,
    /// Where to write the winning genome; stdout when omitted.
    #[serde(default)]
    best_path: Option<PathBuf>,
}

fn default_offspring_per_parent() -> usize {
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Validate { file } => cmd_validate(file, &cli),
        Command::Check(args) => cmd_check(args, &cli),
        Command::Evolve { config } => cmd_evolve(config, &cli),
        Command::Simulate(args) => cmd_simulate(args, &cli),
    };
    ExitCode::from(code)
}

/// Prints an error and returns the usage/config error code.
fn fail(message: impl AsRef<str>) -> u8 {
    eprintln!("error: {}", message.as_ref());
    2
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Loads and fully validates a controller file.
fn load_controller(path: &Path) -> Result<ControllerFsm, String> {
    let text = read_file(path)?;
    let controller = parse_controller(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let report = controller.validate();
    if let Some(violation) = report.violations().first() {
        return Err(format!("{}: {violation}", path.display()));
    }
    Ok(controller)
}

/// Resolves the environment argument: a built-in task by name, or a plant
/// file wrapped as a rewardless task.
fn resolve_environment(arg: &str) -> Result<BenchmarkTask, String> {
    if BenchmarkTask::builtin_names().contains(&arg) {
        return Ok(BenchmarkTask::builtin(arg).expect("name just matched"));
    }
    let path = Path::new(arg);
    let text = read_file(path)?;
    let plant = parse_plant(&text).map_err(|e| format!("{arg}: {e}"))?;
    let report = plant.validate();
    if let Some(violation) = report.violations().first() {
        return Err(format!("{arg}: {violation}"));
    }
    Ok(BenchmarkTask::custom(plant, ""))
}

/// The property for a resolved environment: explicit text wins, a built-in
/// default fills in, and plant files without either are an error.
fn resolve_property(explicit: Option<&str>, task: &BenchmarkTask) -> Result<SafetyProperty, String> {
    let text = match explicit {
        Some(text) => text,
        None if !task.default_property().is_empty() => task.default_property(),
        None => return Err("plant files need an explicit property (use --property)".into()),
    };
    SafetyProperty::parse(text).map_err(|e| format!("property: {e}"))
}

fn cmd_validate(file: &Path, cli: &Cli) -> u8 {
    let text = match read_file(file) {
        Ok(text) => text,
        Err(e) => return fail(e),
    };
    let machine = match parse_machine(&text) {
        Ok(machine) => machine,
        Err(e) => return fail(format!("{}: {e}", file.display())),
    };
    let (kind, name, report) = match &machine {
        ParsedMachine::Controller(fsm) => ("fsm", fsm.name().to_owned(), fsm.validate()),
        ParsedMachine::Plant(plant) => ("plant", plant.name().to_owned(), plant.validate()),
    };
    if report.is_ok() {
        if !cli.quiet {
            println!("ok: {kind} `{name}`");
        }
        return 0;
    }
    for violation in report.violations() {
        eprintln!("error: {}: {violation}", file.display());
    }
    2
}

fn cmd_check(args: &CheckArgs, cli: &Cli) -> u8 {
    let controller = match load_controller(&args.controller) {
        Ok(controller) => controller,
        Err(e) => return fail(e),
    };
    let (verdict, states) = match &args.environment {
        None => {
            let Some(text) = args.property.as_deref() else {
                return fail("checking a controller alone needs a --property over its outputs");
            };
            let property = match SafetyProperty::parse(text) {
                Ok(property) => property,
                Err(e) => return fail(format!("property: {e}")),
            };
            match check_controller_alone(&controller, &property) {
                Ok(verdict) => (verdict, controller.state_count()),
                Err(e) => return fail(format!("property: {e}")),
            }
        }
        Some(environment) => {
            let task = match resolve_environment(environment) {
                Ok(task) => task,
                Err(e) => return fail(e),
            };
            let property = match resolve_property(args.property.as_deref(), &task) {
                Ok(property) => property,
                Err(e) => return fail(e),
            };
            let system = match compose(&controller, task.plant()) {
                Ok(system) => system,
                Err(e) => return fail(e.to_string()),
            };
            match check_safe(&system, &property) {
                Ok(verdict) => (verdict, system.len()),
                Err(e) => return fail(format!("property: {e}")),
            }
        }
    };
    report_verdict(verdict, states, cli.quiet)
}

fn report_verdict(verdict: SafetyVerdict, states: usize, quiet: bool) -> u8 {
    if !quiet {
        eprintln!(
            "states: {states}, iterations: {}, flagged: {}",
            verdict.iterations, verdict.states_flagged
        );
    }
    match verdict.value {
        Verdict::Safe => {
            println!("SAFE");
            0
        }
        Verdict::Unsafe => {
            println!("UNSAFE");
            1
        }
    }
}

fn cmd_simulate(args: &SimulateArgs, cli: &Cli) -> u8 {
    if args.episodes == 0 {
        return fail("--episodes must be at least 1");
    }
    let controller = match load_controller(&args.controller) {
        Ok(controller) => controller,
        Err(e) => return fail(e),
    };
    let task = match resolve_environment(&args.environment) {
        Ok(task) => task,
        Err(e) => return fail(e),
    };
    let plant = task.plant();
    let mut sim = match ClosedLoopSim::new(&controller, plant, task.rewards()) {
        Ok(sim) => sim,
        Err(e) => return fail(e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
    let mut mean_sum = 0.0;
    for _ in 0..args.episodes {
        sim.reset(&mut rng);
        let mut episode_total = 0.0;
        for _ in 0..args.steps {
            let step = sim.step(&mut rng);
            episode_total += step.reward;
            println!(
                "{} {} {} {} {} {:.1}",
                step.index,
                plant.state_name(step.plant_state),
                plant.outputs().name(step.sensor),
                controller.state_name(step.controller_state),
                plant.inputs().name(step.actuator),
                step.reward
            );
        }
        if args.steps > 0 {
            mean_sum += episode_total / args.steps as f64;
        }
    }
    println!("mean {:.4}", mean_sum / args.episodes as f64);
    0
}

fn cmd_evolve(config_path: &Path, cli: &Cli) -> u8 {
    let text = match read_file(config_path) {
        Ok(text) => text,
        Err(e) => return fail(e),
    };
    let file_config: EvolveFileConfig = match serde_json::from_str(&text) {
        Ok(config) => config,
        Err(e) => return fail(format!("{}: {e}", config_path.display())),
    };
    let task = match resolve_environment(&file_config.task) {
        Ok(task) => task,
        Err(e) => return fail(e),
    };
    let property = match resolve_property(file_config.property.as_deref(), &task) {
        Ok(property) => property,
        Err(e) => return fail(e),
    };
    let seed_genome = match &file_config.seed_genome {
        Some(path) => match read_file(path) {
            Ok(text) => Some(text),
            Err(e) => return fail(e),
        },
        None => None,
    };
    let config = EvolutionConfig {
        population_size: file_config.population_size,
        offspring_per_parent: file_config.offspring_per_parent,
        max_generations: file_config.max_generations,
        max_states: file_config.max_states,
        fitness_threshold: file_config.fitness_threshold,
        episode_length: file_config.episode_length,
        episodes_per_evaluation: file_config.episodes_per_evaluation,
        mutation_weights: file_config.mutation_weights,
        seed: cli.seed.unwrap_or(file_config.seed),
        seed_genome,
    };

    let started_at = epoch_seconds();
    let run = match run_evolution(&config, &task, &property) {
        Ok(run) => run,
        Err(e) => return fail(e.to_string()),
    };
    let finished_at = epoch_seconds();

    if let Some(log_path) = cli.log.as_ref().or(file_config.log_path.as_ref()) {
        let mut input_hashes = BTreeMap::new();
        input_hashes.insert("plant", sha256_hex(task.plant().canonical_text().as_bytes()));
        if let Some(genome) = &config.seed_genome {
            input_hashes.insert("seed_genome", sha256_hex(genome.as_bytes()));
        }
        let manifest = RunManifest::new(
            &file_config.task,
            property.source(),
            &config,
            input_hashes,
            started_at,
            finished_at,
        );
        if let Err(e) = write_log(log_path, &manifest, &run) {
            return fail(format!("{}: {e}", log_path.display()));
        }
    }

    if !cli.quiet {
        let best_note = match run.best.as_ref().and_then(|b| b.fitness) {
            Some(fitness) => format!(", best fitness: {fitness:.4}"),
            None => String::new(),
        };
        eprintln!(
            "outcome: {}, generations: {}, evaluations: {}{best_note}",
            outcome_name(run.outcome),
            run.generations.len(),
            run.total_evaluations
        );
    }

    match run.best {
        None => 3,
        Some(best) => {
            let genome_text = best.controller.canonical_text();
            match &file_config.best_path {
                Some(path) => {
                    if let Err(e) = fs::write(path, &genome_text) {
                        return fail(format!("{}: {e}", path.display()));
                    }
                }
                None => print!("{genome_text}"),
            }
            0
        }
    }
}

fn outcome_name(outcome: EvolutionOutcome) -> &'static str {
    match outcome {
        EvolutionOutcome::ThresholdReached => "threshold_reached",
        EvolutionOutcome::GenerationsExhausted => "generations_exhausted",
        EvolutionOutcome::NoSafeStrategy => "no_safe_strategy",
    }
}
