//! Run log assembly.
//!
//! An evolve run log is a JSON-lines file. The first line is a manifest
//! capturing everything needed to reproduce the run (resolved
//! configuration, effective seed, input hashes) plus the only
//! nondeterministic values in the file, the start and finish timestamps.
//! Every following line comes from the engine's deterministic records:
//! candidate and generation records interleaved in run order, then the
//! final result record.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use evoguard_core::evolve::{EvolutionConfig, EvolutionRun, LogRecord, ResultRecord};
use serde::Serialize;

/// First line of a run log.
#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub kind: &'static str,
    pub version: &'static str,
    /// The task argument as given (built-in name or plant file path).
    pub task: &'a str,
    /// Resolved property text the gate enforced.
    pub property: &'a str,
    /// Effective master seed after command-line overrides.
    pub seed: u64,
    /// Fully resolved engine configuration (seed genome inlined).
    pub config: &'a EvolutionConfig,
    /// SHA-256 hashes of the resolved inputs, keyed by role.
    pub input_hashes: BTreeMap<&'static str, String>,
    pub started_at: u64,
    pub finished_at: u64,
}

impl<'a> RunManifest<'a> {
    pub fn new(
        task: &'a str,
        property: &'a str,
        config: &'a EvolutionConfig,
        input_hashes: BTreeMap<&'static str, String>,
        started_at: u64,
        finished_at: u64,
    ) -> Self {
        RunManifest {
            kind: "manifest",
            version: env!("CARGO_PKG_VERSION"),
            task,
            property,
            seed: config.seed,
            config,
            input_hashes,
            started_at,
            finished_at,
        }
    }
}

pub fn epoch_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Serializes the whole log into memory and writes it in one shot.
pub fn write_log(path: &Path, manifest: &RunManifest<'_>, run: &EvolutionRun) -> io::Result<()> {
    let mut out = String::new();
    let mut push = |line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    push(serde_json::to_string(manifest).expect("manifest serializes"));

    // Candidate records come grouped by generation in creation order;
    // interleave each group with its generation record.
    let mut next = 0;
    for stats in &run.generations {
        while next < run.candidates.len() && run.candidates[next].generation == stats.generation {
            push(
                serde_json::to_string(&LogRecord::Candidate(&run.candidates[next]))
                    .expect("candidate record serializes"),
            );
            next += 1;
        }
        push(serde_json::to_string(&LogRecord::Generation(stats)).expect("stats serialize"));
    }
    debug_assert_eq!(next, run.candidates.len(), "every candidate belongs to a generation");

    let result = ResultRecord::from_run(run);
    push(serde_json::to_string(&LogRecord::Result(&result)).expect("result serializes"));
    std::fs::write(path, out)
}
