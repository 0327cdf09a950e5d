//! Serializable run records.
//!
//! An evolution run is logged as JSON lines: one record per genome, one per
//! generation, and a final result record. Every record carries a `kind`
//! discriminator so a log can be filtered with standard tools. Records
//! contain no wall-clock data; two identical runs serialize to identical
//! bytes.

use serde::Serialize;

use super::{CandidateRecord, EvolutionOutcome, EvolutionRun, GenerationStats};
use crate::fsm::ControllerFsm;
use crate::hash::sha256_hex;

/// SHA-256 over the genome's canonical text, used to identify genomes
/// across logs and runs.
pub fn genome_hash(controller: &ControllerFsm) -> String {
    sha256_hex(controller.canonical_text().as_bytes())
}

/// One line of a run log. Serializes with a `kind` tag alongside the
/// record's own fields.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogRecord<'a> {
    Candidate(&'a CandidateRecord),
    Generation(&'a GenerationStats),
    Result(&'a ResultRecord),
}

/// Terminal record of a run log.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub outcome: EvolutionOutcome,
    /// Generation records emitted, counting generation 0.
    pub generations: u64,
    pub total_evaluations: u64,
    pub best_fitness: Option<f64>,
    pub best_genome_hash: Option<String>,
    /// Canonical text of the winning genome, inline.
    pub best_genome: Option<String>,
    /// Convenience flag mirroring `outcome == no_safe_strategy`.
    pub no_safe_strategy: bool,
}

impl ResultRecord {
    pub fn from_run(run: &EvolutionRun) -> Self {
        let best = run.best.as_ref();
        ResultRecord {
            outcome: run.outcome,
            generations: run.generations.len() as u64,
            total_evaluations: run.total_evaluations,
            best_fitness: best.and_then(|c| c.fitness),
            best_genome_hash: best.map(|c| genome_hash(&c.controller)),
            best_genome: best.map(|c| c.controller.canonical_text()),
            no_safe_strategy: run.outcome == EvolutionOutcome::NoSafeStrategy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::MutationKind;
    use std::time::Duration;

    fn minimal_controller() -> ControllerFsm {
        let mut fsm = ControllerFsm::new(
            "candidate",
            vec!["x".into()],
            vec!["y".into()],
            vec!["s0".into()],
        );
        fsm.set_transition(0, 0, 0, 0);
        fsm
    }

    #[test]
    fn genome_hash_tracks_canonical_text() {
        let fsm = minimal_controller();
        assert_eq!(genome_hash(&fsm), sha256_hex(fsm.canonical_text().as_bytes()));
        let mut renamed = minimal_controller();
        renamed.set_initial(0); // no-op change: same canonical text
        assert_eq!(genome_hash(&fsm), genome_hash(&renamed));
    }

    #[test]
    fn candidate_record_serializes_with_kind_tag() {
        let record = CandidateRecord {
            generation: 3,
            slot: 1,
            parent: Some(0),
            mutation: Some(MutationKind::ChangeOutput),
            safe: true,
            fitness: Some(0.5),
            genome_hash: "ab".into(),
        };
        let line = serde_json::to_string(&LogRecord::Candidate(&record)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["kind"], "candidate");
        assert_eq!(value["generation"], 3);
        assert_eq!(value["mutation"], "change_output");
        assert_eq!(value["fitness"], 0.5);
    }

    #[test]
    fn generation_record_omits_wall_time() {
        let stats = GenerationStats {
            generation: 0,
            candidates: 4,
            safe_candidates: 2,
            best_fitness: Some(0.75),
            mean_fitness: Some(0.5),
            wall_time: Duration::from_secs(5),
        };
        let line = serde_json::to_string(&LogRecord::Generation(&stats)).unwrap();
        assert!(!line.contains("wall_time"));
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["kind"], "generation");
        assert_eq!(value["best_fitness"], 0.75);
    }

    #[test]
    fn result_record_reports_no_safe_strategy() {
        let run = EvolutionRun {
            outcome: super::super::EvolutionOutcome::NoSafeStrategy,
            best: None,
            generations: vec![],
            candidates: vec![],
            total_evaluations: 0,
        };
        let record = ResultRecord::from_run(&run);
        let line = serde_json::to_string(&LogRecord::Result(&record)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["kind"], "result");
        assert_eq!(value["outcome"], "no_safe_strategy");
        assert_eq!(value["no_safe_strategy"], true);
        assert_eq!(value["best_genome"], serde_json::Value::Null);
    }
}
