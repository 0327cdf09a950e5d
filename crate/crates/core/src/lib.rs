//! Evolutionary synthesis of finite-state controllers with a model-checking
//! safety gate.
//!
//! The crate is organised around four pieces:
//!
//! * [`fsm`] — deterministic Mealy controllers, nondeterministic plants, the
//!   synchronous closed-loop product of the two, and a line-oriented text
//!   format with a canonical serialization.
//! * [`safety`] — an `AG`-rooted boolean safety property language and a
//!   backward-reachability checker that decides whether a closed loop can
//!   ever enter a hazard state.
//! * [`evolve`] — a mutation-only evolutionary loop that only ever assigns
//!   fitness to candidates the safety checker has accepted.
//! * [`plant`] — the built-in benchmark environments (`tank`, `rover`) with
//!   their reward tables and default properties.
//!
//! [`sim`] holds the shared closed-loop episode simulator used both by
//! fitness evaluation and by the CLI transcript printer.

pub mod evolve;
pub mod fsm;
pub mod hash;
pub mod plant;
pub mod safety;
pub mod sim;

pub use fsm::{ClosedLoopSystem, ControllerFsm, Plant, StateSet};
pub use plant::BenchmarkTask;
pub use safety::{SafetyProperty, SafetyVerdict, Verdict};
