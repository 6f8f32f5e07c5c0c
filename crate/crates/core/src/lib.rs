//! Closed-loop harness for grading LLM driving advice.
//!
//! The pipeline turns a driving [`scenario::Scenario`] into a prompt,
//! collects replies from a chat-completion backend, extracts the numeric
//! claims and control lists from the free-form reply text, verifies every
//! claim against an independent kinematics oracle, replays brake schedules
//! through a deterministic longitudinal simulator, and aggregates
//! per-weather accuracy into CSV/JSON/plot reports.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`oracle`] — ground-truth kinematics (conversions, deceleration,
//!   stopping distance, headway).
//! - [`scenario`] — scenario data model, weather presets, detection
//!   emulation, JSONL trace ingestion.
//! - [`prompt`] — template rendering for the three reasoning kinds.
//! - [`gateway`] — chat-completion client (live HTTP, mock, replay) with
//!   retries, sampling, and transcript persistence.
//! - [`parser`] — extraction of control lists, numeric claims, and
//!   advisories from reply text.
//! - [`sim`] — longitudinal vehicle simulator and safety checks.
//! - [`grader`] — claim verification, transcript grading, accuracy
//!   aggregation.
//! - [`report`] — CSV/JSON/gnuplot report emission.
//! - [`pipeline`] — end-to-end run orchestration and manifest writing.

pub mod fixtures;
pub mod gateway;
pub mod grader;
pub mod oracle;
pub mod parser;
pub mod pipeline;
pub mod prompt;
pub mod report;
pub mod scenario;
pub mod sim;

pub use oracle::{BrakeModel, Quantity, Unit};
pub use scenario::{Detection, EgoState, ReasoningKind, Scenario, WeatherPreset};
