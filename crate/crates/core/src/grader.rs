//! Claim verification and accuracy aggregation.
//!
//! Every numeric claim is recomputed from the scenario's ground inputs via
//! the kinematics oracle and compared at a relative tolerance. The default
//! tolerance of 1% absorbs the truncated 0.277778 conversion factor the
//! replies use (≤0.53% observed) while still catching the ~1.7% error of
//! mixing an m/s decrement into a km/h speed.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::Transcript;
use crate::oracle::{self, BrakeDemand, BrakeModel, Quantity, Unit};
use crate::parser::{
    self, Advisory, ClaimKind, ControlSchedule, NumericClaim, SpeedInterpretation,
};
use crate::scenario::{ReasoningKind, Scenario};
use crate::sim::{self, SafetyFlag, SafetyOptions, SimModel};

/// Default relative tolerance for claim verification.
pub const DEFAULT_TOLERANCE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum GradeError {
    #[error("annotation references unknown scenario id {0:?}")]
    UnknownScenario(String),
    #[error("annotation {file}: {message}")]
    InvalidAnnotation { file: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Correct,
    Incorrect,
    Unverifiable,
}

/// Outcome of checking one claim against the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub claim: NumericClaim,
    pub status: VerdictStatus,
    pub oracle_value: Option<Quantity>,
    pub relative_error: Option<f64>,
    pub reason: String,
}

/// Grading knobs; `Default` gives the documented behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraderConfig {
    pub tolerance: f64,
    pub brake_model: BrakeModel,
    pub sim_model: SimModel,
    pub sim_dt: f64,
    /// Replay only the first brake entry instead of the whole schedule.
    pub first_only: bool,
    /// Count unverifiable claims in totals.
    pub include_unverifiable: bool,
    pub safety: SafetyOptions,
}

impl Default for GraderConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            brake_model: BrakeModel::default(),
            sim_model: SimModel::default(),
            sim_dt: 0.1,
            first_only: false,
            include_unverifiable: false,
            safety: SafetyOptions::default(),
        }
    }
}

fn find_input(claim: &NumericClaim, unit: Unit) -> Option<f64> {
    claim
        .inputs
        .iter()
        .find(|q| q.unit == unit)
        .map(|q| q.value)
}

fn unverifiable(claim: &NumericClaim, reason: impl Into<String>) -> Verdict {
    Verdict {
        claim: claim.clone(),
        status: VerdictStatus::Unverifiable,
        oracle_value: None,
        relative_error: None,
        reason: reason.into(),
    }
}

fn rule_violation(claim: &NumericClaim, reason: impl Into<String>) -> Verdict {
    Verdict {
        claim: claim.clone(),
        status: VerdictStatus::Incorrect,
        oracle_value: None,
        relative_error: None,
        reason: reason.into(),
    }
}

fn compare(claim: &NumericClaim, oracle_value: f64, unit: Unit, tolerance: f64) -> Verdict {
    let claimed = claim.claimed.value;
    let relative_error = if oracle_value == 0.0 {
        if claimed == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((claimed - oracle_value) / oracle_value).abs()
    };
    let (status, reason) = if relative_error <= tolerance {
        (
            VerdictStatus::Correct,
            format!("relative error {:.6} within tolerance {}", relative_error, tolerance),
        )
    } else {
        (
            VerdictStatus::Incorrect,
            format!("relative error {:.6} exceeds tolerance {}", relative_error, tolerance),
        )
    };
    Verdict {
        claim: claim.clone(),
        status,
        oracle_value: Quantity::new(oracle_value, unit).ok(),
        relative_error: Some(relative_error),
        reason,
    }
}

/// Verify one claim against the scenario at the given relative tolerance.
pub fn verify_claim(claim: &NumericClaim, ctx: &Scenario, tolerance: f64) -> Verdict {
    let cfg = GraderConfig {
        tolerance,
        ..GraderConfig::default()
    };
    verify_claim_with(claim, ctx, &cfg)
}

/// [`verify_claim`] with an explicit grader configuration.
pub fn verify_claim_with(claim: &NumericClaim, ctx: &Scenario, cfg: &GraderConfig) -> Verdict {
    let tol = cfg.tolerance;
    let ego_ms = match oracle::kmh_to_ms(ctx.ego.speed_kmh) {
        Ok(v) => v,
        Err(e) => return unverifiable(claim, format!("scenario speed invalid: {e}")),
    };
    let limit_ms = match oracle::kmh_to_ms(ctx.speed_limit_kmh) {
        Ok(v) => v,
        Err(e) => return unverifiable(claim, format!("scenario limit invalid: {e}")),
    };

    match claim.kind {
        ClaimKind::Conversion => {
            if claim.claimed.unit != Unit::MetersPerSecond {
                return rule_violation(
                    claim,
                    format!("unit mismatch: conversion result in {}, expected m/s", claim.claimed.unit),
                );
            }
            let Some(input_kmh) = find_input(claim, Unit::KilometersPerHour) else {
                return unverifiable(claim, "no km/h input recorded with the claim");
            };
            match oracle::kmh_to_ms(input_kmh) {
                Ok(expected) => compare(claim, expected, Unit::MetersPerSecond, tol),
                Err(e) => unverifiable(claim, e.to_string()),
            }
        }
        ClaimKind::Deceleration => {
            if claim.claimed.unit != Unit::MetersPerSecondSquared {
                return rule_violation(
                    claim,
                    format!("unit mismatch: deceleration in {}, expected m/s2", claim.claimed.unit),
                );
            }
            let Some(duration) = find_input(claim, Unit::Seconds) else {
                return unverifiable(claim, "no duration stated for the deceleration");
            };
            match oracle::required_decel(ego_ms, limit_ms, duration) {
                Ok(expected) => compare(claim, expected, Unit::MetersPerSecondSquared, tol),
                Err(e) => unverifiable(claim, e.to_string()),
            }
        }
        ClaimKind::SpeedAtTime => {
            let Some(t) = find_input(claim, Unit::Seconds) else {
                return unverifiable(claim, "no time index recorded with the claim");
            };
            let Some(decel) = find_input(claim, Unit::MetersPerSecondSquared) else {
                return unverifiable(claim, "no operative deceleration in context");
            };
            match claim.claimed.unit {
                Unit::MetersPerSecond => {
                    let expected = (ego_ms - decel * t).max(0.0);
                    compare(claim, expected, Unit::MetersPerSecond, tol)
                }
                Unit::KilometersPerHour => {
                    // Unit-consistent update: the m/s² decrement scales by
                    // 3.6 when applied to a km/h speed.
                    let expected = (ctx.ego.speed_kmh - decel * oracle::KMH_PER_MS * t).max(0.0);
                    compare(claim, expected, Unit::KilometersPerHour, tol)
                }
                other => rule_violation(
                    claim,
                    format!("unit mismatch: speed claimed in {other}, expected m/s or km/h"),
                ),
            }
        }
        ClaimKind::BrakeValue => {
            if claim.claimed.unit != Unit::Dimensionless {
                return rule_violation(
                    claim,
                    format!("unit mismatch: brake value in {}, expected a bare fraction", claim.claimed.unit),
                );
            }
            if !(0.0..=1.0).contains(&claim.claimed.value) {
                return rule_violation(
                    claim,
                    format!("brake value {} outside [0, 1]", claim.claimed.value),
                );
            }
            let Some(duration) = find_input(claim, Unit::Seconds) else {
                return unverifiable(claim, "no duration stated for the brake value");
            };
            let required = match oracle::required_decel(ego_ms, limit_ms, duration) {
                Ok(a) => a.abs(),
                Err(e) => return unverifiable(claim, e.to_string()),
            };
            match oracle::brake_from_decel(required, &cfg.brake_model) {
                Ok(BrakeDemand::Feasible { brake }) => {
                    compare(claim, brake, Unit::Dimensionless, tol)
                }
                Ok(BrakeDemand::Infeasible { required_decel }) => rule_violation(
                    claim,
                    format!(
                        "required deceleration {required_decel:.4} m/s2 exceeds full brake ({} m/s2)",
                        cfg.brake_model.max_decel_at_full_brake
                    ),
                ),
                Err(e) => unverifiable(claim, e.to_string()),
            }
        }
        ClaimKind::Distance => {
            if claim.claimed.unit != Unit::Meters {
                return rule_violation(claim, "unit mismatch: distance must be in meters");
            }
            let Some(d) = ctx.primary_detection() else {
                return unverifiable(claim, "scenario has no primary detection to compare");
            };
            compare(claim, d.distance_m, Unit::Meters, tol)
        }
        ClaimKind::Duration => {
            let Some(decel) = find_input(claim, Unit::MetersPerSecondSquared) else {
                return unverifiable(claim, "no operative deceleration in context");
            };
            if decel <= 0.0 {
                return unverifiable(claim, "operative deceleration is zero");
            }
            if ego_ms <= limit_ms {
                return unverifiable(claim, "already at or below the speed limit");
            }
            let expected = (ego_ms - limit_ms) / decel;
            compare(claim, expected, Unit::Seconds, tol)
        }
    }
}

/// A graded transcript: verdicts, extraction results, closed-loop safety
/// flags, and the countable totals that feed the accuracy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedTranscript {
    pub scenario_id: String,
    pub sample_index: u32,
    pub reasoning_kind: ReasoningKind,
    pub weather: String,
    pub verdicts: Vec<Verdict>,
    pub advisories: Vec<Advisory>,
    pub control: Option<ControlSchedule>,
    /// Parse errors, range violations, ambiguous lists, gateway errors —
    /// each is one countable wrong item.
    pub defects: Vec<String>,
    pub safety_flags: Vec<SafetyFlag>,
    pub total_items: u64,
    pub wrong_items: u64,
}

impl GradedTranscript {
    pub fn accuracy(&self) -> Option<f64> {
        (self.total_items > 0)
            .then(|| (self.total_items - self.wrong_items) as f64 / self.total_items as f64)
    }
}

/// Grade one transcript against its scenario. Parse failures become graded
/// defects rather than errors; a brake schedule, when present and in
/// range, is replayed through the simulator and its safety flags counted.
pub fn grade_transcript(t: &Transcript, s: &Scenario, cfg: &GraderConfig) -> GradedTranscript {
    let extraction = parser::extract_all(&t.response_text);
    let mut defects = Vec::new();
    if let Some(e) = &t.error {
        defects.push(format!("gateway error: {e}"));
    }
    if let Some(e) = &extraction.control_error {
        defects.push(format!("control list parse error: {e}"));
    }
    if let Some(control) = &extraction.control {
        for v in &control.range_violations {
            defects.push(format!(
                "{:?} list entry {} out of range: {}",
                v.list, v.index, v.value
            ));
        }
        if control.speed_interpretation == Some(SpeedInterpretation::Ambiguous) {
            defects.push("speed list mixes pedal fractions and speeds".into());
        }
    }

    let verdicts: Vec<Verdict> = extraction
        .claims
        .iter()
        .map(|c| verify_claim_with(c, s, cfg))
        .collect();

    let mut safety_flags = Vec::new();
    if let Some(control) = &extraction.control {
        if !control.brake_entries.is_empty() && control.range_violations.is_empty() {
            let schedule: &[f64] = if cfg.first_only {
                &control.brake_entries[..1]
            } else {
                &control.brake_entries
            };
            match sim::run_brake_schedule(s, schedule, cfg.sim_dt, &cfg.sim_model) {
                Ok(traj) => {
                    safety_flags = sim::check_safety(&traj, s, &cfg.sim_model, &cfg.safety);
                }
                Err(e) => defects.push(format!("brake schedule replay failed: {e}")),
            }
        }
    }

    let counted: Vec<&Verdict> = verdicts
        .iter()
        .filter(|v| cfg.include_unverifiable || v.status != VerdictStatus::Unverifiable)
        .collect();
    let wrong_claims = counted
        .iter()
        .filter(|v| v.status == VerdictStatus::Incorrect)
        .count() as u64;
    // Counting rule: advisory items are the answers for common-sense
    // replies, numeric claims for the other two kinds; every safety flag
    // or defect adds one wrong countable item.
    let base_total = match s.reasoning_kind {
        ReasoningKind::CommonSense => extraction.advisories.len() as u64,
        _ => counted.len() as u64,
    };
    let extra = (safety_flags.len() + defects.len()) as u64;
    let total_items = base_total + extra;
    let wrong_items = (wrong_claims + extra).min(total_items);

    GradedTranscript {
        scenario_id: t.scenario_id.clone(),
        sample_index: t.sample_index,
        reasoning_kind: s.reasoning_kind,
        weather: s.weather.name.clone(),
        verdicts,
        advisories: extraction.advisories,
        control: extraction.control,
        defects,
        safety_flags,
        total_items,
        wrong_items,
    }
}

// ---------------------------------------------------------------------------
// Annotations and aggregation
// ---------------------------------------------------------------------------

/// Human-supplied counts for one (scenario, sample), standing in for
/// manually graded ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub scenario_id: String,
    pub sample_index: u32,
    pub total_answers: u64,
    pub wrong_answers: u64,
    #[serde(default)]
    pub notes: Vec<String>,
}

/// An annotation file that failed to load or validate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationLoadError {
    pub file: String,
    pub message: String,
}

/// Load every `*.json` annotation in a directory.
pub fn load_annotations(dir: &Path) -> io::Result<(Vec<Annotation>, Vec<AnnotationLoadError>)> {
    let mut annotations = Vec::new();
    let mut errors = Vec::new();
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let file = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|data| serde_json::from_str::<Annotation>(&data).map_err(|e| e.to_string()))
        {
            Ok(a) if a.wrong_answers > a.total_answers => errors.push(AnnotationLoadError {
                file,
                message: format!(
                    "wrong_answers {} exceeds total_answers {}",
                    a.wrong_answers, a.total_answers
                ),
            }),
            Ok(a) => annotations.push(a),
            Err(message) => errors.push(AnnotationLoadError { file, message }),
        }
    }
    Ok((annotations, errors))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Machine,
    Annotated,
}

/// One (weather, reasoning) accuracy cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub weather: String,
    pub reasoning: ReasoningKind,
    pub total: u64,
    pub wrong: u64,
    /// `None` when the group has no countable items.
    pub accuracy: Option<f64>,
    pub provenance: Provenance,
}

/// Accuracy rows plus a summary of safety flags seen during grading.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GradeReport {
    pub rows: Vec<ReportRow>,
    pub flag_counts: BTreeMap<String, u64>,
}

impl GradeReport {
    pub fn row(&self, weather: &str, reasoning: ReasoningKind) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.weather == weather && r.reasoning == reasoning)
    }

    /// Mean accuracy over the defined rows of one reasoning kind.
    pub fn mean_accuracy(&self, reasoning: ReasoningKind) -> Option<f64> {
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.reasoning == reasoning)
            .filter_map(|r| r.accuracy)
            .collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    }

    /// Mean accuracy over every defined row.
    pub fn overall_mean_accuracy(&self) -> Option<f64> {
        let values: Vec<f64> = self.rows.iter().filter_map(|r| r.accuracy).collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn weather_order(name: &str) -> (usize, String) {
    let rank = match name {
        "sunny" => 0,
        "partly_sunny" => 1,
        "rainy" => 2,
        _ => 3,
    };
    (rank, name.to_string())
}

/// Aggregate machine-graded transcripts and human annotations into
/// per-(weather, reasoning) accuracy rows. Integer totals make the result
/// invariant under permutation of the inputs. Where a group has both
/// sources, the human annotation wins and the row is marked `annotated`.
pub fn aggregate(
    graded: &[GradedTranscript],
    annotations: &[Annotation],
    scenarios: &[Scenario],
) -> Result<GradeReport, GradeError> {
    let mut machine: BTreeMap<(String, ReasoningKind), (u64, u64)> = BTreeMap::new();
    let mut flag_counts: BTreeMap<String, u64> = BTreeMap::new();
    for g in graded {
        let entry = machine
            .entry((g.weather.clone(), g.reasoning_kind))
            .or_default();
        entry.0 += g.total_items;
        entry.1 += g.wrong_items;
        for f in &g.safety_flags {
            *flag_counts.entry(f.to_string()).or_default() += 1;
        }
    }

    let mut annotated: BTreeMap<(String, ReasoningKind), (u64, u64)> = BTreeMap::new();
    for a in annotations {
        let scenario = scenarios
            .iter()
            .find(|s| s.id == a.scenario_id)
            .ok_or_else(|| GradeError::UnknownScenario(a.scenario_id.clone()))?;
        let entry = annotated
            .entry((scenario.weather.name.clone(), scenario.reasoning_kind))
            .or_default();
        entry.0 += a.total_answers;
        entry.1 += a.wrong_answers;
    }

    let mut keys: Vec<(String, ReasoningKind)> =
        machine.keys().chain(annotated.keys()).cloned().collect();
    keys.sort_by_key(|(weather, reasoning)| (*reasoning, weather_order(weather)));
    keys.dedup();

    let rows = keys
        .into_iter()
        .map(|key| {
            let (source, provenance) = match annotated.get(&key) {
                Some(counts) => (*counts, Provenance::Annotated),
                None => (machine[&key], Provenance::Machine),
            };
            let (total, wrong) = source;
            ReportRow {
                weather: key.0,
                reasoning: key.1,
                total,
                wrong,
                accuracy: (total > 0).then(|| (total - wrong) as f64 / total as f64),
                provenance,
            }
        })
        .collect();

    Ok(GradeReport { rows, flag_counts })
}
