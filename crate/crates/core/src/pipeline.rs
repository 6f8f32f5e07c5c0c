//! End-to-end run orchestration: scenarios → prompts → backend samples →
//! stored transcripts → graded records → aggregated report + manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{
    self, ChatBackend, GatewayConfig, LiveBackend, MockBackend, ReplayBackend, Transcript,
};
use crate::grader::{self, GradeReport, GradedTranscript, GraderConfig};
use crate::prompt::PromptLibrary;
use crate::report;
use crate::scenario::{self, Scenario};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Prompt(#[from] crate::prompt::PromptError),
    #[error(transparent)]
    Gateway(#[from] crate::gateway::GatewayError),
    #[error(transparent)]
    Grade(#[from] crate::grader::GradeError),
    #[error("scenario file {path}: {message}")]
    ScenarioFile { path: String, message: String },
    #[error("trace {path}: {count} malformed record(s); first: {first}")]
    Trace {
        path: String,
        count: usize,
        first: String,
    },
    #[error("no scenarios to run")]
    NoScenarios,
}

/// Where scenarios come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSource {
    Builtin,
    File { path: PathBuf },
    Trace { path: PathBuf },
}

/// Which backend answers the prompts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendChoice {
    Live,
    Mock,
    Replay { dir: PathBuf },
}

/// Everything one run needs; serialized into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub source: ScenarioSource,
    pub backend: BackendChoice,
    pub seed: u64,
    pub tolerance: f64,
    pub output_dir: PathBuf,
    pub first_only: bool,
    pub dt: f64,
    pub gateway: GatewayConfig,
    pub min_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_dir: Option<PathBuf>,
}

impl RunSettings {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            source: ScenarioSource::Builtin,
            backend: BackendChoice::Mock,
            seed: 0,
            tolerance: grader::DEFAULT_TOLERANCE,
            output_dir: output_dir.into(),
            first_only: false,
            dt: 0.1,
            gateway: GatewayConfig::default(),
            min_accuracy: None,
            template_dir: None,
        }
    }

    fn grader_config(&self) -> GraderConfig {
        GraderConfig {
            tolerance: self.tolerance,
            sim_dt: self.dt,
            first_only: self.first_only,
            ..GraderConfig::default()
        }
    }
}

/// Load scenarios from the configured source, keeping only eligible ones.
/// Returns the scenarios and the ids that were skipped as ineligible.
pub fn load_scenarios(source: &ScenarioSource) -> Result<(Vec<Scenario>, Vec<String>), PipelineError> {
    let all = match source {
        ScenarioSource::Builtin => scenario::nine_builtin_scenarios(),
        ScenarioSource::File { path } => {
            let data = fs::read_to_string(path)?;
            let scenarios: Vec<Scenario> =
                serde_json::from_str(&data).map_err(|e| PipelineError::ScenarioFile {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            for s in &scenarios {
                s.validate().map_err(|e| PipelineError::ScenarioFile {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
            }
            scenarios
        }
        ScenarioSource::Trace { path } => {
            let file = fs::File::open(path)?;
            let ingest = scenario::ingest_trace(io::BufReader::new(file))?;
            if !ingest.errors.is_empty() {
                return Err(PipelineError::Trace {
                    path: path.display().to_string(),
                    count: ingest.errors.len(),
                    first: ingest.errors[0].to_string(),
                });
            }
            ingest.scenarios
        }
    };
    let (eligible, skipped): (Vec<_>, Vec<_>) = all.into_iter().partition(scenario::eligible);
    Ok((eligible, skipped.into_iter().map(|s| s.id).collect()))
}

fn make_backend(
    choice: &BackendChoice,
    gateway_cfg: &GatewayConfig,
    seed: u64,
    scenarios: &[Scenario],
) -> Result<Box<dyn ChatBackend>, PipelineError> {
    Ok(match choice {
        BackendChoice::Live => Box::new(LiveBackend::new(gateway_cfg)?),
        BackendChoice::Mock => Box::new(MockBackend::new(seed, scenarios)),
        BackendChoice::Replay { dir } => Box::new(ReplayBackend::new(dir.clone())),
    })
}

/// Run manifest: enough to reproduce the run byte-for-byte with a
/// deterministic backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub settings: RunSettings,
    pub versions: ManifestVersions,
    pub created_at: String,
    pub scenario_count: usize,
    pub skipped_ineligible: Vec<String>,
    pub transcript_count: usize,
    pub gateway_errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestVersions {
    pub core: String,
}

/// Result of a full run.
pub struct RunOutcome {
    pub report: GradeReport,
    pub graded: Vec<GradedTranscript>,
    pub transcripts: usize,
    pub gateway_errors: Vec<String>,
    pub output_dir: PathBuf,
    /// False when `min_accuracy` was set and the overall mean fell short.
    pub accuracy_ok: bool,
}

/// Execute the whole pipeline and write `transcripts/`, `graded/`,
/// `report.csv`, `report.json`, `plot.dat`, and `manifest.json` under the
/// output directory.
pub fn run(settings: &RunSettings) -> Result<RunOutcome, PipelineError> {
    settings.gateway.validate()?;
    let (scenarios, skipped) = load_scenarios(&settings.source)?;
    if scenarios.is_empty() {
        return Err(PipelineError::NoScenarios);
    }

    let library = match &settings.template_dir {
        Some(dir) => PromptLibrary::from_dir(dir)?,
        None => PromptLibrary::builtin(),
    };
    let prompts = scenarios
        .iter()
        .map(|s| library.render(s))
        .collect::<Result<Vec<_>, _>>()?;

    let backend = make_backend(&settings.backend, &settings.gateway, settings.seed, &scenarios)?;
    let sampled = gateway::run_all(&prompts, &settings.gateway, backend.as_ref(), None);

    let transcripts_dir = settings.output_dir.join("transcripts");
    let graded_dir = settings.output_dir.join("graded");
    fs::create_dir_all(&transcripts_dir)?;
    fs::create_dir_all(&graded_dir)?;

    let grader_cfg = settings.grader_config();
    let mut graded = Vec::new();
    let mut transcript_count = 0;
    let mut gateway_errors = Vec::new();
    for samples in &sampled {
        let scenario = scenarios
            .iter()
            .find(|s| s.id == samples.scenario_id)
            .expect("sampled scenario exists");
        for t in &samples.transcripts {
            gateway::store_transcript(t, &transcripts_dir)?;
            transcript_count += 1;
            let g = grader::grade_transcript(t, scenario, &grader_cfg);
            let path = graded_dir.join(format!("{}_{}.json", g.scenario_id, g.sample_index));
            fs::write(&path, serde_json::to_string_pretty(&g)?)?;
            graded.push(g);
        }
        gateway_errors.extend(samples.errors.iter().map(|e| e.to_string()));
    }

    let report = grader::aggregate(&graded, &[], &scenarios)?;
    report::emit_report(&report, &settings.output_dir)?;

    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        settings: settings.clone(),
        versions: ManifestVersions {
            core: env!("CARGO_PKG_VERSION").to_string(),
        },
        created_at: chrono::Utc::now().to_rfc3339(),
        scenario_count: scenarios.len(),
        skipped_ineligible: skipped,
        transcript_count,
        gateway_errors: gateway_errors.clone(),
    };
    write_manifest(&manifest, &settings.output_dir)?;

    let accuracy_ok = match settings.min_accuracy {
        Some(min) => report
            .overall_mean_accuracy()
            .map(|a| a >= min)
            .unwrap_or(false),
        None => true,
    };

    Ok(RunOutcome {
        report,
        graded,
        transcripts: transcript_count,
        gateway_errors,
        output_dir: settings.output_dir.clone(),
        accuracy_ok,
    })
}

/// Grade a directory of stored transcripts against a scenario set and
/// write graded records plus the report into the output directory.
pub fn grade_stored(
    transcripts_dir: &Path,
    source: &ScenarioSource,
    settings: &RunSettings,
) -> Result<(RunOutcome, Vec<gateway::TranscriptLoadError>), PipelineError> {
    let (scenarios, _) = load_scenarios(source)?;
    let (transcripts, load_errors) = gateway::load_transcripts(transcripts_dir)?;

    let graded_dir = settings.output_dir.join("graded");
    fs::create_dir_all(&graded_dir)?;

    let grader_cfg = settings.grader_config();
    let mut graded = Vec::new();
    let mut skipped: Vec<String> = Vec::new();
    for t in &transcripts {
        let Some(scenario) = scenarios.iter().find(|s| s.id == t.scenario_id) else {
            skipped.push(format!("{}: no matching scenario", t.scenario_id));
            continue;
        };
        let g = grader::grade_transcript(t, scenario, &grader_cfg);
        let path = graded_dir.join(format!("{}_{}.json", g.scenario_id, g.sample_index));
        fs::write(&path, serde_json::to_string_pretty(&g)?)?;
        graded.push(g);
    }

    let report = grader::aggregate(&graded, &[], &scenarios)?;
    report::emit_report(&report, &settings.output_dir)?;

    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        settings: settings.clone(),
        versions: ManifestVersions {
            core: env!("CARGO_PKG_VERSION").to_string(),
        },
        created_at: chrono::Utc::now().to_rfc3339(),
        scenario_count: scenarios.len(),
        skipped_ineligible: skipped,
        transcript_count: transcripts.len(),
        gateway_errors: load_errors.iter().map(|e| format!("{}: {}", e.file, e.message)).collect(),
    };
    write_manifest(&manifest, &settings.output_dir)?;

    let accuracy_ok = match settings.min_accuracy {
        Some(min) => report
            .overall_mean_accuracy()
            .map(|a| a >= min)
            .unwrap_or(false),
        None => true,
    };

    Ok((
        RunOutcome {
            report,
            graded,
            transcripts: transcripts.len(),
            gateway_errors: vec![],
            output_dir: settings.output_dir.clone(),
            accuracy_ok,
        },
        load_errors,
    ))
}

fn write_manifest(manifest: &Manifest, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(manifest)?,
    )
}

/// Transcripts recorded by [`run`], reloaded from its output directory.
pub fn load_run_transcripts(output_dir: &Path) -> io::Result<Vec<Transcript>> {
    let (transcripts, _) = gateway::load_transcripts(&output_dir.join("transcripts"))?;
    Ok(transcripts)
}
