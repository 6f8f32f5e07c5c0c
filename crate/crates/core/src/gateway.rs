//! Chat-completion gateway.
//!
//! Sends rendered prompts to an OpenAI-compatible `/chat/completions`
//! endpoint, or to the deterministic mock/replay backends, samples N
//! replies per scenario, and persists transcripts as one JSON file per
//! sample. The API key is read from a named environment variable at
//! request time and never stored, so it cannot leak into transcripts,
//! reports, or manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::RenderedPrompt;
use crate::scenario::{ReasoningKind, Scenario};

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

/// Fixed system message for the live backend. The source experiment does
/// not document one, so this is a harness assumption (see README).
pub const SYSTEM_MESSAGE: &str =
    "You are an assistant helping an autonomous vehicle make safe driving decisions.";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid gateway config: {0}")]
    InvalidConfig(String),
    #[error("scenario {scenario_id}: API key env var {var} is not set")]
    MissingApiKey { scenario_id: String, var: String },
    #[error("scenario {scenario_id}: authentication rejected (HTTP {status})")]
    Auth { scenario_id: String, status: u16 },
    #[error("scenario {scenario_id}: timed out after {attempts} attempt(s)")]
    Timeout {
        scenario_id: String,
        attempts: u32,
    },
    #[error("scenario {scenario_id}: HTTP {status} after {attempts} attempt(s)")]
    Http {
        scenario_id: String,
        status: u16,
        attempts: u32,
    },
    #[error("scenario {scenario_id}: transport error after {attempts} attempt(s): {detail}")]
    Transport {
        scenario_id: String,
        attempts: u32,
        detail: String,
    },
    #[error("scenario {scenario_id}: malformed endpoint response: {detail}")]
    MalformedResponse {
        scenario_id: String,
        detail: String,
    },
    #[error("scenario {scenario_id}: no stored transcript for sample {sample_index} in {dir}")]
    ReplayMiss {
        scenario_id: String,
        sample_index: u32,
        dir: String,
    },
    #[error("no samples to select from")]
    EmptySamples,
}

/// Connection and sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayConfig {
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key. Only the
    /// name is ever persisted.
    pub api_key_env_var: String,
    pub temperature: f64,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub samples_per_scenario: u32,
    pub parallelism_limit: usize,
    /// First backoff delay; doubles per retry.
    pub backoff_base_ms: u64,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model_name: "gpt-4".into(),
            api_key_env_var: "OPENAI_API_KEY".into(),
            temperature: 1.0,
            timeout_secs: 60.0,
            max_retries: 3,
            samples_per_scenario: 5,
            parallelism_limit: 2,
            backoff_base_ms: 500,
        }
    }
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.samples_per_scenario < 1 {
            return Err(GatewayError::InvalidConfig(
                "samples_per_scenario must be at least 1".into(),
            ));
        }
        if !(self.timeout_secs > 0.0) {
            return Err(GatewayError::InvalidConfig(
                "timeout_secs must be positive".into(),
            ));
        }
        if self.parallelism_limit < 1 {
            return Err(GatewayError::InvalidConfig(
                "parallelism_limit must be at least 1".into(),
            ));
        }
        if !(self.temperature >= 0.0) {
            return Err(GatewayError::InvalidConfig(
                "temperature must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Mock,
    Replay,
}

/// One persisted (prompt, response) exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema_version: u32,
    pub scenario_id: String,
    pub sample_index: u32,
    pub prompt_text: String,
    pub response_text: String,
    pub model_name: String,
    pub created_at: String,
    pub latency_ms: u64,
    pub backend: BackendKind,
    #[serde(default)]
    pub retries: u32,
    /// Set when the exchange failed; `response_text` may be empty only
    /// together with this marker.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A backend that can answer one prompt.
pub trait ChatBackend: Send + Sync {
    fn kind(&self) -> BackendKind;

    /// Returns the reply text and how many retries it took.
    fn complete_text(
        &self,
        scenario_id: &str,
        sample_index: u32,
        prompt: &str,
        cfg: &GatewayConfig,
    ) -> Result<(String, u32), GatewayError>;
}

/// Send one prompt and wrap the reply in a transcript with timing.
pub fn complete(
    prompt: &RenderedPrompt,
    sample_index: u32,
    cfg: &GatewayConfig,
    backend: &dyn ChatBackend,
) -> Result<Transcript, GatewayError> {
    cfg.validate()?;
    let start = Instant::now();
    let (response_text, retries) =
        backend.complete_text(&prompt.scenario_id, sample_index, &prompt.text, cfg)?;
    Ok(Transcript {
        schema_version: TRANSCRIPT_SCHEMA_VERSION,
        scenario_id: prompt.scenario_id.clone(),
        sample_index,
        prompt_text: prompt.text.clone(),
        response_text,
        model_name: cfg.model_name.clone(),
        created_at: chrono::Utc::now().to_rfc3339(),
        latency_ms: start.elapsed().as_millis() as u64,
        backend: backend.kind(),
        retries,
        error: None,
    })
}

/// Collect `samples_per_scenario` transcripts for one prompt, in index
/// order. Failures are returned alongside whatever samples succeeded.
pub fn sample_n(
    prompt: &RenderedPrompt,
    cfg: &GatewayConfig,
    backend: &dyn ChatBackend,
) -> (Vec<Transcript>, Vec<GatewayError>) {
    let mut transcripts = Vec::new();
    let mut errors = Vec::new();
    for index in 0..cfg.samples_per_scenario {
        match complete(prompt, index, cfg, backend) {
            Ok(t) => transcripts.push(t),
            Err(e) => errors.push(e),
        }
    }
    (transcripts, errors)
}

/// The sample handed to vehicle control: always index 0.
pub fn first_answer(samples: &[Transcript]) -> Result<&Transcript, GatewayError> {
    samples
        .iter()
        .find(|t| t.sample_index == 0)
        .or_else(|| samples.first())
        .ok_or(GatewayError::EmptySamples)
}

/// The sample chosen for reporting: a seeded random pick so the choice is
/// reproducible across runs.
pub fn reporting_sample<'a>(
    samples: &'a [Transcript],
    run_seed: u64,
) -> Result<&'a Transcript, GatewayError> {
    if samples.is_empty() {
        return Err(GatewayError::EmptySamples);
    }
    let mut seed = run_seed;
    if let Some(first) = samples.first() {
        for b in first.scenario_id.bytes() {
            seed = seed.wrapping_mul(31).wrapping_add(b as u64);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = rng.random_range(0..samples.len());
    Ok(&samples[pick])
}

// ---------------------------------------------------------------------------
// Live backend
// ---------------------------------------------------------------------------

/// OpenAI-compatible chat-completions client with exponential backoff on
/// transient failures (HTTP 5xx, 429, timeouts, transport errors).
pub struct LiveBackend {
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    pub fn new(cfg: &GatewayConfig) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| GatewayError::InvalidConfig(e.to_string()))?;
        Ok(Self { client })
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 2],
    temperature: f64,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: Option<String>,
}

impl ChatBackend for LiveBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }

    fn complete_text(
        &self,
        scenario_id: &str,
        _sample_index: u32,
        prompt: &str,
        cfg: &GatewayConfig,
    ) -> Result<(String, u32), GatewayError> {
        let api_key =
            std::env::var(&cfg.api_key_env_var).map_err(|_| GatewayError::MissingApiKey {
                scenario_id: scenario_id.to_string(),
                var: cfg.api_key_env_var.clone(),
            })?;
        let url = format!("{}/chat/completions", cfg.base_url.trim_end_matches('/'));
        let body = ChatRequest {
            model: &cfg.model_name,
            messages: [
                ChatMessage {
                    role: "system",
                    content: SYSTEM_MESSAGE,
                },
                ChatMessage {
                    role: "user",
                    content: prompt,
                },
            ],
            temperature: cfg.temperature,
        };

        let mut attempts = 0u32;
        loop {
            attempts += 1;
            let result = self
                .client
                .post(&url)
                .bearer_auth(&api_key)
                .json(&body)
                .send();
            let retry_after = |attempt: u32| {
                Duration::from_millis(cfg.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(16)))
            };
            match result {
                Ok(resp) => {
                    let status = resp.status();
                    if status.as_u16() == 401 || status.as_u16() == 403 {
                        return Err(GatewayError::Auth {
                            scenario_id: scenario_id.to_string(),
                            status: status.as_u16(),
                        });
                    }
                    if status.is_server_error() || status.as_u16() == 429 {
                        if attempts <= cfg.max_retries {
                            std::thread::sleep(retry_after(attempts));
                            continue;
                        }
                        return Err(GatewayError::Http {
                            scenario_id: scenario_id.to_string(),
                            status: status.as_u16(),
                            attempts,
                        });
                    }
                    if !status.is_success() {
                        return Err(GatewayError::Http {
                            scenario_id: scenario_id.to_string(),
                            status: status.as_u16(),
                            attempts,
                        });
                    }
                    let parsed: ChatResponse =
                        resp.json().map_err(|e| GatewayError::MalformedResponse {
                            scenario_id: scenario_id.to_string(),
                            detail: e.to_string(),
                        })?;
                    let content = parsed
                        .choices
                        .first()
                        .and_then(|c| c.message.content.clone())
                        .ok_or_else(|| GatewayError::MalformedResponse {
                            scenario_id: scenario_id.to_string(),
                            detail: "no choices[0].message.content".into(),
                        })?;
                    return Ok((content, attempts - 1));
                }
                Err(e) if e.is_timeout() => {
                    if attempts <= cfg.max_retries {
                        std::thread::sleep(retry_after(attempts));
                        continue;
                    }
                    return Err(GatewayError::Timeout {
                        scenario_id: scenario_id.to_string(),
                        attempts,
                    });
                }
                Err(e) => {
                    if attempts <= cfg.max_retries {
                        std::thread::sleep(retry_after(attempts));
                        continue;
                    }
                    return Err(GatewayError::Transport {
                        scenario_id: scenario_id.to_string(),
                        attempts,
                        detail: e.to_string(),
                    });
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

/// Deterministic offline backend. Sample 0 of the three recorded rainy
/// scenarios returns the shipped reply fixtures verbatim; everything else
/// is synthesized from the scenario values, seeded by
/// `(seed, scenario_id, sample_index)` so whole runs replay bit-identically.
pub struct MockBackend {
    seed: u64,
    scenarios: BTreeMap<String, Scenario>,
}

impl MockBackend {
    pub fn new(seed: u64, scenarios: &[Scenario]) -> Self {
        Self {
            seed,
            scenarios: scenarios
                .iter()
                .map(|s| (s.id.clone(), s.clone()))
                .collect(),
        }
    }

    fn rng_for(&self, scenario_id: &str, sample_index: u32) -> ChaCha8Rng {
        let mut seed = self.seed ^ 0xD1F2_4A5B_3C6E_7890;
        for b in scenario_id.bytes() {
            seed = seed.wrapping_mul(131).wrapping_add(b as u64);
        }
        seed = seed.wrapping_add(sample_index as u64);
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn synthesize(&self, scenario: &Scenario, sample_index: u32) -> String {
        let mut rng = self.rng_for(&scenario.id, sample_index);
        match scenario.reasoning_kind {
            ReasoningKind::CommonSense => synth_common_sense(scenario, &mut rng),
            ReasoningKind::Arithmetic => synth_arithmetic(scenario, &mut rng),
            ReasoningKind::Hybrid => synth_hybrid(scenario, &mut rng),
        }
    }
}

impl ChatBackend for MockBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Mock
    }

    fn complete_text(
        &self,
        scenario_id: &str,
        sample_index: u32,
        _prompt: &str,
        _cfg: &GatewayConfig,
    ) -> Result<(String, u32), GatewayError> {
        if sample_index == 0 {
            if let Some(text) = crate::fixtures::paper_answer_for(scenario_id) {
                return Ok((text.to_string(), 0));
            }
        }
        let scenario = self.scenarios.get(scenario_id).cloned().unwrap_or_else(|| {
            // Unknown id: fall back to a plain advisory reply.
            crate::scenario::nine_builtin_scenarios()
                .into_iter()
                .next()
                .expect("builtin scenarios")
        });
        Ok((self.synthesize(&scenario, sample_index), 0))
    }
}

/// Truncated conversion factor, as the replies being imitated use it.
const REPLY_KMH_TO_MS: f64 = 0.277778;

fn synth_common_sense(s: &Scenario, rng: &mut ChaCha8Rng) -> String {
    let object = s
        .primary_detection()
        .map(|d| d.object_class.to_string())
        .unwrap_or_else(|| "object".into());
    let distance = s.primary_detection().map(|d| d.distance_m).unwrap_or(0.0);
    let confidence = s
        .primary_detection()
        .map(|d| d.confidence_pct)
        .unwrap_or(0.0);
    let extra = [
        "7. **Check Mirrors**: Glance at your mirrors regularly so you know what is around you.\n\n",
        "7. **Plan Ahead**: Look well down the road so you can react early instead of abruptly.\n\n",
    ];
    let pick = rng.random_range(0..extra.len());
    format!(
        "1. **Reduce Speed**: You are travelling at {speed} kilometers per hour and the posted \
         limit is {limit} km/h, so ease off until you are at or below the limit.\n\n\
         2. **Maintain Safe Distance**: The {object} ahead is approximately {distance} meters away. \
         Leave more room than usual in these conditions.\n\n\
         3. **Stay Alert**: The {object} was detected with a confidence score of {confidence}, \
         but keep watching it yourself.\n\n\
         4. **Use Your Lights**: Make yourself visible to other road users.\n\n\
         5. **Avoid Sudden Movements**: Smooth steering and braking keep the car stable.\n\n\
         6. **Be Prepared to Stop**: Keep your foot near the brake pedal.\n\n\
         {extra}8. **Stay in Your Lane**: Only change lanes when it is clearly safe.",
        speed = s.ego.speed_kmh,
        limit = s.speed_limit_kmh,
        extra = extra[pick],
    )
}

fn synth_arithmetic(s: &Scenario, rng: &mut ChaCha8Rng) -> String {
    let v0 = s.ego.speed_kmh * REPLY_KMH_TO_MS;
    let v_limit = s.speed_limit_kmh * REPLY_KMH_TO_MS;
    // Occasionally reproduce a per-second arithmetic slip, like the
    // recorded replies do.
    let slip = rng.random_range(0..10) < 3;
    let v1 = v0 - 1.0;
    let v2 = if slip { (v0 - 2.0) * 0.775 } else { v0 - 2.0 };
    format!(
        "First, let's convert the speeds to consistent units.\n\n\
         1 km/h = 0.277778 m/s\n\n\
         So, {limit} km/h = {limit} x 0.277778 = {v_limit:.4} m/s\n\n\
         You are currently driving at {speed} km/h, which is {speed} x 0.277778 = {v0:.4} m/s\n\n\
         Let's assume a moderate deceleration rate of 1 m/s^2.\n\n\
         v = u - a * t\n\n\
         Here are the speeds for the first few seconds:\n\n\
         At t = 1, v = {v1:.4} m/s\n\
         At t = 2, v = {v2:.4} m/s\n\n\
         Keep decelerating until you reach {v_limit:.4} m/s.",
        limit = s.speed_limit_kmh,
        speed = s.ego.speed_kmh,
    )
}

fn synth_hybrid(s: &Scenario, rng: &mut ChaCha8Rng) -> String {
    let v0_ms = s.ego.speed_kmh * REPLY_KMH_TO_MS;
    let v_limit_ms = s.speed_limit_kmh * REPLY_KMH_TO_MS;
    let horizon_s = 5.0;
    let decel = ((v0_ms - v_limit_ms) / horizon_s).max(0.0);
    let brake = format!("{:.4}", decel.clamp(0.0, 1.0));
    // Some samples repeat the recorded unit-mixing slip: subtracting the
    // m/s decrement directly from a km/h speed.
    let mixed_units = rng.random_range(0..10) < 3;
    let per_second: Vec<String> = (1..=3)
        .map(|k| {
            let v = if mixed_units {
                s.ego.speed_kmh - decel * k as f64
            } else {
                s.ego.speed_kmh - decel * 3.6 * k as f64
            };
            format!("v_{k} = {:.4} km/h", v)
        })
        .collect();
    let speed_list: Vec<String> = (1..=4)
        .map(|k| {
            let v = if mixed_units {
                s.ego.speed_kmh - decel * k as f64
            } else {
                s.ego.speed_kmh - decel * 3.6 * k as f64
            };
            format!("{v:.4}")
        })
        .collect();
    format!(
        "Slow down to the speed limit of {limit} km/h.\n\n\
         a = (v_f - v_i) / t\n\n\
         a = (({limit} x 0.277778 m/s) - ({speed} x 0.277778 m/s)) / t\n\n\
         a = -{delta:.4} m/s / {horizon} s = -{decel_mag:.4} m/s^2\n\n\
         This means you need to decelerate at a rate of a = {decel_mag:.4} m/s^2 to reach the \
         speed limit in {horizon} seconds.\n\n\
         {per_second}\n\n\
         The SPEED_LIST would be [{speeds}, ...].\n\n\
         Assuming that a brake value of 1 results in a deceleration of a = 1 m/s^2, you would \
         need to apply a brake value of {brake} for each of the {horizon} seconds.\n\n\
         So the BRAKE_LIST would be [{brakes}]",
        limit = s.speed_limit_kmh,
        speed = s.ego.speed_kmh,
        horizon = horizon_s,
        delta = v0_ms - v_limit_ms,
        decel_mag = decel,
        per_second = per_second.join("\n"),
        speeds = speed_list.join(", "),
        brakes = vec![brake.clone(); 5].join(", "),
    )
}

// ---------------------------------------------------------------------------
// Replay backend
// ---------------------------------------------------------------------------

/// Serves responses from a directory of stored transcripts.
pub struct ReplayBackend {
    dir: PathBuf,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl ChatBackend for ReplayBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn complete_text(
        &self,
        scenario_id: &str,
        sample_index: u32,
        _prompt: &str,
        _cfg: &GatewayConfig,
    ) -> Result<(String, u32), GatewayError> {
        let path = transcript_path(&self.dir, scenario_id, sample_index);
        let data = fs::read_to_string(&path).map_err(|_| GatewayError::ReplayMiss {
            scenario_id: scenario_id.to_string(),
            sample_index,
            dir: self.dir.display().to_string(),
        })?;
        let t: Transcript =
            serde_json::from_str(&data).map_err(|e| GatewayError::MalformedResponse {
                scenario_id: scenario_id.to_string(),
                detail: format!("{}: {e}", path.display()),
            })?;
        Ok((t.response_text, 0))
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

pub fn transcript_path(dir: &Path, scenario_id: &str, sample_index: u32) -> PathBuf {
    dir.join(format!("{scenario_id}_{sample_index}.json"))
}

/// Write one transcript as `{scenario_id}_{sample_index}.json`.
pub fn store_transcript(t: &Transcript, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = transcript_path(dir, &t.scenario_id, t.sample_index);
    let json = serde_json::to_string_pretty(t)?;
    fs::write(&path, json)?;
    Ok(path)
}

/// A transcript file that failed to load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptLoadError {
    pub file: String,
    pub message: String,
}

/// Load every `*.json` transcript in a directory, in filename order.
/// Corrupt or schema-incompatible files are reported per-file rather than
/// failing the whole load.
pub fn load_transcripts(dir: &Path) -> io::Result<(Vec<Transcript>, Vec<TranscriptLoadError>)> {
    let mut transcripts = Vec::new();
    let mut errors = Vec::new();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let push_err = |errors: &mut Vec<TranscriptLoadError>, message: String| {
            errors.push(TranscriptLoadError {
                file: name.clone(),
                message,
            })
        };
        match fs::read_to_string(&path) {
            Ok(data) => match serde_json::from_str::<Transcript>(&data) {
                Ok(t) => {
                    if t.schema_version != TRANSCRIPT_SCHEMA_VERSION {
                        push_err(
                            &mut errors,
                            format!(
                                "schema version {} unsupported (expected {})",
                                t.schema_version, TRANSCRIPT_SCHEMA_VERSION
                            ),
                        );
                    } else {
                        transcripts.push(t);
                    }
                }
                Err(e) => push_err(&mut errors, e.to_string()),
            },
            Err(e) => push_err(&mut errors, e.to_string()),
        }
    }
    Ok((transcripts, errors))
}

// ---------------------------------------------------------------------------
// Bounded-parallelism runner
// ---------------------------------------------------------------------------

/// Observes how many requests are in flight; tests inject one to check the
/// parallelism bound.
#[derive(Clone, Default)]
pub struct InflightProbe {
    current: Arc<AtomicUsize>,
    peak: Arc<AtomicUsize>,
}

impl InflightProbe {
    pub fn new() -> Self {
        Self::default()
    }

    fn enter(&self) {
        let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
    }

    fn exit(&self) {
        self.current.fetch_sub(1, Ordering::SeqCst);
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

/// Per-scenario sampling outcome from a parallel run.
pub struct ScenarioSamples {
    pub scenario_id: String,
    pub transcripts: Vec<Transcript>,
    pub errors: Vec<GatewayError>,
}

/// Sample every prompt. Distinct scenarios run concurrently on up to
/// `parallelism_limit` workers; samples within one scenario stay in index
/// order. Results come back in the input prompt order.
pub fn run_all(
    prompts: &[RenderedPrompt],
    cfg: &GatewayConfig,
    backend: &dyn ChatBackend,
    probe: Option<&InflightProbe>,
) -> Vec<ScenarioSamples> {
    let workers = cfg.parallelism_limit.min(prompts.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<ScenarioSamples>>> =
        Mutex::new((0..prompts.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= prompts.len() {
                    break;
                }
                let prompt = &prompts[i];
                let mut transcripts = Vec::new();
                let mut errors = Vec::new();
                for index in 0..cfg.samples_per_scenario {
                    if let Some(p) = probe {
                        p.enter();
                    }
                    let result = complete(prompt, index, cfg, backend);
                    if let Some(p) = probe {
                        p.exit();
                    }
                    match result {
                        Ok(t) => transcripts.push(t),
                        Err(e) => errors.push(e),
                    }
                }
                results.lock().unwrap()[i] = Some(ScenarioSamples {
                    scenario_id: prompt.scenario_id.clone(),
                    transcripts,
                    errors,
                });
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("all prompts processed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::PromptLibrary;
    use crate::scenario::nine_builtin_scenarios;

    fn mock_setup() -> (Vec<RenderedPrompt>, GatewayConfig, MockBackend) {
        let scenarios = nine_builtin_scenarios();
        let lib = PromptLibrary::builtin();
        let prompts: Vec<_> = scenarios.iter().map(|s| lib.render(s).unwrap()).collect();
        let cfg = GatewayConfig::default();
        let backend = MockBackend::new(7, &scenarios);
        (prompts, cfg, backend)
    }

    #[test]
    fn mock_returns_recorded_fixture_for_sample_zero() {
        let (prompts, cfg, backend) = mock_setup();
        let hybrid = prompts
            .iter()
            .find(|p| p.scenario_id == "hybrid-rainy")
            .unwrap();
        let t = complete(hybrid, 0, &cfg, &backend).unwrap();
        assert_eq!(t.response_text, crate::fixtures::HYBRID_RAINY_ANSWER);
        assert_eq!(t.backend, BackendKind::Mock);
    }

    #[test]
    fn sample_n_returns_indexed_samples() {
        let (prompts, cfg, backend) = mock_setup();
        let (transcripts, errors) = sample_n(&prompts[0], &cfg, &backend);
        assert!(errors.is_empty());
        assert_eq!(transcripts.len(), 5);
        for (i, t) in transcripts.iter().enumerate() {
            assert_eq!(t.sample_index, i as u32);
        }
    }

    #[test]
    fn single_sample_config() {
        let (prompts, mut cfg, backend) = mock_setup();
        cfg.samples_per_scenario = 1;
        let (transcripts, _) = sample_n(&prompts[0], &cfg, &backend);
        assert_eq!(transcripts.len(), 1);
    }

    #[test]
    fn first_answer_policy() {
        let (prompts, cfg, backend) = mock_setup();
        let (transcripts, _) = sample_n(&prompts[0], &cfg, &backend);
        assert_eq!(first_answer(&transcripts).unwrap().sample_index, 0);
        assert!(matches!(first_answer(&[]), Err(GatewayError::EmptySamples)));
        let single = vec![transcripts[2].clone()];
        assert_eq!(first_answer(&single).unwrap().sample_index, 2);
    }

    #[test]
    fn reporting_sample_is_seed_stable() {
        let (prompts, cfg, backend) = mock_setup();
        let (transcripts, _) = sample_n(&prompts[3], &cfg, &backend);
        let a = reporting_sample(&transcripts, 42).unwrap().sample_index;
        let b = reporting_sample(&transcripts, 42).unwrap().sample_index;
        assert_eq!(a, b);
    }

    #[test]
    fn mock_is_deterministic_per_seed() {
        let scenarios = nine_builtin_scenarios();
        let a = MockBackend::new(9, &scenarios);
        let b = MockBackend::new(9, &scenarios);
        let ta = a.complete_text("hybrid-sunny", 3, "", &GatewayConfig::default());
        let tb = b.complete_text("hybrid-sunny", 3, "", &GatewayConfig::default());
        assert_eq!(ta.unwrap().0, tb.unwrap().0);
    }

    #[test]
    fn mock_replies_parse() {
        let scenarios = nine_builtin_scenarios();
        let backend = MockBackend::new(11, &scenarios);
        for s in &scenarios {
            for i in 0..5 {
                let (text, _) = backend
                    .complete_text(&s.id, i, "", &GatewayConfig::default())
                    .unwrap();
                let extraction = crate::parser::extract_all(&text);
                assert!(extraction.control_error.is_none(), "{}: {text}", s.id);
                match s.reasoning_kind {
                    ReasoningKind::CommonSense => {
                        assert!(extraction.advisories.len() >= 6, "{}", s.id)
                    }
                    ReasoningKind::Arithmetic => {
                        assert!(!extraction.claims.is_empty(), "{}", s.id)
                    }
                    ReasoningKind::Hybrid => {
                        let control = extraction.control.expect("hybrid control lists");
                        assert_eq!(control.brake_entries.len(), 5, "{}", s.id);
                    }
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = GatewayConfig::default();
        cfg.samples_per_scenario = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = GatewayConfig::default();
        cfg.timeout_secs = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = GatewayConfig::default();
        cfg.parallelism_limit = 0;
        assert!(cfg.validate().is_err());
    }
}
