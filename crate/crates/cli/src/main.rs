//! drivecheck: scenario management, prompt rendering, live/mock/replay
//! runs, offline grading, closed-loop simulation, and report emission.
//!
//! Exit codes: 0 success, 1 when `--min-accuracy` is set and the run falls
//! short, 2 on operational errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use drivecheck_core::gateway::GatewayConfig;
use drivecheck_core::grader;
use drivecheck_core::pipeline::{self, BackendChoice, RunSettings, ScenarioSource};
use drivecheck_core::prompt::PromptLibrary;
use drivecheck_core::report;
use drivecheck_core::scenario::{self, Scenario};
use drivecheck_core::sim::{self, SimModel};

#[derive(Parser)]
#[command(name = "drivecheck", version, about = "Grade LLM driving advice against a kinematics oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect and export scenarios
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Render prompts
    Prompt {
        #[command(subcommand)]
        command: PromptCommand,
    },
    /// Run the full pipeline: prompts, sampling, grading, report
    Run(RunArgs),
    /// Grade a directory of stored transcripts
    Grade(GradeArgs),
    /// Re-run the pipeline from stored transcripts
    Replay(ReplayArgs),
    /// Replay a brake schedule through the vehicle simulator
    Simulate(SimulateArgs),
    /// Emit a report from annotations or graded records
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// List scenario ids with their key fields
    List {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Print one scenario as JSON
    Show {
        #[command(flatten)]
        source: SourceArgs,
        /// Scenario id
        #[arg(long)]
        id: String,
    },
    /// Write scenarios to a file (JSON document or JSONL trace)
    Export {
        #[command(flatten)]
        source: SourceArgs,
        /// Only this scenario id
        #[arg(long)]
        id: Option<String>,
        /// Output file
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Output format: json or trace
        #[arg(long, default_value = "json")]
        format: String,
    },
}

#[derive(Subcommand)]
enum PromptCommand {
    /// Render the prompt for one scenario
    Render {
        #[command(flatten)]
        source: SourceArgs,
        /// Scenario id
        #[arg(long)]
        scenario: String,
        /// Directory with prompt template overrides
        #[arg(long, value_name = "DIR")]
        template_dir: Option<PathBuf>,
        /// Write to a file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// Scenario source selection; at most one may be given.
#[derive(Args, Default, Clone)]
struct SourceArgs {
    /// Use the nine built-in scenarios
    #[arg(long)]
    builtin: bool,
    /// Load scenarios from a JSON file
    #[arg(long, value_name = "FILE")]
    scenarios: Option<PathBuf>,
    /// Load scenarios from a JSONL trace
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

impl SourceArgs {
    fn resolve(&self) -> Result<ScenarioSource> {
        // `--scenarios builtin` is accepted as a spelling of `--builtin`.
        let scenarios_builtin = self
            .scenarios
            .as_deref()
            .is_some_and(|p| p == Path::new("builtin"));
        let chosen = [
            self.builtin,
            self.scenarios.is_some(),
            self.trace.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if chosen > 1 && !(chosen == 2 && self.builtin && scenarios_builtin) {
            bail!("choose exactly one scenario source: --builtin, --scenarios, or --trace");
        }
        Ok(if scenarios_builtin {
            ScenarioSource::Builtin
        } else if let Some(path) = &self.scenarios {
            ScenarioSource::File { path: path.clone() }
        } else if let Some(path) = &self.trace {
            ScenarioSource::Trace { path: path.clone() }
        } else {
            ScenarioSource::Builtin
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Use the deterministic offline backend
    #[arg(long)]
    mock: bool,
    /// Use the live chat-completions endpoint
    #[arg(long)]
    live: bool,
    /// Serve responses from a directory of stored transcripts
    #[arg(long, value_name = "DIR")]
    replay: Option<PathBuf>,
    /// Run seed (required for the mock backend)
    #[arg(long)]
    seed: Option<u64>,
    /// Relative grading tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Samples per scenario
    #[arg(long)]
    samples: Option<u32>,
    /// Replay only the first brake entry in closed-loop checks
    #[arg(long)]
    first_only: bool,
    /// Simulator time step in seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Exit 1 if overall mean accuracy falls below this value
    #[arg(long)]
    min_accuracy: Option<f64>,
    /// Directory with prompt template overrides
    #[arg(long, value_name = "DIR")]
    template_dir: Option<PathBuf>,
    /// Chat-completions base URL
    #[arg(long)]
    base_url: Option<String>,
    /// Model name sent to the endpoint
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key
    #[arg(long)]
    api_key_env: Option<String>,
    /// Sampling temperature
    #[arg(long)]
    temperature: Option<f64>,
    /// Per-request timeout in seconds
    #[arg(long)]
    timeout_secs: Option<f64>,
    /// Retries on transient failures
    #[arg(long)]
    max_retries: Option<u32>,
    /// Concurrent scenario limit
    #[arg(long)]
    parallelism: Option<usize>,
    /// TOML config file; flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GradeArgs {
    /// Directory of stored transcripts
    #[arg(long, value_name = "DIR")]
    transcripts: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// Relative grading tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Replay only the first brake entry in closed-loop checks
    #[arg(long)]
    first_only: bool,
    /// Simulator time step in seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Exit 1 if overall mean accuracy falls below this value
    #[arg(long)]
    min_accuracy: Option<f64>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Directory of stored transcripts to replay as the backend
    #[arg(long, value_name = "DIR")]
    transcripts: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// Run seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative grading tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Samples per scenario
    #[arg(long)]
    samples: Option<u32>,
    /// Replay only the first brake entry in closed-loop checks
    #[arg(long)]
    first_only: bool,
    /// Simulator time step in seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Exit 1 if overall mean accuracy falls below this value
    #[arg(long)]
    min_accuracy: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Scenario id
    #[arg(long)]
    scenario: String,
    /// Comma-separated per-second brake values, e.g. "0.2889,0.2889"
    #[arg(long)]
    brake: String,
    /// Simulator time step in seconds
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Apply only the first brake entry
    #[arg(long)]
    first_only: bool,
    /// Full-brake deceleration of the vehicle model (m/s^2)
    #[arg(long, default_value_t = 1.0)]
    max_decel: f64,
    /// Write the trajectory as CSV
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory of annotation JSON files
    #[arg(long, value_name = "DIR")]
    annotations: Option<PathBuf>,
    /// Directory of graded-transcript JSON files
    #[arg(long, value_name = "DIR")]
    graded: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

/// Keys mirror the `run` flags one-to-one; flags win on conflict.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    builtin: Option<bool>,
    scenarios: Option<PathBuf>,
    trace: Option<PathBuf>,
    mock: Option<bool>,
    live: Option<bool>,
    replay: Option<PathBuf>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
    samples: Option<u32>,
    first_only: Option<bool>,
    dt: Option<f64>,
    min_accuracy: Option<f64>,
    template_dir: Option<PathBuf>,
    base_url: Option<String>,
    model: Option<String>,
    api_key_env: Option<String>,
    temperature: Option<f64>,
    timeout_secs: Option<f64>,
    max_retries: Option<u32>,
    parallelism: Option<usize>,
}

#[cfg(test)]
impl FileConfig {
    const KEYS: [&'static str; 21] = [
        "builtin",
        "scenarios",
        "trace",
        "mock",
        "live",
        "replay",
        "seed",
        "tolerance",
        "out",
        "samples",
        "first_only",
        "dt",
        "min_accuracy",
        "template_dir",
        "base_url",
        "model",
        "api_key_env",
        "temperature",
        "timeout_secs",
        "max_retries",
        "parallelism",
    ];
}

fn resolve_run_settings(args: &RunArgs) -> Result<RunSettings> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let data = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&data).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    // Scenario source: flags win; exactly one may be selected.
    let flag_source_count = [args.source.builtin, args.source.scenarios.is_some(), args.source.trace.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if flag_source_count > 1 {
        bail!("choose exactly one scenario source: --builtin, --scenarios, or --trace");
    }
    let source = if flag_source_count == 1 {
        args.source.resolve()?
    } else {
        let file_count = [
            file.builtin.unwrap_or(false),
            file.scenarios.is_some(),
            file.trace.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if file_count > 1 {
            bail!("config selects more than one scenario source");
        }
        if let Some(path) = &file.scenarios {
            ScenarioSource::File { path: path.clone() }
        } else if let Some(path) = &file.trace {
            ScenarioSource::Trace { path: path.clone() }
        } else {
            ScenarioSource::Builtin
        }
    };

    // Backend: exactly one of --mock, --live, --replay.
    let flag_backend_count = [args.mock, args.live, args.replay.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if flag_backend_count > 1 {
        bail!("choose exactly one backend: --mock, --live, or --replay");
    }
    let backend = if args.mock {
        BackendChoice::Mock
    } else if args.live {
        BackendChoice::Live
    } else if let Some(dir) = &args.replay {
        BackendChoice::Replay { dir: dir.clone() }
    } else if file.mock.unwrap_or(false) {
        BackendChoice::Mock
    } else if file.live.unwrap_or(false) {
        BackendChoice::Live
    } else if let Some(dir) = &file.replay {
        BackendChoice::Replay { dir: dir.clone() }
    } else {
        bail!("choose a backend: --mock, --live, or --replay DIR");
    };

    let seed = args.seed.or(file.seed);
    if matches!(backend, BackendChoice::Mock) && seed.is_none() {
        bail!("--seed is required with the mock backend (runs must be reproducible)");
    }

    let out = args
        .out
        .clone()
        .or(file.out)
        .ok_or_else(|| anyhow!("--out DIR is required"))?;

    let mut gateway = GatewayConfig::default();
    if let Some(v) = file.base_url.clone() {
        gateway.base_url = v;
    }
    if let Some(v) = file.model.clone() {
        gateway.model_name = v;
    }
    if let Some(v) = file.api_key_env.clone() {
        gateway.api_key_env_var = v;
    }
    if let Some(v) = file.temperature {
        gateway.temperature = v;
    }
    if let Some(v) = file.timeout_secs {
        gateway.timeout_secs = v;
    }
    if let Some(v) = file.max_retries {
        gateway.max_retries = v;
    }
    if let Some(v) = file.parallelism {
        gateway.parallelism_limit = v;
    }
    if let Some(v) = file.samples {
        gateway.samples_per_scenario = v;
    }
    if let Some(v) = args.base_url.clone() {
        gateway.base_url = v;
    }
    if let Some(v) = args.model.clone() {
        gateway.model_name = v;
    }
    if let Some(v) = args.api_key_env.clone() {
        gateway.api_key_env_var = v;
    }
    if let Some(v) = args.temperature {
        gateway.temperature = v;
    }
    if let Some(v) = args.timeout_secs {
        gateway.timeout_secs = v;
    }
    if let Some(v) = args.max_retries {
        gateway.max_retries = v;
    }
    if let Some(v) = args.parallelism {
        gateway.parallelism_limit = v;
    }
    if let Some(v) = args.samples {
        gateway.samples_per_scenario = v;
    }

    let mut settings = RunSettings::new(out);
    settings.source = source;
    settings.backend = backend;
    settings.seed = seed.unwrap_or(0);
    settings.tolerance = args
        .tolerance
        .or(file.tolerance)
        .unwrap_or(grader::DEFAULT_TOLERANCE);
    settings.first_only = args.first_only || file.first_only.unwrap_or(false);
    settings.dt = args.dt.or(file.dt).unwrap_or(0.1);
    settings.min_accuracy = args.min_accuracy.or(file.min_accuracy);
    settings.template_dir = args.template_dir.clone().or(file.template_dir);
    settings.gateway = gateway;
    Ok(settings)
}

fn load_source_scenarios(source: &SourceArgs) -> Result<Vec<Scenario>> {
    let source = source.resolve()?;
    // Inspection commands see every scenario, eligible or not.
    Ok(match source {
        ScenarioSource::Builtin => scenario::nine_builtin_scenarios(),
        ScenarioSource::File { path } => {
            let data = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&data)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        ScenarioSource::Trace { path } => {
            let file = fs::File::open(&path)
                .with_context(|| format!("opening {}", path.display()))?;
            let ingest = scenario::ingest_trace(std::io::BufReader::new(file))?;
            if !ingest.errors.is_empty() {
                for e in &ingest.errors {
                    eprintln!("{}: {e}", path.display());
                }
                bail!("{} malformed trace record(s)", ingest.errors.len());
            }
            ingest.scenarios
        }
    })
}

fn find_scenario(scenarios: &[Scenario], id: &str) -> Result<Scenario> {
    scenarios
        .iter()
        .find(|s| s.id == id)
        .cloned()
        .ok_or_else(|| {
            let known: Vec<&str> = scenarios.iter().map(|s| s.id.as_str()).collect();
            anyhow!("unknown scenario id {id:?}; known ids: {}", known.join(", "))
        })
}

fn cmd_scenario(command: ScenarioCommand) -> Result<bool> {
    match command {
        ScenarioCommand::List { source } => {
            let scenarios = load_source_scenarios(&source)?;
            for s in &scenarios {
                let detection = s
                    .primary_detection()
                    .map(|d| format!("{} at {} m", d.object_class, d.distance_m))
                    .unwrap_or_else(|| "no detection".into());
                println!(
                    "{:28} {:12} {:14} {:>10.3} km/h  {}{}",
                    s.id,
                    s.reasoning_kind.to_string(),
                    s.weather.name,
                    s.ego.speed_kmh,
                    detection,
                    if s.synthetic { "  [synthetic]" } else { "" }
                );
            }
        }
        ScenarioCommand::Show { source, id } => {
            let scenarios = load_source_scenarios(&source)?;
            let s = find_scenario(&scenarios, &id)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
        ScenarioCommand::Export {
            source,
            id,
            out,
            format,
        } => {
            let mut scenarios = load_source_scenarios(&source)?;
            if let Some(id) = id {
                scenarios = vec![find_scenario(&scenarios, &id)?];
            }
            match format.as_str() {
                "json" => fs::write(&out, serde_json::to_string_pretty(&scenarios)?)?,
                "trace" => {
                    let file = fs::File::create(&out)?;
                    scenario::export_trace(&scenarios, std::io::BufWriter::new(file))?;
                }
                other => bail!("unknown export format {other:?} (expected json or trace)"),
            }
            println!("wrote {} scenario(s) to {}", scenarios.len(), out.display());
        }
    }
    Ok(true)
}

fn cmd_prompt(command: PromptCommand) -> Result<bool> {
    match command {
        PromptCommand::Render {
            source,
            scenario,
            template_dir,
            out,
        } => {
            let scenarios = load_source_scenarios(&source)?;
            let s = find_scenario(&scenarios, &scenario)?;
            let library = match template_dir {
                Some(dir) => PromptLibrary::from_dir(dir)?,
                None => PromptLibrary::builtin(),
            };
            let rendered = library.render(&s)?;
            match out {
                Some(path) => fs::write(&path, rendered.text)?,
                None => println!("{}", rendered.text),
            }
        }
    }
    Ok(true)
}

fn print_report_summary(outcome: &pipeline::RunOutcome) {
    for row in &outcome.report.rows {
        let accuracy = row
            .accuracy
            .map(|a| format!("{a:.4}"))
            .unwrap_or_else(|| "undefined".into());
        println!(
            "{:14} {:13} total {:>4} wrong {:>4} accuracy {}",
            row.weather,
            row.reasoning.to_string(),
            row.total,
            row.wrong,
            accuracy
        );
    }
    if let Some(mean) = outcome.report.overall_mean_accuracy() {
        println!("overall mean accuracy {mean:.4}");
    }
    println!(
        "{} transcript(s); outputs in {}",
        outcome.transcripts,
        outcome.output_dir.display()
    );
    for e in &outcome.gateway_errors {
        eprintln!("gateway: {e}");
    }
}

fn cmd_run(args: RunArgs) -> Result<bool> {
    let settings = resolve_run_settings(&args)?;
    let outcome = pipeline::run(&settings)?;
    print_report_summary(&outcome);
    Ok(outcome.accuracy_ok)
}

fn cmd_grade(args: GradeArgs) -> Result<bool> {
    let mut settings = RunSettings::new(args.out.clone());
    settings.source = args.source.resolve()?;
    settings.backend = BackendChoice::Replay {
        dir: args.transcripts.clone(),
    };
    settings.tolerance = args.tolerance.unwrap_or(grader::DEFAULT_TOLERANCE);
    settings.first_only = args.first_only;
    settings.dt = args.dt.unwrap_or(0.1);
    settings.min_accuracy = args.min_accuracy;
    let (outcome, load_errors) =
        pipeline::grade_stored(&args.transcripts, &settings.source.clone(), &settings)?;
    for e in &load_errors {
        eprintln!("transcript {}: {}", e.file, e.message);
    }
    print_report_summary(&outcome);
    Ok(outcome.accuracy_ok)
}

fn cmd_replay(args: ReplayArgs) -> Result<bool> {
    let mut settings = RunSettings::new(args.out.clone());
    settings.source = args.source.resolve()?;
    settings.backend = BackendChoice::Replay {
        dir: args.transcripts.clone(),
    };
    settings.seed = args.seed;
    settings.tolerance = args.tolerance.unwrap_or(grader::DEFAULT_TOLERANCE);
    settings.first_only = args.first_only;
    settings.dt = args.dt.unwrap_or(0.1);
    settings.min_accuracy = args.min_accuracy;
    if let Some(samples) = args.samples {
        settings.gateway.samples_per_scenario = samples;
    }
    let outcome = pipeline::run(&settings)?;
    print_report_summary(&outcome);
    Ok(outcome.accuracy_ok)
}

fn cmd_simulate(args: SimulateArgs) -> Result<bool> {
    let scenarios = load_source_scenarios(&args.source)?;
    let s = find_scenario(&scenarios, &args.scenario)?;
    let brake_list: Vec<f64> = args
        .brake
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .context("parsing --brake values")?;
    let schedule: &[f64] = if args.first_only && !brake_list.is_empty() {
        &brake_list[..1]
    } else {
        &brake_list
    };
    let model = SimModel {
        brake_model: drivecheck_core::BrakeModel::new(args.max_decel)?,
        ..SimModel::default()
    };
    let traj = sim::run_brake_schedule(&s, schedule, args.dt, &model)?;
    let flags = sim::check_safety(&traj, &s, &model, &sim::SafetyOptions::default());
    println!(
        "outcome: {:?}; final speed {:.3} km/h; distance {:.3} m",
        traj.outcome,
        traj.final_speed_kmh(),
        traj.distance_traveled_m()
    );
    if flags.is_empty() {
        println!("safety flags: none");
    } else {
        let names: Vec<String> = flags.iter().map(|f| f.to_string()).collect();
        println!("safety flags: {}", names.join(", "));
    }
    if let Some(path) = args.csv {
        let file = fs::File::create(&path)?;
        traj.write_csv(std::io::BufWriter::new(file))?;
        println!("trajectory written to {}", path.display());
    }
    Ok(true)
}

fn cmd_report(args: ReportArgs) -> Result<bool> {
    if args.annotations.is_some() == args.graded.is_some() {
        bail!("choose exactly one input: --annotations DIR or --graded DIR");
    }
    let scenarios = load_source_scenarios(&args.source)?;
    let report = if let Some(dir) = &args.annotations {
        let (annotations, errors) = grader::load_annotations(dir)?;
        for e in &errors {
            eprintln!("annotation {}: {}", e.file, e.message);
        }
        if annotations.is_empty() {
            bail!("no valid annotations in {}", dir.display());
        }
        grader::aggregate(&[], &annotations, &scenarios)?
    } else {
        let dir = args.graded.as_ref().unwrap();
        let mut graded = Vec::new();
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let data = fs::read_to_string(&path)?;
            let g: grader::GradedTranscript = serde_json::from_str(&data)
                .with_context(|| format!("parsing {}", path.display()))?;
            graded.push(g);
        }
        if graded.is_empty() {
            bail!("no graded records in {}", dir.display());
        }
        grader::aggregate(&graded, &[], &scenarios)?
    };
    let paths = report::emit_report(&report, &args.out)?;
    let manifest = serde_json::json!({
        "schema_version": 1,
        "command": "report",
        "annotations": args.annotations.as_ref().map(|p| p.display().to_string()),
        "graded": args.graded.as_ref().map(|p| p.display().to_string()),
        "versions": { "core": env!("CARGO_PKG_VERSION") },
    });
    fs::write(
        args.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    println!(
        "wrote {}, {}, {}",
        paths.csv.display(),
        paths.json.display(),
        paths.plot.display()
    );
    let mut stdout = std::io::stdout().lock();
    report::write_csv(&report, &mut stdout)?;
    stdout.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scenario { command } => cmd_scenario(command),
        Command::Prompt { command } => cmd_prompt(command),
        Command::Run(args) => cmd_run(args),
        Command::Grade(args) => cmd_grade(args),
        Command::Replay(args) => cmd_replay(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("accuracy below --min-accuracy threshold");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
