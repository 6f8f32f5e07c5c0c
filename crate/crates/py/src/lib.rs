//! Python bindings: the kinematics oracle, the built-in scenarios, prompt
//! rendering, reply-text extraction, grading, and brake-schedule replay.
//!
//! Structured results cross the boundary as plain Python dicts/lists built
//! from the library's JSON serialization, so the Python surface mirrors
//! the documented file schemas.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

use drivecheck_core::gateway::{BackendKind, Transcript, TRANSCRIPT_SCHEMA_VERSION};
use drivecheck_core::grader::{self, GraderConfig};
use drivecheck_core::oracle;
use drivecheck_core::parser;
use drivecheck_core::prompt::PromptLibrary;
use drivecheck_core::scenario::{self, Scenario};
use drivecheck_core::sim::{self, SimModel};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    match value {
        serde_json::Value::Null => Ok(py.None()),
        serde_json::Value::Bool(b) => b.into_py_any(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        serde_json::Value::String(s) => s.into_py_any(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let json = serde_json::to_value(value).map_err(value_err)?;
    json_to_py(py, &json)
}

fn lookup_scenario(id: &str) -> PyResult<Scenario> {
    scenario::builtin_scenario(id).ok_or_else(|| {
        let known: Vec<String> = scenario::nine_builtin_scenarios()
            .into_iter()
            .map(|s| s.id)
            .collect();
        PyKeyError::new_err(format!(
            "unknown scenario id {id:?}; known ids: {}",
            known.join(", ")
        ))
    })
}

/// km/h to m/s (exact division by 3.6).
#[pyfunction]
fn kmh_to_ms(v: f64) -> PyResult<f64> {
    oracle::kmh_to_ms(v).map_err(value_err)
}

/// m/s to km/h (exact multiplication by 3.6).
#[pyfunction]
fn ms_to_kmh(v: f64) -> PyResult<f64> {
    oracle::ms_to_kmh(v).map_err(value_err)
}

/// Signed acceleration to go from v_initial to v_final (m/s) in duration_s.
#[pyfunction]
fn required_decel(v_initial_ms: f64, v_final_ms: f64, duration_s: f64) -> PyResult<f64> {
    oracle::required_decel(v_initial_ms, v_final_ms, duration_s).map_err(value_err)
}

/// Speeds after 1..=steps intervals of dt_s under constant deceleration.
#[pyfunction]
#[pyo3(signature = (v0_ms, decel_ms2, steps, dt_s = 1.0))]
fn speed_schedule(v0_ms: f64, decel_ms2: f64, steps: usize, dt_s: f64) -> PyResult<Vec<f64>> {
    oracle::speed_schedule(v0_ms, decel_ms2, steps, dt_s).map_err(value_err)
}

/// Deceleration produced by a pedal position.
#[pyfunction]
#[pyo3(signature = (brake, max_decel_at_full_brake = 1.0))]
fn decel_from_brake(brake: f64, max_decel_at_full_brake: f64) -> PyResult<f64> {
    let model = oracle::BrakeModel::new(max_decel_at_full_brake).map_err(value_err)?;
    oracle::decel_from_brake(brake, &model).map_err(value_err)
}

/// Pedal position for a deceleration, or None when it exceeds full brake.
#[pyfunction]
#[pyo3(signature = (decel_ms2, max_decel_at_full_brake = 1.0))]
fn brake_from_decel(decel_ms2: f64, max_decel_at_full_brake: f64) -> PyResult<Option<f64>> {
    let model = oracle::BrakeModel::new(max_decel_at_full_brake).map_err(value_err)?;
    Ok(oracle::brake_from_decel(decel_ms2, &model)
        .map_err(value_err)?
        .brake())
}

/// Distance covered while braking from v_ms to rest: v^2 / (2 a).
#[pyfunction]
fn stopping_distance(v_ms: f64, decel_ms2: f64) -> PyResult<f64> {
    oracle::stopping_distance(v_ms, decel_ms2).map_err(value_err)
}

/// Ids of the nine built-in scenarios.
#[pyfunction]
fn scenario_ids() -> Vec<String> {
    scenario::nine_builtin_scenarios()
        .into_iter()
        .map(|s| s.id)
        .collect()
}

/// One built-in scenario as a dict.
#[pyfunction]
fn scenario_dict(py: Python<'_>, scenario_id: &str) -> PyResult<Py<PyAny>> {
    to_py(py, &lookup_scenario(scenario_id)?)
}

/// The three built-in weather presets as dicts.
#[pyfunction]
fn builtin_presets(py: Python<'_>) -> PyResult<Py<PyAny>> {
    to_py(py, &scenario::builtin_presets())
}

/// Render the prompt for a built-in scenario.
#[pyfunction]
fn render_prompt(scenario_id: &str) -> PyResult<String> {
    let s = lookup_scenario(scenario_id)?;
    Ok(PromptLibrary::builtin()
        .render(&s)
        .map_err(value_err)?
        .text)
}

/// The recorded reply fixture for a scenario id, or None.
#[pyfunction]
fn paper_answer(scenario_id: &str) -> Option<&'static str> {
    drivecheck_core::fixtures::paper_answer_for(scenario_id)
}

/// Numbered advisory items extracted from reply text.
#[pyfunction]
fn extract_advisories(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    to_py(py, &parser::extract_advisories(text))
}

/// Unit-tagged numeric claims extracted from reply text.
#[pyfunction]
fn extract_claims(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    to_py(py, &parser::extract_claims(text))
}

/// SPEED/BRAKE control lists from reply text, or None. Malformed lists
/// raise ValueError.
#[pyfunction]
fn extract_control_lists(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    match parser::extract_control_lists(text).map_err(value_err)? {
        Some(schedule) => to_py(py, &schedule),
        None => Ok(py.None()),
    }
}

/// Grade reply text against a built-in scenario; returns the graded record
/// as a dict (verdicts, control lists, safety flags, totals).
#[pyfunction]
#[pyo3(signature = (scenario_id, text, tolerance = grader::DEFAULT_TOLERANCE))]
fn grade_answer(py: Python<'_>, scenario_id: &str, text: &str, tolerance: f64) -> PyResult<Py<PyAny>> {
    let s = lookup_scenario(scenario_id)?;
    let transcript = Transcript {
        schema_version: TRANSCRIPT_SCHEMA_VERSION,
        scenario_id: s.id.clone(),
        sample_index: 0,
        prompt_text: String::new(),
        response_text: text.to_string(),
        model_name: "external".into(),
        created_at: String::new(),
        latency_ms: 0,
        backend: BackendKind::Replay,
        retries: 0,
        error: None,
    };
    let cfg = GraderConfig {
        tolerance,
        ..GraderConfig::default()
    };
    to_py(py, &grader::grade_transcript(&transcript, &s, &cfg))
}

/// Replay a per-second brake schedule from a built-in scenario; returns a
/// dict with the outcome, final speed, distance, flags, and samples.
#[pyfunction]
#[pyo3(signature = (scenario_id, brake_list, dt_s = 0.1))]
fn run_brake_schedule(
    py: Python<'_>,
    scenario_id: &str,
    brake_list: Vec<f64>,
    dt_s: f64,
) -> PyResult<Py<PyAny>> {
    let s = lookup_scenario(scenario_id)?;
    let model = SimModel::default();
    let traj = sim::run_brake_schedule(&s, &brake_list, dt_s, &model).map_err(value_err)?;
    let flags = sim::check_safety(&traj, &s, &model, &sim::SafetyOptions::default());
    let dict = PyDict::new(py);
    dict.set_item("outcome", to_py(py, &traj.outcome)?)?;
    dict.set_item("final_speed_kmh", traj.final_speed_kmh())?;
    dict.set_item("distance_traveled_m", traj.distance_traveled_m())?;
    dict.set_item("flags", to_py(py, &flags)?)?;
    dict.set_item("samples", to_py(py, &traj.samples)?)?;
    dict.into_py_any(py)
}

#[pymodule]
fn drivecheck(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(kmh_to_ms, m)?)?;
    m.add_function(wrap_pyfunction!(ms_to_kmh, m)?)?;
    m.add_function(wrap_pyfunction!(required_decel, m)?)?;
    m.add_function(wrap_pyfunction!(speed_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(decel_from_brake, m)?)?;
    m.add_function(wrap_pyfunction!(brake_from_decel, m)?)?;
    m.add_function(wrap_pyfunction!(stopping_distance, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_ids, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_dict, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_presets, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(paper_answer, m)?)?;
    m.add_function(wrap_pyfunction!(extract_advisories, m)?)?;
    m.add_function(wrap_pyfunction!(extract_claims, m)?)?;
    m.add_function(wrap_pyfunction!(extract_control_lists, m)?)?;
    m.add_function(wrap_pyfunction!(grade_answer, m)?)?;
    m.add_function(wrap_pyfunction!(run_brake_schedule, m)?)?;
    Ok(())
}
