//! Deterministic longitudinal vehicle simulator.
//!
//! Integrates piecewise-constant accelerations exactly (trapezoidal
//! position update plus an analytic sub-step stop when braking would push
//! speed below zero), so refining the time step does not change the
//! trajectory of a drag-free run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{self, BrakeModel};
use crate::scenario::{EgoState, Scenario};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
    #[error("{pedal} must be within [0, 1], got {value}")]
    ControlOutOfRange { pedal: &'static str, value: f64 },
    #[error("brake schedule entry {index} out of range: {value}")]
    ScheduleEntryOutOfRange { index: usize, value: f64 },
}

/// Pedal positions for one control interval. When both pedals are pressed
/// the brake wins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub throttle: f64,
    pub brake: f64,
}

impl ControlInput {
    pub fn new(throttle: f64, brake: f64) -> Result<Self, SimError> {
        if !throttle.is_finite() || !(0.0..=1.0).contains(&throttle) {
            return Err(SimError::ControlOutOfRange {
                pedal: "throttle",
                value: throttle,
            });
        }
        if !brake.is_finite() || !(0.0..=1.0).contains(&brake) {
            return Err(SimError::ControlOutOfRange {
                pedal: "brake",
                value: brake,
            });
        }
        Ok(Self { throttle, brake })
    }

    pub fn brake_only(brake: f64) -> Result<Self, SimError> {
        Self::new(0.0, brake)
    }

    pub fn coast() -> Self {
        Self {
            throttle: 0.0,
            brake: 0.0,
        }
    }
}

/// Vehicle response parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimModel {
    /// Acceleration at full throttle (m/s²).
    pub max_accel: f64,
    pub brake_model: BrakeModel,
    /// Optional linear drag coefficient (1/s). Off by default; when set,
    /// integration falls back to per-step Euler for the drag term.
    #[serde(default)]
    pub linear_drag: Option<f64>,
}

impl Default for SimModel {
    fn default() -> Self {
        Self {
            max_accel: 3.0,
            brake_model: BrakeModel::default(),
            linear_drag: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub position_m: f64,
    pub speed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Collided { at_t: f64 },
    Stopped,
}

/// Sampled result of a closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn final_speed_ms(&self) -> f64 {
        self.samples.last().map(|s| s.speed_ms).unwrap_or(0.0)
    }

    pub fn final_speed_kmh(&self) -> f64 {
        self.final_speed_ms() * oracle::KMH_PER_MS
    }

    pub fn distance_traveled_m(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.position_m - a.position_m,
            _ => 0.0,
        }
    }

    pub fn min_speed_ms(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.speed_ms)
            .fold(f64::INFINITY, f64::min)
    }

    /// Write `t,position_m,speed_ms` rows for plotting.
    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "t,position_m,speed_ms")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s.t, s.position_m, s.speed_ms)?;
        }
        Ok(())
    }
}

/// Advance the ego state by one step of `dt_s` under the given controls.
pub fn step(
    state: &EgoState,
    input: &ControlInput,
    dt_s: f64,
    model: &SimModel,
) -> Result<EgoState, SimError> {
    if !dt_s.is_finite() || dt_s <= 0.0 {
        return Err(SimError::NonPositiveTimeStep(dt_s));
    }
    // Re-validate: ControlInput can be built via struct literal too.
    let input = ControlInput::new(input.throttle, input.brake)?;
    let v0 = oracle::kmh_to_ms(state.speed_kmh).unwrap_or(0.0).max(0.0);

    let mut accel = if input.brake > 0.0 {
        -oracle::decel_from_brake(input.brake, &model.brake_model)
            .expect("validated brake in range")
    } else {
        input.throttle * model.max_accel
    };
    if let Some(drag) = model.linear_drag {
        accel -= drag * v0;
    }

    let (v1, distance) = integrate_const_accel(v0, accel, dt_s);
    Ok(EgoState {
        speed_kmh: v1 * oracle::KMH_PER_MS,
        heading: state.heading.clone(),
        position_m: state.position_m + distance,
    })
}

/// Exact constant-acceleration update: returns (new speed, distance covered),
/// handling the analytic stop when deceleration would cross zero speed.
fn integrate_const_accel(v0: f64, accel: f64, dt: f64) -> (f64, f64) {
    if accel >= 0.0 {
        let v1 = v0 + accel * dt;
        return (v1, dt * (v0 + v1) / 2.0);
    }
    let t_stop = v0 / -accel;
    if t_stop >= dt {
        let v1 = v0 + accel * dt;
        (v1, dt * (v0 + v1) / 2.0)
    } else {
        // Comes to rest within the step and stays there.
        (0.0, v0 * t_stop / 2.0)
    }
}

/// Replay a per-second brake schedule from the scenario's ego state. Each
/// entry is held for one second (zero-order hold when `dt_s` subdivides the
/// second). A collision is declared when the ego reaches the primary
/// detection, treated as a static obstacle.
pub fn run_brake_schedule(
    s: &Scenario,
    brake_list: &[f64],
    dt_s: f64,
    model: &SimModel,
) -> Result<Trajectory, SimError> {
    if !dt_s.is_finite() || dt_s <= 0.0 {
        return Err(SimError::NonPositiveTimeStep(dt_s));
    }
    for (index, &value) in brake_list.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(SimError::ScheduleEntryOutOfRange { index, value });
        }
    }

    let obstacle = s
        .primary_detection()
        .filter(|d| d.object_class.is_obstacle())
        .map(|d| s.ego.position_m + d.distance_m);

    let substeps = (1.0 / dt_s).round().max(1.0) as usize;
    let dt_eff = 1.0 / substeps as f64;

    let mut t = 0.0;
    let mut state = s.ego.clone();
    let mut samples = vec![TrajectorySample {
        t,
        position_m: state.position_m,
        speed_ms: oracle::kmh_to_ms(state.speed_kmh).unwrap_or(0.0),
    }];
    let mut outcome = Outcome::Completed;

    'schedule: for &brake in brake_list {
        let input = ControlInput::brake_only(brake)?;
        for _ in 0..substeps {
            state = step(&state, &input, dt_eff, model)?;
            t += dt_eff;
            let speed_ms = oracle::kmh_to_ms(state.speed_kmh).unwrap_or(0.0);
            samples.push(TrajectorySample {
                t,
                position_m: state.position_m,
                speed_ms,
            });
            if let Some(pos) = obstacle {
                if state.position_m >= pos {
                    outcome = Outcome::Collided { at_t: t };
                    break 'schedule;
                }
            }
        }
    }

    if matches!(outcome, Outcome::Completed) && samples.last().map(|s| s.speed_ms) == Some(0.0) {
        if !brake_list.is_empty() {
            outcome = Outcome::Stopped;
        }
    }

    Ok(Trajectory { samples, outcome })
}

/// Semantic failures found in a completed trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafetyFlag {
    Collision,
    ExceedsSpeedLimitAtEnd,
    NeverReachesLimit,
    InfeasibleBrakeRequest,
}

impl std::fmt::Display for SafetyFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SafetyFlag::Collision => "collision",
            SafetyFlag::ExceedsSpeedLimitAtEnd => "exceeds_speed_limit_at_end",
            SafetyFlag::NeverReachesLimit => "never_reaches_limit",
            SafetyFlag::InfeasibleBrakeRequest => "infeasible_brake_request",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyOptions {
    /// Slack above the limit before the end-speed flags fire (km/h).
    pub speed_tolerance_kmh: f64,
}

impl Default for SafetyOptions {
    fn default() -> Self {
        Self {
            speed_tolerance_kmh: 0.5,
        }
    }
}

/// Check a trajectory for the flag set: collisions, ending above the speed
/// limit, never getting down to the limit, and situations where stopping
/// before the primary obstacle needs more deceleration than full brake
/// provides (v²/2d beyond the model maximum).
pub fn check_safety(
    traj: &Trajectory,
    s: &Scenario,
    model: &SimModel,
    opts: &SafetyOptions,
) -> Vec<SafetyFlag> {
    let mut flags = Vec::new();
    if let Outcome::Collided { .. } = traj.outcome {
        flags.push(SafetyFlag::Collision);
    }
    let limit = s.speed_limit_kmh + opts.speed_tolerance_kmh;
    if traj.final_speed_kmh() > limit {
        flags.push(SafetyFlag::ExceedsSpeedLimitAtEnd);
    }
    if traj.min_speed_ms() * oracle::KMH_PER_MS > limit {
        flags.push(SafetyFlag::NeverReachesLimit);
    }
    if let Some(d) = s.primary_detection().filter(|d| d.object_class.is_obstacle()) {
        if d.distance_m > 0.0 {
            let v0 = oracle::kmh_to_ms(s.ego.speed_kmh).unwrap_or(0.0);
            let needed = v0 * v0 / (2.0 * d.distance_m);
            if needed > model.brake_model.max_decel_at_full_brake {
                flags.push(SafetyFlag::InfeasibleBrakeRequest);
            }
        }
    }
    flags
}
