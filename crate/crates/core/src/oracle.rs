//! Ground-truth longitudinal kinematics.
//!
//! Everything here is a pure function of its arguments. The grader treats
//! these as the reference implementation when checking numeric claims made
//! in reply text, so none of them may inherit rounding from those replies:
//! unit conversions use exact division/multiplication by 3.6, not the
//! truncated 0.277778 factor that shows up in transcripts. The grading
//! tolerance absorbs that difference.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::WeatherPreset;

/// km/h per m/s.
pub const KMH_PER_MS: f64 = 3.6;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("value must be finite, got {0}")]
    NonFinite(f64),
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("deceleration must be nonnegative, got {0}")]
    NegativeDecel(f64),
    #[error("deceleration must be positive, got {0}")]
    NonPositiveDecel(f64),
    #[error("speed must be nonnegative, got {0}")]
    NegativeSpeed(f64),
    #[error("brake value must be within [0, 1], got {0}")]
    BrakeOutOfRange(f64),
    #[error("full-brake deceleration must be positive, got {0}")]
    InvalidBrakeModel(f64),
}

/// Measurement unit for a [`Quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "km/h")]
    KilometersPerHour,
    #[serde(rename = "m/s")]
    MetersPerSecond,
    #[serde(rename = "m/s2")]
    MetersPerSecondSquared,
    #[serde(rename = "m")]
    Meters,
    #[serde(rename = "s")]
    Seconds,
    #[serde(rename = "dimensionless")]
    Dimensionless,
}

impl std::fmt::Display for Unit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Unit::KilometersPerHour => "km/h",
            Unit::MetersPerSecond => "m/s",
            Unit::MetersPerSecondSquared => "m/s2",
            Unit::Meters => "m",
            Unit::Seconds => "s",
            Unit::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

/// A finite value tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Result<Self, OracleError> {
        if !value.is_finite() {
            return Err(OracleError::NonFinite(value));
        }
        Ok(Self { value, unit })
    }

    pub fn kmh(value: f64) -> Result<Self, OracleError> {
        Self::new(value, Unit::KilometersPerHour)
    }

    pub fn ms(value: f64) -> Result<Self, OracleError> {
        Self::new(value, Unit::MetersPerSecond)
    }

    pub fn ms2(value: f64) -> Result<Self, OracleError> {
        Self::new(value, Unit::MetersPerSecondSquared)
    }

    pub fn meters(value: f64) -> Result<Self, OracleError> {
        Self::new(value, Unit::Meters)
    }

    pub fn seconds(value: f64) -> Result<Self, OracleError> {
        Self::new(value, Unit::Seconds)
    }

    pub fn dimensionless(value: f64) -> Result<Self, OracleError> {
        Self::new(value, Unit::Dimensionless)
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.unit == Unit::Dimensionless {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{} {}", self.value, self.unit)
        }
    }
}

/// Maps pedal position to deceleration. Full brake yields
/// `max_decel_at_full_brake`, scaling linearly below that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrakeModel {
    pub max_decel_at_full_brake: f64,
}

impl BrakeModel {
    pub fn new(max_decel_at_full_brake: f64) -> Result<Self, OracleError> {
        if !max_decel_at_full_brake.is_finite() || max_decel_at_full_brake <= 0.0 {
            return Err(OracleError::InvalidBrakeModel(max_decel_at_full_brake));
        }
        Ok(Self {
            max_decel_at_full_brake,
        })
    }
}

impl Default for BrakeModel {
    fn default() -> Self {
        Self {
            max_decel_at_full_brake: 1.0,
        }
    }
}

/// Result of mapping a requested deceleration back to a pedal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BrakeDemand {
    Feasible { brake: f64 },
    /// The requested deceleration exceeds what full brake can deliver.
    Infeasible { required_decel: f64 },
}

impl BrakeDemand {
    pub fn brake(&self) -> Option<f64> {
        match self {
            BrakeDemand::Feasible { brake } => Some(*brake),
            BrakeDemand::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, BrakeDemand::Feasible { .. })
    }
}

/// km/h to m/s via exact division by 3.6.
pub fn kmh_to_ms(v_kmh: f64) -> Result<f64, OracleError> {
    if !v_kmh.is_finite() {
        return Err(OracleError::NonFinite(v_kmh));
    }
    Ok(v_kmh / KMH_PER_MS)
}

/// m/s to km/h via exact multiplication by 3.6.
pub fn ms_to_kmh(v_ms: f64) -> Result<f64, OracleError> {
    if !v_ms.is_finite() {
        return Err(OracleError::NonFinite(v_ms));
    }
    Ok(v_ms * KMH_PER_MS)
}

/// Signed acceleration needed to go from `v_initial_ms` to `v_final_ms` in
/// `duration_s`. Negative means slowing down.
pub fn required_decel(
    v_initial_ms: f64,
    v_final_ms: f64,
    duration_s: f64,
) -> Result<f64, OracleError> {
    for v in [v_initial_ms, v_final_ms, duration_s] {
        if !v.is_finite() {
            return Err(OracleError::NonFinite(v));
        }
    }
    if duration_s <= 0.0 {
        return Err(OracleError::NonPositiveDuration(duration_s));
    }
    Ok((v_final_ms - v_initial_ms) / duration_s)
}

/// Speeds after 1..=steps intervals of `dt_s` under constant deceleration,
/// clamped at standstill.
pub fn speed_schedule(
    v0_ms: f64,
    decel_ms2: f64,
    steps: usize,
    dt_s: f64,
) -> Result<Vec<f64>, OracleError> {
    if !v0_ms.is_finite() {
        return Err(OracleError::NonFinite(v0_ms));
    }
    if !decel_ms2.is_finite() || decel_ms2 < 0.0 {
        return Err(OracleError::NegativeDecel(decel_ms2));
    }
    if steps == 0 {
        return Err(OracleError::ZeroSteps);
    }
    if !dt_s.is_finite() || dt_s <= 0.0 {
        return Err(OracleError::NonPositiveTimeStep(dt_s));
    }
    Ok((1..=steps)
        .map(|k| (v0_ms - decel_ms2 * k as f64 * dt_s).max(0.0))
        .collect())
}

/// Deceleration produced by a pedal position under the given brake model.
pub fn decel_from_brake(brake: f64, model: &BrakeModel) -> Result<f64, OracleError> {
    if !brake.is_finite() || !(0.0..=1.0).contains(&brake) {
        return Err(OracleError::BrakeOutOfRange(brake));
    }
    Ok(brake * model.max_decel_at_full_brake)
}

/// Pedal position needed for a deceleration, or the infeasible marker when
/// the demand exceeds full brake.
pub fn brake_from_decel(decel_ms2: f64, model: &BrakeModel) -> Result<BrakeDemand, OracleError> {
    if !decel_ms2.is_finite() || decel_ms2 < 0.0 {
        return Err(OracleError::NegativeDecel(decel_ms2));
    }
    let brake = decel_ms2 / model.max_decel_at_full_brake;
    if brake <= 1.0 {
        Ok(BrakeDemand::Feasible { brake })
    } else {
        Ok(BrakeDemand::Infeasible {
            required_decel: decel_ms2,
        })
    }
}

/// Distance covered while braking from `v_ms` to rest: v²/(2a).
pub fn stopping_distance(v_ms: f64, decel_ms2: f64) -> Result<f64, OracleError> {
    if !v_ms.is_finite() || v_ms < 0.0 {
        return Err(OracleError::NegativeSpeed(v_ms));
    }
    if !decel_ms2.is_finite() || decel_ms2 <= 0.0 {
        return Err(OracleError::NonPositiveDecel(decel_ms2));
    }
    Ok(v_ms * v_ms / (2.0 * decel_ms2))
}

/// Time-headway factors (seconds of travel) per weather preset name.
///
/// The per-weather factors are harness defaults, not measured values;
/// override them when a different following-distance policy applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadwayRule {
    pub sunny_s: f64,
    pub partly_sunny_s: f64,
    pub rainy_s: f64,
    /// Used for presets whose name matches none of the built-ins.
    pub fallback_s: f64,
}

impl Default for HeadwayRule {
    fn default() -> Self {
        Self {
            sunny_s: 2.0,
            partly_sunny_s: 2.5,
            rainy_s: 4.0,
            fallback_s: 2.5,
        }
    }
}

impl HeadwayRule {
    pub fn headway_s(&self, weather: &WeatherPreset) -> f64 {
        match weather.name.as_str() {
            "sunny" => self.sunny_s,
            "partly_sunny" => self.partly_sunny_s,
            "rainy" => self.rainy_s,
            _ => self.fallback_s,
        }
    }
}

/// Safe following distance at `v_ms` under the default time-headway rule.
pub fn safe_following_distance(v_ms: f64, weather: &WeatherPreset) -> f64 {
    safe_following_distance_with(v_ms, weather, &HeadwayRule::default())
}

/// Safe following distance under an explicit time-headway rule.
pub fn safe_following_distance_with(v_ms: f64, weather: &WeatherPreset, rule: &HeadwayRule) -> f64 {
    v_ms.max(0.0) * rule.headway_s(weather)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin_presets;

    fn preset(name: &str) -> WeatherPreset {
        builtin_presets()
            .into_iter()
            .find(|p| p.name == name)
            .unwrap()
    }

    #[test]
    fn kmh_to_ms_limit_speed() {
        assert!((kmh_to_ms(40.0).unwrap() - 11.1111).abs() < 1e-4);
    }

    #[test]
    fn kmh_to_ms_zero() {
        assert_eq!(kmh_to_ms(0.0).unwrap(), 0.0);
    }

    #[test]
    fn kmh_to_ms_exact_division() {
        // Exact /3.6, not the truncated 0.277778 factor: 45.25227775733768/3.6.
        assert!((kmh_to_ms(45.25227775733768).unwrap() - 12.570077).abs() < 1e-6);
    }

    #[test]
    fn kmh_to_ms_rejects_non_finite() {
        assert!(kmh_to_ms(f64::NAN).is_err());
        assert!(kmh_to_ms(f64::INFINITY).is_err());
    }

    #[test]
    fn ms_to_kmh_inverse() {
        assert!((ms_to_kmh(11.1111).unwrap() - 40.0).abs() < 1e-3);
        assert_eq!(ms_to_kmh(0.0).unwrap(), 0.0);
        assert!((ms_to_kmh(12.563252).unwrap() - 45.22771).abs() < 1e-4);
    }

    #[test]
    fn required_decel_matches_reply_arithmetic() {
        // (11.1111 - 12.5556) / 5 in f64 is exactly -0.28889999999999993.
        let a = required_decel(12.5556, 11.1111, 5.0).unwrap();
        assert!((a - (-0.288900)).abs() < 1e-5);
        assert_eq!(a, -0.28889999999999993);
    }

    #[test]
    fn required_decel_zero_for_equal_speeds() {
        assert_eq!(required_decel(7.25, 7.25, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn required_decel_from_exact_conversion() {
        // 45.22770823152422 km/h converted exactly, then slowed to 11.111111 m/s over 5 s.
        let a = required_decel(12.563252, 11.111111, 5.0).unwrap();
        assert!((a - (-0.290428)).abs() < 1e-5);
    }

    #[test]
    fn required_decel_rejects_bad_duration() {
        assert_eq!(
            required_decel(10.0, 5.0, 0.0),
            Err(OracleError::NonPositiveDuration(0.0))
        );
        assert!(required_decel(10.0, 5.0, -1.0).is_err());
    }

    #[test]
    fn speed_schedule_constant_decel() {
        let s = speed_schedule(12.5694, 1.0, 3, 1.0).unwrap();
        assert_eq!(s, vec![11.5694, 10.5694, 9.5694]);
    }

    #[test]
    fn speed_schedule_zero_decel_is_constant() {
        let s = speed_schedule(9.5, 0.0, 4, 0.5).unwrap();
        assert_eq!(s, vec![9.5; 4]);
    }

    #[test]
    fn speed_schedule_clamps_at_standstill() {
        let s = speed_schedule(1.0, 1.0, 3, 1.0).unwrap();
        assert_eq!(s, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn decel_from_brake_default_model() {
        let m = BrakeModel::default();
        assert_eq!(decel_from_brake(0.2889, &m).unwrap(), 0.2889);
        assert_eq!(decel_from_brake(0.0, &m).unwrap(), 0.0);
        let strong = BrakeModel::new(4.0).unwrap();
        assert_eq!(decel_from_brake(1.0, &strong).unwrap(), 4.0);
    }

    #[test]
    fn decel_from_brake_rejects_out_of_range() {
        let m = BrakeModel::default();
        assert!(decel_from_brake(-0.1, &m).is_err());
        assert!(decel_from_brake(1.1, &m).is_err());
    }

    #[test]
    fn brake_from_decel_roundtrip_and_infeasible() {
        let m = BrakeModel::default();
        assert_eq!(
            brake_from_decel(0.2889, &m).unwrap(),
            BrakeDemand::Feasible { brake: 0.2889 }
        );
        assert_eq!(
            brake_from_decel(0.0, &m).unwrap(),
            BrakeDemand::Feasible { brake: 0.0 }
        );
        // Stopping before an object 18.2 m ahead from 12.570077 m/s needs
        // v^2/(2d) = 4.341 m/s^2, beyond the 1 m/s^2 full-brake model.
        let demand = brake_from_decel(4.341, &m).unwrap();
        assert!(!demand.is_feasible());
    }

    #[test]
    fn stopping_distance_closed_form() {
        assert!((stopping_distance(11.1111, 1.0).unwrap() - 61.728).abs() < 1e-2);
        assert_eq!(stopping_distance(0.0, 2.0).unwrap(), 0.0);
        assert!((stopping_distance(12.570077, 1.0).unwrap() - 79.004).abs() < 1e-2);
        assert!(stopping_distance(10.0, 0.0).is_err());
    }

    #[test]
    fn safe_following_distance_headways() {
        assert!((safe_following_distance(11.1111, &preset("sunny")) - 22.222).abs() < 1e-2);
        assert_eq!(safe_following_distance(0.0, &preset("rainy")), 0.0);
        // 43.21 km/h ego speed in rain: the 4 s headway wants ~48 m, far more
        // than the 15.28 m gap in the rainy fixture.
        assert!((safe_following_distance(12.006, &preset("rainy")) - 48.02).abs() < 0.1);
    }

    #[test]
    fn quantity_rejects_non_finite() {
        assert!(Quantity::kmh(f64::NAN).is_err());
        assert!(Quantity::ms(f64::NEG_INFINITY).is_err());
        assert!(Quantity::meters(15.28).is_ok());
    }
}
