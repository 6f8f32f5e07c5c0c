//! Extraction of structured content from free-form reply text.
//!
//! The extractors are grammar scans over sentence-like segments, not a math
//! parser: each claim pattern matches an explicit unit suffix and carries
//! its byte span back to the original text so verdicts stay auditable.
//! Statements introduced with "assume"/"assuming" set context (the
//! operative deceleration, plan duration) instead of producing claims —
//! an assumption is an input to the reply's arithmetic, not a result the
//! oracle should dispute.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{Quantity, Unit};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("list {name} at bytes {span:?}: malformed bracketed list: {detail}")]
    MalformedList {
        name: String,
        span: (usize, usize),
        detail: String,
    },
}

/// How the values in a SPEED list should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedInterpretation {
    /// All entries within [0, 1]: pedal fractions, as the prompt asked.
    ThrottleFraction,
    /// Entries outside [0, 1]: the reply returned target speeds instead.
    TargetSpeedKmh,
    /// Mixed signals; graded as a defect.
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListKind {
    Speed,
    Brake,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeViolation {
    pub list: ListKind,
    pub index: usize,
    pub value: f64,
}

/// SPEED/BRAKE control lists recovered from a reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub speed_entries: Vec<f64>,
    pub speed_interpretation: Option<SpeedInterpretation>,
    pub brake_entries: Vec<f64>,
    /// A trailing ellipsis was present; entries are the finite prefix.
    pub truncated: bool,
    pub range_violations: Vec<RangeViolation>,
}

/// What a numeric claim asserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    Conversion,
    Deceleration,
    SpeedAtTime,
    BrakeValue,
    Distance,
    Duration,
}

/// A unit-tagged quantity asserted in reply text, with the byte span it
/// was read from. Deceleration claims are normalized to signed
/// acceleration (negative = slowing), with the raw numeral preserved in
/// `claimed_raw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericClaim {
    pub kind: ClaimKind,
    pub inputs: Vec<Quantity>,
    pub claimed: Quantity,
    pub claimed_raw: String,
    pub source_span: (usize, usize),
}

/// One numbered recommendation item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub index: usize,
    pub title: String,
    pub body: String,
}

/// How much of the numeric content the grammar reached.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    /// Segments containing at least one digit.
    pub numeric_segments: usize,
    /// Numeric segments that produced at least one claim.
    pub extracted_segments: usize,
}

/// Full extraction result for one reply, serializable for external tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub control: Option<ControlSchedule>,
    pub control_error: Option<String>,
    pub claims: Vec<NumericClaim>,
    pub advisories: Vec<Advisory>,
    pub coverage: Coverage,
}

/// Run every extractor over the text.
pub fn extract_all(text: &str) -> Extraction {
    let (control, control_error) = match extract_control_lists(text) {
        Ok(c) => (c, None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (claims, coverage) = claims_with_coverage(text);
    Extraction {
        control,
        control_error,
        claims,
        advisories: extract_advisories(text),
        coverage,
    }
}

// ---------------------------------------------------------------------------
// Control lists
// ---------------------------------------------------------------------------

const SPEED_NAMES: [&str; 2] = ["SPEED_CONTROL", "SPEED_LIST"];
const BRAKE_NAMES: [&str; 2] = ["BRAKE_CONTROL", "BRAKE_LIST"];

struct ListParse {
    values: Vec<f64>,
    truncated: bool,
}

/// Find the SPEED and BRAKE lists. The last occurrence of a list name that
/// is followed by a bracket is the operative one (replies often restate
/// lists after deriving them); prose mentions without a bracket are
/// skipped. Returns `None` when neither list family appears with values.
pub fn extract_control_lists(text: &str) -> Result<Option<ControlSchedule>, ParseError> {
    let speed = find_last_list(text, &SPEED_NAMES)?;
    let brake = find_last_list(text, &BRAKE_NAMES)?;
    if speed.is_none() && brake.is_none() {
        return Ok(None);
    }
    let (speed_entries, speed_truncated) = speed
        .map(|p| (p.values, p.truncated))
        .unwrap_or_default();
    let (brake_entries, brake_truncated) = brake
        .map(|p| (p.values, p.truncated))
        .unwrap_or_default();

    let speed_interpretation = if speed_entries.is_empty() {
        None
    } else {
        Some(classify_speed_entries(&speed_entries))
    };

    let mut range_violations = Vec::new();
    for (index, &value) in brake_entries.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            range_violations.push(RangeViolation {
                list: ListKind::Brake,
                index,
                value,
            });
        }
    }

    Ok(Some(ControlSchedule {
        speed_entries,
        speed_interpretation,
        brake_entries,
        truncated: speed_truncated || brake_truncated,
        range_violations,
    }))
}

/// Range rule: everything in [0, 1] reads as pedal fractions, everything
/// outside as target speeds in km/h, and a mixture is ambiguous.
pub fn classify_speed_entries(entries: &[f64]) -> SpeedInterpretation {
    let in_unit = entries.iter().filter(|v| (0.0..=1.0).contains(*v)).count();
    if in_unit == entries.len() {
        SpeedInterpretation::ThrottleFraction
    } else if in_unit == 0 {
        SpeedInterpretation::TargetSpeedKmh
    } else {
        SpeedInterpretation::Ambiguous
    }
}

fn find_last_list(text: &str, names: &[&str]) -> Result<Option<ListParse>, ParseError> {
    let mut occurrences: Vec<(usize, &str)> = Vec::new();
    for name in names {
        occurrences.extend(text.match_indices(name).map(|(pos, _)| (pos, *name)));
    }
    occurrences.sort_unstable();
    for &(pos, name) in occurrences.iter().rev() {
        let after = pos + name.len();
        let mut window_end = (after + 60).min(text.len());
        while !text.is_char_boundary(window_end) {
            window_end -= 1;
        }
        let Some(rel) = text[after..window_end].find('[') else {
            continue; // prose mention, look at the previous occurrence
        };
        let open = after + rel;
        return match parse_bracket(&text[open..]) {
            Ok(parse) => Ok(Some(parse)),
            Err(detail) => Err(ParseError::MalformedList {
                name: name.to_string(),
                span: (pos, window_end),
                detail,
            }),
        };
    }
    Ok(None)
}

/// Parse `[a, b, c, ...]` starting at the opening bracket. An ellipsis sets
/// the truncated flag and ends the finite prefix.
fn parse_bracket(s: &str) -> Result<ListParse, String> {
    debug_assert!(s.starts_with('['));
    let close = s.find(']').ok_or_else(|| "unclosed bracket".to_string())?;
    let inner = &s[1..close];
    let mut values = Vec::new();
    let mut truncated = false;
    for token in inner.split(',') {
        let raw = token.trim();
        if raw.is_empty() {
            continue; // trailing comma
        }
        if raw.chars().all(|c| c == '.' || c == '…') {
            truncated = true;
            break;
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => return Err(format!("cannot parse {raw:?} as a number")),
        }
    }
    Ok(ListParse { values, truncated })
}

// ---------------------------------------------------------------------------
// Numeric claims
// ---------------------------------------------------------------------------

macro_rules! regex {
    ($name:ident, $pattern:expr) => {
        static $name: LazyLock<Regex> = LazyLock::new(|| Regex::new($pattern).unwrap());
    };
}

// Numerals are plain decimals with an optional sign: no exponents, no
// thousands separators. That is the shape the source replies use.
regex!(KMH_INPUT, r"([0-9]+(?:\.[0-9]+)?)\s*km/h");
regex!(
    MS_RESULT,
    r"(?:=|is approximately|is about)\s*(-?[0-9]+(?:\.[0-9]+)?)\s*m/s(\^2|²)?"
);
regex!(DECEL_EQ, r"=\s*(-?[0-9]+(?:\.[0-9]+)?)\s*m/s(?:\^2|²)");
regex!(DIV_SECONDS, r"/\s*([0-9]+(?:\.[0-9]+)?)\s*s\b");
regex!(
    DECEL_RATE,
    r"decelerate at a rate of\s*(?:a\s*=\s*)?(-?[0-9]+(?:\.[0-9]+)?)\s*m/s(?:\^2|²)"
);
regex!(IN_SECONDS, r"in\s+([0-9]+(?:\.[0-9]+)?)\s+seconds");
regex!(SUBSCRIPT_SPEED, r"v_?([0-9]+)\s*=");
regex!(
    SPEED_VALUE,
    r"=\s*(-?[0-9]+(?:\.[0-9]+)?)\s*(km/h|m/s)(\^2|²)?"
);
regex!(
    AT_T_SPEED,
    r"[Aa]t t\s*=\s*([0-9]+(?:\.[0-9]+)?)\s*(?:s\b|seconds?)?\s*[,:]?\s*v\s*=\s*(-?[0-9]+(?:\.[0-9]+)?)\s*(km/h|m/s)"
);
regex!(
    ARROW_SPEED,
    r"t\s*=\s*([0-9]+(?:\.[0-9]+)?)\s*(?:→|->)\s*(-?[0-9]+(?:\.[0-9]+)?)\s*(km/h|m/s)"
);
regex!(DISTANCE_AWAY, r"([0-9]+(?:\.[0-9]+)?)\s*meters?\s+away");
regex!(
    BRAKE_FOR_EACH,
    r"brake value of\s*([0-9]+(?:\.[0-9]+)?)\s*for each of the\s*([0-9]+(?:\.[0-9]+)?)\s*seconds"
);
regex!(BRAKE_APPLY, r"apply a brake value of\s*([0-9]+(?:\.[0-9]+)?)");
regex!(
    ASSUMED_DECEL,
    r"deceleration rate of\s*([0-9]+(?:\.[0-9]+)?)\s*m/s(?:\^2|²)"
);

/// Byte range of one sentence-like segment.
struct Segment {
    start: usize,
    end: usize,
}

/// Split at newlines and at ". " sentence boundaries. Decimal points never
/// match ". " because the following character is a digit.
fn segments(text: &str) -> Vec<Segment> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let boundary = match bytes[i] {
            b'\n' => Some(1),
            b'.' if i + 1 < bytes.len() && bytes[i + 1] == b' ' => Some(2),
            _ => None,
        };
        if let Some(skip) = boundary {
            if i > start {
                out.push(Segment {
                    start,
                    end: if bytes[i] == b'.' { i + 1 } else { i },
                });
            }
            i += skip;
            start = i;
        } else {
            i += 1;
        }
    }
    if start < bytes.len() {
        out.push(Segment {
            start,
            end: bytes.len(),
        });
    }
    out
}

fn qty(value: f64, unit: Unit) -> Option<Quantity> {
    Quantity::new(value, unit).ok()
}

fn parse_num(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Extract every recognized numeric claim with its source span.
pub fn extract_claims(text: &str) -> Vec<NumericClaim> {
    claims_with_coverage(text).0
}

fn claims_with_coverage(text: &str) -> (Vec<NumericClaim>, Coverage) {
    let mut claims = Vec::new();
    let mut coverage = Coverage::default();
    // Operative deceleration magnitude, from the latest assumption or
    // deceleration claim; per-second speed claims are verified against it.
    let mut ctx_decel: Option<f64> = None;

    for seg in segments(text) {
        let s = &text[seg.start..seg.end];
        let has_digit = s.bytes().any(|b| b.is_ascii_digit());
        if has_digit {
            coverage.numeric_segments += 1;
        }
        let before = claims.len();
        let lower = s.to_lowercase();
        let assumption = lower.contains("assum");

        if assumption {
            // "a brake value of 1 results in a deceleration of 1 m/s^2"
            // states the brake model, not the plan deceleration.
            let brake_model_statement =
                lower.contains("brake value") && lower.contains("results in");
            if !brake_model_statement {
                if let Some(c) = ASSUMED_DECEL.captures(s) {
                    if let Some(v) = parse_num(&c[1]) {
                        ctx_decel = Some(v.abs());
                    }
                }
            }
        }

        extract_conversion(s, seg.start, &mut claims);
        if !assumption {
            extract_deceleration(s, seg.start, &mut claims, &mut ctx_decel);
        }
        extract_speed_at_time(s, seg.start, ctx_decel, &mut claims);
        extract_brake_value(s, seg.start, &mut claims);
        extract_distance(s, seg.start, &mut claims);
        if !assumption && (lower.contains("reach") || lower.contains("stop")) {
            extract_duration(s, seg.start, ctx_decel, &mut claims);
        }

        if has_digit && claims.len() > before {
            coverage.extracted_segments += 1;
        }
    }
    (claims, coverage)
}

/// `X km/h ... = Y m/s` (the last `= Y m/s` in the segment wins, so
/// chained equalities resolve to their final value).
fn extract_conversion(s: &str, offset: usize, claims: &mut Vec<NumericClaim>) {
    let Some(input) = KMH_INPUT.captures(s) else {
        return;
    };
    let input_end = input.get(0).unwrap().end();
    let Some(input_qty) = parse_num(&input[1]).and_then(|v| qty(v, Unit::KilometersPerHour))
    else {
        return;
    };
    let result = MS_RESULT
        .captures_iter(s)
        .filter(|c| c.get(2).is_none()) // skip m/s^2
        .filter(|c| c.get(0).unwrap().start() >= input_end)
        .last();
    let Some(result) = result else {
        return;
    };
    let raw = result[1].to_string();
    let Some(claimed) = parse_num(&raw).and_then(|v| qty(v, Unit::MetersPerSecond)) else {
        return;
    };
    claims.push(NumericClaim {
        kind: ClaimKind::Conversion,
        inputs: vec![input_qty],
        claimed,
        claimed_raw: raw,
        source_span: (
            offset + input.get(0).unwrap().start(),
            offset + result.get(0).unwrap().end(),
        ),
    });
}

/// Two statement shapes: `... = A m/s^2` with a `/ T s` division in the
/// same segment, and "decelerate at a rate of A m/s^2 [in T seconds]".
/// Rates of slowing stated as positive are normalized to negative.
fn extract_deceleration(
    s: &str,
    offset: usize,
    claims: &mut Vec<NumericClaim>,
    ctx_decel: &mut Option<f64>,
) {
    if let Some(dur) = DIV_SECONDS
        .captures_iter(s)
        .last()
        .and_then(|c| parse_num(&c[1]))
    {
        if let Some(m) = DECEL_EQ.captures_iter(s).last() {
            if let Some(v) = parse_num(&m[1]) {
                if let (Some(claimed), Some(dur_qty)) =
                    (qty(v, Unit::MetersPerSecondSquared), qty(dur, Unit::Seconds))
                {
                    *ctx_decel = Some(v.abs());
                    claims.push(NumericClaim {
                        kind: ClaimKind::Deceleration,
                        inputs: vec![dur_qty],
                        claimed,
                        claimed_raw: m[1].to_string(),
                        source_span: (
                            offset + m.get(0).unwrap().start(),
                            offset + m.get(0).unwrap().end(),
                        ),
                    });
                }
            }
        }
    }
    if let Some(m) = DECEL_RATE.captures(s) {
        if let Some(v) = parse_num(&m[1]) {
            let signed = -v.abs();
            let mut inputs = Vec::new();
            if let Some(dur) = IN_SECONDS.captures(s).and_then(|c| parse_num(&c[1])) {
                if let Some(q) = qty(dur, Unit::Seconds) {
                    inputs.push(q);
                }
            }
            if let Some(claimed) = qty(signed, Unit::MetersPerSecondSquared) {
                *ctx_decel = Some(v.abs());
                claims.push(NumericClaim {
                    kind: ClaimKind::Deceleration,
                    inputs,
                    claimed,
                    claimed_raw: m[1].to_string(),
                    source_span: (
                        offset + m.get(0).unwrap().start(),
                        offset + m.get(0).unwrap().end(),
                    ),
                });
            }
        }
    }
}

/// `v_k = ... = X km/h`, `At t = k, v = X m/s`, and `t=k -> X m/s` forms.
/// The operative deceleration travels with the claim as an input so the
/// verifier can recompute the per-second speed.
fn extract_speed_at_time(
    s: &str,
    offset: usize,
    ctx_decel: Option<f64>,
    claims: &mut Vec<NumericClaim>,
) {
    let mut push = |t: f64, raw: &str, unit: Unit, span: (usize, usize)| {
        let Some(v) = parse_num(raw) else { return };
        let Some(claimed) = qty(v, unit) else { return };
        let mut inputs = vec![];
        if let Some(q) = qty(t, Unit::Seconds) {
            inputs.push(q);
        }
        if let Some(d) = ctx_decel.and_then(|d| qty(d, Unit::MetersPerSecondSquared)) {
            inputs.push(d);
        }
        claims.push(NumericClaim {
            kind: ClaimKind::SpeedAtTime,
            inputs,
            claimed,
            claimed_raw: raw.to_string(),
            source_span: span,
        });
    };

    if let Some(sub) = SUBSCRIPT_SPEED.captures(s) {
        let k = parse_num(&sub[1]);
        let value = SPEED_VALUE
            .captures_iter(s)
            .filter(|c| c.get(3).is_none()) // not m/s^2
            .filter(|c| c.get(0).unwrap().start() >= sub.get(0).unwrap().end())
            .last();
        if let (Some(k), Some(value)) = (k, value) {
            let unit = unit_from_suffix(&value[2]);
            push(
                k,
                &value[1].to_string(),
                unit,
                (
                    offset + sub.get(0).unwrap().start(),
                    offset + value.get(0).unwrap().end(),
                ),
            );
        }
    }
    for c in AT_T_SPEED.captures_iter(s) {
        if let Some(t) = parse_num(&c[1]) {
            let unit = unit_from_suffix(&c[3]);
            push(
                t,
                &c[2].to_string(),
                unit,
                (
                    offset + c.get(0).unwrap().start(),
                    offset + c.get(0).unwrap().end(),
                ),
            );
        }
    }
    for c in ARROW_SPEED.captures_iter(s) {
        if let Some(t) = parse_num(&c[1]) {
            let unit = unit_from_suffix(&c[3]);
            push(
                t,
                &c[2].to_string(),
                unit,
                (
                    offset + c.get(0).unwrap().start(),
                    offset + c.get(0).unwrap().end(),
                ),
            );
        }
    }
}

fn unit_from_suffix(suffix: &str) -> Unit {
    match suffix {
        "km/h" => Unit::KilometersPerHour,
        _ => Unit::MetersPerSecond,
    }
}

/// "a brake value of X for each of the T seconds" / "apply a brake value
/// of X". The bare form "brake value of 1 results in ..." is the brake
/// model statement and is not a claim.
fn extract_brake_value(s: &str, offset: usize, claims: &mut Vec<NumericClaim>) {
    if let Some(c) = BRAKE_FOR_EACH.captures(s) {
        let (Some(v), Some(dur)) = (parse_num(&c[1]), parse_num(&c[2])) else {
            return;
        };
        let (Some(claimed), Some(dur_qty)) =
            (qty(v, Unit::Dimensionless), qty(dur, Unit::Seconds))
        else {
            return;
        };
        claims.push(NumericClaim {
            kind: ClaimKind::BrakeValue,
            inputs: vec![dur_qty],
            claimed,
            claimed_raw: c[1].to_string(),
            source_span: (
                offset + c.get(0).unwrap().start(),
                offset + c.get(0).unwrap().end(),
            ),
        });
    } else if let Some(c) = BRAKE_APPLY.captures(s) {
        let Some(claimed) = parse_num(&c[1]).and_then(|v| qty(v, Unit::Dimensionless)) else {
            return;
        };
        claims.push(NumericClaim {
            kind: ClaimKind::BrakeValue,
            inputs: vec![],
            claimed,
            claimed_raw: c[1].to_string(),
            source_span: (
                offset + c.get(0).unwrap().start(),
                offset + c.get(0).unwrap().end(),
            ),
        });
    }
}

/// "approximately X meters away".
fn extract_distance(s: &str, offset: usize, claims: &mut Vec<NumericClaim>) {
    for c in DISTANCE_AWAY.captures_iter(s) {
        let Some(claimed) = parse_num(&c[1]).and_then(|v| qty(v, Unit::Meters)) else {
            continue;
        };
        claims.push(NumericClaim {
            kind: ClaimKind::Distance,
            inputs: vec![],
            claimed,
            claimed_raw: c[1].to_string(),
            source_span: (
                offset + c.get(0).unwrap().start(),
                offset + c.get(0).unwrap().end(),
            ),
        });
    }
}

/// "... reach the speed limit in T seconds" (outside assumptions).
fn extract_duration(
    s: &str,
    offset: usize,
    ctx_decel: Option<f64>,
    claims: &mut Vec<NumericClaim>,
) {
    let Some(c) = IN_SECONDS.captures(s) else {
        return;
    };
    let Some(claimed) = parse_num(&c[1]).and_then(|v| qty(v, Unit::Seconds)) else {
        return;
    };
    let mut inputs = vec![];
    if let Some(d) = ctx_decel.and_then(|d| qty(d, Unit::MetersPerSecondSquared)) {
        inputs.push(d);
    }
    claims.push(NumericClaim {
        kind: ClaimKind::Duration,
        inputs,
        claimed,
        claimed_raw: c[1].to_string(),
        source_span: (
            offset + c.get(0).unwrap().start(),
            offset + c.get(0).unwrap().end(),
        ),
    });
}

// ---------------------------------------------------------------------------
// Advisories
// ---------------------------------------------------------------------------

/// Segment numbered items (`N.` at line start, emphasis markers stripped,
/// title up to the first colon). Indices must strictly increase; a restart
/// folds into the open item's body instead of starting a new list.
pub fn extract_advisories(text: &str) -> Vec<Advisory> {
    let mut advisories: Vec<Advisory> = Vec::new();
    let mut last_index = 0usize;

    for line in text.lines() {
        if let Some((index, rest)) = advisory_start(line) {
            if index > last_index {
                last_index = index;
                let cleaned = rest.replace("**", "").replace("__", "");
                let (title, body) = match cleaned.split_once(':') {
                    Some((t, b)) => (t.trim().to_string(), b.trim().to_string()),
                    None => (cleaned.trim().to_string(), String::new()),
                };
                advisories.push(Advisory { index, title, body });
                continue;
            }
        }
        if let Some(open) = advisories.last_mut() {
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                if !open.body.is_empty() {
                    open.body.push('\n');
                }
                open.body.push_str(trimmed);
            }
        }
    }
    advisories
}

/// Match `N.` at line start followed by whitespace or emphasis, so decimal
/// numbers at line starts ("0.2889 ...") are not mistaken for items.
fn advisory_start(line: &str) -> Option<(usize, &str)> {
    static ITEM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*([0-9]+)\.(.*)$").unwrap());
    let c = ITEM.captures(line)?;
    let rest = c.get(2).unwrap().as_str();
    if !(rest.starts_with("**") || rest.starts_with(char::is_whitespace)) {
        return None;
    }
    let index: usize = c[1].parse().ok()?;
    Some((index, rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn hybrid_fixture_control_lists() {
        let schedule = extract_control_lists(fixtures::HYBRID_RAINY_ANSWER)
            .unwrap()
            .unwrap();
        assert_eq!(schedule.brake_entries, vec![0.2889; 5]);
        assert_eq!(
            schedule.speed_entries,
            vec![44.9388, 44.6499, 44.3610, 44.0721]
        );
        assert!(schedule.truncated);
        assert_eq!(
            schedule.speed_interpretation,
            Some(SpeedInterpretation::TargetSpeedKmh)
        );
        assert!(schedule.range_violations.is_empty());
    }

    #[test]
    fn no_lists_yields_none() {
        assert_eq!(extract_control_lists("slow down please").unwrap(), None);
        // A prose mention without a bracket is not a list either.
        assert_eq!(
            extract_control_lists("The BRAKE_LIST would depend on your car.").unwrap(),
            None
        );
    }

    #[test]
    fn alternate_list_name_and_assignment() {
        let schedule = extract_control_lists("BRAKE_CONTROL = [0.1, 0.2]")
            .unwrap()
            .unwrap();
        assert_eq!(schedule.brake_entries, vec![0.1, 0.2]);
        assert!(schedule.speed_entries.is_empty());
        assert_eq!(schedule.speed_interpretation, None);
        assert!(!schedule.truncated);
    }

    #[test]
    fn malformed_bracket_is_an_error_with_span() {
        let text = "BRAKE_LIST = [0.1, oops]";
        let err = extract_control_lists(text).unwrap_err();
        match err {
            ParseError::MalformedList { name, span, .. } => {
                assert_eq!(name, "BRAKE_LIST");
                assert!(span.0 < span.1);
            }
        }
        assert!(extract_control_lists("SPEED_LIST [1.0, 2.0").is_err());
    }

    #[test]
    fn last_bracketed_occurrence_wins() {
        let text = "SPEED_CONTROL = [1.0, 2.0]\nlater restated: SPEED_CONTROL = [3.0, 4.0]";
        let schedule = extract_control_lists(text).unwrap().unwrap();
        assert_eq!(schedule.speed_entries, vec![3.0, 4.0]);
    }

    #[test]
    fn classify_entries() {
        assert_eq!(
            classify_speed_entries(&[44.9388, 44.6499]),
            SpeedInterpretation::TargetSpeedKmh
        );
        assert_eq!(
            classify_speed_entries(&[0.3, 0.3, 0.2]),
            SpeedInterpretation::ThrottleFraction
        );
        assert_eq!(
            classify_speed_entries(&[0.5, 44.0]),
            SpeedInterpretation::Ambiguous
        );
    }

    #[test]
    fn brake_range_violation_recorded() {
        let schedule = extract_control_lists("BRAKE_LIST = [0.5, 1.5]")
            .unwrap()
            .unwrap();
        assert_eq!(schedule.range_violations.len(), 1);
        assert_eq!(schedule.range_violations[0].index, 1);
    }

    #[test]
    fn arithmetic_fixture_claims() {
        let claims = extract_claims(fixtures::ARITHMETIC_RAINY_ANSWER);
        let conversions: Vec<_> = claims
            .iter()
            .filter(|c| c.kind == ClaimKind::Conversion)
            .collect();
        assert_eq!(conversions.len(), 3);
        // The speed-limit conversion from the reply: 40 km/h -> 11.1111 m/s.
        assert!(conversions
            .iter()
            .any(|c| c.inputs[0].value == 40.0 && c.claimed.value == 11.1111));
        let speeds: Vec<_> = claims
            .iter()
            .filter(|c| c.kind == ClaimKind::SpeedAtTime)
            .collect();
        assert_eq!(speeds.len(), 3);
        assert!(speeds
            .iter()
            .any(|c| c.inputs[0].value == 2.0 && c.claimed.value == 8.1945));
        // The assumed 1 m/s^2 is context, not a claim.
        assert!(claims.iter().all(|c| c.kind != ClaimKind::Deceleration));
        // And the speed claims carry that context as an input.
        for s in &speeds {
            assert!(s
                .inputs
                .iter()
                .any(|q| q.unit == Unit::MetersPerSecondSquared && q.value == 1.0));
        }
    }

    #[test]
    fn hybrid_fixture_claims() {
        let claims = extract_claims(fixtures::HYBRID_RAINY_ANSWER);
        let decels: Vec<_> = claims
            .iter()
            .filter(|c| c.kind == ClaimKind::Deceleration)
            .collect();
        assert_eq!(decels.len(), 2);
        assert_eq!(decels[0].claimed.value, -0.28889999999999993);
        assert_eq!(decels[0].inputs[0].value, 5.0);
        assert_eq!(decels[1].claimed.value, -0.2889);

        let speeds: Vec<_> = claims
            .iter()
            .filter(|c| c.kind == ClaimKind::SpeedAtTime)
            .collect();
        assert_eq!(speeds.len(), 3);
        assert_eq!(speeds[0].claimed.value, 44.9388);
        assert_eq!(speeds[0].claimed.unit, Unit::KilometersPerHour);
        // Context deceleration is the reply's 0.2889, not the earlier float.
        assert!(speeds[0]
            .inputs
            .iter()
            .any(|q| q.unit == Unit::MetersPerSecondSquared && q.value == 0.2889));

        let brakes: Vec<_> = claims
            .iter()
            .filter(|c| c.kind == ClaimKind::BrakeValue)
            .collect();
        assert_eq!(brakes.len(), 1);
        assert_eq!(brakes[0].claimed.value, 0.2889);
        assert_eq!(brakes[0].inputs[0].value, 5.0);
    }

    #[test]
    fn empty_text_no_claims() {
        assert!(extract_claims("").is_empty());
    }

    #[test]
    fn claim_spans_contain_their_numerals() {
        for text in [
            fixtures::COMMON_SENSE_RAINY_ANSWER,
            fixtures::ARITHMETIC_RAINY_ANSWER,
            fixtures::HYBRID_RAINY_ANSWER,
        ] {
            for claim in extract_claims(text) {
                let (a, b) = claim.source_span;
                let slice = &text[a..b];
                assert!(
                    slice.contains(&claim.claimed_raw),
                    "span {slice:?} missing numeral {:?}",
                    claim.claimed_raw
                );
            }
        }
    }

    #[test]
    fn common_sense_fixture_advisories() {
        let advisories = extract_advisories(fixtures::COMMON_SENSE_RAINY_ANSWER);
        assert_eq!(advisories.len(), 8);
        assert_eq!(advisories[0].title, "Reduce Speed");
        assert_eq!(advisories[4].title, "Use Windshield Wipers and Defrosters");
        assert_eq!(advisories[7].title, "Avoid Sudden Movements");
        for (i, a) in advisories.iter().enumerate() {
            assert_eq!(a.index, i + 1);
        }
    }

    #[test]
    fn unnumbered_prose_has_no_advisories() {
        assert!(extract_advisories("Just drive carefully out there.").is_empty());
    }

    #[test]
    fn minimal_numbered_items() {
        let advisories = extract_advisories("1. A\n2. B");
        assert_eq!(advisories.len(), 2);
        assert_eq!(advisories[0].title, "A");
        assert_eq!(advisories[1].title, "B");
    }

    #[test]
    fn decimal_line_start_is_not_an_advisory() {
        assert!(extract_advisories("0.2889 is the brake value").is_empty());
        assert!(extract_advisories("2.5 seconds of headway").is_empty());
    }

    #[test]
    fn extraction_is_deterministic() {
        let a = extract_all(fixtures::HYBRID_RAINY_ANSWER);
        let b = extract_all(fixtures::HYBRID_RAINY_ANSWER);
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_counts_numeric_segments() {
        let e = extract_all(fixtures::ARITHMETIC_RAINY_ANSWER);
        assert!(e.coverage.numeric_segments >= e.coverage.extracted_segments);
        assert!(e.coverage.extracted_segments > 0);
    }

    #[test]
    fn conversion_with_is_approximately() {
        let claims = extract_claims("1 km/h is approximately 0.277778 m/s");
        assert_eq!(claims.len(), 1);
        assert_eq!(claims[0].kind, ClaimKind::Conversion);
        assert_eq!(claims[0].inputs[0].value, 1.0);
        assert_eq!(claims[0].claimed.value, 0.277778);
    }
}
