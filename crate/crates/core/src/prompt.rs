//! Prompt rendering.
//!
//! Three template families, one per reasoning kind: the base situation
//! prompt, the base plus a request for per-second speeds with the math
//! spelled out, and that plus a request for explicit SPEED_CONTROL and
//! BRAKE_CONTROL lists. Numeric fields render at full precision so the
//! model sees exactly the recorded sensor values.

use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{ReasoningKind, Scenario, WeatherPreset};

const PROMPT1: &str = include_str!("../templates/prompt1.txt");
const PROMPT2_EXT: &str = include_str!("../templates/prompt2_ext.txt");
const PROMPT3_EXT: &str = include_str!("../templates/prompt3_ext.txt");

/// The weather clause only exists verbatim for the rainy preset; the other
/// two are harness-authored and pinned by golden tests.
pub const RAINY_CLAUSE: &str =
    "fully cloudy and foggy conditions without sunlight, experiencing heavy precipitation";
pub const SUNNY_CLAUSE: &str = "clear sunny conditions with full visibility";
pub const PARTLY_SUNNY_CLAUSE: &str = "partly sunny conditions with light cloud cover";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("scenario {scenario_id} has no primary detection")]
    MissingPrimaryDetection { scenario_id: String },
    #[error("no weather clause for preset {0:?}")]
    UnknownWeather(String),
    #[error("unresolved placeholder {placeholder} after rendering")]
    UnresolvedPlaceholder { placeholder: String },
    #[error("template dir {dir}: {source}")]
    TemplateIo {
        dir: String,
        #[source]
        source: std::io::Error,
    },
}

/// A template body with `{name}` placeholders for one reasoning kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub reasoning_kind: ReasoningKind,
    pub body: String,
}

/// Prompt text rendered for a concrete scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub scenario_id: String,
    pub reasoning_kind: ReasoningKind,
    pub text: String,
    pub rendered_at: String,
}

/// Clause describing the weather, matched by preset name (field values do
/// not participate in the lookup).
pub fn weather_clause(w: &WeatherPreset) -> Result<&'static str, PromptError> {
    match w.name.as_str() {
        "rainy" => Ok(RAINY_CLAUSE),
        "sunny" => Ok(SUNNY_CLAUSE),
        "partly_sunny" => Ok(PARTLY_SUNNY_CLAUSE),
        other => Err(PromptError::UnknownWeather(other.to_string())),
    }
}

/// Holds the three composed templates. The arithmetic template is the base
/// plus the per-second-speed extension; the hybrid template extends that
/// with the control-list request.
#[derive(Debug, Clone)]
pub struct PromptLibrary {
    templates: [PromptTemplate; 3],
}

impl PromptLibrary {
    pub fn builtin() -> Self {
        Self::compose(PROMPT1, PROMPT2_EXT, PROMPT3_EXT)
    }

    /// Load `prompt1.txt`, `prompt2_ext.txt`, `prompt3_ext.txt` from a
    /// directory, e.g. for per-run template overrides.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, PromptError> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            fs::read_to_string(dir.join(name)).map_err(|source| PromptError::TemplateIo {
                dir: dir.display().to_string(),
                source,
            })
        };
        Ok(Self::compose(
            &read("prompt1.txt")?,
            &read("prompt2_ext.txt")?,
            &read("prompt3_ext.txt")?,
        ))
    }

    fn compose(p1: &str, p2_ext: &str, p3_ext: &str) -> Self {
        let base = p1.trim_end().to_string();
        let arithmetic = format!("{base}\n\n{}", p2_ext.trim_end());
        let hybrid = format!("{arithmetic}\n\n{}", p3_ext.trim_end());
        Self {
            templates: [
                PromptTemplate {
                    reasoning_kind: ReasoningKind::CommonSense,
                    body: base,
                },
                PromptTemplate {
                    reasoning_kind: ReasoningKind::Arithmetic,
                    body: arithmetic,
                },
                PromptTemplate {
                    reasoning_kind: ReasoningKind::Hybrid,
                    body: hybrid,
                },
            ],
        }
    }

    pub fn template(&self, kind: ReasoningKind) -> &PromptTemplate {
        self.templates
            .iter()
            .find(|t| t.reasoning_kind == kind)
            .expect("all kinds present")
    }

    /// Render the scenario into its reasoning kind's template.
    pub fn render(&self, s: &Scenario) -> Result<RenderedPrompt, PromptError> {
        let detection =
            s.primary_detection()
                .ok_or_else(|| PromptError::MissingPrimaryDetection {
                    scenario_id: s.id.clone(),
                })?;
        let clause = weather_clause(&s.weather)?;
        let body = &self.template(s.reasoning_kind).body;
        let text = body
            .replace("{weather_clause}", clause)
            .replace("{current_speed}", &s.ego.speed_kmh.to_string())
            .replace("{detected_object}", &detection.object_class.to_string())
            .replace("{confidence}", &detection.confidence_pct.to_string())
            .replace("{distance}", &detection.distance_m.to_string())
            .replace("{location}", &detection.relative_location.to_string())
            .replace("{direction}", &s.ego.heading);

        static PLACEHOLDER: LazyLock<Regex> =
            LazyLock::new(|| Regex::new(r"\{[a-z_]+\}").unwrap());
        if let Some(m) = PLACEHOLDER.find(&text) {
            return Err(PromptError::UnresolvedPlaceholder {
                placeholder: m.as_str().to_string(),
            });
        }

        Ok(RenderedPrompt {
            scenario_id: s.id.clone(),
            reasoning_kind: s.reasoning_kind,
            text,
            rendered_at: chrono::Utc::now().to_rfc3339(),
        })
    }
}

impl Default for PromptLibrary {
    fn default() -> Self {
        Self::builtin()
    }
}
