//! System prompt templates and their startup validation.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::SummaryMode;

/// The bundled template file.
pub const DEFAULT_TEMPLATES: &str = include_str!("../../templates/system_prompts.toml");

/// Rule families every system prompt must express.
pub const RULE_FAMILIES: [&str; 4] = ["citation", "grounding", "structure", "tone"];

const COUNT_PLACEHOLDER: &str = "{count}";

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("cannot read template file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed template file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("template file declares no marker for rule family {0:?}")]
    MissingFamily(&'static str),
    #[error("template file has no {0:?} prompt")]
    MissingEntry(&'static str),
    #[error("prompt {entry:?} lacks the {family} rule (marker {marker:?})")]
    MissingRule {
        entry: &'static str,
        family: &'static str,
        marker: String,
    },
}

#[derive(Debug, Deserialize)]
struct TemplateFile {
    markers: BTreeMap<String, String>,
    prompts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    concise: String,
    lit_review: String,
}

impl PromptTemplates {
    pub fn from_toml_str(text: &str) -> Result<Self, TemplateError> {
        let file: TemplateFile = toml::from_str(text)?;

        let mut markers = Vec::with_capacity(RULE_FAMILIES.len());
        for family in RULE_FAMILIES {
            match file.markers.get(family) {
                Some(m) if !m.trim().is_empty() => markers.push((family, m.clone())),
                _ => return Err(TemplateError::MissingFamily(family)),
            }
        }

        let entry = |name: &'static str| -> Result<String, TemplateError> {
            let body = file
                .prompts
                .get(name)
                .map(|s| s.trim().to_string())
                .ok_or(TemplateError::MissingEntry(name))?;
            for (family, marker) in &markers {
                if !body.contains(marker.as_str()) {
                    return Err(TemplateError::MissingRule {
                        entry: name,
                        family,
                        marker: marker.clone(),
                    });
                }
            }
            Ok(body)
        };

        Ok(Self {
            concise: entry(SummaryMode::Concise.template_key())?,
            lit_review: entry(SummaryMode::LitReview.template_key())?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TemplateError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// The system prompt for `mode`, with the article count filled in.
    pub fn render(&self, mode: SummaryMode, count: usize) -> String {
        let raw = match mode {
            SummaryMode::Concise => &self.concise,
            SummaryMode::LitReview => &self.lit_review,
        };
        raw.replace(COUNT_PLACEHOLDER, &count.to_string())
    }
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_templates_validate() {
        let t = PromptTemplates::default();
        let lit = t.render(SummaryMode::LitReview, 7);
        assert!(lit.contains("3-4 paragraphs"));
        assert!(lit.contains("7 numbered"));
        assert!(t
            .render(SummaryMode::Concise, 2)
            .contains("exactly one paragraph"));
    }

    #[test]
    fn rejects_prompt_missing_a_rule() {
        let text = DEFAULT_TEMPLATES.replacen("TONE RULE:", "STYLE:", 1);
        match PromptTemplates::from_toml_str(&text) {
            Err(TemplateError::MissingRule { entry, family, .. }) => {
                assert_eq!(entry, "concise");
                assert_eq!(family, "tone");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_missing_family_and_entry() {
        let text = DEFAULT_TEMPLATES.replace("grounding = \"GROUNDING RULE:\"\n", "");
        assert!(matches!(
            PromptTemplates::from_toml_str(&text),
            Err(TemplateError::MissingFamily("grounding"))
        ));
        let text = DEFAULT_TEMPLATES.replace("lit-review = ", "lit_review_old = ");
        assert!(matches!(
            PromptTemplates::from_toml_str(&text),
            Err(TemplateError::MissingEntry("lit-review"))
        ));
        assert!(matches!(
            PromptTemplates::from_toml_str("not = [valid"),
            Err(TemplateError::Parse(_))
        ));
    }
}
