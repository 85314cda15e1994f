//! The summarize flow shared by the HTTP service and the CLI:
//! build the prompt, generate, validate, and assemble the response.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::llm::{LlmClient, LlmError};
use crate::summarizer::{
    build_prompt, PromptTemplates, SummarizeError, SummaryMode, SummaryRequest,
    DEFAULT_BUDGET_TOKENS,
};
use crate::validator::{validate, Thresholds, ValidationReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Request(#[from] SummarizeError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reference {
    pub index: usize,
    pub id: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummarizeResponse {
    pub summary: String,
    pub mode: SummaryMode,
    pub references: Vec<Reference>,
    pub validation: ValidationReport,
    pub model_id: String,
    pub truncation_applied: bool,
    pub latency_ms: u64,
}

impl SummarizeResponse {
    /// Summary followed by a reference block, one `[k] title (id)` per line.
    pub fn render_text(&self) -> String {
        let mut out = String::with_capacity(self.summary.len() + 64 * self.references.len());
        out.push_str(self.summary.trim_end());
        out.push_str("\n\nReferences\n");
        for r in &self.references {
            out.push_str(&format!("[{}] {} ({})\n", r.index, r.title, r.id));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SummaryPipeline {
    pub templates: PromptTemplates,
    pub budget_tokens: usize,
    pub thresholds: Thresholds,
    pub llm: LlmClient,
}

impl SummaryPipeline {
    pub fn new(llm: LlmClient) -> Self {
        Self {
            templates: PromptTemplates::default(),
            budget_tokens: DEFAULT_BUDGET_TOKENS,
            thresholds: Thresholds::default(),
            llm,
        }
    }

    /// Runs the full flow. A failing validation report does not make this an
    /// error; the caller decides how to present it.
    pub async fn run(&self, request: &SummaryRequest) -> Result<SummarizeResponse, PipelineError> {
        let started = Instant::now();
        let bundle = build_prompt(request, self.budget_tokens, &self.templates)?;
        let outcome = self.llm.complete(&bundle).await?;
        if outcome.text.trim().is_empty() {
            return Err(LlmError::InvalidResponse("empty completion".into()).into());
        }

        let sources: Vec<(&str, &str)> = bundle
            .documents
            .iter()
            .map(|d| (d.title.as_str(), d.abstract_text.as_str()))
            .collect();
        let validation = validate(
            &outcome.text,
            bundle.documents.len(),
            bundle.mode,
            &sources,
            self.thresholds,
        )
        .expect("text and source count were checked above");

        let references = bundle
            .documents
            .iter()
            .map(|d| Reference {
                index: d.index,
                id: d.id.clone(),
                title: d.title.clone(),
            })
            .collect();

        Ok(SummarizeResponse {
            summary: outcome.text,
            mode: bundle.mode,
            references,
            validation,
            model_id: outcome.model_id,
            truncation_applied: bundle.truncation_applied,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}
