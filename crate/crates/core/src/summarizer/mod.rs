//! Mode selection and prompt construction.
//!
//! The article count picks the mode: 1 to 5 articles get a single-paragraph
//! concise summary, 6 to 20 a literature review of 3-4 paragraphs. The user
//! message lists the query and then one numbered block per article, in the
//! caller's order, so that `[k]` in the output refers to the k-th article.
//!
//! Prompt size is bounded by a token budget estimated at four characters per
//! token. The system prompt, query and titles are never shortened; whatever
//! budget remains is split evenly between the abstracts.

mod templates;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::estimate_tokens;

pub use templates::{PromptTemplates, TemplateError, DEFAULT_TEMPLATES, RULE_FAMILIES};

pub const MIN_ARTICLES: usize = 1;
pub const MAX_ARTICLES: usize = 20;
/// Largest article count summarized in concise mode.
pub const CONCISE_MAX: usize = 5;
pub const DEFAULT_BUDGET_TOKENS: usize = 12_000;
/// Minimum budget per article accepted by [`build_prompt`].
pub const MIN_TOKENS_PER_ARTICLE: usize = 64;
pub const TRUNCATION_MARKER: &str = "[truncated]";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SummarizeError {
    #[error("article count {0} is outside 1..=20")]
    OutOfRange(usize),
    #[error("duplicate article id {0:?}")]
    DuplicateId(String),
    #[error("article {0} has an empty title")]
    EmptyTitle(usize),
    #[error("token budget {budget} is too small: at least {required} needed")]
    BudgetTooSmall { budget: usize, required: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMode {
    Concise,
    LitReview,
}

impl SummaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SummaryMode::Concise => "concise",
            SummaryMode::LitReview => "lit_review",
        }
    }

    /// Entry name in the template file.
    pub fn template_key(self) -> &'static str {
        match self {
            SummaryMode::Concise => "concise",
            SummaryMode::LitReview => "lit-review",
        }
    }
}

impl fmt::Display for SummaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SummaryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "concise" => Ok(SummaryMode::Concise),
            "lit_review" | "lit-review" => Ok(SummaryMode::LitReview),
            other => Err(format!("unknown summary mode {other:?}")),
        }
    }
}

pub fn select_mode(n: usize) -> Result<SummaryMode, SummarizeError> {
    match n {
        MIN_ARTICLES..=CONCISE_MAX => Ok(SummaryMode::Concise),
        6..=MAX_ARTICLES => Ok(SummaryMode::LitReview),
        _ => Err(SummarizeError::OutOfRange(n)),
    }
}

/// One article as supplied by the client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceArticle {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
}

impl SourceArticle {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            abstract_text: abstract_text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRequest {
    #[serde(default)]
    pub query: String,
    pub articles: Vec<SourceArticle>,
}

impl SummaryRequest {
    pub fn validate(&self) -> Result<SummaryMode, SummarizeError> {
        let mode = select_mode(self.articles.len())?;
        let mut seen = HashSet::with_capacity(self.articles.len());
        for (i, a) in self.articles.iter().enumerate() {
            if !seen.insert(a.id.as_str()) {
                return Err(SummarizeError::DuplicateId(a.id.clone()));
            }
            if a.title.trim().is_empty() {
                return Err(SummarizeError::EmptyTitle(i + 1));
            }
        }
        Ok(mode)
    }
}

/// A document exactly as it appears in the user message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptDocument {
    pub index: usize,
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
}

impl PromptDocument {
    fn block(&self) -> String {
        format!("[{}] {}\n{}", self.index, self.title, self.abstract_text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub mode: SummaryMode,
    pub system_prompt: String,
    pub user_message: String,
    pub documents: Vec<PromptDocument>,
    pub estimated_tokens: usize,
    pub truncation_applied: bool,
}

fn render_user_message(query: &str, documents: &[PromptDocument]) -> String {
    let blocks: Vec<String> = documents.iter().map(PromptDocument::block).collect();
    format!(
        "Query: {}\n\nArticles:\n\n{}",
        query.trim(),
        blocks.join("\n\n")
    )
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

pub fn build_prompt(
    request: &SummaryRequest,
    budget_tokens: usize,
    templates: &PromptTemplates,
) -> Result<PromptBundle, SummarizeError> {
    let mode = request.validate()?;
    let n = request.articles.len();
    let floor = MIN_TOKENS_PER_ARTICLE * n;
    if budget_tokens < floor {
        return Err(SummarizeError::BudgetTooSmall {
            budget: budget_tokens,
            required: floor,
        });
    }

    let system_prompt = templates.render(mode, n);
    let mut documents: Vec<PromptDocument> = request
        .articles
        .iter()
        .enumerate()
        .map(|(i, a)| PromptDocument {
            index: i + 1,
            id: a.id.clone(),
            title: a.title.clone(),
            abstract_text: a.abstract_text.clone(),
        })
        .collect();

    let abstract_chars: Vec<usize> = documents
        .iter()
        .map(|d| char_len(&d.abstract_text))
        .collect();
    let full_chars =
        char_len(&system_prompt) + char_len(&render_user_message(&request.query, &documents));
    let overhead_chars = full_chars - abstract_chars.iter().sum::<usize>();
    let budget_chars = budget_tokens.saturating_mul(4);

    let mut truncation_applied = false;
    if full_chars > budget_chars {
        if overhead_chars > budget_chars {
            return Err(SummarizeError::BudgetTooSmall {
                budget: budget_tokens,
                required: estimate_tokens(overhead_chars),
            });
        }
        let quota = (budget_chars - overhead_chars) / n;
        for (doc, len) in documents.iter_mut().zip(abstract_chars) {
            if len > quota {
                doc.abstract_text = truncate_abstract(&doc.abstract_text, quota);
                truncation_applied = true;
            }
        }
    }

    let user_message = render_user_message(&request.query, &documents);
    let estimated_tokens = estimate_tokens(char_len(&system_prompt) + char_len(&user_message));
    debug_assert!(estimated_tokens <= budget_tokens);

    Ok(PromptBundle {
        mode,
        system_prompt,
        user_message,
        documents,
        estimated_tokens,
        truncation_applied,
    })
}

/// Shortens `text` to at most `quota` characters, ending in the truncation
/// marker. Cuts after the last sentence that fits, else mid-text.
pub fn truncate_abstract(text: &str, quota: usize) -> String {
    let marker_len = TRUNCATION_MARKER.len();
    if quota < marker_len + 1 {
        return if quota >= marker_len {
            TRUNCATION_MARKER.to_string()
        } else {
            String::new()
        };
    }
    let room = quota - marker_len - 1;
    let chars: Vec<char> = text.chars().collect();
    let prefix = &chars[..room.min(chars.len())];

    let sentence_end = (0..prefix.len()).rev().find(|&i| {
        matches!(prefix[i], '.' | '!' | '?') && chars.get(i + 1).is_none_or(|c| c.is_whitespace())
    });
    let kept: String = match sentence_end {
        Some(i) => prefix[..=i].iter().collect(),
        None => prefix.iter().collect(),
    };
    let kept = kept.trim_end();
    if kept.is_empty() {
        TRUNCATION_MARKER.to_string()
    } else {
        format!("{kept} {TRUNCATION_MARKER}")
    }
}
