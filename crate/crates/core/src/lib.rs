//! Impact-ranked scholarly search with citation-grounded multi-document
//! summarization.
//!
//! The flow mirrors how a researcher works: [`ranking::search`] narrows and
//! orders a [`corpus`] by an impact aspect, the user keeps the top results,
//! [`summarizer::build_prompt`] turns them into a numbered prompt for one of
//! two modes, an [`llm`] backend writes the summary, and [`validator`] checks
//! the output for citation range, coverage, structure and lexical grounding.

pub mod corpus;
pub mod llm;
pub mod pipeline;
pub mod ranking;
pub mod service;
pub mod summarizer;
pub mod text;
pub mod validator;

pub use corpus::{ingest, Article, CitationEvent, CorpusError, CorpusSnapshot, DocType};
pub use llm::{Backend, GenerationOutcome, LlmClient, LlmConfig, LlmError};
pub use pipeline::{Reference, SummarizeResponse, SummaryPipeline};
pub use ranking::{search, Ordering, RankedResult, SearchPage, SearchRequest};
pub use summarizer::{
    build_prompt, select_mode, PromptBundle, PromptTemplates, SourceArticle, SummaryMode,
    SummaryRequest,
};
pub use validator::{parse_citations, split_sentences, validate, Thresholds, ValidationReport};
