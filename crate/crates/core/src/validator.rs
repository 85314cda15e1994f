//! Post-hoc checks of generated summaries against the prompt contract.
//!
//! A "claim" is approximated by a sentence. Coverage is the share of
//! sentences carrying at least one in-range `[k]` citation. Out-of-range
//! citations and coverage below the fail threshold are hard failures; paragraph
//! structure, unused sources and low lexical grounding are reported as
//! warnings only.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::summarizer::SummaryMode;
use crate::text::tokens;

pub const DEFAULT_FAIL_THRESHOLD: f64 = 0.6;
pub const DEFAULT_GROUNDING_THRESHOLD: f64 = 0.3;
/// Shortest word (in characters) that counts as a content word.
pub const MIN_CONTENT_WORD_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("invalid validation arguments: {0}")]
    InvalidArgs(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub fail: f64,
    pub grounding: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            fail: DEFAULT_FAIL_THRESHOLD,
            grounding: DEFAULT_GROUNDING_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CitationOccurrence {
    pub index: u64,
    /// Offset of the opening bracket, in characters.
    pub char_offset: usize,
    pub sentence_ordinal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundingWarning {
    pub sentence_ordinal: usize,
    pub overlap_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hard_pass: bool,
    pub out_of_range: Vec<u64>,
    pub sentence_count: usize,
    pub cited_sentence_count: usize,
    pub coverage: f64,
    pub unused_sources: Vec<usize>,
    pub paragraph_count: usize,
    pub structure_ok: bool,
    pub grounding_warnings: Vec<GroundingWarning>,
}

/// A sentence as a half-open character range into the original text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Span {
    start: usize,
    end: usize,
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Index of the first character after a blank line starting at `i`
/// (a newline, optional whitespace, another newline), if there is one.
fn blank_line_end(chars: &[char], i: usize) -> Option<usize> {
    if chars[i] != '\n' {
        return None;
    }
    let mut j = i + 1;
    while j < chars.len() && chars[j].is_whitespace() && chars[j] != '\n' {
        j += 1;
    }
    (j < chars.len() && chars[j] == '\n').then_some(j + 1)
}

fn trimmed(chars: &[char], start: usize, end: usize) -> Option<Span> {
    let mut s = start;
    let mut e = end;
    while s < e && chars[s].is_whitespace() {
        s += 1;
    }
    while e > s && chars[e - 1].is_whitespace() {
        e -= 1;
    }
    (s < e).then_some(Span { start: s, end: e })
}

fn sentence_spans(chars: &[char]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if is_terminator(chars[i]) && chars.get(i + 1).is_none_or(|c| c.is_whitespace()) {
            spans.extend(trimmed(chars, start, i + 1));
            start = i + 1;
        } else if let Some(next) = blank_line_end(chars, i) {
            spans.extend(trimmed(chars, start, i));
            start = next;
            i = next;
            continue;
        }
        i += 1;
    }
    spans.extend(trimmed(chars, start, chars.len()));
    spans
}

pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    sentence_spans(&chars)
        .into_iter()
        .map(|s| chars[s.start..s.end].iter().collect())
        .collect()
}

/// Number of non-empty paragraphs, where paragraphs are separated by blank lines.
pub fn count_paragraphs(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let mut count = 0;
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if let Some(next) = blank_line_end(&chars, i) {
            count += usize::from(trimmed(&chars, start, i).is_some());
            start = next;
            i = next;
            continue;
        }
        i += 1;
    }
    count + usize::from(trimmed(&chars, start, chars.len()).is_some())
}

/// `[k]` tokens at `chars`, as (start offset, end offset, index).
fn scan_citations(chars: &[char]) -> Vec<(usize, usize, u64)> {
    let mut found = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '[' {
            let mut j = i + 1;
            let mut value: u64 = 0;
            while j < chars.len() && chars[j].is_ascii_digit() {
                let digit = u64::from(chars[j] as u8 - b'0');
                value = value.saturating_mul(10).saturating_add(digit);
                j += 1;
            }
            if j > i + 1 && j < chars.len() && chars[j] == ']' {
                found.push((i, j + 1, value));
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    found
}

pub fn parse_citations(text: &str) -> Vec<CitationOccurrence> {
    let chars: Vec<char> = text.chars().collect();
    let spans = sentence_spans(&chars);
    scan_citations(&chars)
        .into_iter()
        .map(|(offset, _, index)| CitationOccurrence {
            index,
            char_offset: offset,
            sentence_ordinal: spans
                .iter()
                .position(|s| s.start <= offset && offset < s.end)
                .unwrap_or(spans.len().saturating_sub(1)),
        })
        .collect()
}

/// Share of `sentence`'s content words found in `source_words`, or `None`
/// when the sentence has no content words.
fn overlap(sentence: &str, source_words: &HashSet<String>) -> Option<f64> {
    let content: BTreeSet<String> = tokens(sentence)
        .filter(|w| w.chars().count() >= MIN_CONTENT_WORD_LEN)
        .collect();
    if content.is_empty() {
        return None;
    }
    let hits = content.iter().filter(|w| source_words.contains(*w)).count();
    Some(hits as f64 / content.len() as f64)
}

pub fn validate(
    text: &str,
    n: usize,
    mode: SummaryMode,
    sources: &[(&str, &str)],
    thresholds: Thresholds,
) -> Result<ValidationReport, ValidationError> {
    if n < 1 {
        return Err(ValidationError::InvalidArgs("n must be at least 1".into()));
    }
    if text.trim().is_empty() {
        return Err(ValidationError::InvalidArgs("text is empty".into()));
    }
    if sources.len() != n {
        return Err(ValidationError::InvalidArgs(format!(
            "expected {n} sources, got {}",
            sources.len()
        )));
    }

    let chars: Vec<char> = text.chars().collect();
    let spans = sentence_spans(&chars);
    let citations = scan_citations(&chars);
    let in_range = |k: u64| k >= 1 && k <= n as u64;

    let out_of_range: Vec<u64> = citations
        .iter()
        .map(|&(_, _, k)| k)
        .filter(|&k| !in_range(k))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let source_words: Vec<HashSet<String>> = sources
        .iter()
        .map(|(title, abs)| tokens(title).chain(tokens(abs)).collect())
        .collect();

    let mut cited_sentence_count = 0;
    let mut used = BTreeSet::new();
    let mut grounding_warnings = Vec::new();
    for (ordinal, span) in spans.iter().enumerate() {
        let cites: BTreeSet<usize> = citations
            .iter()
            .filter(|(start, _, k)| span.start <= *start && *start < span.end && in_range(*k))
            .map(|&(_, _, k)| k as usize)
            .collect();
        if cites.is_empty() {
            continue;
        }
        cited_sentence_count += 1;
        used.extend(cites.iter().copied());

        // Citation tokens are blanked out before extracting content words.
        let mut sentence: Vec<char> = chars[span.start..span.end].to_vec();
        for &(s, e, _) in &citations {
            if span.start <= s && e <= span.end {
                sentence[s - span.start..e - span.start].fill(' ');
            }
        }
        let sentence: String = sentence.into_iter().collect();
        let mut union = HashSet::new();
        for k in &cites {
            union.extend(source_words[k - 1].iter().cloned());
        }
        if let Some(score) = overlap(&sentence, &union) {
            if score < thresholds.grounding {
                grounding_warnings.push(GroundingWarning {
                    sentence_ordinal: ordinal,
                    overlap_score: score,
                });
            }
        }
    }

    let sentence_count = spans.len();
    let coverage = cited_sentence_count as f64 / sentence_count as f64;
    let paragraph_count = count_paragraphs(text);
    let structure_ok = match mode {
        SummaryMode::Concise => paragraph_count == 1,
        SummaryMode::LitReview => (3..=4).contains(&paragraph_count),
    };
    let unused_sources = (1..=n).filter(|k| !used.contains(k)).collect();

    Ok(ValidationReport {
        hard_pass: out_of_range.is_empty() && coverage >= thresholds.fail,
        out_of_range,
        sentence_count,
        cited_sentence_count,
        coverage,
        unused_sources,
        paragraph_count,
        structure_ok,
        grounding_warnings,
    })
}
