//! Deterministic extractive stand-in for a real model.
//!
//! For each document the mock takes the first sentence of its abstract (or of
//! its title when the abstract has nothing usable) and cites it. Concise mode
//! yields one paragraph; literature-review mode splits the documents into 3
//! contiguous groups (4 when there are more than 12), one paragraph each.

use crate::summarizer::{PromptBundle, PromptDocument, SummaryMode};

/// Paragraph count used for a literature review of `n` documents.
pub fn lit_review_paragraphs(n: usize) -> usize {
    if n <= 12 {
        3
    } else {
        4
    }
}

/// Sizes of `p` contiguous groups covering `n` items, larger groups first.
pub fn group_sizes(n: usize, p: usize) -> Vec<usize> {
    let base = n / p;
    let extra = n % p;
    (0..p).map(|i| base + usize::from(i < extra)).collect()
}

/// Removes `[digits]` tokens so source text cannot inject citations.
fn strip_numeric_brackets(s: &str) -> String {
    let mut current = strip_once(s);
    // "[[1]2]" becomes "[2]" after one pass.
    loop {
        let next = strip_once(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

fn strip_once(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '[' {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j > i + 1 && j < chars.len() && chars[j] == ']' {
                i = j + 1;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

/// Text up to the first sentence terminator followed by whitespace or end,
/// with whitespace collapsed and trailing terminators removed.
fn leading_sentence(s: &str) -> String {
    let flat = strip_numeric_brackets(s)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    let chars: Vec<char> = flat.chars().collect();
    let end = (0..chars.len())
        .find(|&i| {
            matches!(chars[i], '.' | '!' | '?')
                && chars.get(i + 1).is_none_or(|c| c.is_whitespace())
        })
        .map_or(chars.len(), |i| i + 1);
    let sentence: String = chars[..end].iter().collect();
    sentence
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?') || c.is_whitespace())
        .trim()
        .to_string()
}

pub fn first_sentence(doc: &PromptDocument) -> String {
    [&doc.abstract_text, &doc.title]
        .into_iter()
        .map(|s| leading_sentence(s))
        .find(|s| !s.is_empty())
        .unwrap_or_else(|| format!("Document {}", doc.index))
}

fn cited(doc: &PromptDocument) -> String {
    format!("{} [{}].", first_sentence(doc), doc.index)
}

pub fn mock_generate(bundle: &PromptBundle) -> String {
    let sentences: Vec<String> = bundle.documents.iter().map(cited).collect();
    match bundle.mode {
        SummaryMode::Concise => sentences.join(" "),
        SummaryMode::LitReview => {
            let mut rest = sentences.as_slice();
            group_sizes(sentences.len(), lit_review_paragraphs(sentences.len()))
                .into_iter()
                .map(|size| {
                    let (head, tail) = rest.split_at(size);
                    rest = tail;
                    head.join(" ")
                })
                .collect::<Vec<_>>()
                .join("\n\n")
        }
    }
}
