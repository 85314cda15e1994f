//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod golden;

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use scholarsum::corpus::{Article, CitationEvent, DocType};
use scholarsum::ranking::{Ordering, SearchRequest};
use scholarsum::summarizer::{SourceArticle, SummaryRequest};

pub const NOW_YEAR: i32 = 2025;

pub fn toy_corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/toy_corpus.jsonl")
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Draws one value from `strategy` using `runner`'s RNG.
pub fn sample<S: Strategy>(strategy: &S, runner: &mut TestRunner) -> S::Value {
    strategy
        .new_tree(runner)
        .expect("strategy produces a value")
        .current()
}

const VOCAB: &[&str] = &[
    "citation",
    "ranking",
    "graph",
    "crop",
    "yield",
    "neural",
    "soil",
    "Impact",
    "survey",
    "agriculture",
    "model",
    "data",
];
const TOPICS: &[&str] = &["AI", "Biology", "Agriculture", "Bibliometrics"];

fn words(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            prop::sample::select(VOCAB).prop_map(str::to_string),
            "[a-z]{3,8}".prop_map(String::from),
        ],
        1..=max,
    )
    .prop_map(|w| w.join(" "))
}

fn article(id: String) -> impl Strategy<Value = Article> {
    (
        words(5),
        words(12),
        1995..=2025i32,
        prop::sample::select(&DocType::ALL[..]),
        prop::sample::subsequence(TOPICS, 0..=2),
        0..40u64,
        prop::option::of(prop::collection::vec((0..6i32, 0..20u64), 0..4)),
    )
        .prop_map(
            move |(title, abs, year, doc_type, topics, cites, events)| Article {
                id: id.clone(),
                title,
                abstract_text: abs,
                year,
                doc_type,
                topics: topics.into_iter().map(str::to_string).collect(),
                citation_count: cites,
                citation_events: events.map(|ev| {
                    ev.into_iter()
                        .map(|(dy, c)| CitationEvent {
                            year: year + dy,
                            count: c,
                        })
                        .collect()
                }),
            },
        )
}

/// Corpora of up to `max_n` articles with unique ids.
pub fn corpus_strategy(max_n: usize) -> impl Strategy<Value = Vec<Article>> {
    (0..=max_n)
        .prop_flat_map(|n| {
            (0..n)
                .map(|i| article(format!("a{:03}", (i * 37) % 1000)))
                .collect::<Vec<_>>()
        })
        .prop_map(|mut v| {
            let mut seen = BTreeSet::new();
            v.retain(|a| seen.insert(a.id.clone()));
            v
        })
}

pub fn ordering_strategy() -> impl Strategy<Value = Ordering> {
    prop::sample::select(&Ordering::ALL[..])
}

pub fn request_strategy() -> impl Strategy<Value = SearchRequest> {
    (
        prop::collection::vec(prop::sample::select(VOCAB), 0..3),
        prop::option::of(1995..=2025i32),
        prop::option::of(0..15i32),
        prop::option::of(prop::sample::subsequence(&DocType::ALL[..], 1..=3)),
        prop::option::of(prop::sample::subsequence(TOPICS, 1..=2)),
        ordering_strategy(),
    )
        .prop_map(|(q, from, span, types, topics, ordering)| SearchRequest {
            query: q.join(" "),
            year_from: from,
            year_to: from.zip(span).map(|(f, s)| f + s),
            doc_types: types.map(|t| t.into_iter().collect()),
            topics: topics.map(|t| t.into_iter().map(str::to_string).collect()),
            ordering,
            limit: 1000,
            offset: 0,
        })
}

// ---- summarize inputs ---------------------------------------------------

/// Summarize requests with 1-20 articles; some abstracts run to `max_abstract`
/// characters, others are short noise with brackets, newlines and punctuation.
pub fn summary_request_strategy(max_abstract: usize) -> impl Strategy<Value = SummaryRequest> {
    (
        "[a-zA-Z ]{0,60}",
        prop::collection::vec(
            (
                "[A-Za-z][A-Za-z0-9 ,:-]{0,120}",
                prop_oneof![
                    "[a-zA-Z0-9 .,;!?\\[\\]\n]{0,400}".prop_map(String::from),
                    (1..=max_abstract, "[a-z .]{1,20}")
                        .prop_map(|(len, unit)| unit.repeat(len / unit.len() + 1)),
                ],
            ),
            1..=20,
        ),
    )
        .prop_map(|(query, docs)| SummaryRequest {
            query,
            articles: docs
                .into_iter()
                .enumerate()
                .map(|(i, (t, a))| SourceArticle::new(format!("doc-{i}"), t, a))
                .collect(),
        })
}

// ---- ranking oracle -------------------------------------------------------

fn oracle_tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn oracle_key(a: &Article, ordering: Ordering, terms: &[String], now: i32) -> f64 {
    match ordering {
        Ordering::Influence | Ordering::CitationCount => a.citation_count as f64,
        Ordering::Year => a.year as f64,
        Ordering::Popularity => match &a.citation_events {
            Some(ev) => {
                let mut total = 0.0;
                for e in ev {
                    let age = (now - e.year).max(0) as f64;
                    total += e.count as f64 * (-0.5 * age).exp();
                }
                total
            }
            None => a.citation_count as f64 / ((now - a.year).max(0) + 1) as f64,
        },
        Ordering::Relevance => {
            let title = oracle_tokens(&a.title);
            let abs = oracle_tokens(&a.abstract_text);
            let mut total = 0usize;
            for t in terms {
                total += 2 * title.iter().filter(|x| *x == t).count()
                    + abs.iter().filter(|x| *x == t).count();
            }
            total as f64
        }
    }
}

fn oracle_admits(a: &Article, r: &SearchRequest, terms: &[String]) -> bool {
    if let Some(f) = r.year_from {
        if a.year < f {
            return false;
        }
    }
    if let Some(t) = r.year_to {
        if a.year > t {
            return false;
        }
    }
    if let Some(types) = &r.doc_types {
        if !types.iter().any(|t| *t == a.doc_type) {
            return false;
        }
    }
    if let Some(topics) = &r.topics {
        let lower: Vec<String> = a.topics.iter().map(|t| t.to_lowercase()).collect();
        if !topics.iter().any(|t| lower.contains(&t.to_lowercase())) {
            return false;
        }
    }
    if terms.is_empty() {
        return true;
    }
    let words: Vec<String> = oracle_tokens(&a.title)
        .into_iter()
        .chain(oracle_tokens(&a.abstract_text))
        .collect();
    terms.iter().any(|t| words.contains(t))
}

/// Full ordered id list for `request`, by filtering and a stable insertion
/// sort on (key desc, id asc). Paging fields are ignored.
pub fn oracle_search(articles: &[Article], request: &SearchRequest, now: i32) -> Vec<String> {
    let mut terms: Vec<String> = Vec::new();
    for t in oracle_tokens(&request.query) {
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    let mut rows: Vec<(f64, String)> = articles
        .iter()
        .filter(|a| oracle_admits(a, request, &terms))
        .map(|a| (oracle_key(a, request.ordering, &terms, now), a.id.clone()))
        .collect();
    // insertion sort
    for i in 1..rows.len() {
        let mut j = i;
        while j > 0 {
            let (ka, ia) = &rows[j - 1];
            let (kb, ib) = &rows[j];
            let out_of_order = kb > ka || (kb == ka && ib < ia);
            if !out_of_order {
                break;
            }
            rows.swap(j - 1, j);
            j -= 1;
        }
    }
    rows.into_iter().map(|(_, id)| id).collect()
}

// ---- citation oracle ------------------------------------------------------

/// Every `[digits]` token as (char offset, value), by checking all bracket pairs.
pub fn oracle_citations(text: &str) -> Vec<(usize, u64)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for i in 0..chars.len() {
        if chars[i] != '[' {
            continue;
        }
        for j in i + 2..chars.len() {
            if chars[j] == ']' {
                let inner: String = chars[i + 1..j].iter().collect();
                if inner.chars().all(|c| c.is_ascii_digit()) {
                    let value = inner
                        .parse::<u128>()
                        .map(|v| v.min(u64::MAX as u128) as u64)
                        .unwrap_or(u64::MAX);
                    out.push((i, value));
                }
                break;
            }
        }
    }
    out
}

/// Strings mixing digits, brackets, sentence punctuation and noise.
pub fn citation_noise_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            4 => prop::sample::select(vec!["[", "]", "[1]", "[12]", "[0]", "[21]", "[ 3 ]", "[x]", "[-1]"])
                .prop_map(str::to_string),
            3 => "[0-9]{1,3}".prop_map(String::from),
            3 => "[a-zé ]{1,6}".prop_map(String::from),
            2 => prop::sample::select(vec![". ", "! ", "? ", "\n\n", ".", " ", "\n"]).prop_map(str::to_string),
        ],
        0..40,
    )
    .prop_map(|parts| parts.concat())
}
