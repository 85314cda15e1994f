//! Keyword search with faceted filters, ordered by a single impact key.
//!
//! Impact aspects are proxies: influence is the raw citation count and
//! popularity is an exponentially time-decayed sum of yearly citation events.

use std::cmp::Ordering as CmpOrdering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Article, CorpusSnapshot, DocType};
use crate::text::tokens;

pub const DEFAULT_GAMMA: f64 = 0.5;
pub const DEFAULT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankingError {
    #[error("invalid search request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    #[default]
    Popularity,
    Influence,
    CitationCount,
    Year,
    Relevance,
}

impl Ordering {
    pub const ALL: [Ordering; 5] = [
        Ordering::Popularity,
        Ordering::Influence,
        Ordering::CitationCount,
        Ordering::Year,
        Ordering::Relevance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ordering::Popularity => "popularity",
            Ordering::Influence => "influence",
            Ordering::CitationCount => "citation_count",
            Ordering::Year => "year",
            Ordering::Relevance => "relevance",
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ordering {
    type Err = RankingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ordering::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RankingError::InvalidRequest(format!("unknown ordering {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    pub query: String,
    pub year_from: Option<i32>,
    pub year_to: Option<i32>,
    pub doc_types: Option<BTreeSet<DocType>>,
    /// Matched case-insensitively; an article passes if it carries any of them.
    pub topics: Option<BTreeSet<String>>,
    pub ordering: Ordering,
    pub limit: usize,
    pub offset: usize,
}

impl Default for SearchRequest {
    fn default() -> Self {
        Self {
            query: String::new(),
            year_from: None,
            year_to: None,
            doc_types: None,
            topics: None,
            ordering: Ordering::default(),
            limit: DEFAULT_LIMIT,
            offset: 0,
        }
    }
}

impl SearchRequest {
    pub fn new(query: impl Into<String>) -> Self {
        Self {
            query: query.into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), RankingError> {
        if self.limit == 0 {
            return Err(RankingError::InvalidRequest(
                "limit must be at least 1".into(),
            ));
        }
        if let (Some(from), Some(to)) = (self.year_from, self.year_to) {
            if from > to {
                return Err(RankingError::InvalidRequest(format!(
                    "year_from {from} is after year_to {to}"
                )));
            }
        }
        Ok(())
    }

    /// Whether `article` passes every active filter (query terms excluded).
    pub fn admits(&self, article: &Article) -> bool {
        if self.year_from.is_some_and(|y| article.year < y) {
            return false;
        }
        if self.year_to.is_some_and(|y| article.year > y) {
            return false;
        }
        if let Some(types) = &self.doc_types {
            if !types.contains(&article.doc_type) {
                return false;
            }
        }
        if let Some(wanted) = &self.topics {
            let hit = article.topics.iter().any(|t| {
                wanted
                    .iter()
                    .any(|w| w.trim().eq_ignore_ascii_case(t.trim()))
            });
            if !hit {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedResult {
    pub article_id: String,
    pub title: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchPage {
    /// Size of the filtered candidate set before paging.
    pub total: usize,
    pub results: Vec<RankedResult>,
}

pub fn compute_influence(article: &Article) -> f64 {
    article.citation_count as f64
}

/// Time-decayed citation attention. Ages are clamped at zero, so records
/// dated after `now_year` neither blow up the fallback nor gain weight.
pub fn compute_popularity(article: &Article, now_year: i32, gamma: f64) -> f64 {
    match &article.citation_events {
        Some(events) => events
            .iter()
            .map(|e| {
                let age = f64::from((now_year - e.year).max(0));
                e.count as f64 * (-gamma * age).exp()
            })
            // f64::sum of an empty iterator is -0.0, which sorts below 0.0.
            .fold(0.0, |acc, x| acc + x),
        None => {
            let span = (i64::from(now_year) - i64::from(article.year)).max(0) + 1;
            article.citation_count as f64 / span as f64
        }
    }
}

/// Title-weighted term frequency over the distinct query terms.
pub fn compute_relevance(article: &Article, query_terms: &[String]) -> f64 {
    if query_terms.is_empty() {
        return 0.0;
    }
    let weight = |tokens: &mut dyn Iterator<Item = String>, w: usize| {
        tokens
            .filter(|t| query_terms.iter().any(|q| q == t))
            .count()
            * w
    };
    let total =
        weight(&mut tokens(&article.title), 2) + weight(&mut tokens(&article.abstract_text), 1);
    total as f64
}

/// The value of `ordering`'s key for one article.
pub fn score(article: &Article, ordering: Ordering, query_terms: &[String], now_year: i32) -> f64 {
    match ordering {
        Ordering::Popularity => compute_popularity(article, now_year, DEFAULT_GAMMA),
        Ordering::Influence | Ordering::CitationCount => compute_influence(article),
        Ordering::Year => f64::from(article.year),
        Ordering::Relevance => compute_relevance(article, query_terms),
    }
}

/// Distinct query terms in first-occurrence order.
pub fn query_terms(query: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    tokens(query).filter(|t| seen.insert(t.clone())).collect()
}

fn matches_query(article: &Article, terms: &HashSet<&str>) -> bool {
    terms.is_empty()
        || tokens(&article.title)
            .chain(tokens(&article.abstract_text))
            .any(|t| terms.contains(t.as_str()))
}

pub fn search(
    snapshot: &CorpusSnapshot,
    request: &SearchRequest,
    now_year: i32,
) -> Result<SearchPage, RankingError> {
    request.validate()?;
    let terms = query_terms(&request.query);
    let term_set: HashSet<&str> = terms.iter().map(String::as_str).collect();

    let mut scored: Vec<(&Article, f64)> = snapshot
        .articles()
        .filter(|a| request.admits(a) && matches_query(a, &term_set))
        .map(|a| (a, score(a, request.ordering, &terms, now_year)))
        .collect();

    scored.sort_by(|(a, sa), (b, sb)| match sb.total_cmp(sa) {
        CmpOrdering::Equal => a.id.cmp(&b.id),
        other => other,
    });

    let total = scored.len();
    let results = scored
        .into_iter()
        .enumerate()
        .skip(request.offset)
        .take(request.limit)
        .map(|(i, (a, s))| RankedResult {
            article_id: a.id.clone(),
            title: a.title.clone(),
            score: s,
            rank: i + 1,
        })
        .collect();
    Ok(SearchPage { total, results })
}
