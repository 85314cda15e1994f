//! Line-delimited article corpus and immutable snapshots over it.
//!
//! Each line of a corpus file is one JSON object. Records that fail validation
//! are rejected individually and reported; a duplicated id anywhere in the
//! file aborts the whole ingest.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus file {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate article id {id:?} on line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("article {0:?} not found")]
    NotFound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Publication,
    Dataset,
    Software,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 4] = [
        DocType::Publication,
        DocType::Dataset,
        DocType::Software,
        DocType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Publication => "publication",
            DocType::Dataset => "dataset",
            DocType::Software => "software",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "publication" => Ok(DocType::Publication),
            "dataset" => Ok(DocType::Dataset),
            "software" => Ok(DocType::Software),
            "other" => Ok(DocType::Other),
            other => Err(format!("unknown doc_type {other:?}")),
        }
    }
}

/// Citations received in one calendar year. Serialized as a `[year, count]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(i32, u64)", into = "(i32, u64)")]
pub struct CitationEvent {
    pub year: i32,
    pub count: u64,
}

impl From<(i32, u64)> for CitationEvent {
    fn from((year, count): (i32, u64)) -> Self {
        Self { year, count }
    }
}

impl From<CitationEvent> for (i32, u64) {
    fn from(e: CitationEvent) -> Self {
        (e.year, e.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub year: i32,
    pub doc_type: DocType,
    pub topics: BTreeSet<String>,
    pub citation_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation_events: Option<Vec<CitationEvent>>,
}

impl Article {
    /// Serializes the article as one corpus line.
    pub fn to_record_line(&self) -> String {
        serde_json::to_string(self).expect("article serialization is infallible")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub total_lines: usize,
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    /// Accepted records whose abstract is empty, as (line, id).
    pub empty_abstracts: Vec<(usize, String)>,
}

impl IngestReport {
    pub fn rejected_count(&self) -> usize {
        self.rejected.len()
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lines={} accepted={} rejected={} empty_abstracts={}",
            self.total_lines,
            self.accepted,
            self.rejected.len(),
            self.empty_abstracts.len()
        )?;
        for r in &self.rejected {
            writeln!(f, "rejected line {}: {}", r.line, r.reason)?;
        }
        for (line, id) in &self.empty_abstracts {
            writeln!(f, "empty abstract line {line}: {id}")?;
        }
        Ok(())
    }
}

/// An immutable, id-keyed view of an ingested corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSnapshot {
    articles: BTreeMap<String, Article>,
    report: IngestReport,
}

impl CorpusSnapshot {
    /// Builds a snapshot from in-memory articles. Fails on a duplicate id;
    /// the other record invariants are the caller's responsibility.
    pub fn from_articles(articles: impl IntoIterator<Item = Article>) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        let mut report = IngestReport::default();
        for (i, a) in articles.into_iter().enumerate() {
            let line = i + 1;
            report.total_lines += 1;
            report.accepted += 1;
            if a.abstract_text.trim().is_empty() {
                report.empty_abstracts.push((line, a.id.clone()));
            }
            if map.contains_key(&a.id) {
                return Err(CorpusError::DuplicateId { id: a.id, line });
            }
            map.insert(a.id.clone(), a);
        }
        Ok(Self {
            articles: map,
            report,
        })
    }

    pub fn get(&self, id: &str) -> Result<&Article, CorpusError> {
        self.articles
            .get(id)
            .ok_or_else(|| CorpusError::NotFound(id.to_string()))
    }

    /// Articles in ascending id order.
    pub fn articles(&self) -> impl Iterator<Item = &Article> {
        self.articles.values()
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }
}

pub fn ingest(path: impl AsRef<Path>) -> Result<CorpusSnapshot, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    ingest_str(&text)
}

/// Ingests corpus records from an in-memory string.
pub fn ingest_str(text: &str) -> Result<CorpusSnapshot, CorpusError> {
    let mut articles = BTreeMap::new();
    let mut report = IngestReport::default();
    let mut seen_ids: HashMap<String, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        report.total_lines += 1;

        if raw.trim().is_empty() {
            report.rejected.push(Rejection {
                line,
                reason: "empty line".into(),
            });
            continue;
        }
        let value: Value = match serde_json::from_str(raw) {
            Ok(v) => v,
            Err(e) => {
                report.rejected.push(Rejection {
                    line,
                    reason: format!("malformed record: {e}"),
                });
                continue;
            }
        };

        // Duplicate detection covers every line with a readable id, even ones
        // rejected for other reasons.
        if let Some(id) = value.get("id").and_then(Value::as_str) {
            if !id.is_empty() && seen_ids.insert(id.to_string(), line).is_some() {
                return Err(CorpusError::DuplicateId {
                    id: id.to_string(),
                    line,
                });
            }
        }

        match parse_record(&value) {
            Ok(article) => {
                if article.abstract_text.trim().is_empty() {
                    report.empty_abstracts.push((line, article.id.clone()));
                }
                report.accepted += 1;
                articles.insert(article.id.clone(), article);
            }
            Err(reason) => report.rejected.push(Rejection { line, reason }),
        }
    }

    Ok(CorpusSnapshot { articles, report })
}

fn parse_record(value: &Value) -> Result<Article, String> {
    let obj = value
        .as_object()
        .ok_or_else(|| "record is not an object".to_string())?;

    let id = match obj.get("id") {
        None | Some(Value::Null) => return Err("missing id".into()),
        Some(Value::String(s)) if s.is_empty() => return Err("empty id".into()),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("id is not a string".into()),
    };
    let title = match obj.get("title") {
        None | Some(Value::Null) => return Err("missing title".into()),
        Some(Value::String(s)) if s.trim().is_empty() => return Err("missing title".into()),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("title is not a string".into()),
    };
    let abstract_text = match obj.get("abstract") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err("abstract is not a string".into()),
    };
    let year = match obj.get("year") {
        None | Some(Value::Null) => return Err("missing year".into()),
        Some(v) => v
            .as_i64()
            .and_then(|y| i32::try_from(y).ok())
            .ok_or_else(|| "year is not an integer".to_string())?,
    };
    let doc_type = match obj.get("doc_type") {
        None | Some(Value::Null) => return Err("missing doc_type".into()),
        Some(Value::String(s)) => s.parse::<DocType>()?,
        Some(_) => return Err("doc_type is not a string".into()),
    };
    let topics = match obj.get("topics") {
        None | Some(Value::Null) => BTreeSet::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|t| {
                t.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| "topics must be strings".to_string())
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err("topics is not an array".into()),
    };
    let citation_count = match obj.get("citation_count") {
        None | Some(Value::Null) => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| "citation_count must be a non-negative integer".to_string())?,
    };
    let citation_events = match obj.get("citation_events") {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => {
            let mut events = Vec::with_capacity(items.len());
            for item in items {
                let pair = item
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| "citation_events entries must be [year, count]".to_string())?;
                let ev_year = pair[0]
                    .as_i64()
                    .and_then(|y| i32::try_from(y).ok())
                    .ok_or_else(|| "citation event year is not an integer".to_string())?;
                let count = pair[1].as_u64().ok_or_else(|| {
                    "citation event count must be a non-negative integer".to_string()
                })?;
                if ev_year < year {
                    return Err(format!(
                        "citation event year {ev_year} precedes publication year {year}"
                    ));
                }
                events.push(CitationEvent {
                    year: ev_year,
                    count,
                });
            }
            Some(events)
        }
        Some(_) => return Err("citation_events is not an array".into()),
    };

    Ok(Article {
        id,
        title,
        abstract_text,
        year,
        doc_type,
        topics,
        citation_count,
        citation_events,
    })
}
