//! Deterministic synthetic inputs for the benchmarks.

use scholarsum::corpus::{Article, CitationEvent, CorpusSnapshot, DocType};
use scholarsum::summarizer::{SourceArticle, SummaryRequest};

const WORDS: &[&str] = &[
    "citation",
    "ranking",
    "graph",
    "crop",
    "yield",
    "neural",
    "soil",
    "impact",
    "survey",
    "agriculture",
    "model",
    "data",
    "network",
    "learning",
    "sensor",
    "retrieval",
];

/// SplitMix64 step; enough to spread ids and counts without an RNG dependency.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn sentence(seed: u64, words: usize) -> String {
    let body: Vec<&str> = (0..words as u64)
        .map(|i| WORDS[(mix(seed ^ i) % WORDS.len() as u64) as usize])
        .collect();
    format!("{}.", body.join(" "))
}

pub fn article(i: u64) -> Article {
    let h = mix(i);
    let year = 2000 + (h % 25) as i32;
    Article {
        id: format!("S{i:06}"),
        title: sentence(h, 6),
        abstract_text: (0..5)
            .map(|k| sentence(h + k, 14))
            .collect::<Vec<_>>()
            .join(" "),
        year,
        doc_type: DocType::ALL[(h % 4) as usize],
        topics: [WORDS[(h % 7) as usize].to_string()].into(),
        citation_count: h % 5000,
        citation_events: (!h.is_multiple_of(3)).then(|| {
            (0..(h % 8))
                .map(|k| CitationEvent {
                    year: year + k as i32,
                    count: mix(h + k) % 200,
                })
                .collect()
        }),
    }
}

pub fn corpus(n: u64) -> CorpusSnapshot {
    CorpusSnapshot::from_articles((0..n).map(article)).expect("ids are unique")
}

/// `n` articles whose abstracts are about `abstract_chars` characters long.
pub fn summary_request(n: usize, abstract_chars: usize) -> SummaryRequest {
    let articles = (0..n as u64)
        .map(|i| {
            let a = article(i);
            let mut text = String::with_capacity(abstract_chars + 128);
            let mut k = 0;
            while text.len() < abstract_chars {
                text.push_str(&sentence(i * 1000 + k, 12));
                text.push(' ');
                k += 1;
            }
            SourceArticle::new(a.id, a.title, text)
        })
        .collect();
    SummaryRequest {
        query: "citation ranking".into(),
        articles,
    }
}
