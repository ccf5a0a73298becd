//! Corpus loading, passage splitting and the shared tokenizer.
//!
//! Every index downstream (BM25, the gazetteer annotator, answer
//! normalization) goes through [`tokenize`] so that surface forms agree
//! across modules. Offsets are expressed in Unicode scalar values, not
//! bytes, so passage lengths do not depend on encoding.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub body: String,
}

/// A contiguous slice of a document body, the retrieval granule.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Passage {
    pub passage_id: String,
    pub doc_id: String,
    pub text: String,
    /// Offset into the parent body, in Unicode scalar values.
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Lowercased surface form.
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
pub struct CorpusStats {
    pub document_count: usize,
    pub passage_count: usize,
    pub avg_passage_tokens: f64,
}

/// An immutable loaded corpus: documents, their passages and summary stats.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub passages: Vec<Passage>,
    passage_index: HashMap<String, usize>,
    pub stats: CorpusStats,
    pub fingerprint: String,
}

impl Corpus {
    pub fn passage(&self, passage_id: &str) -> Option<&Passage> {
        self.passage_index.get(passage_id).map(|&i| &self.passages[i])
    }

    /// Position of a passage in corpus order.
    pub fn passage_pos(&self, passage_id: &str) -> Option<usize> {
        self.passage_index.get(passage_id).copied()
    }
}

/// Slice `text` by character (Unicode scalar value) offsets.
pub fn char_slice(text: &str, char_start: usize, char_end: usize) -> String {
    text.chars().skip(char_start).take(char_end.saturating_sub(char_start)).collect()
}

/// Deterministic tokenizer: case-fold, split on maximal runs of
/// non-alphanumeric characters. Digit runs are tokens. Offsets refer to
/// the original text in Unicode scalar values.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start = None;
    let mut surface = String::new();
    for (i, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
            for lc in ch.to_lowercase() {
                surface.push(lc);
            }
        } else if let Some(s) = start.take() {
            tokens.push(Token {
                surface: std::mem::take(&mut surface),
                char_start: s,
                char_end: i,
            });
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            surface,
            char_start: s,
            char_end: text.chars().count(),
        });
    }
    tokens
}

/// Lowercased surfaces only, for callers that do not need offsets.
pub fn token_surfaces(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.surface).collect()
}

/// Split a document into passages. A passage is a maximal run of lines
/// between blank-line separators whose character length is at least
/// `min_chars`; shorter paragraphs are dropped.
pub fn split_passages(doc: &Document, min_chars: usize) -> Vec<Passage> {
    let mut passages = Vec::new();
    let mut para_start: Option<usize> = None;
    let mut para_end = 0usize;
    let mut pos = 0usize; // char offset into body
    let mut n = 0usize;

    let flush = |start: Option<usize>, end: usize, passages: &mut Vec<Passage>, n: &mut usize| {
        if let Some(s) = start {
            if end > s && end - s >= min_chars {
                passages.push(Passage {
                    passage_id: format!("{}#p{}", doc.doc_id, *n),
                    doc_id: doc.doc_id.clone(),
                    text: char_slice(&doc.body, s, end),
                    char_start: s,
                    char_end: end,
                });
                *n += 1;
            }
        }
    };

    for line in doc.body.split('\n') {
        let line_chars = line.chars().count();
        if line.trim().is_empty() {
            flush(para_start.take(), para_end, &mut passages, &mut n);
        } else {
            if para_start.is_none() {
                para_start = Some(pos);
            }
            para_end = pos + line_chars;
        }
        pos += line_chars + 1; // the newline
    }
    flush(para_start.take(), para_end, &mut passages, &mut n);
    passages
}

/// Load a line-delimited corpus file: one JSON document record per line.
pub fn load_corpus(path: &Path, min_chars: usize) -> Result<Corpus> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = BufReader::new(file);

    let mut documents = Vec::new();
    let mut seen = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: display.clone(),
                line: lineno + 1,
                reason: e.to_string(),
            })?;
        if doc.body.is_empty() {
            return Err(Error::MalformedRecord {
                path: display.clone(),
                line: lineno + 1,
                reason: "empty body".into(),
            });
        }
        if seen.insert(doc.doc_id.clone(), ()).is_some() {
            return Err(Error::DuplicateDocId { doc_id: doc.doc_id });
        }
        documents.push(doc);
    }
    Ok(build_corpus(documents, min_chars))
}

/// Assemble a corpus from already-parsed documents. Callers must ensure
/// doc_id uniqueness.
pub fn build_corpus(documents: Vec<Document>, min_chars: usize) -> Corpus {
    let mut passages = Vec::new();
    for doc in &documents {
        passages.extend(split_passages(doc, min_chars));
    }
    let passage_index = passages
        .iter()
        .enumerate()
        .map(|(i, p)| (p.passage_id.clone(), i))
        .collect();

    let total_tokens: usize = passages.iter().map(|p| tokenize(&p.text).len()).sum();
    let stats = CorpusStats {
        document_count: documents.len(),
        passage_count: passages.len(),
        avg_passage_tokens: if passages.is_empty() {
            0.0
        } else {
            total_tokens as f64 / passages.len() as f64
        },
    };
    let fingerprint = fingerprint_documents(&documents);

    Corpus {
        documents,
        passages,
        passage_index,
        stats,
        fingerprint,
    }
}

/// Stable hex digest of the document ids and bodies, in order.
pub fn fingerprint_documents(documents: &[Document]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for doc in documents {
        hasher.update(doc.doc_id.as_bytes());
        hasher.update([0u8]);
        hasher.update(doc.body.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(32);
    for b in &digest[..16] {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(body: &str) -> Document {
        Document {
            doc_id: "d1".into(),
            title: None,
            body: body.into(),
        }
    }

    #[test]
    fn tokenize_splits_on_non_alnum() {
        let surfaces = token_surfaces("Chicago Bears!");
        assert_eq!(surfaces, vec!["chicago", "bears"]);
    }

    #[test]
    fn tokenize_keeps_roman_numerals_as_words() {
        assert_eq!(token_surfaces("Super Bowl XX"), vec!["super", "bowl", "xx"]);
    }

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  \t ").is_empty());
    }

    #[test]
    fn tokenize_offsets_strictly_increase() {
        let toks = tokenize("a bb, ccc 42");
        for w in toks.windows(2) {
            assert!(w[0].char_end <= w[1].char_start);
            assert!(w[0].char_start < w[0].char_end);
        }
        assert_eq!(toks.last().unwrap().surface, "42");
    }

    #[test]
    fn split_keeps_long_paragraphs_only() {
        let p1 = "x".repeat(60);
        let p2 = "y".repeat(30);
        let p3 = "z".repeat(120);
        let d = doc(&format!("{p1}\n\n{p2}\n\n{p3}"));
        let passages = split_passages(&d, 50);
        assert_eq!(passages.len(), 2);
        assert_eq!(passages[0].text, p1);
        assert_eq!(passages[1].text, p3);
    }

    #[test]
    fn split_boundary_49_drops() {
        let d = doc(&"a".repeat(49));
        assert!(split_passages(&d, 50).is_empty());
    }

    #[test]
    fn split_boundary_50_keeps_whole_body() {
        let body = "a".repeat(50);
        let d = doc(&body);
        let passages = split_passages(&d, 50);
        assert_eq!(passages.len(), 1);
        assert_eq!(passages[0].char_start, 0);
        assert_eq!(passages[0].char_end, 50);
        assert_eq!(passages[0].text, body);
    }

    #[test]
    fn passage_text_equals_body_slice() {
        let d = doc("first paragraph with enough characters to qualify here\n\nsecond paragraph that is also long enough to be retained");
        for p in split_passages(&d, 50) {
            assert_eq!(p.text, char_slice(&d.body, p.char_start, p.char_end));
        }
    }

    #[test]
    fn load_corpus_two_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(
            &path,
            format!(
                "{}\n{}\n",
                serde_json::json!({"doc_id": "a", "body": "x".repeat(60)}),
                serde_json::json!({"doc_id": "b", "title": "T", "body": "y".repeat(60)}),
            ),
        )
        .unwrap();
        let corpus = load_corpus(&path, 50).unwrap();
        assert_eq!(corpus.stats.document_count, 2);
        assert_eq!(corpus.stats.passage_count, 2);
    }

    #[test]
    fn load_corpus_duplicate_doc_id() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let rec = serde_json::json!({"doc_id": "a", "body": "x".repeat(60)});
        std::fs::write(&path, format!("{rec}\n{rec}\n")).unwrap();
        match load_corpus(&path, 50) {
            Err(Error::DuplicateDocId { doc_id }) => assert_eq!(doc_id, "a"),
            other => panic!("expected duplicate-id error, got {other:?}"),
        }
    }

    #[test]
    fn load_corpus_malformed_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let rec = serde_json::json!({"doc_id": "a", "body": "x".repeat(60)});
        std::fs::write(&path, format!("{rec}\nnot json\n")).unwrap();
        match load_corpus(&path, 50) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed-record error, got {other:?}"),
        }
    }

    #[test]
    fn average_passage_token_length() {
        // Three single-paragraph docs with 10, 20 and 30 tokens.
        let docs: Vec<Document> = [10usize, 20, 30]
            .iter()
            .enumerate()
            .map(|(i, &n)| Document {
                doc_id: format!("d{i}"),
                title: None,
                body: (0..n).map(|k| format!("tok{k:02}")).collect::<Vec<_>>().join(" "),
            })
            .collect();
        // Oracle: arithmetic mean of the token counts.
        let expected = (10 + 20 + 30) as f64 / 3.0;
        let corpus = build_corpus(docs, 1);
        assert_eq!(corpus.stats.passage_count, 3);
        assert!((corpus.stats.avg_passage_tokens - expected).abs() < 1e-12);
    }
}
