//! QA Space and {Q}A Space construction and line-delimited persistence.
//!
//! A QA Space pairs each answer occurrence with the question generated
//! from its context; a {Q}A Space pairs each distinct answer with the
//! set of all its questions. The {Q}A Space is always derived from a QA
//! Space, which makes the conservation invariant (total question count
//! equals pair count) hold by construction.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotate::{CandidateAnswerTable, EntityType};
use crate::error::{Error, Result};
use crate::qgen::GeneratedQuestion;

pub const FORMAT_VERSION: u32 = 1;

/// One edge of the QA Space: an answer occurrence and its question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAPair {
    pub pair_id: String,
    pub answer_canonical_id: String,
    pub answer_canonical_name: String,
    pub entity_type: EntityType,
    /// 1-based occurrence index of this answer in corpus order.
    pub occurrence_index: usize,
    pub passage_id: String,
    pub char_start: usize,
    pub char_end: usize,
    pub question_text: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QASpace {
    pub pairs: Vec<QAPair>,
    /// canonical_id -> positions into `pairs`.
    pub answer_index: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSetAPair {
    pub answer_id: String,
    pub canonical_name: String,
    pub entity_type: EntityType,
    /// Question texts in corpus occurrence order.
    pub questions: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QSetASpace {
    pub pairs: BTreeMap<String, QSetAPair>,
}

impl QSetASpace {
    pub fn total_questions(&self) -> usize {
        self.pairs.values().map(|p| p.questions.len()).sum()
    }
}

/// Pair every generated question with its answer occurrence.
pub fn build_qa_space(
    questions: &[GeneratedQuestion],
    candidates: &CandidateAnswerTable,
) -> Result<QASpace> {
    let mut space = QASpace::default();
    for question in questions {
        let (canonical_id, occurrence_index) = candidates
            .by_mention
            .get(&question.mention_id)
            .ok_or_else(|| Error::DanglingMention {
                mention_id: question.mention_id.clone(),
            })?;
        let mention = &candidates.by_answer[canonical_id][occurrence_index - 1];
        let pos = space.pairs.len();
        space.pairs.push(QAPair {
            pair_id: format!("pair{pos}"),
            answer_canonical_id: mention.canonical_id.clone(),
            answer_canonical_name: mention.canonical_name.clone(),
            entity_type: mention.entity_type,
            occurrence_index: *occurrence_index,
            passage_id: mention.passage_id.clone(),
            char_start: mention.char_start,
            char_end: mention.char_end,
            question_text: question.text.clone(),
        });
        space
            .answer_index
            .entry(mention.canonical_id.clone())
            .or_default()
            .push(pos);
    }
    Ok(space)
}

/// Group the questions of a QA Space by distinct answer.
pub fn aggregate_questions(qa: &QASpace) -> QSetASpace {
    let mut space = QSetASpace::default();
    for (canonical_id, positions) in &qa.answer_index {
        let mut positions = positions.clone();
        // occurrence order, not insertion order
        positions.sort_by_key(|&p| qa.pairs[p].occurrence_index);
        let first = &qa.pairs[positions[0]];
        let questions = positions
            .iter()
            .map(|&p| qa.pairs[p].question_text.clone())
            .collect();
        space.pairs.insert(
            canonical_id.clone(),
            QSetAPair {
                answer_id: canonical_id.clone(),
                canonical_name: first.answer_canonical_name.clone(),
                entity_type: first.entity_type,
                questions,
            },
        );
    }
    space
}

#[derive(Debug, Serialize, Deserialize)]
struct SpaceHeader {
    format_version: u32,
    corpus_fingerprint: String,
    pair_count: usize,
}

fn write_lines<T: Serialize>(
    path: &Path,
    fingerprint: &str,
    records: impl ExactSizeIterator<Item = T>,
) -> Result<()> {
    let display = path.display().to_string();
    let file = File::create(path).map_err(|e| Error::io(&display, e))?;
    let mut out = BufWriter::new(file);
    let header = SpaceHeader {
        format_version: FORMAT_VERSION,
        corpus_fingerprint: fingerprint.to_string(),
        pair_count: records.len(),
    };
    let io_err = |e: std::io::Error| Error::io(display.clone(), e);
    serde_json::to_writer(&mut out, &header).map_err(|e| Error::io(&display, e.into()))?;
    out.write_all(b"\n").map_err(io_err)?;
    for record in records {
        serde_json::to_writer(&mut out, &record).map_err(|e| Error::io(&display, e.into()))?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(SpaceHeader, Vec<T>)> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, first) = lines.next().ok_or_else(|| Error::MalformedRecord {
        path: display.clone(),
        line: 1,
        reason: "missing header".into(),
    })?;
    let first = first.map_err(|e| Error::io(&display, e))?;
    let header: SpaceHeader =
        serde_json::from_str(&first).map_err(|e| Error::MalformedRecord {
            path: display.clone(),
            line: 1,
            reason: e.to_string(),
        })?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: header.format_version,
            expected: FORMAT_VERSION,
        });
    }

    let mut records = Vec::with_capacity(header.pair_count);
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: display.clone(),
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    if records.len() != header.pair_count {
        return Err(Error::ChecksumFailure {
            path: display,
            declared: header.pair_count,
            actual: records.len(),
        });
    }
    Ok((header, records))
}

pub fn save_qa_space(space: &QASpace, fingerprint: &str, path: &Path) -> Result<()> {
    write_lines(path, fingerprint, space.pairs.iter())
}

pub fn load_qa_space(path: &Path) -> Result<(QASpace, String)> {
    let (header, pairs) = read_lines::<QAPair>(path)?;
    let mut space = QASpace {
        pairs,
        answer_index: BTreeMap::new(),
    };
    for (pos, pair) in space.pairs.iter().enumerate() {
        space
            .answer_index
            .entry(pair.answer_canonical_id.clone())
            .or_default()
            .push(pos);
    }
    Ok((space, header.corpus_fingerprint))
}

pub fn save_qsa_space(space: &QSetASpace, fingerprint: &str, path: &Path) -> Result<()> {
    write_lines(path, fingerprint, space.pairs.values())
}

pub fn load_qsa_space(path: &Path) -> Result<(QSetASpace, String)> {
    let (header, records) = read_lines::<QSetAPair>(path)?;
    let pairs = records
        .into_iter()
        .map(|p| (p.answer_id.clone(), p))
        .collect();
    Ok((QSetASpace { pairs }, header.corpus_fingerprint))
}
