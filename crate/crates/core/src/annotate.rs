//! Gazetteer-based entity annotation.
//!
//! The annotator stands in for an external entity linker behind the
//! [`EntityAnnotator`] trait; the gazetteer longest-match scan is the
//! deterministic reference implementation.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{char_slice, tokenize, Corpus, Passage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityType {
    PersonOrg,
    Location,
    Other,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [EntityType::PersonOrg, EntityType::Location, EntityType::Other];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityType::PersonOrg => "PERSON_ORG",
            EntityType::Location => "LOCATION",
            EntityType::Other => "OTHER",
        }
    }
}

impl std::str::FromStr for EntityType {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "PERSON_ORG" => Ok(EntityType::PersonOrg),
            "LOCATION" => Ok(EntityType::Location),
            "OTHER" => Ok(EntityType::Other),
            other => Err(format!("unknown entity type `{other}`")),
        }
    }
}

/// One linkable surface form in the entity inventory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub surface: String,
    pub canonical_id: String,
    pub canonical_name: String,
    pub entity_type: EntityType,
    pub score: f64,
}

/// One occurrence of a candidate answer entity in a passage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMention {
    pub mention_id: String,
    pub canonical_id: String,
    pub canonical_name: String,
    pub entity_type: EntityType,
    pub score: f64,
    pub passage_id: String,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnnotatorConfig {
    /// Minimum entity score; entries below it are not matched.
    pub threshold: f64,
}

impl Default for AnnotatorConfig {
    fn default() -> Self {
        AnnotatorConfig { threshold: 0.2 }
    }
}

/// Adapter contract: anything producing mention lists per passage.
pub trait EntityAnnotator {
    fn annotate(&self, passage: &Passage) -> Vec<EntityMention>;
}

/// Gazetteer annotator: left-to-right, longest-match, non-overlapping
/// scan over the shared token stream.
pub struct GazetteerAnnotator {
    entries: Vec<GazetteerEntry>,
    /// token surface sequence -> entry position (first entry wins).
    by_tokens: HashMap<Vec<String>, usize>,
    max_len: usize,
    config: AnnotatorConfig,
}

impl GazetteerAnnotator {
    pub fn new(entries: Vec<GazetteerEntry>, config: AnnotatorConfig) -> Self {
        let mut by_tokens = HashMap::new();
        let mut max_len = 0;
        for (i, entry) in entries.iter().enumerate() {
            if entry.score < config.threshold {
                continue;
            }
            let toks: Vec<String> =
                tokenize(&entry.surface).into_iter().map(|t| t.surface).collect();
            if toks.is_empty() {
                continue;
            }
            max_len = max_len.max(toks.len());
            by_tokens.entry(toks).or_insert(i);
        }
        GazetteerAnnotator {
            entries,
            by_tokens,
            max_len,
            config,
        }
    }

    pub fn config(&self) -> AnnotatorConfig {
        self.config
    }
}

impl EntityAnnotator for GazetteerAnnotator {
    fn annotate(&self, passage: &Passage) -> Vec<EntityMention> {
        let tokens = tokenize(&passage.text);
        let mut mentions = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = None;
            let upper = self.max_len.min(tokens.len() - i);
            for len in (1..=upper).rev() {
                let window: Vec<String> =
                    tokens[i..i + len].iter().map(|t| t.surface.clone()).collect();
                if let Some(&entry_idx) = self.by_tokens.get(&window) {
                    matched = Some((len, entry_idx));
                    break;
                }
            }
            match matched {
                Some((len, entry_idx)) => {
                    let entry = &self.entries[entry_idx];
                    let char_start = tokens[i].char_start;
                    let char_end = tokens[i + len - 1].char_end;
                    mentions.push(EntityMention {
                        mention_id: format!("{}:{}-{}", passage.passage_id, char_start, char_end),
                        canonical_id: entry.canonical_id.clone(),
                        canonical_name: entry.canonical_name.clone(),
                        entity_type: entry.entity_type,
                        score: entry.score,
                        passage_id: passage.passage_id.clone(),
                        char_start,
                        char_end,
                        surface: char_slice(&passage.text, char_start, char_end),
                    });
                    i += len;
                }
                None => i += 1,
            }
        }
        mentions
    }
}

/// All candidate answers of a corpus, grouped by canonical entity, with
/// occurrence indices assigned in corpus order.
#[derive(Debug, Clone, Default)]
pub struct CandidateAnswerTable {
    /// canonical_id in order of first occurrence.
    pub answer_order: Vec<String>,
    /// canonical_id -> mentions in corpus order; occurrence index j of a
    /// mention is its 1-based position here.
    pub by_answer: HashMap<String, Vec<EntityMention>>,
    /// mention_id -> (canonical_id, occurrence index).
    pub by_mention: HashMap<String, (String, usize)>,
    /// passage_id -> mentions in passage order.
    pub by_passage: HashMap<String, Vec<EntityMention>>,
}

impl CandidateAnswerTable {
    pub fn total_mentions(&self) -> usize {
        self.by_answer.values().map(Vec::len).sum()
    }

    pub fn mentions_in_corpus_order(&self) -> Vec<&EntityMention> {
        let mut all: Vec<&EntityMention> = self.by_answer.values().flatten().collect();
        all.sort_by(|a, b| self.by_mention[&a.mention_id].cmp(&self.by_mention[&b.mention_id]));
        all
    }
}

/// Scan every passage in corpus order and collect the candidate answer
/// node set.
pub fn collect_candidate_answers(
    corpus: &Corpus,
    annotator: &dyn EntityAnnotator,
) -> CandidateAnswerTable {
    let mut table = CandidateAnswerTable::default();
    for passage in &corpus.passages {
        let mentions = annotator.annotate(passage);
        for mention in mentions {
            if !table.by_answer.contains_key(&mention.canonical_id) {
                table.answer_order.push(mention.canonical_id.clone());
                table.by_answer.insert(mention.canonical_id.clone(), Vec::new());
            }
            let group = table.by_answer.get_mut(&mention.canonical_id).unwrap();
            group.push(mention.clone());
            table
                .by_mention
                .insert(mention.mention_id.clone(), (mention.canonical_id.clone(), group.len()));
            table
                .by_passage
                .entry(mention.passage_id.clone())
                .or_default()
                .push(mention);
        }
    }
    table
}

/// Load a line-delimited gazetteer file, one JSON entry per line.
pub fn load_gazetteer(path: &Path) -> Result<Vec<GazetteerEntry>> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = BufReader::new(file);
    let mut entries = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: GazetteerEntry =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: display.clone(),
                line: lineno + 1,
                reason: e.to_string(),
            })?;
        if !(0.0..=1.0).contains(&entry.score) {
            return Err(Error::MalformedRecord {
                path: display.clone(),
                line: lineno + 1,
                reason: format!("score {} outside [0,1]", entry.score),
            });
        }
        entries.push(entry);
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, Document};

    fn passage(text: &str) -> Passage {
        Passage {
            passage_id: "d1#p0".into(),
            doc_id: "d1".into(),
            text: text.into(),
            char_start: 0,
            char_end: text.chars().count(),
        }
    }

    fn entry(surface: &str, id: &str, score: f64) -> GazetteerEntry {
        GazetteerEntry {
            surface: surface.into(),
            canonical_id: id.into(),
            canonical_name: surface.into(),
            entity_type: EntityType::PersonOrg,
            score,
        }
    }

    #[test]
    fn longest_match_wins() {
        let annotator = GazetteerAnnotator::new(
            vec![entry("chicago bears", "E1", 0.9), entry("chicago", "E2", 0.9)],
            AnnotatorConfig::default(),
        );
        let mentions = annotator.annotate(&passage("the Chicago Bears won"));
        assert_eq!(mentions.len(), 1);
        assert_eq!(mentions[0].canonical_id, "E1");
        assert_eq!(mentions[0].surface, "Chicago Bears");
    }

    #[test]
    fn below_threshold_excluded() {
        let annotator = GazetteerAnnotator::new(
            vec![entry("paris", "E3", 0.1)],
            AnnotatorConfig { threshold: 0.2 },
        );
        assert!(annotator.annotate(&passage("Paris is nice")).is_empty());
    }

    #[test]
    fn left_to_right_scan_order() {
        // Hand-trace: "Chicago" alone matches E2 first, then the two-token
        // "Chicago Bears" matches E1.
        let annotator = GazetteerAnnotator::new(
            vec![entry("chicago bears", "E1", 0.9), entry("chicago", "E2", 0.9)],
            AnnotatorConfig::default(),
        );
        let mentions = annotator.annotate(&passage("Chicago hosted the Chicago Bears"));
        let ids: Vec<&str> = mentions.iter().map(|m| m.canonical_id.as_str()).collect();
        assert_eq!(ids, vec!["E2", "E1"]);
        assert!(mentions[0].char_end <= mentions[1].char_start);
    }

    fn one_passage_corpus(bodies: &[&str]) -> Corpus {
        let docs = bodies
            .iter()
            .enumerate()
            .map(|(i, b)| Document {
                doc_id: format!("d{i}"),
                title: None,
                body: (*b).into(),
            })
            .collect();
        build_corpus(docs, 1)
    }

    #[test]
    fn occurrence_indices_contiguous() {
        let corpus = one_passage_corpus(&[
            "Chicago Bears won. Chicago Bears lost.",
            "Chicago Bears tied. Chicago Bears played. Chicago Bears rested.",
        ]);
        let annotator = GazetteerAnnotator::new(
            vec![entry("chicago bears", "E1", 0.9)],
            AnnotatorConfig::default(),
        );
        let table = collect_candidate_answers(&corpus, &annotator);
        let occ = &table.by_answer["E1"];
        assert_eq!(occ.len(), 5);
        for (j, m) in occ.iter().enumerate() {
            assert_eq!(table.by_mention[&m.mention_id], ("E1".to_string(), j + 1));
        }
    }

    #[test]
    fn empty_gazetteer_yields_empty_table() {
        let corpus = one_passage_corpus(&["nothing to see here"]);
        let annotator = GazetteerAnnotator::new(vec![], AnnotatorConfig::default());
        let table = collect_candidate_answers(&corpus, &annotator);
        assert!(table.by_answer.is_empty());
        assert_eq!(table.total_mentions(), 0);
    }

    #[test]
    fn two_entities_counts() {
        let corpus = one_passage_corpus(&[
            "Chicago Bears beat Paris. Chicago Bears visited Paris and Paris.",
        ]);
        let annotator = GazetteerAnnotator::new(
            vec![entry("chicago bears", "E1", 0.9), entry("paris", "E2", 0.9)],
            AnnotatorConfig::default(),
        );
        let table = collect_candidate_answers(&corpus, &annotator);
        assert_eq!(table.by_answer.len(), 2);
        assert_eq!(table.by_answer["E1"].len(), 2);
        assert_eq!(table.by_answer["E2"].len(), 3);
        assert_eq!(table.total_mentions(), 5);
    }

    #[test]
    fn mentions_never_overlap() {
        let annotator = GazetteerAnnotator::new(
            vec![entry("chicago bears", "E1", 0.9), entry("bears", "E2", 0.9)],
            AnnotatorConfig::default(),
        );
        let mentions = annotator.annotate(&passage("Chicago Bears Bears Chicago Bears"));
        for w in mentions.windows(2) {
            assert!(w[0].char_end <= w[1].char_start);
        }
    }
}
