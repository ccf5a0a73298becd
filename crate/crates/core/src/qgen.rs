//! Question generation from entity mentions.
//!
//! The [`QuestionGenerator`] trait is the adapter contract; neural
//! generators can be wired in externally. [`TemplateQuestionGenerator`]
//! is the deterministic built-in: it takes the sentence containing the
//! mention, masks the mention out and fronts a question word chosen by
//! entity type.

use serde::{Deserialize, Serialize};

use crate::annotate::{CandidateAnswerTable, EntityMention, EntityType};
use crate::corpus::{char_slice, Corpus, Passage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedQuestion {
    pub question_id: String,
    pub text: String,
    pub mention_id: String,
    pub source_passage_id: String,
}

/// Adapter contract for question generators.
pub trait QuestionGenerator {
    fn generate(&self, mention: &EntityMention, passage: &Passage) -> Result<GeneratedQuestion>;
}

/// Sentence terminators used by the built-in generator.
const TERMINATORS: [char; 3] = ['.', '!', '?'];

fn question_word(entity_type: EntityType) -> &'static str {
    match entity_type {
        EntityType::PersonOrg => "who",
        EntityType::Location => "where",
        EntityType::Other => "what",
    }
}

/// The deterministic template generator.
pub struct TemplateQuestionGenerator;

impl TemplateQuestionGenerator {
    /// Sentence span (char offsets into the passage text, terminator
    /// excluded) containing the given char position.
    fn sentence_span(text: &str, pos: usize) -> (usize, usize) {
        let chars: Vec<char> = text.chars().collect();
        let mut start = 0;
        for i in (0..pos.min(chars.len())).rev() {
            if TERMINATORS.contains(&chars[i]) {
                start = i + 1;
                break;
            }
        }
        let mut end = chars.len();
        for (i, ch) in chars.iter().enumerate().skip(pos) {
            if TERMINATORS.contains(ch) {
                end = i;
                break;
            }
        }
        (start, end)
    }
}

impl QuestionGenerator for TemplateQuestionGenerator {
    fn generate(&self, mention: &EntityMention, passage: &Passage) -> Result<GeneratedQuestion> {
        let text = &passage.text;
        // A mention that crosses a terminator has no single containing
        // sentence.
        if char_slice(text, mention.char_start, mention.char_end)
            .chars()
            .any(|c| TERMINATORS.contains(&c))
        {
            return Err(Error::DegenerateContext {
                mention_id: mention.mention_id.clone(),
            });
        }
        let (sent_start, sent_end) = Self::sentence_span(text, mention.char_start);
        if mention.char_end > sent_end {
            return Err(Error::DegenerateContext {
                mention_id: mention.mention_id.clone(),
            });
        }

        let sentence = char_slice(text, sent_start, sent_end);
        let rel_start = mention.char_start - sent_start;
        let rel_end = mention.char_end - sent_start;
        let before = char_slice(&sentence, 0, rel_start);
        let after = char_slice(&sentence, rel_end, sentence.chars().count());

        let qword = question_word(mention.entity_type);
        let body = if before.trim().is_empty() {
            // Sentence-initial mention: the question word takes its place.
            format!("{qword}{after}")
        } else {
            // Front the question word; the sentence-initial word loses its
            // capitalization.
            let mut rest = format!("{before}{after}");
            rest = lowercase_first_alphabetic(&rest);
            format!("{qword} {rest}")
        };
        let body = body.split_whitespace().collect::<Vec<_>>().join(" ");

        Ok(GeneratedQuestion {
            question_id: format!("q#{}", mention.mention_id),
            text: format!("{body}?"),
            mention_id: mention.mention_id.clone(),
            source_passage_id: passage.passage_id.clone(),
        })
    }
}

fn lowercase_first_alphabetic(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut done = false;
    for ch in s.chars() {
        if !done && ch.is_alphabetic() {
            out.extend(ch.to_lowercase());
            done = true;
        } else {
            out.push(ch);
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct GenerationReport {
    /// Questions in corpus order of their mentions.
    pub questions: Vec<GeneratedQuestion>,
    /// Mentions skipped for degenerate contexts.
    pub degenerate_count: usize,
}

/// Generate one question per candidate mention; degenerate contexts are
/// counted, not fatal.
pub fn generate_all(
    candidates: &CandidateAnswerTable,
    corpus: &Corpus,
    generator: &dyn QuestionGenerator,
) -> GenerationReport {
    let mut report = GenerationReport::default();
    for mention in candidates.mentions_in_corpus_order() {
        let passage = match corpus.passage(&mention.passage_id) {
            Some(p) => p,
            None => {
                report.degenerate_count += 1;
                continue;
            }
        };
        match generator.generate(mention, passage) {
            Ok(q) => report.questions.push(q),
            Err(_) => report.degenerate_count += 1,
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn passage(text: &str) -> Passage {
        Passage {
            passage_id: "d1#p0".into(),
            doc_id: "d1".into(),
            text: text.into(),
            char_start: 0,
            char_end: text.chars().count(),
        }
    }

    fn mention_at(p: &Passage, surface: &str, entity_type: EntityType) -> EntityMention {
        let start = p
            .text
            .chars()
            .collect::<String>()
            .find(surface)
            .expect("surface present");
        // find() returns a byte offset; fixtures here are ASCII.
        let char_start = start;
        let char_end = char_start + surface.chars().count();
        EntityMention {
            mention_id: format!("{}:{}-{}", p.passage_id, char_start, char_end),
            canonical_id: "E1".into(),
            canonical_name: surface.into(),
            entity_type,
            score: 0.9,
            passage_id: p.passage_id.clone(),
            char_start,
            char_end,
            surface: surface.into(),
        }
    }

    #[test]
    fn sentence_initial_mention() {
        let p = passage("Chicago Bears defeated the Patriots.");
        let m = mention_at(&p, "Chicago Bears", EntityType::PersonOrg);
        let q = TemplateQuestionGenerator.generate(&m, &p).unwrap();
        assert_eq!(q.text, "who defeated the Patriots?");
    }

    #[test]
    fn mid_sentence_location_mention() {
        let p = passage("The game was held in New Orleans.");
        let m = mention_at(&p, "New Orleans", EntityType::Location);
        let q = TemplateQuestionGenerator.generate(&m, &p).unwrap();
        assert_eq!(q.text, "where the game was held in?");
    }

    #[test]
    fn mention_crossing_terminator_is_degenerate() {
        let p = passage("It ended. Chicago. Bears won the game.");
        let mut m = mention_at(&p, "Chicago. Bears", EntityType::PersonOrg);
        m.surface = "Chicago. Bears".into();
        match TemplateQuestionGenerator.generate(&m, &p) {
            Err(Error::DegenerateContext { .. }) => {}
            other => panic!("expected degenerate-context error, got {other:?}"),
        }
    }

    #[test]
    fn question_word_agrees_with_entity_type() {
        for et in EntityType::ALL {
            let p = passage("The answer is Springfield today.");
            let m = mention_at(&p, "Springfield", et);
            let q = TemplateQuestionGenerator.generate(&m, &p).unwrap();
            assert!(q.text.starts_with(question_word(et)), "{}", q.text);
        }
    }

    #[test]
    fn generated_text_masks_the_answer() {
        let p = passage("The champion Chicago Bears paraded downtown.");
        let m = mention_at(&p, "Chicago Bears", EntityType::PersonOrg);
        let q = TemplateQuestionGenerator.generate(&m, &p).unwrap();
        assert!(!q.text.contains("Chicago Bears"));
        assert!(q.text.ends_with('?'));
    }

    #[test]
    fn generate_all_counts_degenerates() {
        use crate::annotate::{
            collect_candidate_answers, AnnotatorConfig, EntityAnnotator, GazetteerAnnotator,
            GazetteerEntry,
        };
        use crate::corpus::{build_corpus, Document};

        let body = "Chicago Bears won the opener at home. \
                    Chicago Bears lost the rematch badly. \
                    Chicago Bears tied the final game. \
                    So ended the year of Chicago. Bears fans wept for a while."
            .to_string();
        let corpus = build_corpus(
            vec![Document {
                doc_id: "d1".into(),
                title: None,
                body,
            }],
            1,
        );
        let annotator = GazetteerAnnotator::new(
            vec![GazetteerEntry {
                surface: "chicago bears".into(),
                canonical_id: "E1".into(),
                canonical_name: "Chicago Bears".into(),
                entity_type: EntityType::PersonOrg,
                score: 0.9,
            }],
            AnnotatorConfig::default(),
        );
        // 4 mentions total: three clean ones plus "Chicago. Bears" which
        // spans a terminator.
        let mentions = annotator.annotate(&corpus.passages[0]);
        assert_eq!(mentions.len(), 4);
        let table = collect_candidate_answers(&corpus, &annotator);
        let report = generate_all(&table, &corpus, &TemplateQuestionGenerator);
        assert_eq!(report.questions.len(), 3);
        assert_eq!(report.degenerate_count, 1);
    }
}
