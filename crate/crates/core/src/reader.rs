//! Span extraction from a retrieved passage (Answer 1).
//!
//! The [`PassageReader`] trait is the adapter contract; the built-in
//! lexical reader scores each entity mention in the passage by how many
//! distinct non-stopword question tokens appear in the mention's
//! containing sentence.

use serde::{Deserialize, Serialize};

use crate::annotate::EntityMention;
use crate::corpus::{char_slice, token_surfaces, Passage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerSpan {
    pub text: String,
    pub passage_id: String,
    pub char_start: usize,
    pub char_end: usize,
    pub score: f64,
}

/// Adapter contract for readers.
pub trait PassageReader {
    fn read(&self, question: &str, passage: &Passage) -> Result<AnswerSpan>;
}

const STOPWORDS: [&str; 16] = [
    "a", "an", "the", "of", "in", "on", "who", "what", "where", "when", "which", "is", "was",
    "did", "do", "to",
];

fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token)
}

const TERMINATORS: [char; 3] = ['.', '!', '?'];

/// Sentence (terminator excluded) containing a char position.
fn containing_sentence(text: &str, pos: usize) -> String {
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
    chars[start..end].iter().collect()
}

/// The built-in lexical reader. Candidates are the passage's entity
/// mentions; the score counts distinct non-stopword question tokens found
/// in the mention's sentence, excluding the mention's own tokens. Ties go
/// to the earlier mention.
pub fn builtin_read(
    question: &str,
    passage: &Passage,
    mentions: &[EntityMention],
) -> Result<AnswerSpan> {
    if mentions.is_empty() {
        return Err(Error::NoAnswer {
            passage_id: passage.passage_id.clone(),
        });
    }
    let mut question_tokens = token_surfaces(question);
    question_tokens.sort_unstable();
    question_tokens.dedup();
    question_tokens.retain(|t| !is_stopword(t));

    let mut best: Option<(usize, usize)> = None; // (score, mention idx)
    for (i, mention) in mentions.iter().enumerate() {
        let sentence = containing_sentence(&passage.text, mention.char_start);
        let sentence_tokens = token_surfaces(&sentence);
        let mention_tokens = token_surfaces(&char_slice(
            &passage.text,
            mention.char_start,
            mention.char_end,
        ));
        let overlap = question_tokens
            .iter()
            .filter(|t| sentence_tokens.contains(t) && !mention_tokens.contains(t))
            .count();
        let better = match best {
            None => true,
            Some((s, _)) => overlap > s,
        };
        if better {
            best = Some((overlap, i));
        }
    }
    let (score, idx) = best.unwrap();
    let mention = &mentions[idx];
    Ok(AnswerSpan {
        text: char_slice(&passage.text, mention.char_start, mention.char_end),
        passage_id: passage.passage_id.clone(),
        char_start: mention.char_start,
        char_end: mention.char_end,
        score: score as f64,
    })
}

/// Built-in reader packaged behind the adapter contract, annotating the
/// passage on the fly.
pub struct LexicalReader<A> {
    pub annotator: A,
}

impl<A: crate::annotate::EntityAnnotator> PassageReader for LexicalReader<A> {
    fn read(&self, question: &str, passage: &Passage) -> Result<AnswerSpan> {
        let mentions = self.annotator.annotate(passage);
        builtin_read(question, passage, &mentions)
    }
}
