//! Answer normalization, the majority vote over {Answer 2}, and the
//! consistency rule that picks the final answer.
//!
//! The rule: accept Answer 1 when it appears (under normalization) among
//! the answers attached to the k retrieved questions, otherwise fall back
//! to Answer 3 from the aggregated question retriever.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reader::AnswerSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnswerSource {
    /// Answer 1 accepted: the retriever-reader agreed with {Answer 2}.
    RetrieverReader,
    /// Answer 1 rejected: Answer 3 from the {Q}A-space retriever.
    ReaderRetrieverQsa,
}

/// One element of {Answer 2}: an answer occurrence with the surface and
/// canonical name used by the membership test, plus its similarity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedAnswer {
    pub canonical_id: String,
    pub canonical_name: String,
    pub surface: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinalAnswer {
    pub text: String,
    pub source: AnswerSource,
    pub answer1: Option<String>,
    pub answer2_list: Vec<String>,
    pub answer3: String,
    pub voted_answer2: Option<String>,
}

/// Case-fold, strip punctuation, drop the articles a/an/the, collapse
/// whitespace. Shared by the membership test and exact-match scoring.
pub fn normalize_answer(text: &str) -> String {
    let lowered = text.to_lowercase();
    let depunct: String = lowered
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    depunct
        .split_whitespace()
        .filter(|t| !matches!(*t, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Majority vote with average-order tie resolution. Groups answers by
/// normalized form; the winner has the highest count, then the smallest
/// mean 1-based position, then the lexicographically smallest normalized
/// form. Returns the first original surface of the winning group.
pub fn majority_vote(answers: &[String]) -> Result<String> {
    if answers.is_empty() {
        return Err(Error::EmptyVote);
    }
    struct Group {
        first_surface: String,
        positions: Vec<usize>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Group> = std::collections::HashMap::new();
    for (i, answer) in answers.iter().enumerate() {
        let key = normalize_answer(answer);
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Group {
                    first_surface: answer.clone(),
                    positions: Vec::new(),
                }
            })
            .positions
            .push(i + 1);
    }
    let winner = order
        .iter()
        .min_by(|a, b| {
            let (ga, gb) = (&groups[*a], &groups[*b]);
            let count = gb.positions.len().cmp(&ga.positions.len());
            let mean = |g: &Group| g.positions.iter().sum::<usize>() as f64 / g.positions.len() as f64;
            count
                .then(mean(ga).partial_cmp(&mean(gb)).unwrap())
                .then(a.cmp(b))
        })
        .unwrap();
    Ok(groups[winner].first_surface.clone())
}

/// The consistency rule combining Answer 1, {Answer 2} and Answer 3.
pub fn aggregate_final(
    answer1: Option<&AnswerSpan>,
    answer2: &[RankedAnswer],
    answer3: (&str, &str),
) -> FinalAnswer {
    let voted_answer2 = if answer2.is_empty() {
        None
    } else {
        let surfaces: Vec<String> = answer2.iter().map(|r| r.surface.clone()).collect();
        majority_vote(&surfaces).ok()
    };
    let answer2_list: Vec<String> = answer2.iter().map(|r| r.surface.clone()).collect();
    let (_, answer3_name) = answer3;

    let accepted = answer1.map(|span| {
        let norm = normalize_answer(&span.text);
        answer2.iter().any(|r| {
            normalize_answer(&r.canonical_name) == norm || normalize_answer(&r.surface) == norm
        })
    });

    match (answer1, accepted) {
        (Some(span), Some(true)) => FinalAnswer {
            text: span.text.clone(),
            source: AnswerSource::RetrieverReader,
            answer1: Some(span.text.clone()),
            answer2_list,
            answer3: answer3_name.to_string(),
            voted_answer2,
        },
        _ => FinalAnswer {
            text: answer3_name.to_string(),
            source: AnswerSource::ReaderRetrieverQsa,
            answer1: answer1.map(|s| s.text.clone()),
            answer2_list,
            answer3: answer3_name.to_string(),
            voted_answer2,
        },
    }
}
