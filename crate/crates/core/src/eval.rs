//! Exact-match evaluation over a line-delimited dataset, overall and per
//! answer type.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregate::normalize_answer;
use crate::annotate::EntityType;
use crate::error::{Error, Result};
use crate::pipeline::{Pipeline, SystemKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalItem {
    pub question: String,
    pub gold_answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_type: Option<EntityType>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Tally {
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl Tally {
    fn record(&mut self, correct: bool) {
        self.n += 1;
        if correct {
            self.correct += 1;
        }
        self.accuracy = self.correct as f64 / self.n as f64;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub question: String,
    pub predicted: Option<String>,
    pub correct: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SystemReport {
    pub overall: Tally,
    pub per_type: BTreeMap<String, Tally>,
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_system: BTreeMap<String, SystemReport>,
}

/// True iff the normalized prediction equals any normalized gold alias.
pub fn exact_match(predicted: &str, gold: &[String]) -> bool {
    let p = normalize_answer(predicted);
    gold.iter().any(|g| normalize_answer(g) == p)
}

/// Anything that can answer a question, for harness purposes.
pub trait QaSystem {
    fn name(&self) -> String;
    fn answer(&self, question: &str) -> Result<String>;
}

/// A pipeline workflow as a named system.
pub struct PipelineSystem<'a> {
    pub pipeline: &'a Pipeline,
    pub kind: SystemKind,
}

impl QaSystem for PipelineSystem<'_> {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }
    fn answer(&self, question: &str) -> Result<String> {
        self.pipeline.answer_with(self.kind, question)
    }
}

/// Run every system over every item. System failures score as incorrect
/// and are logged with an absent prediction.
pub fn evaluate(systems: &[&dyn QaSystem], dataset: &[EvalItem]) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut report = EvalReport::default();
    for system in systems {
        let mut sys_report = SystemReport::default();
        for item in dataset {
            let predicted = system.answer(&item.question).ok();
            let correct = predicted
                .as_deref()
                .map(|p| exact_match(p, &item.gold_answers))
                .unwrap_or(false);
            sys_report.overall.record(correct);
            if let Some(t) = item.answer_type {
                sys_report
                    .per_type
                    .entry(t.as_str().to_string())
                    .or_default()
                    .record(correct);
            }
            sys_report.predictions.push(Prediction {
                question: item.question.clone(),
                predicted,
                correct,
            });
        }
        report.per_system.insert(system.name(), sys_report);
    }
    Ok(report)
}

/// Load a line-delimited dataset file, one JSON item per line.
pub fn load_dataset(path: &Path) -> Result<Vec<EvalItem>> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(&display, e))?;
    let reader = BufReader::new(file);
    let mut items = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: EvalItem = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: display.clone(),
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        if item.gold_answers.is_empty() {
            return Err(Error::MalformedRecord {
                path: display.clone(),
                line: lineno + 1,
                reason: "empty gold_answers".into(),
            });
        }
        items.push(item);
    }
    Ok(items)
}

/// Human-readable table, one row per system.
pub fn format_report(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>8} {:>12} {:>10} {:>8}\n",
        "system", "overall", "person/org", "location", "other"
    ));
    for (name, sys) in &report.per_system {
        let cell = |t: EntityType| {
            sys.per_type
                .get(t.as_str())
                .map(|tally| format!("{:.3}", tally.accuracy))
                .unwrap_or_else(|| "-".to_string())
        };
        out.push_str(&format!(
            "{:<28} {:>8.3} {:>12} {:>10} {:>8}\n",
            name,
            sys.overall.accuracy,
            cell(EntityType::PersonOrg),
            cell(EntityType::Location),
            cell(EntityType::Other),
        ));
    }
    out
}
