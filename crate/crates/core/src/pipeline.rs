//! Offline build and online query, tied together over an artifacts
//! directory.
//!
//! `build` runs the offline half (ingest, annotate, generate, spaces,
//! indexes) and persists everything needed to answer queries. `Pipeline`
//! loads the artifacts back and exposes the individual workflows plus the
//! combined consistency-rule answer.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate_final, majority_vote, FinalAnswer, RankedAnswer};
use crate::annotate::{
    collect_candidate_answers, load_gazetteer, GazetteerAnnotator, GazetteerEntry,
};
use crate::config::PipelineConfig;
use crate::corpus::{char_slice, load_corpus, Corpus};
use crate::error::{Error, Result};
use crate::qgen::{generate_all, TemplateQuestionGenerator};
use crate::reader::{builtin_read, AnswerSpan};
use crate::retrieval::{
    build_aggregated_index, retrieve_aggregated_with_index, retrieve_individual, retrieve_passage,
    HashedTfIdfEmbedder, InvertedIndex, PassageIndex, QuestionIndex,
};
use crate::space::{
    aggregate_questions, build_qa_space, load_qa_space, load_qsa_space, save_qa_space,
    save_qsa_space, QASpace, QSetASpace,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const QA_SPACE_FILE: &str = "qa_space.jsonl";
pub const QSA_SPACE_FILE: &str = "qsa_space.jsonl";
pub const PASSAGE_INDEX_FILE: &str = "passage_index.json";
pub const EMBEDDINGS_FILE: &str = "embeddings.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildManifest {
    pub corpus_path: String,
    pub gazetteer_path: String,
    pub corpus_fingerprint: String,
    pub document_count: usize,
    pub passage_count: usize,
    pub mention_count: usize,
    pub question_count: usize,
    pub degenerate_count: usize,
    pub qa_pair_count: usize,
    pub qsa_pair_count: usize,
    pub config: PipelineConfig,
}

/// Persisted embedding cache: the embedder state plus one vector per
/// passage in corpus order.
#[derive(Debug, Serialize, Deserialize)]
struct EmbeddingCache {
    embedder: HashedTfIdfEmbedder,
    passage_vectors: Vec<Vec<f64>>,
}

/// Run the offline half of the pipeline and persist artifacts.
pub fn build(
    corpus_path: &Path,
    gazetteer_path: &Path,
    config: &PipelineConfig,
    artifacts_dir: &Path,
) -> Result<BuildManifest> {
    config.validate()?;
    let corpus = load_corpus(corpus_path, config.min_passage_chars)
        .map_err(Error::in_stage("ingest"))?;
    let gazetteer = load_gazetteer(gazetteer_path).map_err(Error::in_stage("ingest"))?;

    let annotator = GazetteerAnnotator::new(gazetteer, config.annotator());
    let candidates = collect_candidate_answers(&corpus, &annotator);

    let report = generate_all(&candidates, &corpus, &TemplateQuestionGenerator);
    let qa = build_qa_space(&report.questions, &candidates).map_err(Error::in_stage("space"))?;
    let qsa = aggregate_questions(&qa);

    let embedder =
        HashedTfIdfEmbedder::from_texts(corpus.passages.iter().map(|p| p.text.as_str()), config.embedding_dim);
    let passage_index = PassageIndex::build(
        corpus
            .passages
            .iter()
            .map(|p| (p.passage_id.clone(), p.text.as_str())),
        &embedder,
    );

    fs::create_dir_all(artifacts_dir)
        .map_err(|e| Error::io(artifacts_dir.display().to_string(), e))?;
    save_qa_space(&qa, &corpus.fingerprint, &artifacts_dir.join(QA_SPACE_FILE))
        .map_err(Error::in_stage("persist"))?;
    save_qsa_space(&qsa, &corpus.fingerprint, &artifacts_dir.join(QSA_SPACE_FILE))
        .map_err(Error::in_stage("persist"))?;
    write_json(&artifacts_dir.join(PASSAGE_INDEX_FILE), &passage_index.index)?;
    write_json(
        &artifacts_dir.join(EMBEDDINGS_FILE),
        &EmbeddingCache {
            embedder,
            passage_vectors: passage_index.embeddings,
        },
    )?;

    let manifest = BuildManifest {
        corpus_path: corpus_path.display().to_string(),
        gazetteer_path: gazetteer_path.display().to_string(),
        corpus_fingerprint: corpus.fingerprint.clone(),
        document_count: corpus.stats.document_count,
        passage_count: corpus.stats.passage_count,
        mention_count: candidates.total_mentions(),
        question_count: report.questions.len(),
        degenerate_count: report.degenerate_count,
        qa_pair_count: qa.pairs.len(),
        qsa_pair_count: qsa.pairs.len(),
        config: *config,
    };
    write_json(&artifacts_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let display = path.display().to_string();
    let json = serde_json::to_string(value).map_err(|e| Error::io(&display, e.into()))?;
    fs::write(path, json).map_err(|e| Error::io(&display, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let display = path.display().to_string();
    if !path.exists() {
        return Err(Error::MissingArtifact { path: display });
    }
    let data = fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    serde_json::from_str(&data).map_err(|e| Error::MalformedRecord {
        path: display,
        line: 0,
        reason: e.to_string(),
    })
}

/// Loaded artifacts, immutable and ready to answer queries.
pub struct Pipeline {
    pub manifest: BuildManifest,
    pub corpus: Corpus,
    pub qa: QASpace,
    pub qsa: QSetASpace,
    annotator: GazetteerAnnotator,
    embedder: HashedTfIdfEmbedder,
    passage_index: PassageIndex,
    question_index: QuestionIndex,
    aggregated_index: InvertedIndex,
}

/// Full provenance of one query, for --explain output.
#[derive(Debug, Clone, Serialize)]
pub struct QueryResult {
    pub final_answer: FinalAnswer,
    pub passage_id: String,
    pub passage_similarity: f64,
    pub answer1: Option<AnswerSpan>,
    pub answer2: Vec<RankedAnswer>,
    pub answer3_id: String,
    pub answer3_name: String,
}

impl Pipeline {
    pub fn load(artifacts_dir: &Path) -> Result<Pipeline> {
        let manifest: BuildManifest = read_json(&artifacts_dir.join(MANIFEST_FILE))?;
        let config = manifest.config;

        let corpus = load_corpus(Path::new(&manifest.corpus_path), config.min_passage_chars)
            .map_err(Error::in_stage("ingest"))?;
        let gazetteer: Vec<GazetteerEntry> =
            load_gazetteer(Path::new(&manifest.gazetteer_path)).map_err(Error::in_stage("ingest"))?;
        let annotator = GazetteerAnnotator::new(gazetteer, config.annotator());

        let qa_path = artifacts_dir.join(QA_SPACE_FILE);
        if !qa_path.exists() {
            return Err(Error::MissingArtifact {
                path: qa_path.display().to_string(),
            });
        }
        let (qa, _) = load_qa_space(&qa_path)?;
        let qsa_path = artifacts_dir.join(QSA_SPACE_FILE);
        if !qsa_path.exists() {
            return Err(Error::MissingArtifact {
                path: qsa_path.display().to_string(),
            });
        }
        let (qsa, _) = load_qsa_space(&qsa_path)?;

        let mut index: InvertedIndex = read_json(&artifacts_dir.join(PASSAGE_INDEX_FILE))?;
        index.rebuild_lookup();
        let cache: EmbeddingCache = read_json(&artifacts_dir.join(EMBEDDINGS_FILE))?;
        let passage_index = PassageIndex {
            index,
            embeddings: cache.passage_vectors,
        };
        let question_index = QuestionIndex::build(&qa, &cache.embedder);
        let aggregated_index = build_aggregated_index(&qsa);

        Ok(Pipeline {
            manifest,
            corpus,
            qa,
            qsa,
            annotator,
            embedder: cache.embedder,
            passage_index,
            question_index,
            aggregated_index,
        })
    }

    /// Build in memory without touching disk; used by the evaluation
    /// harness and tests.
    pub fn build_in_memory(
        corpus: Corpus,
        gazetteer: Vec<GazetteerEntry>,
        config: PipelineConfig,
    ) -> Result<Pipeline> {
        config.validate()?;
        let annotator = GazetteerAnnotator::new(gazetteer, config.annotator());
        let candidates = collect_candidate_answers(&corpus, &annotator);
        let report = generate_all(&candidates, &corpus, &TemplateQuestionGenerator);
        let qa = build_qa_space(&report.questions, &candidates)?;
        let qsa = aggregate_questions(&qa);
        let embedder = HashedTfIdfEmbedder::from_texts(
            corpus.passages.iter().map(|p| p.text.as_str()),
            config.embedding_dim,
        );
        let passage_index = PassageIndex::build(
            corpus
                .passages
                .iter()
                .map(|p| (p.passage_id.clone(), p.text.as_str())),
            &embedder,
        );
        let question_index = QuestionIndex::build(&qa, &embedder);
        let aggregated_index = build_aggregated_index(&qsa);
        let manifest = BuildManifest {
            corpus_path: String::new(),
            gazetteer_path: String::new(),
            corpus_fingerprint: corpus.fingerprint.clone(),
            document_count: corpus.stats.document_count,
            passage_count: corpus.stats.passage_count,
            mention_count: candidates.total_mentions(),
            question_count: report.questions.len(),
            degenerate_count: report.degenerate_count,
            qa_pair_count: qa.pairs.len(),
            qsa_pair_count: qsa.pairs.len(),
            config,
        };
        Ok(Pipeline {
            manifest,
            corpus,
            qa,
            qsa,
            annotator,
            embedder,
            passage_index,
            question_index,
            aggregated_index,
        })
    }

    pub fn config(&self) -> PipelineConfig {
        self.manifest.config
    }

    /// Retriever-reader branch: retrieve the best passage and read
    /// Answer 1 out of it. `None` means the reader found no span.
    pub fn answer1(&self, question: &str) -> Result<(String, f64, Option<AnswerSpan>)> {
        let (passage_id, sim) = retrieve_passage(
            question,
            &self.passage_index,
            &self.embedder,
            &self.config().retrieval(),
            &self.config().bm25(),
        )?;
        let passage = self
            .corpus
            .passage(&passage_id)
            .ok_or_else(|| Error::MissingArtifact {
                path: format!("passage {passage_id}"),
            })?;
        let mentions = crate::annotate::EntityAnnotator::annotate(&self.annotator, passage);
        let span = match builtin_read(question, passage, &mentions) {
            Ok(span) => Some(span),
            Err(Error::NoAnswer { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok((passage_id, sim, span))
    }

    /// Individual question retriever: {Answer 2} with surfaces resolved
    /// against the corpus.
    pub fn answer2(&self, question: &str) -> Result<Vec<RankedAnswer>> {
        let ranked = retrieve_individual(
            question,
            &self.qa,
            &self.question_index,
            &self.embedder,
            &self.config().retrieval(),
            &self.config().bm25(),
        )?;
        Ok(ranked
            .into_iter()
            .map(|(pair, sim)| {
                let surface = self
                    .corpus
                    .passage(&pair.passage_id)
                    .map(|p| char_slice(&p.text, pair.char_start, pair.char_end))
                    .unwrap_or_else(|| pair.answer_canonical_name.clone());
                RankedAnswer {
                    canonical_id: pair.answer_canonical_id.clone(),
                    canonical_name: pair.answer_canonical_name.clone(),
                    surface,
                    similarity: sim,
                }
            })
            .collect())
    }

    /// Aggregated question retriever: Answer 3.
    pub fn answer3(&self, question: &str) -> Result<(String, String)> {
        retrieve_aggregated_with_index(question, &self.qsa, &self.aggregated_index, &self.config().bm25())
    }

    /// The full consistency-rule pipeline.
    pub fn query(&self, question: &str) -> Result<QueryResult> {
        let (passage_id, passage_similarity, answer1) = self.answer1(question)?;
        let answer2 = self.answer2(question)?;
        let (answer3_id, answer3_name) = self.answer3(question)?;
        let final_answer = aggregate_final(
            answer1.as_ref(),
            &answer2,
            (answer3_id.as_str(), answer3_name.as_str()),
        );
        Ok(QueryResult {
            final_answer,
            passage_id,
            passage_similarity,
            answer1,
            answer2,
            answer3_id,
            answer3_name,
        })
    }
}

/// The named workflows the evaluation harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Full consistency-rule pipeline.
    R6,
    /// Passage retriever followed by the reader (Answer 1 only).
    RetrieverReader,
    /// Individual question retriever followed by the majority vote.
    ReaderRetrieverQaSpace,
    /// Aggregated question retriever over the {Q}A space.
    ReaderRetrieverQsaSpace,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::R6,
        SystemKind::RetrieverReader,
        SystemKind::ReaderRetrieverQaSpace,
        SystemKind::ReaderRetrieverQsaSpace,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::R6 => "r6",
            SystemKind::RetrieverReader => "retriever-reader",
            SystemKind::ReaderRetrieverQaSpace => "reader-retriever-qa-space",
            SystemKind::ReaderRetrieverQsaSpace => "reader-retriever-qsa-space",
        }
    }

    pub fn parse(name: &str) -> Result<SystemKind> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownSystem {
                name: name.to_string(),
                valid: SystemKind::ALL
                    .iter()
                    .map(|k| k.name())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

impl Pipeline {
    /// Answer a question with one named workflow.
    pub fn answer_with(&self, system: SystemKind, question: &str) -> Result<String> {
        match system {
            SystemKind::R6 => Ok(self.query(question)?.final_answer.text),
            SystemKind::RetrieverReader => {
                let (_, _, span) = self.answer1(question)?;
                span.map(|s| s.text).ok_or_else(|| Error::NoAnswer {
                    passage_id: String::new(),
                })
            }
            SystemKind::ReaderRetrieverQaSpace => {
                let ranked = self.answer2(question)?;
                let surfaces: Vec<String> = ranked.into_iter().map(|r| r.surface).collect();
                majority_vote(&surfaces)
            }
            SystemKind::ReaderRetrieverQsaSpace => Ok(self.answer3(question)?.1),
        }
    }
}

/// Artifact path helper for error messages and the CLI.
pub fn artifact_paths(artifacts_dir: &Path) -> Vec<PathBuf> {
    [
        MANIFEST_FILE,
        QA_SPACE_FILE,
        QSA_SPACE_FILE,
        PASSAGE_INDEX_FILE,
        EMBEDDINGS_FILE,
    ]
    .iter()
    .map(|f| artifacts_dir.join(f))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::EntityType;
    use crate::corpus::{build_corpus, Document};

    fn entry(surface: &str, id: &str, name: &str, et: EntityType) -> GazetteerEntry {
        GazetteerEntry {
            surface: surface.into(),
            canonical_id: id.into(),
            canonical_name: name.into(),
            entity_type: et,
            score: 0.9,
        }
    }

    fn fixture_gazetteer() -> Vec<GazetteerEntry> {
        vec![
            entry("chicago bears", "E1", "Chicago Bears", EntityType::PersonOrg),
            entry("new orleans", "E2", "New Orleans", EntityType::Location),
        ]
    }

    fn fixture_corpus() -> Corpus {
        let docs = vec![
            Document {
                doc_id: "d0".into(),
                title: None,
                body: "Chicago Bears defeated the Patriots in the title game. \
                       Chicago Bears claimed the championship of Super Bowl XX that season."
                    .into(),
            },
            Document {
                doc_id: "d1".into(),
                title: None,
                body: "The big game was held in New Orleans that year. \
                       Fans travelled to New Orleans for the festivities."
                    .into(),
            },
        ];
        build_corpus(docs, 50)
    }

    #[test]
    fn build_writes_manifest_with_hand_counted_pairs() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_path = dir.path().join("corpus.jsonl");
        let gaz_path = dir.path().join("gazetteer.jsonl");
        let corpus = fixture_corpus();
        let lines: Vec<String> = corpus
            .documents
            .iter()
            .map(|d| serde_json::to_string(d).unwrap())
            .collect();
        std::fs::write(&corpus_path, lines.join("\n")).unwrap();
        let gaz_lines: Vec<String> = fixture_gazetteer()
            .iter()
            .map(|g| serde_json::to_string(g).unwrap())
            .collect();
        std::fs::write(&gaz_path, gaz_lines.join("\n")).unwrap();

        let artifacts = dir.path().join("artifacts");
        let manifest = build(
            &corpus_path,
            &gaz_path,
            &PipelineConfig::default(),
            &artifacts,
        )
        .unwrap();
        // Hand count: 2 Chicago Bears mentions + 2 New Orleans mentions.
        assert_eq!(manifest.mention_count, 4);
        assert_eq!(manifest.qa_pair_count, 4);
        assert_eq!(manifest.qsa_pair_count, 2);

        let pipeline = Pipeline::load(&artifacts).unwrap();
        assert_eq!(pipeline.qa.pairs.len(), 4);
    }

    #[test]
    fn empty_gazetteer_build_succeeds_with_zero_pairs() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_path = dir.path().join("corpus.jsonl");
        let gaz_path = dir.path().join("gazetteer.jsonl");
        std::fs::write(
            &corpus_path,
            serde_json::to_string(&Document {
                doc_id: "d0".into(),
                title: None,
                body: "x".repeat(60),
            })
            .unwrap(),
        )
        .unwrap();
        std::fs::write(&gaz_path, "").unwrap();
        let manifest = build(
            &corpus_path,
            &gaz_path,
            &PipelineConfig::default(),
            &dir.path().join("artifacts"),
        )
        .unwrap();
        assert_eq!(manifest.qa_pair_count, 0);
    }

    #[test]
    fn missing_corpus_names_ingest_stage() {
        let dir = tempfile::tempdir().unwrap();
        let gaz_path = dir.path().join("gazetteer.jsonl");
        std::fs::write(&gaz_path, "").unwrap();
        match build(
            &dir.path().join("no-such-corpus.jsonl"),
            &gaz_path,
            &PipelineConfig::default(),
            &dir.path().join("artifacts"),
        ) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "ingest"),
            other => panic!("expected ingest-stage error, got {other:?}"),
        }
    }

    #[test]
    fn query_on_unbuilt_directory_is_missing_artifact() {
        let dir = tempfile::tempdir().unwrap();
        match Pipeline::load(dir.path()) {
            Err(Error::MissingArtifact { path }) => assert!(path.contains(MANIFEST_FILE)),
            Err(other) => panic!("expected missing-artifact error, got {other:?}"),
            Ok(_) => panic!("expected missing-artifact error, got Ok"),
        }
    }

    #[test]
    fn in_memory_query_runs_all_branches() {
        let pipeline = Pipeline::build_in_memory(
            fixture_corpus(),
            fixture_gazetteer(),
            PipelineConfig::default(),
        )
        .unwrap();
        let result = pipeline.query("who defeated the Patriots?").unwrap();
        assert!(!result.final_answer.text.is_empty());
        assert_eq!(
            result.answer2.len(),
            pipeline.qa.pairs.len().min(pipeline.config().k)
        );
        for kind in SystemKind::ALL {
            // Every workflow must produce something on this fixture.
            pipeline.answer_with(kind, "who defeated the Patriots?").unwrap();
        }
    }

    #[test]
    fn unknown_system_lists_valid_names() {
        match SystemKind::parse("drqa") {
            Err(Error::UnknownSystem { valid, .. }) => assert!(valid.contains("r6")),
            other => panic!("expected unknown-system error, got {other:?}"),
        }
    }

    #[test]
    fn build_is_byte_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_path = dir.path().join("corpus.jsonl");
        let gaz_path = dir.path().join("gazetteer.jsonl");
        let corpus = fixture_corpus();
        let lines: Vec<String> = corpus
            .documents
            .iter()
            .map(|d| serde_json::to_string(d).unwrap())
            .collect();
        std::fs::write(&corpus_path, lines.join("\n")).unwrap();
        let gaz_lines: Vec<String> = fixture_gazetteer()
            .iter()
            .map(|g| serde_json::to_string(g).unwrap())
            .collect();
        std::fs::write(&gaz_path, gaz_lines.join("\n")).unwrap();

        let a = dir.path().join("a");
        let b = dir.path().join("b");
        build(&corpus_path, &gaz_path, &PipelineConfig::default(), &a).unwrap();
        build(&corpus_path, &gaz_path, &PipelineConfig::default(), &b).unwrap();
        for file in [QA_SPACE_FILE, QSA_SPACE_FILE] {
            let fa = std::fs::read(a.join(file)).unwrap();
            let fb = std::fs::read(b.join(file)).unwrap();
            assert_eq!(fa, fb, "{file} differs between builds");
        }
    }
}
