//! Command-line front end: build spaces offline, answer queries online,
//! run evaluations, inspect artifacts.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qspace_core::eval::{evaluate, format_report, load_dataset, PipelineSystem, QaSystem};
use qspace_core::pipeline::{self, BuildManifest, Pipeline, QueryResult, SystemKind};
use qspace_core::space::load_qsa_space;
use qspace_core::PipelineConfig;

#[derive(Parser)]
#[command(name = "qspace", about = "Question-space open-domain QA", version)]
struct Cli {
    /// JSON config file; flags override it, it overrides built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory holding built artifacts.
    #[arg(long, global = true, default_value = "artifacts")]
    artifacts_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ConfigOverrides {
    #[arg(long)]
    min_passage_chars: Option<usize>,
    #[arg(long)]
    entity_threshold: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    prefilter_n: Option<usize>,
    #[arg(long)]
    bm25_k1: Option<f64>,
    #[arg(long)]
    bm25_b: Option<f64>,
    #[arg(long)]
    embedding_dim: Option<usize>,
}

impl ConfigOverrides {
    fn apply(&self, mut config: PipelineConfig) -> PipelineConfig {
        if let Some(v) = self.min_passage_chars {
            config.min_passage_chars = v;
        }
        if let Some(v) = self.entity_threshold {
            config.entity_threshold = v;
        }
        if let Some(v) = self.k {
            config.k = v;
        }
        if let Some(v) = self.prefilter_n {
            config.prefilter_n = v;
        }
        if let Some(v) = self.bm25_k1 {
            config.bm25_k1 = v;
        }
        if let Some(v) = self.bm25_b {
            config.bm25_b = v;
        }
        if let Some(v) = self.embedding_dim {
            config.embedding_dim = v;
        }
        config
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build question spaces and indexes from a corpus.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        gazetteer: PathBuf,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// Answer a question; reads questions from stdin when none is given.
    Query {
        question: Option<String>,
        /// Print full provenance: passage, Answer 1, {Answer 2}, Voted
        /// Answer 2, Answer 3 and the chosen source.
        #[arg(long)]
        explain: bool,
    },
    /// Evaluate workflows on a dataset and write a report.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated workflow names; defaults to all.
        #[arg(long, value_delimiter = ',')]
        systems: Vec<String>,
        /// Machine-readable report destination.
        #[arg(long, default_value = "eval_report.json")]
        out: PathBuf,
    },
    /// Inspect a built {Q}A space.
    Inspect {
        /// Space file; defaults to the artifacts directory.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Print this answer's {Q}A pair instead of summary statistics.
        #[arg(long)]
        answer: Option<String>,
    },
}

fn load_config(path: Option<&Path>) -> anyhow::Result<PipelineConfig> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            let config: PipelineConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", p.display()))?;
            Ok(config)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Build {
            corpus,
            gazetteer,
            overrides,
        } => {
            let config = overrides.apply(load_config(cli.config.as_deref())?);
            let manifest = pipeline::build(&corpus, &gazetteer, &config, &cli.artifacts_dir)?;
            print_manifest(&manifest);
            if manifest.qa_pair_count == 0 {
                eprintln!("warning: build produced 0 QA pairs");
            }
            Ok(())
        }
        Command::Query { question, explain } => {
            let pipeline = Pipeline::load(&cli.artifacts_dir)?;
            match question {
                Some(q) => answer_one(&pipeline, &q, explain),
                None => {
                    // REPL mode: one question per stdin line.
                    let stdin = std::io::stdin();
                    for line in stdin.lock().lines() {
                        let line = line?;
                        if line.trim().is_empty() {
                            continue;
                        }
                        answer_one(&pipeline, line.trim(), explain)?;
                        std::io::stdout().flush()?;
                    }
                    Ok(())
                }
            }
        }
        Command::Eval {
            dataset,
            systems,
            out,
        } => {
            let pipeline = Pipeline::load(&cli.artifacts_dir)?;
            let dataset = load_dataset(&dataset)?;
            let kinds: Vec<SystemKind> = if systems.is_empty() {
                SystemKind::ALL.to_vec()
            } else {
                systems
                    .iter()
                    .map(|s| SystemKind::parse(s))
                    .collect::<Result<_, _>>()?
            };
            let wrapped: Vec<PipelineSystem> = kinds
                .iter()
                .map(|&kind| PipelineSystem {
                    pipeline: &pipeline,
                    kind,
                })
                .collect();
            let refs: Vec<&dyn QaSystem> = wrapped.iter().map(|s| s as &dyn QaSystem).collect();
            let report = evaluate(&refs, &dataset)?;
            print!("{}", format_report(&report));
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)
                .with_context(|| format!("writing report {}", out.display()))?;
            println!("report written to {}", out.display());
            Ok(())
        }
        Command::Inspect { space, answer } => {
            let path = space.unwrap_or_else(|| cli.artifacts_dir.join(pipeline::QSA_SPACE_FILE));
            let (qsa, fingerprint) = load_qsa_space(&path)?;
            match answer {
                Some(id) => match qsa.pairs.get(&id) {
                    Some(pair) => {
                        println!("answer: {} ({})", pair.canonical_name, pair.entity_type.as_str());
                        println!("questions ({}):", pair.questions.len());
                        for q in &pair.questions {
                            println!("  {q}");
                        }
                        Ok(())
                    }
                    None => bail!(qspace_core::Error::UnknownAnswerId { answer_id: id }),
                },
                None => {
                    let answers = qsa.pairs.len();
                    let questions = qsa.total_questions();
                    println!("corpus fingerprint: {fingerprint}");
                    println!("answers: {answers}");
                    println!("questions: {questions}");
                    let mean = if answers == 0 {
                        0.0
                    } else {
                        questions as f64 / answers as f64
                    };
                    println!("mean questions per answer: {mean:.3}");
                    Ok(())
                }
            }
        }
    }
}

fn print_manifest(m: &BuildManifest) {
    println!("corpus fingerprint: {}", m.corpus_fingerprint);
    println!("documents: {}", m.document_count);
    println!("passages: {}", m.passage_count);
    println!("mentions: {}", m.mention_count);
    println!(
        "questions: {} ({} degenerate contexts skipped)",
        m.question_count, m.degenerate_count
    );
    println!("qa pairs: {}", m.qa_pair_count);
    println!("qsa pairs: {}", m.qsa_pair_count);
}

fn answer_one(pipeline: &Pipeline, question: &str, explain: bool) -> anyhow::Result<()> {
    let result = pipeline.query(question)?;
    if explain {
        print_explained(&result);
    } else {
        println!("{}", result.final_answer.text);
    }
    Ok(())
}

fn print_explained(result: &QueryResult) {
    let fa = &result.final_answer;
    println!("answer: {}", fa.text);
    println!("source: {:?}", fa.source);
    println!(
        "passage: {} (similarity {:.4})",
        result.passage_id, result.passage_similarity
    );
    match &result.answer1 {
        Some(span) => println!("answer 1: {} (score {})", span.text, span.score),
        None => println!("answer 1: absent (no candidate span)"),
    }
    println!("answer 2 ({} entries):", result.answer2.len());
    for r in &result.answer2 {
        println!(
            "  {:.4}  {}  [{}]",
            r.similarity, r.surface, r.canonical_name
        );
    }
    match &fa.voted_answer2 {
        Some(v) => println!("voted answer 2: {v}"),
        None => println!("voted answer 2: absent"),
    }
    println!("answer 3: {} [{}]", result.answer3_name, result.answer3_id);
}
