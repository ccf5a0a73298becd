//! Reader-retriever open-domain question answering.
//!
//! Offline, the corpus is read into two question spaces: a QA Space
//! pairing every answer occurrence with a question generated from its
//! context, and a {Q}A Space pairing each distinct answer with the set of
//! all its questions. Online, three retrievers run per query: a passage
//! retriever feeding a span reader (Answer 1), an individual question
//! retriever over the QA Space ({Answer 2}), and a BM25 retriever over
//! the {Q}A Space (Answer 3). A consistency rule combines the three into
//! the final answer.

pub mod aggregate;
pub mod annotate;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod qgen;
pub mod reader;
pub mod retrieval;
pub mod space;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use pipeline::{Pipeline, SystemKind};
