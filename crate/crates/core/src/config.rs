//! Pipeline configuration with built-in defaults.

use serde::{Deserialize, Serialize};

use crate::annotate::AnnotatorConfig;
use crate::error::{Error, Result};
use crate::retrieval::{BM25Params, RetrievalConfig};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub min_passage_chars: usize,
    pub entity_threshold: f64,
    pub k: usize,
    pub prefilter_n: usize,
    pub bm25_k1: f64,
    pub bm25_b: f64,
    pub embedding_dim: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            min_passage_chars: 50,
            entity_threshold: 0.2,
            k: 10,
            prefilter_n: 10_000,
            bm25_k1: 1.2,
            bm25_b: 0.75,
            embedding_dim: 256,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidConfig { reason });
        if self.min_passage_chars < 1 {
            return fail("min_passage_chars must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.entity_threshold) {
            return fail(format!("entity_threshold {} outside [0,1]", self.entity_threshold));
        }
        if self.k < 1 {
            return fail("k must be >= 1".into());
        }
        if self.prefilter_n < 1 {
            return fail("prefilter_n must be >= 1".into());
        }
        if self.bm25_k1 < 0.0 {
            return fail(format!("bm25_k1 {} must be >= 0", self.bm25_k1));
        }
        if !(0.0..=1.0).contains(&self.bm25_b) {
            return fail(format!("bm25_b {} outside [0,1]", self.bm25_b));
        }
        if self.embedding_dim < 1 {
            return fail("embedding_dim must be >= 1".into());
        }
        Ok(())
    }

    pub fn annotator(&self) -> AnnotatorConfig {
        AnnotatorConfig {
            threshold: self.entity_threshold,
        }
    }

    pub fn retrieval(&self) -> RetrievalConfig {
        RetrievalConfig {
            k: self.k,
            prefilter_n: self.prefilter_n,
        }
    }

    pub fn bm25(&self) -> BM25Params {
        BM25Params {
            k1: self.bm25_k1,
            b: self.bm25_b,
        }
    }
}
