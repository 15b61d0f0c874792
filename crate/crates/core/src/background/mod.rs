//! Text-free background creation: synthesis, iterative text erasing and
//! quality/residue evaluation over pluggable expert services.

mod clients;
mod pipeline;
mod quality;

pub use clients::HttpExpert;
pub use pipeline::{
    erase_text, evaluate_background, load_source_images, parse_prompts, process_backgrounds,
    synthesize_backgrounds, write_backgrounds, BackgroundSource, EraseFailure,
};
pub use quality::quality_proxy;

use std::sync::Arc;

use image::{GrayImage, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Quad;
use crate::http::{HttpError, RetryPolicy};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct ClientError(pub String);

impl From<HttpError> for ClientError {
    fn from(e: HttpError) -> Self {
        ClientError(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum BackgroundError {
    #[error("missing expert client: {0}")]
    MissingClient(&'static str),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

/// One text detection from the OCR expert.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub quad: Quad,
    pub transcript: String,
    pub confidence: f64,
}

pub trait TextToImage: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<RgbImage, ClientError>;
}

pub trait OcrClient: Send + Sync {
    fn detect(&self, image: &RgbImage) -> Result<Vec<Detection>, ClientError>;
}

pub trait InpaintClient: Send + Sync {
    /// `mask` is 255 where content must be replaced.
    fn inpaint(&self, image: &RgbImage, mask: &GrayImage) -> Result<RgbImage, ClientError>;
}

pub trait QualityClient: Send + Sync {
    /// No-reference quality in [0, 1].
    fn score(&self, image: &RgbImage) -> Result<f64, ClientError>;
}

#[derive(Clone, Default)]
pub struct ExpertClients {
    pub text2image: Option<Arc<dyn TextToImage>>,
    pub ocr: Option<Arc<dyn OcrClient>>,
    pub inpaint: Option<Arc<dyn InpaintClient>>,
    pub quality: Option<Arc<dyn QualityClient>>,
}

impl std::fmt::Debug for ExpertClients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpertClients")
            .field("text2image", &self.text2image.is_some())
            .field("ocr", &self.ocr.is_some())
            .field("inpaint", &self.inpaint.is_some())
            .field("quality", &self.quality.is_some())
            .finish()
    }
}

impl ExpertClients {
    /// All four clients backed by one HTTP service per configured endpoint.
    pub fn from_config(cfg: &BackgroundConfig) -> Self {
        let make = |url: &Option<String>| {
            url.as_deref()
                .map(|u| Arc::new(HttpExpert::new(u, cfg.timeout_ms, cfg.retry, cfg.workers.max(1))))
        };
        Self {
            text2image: make(&cfg.text2image_endpoint).map(|c| c as Arc<dyn TextToImage>),
            ocr: make(&cfg.ocr_endpoint).map(|c| c as Arc<dyn OcrClient>),
            inpaint: make(&cfg.inpaint_endpoint).map(|c| c as Arc<dyn InpaintClient>),
            quality: make(&cfg.quality_endpoint).map(|c| c as Arc<dyn QualityClient>),
        }
    }

    /// Fails fast when a client needed by the chosen source is absent.
    pub fn check(&self, source: &BackgroundSource) -> Result<(), BackgroundError> {
        if matches!(source, BackgroundSource::Prompts(_)) && self.text2image.is_none() {
            return Err(BackgroundError::MissingClient("text2image"));
        }
        if self.ocr.is_none() {
            return Err(BackgroundError::MissingClient("ocr"));
        }
        if self.inpaint.is_none() {
            return Err(BackgroundError::MissingClient("inpaint"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundConfig {
    pub quality_threshold: f64,
    pub ocr_confidence: f64,
    pub dilate_px: u32,
    pub max_iters: u32,
    pub workers: usize,
    pub timeout_ms: u64,
    pub retry: RetryPolicy,
    pub text2image_endpoint: Option<String>,
    pub ocr_endpoint: Option<String>,
    pub inpaint_endpoint: Option<String>,
    pub quality_endpoint: Option<String>,
}

impl Default for BackgroundConfig {
    fn default() -> Self {
        Self {
            quality_threshold: 0.2,
            ocr_confidence: 0.5,
            dilate_px: 3,
            max_iters: 3,
            workers: 4,
            timeout_ms: 30_000,
            retry: RetryPolicy::default(),
            text2image_endpoint: None,
            ocr_endpoint: None,
            inpaint_endpoint: None,
            quality_endpoint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Prompt(String),
    Source(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    SynthesisFailed,
    EraseFailed,
    LowQuality,
    TextResidue,
    EvaluationFailed,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RejectReason::SynthesisFailed => "synthesis-failed",
            RejectReason::EraseFailed => "erase-failed",
            RejectReason::LowQuality => "low-quality",
            RejectReason::TextResidue => "text-residue",
            RejectReason::EvaluationFailed => "evaluation-failed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Pending,
    Accepted,
    Rejected { reason: RejectReason },
}

/// One background through the pipeline. Serialized as one JSONL line; the
/// pixels travel separately as a PNG named by `file`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundRecord {
    pub id: String,
    pub provenance: Provenance,
    #[serde(skip)]
    pub image: Option<RgbImage>,
    pub file: Option<String>,
    pub image_sha256: Option<String>,
    pub erase_iterations: u32,
    pub quality_score: f64,
    pub residual_text_count: usize,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl BackgroundRecord {
    pub fn new(id: String, provenance: Provenance, image: Option<RgbImage>) -> Self {
        Self {
            id,
            provenance,
            image,
            file: None,
            image_sha256: None,
            erase_iterations: 0,
            quality_score: 0.0,
            residual_text_count: 0,
            verdict: Verdict::Pending,
            detail: None,
        }
    }

    pub fn reject(&mut self, reason: RejectReason, detail: impl Into<String>) {
        self.verdict = Verdict::Rejected { reason };
        self.detail = Some(detail.into());
    }

    pub fn is_accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }
}
