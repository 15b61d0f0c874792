//! Dataset synthesis, ICDAR-style annotation files, manifests and
//! validation.

mod compose;
mod icdar;
mod lexicon;
mod synth;
mod validate;

pub use compose::{blend_text, BlendError};
pub use icdar::{icdar_line, icdar_text, parse_icdar_line, read_icdar_file, write_icdar_annotations};
pub use lexicon::Lexicon;
pub use synth::{discover_backgrounds, synthesize_dataset, BackgroundInput, SynthOptions};
pub use validate::{validate_dataset, CheckResult, ValidationReport};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Quad;
use crate::imageio::sha256_hex;
use crate::render::RendererTag;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LEXICON_FILE: &str = "lexicon.txt";
pub const BACKGROUNDS_FILE: &str = "backgrounds.jsonl";
pub const IMAGES_DIR: &str = "images";
pub const GT_DIR: &str = "gt";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("lexicon error: {0}")]
    Lexicon(String),
    #[error("no usable backgrounds: {0}")]
    NoBackgrounds(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("bad annotation: {0}")]
    Annotation(String),
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error("no images were produced")]
    NoOutput,
}

impl DatasetError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        DatasetError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub quad: Quad,
    pub transcript: String,
    pub renderer: RendererTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<Instance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestImage {
    pub image_id: String,
    pub file: String,
    pub sha256: String,
    pub width: u32,
    pub height: u32,
    pub annotation: String,
    pub annotation_sha256: String,
    pub instance_count: usize,
    pub background: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedImage {
    pub image_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCounts {
    pub requested: usize,
    pub images: usize,
    pub instances: usize,
    pub skipped: usize,
    pub by_renderer: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestBody {
    pub format_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub config_digest: String,
    pub lexicon_digest: String,
    pub lexicon_file: String,
    pub backgrounds_file: String,
    pub backgrounds_sha256: String,
    pub images: Vec<ManifestImage>,
    pub skipped: Vec<SkippedImage>,
    pub counts: ManifestCounts,
}

impl ManifestBody {
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("manifest serializes"))
    }
}

/// Manifest plus `digest`, the SHA-256 of the body's compact JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(flatten)]
    pub body: ManifestBody,
    pub digest: String,
}

impl DatasetManifest {
    pub fn new(body: ManifestBody) -> Self {
        let digest = body.digest();
        Self { body, digest }
    }

    pub fn load(dir: &Path) -> Result<Self, DatasetError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Manifest(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
