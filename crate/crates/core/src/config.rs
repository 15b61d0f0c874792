//! Pipeline configuration: one TOML file with a section per stage.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::background::BackgroundConfig;
use crate::geometry::BlockPolicy;
use crate::glyph::{load_font_dir, BitmapFont, FontResource, GlyphError};
use crate::http::RetryPolicy;
use crate::imageio::sha256_hex;
use crate::placement::PlacementConfig;
use crate::render::{BuiltinStyle, RemoteRenderer, Renderer};

pub const CONFIG_ENV: &str = "GLYPHFORGE_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config value: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderConfig {
    /// Remote render service base URL; the built-in blender when unset.
    pub endpoint: Option<String>,
    /// Fall back to the built-in blender when the service is unreachable.
    pub fallback: bool,
    pub deadline_ms: u64,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    /// Directory of .ttf/.otf fonts; the built-in bitmap font when unset.
    pub font_dir: Option<PathBuf>,
    pub style: BuiltinStyle,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            fallback: true,
            deadline_ms: 30_000,
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            font_dir: None,
            style: BuiltinStyle::default(),
        }
    }
}

impl RenderConfig {
    pub fn renderer(&self) -> Renderer {
        match &self.endpoint {
            Some(url) => Renderer::Remote(RemoteRenderer::new(
                url,
                self.retry,
                self.fallback.then(|| self.style.clone()),
                self.max_in_flight,
            )),
            None => Renderer::BuiltIn(self.style.clone()),
        }
    }

    pub fn fonts(&self) -> Result<Vec<Arc<dyn FontResource>>, GlyphError> {
        match &self.font_dir {
            None => Ok(vec![Arc::new(BitmapFont)]),
            Some(dir) => {
                let fonts = load_font_dir(dir)?;
                if fonts.is_empty() {
                    return Err(GlyphError::Font(format!("no .ttf/.otf fonts in {}", dir.display())));
                }
                Ok(fonts)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Png,
    Jpeg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub k_max: u32,
    /// Text height range in image pixels, sampled log-uniformly.
    pub min_text_height: f64,
    pub max_text_height: f64,
    pub lexicon: Option<PathBuf>,
    pub image_format: OutputFormat,
    pub jpeg_quality: u8,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            k_max: 8,
            min_text_height: 12.0,
            max_text_height: 96.0,
            lexicon: None,
            image_format: OutputFormat::Png,
            jpeg_quality: 95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub placement: PlacementConfig,
    pub block: BlockPolicy,
    pub render: RenderConfig,
    pub background: BackgroundConfig,
    pub dataset: DatasetConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// `path`, else `$GLYPHFORGE_CONFIG`, else defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self, ConfigError> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let p = &self.placement;
        if !(p.plane_tolerance >= 0.0) || !(p.depth_scale > 0.0) || !(p.max_tilt_deg >= 0.0) {
            return bad("placement.plane_tolerance and max_tilt_deg must be >= 0, depth_scale > 0".into());
        }
        if self.block.min_side == 0 {
            return bad("block.min_side must be positive".into());
        }
        let b = &self.background;
        if !(0.0..=1.0).contains(&b.quality_threshold) || !(0.0..=1.0).contains(&b.ocr_confidence) {
            return bad("background thresholds must lie in [0, 1]".into());
        }
        let d = &self.dataset;
        if d.k_max == 0 {
            return bad("dataset.k_max must be at least 1".into());
        }
        if !(d.min_text_height >= 1.0) || !(d.max_text_height >= d.min_text_height) {
            return bad(format!(
                "dataset text height range [{}, {}] is invalid",
                d.min_text_height, d.max_text_height
            ));
        }
        if !(1..=100).contains(&d.jpeg_quality) {
            return bad("dataset.jpeg_quality must be in 1..=100".into());
        }
        Ok(())
    }
}
