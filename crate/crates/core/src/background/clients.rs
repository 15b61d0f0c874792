use std::time::Duration;

use image::{GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

use super::{ClientError, Detection, InpaintClient, OcrClient, QualityClient, TextToImage};
use crate::geometry::{Point, Quad};
use crate::http::{JsonClient, RetryPolicy};
use crate::imageio::{decode_b64_image, gray_to_b64, rgb_to_b64};

/// Expert service speaking JSON with base64 PNG fields on the routes
/// `/t2i`, `/ocr`, `/inpaint` and `/quality`.
#[derive(Debug, Clone)]
pub struct HttpExpert {
    client: JsonClient,
    timeout: Duration,
    retry: RetryPolicy,
}

#[derive(Serialize)]
struct PromptReq<'a> {
    prompt: &'a str,
}

#[derive(Serialize)]
struct ImageReq {
    image: String,
}

#[derive(Serialize)]
struct InpaintReq {
    image: String,
    mask: String,
}

#[derive(Deserialize)]
struct ImageResp {
    image: String,
}

#[derive(Deserialize)]
struct WireDetection {
    quad: [[f64; 2]; 4],
    #[serde(default)]
    transcript: String,
    confidence: f64,
}

#[derive(Deserialize)]
struct OcrResp {
    detections: Vec<WireDetection>,
}

#[derive(Deserialize)]
struct QualityResp {
    score: f64,
}

impl HttpExpert {
    pub fn new(endpoint: &str, timeout_ms: u64, retry: RetryPolicy, max_in_flight: usize) -> Self {
        Self {
            client: JsonClient::new(endpoint, max_in_flight),
            timeout: Duration::from_millis(timeout_ms.max(1)),
            retry,
        }
    }

    pub fn endpoint(&self) -> &str {
        self.client.base_url()
    }

    fn call<B: Serialize, R: serde::de::DeserializeOwned>(&self, route: &str, body: &B) -> Result<R, ClientError> {
        Ok(self.client.post_retry(route, body, self.timeout, &self.retry)?)
    }
}

fn decode_rgb(b64: &str) -> Result<RgbImage, ClientError> {
    decode_b64_image(b64)
        .map(|i| i.to_rgb8())
        .map_err(|e| ClientError(format!("malformed image: {e}")))
}

impl TextToImage for HttpExpert {
    fn generate(&self, prompt: &str) -> Result<RgbImage, ClientError> {
        let r: ImageResp = self.call("/t2i", &PromptReq { prompt })?;
        decode_rgb(&r.image)
    }
}

impl OcrClient for HttpExpert {
    fn detect(&self, image: &RgbImage) -> Result<Vec<Detection>, ClientError> {
        let r: OcrResp = self.call("/ocr", &ImageReq { image: rgb_to_b64(image) })?;
        r.detections
            .into_iter()
            .map(|d| {
                let quad = Quad::new(d.quad.map(|[x, y]| Point::new(x, y)))
                    .map_err(|e| ClientError(format!("malformed detection: {e}")))?;
                Ok(Detection {
                    quad,
                    transcript: d.transcript,
                    confidence: d.confidence,
                })
            })
            .collect()
    }
}

impl InpaintClient for HttpExpert {
    fn inpaint(&self, image: &RgbImage, mask: &GrayImage) -> Result<RgbImage, ClientError> {
        let body = InpaintReq {
            image: rgb_to_b64(image),
            mask: gray_to_b64(mask),
        };
        let r: ImageResp = self.call("/inpaint", &body)?;
        decode_rgb(&r.image)
    }
}

impl QualityClient for HttpExpert {
    fn score(&self, image: &RgbImage) -> Result<f64, ClientError> {
        let r: QualityResp = self.call("/quality", &ImageReq { image: rgb_to_b64(image) })?;
        if !(0.0..=1.0).contains(&r.score) {
            return Err(ClientError(format!("quality score {} outside [0, 1]", r.score)));
        }
        Ok(r.score)
    }
}
