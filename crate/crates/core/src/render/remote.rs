use std::time::{Duration, Instant};

use super::wire::{RenderWireRequest, RenderWireResponse};
use super::{render_builtin, BuiltinStyle, RenderError, RenderRequest, RenderResult, RendererTag};
use crate::geometry::BLOCK_CANVAS;
use crate::http::{JsonClient, RetryPolicy};
use crate::imageio::decode_b64_image;

/// Client for a remote render service, optionally falling back to the
/// built-in blender when the service cannot be reached.
#[derive(Debug, Clone)]
pub struct RemoteRenderer {
    client: JsonClient,
    retry: RetryPolicy,
    fallback: Option<BuiltinStyle>,
}

impl RemoteRenderer {
    pub fn new(
        endpoint: &str,
        retry: RetryPolicy,
        fallback: Option<BuiltinStyle>,
        max_in_flight: usize,
    ) -> Self {
        Self {
            client: JsonClient::new(endpoint, max_in_flight),
            retry,
            fallback,
        }
    }

    pub fn endpoint(&self) -> &str {
        self.client.base_url()
    }

    pub fn render(&self, req: &RenderRequest) -> Result<RenderResult, RenderError> {
        req.validate()?;
        let start = Instant::now();
        let body = RenderWireRequest::from(req);
        let timeout = Duration::from_millis(req.deadline_ms.max(1));
        let resp: RenderWireResponse = match self.client.post_retry("/render", &body, timeout, &self.retry) {
            Ok(r) => r,
            Err(e) if e.is_transient() => {
                if let Some(style) = &self.fallback {
                    tracing::warn!(request_id = %req.request_id, error = %e, "remote renderer unavailable, using built-in");
                    return render_builtin(req, style);
                }
                return Err(e.into());
            }
            Err(e) => return Err(e.into()),
        };
        match resp.request_id.as_deref() {
            Some(id) if id == req.request_id => {}
            other => {
                return Err(RenderError::Malformed(format!(
                    "request_id mismatch: sent {:?}, got {other:?}",
                    req.request_id
                )))
            }
        }
        let img = decode_b64_image(&resp.rendered_block).map_err(RenderError::Malformed)?;
        if img.width() != BLOCK_CANVAS || img.height() != BLOCK_CANVAS {
            return Err(RenderError::Malformed(format!(
                "rendered block is {}x{}, expected {BLOCK_CANVAS}x{BLOCK_CANVAS}",
                img.width(),
                img.height()
            )));
        }
        Ok(RenderResult {
            rendered_block: img.to_rgb8(),
            renderer_tag: RendererTag::Remote,
            latency_ms: start.elapsed().as_millis() as u64,
        })
    }
}

/// One-shot remote render; see [`RemoteRenderer`].
pub fn render_remote(
    req: &RenderRequest,
    endpoint: &str,
    retry: &RetryPolicy,
    fallback: Option<&BuiltinStyle>,
) -> Result<RenderResult, RenderError> {
    RemoteRenderer::new(endpoint, *retry, fallback.cloned(), 1).render(req)
}
