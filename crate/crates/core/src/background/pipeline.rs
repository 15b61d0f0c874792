use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;

use super::{
    quality_proxy, BackgroundConfig, BackgroundError, BackgroundRecord, ClientError, ExpertClients,
    Provenance, RejectReason, Verdict,
};
use crate::geometry::Mask;
use crate::imageio::{encode_png, sha256_hex, write_atomic};

#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundSource {
    Prompts(Vec<String>),
    Images(Vec<PathBuf>),
}

impl BackgroundSource {
    pub fn len(&self) -> usize {
        match self {
            BackgroundSource::Prompts(p) => p.len(),
            BackgroundSource::Images(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One prompt per non-empty line; lines starting with `#` are comments.
pub fn parse_prompts(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// PNG and JPEG files directly inside `dir`, sorted by name.
pub fn load_source_images(dir: &Path) -> Result<Vec<PathBuf>, BackgroundError> {
    let io = |e: std::io::Error| BackgroundError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn par_map<T: Sync, U: Send>(items: &[T], workers: usize, f: impl Fn(usize, &T) -> U + Sync + Send) -> Vec<U> {
    let run = || items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            tracing::warn!(error = %e, "could not build worker pool, running on the global pool");
            run()
        }
    }
}

fn record_id(i: usize) -> String {
    format!("bg_{i:05}")
}

/// One text-to-image call per prompt. Per-prompt failures become
/// `synthesis-failed` records; the batch continues.
pub fn synthesize_backgrounds(
    prompts: &[String],
    clients: &ExpertClients,
    workers: usize,
) -> Result<Vec<BackgroundRecord>, BackgroundError> {
    let t2i = clients
        .text2image
        .as_ref()
        .ok_or(BackgroundError::MissingClient("text2image"))?;
    Ok(par_map(prompts, workers, |i, prompt| synth_one(i, prompt, t2i.as_ref())))
}

fn synth_one(i: usize, prompt: &str, t2i: &dyn super::TextToImage) -> BackgroundRecord {
    let mut rec = BackgroundRecord::new(record_id(i), Provenance::Prompt(prompt.to_string()), None);
    match t2i.generate(prompt) {
        Ok(img) if img.width() > 0 && img.height() > 0 => rec.image = Some(img),
        Ok(_) => rec.reject(RejectReason::SynthesisFailed, "empty image"),
        Err(e) => {
            tracing::warn!(id = %rec.id, error = %e, "synthesis failed");
            rec.reject(RejectReason::SynthesisFailed, e.0);
        }
    }
    rec
}

/// Erasing stopped by a client failure after `iterations` completed
/// inpaint passes; `image` is the state after the last completed pass.
#[derive(Debug, Clone)]
pub struct EraseFailure {
    pub iterations: u32,
    pub image: RgbImage,
    pub error: ClientError,
}

impl std::fmt::Display for EraseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "erasing failed after {} iterations: {}", self.iterations, self.error)
    }
}

impl std::error::Error for EraseFailure {}

/// Detect, mask and inpaint until OCR finds nothing at or above the
/// confidence threshold, or `max_iters` inpaint passes have run.
pub fn erase_text(
    image: &RgbImage,
    clients: &ExpertClients,
    cfg: &BackgroundConfig,
) -> Result<(RgbImage, u32), EraseFailure> {
    let mut img = image.clone();
    let mut iterations = 0;
    let fail = |iterations, img: RgbImage, error| Err(EraseFailure { iterations, image: img, error });
    let (Some(ocr), Some(inpaint)) = (clients.ocr.as_ref(), clients.inpaint.as_ref()) else {
        return fail(0, img, ClientError("ocr and inpaint clients are required".into()));
    };
    let (w, h) = img.dimensions();
    while iterations < cfg.max_iters {
        let dets = match ocr.detect(&img) {
            Ok(d) => d,
            Err(e) => return fail(iterations, img, e),
        };
        let dets: Vec<_> = dets.into_iter().filter(|d| d.confidence >= cfg.ocr_confidence).collect();
        if dets.is_empty() {
            break;
        }
        let mut mask = Mask::new(w, h);
        for d in &dets {
            mask.union_with(&Mask::from_quad(w, h, &d.quad).dilate(cfg.dilate_px));
        }
        if mask.is_empty() {
            tracing::debug!(count = dets.len(), "detections cover no pixels");
            break;
        }
        let out = match inpaint.inpaint(&img, &mask.to_gray()) {
            Ok(o) => o,
            Err(e) => return fail(iterations, img, e),
        };
        if out.dimensions() != (w, h) {
            let e = ClientError(format!("inpaint returned {:?}, expected {:?}", out.dimensions(), (w, h)));
            return fail(iterations, img, e);
        }
        img = out;
        iterations += 1;
    }
    Ok((img, iterations))
}

/// Scores quality and counts residual text, then sets the verdict:
/// residual text rejects first, then low quality.
pub fn evaluate_background(
    mut rec: BackgroundRecord,
    clients: &ExpertClients,
    cfg: &BackgroundConfig,
) -> BackgroundRecord {
    if matches!(rec.verdict, Verdict::Rejected { .. }) {
        return rec;
    }
    let Some(img) = rec.image.as_ref() else {
        rec.reject(RejectReason::EvaluationFailed, "no image");
        return rec;
    };
    let score = match clients.quality.as_ref().map(|q| q.score(img)) {
        Some(Ok(s)) => s,
        Some(Err(e)) => {
            tracing::warn!(id = %rec.id, error = %e, "quality client failed, using built-in proxy");
            quality_proxy(img)
        }
        None => quality_proxy(img),
    };
    rec.quality_score = score;
    let residual = match clients.ocr.as_ref().map(|o| o.detect(img)) {
        Some(Ok(d)) => d.iter().filter(|d| d.confidence >= cfg.ocr_confidence).count(),
        Some(Err(e)) => {
            rec.reject(RejectReason::EvaluationFailed, e.0);
            return rec;
        }
        None => {
            rec.reject(RejectReason::EvaluationFailed, "ocr client missing");
            return rec;
        }
    };
    rec.residual_text_count = residual;
    if residual > 0 {
        rec.reject(RejectReason::TextResidue, format!("{residual} text detections remain"));
    } else if score < cfg.quality_threshold {
        rec.reject(
            RejectReason::LowQuality,
            format!("quality {score:.4} below {}", cfg.quality_threshold),
        );
    } else {
        rec.verdict = Verdict::Accepted;
    }
    rec
}

/// Full chain per item (synthesize or load, erase, evaluate) on a bounded
/// worker pool. Item failures are recorded, never propagated.
pub fn process_backgrounds(
    source: &BackgroundSource,
    clients: &ExpertClients,
    cfg: &BackgroundConfig,
) -> Result<Vec<BackgroundRecord>, BackgroundError> {
    clients.check(source)?;
    let chain = |mut rec: BackgroundRecord| {
        if let Some(img) = rec.image.take() {
            match erase_text(&img, clients, cfg) {
                Ok((out, iters)) => {
                    rec.image = Some(out);
                    rec.erase_iterations = iters;
                }
                Err(f) => {
                    tracing::warn!(id = %rec.id, error = %f, "erasing failed");
                    rec.erase_iterations = f.iterations;
                    rec.image = Some(f.image);
                    rec.reject(RejectReason::EraseFailed, f.error.0);
                }
            }
        }
        evaluate_background(rec, clients, cfg)
    };
    Ok(match source {
        BackgroundSource::Prompts(prompts) => {
            let t2i = clients.text2image.as_ref().expect("checked above");
            par_map(prompts, cfg.workers, |i, p| chain(synth_one(i, p, t2i.as_ref())))
        }
        BackgroundSource::Images(paths) => par_map(paths, cfg.workers, |i, p| {
            let prov = Provenance::Source(p.display().to_string());
            match image::open(p) {
                Ok(img) => chain(BackgroundRecord::new(record_id(i), prov, Some(img.to_rgb8()))),
                Err(e) => {
                    let mut rec = BackgroundRecord::new(record_id(i), prov, None);
                    rec.reject(RejectReason::SynthesisFailed, format!("unreadable image: {e}"));
                    rec
                }
            }
        }),
    })
}

/// Writes accepted images as `<id>.png` and every record to
/// `backgrounds.jsonl` in `out_dir`. Returns the JSONL path.
pub fn write_backgrounds(records: &mut [BackgroundRecord], out_dir: &Path) -> Result<PathBuf, BackgroundError> {
    let io = |p: &Path, e: std::io::Error| BackgroundError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let mut lines = String::new();
    for rec in records.iter_mut() {
        if let (true, Some(img)) = (rec.is_accepted(), rec.image.as_ref()) {
            let name = format!("{}.png", rec.id);
            let bytes = encode_png(&image::DynamicImage::ImageRgb8(img.clone()));
            let path = out_dir.join(&name);
            write_atomic(&path, &bytes).map_err(|e| io(&path, e))?;
            rec.file = Some(name);
            rec.image_sha256 = Some(sha256_hex(&bytes));
        }
        lines.push_str(&serde_json::to_string(rec).expect("record serializes"));
        lines.push('\n');
    }
    let path = out_dir.join("backgrounds.jsonl");
    write_atomic(&path, lines.as_bytes()).map_err(|e| io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{Detection, InpaintClient, OcrClient, TextToImage};
    use crate::geometry::Quad;
    use image::{GrayImage, Rgb};
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn detailed(seed: u8) -> RgbImage {
        RgbImage::from_fn(48, 32, |x, y| {
            let v = ((x * 37 + y * 91 + seed as u32 * 13) % 256) as u8;
            Rgb([v, v.wrapping_mul(3), 255 - v])
        })
    }

    struct FixedT2I;
    impl TextToImage for FixedT2I {
        fn generate(&self, prompt: &str) -> Result<RgbImage, ClientError> {
            if prompt == "bad" {
                return Err(ClientError("model exploded".into()));
            }
            Ok(detailed(prompt.len() as u8))
        }
    }

    /// Returns one box for the first `boxes` calls, then nothing.
    struct ScriptedOcr {
        calls: AtomicUsize,
        boxes: usize,
        fail_on: Option<usize>,
    }
    impl ScriptedOcr {
        fn new(boxes: usize) -> Self {
            Self { calls: AtomicUsize::new(0), boxes, fail_on: None }
        }
    }
    impl OcrClient for ScriptedOcr {
        fn detect(&self, _: &RgbImage) -> Result<Vec<Detection>, ClientError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if Some(n) == self.fail_on {
                return Err(ClientError("ocr down".into()));
            }
            if n < self.boxes {
                let quad = Quad::from_coords([4., 4., 20., 4., 20., 12., 4., 12.]).unwrap();
                Ok(vec![Detection { quad, transcript: "SALE".into(), confidence: 0.9 }])
            } else {
                Ok(vec![])
            }
        }
    }

    /// Paints the mask white, which keeps the image detailed elsewhere.
    struct PaintInpaint;
    impl InpaintClient for PaintInpaint {
        fn inpaint(&self, image: &RgbImage, mask: &GrayImage) -> Result<RgbImage, ClientError> {
            let mut out = image.clone();
            for (x, y, m) in mask.enumerate_pixels() {
                if m.0[0] > 0 {
                    out.put_pixel(x, y, Rgb([255, 255, 255]));
                }
            }
            Ok(out)
        }
    }

    fn clients(ocr: ScriptedOcr) -> ExpertClients {
        ExpertClients {
            text2image: Some(Arc::new(FixedT2I)),
            ocr: Some(Arc::new(ocr)),
            inpaint: Some(Arc::new(PaintInpaint)),
            quality: None,
        }
    }

    #[test]
    fn prompt_file_parsing() {
        assert_eq!(parse_prompts("# header\n a brick wall \n\n#x\nshop front\n"), vec!["a brick wall", "shop front"]);
        assert!(parse_prompts("").is_empty());
    }

    #[test]
    fn synthesis_records_provenance_and_failures() {
        let c = clients(ScriptedOcr::new(0));
        let prompts: Vec<String> = ["one", "bad", "three"].map(String::from).into();
        let recs = synthesize_backgrounds(&prompts, &c, 2).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].provenance, Provenance::Prompt("one".into()));
        assert_eq!(recs[2].provenance, Provenance::Prompt("three".into()));
        assert_eq!(recs[0].verdict, Verdict::Pending);
        assert_eq!(recs[2].verdict, Verdict::Pending);
        assert_eq!(recs[1].verdict, Verdict::Rejected { reason: RejectReason::SynthesisFailed });
        assert!(synthesize_backgrounds(&prompts, &ExpertClients::default(), 1).is_err());
    }

    #[test]
    fn erase_loop_contract() {
        let cfg = BackgroundConfig::default();
        let img = detailed(1);

        let (out, it) = erase_text(&img, &clients(ScriptedOcr::new(0)), &cfg).unwrap();
        assert_eq!((it, &out), (0, &img));

        let c = clients(ScriptedOcr::new(1));
        let (out, it) = erase_text(&img, &c, &cfg).unwrap();
        assert_eq!(it, 1);
        assert!(c.ocr.as_ref().unwrap().detect(&out).unwrap().is_empty());
        // box 4..20 x 4..12 grown by 3
        assert_eq!(*out.get_pixel(1, 1), Rgb([255; 3]));
        assert_ne!(*out.get_pixel(0, 0), Rgb([255; 3]));

        let (_, it) = erase_text(&img, &clients(ScriptedOcr::new(usize::MAX)), &cfg).unwrap();
        assert_eq!(it, cfg.max_iters);

        let mut ocr = ScriptedOcr::new(usize::MAX);
        ocr.fail_on = Some(2);
        let err = erase_text(&img, &clients(ocr), &cfg).unwrap_err();
        assert_eq!(err.iterations, 2);
    }

    #[test]
    fn evaluation_gates() {
        let cfg = BackgroundConfig::default();
        let flat = BackgroundRecord::new("a".into(), Provenance::Source("x".into()), Some(RgbImage::from_pixel(32, 32, Rgb([128; 3]))));
        let r = evaluate_background(flat, &clients(ScriptedOcr::new(0)), &cfg);
        assert_eq!(r.quality_score, 0.0);
        assert_eq!(r.verdict, Verdict::Rejected { reason: RejectReason::LowQuality });

        let rich = BackgroundRecord::new("b".into(), Provenance::Source("x".into()), Some(detailed(3)));
        let r = evaluate_background(rich.clone(), &clients(ScriptedOcr::new(0)), &cfg);
        assert!(r.is_accepted(), "{r:?}");

        let r = evaluate_background(rich, &clients(ScriptedOcr::new(1)), &cfg);
        assert_eq!(r.residual_text_count, 1);
        assert_eq!(r.verdict, Verdict::Rejected { reason: RejectReason::TextResidue });
    }

    #[test]
    fn pipeline_isolates_failures_and_writes_outputs() {
        let cfg = BackgroundConfig { workers: 3, ..Default::default() };
        let prompts: Vec<String> = ["wall", "bad", "sign", "door"].map(String::from).into();
        let c = clients(ScriptedOcr::new(0));
        let mut recs = process_backgrounds(&BackgroundSource::Prompts(prompts), &c, &cfg).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(recs.iter().filter(|r| r.is_accepted()).count(), 3);
        let dir = tempfile::tempdir().unwrap();
        let jsonl = write_backgrounds(&mut recs, dir.path()).unwrap();
        let text = std::fs::read_to_string(jsonl).unwrap();
        assert_eq!(text.lines().count(), 4);
        let back: BackgroundRecord = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(back.verdict, Verdict::Rejected { reason: RejectReason::SynthesisFailed });
        assert!(dir.path().join("bg_00000.png").exists());
        assert!(!dir.path().join("bg_00001.png").exists());
        let line0: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(line0["verdict"]["status"], "accepted");
        assert_eq!(line0["provenance"]["prompt"], "wall");
    }

    #[test]
    fn missing_clients_fail_at_startup() {
        let mut c = clients(ScriptedOcr::new(0));
        c.inpaint = None;
        let src = BackgroundSource::Images(vec![]);
        assert!(matches!(process_backgrounds(&src, &c, &BackgroundConfig::default()), Err(BackgroundError::MissingClient("inpaint"))));
    }
}
