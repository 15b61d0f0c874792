use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use image::{DynamicImage, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    blend_text, icdar_text, AnnotationRecord, DatasetError, DatasetManifest, Instance, Lexicon, ManifestBody,
    ManifestCounts, ManifestImage, SkippedImage, BACKGROUNDS_FILE, GT_DIR, IMAGES_DIR, LEXICON_FILE, MANIFEST_FILE,
};
use crate::background::{BackgroundRecord, Provenance, Verdict};
use crate::config::{OutputFormat, PipelineConfig};
use crate::geometry::{Point, Quad};
use crate::glyph::{char_class, rasterize_glyph, FontResource};
use crate::imageio::{encode_jpeg, encode_png, sha256_hex, write_atomic};
use crate::placement::{candidate_regions, fit_plane, is_planar, sample_placement, DepthMap, RegionCandidate, SegmentationMap};
use crate::render::Renderer;

pub struct SynthOptions {
    pub backgrounds_dir: PathBuf,
    pub aux_dir: PathBuf,
    pub out_dir: PathBuf,
    pub lexicon: Lexicon,
    pub count: usize,
    pub seed: u64,
    pub jobs: usize,
}

/// A background image with its segmentation and depth files.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundInput {
    pub stem: String,
    pub image: PathBuf,
    pub seg_png: PathBuf,
    pub seg_json: PathBuf,
    pub depth: PathBuf,
    pub record: BackgroundRecord,
}

fn stem_of(p: &Path) -> String {
    p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string()
}

/// Pairs backgrounds with `<stem>.seg.png`, `<stem>.seg.json` and
/// `<stem>.depth.bin` (or `.depth.png`) from `aux_dir`. When the background
/// directory holds a `backgrounds.jsonl`, only its accepted records are
/// used. Unpaired backgrounds are returned with the reason they were dropped.
pub fn discover_backgrounds(
    bg_dir: &Path,
    aux_dir: &Path,
) -> Result<(Vec<BackgroundInput>, Vec<(String, String)>), DatasetError> {
    let jsonl = bg_dir.join(BACKGROUNDS_FILE);
    let mut candidates: Vec<(PathBuf, BackgroundRecord)> = Vec::new();
    if jsonl.is_file() {
        let text = std::fs::read_to_string(&jsonl).map_err(|e| DatasetError::io(&jsonl, e))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec: BackgroundRecord = serde_json::from_str(line)
                .map_err(|e| DatasetError::Manifest(format!("{}:{}: {e}", jsonl.display(), i + 1)))?;
            if let (true, Some(file)) = (rec.is_accepted(), rec.file.clone()) {
                candidates.push((bg_dir.join(file), rec));
            }
        }
    } else {
        let mut paths = Vec::new();
        for entry in std::fs::read_dir(bg_dir).map_err(|e| DatasetError::io(bg_dir, e))? {
            let p = entry.map_err(|e| DatasetError::io(bg_dir, e))?.path();
            let ext = p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
            if matches!(ext.as_deref(), Some("png" | "jpg" | "jpeg")) {
                paths.push(p);
            }
        }
        paths.sort();
        for p in paths {
            let name = p.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let mut rec = BackgroundRecord::new(stem_of(&p), Provenance::Source(name.clone()), None);
            rec.file = Some(name);
            candidates.push((p, rec));
        }
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));

    let mut found = Vec::new();
    let mut dropped = Vec::new();
    for (image, record) in candidates {
        let stem = stem_of(&image);
        let seg_png = aux_dir.join(format!("{stem}.seg.png"));
        let seg_json = aux_dir.join(format!("{stem}.seg.json"));
        let depth = [aux_dir.join(format!("{stem}.depth.bin")), aux_dir.join(format!("{stem}.depth.png"))]
            .into_iter()
            .find(|p| p.is_file());
        match (image.is_file(), seg_png.is_file() && seg_json.is_file(), depth) {
            (false, _, _) => dropped.push((stem, "background image missing".to_string())),
            (_, false, _) => dropped.push((stem, "segmentation map missing".to_string())),
            (_, _, None) => dropped.push((stem, "depth map missing".to_string())),
            (true, true, Some(depth)) => found.push(BackgroundInput {
                stem,
                image,
                seg_png,
                seg_json,
                depth,
                record,
            }),
        }
    }
    Ok((found, dropped))
}

struct Prepared {
    input: BackgroundInput,
    image: RgbImage,
    regions: Vec<RegionCandidate>,
}

fn prepare(input: BackgroundInput, cfg: &PipelineConfig) -> Result<Prepared, String> {
    let image = image::open(&input.image).map_err(|e| format!("unreadable image: {e}"))?.to_rgb8();
    let seg = SegmentationMap::load(&input.seg_png, &input.seg_json).map_err(|e| e.to_string())?;
    let depth = DepthMap::load(&input.depth).map_err(|e| e.to_string())?;
    if seg.dims() != image.dimensions() || depth.dims() != image.dimensions() {
        return Err(format!(
            "image {:?}, segmentation {:?} and depth {:?} differ in size",
            image.dimensions(),
            seg.dims(),
            depth.dims()
        ));
    }
    let allowed: BTreeSet<String> = cfg.placement.allowed_classes.iter().cloned().collect();
    let regions: Vec<RegionCandidate> = candidate_regions(&seg, &allowed, cfg.placement.min_area)
        .iter()
        .filter_map(|r| match fit_plane(&depth, r) {
            Ok(f) => Some(f),
            Err(e) => {
                tracing::debug!(background = %input.stem, error = %e, "region dropped");
                None
            }
        })
        .filter(|r| is_planar(r, &cfg.placement))
        .collect();
    if regions.is_empty() {
        return Err("no planar candidate regions".into());
    }
    Ok(Prepared { input, image, regions })
}

fn round_quad(q: &Quad) -> Option<Quad> {
    Quad::new(q.points().map(|p| Point::new(p.x.round(), p.y.round()))).ok()
}

const ASPECT_REF_PX: u32 = 32;

struct ImageOutcome {
    record: AnnotationRecord,
    file: String,
    sha256: String,
    background: String,
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    renderer: &'a Renderer,
    fonts: &'a [Arc<dyn FontResource>],
    lexicon: &'a Lexicon,
    images_dir: &'a Path,
    seed: u64,
}

fn synth_image(j: usize, bg: &Prepared, ctx: &Ctx) -> Result<ImageOutcome, String> {
    let cfg = ctx.cfg;
    let image_id = format!("img_{j:05}");
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    rng.set_stream(j as u64);
    let k = rng.random_range(1..=cfg.dataset.k_max);
    let mut regions = bg.regions.clone();
    let mut img = bg.image.clone();
    let mut instances = Vec::new();
    let heights = (cfg.dataset.min_text_height, cfg.dataset.max_text_height);
    for t in 0..k {
        let ri = rng.random_range(0..regions.len());
        let word = ctx.lexicon.sample(&mut rng).to_string();
        let font = &ctx.fonts[rng.random_range(0..ctx.fonts.len())];
        let glyph = match rasterize_glyph(&word, font.as_ref(), ASPECT_REF_PX) {
            Ok(g) => g,
            Err(e) => {
                tracing::warn!(image_id, word, error = %e, "word cannot be rasterized");
                continue;
            }
        };
        let aspect = glyph.canvas.width() as f64 / glyph.canvas.height() as f64;
        let n = regions.len();
        let Some((ri, quad)) = (0..n).map(|o| (ri + o) % n).find_map(|r| {
            sample_placement(&regions[r], aspect, &mut rng, &cfg.placement, heights)
                .and_then(|q| round_quad(&q))
                .map(|q| (r, q))
        }) else {
            continue;
        };
        regions[ri].exclude_quad(&quad, cfg.placement.margin);
        let request_id = format!("{image_id}_{t}");
        match blend_text(
            &img,
            &bg.image,
            &quad,
            &word,
            font.as_ref(),
            ctx.renderer,
            &cfg.block,
            &request_id,
            cfg.render.deadline_ms,
        ) {
            Ok((out, tag)) => {
                img = out;
                instances.push(Instance {
                    quad,
                    transcript: word,
                    renderer: tag,
                });
            }
            Err(e) => tracing::warn!(image_id, request_id, error = %e, "instance dropped"),
        }
    }
    if instances.is_empty() {
        return Err(format!("no placements succeeded on background {}", bg.input.stem));
    }
    let (ext, bytes) = match cfg.dataset.image_format {
        OutputFormat::Png => ("png", encode_png(&DynamicImage::ImageRgb8(img.clone()))),
        OutputFormat::Jpeg => ("jpg", encode_jpeg(&img, cfg.dataset.jpeg_quality)),
    };
    let file = format!("{IMAGES_DIR}/{image_id}.{ext}");
    let path = ctx.images_dir.join(format!("{image_id}.{ext}"));
    write_atomic(&path, &bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(ImageOutcome {
        record: AnnotationRecord {
            image_id,
            width: img.width(),
            height: img.height(),
            instances,
        },
        file,
        sha256: sha256_hex(&bytes),
        background: bg.input.stem.clone(),
    })
}

/// Synthesizes `count` annotated images into `out_dir` and writes the
/// manifest last. Image `j` uses background `j mod n` and its own random
/// stream derived from `seed`, so output is independent of `jobs`.
pub fn synthesize_dataset(
    opts: &SynthOptions,
    cfg: &PipelineConfig,
    renderer: &Renderer,
) -> Result<DatasetManifest, DatasetError> {
    if opts.count == 0 {
        return Err(DatasetError::NoOutput);
    }
    cfg.validate().map_err(|e| DatasetError::Config(e.to_string()))?;
    let fonts = cfg.render.fonts().map_err(|e| DatasetError::Config(e.to_string()))?;
    let lexicon = opts
        .lexicon
        .filtered(|w| w.chars().all(|c| char_class(c).is_some()))
        .map_err(|_| DatasetError::Lexicon("no lexicon word is renderable (printable ASCII only)".into()))?;
    if lexicon.len() < opts.lexicon.len() {
        tracing::warn!(dropped = opts.lexicon.len() - lexicon.len(), "lexicon words with unsupported characters skipped");
    }

    let (inputs, dropped) = discover_backgrounds(&opts.backgrounds_dir, &opts.aux_dir)?;
    for (stem, reason) in &dropped {
        tracing::warn!(background = %stem, reason = %reason, "background skipped");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| DatasetError::Config(format!("worker pool: {e}")))?;
    let needed = inputs.len().min(opts.count);
    let prepared: Vec<Prepared> = pool.install(|| {
        inputs
            .into_par_iter()
            .take(needed)
            .map(|inp| {
                let stem = inp.stem.clone();
                prepare(inp, cfg).map_err(|e| (stem, e))
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .filter_map(|r| match r {
        Ok(p) => Some(p),
        Err((stem, reason)) => {
            tracing::warn!(background = %stem, reason = %reason, "background skipped");
            None
        }
    })
    .collect();
    if prepared.is_empty() {
        return Err(DatasetError::NoBackgrounds(format!(
            "{} found with paired segmentation and depth, none usable",
            needed
        )));
    }

    let out = &opts.out_dir;
    let images_dir = out.join(IMAGES_DIR);
    let gt_dir = out.join(GT_DIR);
    for d in [&images_dir, &gt_dir] {
        std::fs::create_dir_all(d).map_err(|e| DatasetError::io(d, e))?;
    }
    let ctx = Ctx {
        cfg,
        renderer,
        fonts: &fonts,
        lexicon: &lexicon,
        images_dir: &images_dir,
        seed: opts.seed,
    };
    let outcomes: Vec<Result<ImageOutcome, String>> = pool.install(|| {
        (0..opts.count)
            .into_par_iter()
            .map(|j| synth_image(j, &prepared[j % prepared.len()], &ctx))
            .collect()
    });

    let mut images = Vec::new();
    let mut skipped = Vec::new();
    let mut by_renderer: BTreeMap<String, usize> = BTreeMap::new();
    let mut instances = 0;
    for (j, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(o) => {
                let text = icdar_text(&o.record);
                let name = format!("gt_{}.txt", o.record.image_id);
                let path = gt_dir.join(&name);
                write_atomic(&path, text.as_bytes()).map_err(|e| DatasetError::io(&path, e))?;
                for i in &o.record.instances {
                    *by_renderer.entry(i.renderer.to_string()).or_default() += 1;
                }
                instances += o.record.instances.len();
                images.push(ManifestImage {
                    image_id: o.record.image_id.clone(),
                    file: o.file,
                    sha256: o.sha256,
                    width: o.record.width,
                    height: o.record.height,
                    annotation: format!("{GT_DIR}/{name}"),
                    annotation_sha256: sha256_hex(text.as_bytes()),
                    instance_count: o.record.instances.len(),
                    background: o.background,
                });
            }
            Err(reason) => {
                let image_id = format!("img_{j:05}");
                tracing::warn!(image_id, reason = %reason, "image skipped");
                skipped.push(SkippedImage { image_id, reason });
            }
        }
    }
    if images.is_empty() {
        return Err(DatasetError::NoOutput);
    }

    let lex_path = out.join(LEXICON_FILE);
    write_atomic(&lex_path, lexicon.to_text().as_bytes()).map_err(|e| DatasetError::io(&lex_path, e))?;
    let used: BTreeSet<&str> = images.iter().map(|i| i.background.as_str()).collect();
    let mut bg_lines = String::new();
    for p in prepared.iter().filter(|p| used.contains(p.input.stem.as_str())) {
        let mut rec = p.input.record.clone();
        if rec.image_sha256.is_none() {
            let bytes = std::fs::read(&p.input.image).map_err(|e| DatasetError::io(&p.input.image, e))?;
            rec.image_sha256 = Some(sha256_hex(&bytes));
        }
        if rec.verdict != Verdict::Accepted {
            rec.verdict = Verdict::Pending;
        }
        bg_lines.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        bg_lines.push('\n');
    }
    let bg_path = out.join(BACKGROUNDS_FILE);
    write_atomic(&bg_path, bg_lines.as_bytes()).map_err(|e| DatasetError::io(&bg_path, e))?;

    let body = ManifestBody {
        format_version: 1,
        tool_version: crate::TOOL_VERSION.to_string(),
        seed: opts.seed,
        config_digest: cfg.digest(),
        lexicon_digest: lexicon.source_digest().to_string(),
        lexicon_file: LEXICON_FILE.into(),
        backgrounds_file: BACKGROUNDS_FILE.into(),
        backgrounds_sha256: sha256_hex(bg_lines.as_bytes()),
        counts: ManifestCounts {
            requested: opts.count,
            images: images.len(),
            instances,
            skipped: skipped.len(),
            by_renderer,
        },
        images,
        skipped,
    };
    let manifest = DatasetManifest::new(body);
    let path = out.join(MANIFEST_FILE);
    write_atomic(&path, manifest.to_json().as_bytes()).map_err(|e| DatasetError::io(&path, e))?;
    Ok(manifest)
}
