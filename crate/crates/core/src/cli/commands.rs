use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::json;

use super::{eval, BackgroundsArgs, BlockArgs, Cli, CliError, CliResult, Command, RenderArgs, SynthArgs, EXIT_FAILED, EXIT_OK};
use crate::background::{
    load_source_images, parse_prompts, process_backgrounds, write_backgrounds, BackgroundSource, ExpertClients,
};
use crate::config::{OutputFormat, PipelineConfig};
use crate::dataset::{blend_text, synthesize_dataset, validate_dataset, DatasetError, Lexicon, SynthOptions};
use crate::fixtures::write_fixture_set;
use crate::geometry::{make_block, Point, Quad};
use crate::http::JsonClient;

pub(super) fn emit(out: &mut dyn Write, v: &impl Serialize) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).expect("JSON output serializes");
    writeln!(out, "{s}").map_err(|e| CliError::failed(format!("cannot write output: {e}")))
}

fn jobs(cli: &Cli) -> usize {
    cli.jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        .max(1)
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    PipelineConfig::resolve(cli.config.as_deref()).map_err(CliError::usage)
}

pub(super) fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Backgrounds(a) => backgrounds(cli, a, out),
        Command::Synth(a) => synth(cli, a, out),
        Command::Block(a) => block(cli, a, out),
        Command::Render(a) => render(cli, a, out),
        Command::Eval(e) => eval::run(e, out),
        Command::Validate(a) => {
            let report = validate_dataset(&a.dir).map_err(CliError::failed)?;
            emit(out, &report)?;
            Ok(if report.ok { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Fixtures(a) => {
            let (bg, aux) =
                write_fixture_set(&a.out, a.count, a.width, a.height, a.seed).map_err(CliError::failed)?;
            emit(out, &json!({ "backgrounds": bg, "aux": aux, "count": a.count }))?;
            Ok(EXIT_OK)
        }
    }
}

fn backgrounds(cli: &Cli, a: &BackgroundsArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg = load_config(cli)?;
    let b = &mut cfg.background;
    for (flag, slot) in [
        (&a.t2i_endpoint, &mut b.text2image_endpoint),
        (&a.ocr_endpoint, &mut b.ocr_endpoint),
        (&a.inpaint_endpoint, &mut b.inpaint_endpoint),
        (&a.quality_endpoint, &mut b.quality_endpoint),
    ] {
        if flag.is_some() {
            *slot = flag.clone();
        }
    }
    if let Some(n) = a.max_iters {
        b.max_iters = n;
    }
    if let Some(t) = a.quality_threshold {
        b.quality_threshold = t;
    }
    if let Some(j) = cli.jobs {
        b.workers = j.max(1);
    }
    cfg.validate().map_err(CliError::usage)?;

    let source = match (&a.prompts, &a.images) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            BackgroundSource::Prompts(parse_prompts(&text))
        }
        (None, Some(dir)) => BackgroundSource::Images(load_source_images(dir).map_err(CliError::usage)?),
        (None, None) => return Err(CliError::usage("one of --prompts or --images is required")),
    };
    if source.is_empty() {
        tracing::warn!("no prompts or images to process");
        write_backgrounds(&mut [], &a.out).map_err(CliError::failed)?;
        emit(out, &json!({ "records": 0, "accepted": 0, "out": a.out }))?;
        return Ok(EXIT_OK);
    }

    let clients = ExpertClients::from_config(&cfg.background);
    clients.check(&source).map_err(CliError::usage)?;
    let b = &cfg.background;
    let endpoints = [&b.text2image_endpoint, &b.ocr_endpoint, &b.inpaint_endpoint, &b.quality_endpoint];
    for url in endpoints.into_iter().flatten() {
        JsonClient::new(url, 1)
            .probe(Duration::from_secs(3))
            .map_err(|e| CliError::usage(format!("expert endpoint {url} unreachable: {e}")))?;
    }

    let mut records = process_backgrounds(&source, &clients, b).map_err(CliError::usage)?;
    let jsonl = write_backgrounds(&mut records, &a.out).map_err(CliError::failed)?;
    let accepted = records.iter().filter(|r| r.is_accepted()).count();
    emit(
        out,
        &json!({ "records": records.len(), "accepted": accepted, "rejected": records.len() - accepted, "jsonl": jsonl }),
    )?;
    Ok(if accepted > 0 { EXIT_OK } else { EXIT_FAILED })
}

fn synth(cli: &Cli, a: &SynthArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg = load_config(cli)?;
    if let Some(e) = &a.render_endpoint {
        cfg.render.endpoint = Some(e.clone());
    }
    if a.no_fallback {
        cfg.render.fallback = false;
    }
    if let Some(k) = a.k_max {
        cfg.dataset.k_max = k;
    }
    match a.format.as_deref() {
        Some("png") => cfg.dataset.image_format = OutputFormat::Png,
        Some("jpeg") => cfg.dataset.image_format = OutputFormat::Jpeg,
        _ => {}
    }
    if let Some(l) = &a.lexicon {
        cfg.dataset.lexicon = Some(l.clone());
    }
    cfg.validate().map_err(CliError::usage)?;
    let lex_path = cfg
        .dataset
        .lexicon
        .clone()
        .ok_or_else(|| CliError::usage("no lexicon: pass --lexicon or set dataset.lexicon"))?;
    let lexicon = Lexicon::load(&lex_path).map_err(CliError::usage)?;
    let opts = SynthOptions {
        backgrounds_dir: a.backgrounds.clone(),
        aux_dir: a.aux.clone(),
        out_dir: a.out.clone(),
        lexicon,
        count: a.count,
        seed: a.seed,
        jobs: jobs(cli),
    };
    let manifest = synthesize_dataset(&opts, &cfg, &cfg.render.renderer()).map_err(|e| match e {
        DatasetError::Config(_) | DatasetError::Lexicon(_) => CliError::usage(e),
        _ => CliError::failed(e),
    })?;
    emit(
        out,
        &json!({
            "digest": manifest.digest,
            "images": manifest.body.counts.images,
            "instances": manifest.body.counts.instances,
            "skipped": manifest.body.counts.skipped,
            "out": a.out,
        }),
    )?;
    Ok(EXIT_OK)
}

pub(super) fn parse_quad(s: &str) -> Result<Quad, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("quad {s:?} must be 8 comma-separated numbers")))?;
    let c: [f64; 8] = v
        .try_into()
        .map_err(|_| CliError::usage(format!("quad {s:?} must be 8 comma-separated numbers")))?;
    Quad::new([
        Point::new(c[0], c[1]),
        Point::new(c[2], c[3]),
        Point::new(c[4], c[5]),
        Point::new(c[6], c[7]),
    ])
    .map_err(|e| CliError::usage(format!("quad {s:?}: {e}")))
}

fn parse_size(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::usage(format!("image size {s:?} must look like 1024x768"));
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: u32 = w.trim().parse().map_err(|_| bad())?;
    let h: u32 = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

fn block(cli: &Cli, a: &BlockArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg = load_config(cli)?;
    if let Some(m) = a.min_side {
        cfg.block.min_side = m;
    }
    let quad = parse_quad(&a.quad)?;
    let dims = parse_size(&a.image_size)?;
    let block = make_block(&quad, dims, &cfg.block).map_err(CliError::usage)?;
    emit(out, &block)?;
    Ok(EXIT_OK)
}

fn open_rgb(p: &Path) -> Result<image::RgbImage, CliError> {
    image::open(p)
        .map(|i| i.to_rgb8())
        .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))
}

fn render(cli: &Cli, a: &RenderArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg = load_config(cli)?;
    if let Some(e) = &a.endpoint {
        cfg.render.endpoint = Some(e.clone());
    }
    if a.no_fallback {
        cfg.render.fallback = false;
    }
    let img = open_rgb(&a.image)?;
    let bg = match &a.background {
        Some(p) => open_rgb(p)?,
        None => img.clone(),
    };
    let quad = parse_quad(&a.quad)?;
    if !quad.within(img.width() as f64, img.height() as f64) {
        return Err(CliError::usage("quad lies outside the image"));
    }
    let fonts = cfg.render.fonts().map_err(CliError::usage)?;
    let (result, tag) = blend_text(
        &img,
        &bg,
        &quad,
        &a.text,
        fonts[0].as_ref(),
        &cfg.render.renderer(),
        &cfg.block,
        &a.request_id,
        cfg.render.deadline_ms,
    )
    .map_err(|e| match e {
        crate::dataset::BlendError::Glyph(_) => CliError::usage(e),
        _ => CliError::failed(e),
    })?;
    result
        .save(&a.out)
        .map_err(|e| CliError::failed(format!("{}: {e}", a.out.display())))?;
    emit(out, &json!({ "out": a.out, "renderer": tag.to_string(), "quad": quad.reading_order() }))?;
    Ok(EXIT_OK)
}
