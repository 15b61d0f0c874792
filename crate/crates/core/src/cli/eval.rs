use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::commands::emit;
use super::{CliError, CliResult, EvalCommand, EvalDetArgs, EvalRecArgs, EXIT_FAILED, EXIT_OK};
use crate::dataset::read_icdar_file;
use crate::geometry::Quad;
use crate::metrics::{detection_prf, one_minus_ned, recognition_accuracy, DetMatchResult, RecogPair};

pub(super) fn run(cmd: &EvalCommand, out: &mut dyn Write) -> CliResult {
    match cmd {
        EvalCommand::Det(a) => det(a, out),
        EvalCommand::Rec(a) => rec(a, out),
    }
}

fn txt_files(dir: &Path) -> Result<BTreeSet<String>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
    Ok(rd
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().to_str().map(String::from))
        .filter(|n| n.ends_with(".txt"))
        .collect())
}

fn quads(path: &Path) -> Result<Vec<Quad>, CliError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    Ok(read_icdar_file(path)
        .map_err(CliError::usage)?
        .into_iter()
        .map(|(q, _)| q)
        .collect())
}

/// Pairs files by name; a file present on one side only counts against
/// the other side as empty.
fn det(a: &EvalDetArgs, out: &mut dyn Write) -> CliResult {
    if !(0.0..=1.0).contains(&a.iou) {
        return Err(CliError::usage("--iou must lie in [0, 1]"));
    }
    let pairs: Vec<(PathBuf, PathBuf)> = if a.gt.is_file() {
        vec![(a.pred.clone(), a.gt.clone())]
    } else {
        let gt = txt_files(&a.gt)?;
        let pred = if a.pred.is_dir() { txt_files(&a.pred)? } else { BTreeSet::new() };
        if !a.pred.is_dir() && a.pred.exists() {
            return Err(CliError::usage("--pred must be a directory when --gt is one"));
        }
        gt.union(&pred).map(|n| (a.pred.join(n), a.gt.join(n))).collect()
    };
    let mut per_file = Vec::new();
    for (p, g) in &pairs {
        per_file.push(detection_prf(&quads(p)?, &quads(g)?, a.iou));
    }
    let total = DetMatchResult::accumulate(&per_file);
    emit(out, &json!({
        "precision": total.precision,
        "recall": total.recall,
        "hmean": total.hmean,
        "tp": total.tp,
        "fp": total.fp,
        "fn": total.fn_,
        "files": pairs.len(),
        "iou_threshold": a.iou,
    }))?;
    Ok(EXIT_OK)
}

fn read_lines(p: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
    Ok(text
        .lines()
        .map(|l| l.trim_start_matches('\u{feff}').trim_end_matches('\r').to_string())
        .collect())
}

fn rec(a: &EvalRecArgs, out: &mut dyn Write) -> CliResult {
    let pairs: Vec<RecogPair> = match (&a.pairs, &a.pred, &a.gt) {
        (Some(p), _, _) => read_lines(p)?
            .iter()
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split_once('\t')
                    .map(|(p, g)| RecogPair::new(p, g))
                    .ok_or_else(|| CliError::usage(format!("pair line {l:?} has no tab")))
            })
            .collect::<Result<_, _>>()?,
        (None, Some(p), Some(g)) => {
            let (mut p, mut g) = (read_lines(p)?, read_lines(g)?);
            while p.last().is_some_and(|l| l.is_empty()) && g.last().is_some_and(|l| l.is_empty()) {
                p.pop();
                g.pop();
            }
            if p.len() != g.len() {
                return Err(CliError::usage(format!("{} predictions for {} ground-truth lines", p.len(), g.len())));
            }
            p.into_iter().zip(g).map(|(p, g)| RecogPair::new(p, g)).collect()
        }
        _ => return Err(CliError::usage("pass --pairs, or --pred with --gt")),
    };
    let Ok(acc) = recognition_accuracy(&pairs, !a.case_insensitive) else {
        emit(out, &json!({ "count": 0 }))?;
        return Ok(EXIT_FAILED);
    };
    let norm = |s: &str| if a.case_insensitive { s.to_lowercase() } else { s.to_string() };
    let ned: f64 = pairs
        .iter()
        .map(|p| one_minus_ned(&norm(&p.prediction), &norm(&p.ground_truth)))
        .sum::<f64>()
        / pairs.len() as f64;
    emit(out, &json!({ "accuracy": acc, "one_minus_ned": ned, "count": pairs.len() }))?;
    Ok(EXIT_OK)
}
