use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_icdar_line, DatasetError, DatasetManifest, Lexicon, GT_DIR, IMAGES_DIR};
use crate::imageio::sha256_hex;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

impl CheckResult {
    fn record(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.failures.push(msg());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub checks: BTreeMap<String, CheckResult>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> &CheckResult {
        &self.checks[name]
    }
}

fn listed(dir: &Path) -> BTreeSet<String> {
    std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(|e| e.ok())
                .filter(|e| e.path().is_file())
                .filter_map(|e| e.file_name().to_str().map(String::from))
                .collect()
        })
        .unwrap_or_default()
}

/// Checks manifest digest, image/annotation pairing and hashes, quad
/// convexity and bounds, and lexicon membership of every transcript.
pub fn validate_dataset(dir: &Path) -> Result<ValidationReport, DatasetError> {
    let manifest = DatasetManifest::load(dir)?;
    let m = &manifest.body;
    let mut digest = CheckResult::default();
    let mut pairing = CheckResult::default();
    let mut convexity = CheckResult::default();
    let mut bounds = CheckResult::default();
    let mut lexicon_check = CheckResult::default();

    let recomputed = m.digest();
    digest.record(recomputed == manifest.digest, || {
        format!("manifest digest {} does not match contents ({recomputed})", manifest.digest)
    });

    let lexicon = Lexicon::load(&dir.join(&m.lexicon_file)).ok();
    lexicon_check.record(lexicon.is_some(), || format!("lexicon file {} missing or empty", m.lexicon_file));
    if let Some(l) = &lexicon {
        lexicon_check.record(l.source_digest() == m.lexicon_digest, || "lexicon digest mismatch".into());
    }

    let mut referenced_images = BTreeSet::new();
    let mut referenced_gt = BTreeSet::new();
    for img in &m.images {
        let id = &img.image_id;
        referenced_images.insert(img.file.trim_start_matches(&format!("{IMAGES_DIR}/")).to_string());
        referenced_gt.insert(img.annotation.trim_start_matches(&format!("{GT_DIR}/")).to_string());

        match std::fs::read(dir.join(&img.file)) {
            Ok(bytes) => {
                pairing.record(sha256_hex(&bytes) == img.sha256, || format!("{id}: image hash mismatch"));
                let dims = image::load_from_memory(&bytes).map(|i| (i.width(), i.height()));
                pairing.record(dims.as_ref().ok() == Some(&(img.width, img.height)), || {
                    format!("{id}: image size differs from manifest")
                });
            }
            Err(_) => pairing.record(false, || format!("{id}: image file {} missing", img.file)),
        }
        let text = match std::fs::read(dir.join(&img.annotation)) {
            Ok(bytes) => {
                pairing.record(sha256_hex(&bytes) == img.annotation_sha256, || {
                    format!("{id}: annotation hash mismatch")
                });
                String::from_utf8_lossy(&bytes).into_owned()
            }
            Err(_) => {
                pairing.record(false, || format!("{id}: annotation file {} missing", img.annotation));
                continue;
            }
        };
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        pairing.record(lines.len() == img.instance_count, || {
            format!("{id}: {} annotation lines, manifest says {}", lines.len(), img.instance_count)
        });
        for (n, line) in lines.iter().enumerate() {
            match parse_icdar_line(line) {
                Ok((quad, transcript)) => {
                    convexity.record(true, String::new);
                    bounds.record(quad.within(img.width as f64, img.height as f64), || {
                        format!("{id}: line {} quad {:?} leaves the {}x{} image", n + 1, quad.coords(), img.width, img.height)
                    });
                    if let Some(l) = &lexicon {
                        lexicon_check.record(l.contains(&transcript), || {
                            format!("{id}: line {} transcript {transcript:?} not in lexicon", n + 1)
                        });
                    }
                }
                Err(e) => convexity.record(false, || format!("{id}: line {}: {e}", n + 1)),
            }
        }
    }
    for f in listed(&dir.join(IMAGES_DIR)).difference(&referenced_images) {
        pairing.record(false, || format!("unreferenced image file {f}"));
    }
    for f in listed(&dir.join(GT_DIR)).difference(&referenced_gt) {
        pairing.record(false, || format!("unreferenced annotation file {f}"));
    }

    let checks: BTreeMap<String, CheckResult> = [
        ("manifest_digest", digest),
        ("pairing", pairing),
        ("quad_convexity", convexity),
        ("quad_bounds", bounds),
        ("lexicon_membership", lexicon_check),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(ValidationReport {
        ok: checks.values().all(|c| c.failed == 0),
        checks,
    })
}
