use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use glyphforge::config::PipelineConfig;
use glyphforge::dataset::{self, DatasetError, Lexicon, SynthOptions};
use glyphforge::geometry::{self, BlockPolicy, Direction};
use glyphforge::metrics;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dataset_err(e: DatasetError) -> PyErr {
    match e {
        DatasetError::Io { .. } => PyIOError::new_err(e.to_string()),
        DatasetError::Lexicon(_) | DatasetError::Config(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Convex quadrilateral in image coordinates, stored clockwise from the
/// top-most vertex.
#[pyclass(name = "Quad", module = "pyglyphforge", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyQuad {
    inner: geometry::Quad,
}

#[pymethods]
impl PyQuad {
    /// Accepts four `(x, y)` pairs in any vertex order.
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        let pts: [(f64, f64); 4] = points
            .try_into()
            .map_err(|v: Vec<_>| value_err(format!("a quad needs 4 points, got {}", v.len())))?;
        let inner = geometry::Quad::new(pts.map(|(x, y)| geometry::Point::new(x, y))).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_rect(x: f64, y: f64, w: f64, h: f64) -> PyResult<Self> {
        let r = geometry::RectWH::new(x, y, w, h).map_err(value_err)?;
        Ok(Self { inner: geometry::Quad::from_rect(&r) })
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points().iter().map(|p| (p.x, p.y)).collect()
    }

    fn reading_order(&self) -> Vec<(f64, f64)> {
        self.inner.reading_order().iter().map(|p| (p.x, p.y)).collect()
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    /// `(x, y, w, h)` of the axis-aligned bounding box.
    fn bounding_rect(&self) -> (f64, f64, f64, f64) {
        let r = self.inner.bounding_rect();
        (r.x, r.y, r.w, r.h)
    }

    fn iou(&self, other: &PyQuad) -> f64 {
        metrics::polygon_iou(&self.inner, &other.inner)
    }

    fn __repr__(&self) -> String {
        format!("Quad({:?})", self.points())
    }
}

#[pyclass(name = "TextBlock", module = "pyglyphforge", frozen)]
pub struct PyTextBlock {
    inner: geometry::TextBlock,
}

#[pymethods]
impl PyTextBlock {
    #[getter]
    fn side_raw(&self) -> u64 {
        self.inner.side_raw
    }

    #[getter]
    fn side_effective(&self) -> u32 {
        self.inner.side_effective
    }

    #[getter]
    fn crop_origin(&self) -> (u32, u32) {
        (self.inner.crop_origin.x, self.inner.crop_origin.y)
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale
    }

    fn to_block(&self, quad: &PyQuad) -> PyQuad {
        PyQuad { inner: geometry::remap_quad(&self.inner, &quad.inner, Direction::ImageToBlock) }
    }

    fn to_image(&self, quad: &PyQuad) -> PyQuad {
        PyQuad { inner: geometry::remap_quad(&self.inner, &quad.inner, Direction::BlockToImage) }
    }

    fn __repr__(&self) -> String {
        format!(
            "TextBlock(side_raw={}, side_effective={}, crop_origin={:?})",
            self.inner.side_raw,
            self.inner.side_effective,
            self.crop_origin()
        )
    }
}

#[pyfunction]
fn block_side(w: u32, h: u32) -> PyResult<u64> {
    geometry::block_side(w, h).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (quad, image_width, image_height, min_side = geometry::DEFAULT_MIN_SIDE))]
fn make_block(quad: &PyQuad, image_width: u32, image_height: u32, min_side: u32) -> PyResult<PyTextBlock> {
    let inner = geometry::make_block(&quad.inner, (image_width, image_height), &BlockPolicy { min_side })
        .map_err(value_err)?;
    Ok(PyTextBlock { inner })
}

#[pyfunction]
fn levenshtein(a: &str, b: &str) -> usize {
    metrics::levenshtein(a, b)
}

#[pyfunction]
fn one_minus_ned(prediction: &str, ground_truth: &str) -> f64 {
    metrics::one_minus_ned(prediction, ground_truth)
}

#[pyfunction]
#[pyo3(signature = (pairs, case_sensitive = true))]
fn recognition_accuracy(pairs: Vec<(String, String)>, case_sensitive: bool) -> PyResult<f64> {
    let pairs: Vec<_> = pairs.into_iter().map(|(p, g)| metrics::RecogPair::new(p, g)).collect();
    metrics::recognition_accuracy(&pairs, case_sensitive).map_err(value_err)
}

#[pyfunction]
fn polygon_iou(a: &PyQuad, b: &PyQuad) -> f64 {
    metrics::polygon_iou(&a.inner, &b.inner)
}

/// Returns a dict with `tp`, `fp`, `fn`, `precision`, `recall` and `hmean`.
#[pyfunction]
#[pyo3(signature = (predictions, ground_truths, iou_threshold = metrics::DEFAULT_IOU_THRESHOLD))]
fn detection_prf(
    predictions: Vec<PyQuad>,
    ground_truths: Vec<PyQuad>,
    iou_threshold: f64,
) -> BTreeMap<&'static str, f64> {
    let p: Vec<_> = predictions.into_iter().map(|q| q.inner).collect();
    let g: Vec<_> = ground_truths.into_iter().map(|q| q.inner).collect();
    let r = metrics::detection_prf(&p, &g, iou_threshold);
    BTreeMap::from([
        ("tp", r.tp as f64),
        ("fp", r.fp as f64),
        ("fn", r.fn_ as f64),
        ("precision", r.precision),
        ("recall", r.recall),
        ("hmean", r.hmean),
    ])
}

/// Writes procedural scenes with segmentation and depth; returns the
/// backgrounds and aux directories.
#[pyfunction]
#[pyo3(signature = (out_dir, count, width = 320, height = 240, seed = 0))]
fn write_fixtures(out_dir: PathBuf, count: usize, width: u32, height: u32, seed: u64) -> PyResult<(PathBuf, PathBuf)> {
    glyphforge::fixtures::write_fixture_set(&out_dir, count, width, height, seed).map_err(value_err)
}

/// Synthesizes an annotated dataset and returns the manifest digest.
#[pyfunction]
#[pyo3(signature = (backgrounds_dir, aux_dir, out_dir, words, count, seed = 0, jobs = 1, config = None))]
#[allow(clippy::too_many_arguments)]
fn synthesize(
    py: Python<'_>,
    backgrounds_dir: PathBuf,
    aux_dir: PathBuf,
    out_dir: PathBuf,
    words: Vec<String>,
    count: usize,
    seed: u64,
    jobs: usize,
    config: Option<PathBuf>,
) -> PyResult<String> {
    let cfg = match config {
        Some(p) => PipelineConfig::load(&p).map_err(value_err)?,
        None => PipelineConfig::default(),
    };
    let lexicon = Lexicon::from_text(&words.join("\n")).map_err(dataset_err)?;
    let opts = SynthOptions { backgrounds_dir, aux_dir, out_dir, lexicon, count, seed, jobs };
    let manifest = py
        .detach(|| dataset::synthesize_dataset(&opts, &cfg, &cfg.render.renderer()))
        .map_err(dataset_err)?;
    Ok(manifest.digest)
}

/// Returns `(ok, {check: (passed, failed, failures)})`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn validate_dataset(dir: PathBuf) -> PyResult<(bool, BTreeMap<String, (usize, usize, Vec<String>)>)> {
    let report = dataset::validate_dataset(&dir).map_err(dataset_err)?;
    let checks = report
        .checks
        .into_iter()
        .map(|(k, c)| (k, (c.passed, c.failed, c.failures)))
        .collect();
    Ok((report.ok, checks))
}

#[pymodule]
pub fn pyglyphforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyQuad>()?;
    m.add_class::<PyTextBlock>()?;
    m.add_function(wrap_pyfunction!(block_side, m)?)?;
    m.add_function(wrap_pyfunction!(make_block, m)?)?;
    m.add_function(wrap_pyfunction!(levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(one_minus_ned, m)?)?;
    m.add_function(wrap_pyfunction!(recognition_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(polygon_iou, m)?)?;
    m.add_function(wrap_pyfunction!(detection_prf, m)?)?;
    m.add_function(wrap_pyfunction!(write_fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(validate_dataset, m)?)?;
    Ok(())
}
