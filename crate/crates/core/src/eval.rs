//! Prototype-distance scoring of a generated dataset.
//!
//! For each task the five reference features are averaged into a prototype,
//! the 15 test images are ranked by Euclidean distance to it, distances are
//! min-max normalized within the task, and an image is called positive when
//! its normalized distance is below a single threshold shared by all tasks.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concepts::{DatasetManifest, Label, ManifestRow, Split, TrialSet, PER_LABEL};
use crate::render::{RasterImage, RenderError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unknown extractor `{0}` (expected pixels32, edgehist or external)")]
    UnknownExtractor(String),
    #[error("no external feature vector for `{0}`")]
    MissingExternal(String),
    #[error("external extractor needs a features file")]
    ExternalWithoutFile,
    #[error("feature length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no extractors given")]
    NoExtractors,
    #[error("prototype needs at least one vector")]
    EmptyPrototype,
    #[error("pearson needs equal lengths of at least 2, got {0} and {1}")]
    PearsonLength(usize, usize),
    #[error("pearson undefined: zero variance input")]
    ZeroVariance,
    #[error("task `{concept}` is incomplete: {detail}")]
    IncompleteTask { concept: String, detail: String },
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("features file line {line}: {detail}")]
    FeaturesFile { line: usize, detail: String },
    #[error("image {path}: {source}")]
    Image { path: String, source: RenderError },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub extractor_id: String,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(extractor_id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            extractor_id: extractor_id.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn distance(&self, other: &FeatureVector) -> Result<f64, EvalError> {
        if self.len() != other.len() {
            return Err(EvalError::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

/// Per-image vectors computed elsewhere, keyed by dataset-relative path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalFeatures {
    pub width: usize,
    vectors: HashMap<String, Vec<f64>>,
}

fn normalize_key(path: &str) -> String {
    let p = path.trim().replace('\\', "/");
    p.strip_prefix("./").map(str::to_string).unwrap_or(p)
}

impl ExternalFeatures {
    /// Parses CSV with columns `image_path, v0, v1, ...`; a header row whose
    /// first cell is `image_path` is skipped.
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut width = None;
        let mut vectors = HashMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 1;
            if rec.is_empty() || (i == 0 && rec.get(0).map(str::trim) == Some("image_path")) {
                continue;
            }
            let values = rec
                .iter()
                .skip(1)
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| EvalError::FeaturesFile {
                            line,
                            detail: format!("`{v}` is not a finite number"),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => {
                    return Err(EvalError::FeaturesFile {
                        line,
                        detail: format!("{} values, expected {w}", values.len()),
                    })
                }
                _ => {}
            }
            vectors.insert(normalize_key(&rec[0]), values);
        }
        Ok(Self {
            width: width.unwrap_or(0),
            vectors,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, EvalError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn insert(&mut self, path: &str, values: Vec<f64>) -> Result<(), EvalError> {
        if self.vectors.is_empty() {
            self.width = values.len();
        } else if values.len() != self.width {
            return Err(EvalError::LengthMismatch {
                expected: self.width,
                got: values.len(),
            });
        }
        self.vectors.insert(normalize_key(path), values);
        Ok(())
    }

    pub fn lookup(&self, path: &str) -> Result<FeatureVector, EvalError> {
        self.vectors
            .get(&normalize_key(path))
            .map(|v| FeatureVector::new("external", v.clone()))
            .ok_or_else(|| EvalError::MissingExternal(path.to_string()))
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorId {
    Pixels32,
    Edgehist,
    External,
}

impl ExtractorId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtractorId::Pixels32 => "pixels32",
            ExtractorId::Edgehist => "edgehist",
            ExtractorId::External => "external",
        }
    }
}

impl fmt::Display for ExtractorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExtractorId {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pixels32" => Ok(ExtractorId::Pixels32),
            "edgehist" => Ok(ExtractorId::Edgehist),
            "external" => Ok(ExtractorId::External),
            other => Err(EvalError::UnknownExtractor(other.to_string())),
        }
    }
}

/// Features from a raster image; `external` is looked up with
/// [`ExternalFeatures::lookup`] instead.
pub fn extract(id: ExtractorId, image: &RasterImage) -> Result<FeatureVector, EvalError> {
    match id {
        ExtractorId::Pixels32 => Ok(FeatureVector::new("pixels32", area_resample(image, 32, 32))),
        ExtractorId::Edgehist => Ok(FeatureVector::new("edgehist", edge_histogram(image))),
        ExtractorId::External => Err(EvalError::ExternalWithoutFile),
    }
}

/// Area-weighted downsampling to `out_w × out_h`, row-major.
pub fn area_resample(image: &RasterImage, out_w: u32, out_h: u32) -> Vec<f64> {
    let wx = area_weights(image.width, out_w);
    let wy = area_weights(image.height, out_h);
    let mut rows = vec![0.0; (image.height * out_w) as usize];
    for y in 0..image.height {
        for (ox, taps) in wx.iter().enumerate() {
            rows[(y * out_w) as usize + ox] =
                taps.iter().map(|&(x, w)| w * image.get(x, y) as f64).sum();
        }
    }
    let mut out = vec![0.0; (out_w * out_h) as usize];
    for (oy, taps) in wy.iter().enumerate() {
        for ox in 0..out_w as usize {
            out[oy * out_w as usize + ox] = taps
                .iter()
                .map(|&(y, w)| w * rows[(y * out_w) as usize + ox])
                .sum();
        }
    }
    out
}

/// For each output cell, the source indices it overlaps and their weights (summing to 1).
fn area_weights(src: u32, dst: u32) -> Vec<Vec<(u32, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let (lo, hi) = (o as f64 * scale, (o + 1) as f64 * scale);
            (lo.floor() as u32..(hi.ceil() as u32).min(src))
                .filter_map(|s| {
                    let overlap = (hi.min(s as f64 + 1.0) - lo.max(s as f64)).max(0.0);
                    (overlap > 0.0).then_some((s, overlap / scale))
                })
                .collect()
        })
        .collect()
}

const ORIENTATION_BINS: usize = 16;
const GRID: usize = 4;

/// Sobel gradient orientations folded to `[0, π)`, magnitude-weighted into
/// 16 bins per cell of a 4×4 grid, then L2-normalized. Layout is
/// `(cell_y * 4 + cell_x) * 16 + bin`.
pub fn edge_histogram(image: &RasterImage) -> Vec<f64> {
    let (w, h) = (image.width as usize, image.height as usize);
    let mut hist = vec![0.0; GRID * GRID * ORIENTATION_BINS];
    let px = |x: usize, y: usize| image.values[y * w + x] as f64;
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let mut gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            let mut gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1))
                - (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            // opposite gradients share an orientation
            if gy < 0.0 || (gy == 0.0 && gx < 0.0) {
                gx = -gx;
                gy = -gy;
            }
            let theta = gy.atan2(gx);
            let bin = ((theta / std::f64::consts::PI * ORIENTATION_BINS as f64) as usize)
                .min(ORIENTATION_BINS - 1);
            let cell = (y * GRID / h) * GRID + x * GRID / w;
            hist[cell * ORIENTATION_BINS + bin] += mag;
        }
    }
    let norm = hist.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        hist.iter_mut().for_each(|v| *v /= norm);
    }
    hist
}

/// Elementwise mean.
pub fn build_prototype(refs: &[FeatureVector]) -> Result<FeatureVector, EvalError> {
    let first = refs.first().ok_or(EvalError::EmptyPrototype)?;
    let mut sum = vec![0.0; first.len()];
    for v in refs {
        if v.len() != first.len() {
            return Err(EvalError::LengthMismatch {
                expected: first.len(),
                got: v.len(),
            });
        }
        sum.iter_mut().zip(&v.values).for_each(|(s, x)| *s += x);
    }
    let n = refs.len() as f64;
    Ok(FeatureVector::new(
        first.extractor_id.clone(),
        sum.into_iter().map(|s| s / n).collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subtask {
    Close,
    Far,
}

impl Subtask {
    pub fn as_str(self) -> &'static str {
        match self {
            Subtask::Close => "close",
            Subtask::Far => "far",
        }
    }
}

/// Features of one trial set.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskFeatures {
    pub concept_id: String,
    pub split: Split,
    pub refs: Vec<FeatureVector>,
    pub pos: Vec<FeatureVector>,
    pub close: Vec<FeatureVector>,
    pub far: Vec<FeatureVector>,
}

/// Normalized test distances of one task, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDistances {
    pub concept_id: String,
    pub split: Split,
    pub pos: Vec<f64>,
    pub close: Vec<f64>,
    pub far: Vec<f64>,
}

/// Value assigned to every test image when all 15 distances are equal.
pub const ZERO_RANGE_VALUE: f64 = 0.5;

pub fn normalized_distances(task: &TaskFeatures) -> Result<TaskDistances, EvalError> {
    let incomplete = |detail: String| EvalError::IncompleteTask {
        concept: task.concept_id.clone(),
        detail,
    };
    if task.refs.is_empty() {
        return Err(incomplete("no reference images".into()));
    }
    if task.pos.is_empty() || task.close.is_empty() || task.far.is_empty() {
        return Err(incomplete("missing test images".into()));
    }
    let proto = build_prototype(&task.refs)?;
    let dist = |vs: &[FeatureVector]| {
        vs.iter()
            .map(|v| proto.distance(v))
            .collect::<Result<Vec<_>, _>>()
    };
    let (pos, close, far) = (dist(&task.pos)?, dist(&task.close)?, dist(&task.far)?);
    let all = pos.iter().chain(&close).chain(&far);
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let f = |d: &f64| {
        if hi > lo {
            (d - lo) / (hi - lo)
        } else {
            ZERO_RANGE_VALUE
        }
    };
    Ok(TaskDistances {
        concept_id: task.concept_id.clone(),
        split: task.split,
        pos: pos.iter().map(f).collect(),
        close: close.iter().map(f).collect(),
        far: far.iter().map(f).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub concept_id: String,
    pub split: Split,
    pub subtask: Subtask,
    pub accuracy: f64,
}

/// Fraction correct when positives must fall below `theta` and negatives must not.
pub fn subtask_accuracy(pos: &[f64], neg: &[f64], theta: f64) -> f64 {
    let correct =
        pos.iter().filter(|&&d| d < theta).count() + neg.iter().filter(|&&d| d >= theta).count();
    correct as f64 / (pos.len() + neg.len()) as f64
}

pub fn score_distances(d: &TaskDistances, theta: f64) -> (TaskScore, TaskScore) {
    let score = |subtask, neg: &[f64]| TaskScore {
        concept_id: d.concept_id.clone(),
        split: d.split,
        subtask,
        accuracy: subtask_accuracy(&d.pos, neg, theta),
    };
    (score(Subtask::Close, &d.close), score(Subtask::Far, &d.far))
}

pub fn score_task(task: &TaskFeatures, theta: f64) -> Result<(TaskScore, TaskScore), EvalError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(EvalError::InvalidThreshold(theta));
    }
    Ok(score_distances(&normalized_distances(task)?, theta))
}

/// The threshold grid `{0.00, 0.01, ..., 1.00}`.
pub fn threshold_grid() -> impl Iterator<Item = f64> {
    (0..=100).map(|i| i as f64 / 100.0)
}

/// Mean accuracy over every close and far subtask at `theta`.
pub fn mean_accuracy(tasks: &[TaskDistances], theta: f64) -> f64 {
    if tasks.is_empty() {
        return 0.0;
    }
    let total: f64 = tasks
        .iter()
        .map(|d| {
            subtask_accuracy(&d.pos, &d.close, theta) + subtask_accuracy(&d.pos, &d.far, theta)
        })
        .sum();
    total / (2 * tasks.len()) as f64
}

/// Grid threshold with the best mean accuracy; the smallest wins ties.
pub fn fit_threshold(tasks: &[TaskDistances]) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    for theta in threshold_grid() {
        let acc = mean_accuracy(tasks, theta);
        if acc > best.1 {
            best = (theta, acc);
        }
    }
    best
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(EvalError::PearsonLength(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Human accuracy per concept, `(id, table name, close, far)`, as crowdsourced
/// and published with the benchmark.
pub const HUMAN_REFERENCE: [(&str, &str, f64, f64); 37] = [
    ("angle", "angle", 0.9767, 0.9833),
    ("perpendicular_bisector", "perp bisector", 0.9367, 0.9833),
    ("angle_bisector", "ang bisector", 0.9433, 0.9533),
    ("sixty_degree_angle", "sixty ang", 0.8233, 0.9533),
    ("radii", "radii", 0.9233, 0.9600),
    ("diameter", "diameter", 0.9567, 1.0000),
    ("segment", "segment", 0.9300, 0.9833),
    ("rectilinear", "rectilinear", 0.9000, 0.9033),
    ("triangle", "triangle", 0.9633, 0.9767),
    ("quadrilateral", "quadrilateral", 0.9167, 0.9267),
    ("eq_triangle", "eq t", 0.9533, 0.9800),
    ("right_angled_triangle", "right ang t", 0.7200, 0.8133),
    ("square", "square", 0.8933, 0.9867),
    ("rhombus", "rhombus", 0.9367, 0.9667),
    ("oblong", "oblong", 0.9666, 0.9900),
    ("rhomboid", "rhomboid", 0.9700, 0.9300),
    ("parallel_lines", "parallel l", 0.9500, 0.9567),
    ("lll", "lll", 0.9700, 0.9667),
    ("cll", "cll", 0.9467, 0.9667),
    ("llc", "llc", 0.6767, 0.9233),
    ("ccl", "ccl", 0.8700, 0.8833),
    ("lcc", "lcc", 0.8867, 0.9633),
    ("ccc", "ccc", 0.6667, 0.8767),
    ("llll", "llll", 0.8833, 0.9767),
    ("lllc", "lllc", 0.6667, 0.8867),
    ("clll", "clll", 0.8367, 0.9033),
    ("clcl", "clcl", 0.8700, 0.8567),
    ("llcc", "llcc", 0.8867, 0.9333),
    ("cccl", "cccl", 0.9233, 0.9333),
    ("clcc", "clcc", 0.8633, 0.9000),
    ("cccc", "cccc", 0.8167, 0.8800),
    ("tll", "tll", 0.9467, 0.9800),
    ("llt", "llt", 0.9267, 0.9400),
    ("tcl", "tcl", 0.9533, 0.9633),
    ("clt", "clt", 0.9533, 0.9633),
    ("tcc", "tcc", 0.9533, 0.9633),
    ("cct", "cct", 0.9533, 0.9633),
];

pub fn human_accuracy(concept_id: &str, subtask: Subtask) -> Option<f64> {
    HUMAN_REFERENCE
        .iter()
        .find(|h| h.0 == concept_id)
        .map(|h| match subtask {
            Subtask::Close => h.2,
            Subtask::Far => h.3,
        })
}

pub fn display_name(concept_id: &str) -> &str {
    HUMAN_REFERENCE
        .iter()
        .find(|h| h.0 == concept_id)
        .map_or(concept_id, |h| h.1)
}

/// How features are produced for an evaluation run.
#[derive(Debug, Clone)]
pub enum Extractor {
    Pixels32,
    Edgehist,
    External(std::sync::Arc<ExternalFeatures>),
}

impl Extractor {
    pub fn id(&self) -> ExtractorId {
        match self {
            Extractor::Pixels32 => ExtractorId::Pixels32,
            Extractor::Edgehist => ExtractorId::Edgehist,
            Extractor::External(_) => ExtractorId::External,
        }
    }

    pub fn from_id(
        id: ExtractorId,
        external: Option<&std::sync::Arc<ExternalFeatures>>,
    ) -> Result<Self, EvalError> {
        match id {
            ExtractorId::Pixels32 => Ok(Extractor::Pixels32),
            ExtractorId::Edgehist => Ok(Extractor::Edgehist),
            ExtractorId::External => external
                .cloned()
                .map(Extractor::External)
                .ok_or(EvalError::ExternalWithoutFile),
        }
    }

    fn needs_pixels(&self) -> bool {
        !matches!(self, Extractor::External(_))
    }

    fn features(
        &self,
        row: &ManifestRow,
        image: Option<&RasterImage>,
    ) -> Result<FeatureVector, EvalError> {
        match (self, image) {
            (Extractor::External(ext), _) => ext.lookup(&row.path),
            (other, Some(img)) => extract(other.id(), img),
            (_, None) => unreachable!("pixels are loaded for image extractors"),
        }
    }
}

/// Features of one trial set for each extractor, in extractor order.
pub fn task_features(
    root: &Path,
    set: &TrialSet,
    extractors: &[Extractor],
) -> Result<Vec<TaskFeatures>, EvalError> {
    let load = extractors.iter().any(Extractor::needs_pixels);
    let mut out: Vec<TaskFeatures> = extractors
        .iter()
        .map(|_| TaskFeatures {
            concept_id: set.concept_id.clone(),
            split: set.split,
            refs: Vec::new(),
            pos: Vec::new(),
            close: Vec::new(),
            far: Vec::new(),
        })
        .collect();
    for row in &set.images {
        let image = if load {
            let path = DatasetManifest::image_path(root, row);
            Some(
                RasterImage::read_png(&path).map_err(|source| EvalError::Image {
                    path: row.path.clone(),
                    source,
                })?,
            )
        } else {
            None
        };
        for (tf, ex) in out.iter_mut().zip(extractors) {
            let v = ex.features(row, image.as_ref())?;
            match row.label {
                Label::Ref => tf.refs.push(v),
                Label::Pos => tf.pos.push(v),
                Label::CloseNeg => tf.close.push(v),
                Label::FarNeg => tf.far.push(v),
            }
        }
    }
    for tf in &out {
        let counts = [tf.refs.len(), tf.pos.len(), tf.close.len(), tf.far.len()];
        if counts != [PER_LABEL; 4] {
            return Err(EvalError::IncompleteTask {
                concept: set.concept_id.clone(),
                detail: format!("label counts ref/pos/close/far = {counts:?}, expected 5 each"),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Task,
    Average,
    Correlation,
}

/// One line of the report table. Task rows carry one accuracy per
/// extractor; the average row carries means; the correlation row carries
/// Pearson's r against the human column (null when undefined).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: RowKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtask: Option<Subtask>,
    pub human: Option<f64>,
    pub values: IndexMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub normalization: String,
    pub distances_include_refs: bool,
    pub zero_range_value: f64,
    pub decision: String,
    pub threshold_grid_step: f64,
    pub threshold_tie_break: String,
    pub dataset_master_seed: Option<u64>,
    pub generator_version: Option<String>,
}

impl Default for ReportMetadata {
    fn default() -> Self {
        Self {
            normalization: "per_task_min_max".into(),
            distances_include_refs: false,
            zero_range_value: ZERO_RANGE_VALUE,
            decision: "positive iff normalized distance < theta".into(),
            threshold_grid_step: 0.01,
            threshold_tie_break: "smallest".into(),
            dataset_master_seed: None,
            generator_version: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub extractors: Vec<String>,
    /// Fitted threshold per extractor.
    pub thresholds: IndexMap<String, f64>,
    pub rows: Vec<ReportRow>,
    pub metadata: ReportMetadata,
}

impl Report {
    pub fn task_rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.kind == RowKind::Task)
    }

    pub fn row(&self, kind: RowKind) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<16} {:<8} {:>7}", "concept", "subtask", "human");
        for e in &self.extractors {
            let _ = write!(out, " {:>10}", e);
        }
        out.push('\n');
        let width = 33 + 11 * self.extractors.len();
        let rule = "-".repeat(width) + "\n";
        out.push_str(&rule);
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let mut last_split = None;
        for r in &self.rows {
            let label = match r.kind {
                RowKind::Task => {
                    if last_split.is_some() && last_split != r.split {
                        out.push_str(&rule);
                    }
                    last_split = r.split;
                    display_name(r.concept.as_deref().unwrap_or("")).to_string()
                }
                RowKind::Average => {
                    out.push_str(&rule);
                    "average".to_string()
                }
                RowKind::Correlation => "pearson r".to_string(),
            };
            let sub = r.subtask.map_or("", Subtask::as_str);
            let human = if r.kind == RowKind::Correlation {
                String::from("")
            } else {
                cell(r.human)
            };
            let _ = write!(out, "{label:<16} {sub:<8} {human:>7}");
            for e in &self.extractors {
                let _ = write!(out, " {:>10}", cell(r.values.get(e).copied().flatten()));
            }
            out.push('\n');
        }
        out.push_str(&rule);
        let thresholds: Vec<String> = self
            .thresholds
            .iter()
            .map(|(k, v)| format!("{k}={v:.2}"))
            .collect();
        let _ = writeln!(out, "theta*: {}", thresholds.join(", "));
        out
    }
}

/// Builds the report from per-extractor normalized distances.
pub fn build_report(
    per_extractor: &[(String, Vec<TaskDistances>)],
    metadata: ReportMetadata,
) -> Result<Report, EvalError> {
    if per_extractor.is_empty() {
        return Err(EvalError::NoExtractors);
    }
    let mut thresholds = IndexMap::new();
    let mut scores: Vec<Vec<TaskScore>> = Vec::new();
    for (name, dists) in per_extractor {
        let (theta, _) = fit_threshold(dists);
        thresholds.insert(name.clone(), theta);
        scores.push(
            dists
                .iter()
                .flat_map(|d| {
                    let (c, f) = score_distances(d, theta);
                    [c, f]
                })
                .collect(),
        );
    }
    let first = &scores[0];
    let mut rows = Vec::with_capacity(first.len() + 2);
    for (i, s) in first.iter().enumerate() {
        let mut values = IndexMap::new();
        for ((name, _), col) in per_extractor.iter().zip(&scores) {
            let other = col
                .get(i)
                .filter(|o| o.concept_id == s.concept_id && o.subtask == s.subtask)
                .ok_or_else(|| EvalError::IncompleteTask {
                    concept: s.concept_id.clone(),
                    detail: format!("missing from `{name}`"),
                })?;
            values.insert(name.clone(), Some(other.accuracy));
        }
        rows.push(ReportRow {
            kind: RowKind::Task,
            concept: Some(s.concept_id.clone()),
            split: Some(s.split),
            subtask: Some(s.subtask),
            human: human_accuracy(&s.concept_id, s.subtask),
            values,
        });
    }
    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            None
        } else {
            Some(xs.iter().sum::<f64>() / xs.len() as f64)
        }
    };
    let humans: Vec<Option<f64>> = rows.iter().map(|r| r.human).collect();
    let mut avg = IndexMap::new();
    let mut corr = IndexMap::new();
    for (name, _) in per_extractor {
        let col: Vec<f64> = rows.iter().map(|r| r.values[name].unwrap_or(0.0)).collect();
        avg.insert(name.clone(), mean(&col));
        let (h, m): (Vec<f64>, Vec<f64>) = humans
            .iter()
            .zip(&col)
            .filter_map(|(h, m)| h.map(|h| (h, *m)))
            .unzip();
        corr.insert(name.clone(), pearson(&m, &h).ok());
    }
    let human_col: Vec<f64> = humans.iter().flatten().copied().collect();
    rows.push(ReportRow {
        kind: RowKind::Average,
        concept: None,
        split: None,
        subtask: None,
        human: mean(&human_col),
        values: avg,
    });
    rows.push(ReportRow {
        kind: RowKind::Correlation,
        concept: None,
        split: None,
        subtask: None,
        human: None,
        values: corr,
    });
    Ok(Report {
        extractors: per_extractor.iter().map(|(n, _)| n.clone()).collect(),
        thresholds,
        rows,
        metadata,
    })
}

/// Scores every task of a dataset with each extractor.
pub fn evaluate_dataset(
    root: &Path,
    manifest: &DatasetManifest,
    extractors: &[Extractor],
) -> Result<Report, EvalError> {
    if extractors.is_empty() {
        return Err(EvalError::NoExtractors);
    }
    let per_task = manifest
        .tasks
        .par_iter()
        .map(|set| {
            task_features(root, set, extractors)?
                .iter()
                .map(normalized_distances)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let per_extractor: Vec<(String, Vec<TaskDistances>)> = extractors
        .iter()
        .enumerate()
        .map(|(i, e)| {
            (
                e.id().to_string(),
                per_task.iter().map(|t| t[i].clone()).collect(),
            )
        })
        .collect();
    let metadata = ReportMetadata {
        dataset_master_seed: Some(manifest.master_seed),
        generator_version: Some(manifest.generator_version.clone()),
        ..Default::default()
    };
    build_report(&per_extractor, metadata)
}
