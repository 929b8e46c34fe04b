//! The built-in library of 37 concepts and the few-shot dataset generator.
//!
//! Each concept ships as three programs under `concepts/`: the target and two
//! negatives, `close` and `far`, made by deleting one and two point
//! constraints from the target respectively.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, ConceptProgram};
use crate::realize::{realize_seeded, satisfies, RealizeConfig, RealizeError};
use crate::render::{rasterize, RenderConfig, RenderError};

pub const GENERATOR_VERSION: &str = concat!("geoclidean-gen/", env!("CARGO_PKG_VERSION"));

/// Images per label in one trial set.
pub const PER_LABEL: usize = 5;

/// Redraws allowed for a negative whose realization happens to satisfy the target.
const MAX_NEGATIVE_REDRAWS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Elements,
    Constraints,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Elements => "elements",
            Split::Constraints => "constraints",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "elements" => Ok(Split::Elements),
            "constraints" => Ok(Split::Constraints),
            _ => Err(format!("unknown split `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "ref")]
    Ref,
    #[serde(rename = "pos")]
    Pos,
    #[serde(rename = "close_neg")]
    CloseNeg,
    #[serde(rename = "far_neg")]
    FarNeg,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Ref, Label::Pos, Label::CloseNeg, Label::FarNeg];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ref => "ref",
            Label::Pos => "pos",
            Label::CloseNeg => "close_neg",
            Label::FarNeg => "far_neg",
        }
    }

    /// File-name prefix: `ref`, `pos`, `close`, `far`.
    pub fn file_prefix(self) -> &'static str {
        match self {
            Label::CloseNeg => "close",
            Label::FarNeg => "far",
            other => other.as_str(),
        }
    }

    pub fn is_negative(self) -> bool {
        matches!(self, Label::CloseNeg | Label::FarNeg)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown label `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub concept_id: String,
    pub split: Split,
    pub target: ConceptProgram,
    pub close: ConceptProgram,
    pub far: ConceptProgram,
}

impl Task {
    /// The program that generates images of `label`.
    pub fn program(&self, label: Label) -> &ConceptProgram {
        match label {
            Label::Ref | Label::Pos => &self.target,
            Label::CloseNeg => &self.close,
            Label::FarNeg => &self.far,
        }
    }

    /// Constraints removed from the target by (close, far).
    pub fn removals(&self) -> (usize, usize) {
        let t = self.target.constraint_signature();
        (
            self.close.constraint_signature().removed_relative_to(&t),
            self.far.constraint_signature().removed_relative_to(&t),
        )
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("concept `{concept}`: {source}")]
    Realize {
        concept: String,
        source: RealizeError,
    },
    #[error("concept `{concept}`: no {label} sample avoiding the target after {redraws} redraws")]
    NegativeExhausted {
        concept: String,
        label: Label,
        redraws: u64,
    },
    #[error("concept `{concept}`: {source}")]
    Render {
        concept: String,
        source: RenderError,
    },
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

struct Source {
    id: &'static str,
    split: Split,
    target: &'static str,
    close: &'static str,
    far: &'static str,
}

macro_rules! library {
    ($($split:ident: $($id:literal),+;)+) => {
        &[$($(Source {
            id: $id,
            split: Split::$split,
            target: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../concepts/", $id, ".gcl")),
            close: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../concepts/", $id, ".close.gcl")),
            far: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../concepts/", $id, ".far.gcl")),
        },)+)+]
    };
}

const SOURCES: &[Source] = library! {
    Elements: "angle", "perpendicular_bisector", "angle_bisector", "sixty_degree_angle", "radii",
        "diameter", "segment", "rectilinear", "triangle", "quadrilateral", "eq_triangle",
        "right_angled_triangle", "square", "rhombus", "oblong", "rhomboid", "parallel_lines";
    Constraints: "lll", "cll", "llc", "ccl", "lcc", "ccc", "llll", "lllc", "clll", "clcl", "llcc",
        "cccl", "clcc", "cccc", "tll", "llt", "tcl", "clt", "tcc", "cct";
};

/// Raw `.gcl` sources of the library as `(file stem, text)` pairs, 111 in all.
pub fn builtin_sources() -> Vec<(String, &'static str)> {
    SOURCES
        .iter()
        .flat_map(|s| {
            [
                (s.id.to_string(), s.target),
                (format!("{}.close", s.id), s.close),
                (format!("{}.far", s.id), s.far),
            ]
        })
        .collect()
}

/// All 37 tasks: 17 elements concepts followed by 20 constraints concepts.
pub fn builtin_tasks() -> Vec<Task> {
    SOURCES
        .iter()
        .map(|s| {
            let parse = |text: &str, what: &str| {
                dsl::parse(text).unwrap_or_else(|d| {
                    panic!("built-in {} ({what}) does not parse: {}", s.id, d[0])
                })
            };
            Task {
                concept_id: s.id.to_string(),
                split: s.split,
                target: parse(s.target, "target"),
                close: parse(s.close, "close"),
                far: parse(s.far, "far"),
            }
        })
        .collect()
}

pub fn builtin_task(concept_id: &str) -> Option<Task> {
    builtin_tasks()
        .into_iter()
        .find(|t| t.concept_id == concept_id)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-image seed from the master seed and the image's identity.
pub fn image_seed(
    master_seed: u64,
    concept_id: &str,
    label: Label,
    index: usize,
    redraw: u64,
) -> u64 {
    let mut h = splitmix(master_seed);
    for b in concept_id.bytes().chain(label.as_str().bytes()) {
        h = splitmix(h ^ b as u64);
    }
    h = splitmix(h ^ index as u64);
    splitmix(h ^ redraw)
}

#[derive(Debug, Clone, Default)]
pub struct GenerateConfig {
    pub realize: RealizeConfig,
    pub render: RenderConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub split: Split,
    pub concept: String,
    /// Relative to the dataset root, `/`-separated.
    pub path: String,
    pub label: Label,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub concept_id: String,
    pub split: Split,
    pub master_seed: u64,
    /// 5 ref, then 5 pos, 5 close_neg, 5 far_neg.
    pub images: Vec<ManifestRow>,
}

impl TrialSet {
    pub fn with_label(&self, label: Label) -> impl Iterator<Item = &ManifestRow> {
        self.images.iter().filter(move |r| r.label == label)
    }
}

/// Picks the seed for one image: the first redraw whose realization succeeds
/// and, for negatives, does not satisfy the target.
pub fn sample_image_seed(
    task: &Task,
    label: Label,
    index: usize,
    master_seed: u64,
    config: &RealizeConfig,
) -> Result<(u64, crate::realize::Realization), GenerateError> {
    let program = task.program(label);
    for redraw in 0..MAX_NEGATIVE_REDRAWS {
        let seed = image_seed(master_seed, &task.concept_id, label, index, redraw);
        let cfg = RealizeConfig { seed, ..*config };
        let r = realize_seeded(program, &cfg).map_err(|source| GenerateError::Realize {
            concept: task.concept_id.clone(),
            source,
        })?;
        if !label.is_negative() {
            return Ok((seed, r));
        }
        let hit = satisfies(&task.target, &r).map_err(|source| GenerateError::Realize {
            concept: task.concept_id.clone(),
            source,
        })?;
        if !hit {
            return Ok((seed, r));
        }
    }
    Err(GenerateError::NegativeExhausted {
        concept: task.concept_id.clone(),
        label,
        redraws: MAX_NEGATIVE_REDRAWS,
    })
}

/// Writes the 20 PNGs of one task under `<out>/<split>/<concept>/`.
pub fn generate_trialset(
    task: &Task,
    master_seed: u64,
    out_dir: &Path,
    config: &GenerateConfig,
) -> Result<TrialSet, GenerateError> {
    let rel_dir = format!("{}/{}", task.split, task.concept_id);
    let dir = out_dir.join(task.split.as_str()).join(&task.concept_id);
    std::fs::create_dir_all(&dir).map_err(|source| io_err(&dir, source))?;
    let mut images = Vec::with_capacity(4 * PER_LABEL);
    for label in Label::ALL {
        for i in 0..PER_LABEL {
            let (seed, r) = sample_image_seed(task, label, i, master_seed, &config.realize)?;
            let name = format!("{}_{}.png", label.file_prefix(), i + 1);
            rasterize(&r.to_scene(), &config.render)
                .write_png(&dir.join(&name))
                .map_err(|source| GenerateError::Render {
                    concept: task.concept_id.clone(),
                    source,
                })?;
            images.push(ManifestRow {
                split: task.split,
                concept: task.concept_id.clone(),
                path: format!("{rel_dir}/{name}"),
                label,
                seed,
            });
        }
    }
    Ok(TrialSet {
        concept_id: task.concept_id.clone(),
        split: task.split,
        master_seed,
        images,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub generator_version: String,
    pub master_seed: u64,
    pub tasks: Vec<TrialSet>,
}

pub const MANIFEST_CSV: &str = "manifest.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct ManifestMeta {
    generator_version: String,
    master_seed: u64,
    tasks: usize,
    images: usize,
    scoreable_subtasks: usize,
}

impl DatasetManifest {
    pub fn rows(&self) -> impl Iterator<Item = &ManifestRow> {
        self.tasks.iter().flat_map(|t| t.images.iter())
    }

    pub fn image_count(&self) -> usize {
        self.tasks.iter().map(|t| t.images.len()).sum()
    }

    /// Each task contributes a close and a far subtask.
    pub fn scoreable_subtasks(&self) -> usize {
        2 * self.tasks.len()
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), GenerateError> {
        let csv_path = out_dir.join(MANIFEST_CSV);
        let mut w = csv::Writer::from_path(&csv_path)?;
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush().map_err(|source| io_err(&csv_path, source))?;
        let meta = ManifestMeta {
            generator_version: self.generator_version.clone(),
            master_seed: self.master_seed,
            tasks: self.tasks.len(),
            images: self.image_count(),
            scoreable_subtasks: self.scoreable_subtasks(),
        };
        let json_path = out_dir.join(MANIFEST_JSON);
        let text = serde_json::to_string_pretty(&meta)? + "\n";
        std::fs::write(&json_path, text).map_err(|source| io_err(&json_path, source))
    }

    /// Reads `manifest.csv` (and `manifest.json` when present) from a dataset root.
    pub fn load(root: &Path) -> Result<Self, GenerateError> {
        let csv_path = root.join(MANIFEST_CSV);
        let mut rdr = csv::Reader::from_path(&csv_path)?;
        let mut by_task: BTreeMap<(Split, String), Vec<ManifestRow>> = BTreeMap::new();
        let mut order = Vec::new();
        for row in rdr.deserialize() {
            let row: ManifestRow = row?;
            let key = (row.split, row.concept.clone());
            if !by_task.contains_key(&key) {
                order.push(key.clone());
            }
            by_task.entry(key).or_default().push(row);
        }
        let (generator_version, master_seed) =
            match std::fs::read_to_string(root.join(MANIFEST_JSON)) {
                Ok(text) => {
                    let meta: ManifestMeta = serde_json::from_str(&text)?;
                    (meta.generator_version, meta.master_seed)
                }
                Err(_) => (String::from("unknown"), 0),
            };
        let tasks = order
            .into_iter()
            .map(|key| {
                let images = by_task.remove(&key).unwrap_or_default();
                TrialSet {
                    concept_id: key.1,
                    split: key.0,
                    master_seed,
                    images,
                }
            })
            .collect();
        Ok(Self {
            generator_version,
            master_seed,
            tasks,
        })
    }

    pub fn image_path(root: &Path, row: &ManifestRow) -> PathBuf {
        row.path
            .split('/')
            .fold(root.to_path_buf(), |p, part| p.join(part))
    }
}

/// Generates all 37 trial sets in parallel on the current rayon pool and
/// writes the manifest once every task has finished.
pub fn generate_dataset(
    master_seed: u64,
    out_dir: &Path,
    config: &GenerateConfig,
) -> Result<DatasetManifest, GenerateError> {
    config
        .realize
        .validate()
        .map_err(|source| GenerateError::Realize {
            concept: String::new(),
            source,
        })?;
    config
        .render
        .validate()
        .map_err(|source| GenerateError::Render {
            concept: String::new(),
            source,
        })?;
    std::fs::create_dir_all(out_dir).map_err(|source| io_err(out_dir, source))?;
    let tasks = builtin_tasks();
    let sets = tasks
        .par_iter()
        .map(|t| generate_trialset(t, master_seed, out_dir, config))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = DatasetManifest {
        generator_version: GENERATOR_VERSION.to_string(),
        master_seed,
        tasks: sets,
    };
    manifest.write(out_dir)?;
    Ok(manifest)
}

fn io_err(path: &Path, source: std::io::Error) -> GenerateError {
    GenerateError::Io {
        path: path.display().to_string(),
        source,
    }
}
