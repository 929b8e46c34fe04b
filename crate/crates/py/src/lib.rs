//! Python bindings: `import geoclidean`.
// pyo3 macro expansion trips this lint on every PyResult signature
#![allow(clippy::useless_conversion)]

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use geoclidean::concepts::{self, GenerateConfig};
use geoclidean::dsl::{self, ConceptProgram};
use geoclidean::eval::{self, ExternalFeatures, Extractor, ExtractorId, FeatureVector};
use geoclidean::geom::{self, Coord};
use geoclidean::realize::{self, RealizeConfig};
use geoclidean::render::{self, RenderConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed concept program.
#[pyclass(name = "Program", module = "geoclidean", frozen)]
#[derive(Clone)]
struct PyProgram {
    inner: ConceptProgram,
}

#[pymethods]
impl PyProgram {
    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// Point names with their constraint object names, in definition order.
    fn points(&self) -> Vec<(String, Vec<String>)> {
        self.inner
            .points()
            .map(|p| (p.name.clone(), p.constraints.clone()))
            .collect()
    }

    /// `(name, kind, visible, begin, end)` for each object.
    fn objects(&self) -> Vec<(String, String, bool, String, String)> {
        self.inner
            .objects()
            .map(|o| {
                (
                    o.name.clone(),
                    o.kind.keyword().to_string(),
                    o.visible,
                    o.begin.clone(),
                    o.end.clone(),
                )
            })
            .collect()
    }

    fn visible_count(&self) -> usize {
        self.inner.visible_count()
    }

    fn pretty_print(&self) -> String {
        self.inner.pretty_print()
    }

    /// Constraints of `target` missing from this program.
    fn removed_relative_to(&self, target: &PyProgram) -> usize {
        self.inner
            .constraint_signature()
            .removed_relative_to(&target.inner.constraint_signature())
    }

    fn __repr__(&self) -> String {
        format!(
            "Program(name={:?}, statements={})",
            self.inner.name,
            self.inner.statements.len()
        )
    }
}

/// One sampled scene of a program.
#[pyclass(name = "Realization", module = "geoclidean", frozen)]
struct PyRealization {
    inner: realize::Realization,
}

#[pymethods]
impl PyRealization {
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn restarts(&self) -> usize {
        self.inner.restarts
    }

    /// `{name: (x, y)}` in canvas units.
    fn points(&self) -> Vec<(String, (f64, f64))> {
        self.inner
            .points
            .iter()
            .map(|(k, c)| (k.clone(), (c.x, c.y)))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        realize::Realization::from_json(text)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    /// Whether every constraint of `program` holds in this scene.
    fn satisfies(&self, program: &PyProgram) -> PyResult<bool> {
        realize::satisfies(&program.inner, &self.inner).map_err(value_err)
    }

    #[pyo3(signature = (pixels=256, stroke_width=2.5))]
    fn to_svg(&self, pixels: u32, stroke_width: f64) -> PyResult<String> {
        let cfg = render_config(pixels, stroke_width, true)?;
        Ok(render::render_vector(&self.inner.to_scene(), &cfg))
    }

    /// Grayscale values in `[0, 1]`, row-major, 1.0 = white.
    #[pyo3(signature = (pixels=256, stroke_width=2.5, antialias=true))]
    fn rasterize(&self, pixels: u32, stroke_width: f64, antialias: bool) -> PyResult<Vec<f32>> {
        let cfg = render_config(pixels, stroke_width, antialias)?;
        Ok(render::rasterize(&self.inner.to_scene(), &cfg).values)
    }

    #[pyo3(signature = (path, pixels=256, stroke_width=2.5, antialias=true))]
    fn write_png(
        &self,
        path: PathBuf,
        pixels: u32,
        stroke_width: f64,
        antialias: bool,
    ) -> PyResult<()> {
        let cfg = render_config(pixels, stroke_width, antialias)?;
        render::rasterize(&self.inner.to_scene(), &cfg)
            .write_png(&path)
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }
}

fn render_config(pixels: u32, stroke_width: f64, antialias: bool) -> PyResult<RenderConfig> {
    let cfg = RenderConfig {
        pixels,
        stroke_width,
        antialias,
    };
    cfg.validate().map_err(value_err)?;
    Ok(cfg)
}

/// A built-in task: target plus close and far variants.
#[pyclass(name = "Task", module = "geoclidean", frozen)]
struct PyTask {
    #[pyo3(get)]
    concept_id: String,
    #[pyo3(get)]
    split: String,
    #[pyo3(get)]
    target: Py<PyProgram>,
    #[pyo3(get)]
    close: Py<PyProgram>,
    #[pyo3(get)]
    far: Py<PyProgram>,
}

/// Parses program text; raises ValueError listing every diagnostic.
#[pyfunction]
fn parse(source: &str) -> PyResult<PyProgram> {
    dsl::parse(source)
        .map(|inner| PyProgram { inner })
        .map_err(|diags| {
            PyValueError::new_err(
                diags
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("\n"),
            )
        })
}

#[pyfunction]
#[pyo3(name = "realize", signature = (program, seed=0))]
fn realize_program(program: &PyProgram, seed: u64) -> PyResult<PyRealization> {
    realize::realize_seeded(&program.inner, &RealizeConfig::with_seed(seed))
        .map(|inner| PyRealization { inner })
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn primitive(spec: (&str, Vec<f64>)) -> PyResult<geom::Primitive> {
    match (spec.0, spec.1.as_slice()) {
        ("line", &[ax, ay, bx, by]) => Ok(geom::Primitive::segment(
            Coord::new(ax, ay),
            Coord::new(bx, by),
        )),
        ("circle", &[cx, cy, r]) => Ok(geom::Primitive::circle(Coord::new(cx, cy), r)),
        _ => Err(PyValueError::new_err(
            "expected ('line', [ax, ay, bx, by]) or ('circle', [cx, cy, r])",
        )),
    }
}

/// Intersection points of two primitives, each given as
/// `("line", [ax, ay, bx, by])` or `("circle", [cx, cy, r])`.
#[pyfunction]
fn intersect(a: (String, Vec<f64>), b: (String, Vec<f64>)) -> PyResult<Vec<(f64, f64)>> {
    let (p, q) = (primitive((&a.0, a.1))?, primitive((&b.0, b.1))?);
    let hits = geom::intersect(&p, &q).map_err(value_err)?;
    Ok(hits.points().iter().map(|c| (c.x, c.y)).collect())
}

#[pyfunction]
fn builtin_tasks(py: Python<'_>) -> PyResult<Vec<PyTask>> {
    concepts::builtin_tasks()
        .into_iter()
        .map(|t| {
            Ok(PyTask {
                concept_id: t.concept_id,
                split: t.split.to_string(),
                target: Py::new(py, PyProgram { inner: t.target })?,
                close: Py::new(py, PyProgram { inner: t.close })?,
                far: Py::new(py, PyProgram { inner: t.far })?,
            })
        })
        .collect()
}

/// Writes the 740-image dataset and returns the image count.
#[pyfunction]
#[pyo3(signature = (out_dir, seed=0, antialias=true))]
fn generate_dataset(
    py: Python<'_>,
    out_dir: PathBuf,
    seed: u64,
    antialias: bool,
) -> PyResult<usize> {
    let config = GenerateConfig {
        render: RenderConfig {
            antialias,
            ..Default::default()
        },
        ..Default::default()
    };
    py.allow_threads(|| concepts::generate_dataset(seed, &out_dir, &config))
        .map(|m| m.image_count())
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Scores a dataset directory; returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (data_dir, extractors, features=None))]
fn evaluate(
    py: Python<'_>,
    data_dir: PathBuf,
    extractors: Vec<String>,
    features: Option<PathBuf>,
) -> PyResult<String> {
    let external = features
        .map(|p| ExternalFeatures::from_path(&p).map(Arc::new))
        .transpose()
        .map_err(value_err)?;
    let extractors = extractors
        .iter()
        .map(|name| Extractor::from_id(name.parse::<ExtractorId>()?, external.as_ref()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(value_err)?;
    let manifest = concepts::DatasetManifest::load(&data_dir)
        .map_err(|e| PyIOError::new_err(e.to_string()))?;
    let report = py
        .allow_threads(|| eval::evaluate_dataset(&data_dir, &manifest, &extractors))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(report.to_json())
}

#[pyfunction]
fn build_prototype(vectors: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let fvs: Vec<FeatureVector> = vectors
        .into_iter()
        .map(|v| FeatureVector::new("python", v))
        .collect();
    eval::build_prototype(&fvs)
        .map(|p| p.values)
        .map_err(value_err)
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    eval::pearson(&x, &y).map_err(value_err)
}

#[pymodule]
#[pyo3(name = "geoclidean")]
fn geoclidean_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProgram>()?;
    m.add_class::<PyRealization>()?;
    m.add_class::<PyTask>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(realize_program, m)?)?;
    m.add_function(wrap_pyfunction!(intersect, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_tasks, m)?)?;
    m.add_function(wrap_pyfunction!(generate_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(build_prototype, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    Ok(())
}
