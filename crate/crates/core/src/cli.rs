//! The `geoclidean` command line.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::concepts::{generate_dataset, DatasetManifest, GenerateConfig};
use crate::dsl::{self, Severity};
use crate::eval::{evaluate_dataset, ExternalFeatures, Extractor, ExtractorId, Report};
use crate::realize::{realize_seeded, RealizeConfig};
use crate::render::{write_scene, RenderConfig};

/// Exit statuses; each failure class has its own code.
pub mod exit {
    pub const OK: i32 = 0;
    /// The program file has errors.
    pub const INVALID_PROGRAM: i32 = 1;
    /// Bad flags or arguments.
    pub const USAGE: i32 = 2;
    /// A file could not be read or written.
    pub const IO: i32 = 3;
    /// Realization or dataset generation failed.
    pub const GENERATE: i32 = 4;
    /// Evaluation failed.
    pub const EVAL: i32 = 5;
    /// An input file was present but malformed.
    pub const BAD_INPUT: i32 = 6;
}

#[derive(Debug, Parser)]
#[command(
    name = "geoclidean",
    version,
    about = "Parse, realize, render and score Euclidean construction concepts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check one or more .gcl programs and print diagnostics.
    Validate {
        /// Program files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Realize a program K times and write <name>_<i>.svg, .png and .json.
    Render {
        /// Program file.
        file: PathBuf,
        /// Seed of the first realization; realization i uses seed + i - 1.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, env = "GEOCLIDEAN_OUT", default_value = "out")]
        out: PathBuf,
        /// Number of realizations.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Also write a binary PGM next to each PNG.
        #[arg(long)]
        pgm: bool,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Generate the full 37-task dataset with manifest.csv.
    Generate {
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, env = "GEOCLIDEAN_OUT", default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Score a generated dataset and write scores.json plus a text table.
    Eval {
        /// Dataset directory containing manifest.csv.
        #[arg(long)]
        data: PathBuf,
        /// Feature extractor: pixels32, edgehist or external. Repeatable.
        #[arg(long = "extractor", required = true)]
        extractors: Vec<String>,
        /// CSV of external features: image_path,v0,v1,...
        #[arg(long)]
        features: Option<PathBuf>,
        /// Report path (default: <data>/scores.json).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the text table of a scores.json report.
    Report {
        /// Report file written by `eval`.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// Image side in pixels.
    #[arg(long, default_value_t = 256)]
    pub pixels: u32,
    /// Stroke width in pixels.
    #[arg(long, default_value_t = 2.5)]
    pub stroke_width: f64,
    /// Hard-edged strokes (no supersampling).
    #[arg(long)]
    pub no_antialias: bool,
}

impl RenderArgs {
    fn config(&self) -> RenderConfig {
        RenderConfig {
            pixels: self.pixels,
            stroke_width: self.stroke_width,
            antialias: !self.no_antialias,
        }
    }
}

/// Like `print!`, but a closed stdout (e.g. piped into `head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! sayln {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl std::fmt::Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Validate { files } => validate(&files),
        Command::Render {
            file,
            seed,
            out,
            n,
            pgm,
            render,
        } => render_file(&file, seed, &out, n, pgm, &render.config()).map(|_| exit::OK),
        Command::Generate {
            seed,
            out,
            jobs,
            render,
        } => {
            let config = GenerateConfig {
                realize: RealizeConfig::default(),
                render: render.config(),
            };
            config.render.validate().map_err(|e| fail(exit::USAGE, e))?;
            let manifest = with_jobs(jobs, || generate_dataset(seed, &out, &config))?
                .map_err(|e| fail(generate_code(&e), e))?;
            sayln!(
                "wrote {} images for {} tasks ({} scoreable subtasks) to {}",
                manifest.image_count(),
                manifest.tasks.len(),
                manifest.scoreable_subtasks(),
                out.display()
            );
            Ok(exit::OK)
        }
        Command::Eval {
            data,
            extractors,
            features,
            out,
            jobs,
        } => eval(&data, &extractors, features.as_deref(), out, jobs).map(|_| exit::OK),
        Command::Report { input } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| fail(exit::IO, format!("{}: {e}", input.display())))?;
            let report = Report::from_json(&text)
                .map_err(|e| fail(exit::BAD_INPUT, format!("{}: {e}", input.display())))?;
            say!("{}", report.to_table());
            Ok(exit::OK)
        }
    }
}

fn generate_code(e: &crate::concepts::GenerateError) -> i32 {
    use crate::concepts::GenerateError as G;
    match e {
        G::Io { .. } => exit::IO,
        G::Csv(_) | G::Json(_) => exit::IO,
        _ => exit::GENERATE,
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(fail(exit::USAGE, "--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| fail(exit::USAGE, e))?;
            Ok(pool.install(f))
        }
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(exit::IO, format!("{}: {e}", path.display())))
}

fn validate(files: &[PathBuf]) -> Result<i32, Failure> {
    let mut code = exit::OK;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for file in files {
        let src = read_source(file)?;
        let (program, diags) = match dsl::parse_with_warnings(&src) {
            Ok((p, warnings)) => (Some(p), warnings),
            Err(errors) => (None, errors),
        };
        for d in &diags {
            let _ = writeln!(out, "{}:{d}", file.display());
        }
        match program {
            Some(p) => {
                let _ = writeln!(
                    out,
                    "{}: ok: concept `{}`, {} points, {} objects ({} visible)",
                    file.display(),
                    p.name,
                    p.points().count(),
                    p.objects().count(),
                    p.visible_count()
                );
            }
            None => {
                let errors = diags
                    .iter()
                    .filter(|d| d.severity == Severity::Error)
                    .count();
                let _ = writeln!(out, "{}: {errors} error(s)", file.display());
                code = exit::INVALID_PROGRAM;
            }
        }
    }
    Ok(code)
}

fn render_file(
    file: &Path,
    seed: u64,
    out: &Path,
    n: u32,
    pgm: bool,
    config: &RenderConfig,
) -> Result<(), Failure> {
    config.validate().map_err(|e| fail(exit::USAGE, e))?;
    let src = read_source(file)?;
    let program = dsl::parse(&src).map_err(|diags| {
        let lines: Vec<String> = diags
            .iter()
            .map(|d| format!("{}:{d}", file.display()))
            .collect();
        fail(exit::INVALID_PROGRAM, lines.join("\n"))
    })?;
    std::fs::create_dir_all(out).map_err(|e| fail(exit::IO, format!("{}: {e}", out.display())))?;
    let stem = file
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("concept")
        .replace('.', "_");
    for i in 0..n {
        let r = realize_seeded(
            &program,
            &RealizeConfig::with_seed(seed.wrapping_add(i as u64)),
        )
        .map_err(|e| fail(exit::GENERATE, e))?;
        let name = format!("{stem}_{}", i + 1);
        write_scene(&r.to_scene(), config, out, &name, pgm).map_err(|e| fail(exit::IO, e))?;
        let json_path = out.join(format!("{name}.json"));
        std::fs::write(&json_path, r.to_json())
            .map_err(|e| fail(exit::IO, format!("{}: {e}", json_path.display())))?;
    }
    sayln!(
        "wrote {n} realization(s) of `{}` to {}",
        program.name,
        out.display()
    );
    Ok(())
}

fn eval(
    data: &Path,
    names: &[String],
    features: Option<&Path>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
) -> Result<(), Failure> {
    let ids = names
        .iter()
        .map(|n| n.parse::<ExtractorId>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(exit::USAGE, e))?;
    let external = match features {
        Some(path) => Some(Arc::new(
            ExternalFeatures::from_path(path)
                .map_err(|e| fail(exit::BAD_INPUT, format!("{}: {e}", path.display())))?,
        )),
        None => None,
    };
    let extractors = ids
        .into_iter()
        .map(|id| Extractor::from_id(id, external.as_ref()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(exit::USAGE, e))?;
    let manifest = DatasetManifest::load(data)
        .map_err(|e| fail(exit::IO, format!("{}: {e}", data.display())))?;
    let report = with_jobs(jobs, || evaluate_dataset(data, &manifest, &extractors))?
        .map_err(|e| fail(exit::EVAL, e))?;
    let json_path = out.unwrap_or_else(|| data.join("scores.json"));
    std::fs::write(&json_path, report.to_json())
        .map_err(|e| fail(exit::IO, format!("{}: {e}", json_path.display())))?;
    let table = report.to_table();
    let txt_path = json_path.with_extension("txt");
    std::fs::write(&txt_path, &table)
        .map_err(|e| fail(exit::IO, format!("{}: {e}", txt_path.display())))?;
    say!("{table}");
    sayln!("report: {}", json_path.display());
    Ok(())
}
