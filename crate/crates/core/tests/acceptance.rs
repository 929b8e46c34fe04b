//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs with a custom harness so the summary is always printed:
//! `cargo test -p geoclidean-core --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geoclidean::concepts::{
    builtin_sources, builtin_task, builtin_tasks, generate_dataset, DatasetManifest,
    GenerateConfig, Label, Split,
};
use geoclidean::dsl::{parse, DiagnosticKind};
use geoclidean::eval::{
    build_prototype, evaluate_dataset, pearson, ExternalFeatures, Extractor, FeatureVector, Report,
    RowKind, Subtask,
};
use geoclidean::geom::{intersect, Coord, Primitive};
use geoclidean::realize::{realize_seeded, satisfies, Realization, RealizeConfig};

type Outcome = Result<String, String>;

fn main() {
    let data = tempfile::tempdir().expect("tempdir");
    let mut results = Vec::new();
    let mut run = |n: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("PASS criterion {n} {name}: {detail} [{secs:.2}s]"),
            Err(detail) => println!("FAIL criterion {n} {name}: {detail} [{secs:.2}s]"),
        }
        results.push(outcome.is_ok());
    };
    println!();
    run(1, "equilateral construction", &criterion_1);
    run(2, "geometric theorems", &criterion_2);
    run(
        3,
        "intersection kernel vs dense-sampling oracle",
        &criterion_3,
    );
    run(4, "dataset shape and negative soundness", &|| {
        criterion_4(data.path())
    });
    run(5, "generate determinism", &criterion_5);
    run(6, "evaluation protocol oracles", &|| {
        criterion_6(data.path())
    });
    run(7, "pearson oracle", &criterion_7);
    run(8, "external feature re-scoring", &|| {
        criterion_8(data.path())
    });
    run(9, "parser round trip and diagnostics", &criterion_9);
    let passed = results.iter().filter(|ok| **ok).count();
    println!("\nacceptance: {passed}/{} criteria passed\n", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn realize_target(concept: &str, seed: u64) -> Result<Realization, String> {
    let task = builtin_task(concept).ok_or_else(|| format!("no built-in `{concept}`"))?;
    realize_seeded(&task.target, &RealizeConfig::with_seed(seed)).map_err(|e| e.to_string())
}

fn pt(r: &Realization, name: &str) -> Coord {
    r.point(name)
        .unwrap_or_else(|| panic!("missing point {name}"))
}

/// Deviation from a right angle between two directions, in radians.
fn right_angle_error(u: Coord, v: Coord) -> f64 {
    (u.dot(v).abs() / (u.norm() * v.norm())).min(1.0).asin()
}

const ALGORITHM_1: &str = "\
l1 = line(p1(), p2())
c1* = circle(p1(), p2())
c2* = circle(p2(), p1())
l2 = line(p1(), p3(c1, c2))
l3 = line(p2(), p3(c1, c2))
";

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let program = parse(ALGORITHM_1).map_err(|d| d[0].to_string())?;
    let mut worst: f64 = 0.0;
    for seed in 0..1000 {
        let r =
            realize_seeded(&program, &RealizeConfig::with_seed(seed)).map_err(|e| e.to_string())?;
        let (a, b, c) = (pt(&r, "p1"), pt(&r, "p2"), pt(&r, "p3"));
        let sides = [a.distance(b), a.distance(c), b.distance(c)];
        let max = sides.iter().cloned().fold(0.0, f64::max);
        let min = sides.iter().cloned().fold(f64::MAX, f64::min);
        worst = worst.max((max - min) / max);
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-6, || {
        format!("relative side spread {worst:.3e} > 1e-6")
    })?;
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "1000 realizations, max relative side spread {worst:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let mut perp: f64 = 0.0;
    let mut mid: f64 = 0.0;
    let mut radii: f64 = 0.0;
    let mut sq_side: f64 = 0.0;
    let mut sq_angle: f64 = 0.0;
    let mut par: f64 = 0.0;
    for seed in 0..200 {
        let r = realize_target("perpendicular_bisector", seed)?;
        let (a, b, c, d) = (pt(&r, "p1"), pt(&r, "p2"), pt(&r, "p3"), pt(&r, "p4"));
        perp = perp.max(right_angle_error(b - a, d - c));
        let m = (a + b) * 0.5;
        mid = mid.max(Primitive::segment(c, d).distance_to(m));

        let r = realize_target("radii", seed)?;
        let (o, e, x, y) = (pt(&r, "p1"), pt(&r, "p2"), pt(&r, "p3"), pt(&r, "p4"));
        let rad = o.distance(e);
        radii = radii
            .max((o.distance(x) - rad).abs())
            .max((o.distance(y) - rad).abs());

        let r = realize_target("square", seed)?;
        let corners = [pt(&r, "p1"), pt(&r, "p6"), pt(&r, "p2"), pt(&r, "p7")];
        let sides: Vec<Coord> = (0..4).map(|i| corners[(i + 1) % 4] - corners[i]).collect();
        let lens: Vec<f64> = sides.iter().map(|s| s.norm()).collect();
        let max = lens.iter().cloned().fold(0.0, f64::max);
        let min = lens.iter().cloned().fold(f64::MAX, f64::min);
        sq_side = sq_side.max((max - min) / max);
        for i in 0..4 {
            sq_angle = sq_angle.max(right_angle_error(sides[i], sides[(i + 1) % 4]));
        }

        let r = realize_target("parallel_lines", seed)?;
        let u = pt(&r, "p4") - pt(&r, "p3");
        let v = pt(&r, "p7") - pt(&r, "p6");
        par = par.max((u.cross(v) / (u.norm() * v.norm())).abs());
    }
    ensure(perp <= 1e-4, || {
        format!("perpendicular bisector off by {perp:.3e} rad")
    })?;
    ensure(mid <= 1e-6, || {
        format!("bisector misses midpoint by {mid:.3e}")
    })?;
    ensure(radii <= 1e-6, || format!("radii differ by {radii:.3e}"))?;
    ensure(sq_side <= 1e-6, || {
        format!("square sides differ by {sq_side:.3e} (relative)")
    })?;
    ensure(sq_angle <= 1e-4, || {
        format!("square corner off by {sq_angle:.3e} rad")
    })?;
    ensure(par <= 1e-6, || format!("parallel cross product {par:.3e}"))?;
    Ok(format!(
        "200 seeds each; perp {perp:.1e} rad, radii {radii:.1e}, square sides {sq_side:.1e} angles {sq_angle:.1e} rad, parallel {par:.1e}"
    ))
}

// ---- dense-sampling oracle, independent of the analytic kernel ----

#[derive(Clone, Copy, Debug)]
enum Shape {
    Seg(Coord, Coord),
    Circ(Coord, f64),
}

impl Shape {
    fn to_primitive(self) -> Primitive {
        match self {
            Shape::Seg(a, b) => Primitive::segment(a, b),
            Shape::Circ(c, r) => Primitive::circle(c, r),
        }
    }

    fn at(self, t: f64) -> Coord {
        match self {
            Shape::Seg(a, b) => Coord::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)),
            Shape::Circ(c, r) => Coord::new(c.x + r * (t * TAU).cos(), c.y + r * (t * TAU).sin()),
        }
    }

    fn dist(self, p: Coord) -> f64 {
        match self {
            Shape::Seg(a, b) => {
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                let t =
                    (((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
                ((a.x + t * dx - p.x).powi(2) + (a.y + t * dy - p.y).powi(2)).sqrt()
            }
            Shape::Circ(c, r) => (((p.x - c.x).powi(2) + (p.y - c.y).powi(2)).sqrt() - r).abs(),
        }
    }

    fn perimeter(self) -> f64 {
        match self {
            Shape::Seg(a, b) => ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt(),
            Shape::Circ(_, r) => TAU * r,
        }
    }

    fn closed(self) -> bool {
        matches!(self, Shape::Circ(..))
    }
}

const ORACLE_SAMPLES: usize = 100_000;
const ORACLE_HIT: f64 = 1e-9;

/// Samples `p` densely, refines every local minimum of the distance to `q`
/// by golden-section search, and keeps the minima that reach zero.
fn oracle(p: Shape, q: Shape) -> Vec<Coord> {
    let n = ORACLE_SAMPLES;
    let closed = p.closed();
    let count = if closed { n } else { n + 1 };
    let param = |i: usize| i as f64 / n as f64;
    let g: Vec<f64> = (0..count).map(|i| q.dist(p.at(param(i)))).collect();
    let step = p.perimeter() / n as f64;
    let mut hits: Vec<Coord> = Vec::new();
    for i in 0..count {
        let (prev, next) = if closed {
            ((i + count - 1) % count, (i + 1) % count)
        } else {
            (i.saturating_sub(1), (i + 1).min(count - 1))
        };
        if g[i] > g[prev] || g[i] > g[next] || g[i] > 4.0 * step {
            continue;
        }
        let (mut lo, mut hi) = (param(i) - 1.0 / n as f64, param(i) + 1.0 / n as f64);
        if !closed {
            lo = lo.max(0.0);
            hi = hi.min(1.0);
        }
        let f = |t: f64| q.dist(p.at(t));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if f(m1) <= f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = (lo + hi) / 2.0;
        if f(t) <= ORACLE_HIT {
            let c = p.at(t);
            if hits.iter().all(|h| h.distance(c) > 1e-6) {
                hits.push(c);
            }
        }
    }
    hits
}

/// Whether the pair sits within 1e-6 of a count-changing configuration
/// (tangency or an intersection at a segment endpoint).
fn near_boundary(p: Shape, q: Shape, points: &[Coord]) -> bool {
    let tol = 1e-6;
    let tangent = match (p, q) {
        (Shape::Circ(c, r), Shape::Circ(d, s)) => {
            let dist = c.distance(d);
            (dist - (r + s)).abs() < tol || (dist - (r - s).abs()).abs() < tol
        }
        (Shape::Seg(a, b), Shape::Circ(c, r)) | (Shape::Circ(c, r), Shape::Seg(a, b)) => {
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let line_dist =
                ((c.x - a.x) * dy - (c.y - a.y) * dx).abs() / (dx * dx + dy * dy).sqrt();
            (line_dist - r).abs() < tol
        }
        _ => false,
    };
    let endpoints: Vec<Coord> = [p, q]
        .iter()
        .filter_map(|s| match *s {
            Shape::Seg(a, b) => Some([a, b]),
            _ => None,
        })
        .flatten()
        .collect();
    let at_end = points
        .iter()
        .any(|x| endpoints.iter().any(|e| e.distance(*x) < tol))
        || endpoints
            .iter()
            .any(|e| [p, q].iter().any(|s| s.dist(*e) < tol));
    tangent || at_end
}

fn random_shape(rng: &mut ChaCha8Rng, circle: bool) -> Shape {
    let mut c = || Coord::new(rng.gen::<f64>(), rng.gen::<f64>());
    if circle {
        let center = c();
        Shape::Circ(center, 0.05 + 0.45 * rng.gen::<f64>())
    } else {
        let a = c();
        let mut b = c();
        while a.distance(b) < 0.05 {
            b = Coord::new(rng.gen(), rng.gen());
        }
        Shape::Seg(a, b)
    }
}

fn tangent_pair(rng: &mut ChaCha8Rng, k: usize) -> (Shape, Shape) {
    let center = Coord::new(0.3 + 0.4 * rng.gen::<f64>(), 0.3 + 0.4 * rng.gen::<f64>());
    let r = 0.1 + 0.2 * rng.gen::<f64>();
    let theta = rng.gen::<f64>() * TAU;
    let u = Coord::new(theta.cos(), theta.sin());
    match k % 3 {
        0 => {
            let s = 0.05 + 0.2 * rng.gen::<f64>();
            (Shape::Circ(center, r), Shape::Circ(center + u * (r + s), s))
        }
        1 => {
            let s = r * (0.2 + 0.6 * rng.gen::<f64>());
            (Shape::Circ(center, r), Shape::Circ(center + u * (r - s), s))
        }
        _ => {
            let foot = center + u * r;
            let v = u.perp();
            let (l1, l2) = (0.05 + 0.3 * rng.gen::<f64>(), 0.05 + 0.3 * rng.gen::<f64>());
            (
                Shape::Seg(foot - v * l1, foot + v * l2),
                Shape::Circ(center, r),
            )
        }
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut by_count = [0usize; 3];
    let mut tangent_ok = 0;
    let mut boundary = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (p, q) = if i % 10 == 0 {
            tangent_pair(&mut rng, i / 10)
        } else {
            let kind = rng.gen_range(0..3);
            (
                random_shape(&mut rng, kind == 2),
                random_shape(&mut rng, kind >= 1),
            )
        };
        let analytic =
            intersect(&p.to_primitive(), &q.to_primitive()).map_err(|e| e.to_string())?;
        let analytic = analytic.points().to_vec();
        // sample the longer primitive so both transversal crossings are resolved
        let brute = if p.perimeter() >= q.perimeter() {
            oracle(p, q)
        } else {
            oracle(q, p)
        };
        let matched = analytic.len() == brute.len()
            && analytic
                .iter()
                .all(|a| brute.iter().any(|b| a.distance(*b) <= 1e-6))
            && brute
                .iter()
                .all(|b| analytic.iter().any(|a| a.distance(*b) <= 1e-6));
        if matched {
            by_count[analytic.len().min(2)] += 1;
            if i % 10 == 0 && analytic.len() == 1 {
                tangent_ok += 1;
            }
            for a in &analytic {
                let d = brute
                    .iter()
                    .map(|b| a.distance(*b))
                    .fold(f64::MAX, f64::min);
                worst = worst.max(d);
            }
        } else if near_boundary(
            p,
            q,
            &analytic.iter().chain(&brute).copied().collect::<Vec<_>>(),
        ) && (analytic.len() as i64 - brute.len() as i64).abs() <= 1
        {
            boundary.push(i);
        } else {
            return Err(format!(
                "pair {i}: analytic {analytic:?} vs oracle {brute:?} for {p:?} / {q:?}"
            ));
        }
    }
    ensure(tangent_ok == 100, || {
        format!("only {tangent_ok}/100 constructed tangencies gave one point")
    })?;
    Ok(format!(
        "1000 pairs: {} empty, {} single, {} double; {tangent_ok}/100 tangencies collapse to one point; max position gap {worst:.1e}; {} pairs within 1e-6 of a tangency/endpoint boundary differ by one point",
        by_count[0], by_count[1], by_count[2], boundary.len()
    ))
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk(&path, out);
        } else {
            out.push(path);
        }
    }
}

fn criterion_4(root: &Path) -> Outcome {
    let start = Instant::now();
    let manifest =
        generate_dataset(1, root, &GenerateConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let count_dirs = |split: &str| {
        std::fs::read_dir(root.join(split))
            .map(|d| d.count())
            .unwrap_or(0)
    };
    let (elements, constraints) = (count_dirs("elements"), count_dirs("constraints"));
    ensure(elements == 17 && constraints == 20, || {
        format!("{elements} elements / {constraints} constraints dirs")
    })?;
    let mut files = Vec::new();
    walk(root, &mut files);
    let pngs = files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .count();
    ensure(pngs == 740, || format!("{pngs} images"))?;

    let loaded = DatasetManifest::load(root).map_err(|e| e.to_string())?;
    ensure(loaded == manifest, || {
        "manifest.csv does not reload to the generated manifest".into()
    })?;
    ensure(loaded.scoreable_subtasks() == 74, || {
        format!("{} subtasks", loaded.scoreable_subtasks())
    })?;
    for set in &loaded.tasks {
        let counts: Vec<usize> = Label::ALL
            .iter()
            .map(|l| set.with_label(*l).count())
            .collect();
        ensure(counts == [5, 5, 5, 5], || {
            format!("{}: label counts {counts:?}", set.concept_id)
        })?;
    }

    let tasks: BTreeMap<String, _> = builtin_tasks()
        .into_iter()
        .map(|t| (t.concept_id.clone(), t))
        .collect();
    let mut negatives = 0;
    for row in loaded.rows() {
        ensure(DatasetManifest::image_path(root, row).is_file(), || {
            format!("missing {}", row.path)
        })?;
        let task = &tasks[&row.concept];
        let r = realize_seeded(task.program(row.label), &RealizeConfig::with_seed(row.seed))
            .map_err(|e| e.to_string())?;
        let hit = satisfies(&task.target, &r).map_err(|e| e.to_string())?;
        if row.label.is_negative() {
            negatives += 1;
            ensure(!hit, || {
                format!("negative {} satisfies its target", row.path)
            })?;
        } else {
            ensure(hit, || format!("positive {} fails its target", row.path))?;
        }
    }
    ensure(elapsed < Duration::from_secs(120), || {
        format!("generation took {elapsed:?}")
    })?;
    Ok(format!(
        "17 + 20 concept dirs, {pngs} images, 74 subtasks, 5/5/5/5 labels, 0 of {negatives} negatives satisfy the target, generated in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_5() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_geoclidean");
    let mut trees = Vec::new();
    for (name, jobs) in [("a", "1"), ("b", "3")] {
        let out = tmp.path().join(name);
        let status = Command::new(bin)
            .args([
                "generate",
                "--seed",
                "1",
                "--no-antialias",
                "--jobs",
                jobs,
                "--out",
            ])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            String::from_utf8_lossy(&status.stderr).into_owned()
        })?;
        let mut files = Vec::new();
        walk(&out, &mut files);
        let mut rel: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| {
                (
                    p.strip_prefix(&out).unwrap().to_string_lossy().into_owned(),
                    std::fs::read(p).unwrap(),
                )
            })
            .collect();
        rel.sort();
        trees.push(rel);
    }
    ensure(trees[0].len() == trees[1].len(), || {
        "file trees differ".into()
    })?;
    for (a, b) in trees[0].iter().zip(&trees[1]) {
        ensure(a.0 == b.0, || format!("{} vs {}", a.0, b.0))?;
        ensure(a.1 == b.1, || format!("{} differs", a.0))?;
    }
    Ok(format!(
        "two `generate --seed 1` runs (jobs 1 and 3): {} files byte-identical, manifest included",
        trees[0].len()
    ))
}

fn features_file(
    root: &Path,
    name: &str,
    f: &mut dyn FnMut(usize, &geoclidean::concepts::ManifestRow) -> Vec<f64>,
) -> PathBuf {
    let manifest = DatasetManifest::load(root).unwrap();
    let path = root.join(name);
    let mut w = csv::Writer::from_path(&path).unwrap();
    for (t, set) in manifest.tasks.iter().enumerate() {
        for row in &set.images {
            let v = f(t, row);
            let mut rec = vec![row.path.clone()];
            rec.extend(v.iter().map(|x| x.to_string()));
            w.write_record(&rec).unwrap();
        }
    }
    w.flush().unwrap();
    path
}

fn external_report(root: &Path, features: &Path) -> Result<Report, String> {
    let manifest = DatasetManifest::load(root).map_err(|e| e.to_string())?;
    let ext = ExternalFeatures::from_path(features).map_err(|e| e.to_string())?;
    evaluate_dataset(root, &manifest, &[Extractor::External(Arc::new(ext))])
        .map_err(|e| e.to_string())
}

fn average(report: &Report) -> f64 {
    report
        .row(RowKind::Average)
        .and_then(|r| r.values["external"])
        .unwrap_or(f64::NAN)
}

fn criterion_6(root: &Path) -> Outcome {
    ensure(root.join("manifest.csv").is_file(), || {
        "needs the dataset from criterion 4".into()
    })?;
    let onehot = features_file(root, "onehot.csv", &mut |t, row| {
        let slot = match row.label {
            Label::Ref | Label::Pos => 0,
            Label::CloseNeg => 1,
            Label::FarNeg => 2,
        };
        (0..111)
            .map(|k| if k == 3 * t + slot { 1.0 } else { 0.0 })
            .collect()
    });
    let report = external_report(root, &onehot)?;
    let theta = report.thresholds["external"];
    ensure(average(&report) == 1.0, || {
        format!("one-hot mean accuracy {}", average(&report))
    })?;

    let mut means = Vec::new();
    for rep in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + rep);
        let path = features_file(root, "random.csv", &mut |_, _| {
            (0..16).map(|_| rng.gen::<f64>()).collect()
        });
        means.push(average(&external_report(root, &path)?));
    }
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    let (lo, hi) = (
        means.iter().cloned().fold(1.0, f64::min),
        means.iter().cloned().fold(0.0, f64::max),
    );
    ensure((mean - 0.5).abs() <= 0.05, || {
        format!("random-feature mean accuracy {mean:.4} outside 0.50 +/- 0.05")
    })?;

    let v = FeatureVector::new("x", vec![0.1, -3.7, 1e-9, 42.0, 1.0 / 3.0]);
    let proto = build_prototype(&vec![v.clone(); 5]).map_err(|e| e.to_string())?;
    ensure(proto == v, || {
        format!("prototype {:?} != {:?}", proto.values, v.values)
    })?;
    Ok(format!(
        "one-hot identity: mean 1.000 at theta* {theta:.2}; random features: mean {mean:.4} over 10 reps (range {lo:.3}..{hi:.3}) at fitted theta*; identical-vector prototype exact"
    ))
}

fn criterion_7() -> Outcome {
    let x = [0.12, 3.4, -1.5, 7.25, 0.0, 2.2];
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let same = pearson(&x, &x).map_err(|e| e.to_string())?;
    let opposite = pearson(&x, &neg).map_err(|e| e.to_string())?;
    let hand = pearson(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]).map_err(|e| e.to_string())?;
    // r = 4 / sqrt(2 * 78 / 9)
    let expected = 4.0 / (2.0 * 78.0 / 9.0f64).sqrt();
    ensure(same == 1.0, || format!("pearson(x, x) = {same}"))?;
    ensure(opposite == -1.0, || format!("pearson(x, -x) = {opposite}"))?;
    ensure(
        (hand - 0.9608).abs() <= 1e-3 && (hand - expected).abs() < 1e-12,
        || format!("hand case {hand}"),
    )?;
    Ok(format!(
        "pearson(x,x) = 1, pearson(x,-x) = -1 exactly; (0,1,2)/(0,1,4) = {hand:.4}"
    ))
}

fn criterion_8(root: &Path) -> Outcome {
    // A single hand-scored task whose features are scalars; the prototype
    // of the all-zero references is 0, so distances equal the values.
    let fixture = tempfile::tempdir().map_err(|e| e.to_string())?;
    let pos = [0.0, 0.1, 0.2, 0.3, 0.8];
    let close = [0.25, 0.4, 0.5, 0.6, 0.7];
    let far = [0.15, 0.85, 0.9, 0.95, 1.0];
    let mut manifest = String::from("split,concept,path,label,seed\n");
    let mut features = String::from("image_path,v0\n");
    for (label, prefix, values) in [
        ("ref", "ref", [0.0; 5]),
        ("pos", "pos", pos),
        ("close_neg", "close", close),
        ("far_neg", "far", far),
    ] {
        for (i, v) in values.iter().enumerate() {
            let path = format!("constraints/llc/{prefix}_{}.png", i + 1);
            manifest.push_str(&format!("constraints,llc,{path},{label},0\n"));
            features.push_str(&format!("{path},{v}\n"));
        }
    }
    std::fs::write(fixture.path().join("manifest.csv"), manifest).map_err(|e| e.to_string())?;
    std::fs::write(fixture.path().join("features.csv"), features).map_err(|e| e.to_string())?;
    let report = external_report(fixture.path(), &fixture.path().join("features.csv"))?;
    // By hand: for theta in (0.3, 0.4], 4 of 5 positives fall below theta,
    // 4 close and 4 far negatives reach it: 8/10 on both subtasks, and no
    // other interval does better. The smallest grid point there is 0.31.
    let theta = report.thresholds["external"];
    ensure(theta == 0.31, || format!("theta* {theta}, expected 0.31"))?;
    let accs: Vec<(Subtask, f64)> = report
        .task_rows()
        .map(|r| (r.subtask.unwrap(), r.values["external"].unwrap()))
        .collect();
    ensure(accs == [(Subtask::Close, 0.8), (Subtask::Far, 0.8)], || {
        format!("accuracies {accs:?}")
    })?;

    // Full-size run: any external feature file yields the table layout with
    // a correlation against the embedded human accuracies.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let path = features_file(root, "external.csv", &mut |_, _| {
        (0..32).map(|_| rng.gen::<f64>()).collect()
    });
    let full = external_report(root, &path)?;
    let tasks = full.task_rows().count();
    let avg = full
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Average)
        .count();
    let corr = full
        .rows
        .iter()
        .filter(|r| r.kind == RowKind::Correlation)
        .count();
    ensure((tasks, avg, corr) == (74, 1, 1), || {
        format!("rows {tasks}/{avg}/{corr}")
    })?;
    ensure(full.task_rows().all(|r| r.human.is_some()), || {
        "missing human accuracy".into()
    })?;
    let r = full
        .row(RowKind::Correlation)
        .and_then(|r| r.values["external"]);
    ensure(r.is_some_and(|r| (-1.0..=1.0).contains(&r)), || {
        format!("pearson {r:?}")
    })?;
    let reparsed = Report::from_json(&full.to_json()).map_err(|e| e.to_string())?;
    ensure(reparsed == full, || {
        "report JSON does not round-trip".into()
    })?;
    ensure(
        full.task_rows()
            .filter(|r| r.split == Some(Split::Elements))
            .count()
            == 34,
        || "elements rows".into(),
    )?;
    Ok(format!(
        "crowdsourced human and pretrained-network accuracies are not reproduced (published human values embedded instead); 10-item fixture matches hand scoring (theta* 0.31, close 0.8, far 0.8); external file re-scored into 74 rows + average + pearson r = {:.4}",
        r.unwrap()
    ))
}

fn criterion_9() -> Outcome {
    let sources = builtin_sources();
    for (stem, text) in &sources {
        let first = parse(text).map_err(|d| format!("{stem}: {}", d[0]))?;
        let printed = first.pretty_print();
        let second = parse(&printed).map_err(|d| format!("{stem} reprint: {}", d[0]))?;
        ensure(first == second, || {
            format!("{stem} does not round-trip:\n{printed}")
        })?;
    }
    let fixtures = [
        (
            "undefined name",
            "l1 = line(p1(), p2())\nl2 = line(p1, p9)\n",
            DiagnosticKind::UndefinedName,
        ),
        (
            "duplicate",
            "l1 = line(p1(), p2())\nl1 = line(p2, p1)\n",
            DiagnosticKind::DuplicateDefinition,
        ),
        ("arity", "l1 = line(p1())\n", DiagnosticKind::Arity),
    ];
    for (what, src, kind) in fixtures {
        let diags = parse(src)
            .err()
            .ok_or_else(|| format!("{what} fixture parsed"))?;
        ensure(diags.iter().any(|d| d.kind == kind), || {
            format!("{what}: got {diags:?}")
        })?;
    }
    Ok(format!(
        "{} programs round-trip; undefined-name, duplicate and arity fixtures rejected",
        sources.len()
    ))
}
