//! Sequential sampling of concrete coordinates for a program.
//!
//! Statements are interpreted in order. A free point is drawn uniformly in the
//! margin-inset canvas, a point on one object is drawn uniformly along it, and
//! a point on two objects picks one of their intersection points at random.
//! Each point (together with the object it feeds) gets a bounded number of
//! retries; when those run out the whole scene starts over.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, ConceptProgram, ObjectDecl, ObjectKind, PointDecl, Statement};
use crate::geom::{intersect, CircleShape, Coord, Primitive, Segment, TOL_SCENE};

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("invalid realize config: {0}")]
    InvalidConfig(&'static str),
    #[error("concept `{program}` is unrealizable: no valid scene after {restarts} restarts")]
    Unrealizable { program: String, restarts: usize },
    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),
    #[error("realization record: {0}")]
    Record(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RealizeConfig {
    /// Inset from each canvas edge that realized points must respect.
    pub margin: f64,
    /// Distinct points closer than this are rejected (exact coincidences,
    /// within the scene tolerance, are allowed).
    pub min_separation: f64,
    /// Minimum segment length and circle radius.
    pub min_object_size: f64,
    pub max_attempts_per_point: usize,
    pub max_scene_restarts: usize,
    pub seed: u64,
}

impl Default for RealizeConfig {
    fn default() -> Self {
        Self {
            margin: 0.05,
            min_separation: 0.025,
            min_object_size: 0.1,
            max_attempts_per_point: 100,
            max_scene_restarts: 1000,
            seed: 0,
        }
    }
}

impl RealizeConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), RealizeError> {
        if !(self.margin >= 0.0 && self.margin < 0.5) {
            return Err(RealizeError::InvalidConfig("margin must be in [0, 0.5)"));
        }
        if !(self.min_separation > 0.0 && self.min_object_size > 0.0) {
            return Err(RealizeError::InvalidConfig("tolerances must be positive"));
        }
        if self.max_attempts_per_point == 0 || self.max_scene_restarts == 0 {
            return Err(RealizeError::InvalidConfig(
                "attempt budgets must be positive",
            ));
        }
        Ok(())
    }
}

/// Concrete coordinates for every point and the primitive for every object.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub program: ConceptProgram,
    pub seed: u64,
    pub points: IndexMap<String, Coord>,
    pub objects: IndexMap<String, Primitive>,
    /// Scene restarts spent before this realization was found.
    pub restarts: usize,
}

impl Realization {
    pub fn point(&self, name: &str) -> Option<Coord> {
        self.points.get(name).copied()
    }

    pub fn object(&self, name: &str) -> Option<&Primitive> {
        self.objects.get(name)
    }

    pub fn to_scene(&self) -> Scene {
        to_scene(self)
    }

    pub fn to_json(&self) -> String {
        let record = RealizationRecord {
            program_name: self.program.name.clone(),
            seed: self.seed,
            restarts: self.restarts,
            points: self
                .points
                .iter()
                .map(|(k, c)| (k.clone(), [c.x, c.y]))
                .collect(),
            objects: self
                .program
                .objects()
                .map(|o| {
                    let radius = match self.objects.get(&o.name) {
                        Some(Primitive::Circle(c)) => Some(c.radius),
                        _ => None,
                    };
                    let rec = ObjectRecord {
                        kind: o.kind,
                        begin: o.begin.clone(),
                        end: o.end.clone(),
                        visible: o.visible,
                        radius,
                    };
                    (o.name.clone(), rec)
                })
                .collect(),
            program: self.program.pretty_print(),
        };
        serde_json::to_string_pretty(&record).expect("realization record serializes")
    }

    /// Rebuilds a realization from [`Realization::to_json`] output. Object
    /// primitives are recomputed from the stored points.
    pub fn from_json(text: &str) -> Result<Self, RealizeError> {
        let record: RealizationRecord = serde_json::from_str(text)?;
        let program = dsl::parse(&record.program).map_err(|d| {
            RealizeError::Record(d.first().map(ToString::to_string).unwrap_or_default())
        })?;
        let points: IndexMap<String, Coord> = record
            .points
            .into_iter()
            .map(|(k, [x, y])| (k, Coord::new(x, y)))
            .collect();
        let mut objects = IndexMap::new();
        for o in program.objects() {
            let (a, b) = match (points.get(&o.begin), points.get(&o.end)) {
                (Some(a), Some(b)) => (*a, *b),
                _ => {
                    return Err(RealizeError::Record(format!(
                        "object `{}` lacks a point",
                        o.name
                    )))
                }
            };
            objects.insert(o.name.clone(), primitive_for(o.kind, a, b));
        }
        Ok(Self {
            program,
            seed: record.seed,
            points,
            objects,
            restarts: record.restarts,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RealizationRecord {
    program_name: String,
    seed: u64,
    #[serde(default)]
    restarts: usize,
    points: IndexMap<String, [f64; 2]>,
    objects: IndexMap<String, ObjectRecord>,
    program: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectRecord {
    kind: ObjectKind,
    begin: String,
    end: String,
    visible: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    radius: Option<f64>,
}

/// The drawing canvas, `[0, 1]²` in canvas units; y grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub min: Coord,
    pub max: Coord,
}

impl Default for Canvas {
    fn default() -> Self {
        Self {
            min: Coord::new(0.0, 0.0),
            max: Coord::new(1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePrimitive {
    pub name: String,
    pub kind: ObjectKind,
    pub primitive: Primitive,
}

/// Visible primitives in program order, ready to render.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scene {
    pub primitives: Vec<ScenePrimitive>,
    pub canvas: Canvas,
}

impl Scene {
    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn count(&self, kind: ObjectKind) -> usize {
        self.primitives.iter().filter(|p| p.kind == kind).count()
    }

    /// Axis-aligned bounds of all visible primitives.
    pub fn bounds(&self) -> Option<(Coord, Coord)> {
        self.primitives
            .iter()
            .map(|p| p.primitive.bounds())
            .reduce(|(lo, hi), (a, b)| {
                (
                    Coord::new(lo.x.min(a.x), lo.y.min(a.y)),
                    Coord::new(hi.x.max(b.x), hi.y.max(b.y)),
                )
            })
    }
}

pub fn to_scene(r: &Realization) -> Scene {
    let primitives = r
        .program
        .objects()
        .filter(|o| o.visible)
        .map(|o| ScenePrimitive {
            name: o.name.clone(),
            kind: o.kind,
            primitive: r.objects[&o.name],
        })
        .collect();
    Scene {
        primitives,
        canvas: Canvas::default(),
    }
}

fn primitive_for(kind: ObjectKind, begin: Coord, end: Coord) -> Primitive {
    match kind {
        ObjectKind::Line => Primitive::Segment(Segment::new(begin, end)),
        ObjectKind::Circle => Primitive::Circle(CircleShape::through(begin, end)),
    }
}

/// Realizes with a ChaCha stream seeded from `config.seed`.
pub fn realize_seeded(
    program: &ConceptProgram,
    config: &RealizeConfig,
) -> Result<Realization, RealizeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    realize(program, config, &mut rng)
}

/// Samples a realization satisfying every point constraint of `program`.
pub fn realize<R: Rng + ?Sized>(
    program: &ConceptProgram,
    config: &RealizeConfig,
    rng: &mut R,
) -> Result<Realization, RealizeError> {
    config.validate()?;
    let groups = groups(program);
    for restart in 0..config.max_scene_restarts {
        let mut scene = SceneState::default();
        if groups.iter().all(|g| scene.place_group(g, config, rng)) {
            return Ok(Realization {
                program: program.clone(),
                seed: config.seed,
                points: scene.points,
                objects: scene.objects,
                restarts: restart,
            });
        }
    }
    Err(RealizeError::Unrealizable {
        program: program.name.clone(),
        restarts: config.max_scene_restarts,
    })
}

/// Fresh points followed by the object statement that first uses them.
struct Group<'a> {
    points: Vec<&'a PointDecl>,
    object: Option<&'a ObjectDecl>,
}

fn groups(program: &ConceptProgram) -> Vec<Group<'_>> {
    let mut out = Vec::new();
    let mut points = Vec::new();
    for stmt in &program.statements {
        match stmt {
            Statement::Point(p) => points.push(p),
            Statement::Object(o) => out.push(Group {
                points: std::mem::take(&mut points),
                object: Some(o),
            }),
        }
    }
    if !points.is_empty() {
        out.push(Group {
            points,
            object: None,
        });
    }
    out
}

#[derive(Default)]
struct SceneState {
    points: IndexMap<String, Coord>,
    objects: IndexMap<String, Primitive>,
}

impl SceneState {
    fn place_group<R: Rng + ?Sized>(
        &mut self,
        group: &Group<'_>,
        cfg: &RealizeConfig,
        rng: &mut R,
    ) -> bool {
        for _ in 0..cfg.max_attempts_per_point {
            let mark = self.points.len();
            let placed = group.points.iter().all(|p| self.place_point(p, cfg, rng))
                && group.object.is_none_or(|o| self.place_object(o, cfg));
            if placed {
                return true;
            }
            self.points.truncate(mark);
            if group.points.is_empty() {
                break;
            }
        }
        false
    }

    fn place_point<R: Rng + ?Sized>(
        &mut self,
        p: &PointDecl,
        cfg: &RealizeConfig,
        rng: &mut R,
    ) -> bool {
        let found = match p.constraints.as_slice() {
            [] => {
                let (lo, hi) = (cfg.margin, 1.0 - cfg.margin);
                (0..cfg.max_attempts_per_point)
                    .map(|_| Coord::new(rng.gen_range(lo..=hi), rng.gen_range(lo..=hi)))
                    .find(|c| self.acceptable(*c, cfg))
            }
            [on] => {
                let obj = self.objects[on.as_str()];
                (0..cfg.max_attempts_per_point)
                    .map(|_| obj.sample_on(rng))
                    .find(|c| self.acceptable(*c, cfg))
            }
            [a, b] => {
                let Ok(hits) = intersect(&self.objects[a.as_str()], &self.objects[b.as_str()])
                else {
                    return false;
                };
                let mut candidates = hits.points().to_vec();
                candidates.shuffle(rng);
                // an intersection that is already a named point is taken only
                // when the objects meet nowhere else
                if candidates.iter().any(|c| !self.coincides(*c)) {
                    candidates.retain(|c| !self.coincides(*c));
                }
                candidates.into_iter().find(|c| self.acceptable(*c, cfg))
            }
            _ => unreachable!("validated programs have at most two constraints"),
        };
        match found {
            Some(c) => {
                self.points.insert(p.name.clone(), c);
                true
            }
            None => false,
        }
    }

    fn place_object(&mut self, o: &ObjectDecl, cfg: &RealizeConfig) -> bool {
        let primitive = primitive_for(
            o.kind,
            self.points[o.begin.as_str()],
            self.points[o.end.as_str()],
        );
        if primitive.size() < cfg.min_object_size {
            return false;
        }
        self.objects.insert(o.name.clone(), primitive);
        true
    }

    fn coincides(&self, c: Coord) -> bool {
        self.points.values().any(|q| q.distance(c) <= TOL_SCENE)
    }

    fn acceptable(&self, c: Coord, cfg: &RealizeConfig) -> bool {
        let (lo, hi) = (cfg.margin - TOL_SCENE, 1.0 - cfg.margin + TOL_SCENE);
        if !(lo..=hi).contains(&c.x) || !(lo..=hi).contains(&c.y) {
            return false;
        }
        self.points.values().all(|q| {
            let d = q.distance(c);
            d <= TOL_SCENE || d >= cfg.min_separation
        })
    }
}

/// Whether every constraint of `program` holds in `r`, within [`TOL_SCENE`].
///
/// `program` must share `r`'s skeleton, which holds for variants built by
/// removing constraints from a common target.
pub fn satisfies(program: &ConceptProgram, r: &Realization) -> Result<bool, RealizeError> {
    if !program.same_skeleton(&r.program) {
        return Err(RealizeError::SkeletonMismatch(format!(
            "`{}` and `{}` differ beyond their constraints",
            program.name, r.program.name
        )));
    }
    for p in program.points() {
        let at = r.points[p.name.as_str()];
        for c in &p.constraints {
            if r.objects[c.as_str()].distance_to(at) >= TOL_SCENE {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
