//! World model: the shelf, posed extruded-polygon objects, and the target.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{penetration_depth, transform_footprint, Point2 as GPoint};
use crate::{Footprint, Pose2};

/// Overlap deeper than this counts as interpenetration. Objects stacked up
/// by a chained push end exactly in contact, which is legal.
pub const PENETRATION_TOLERANCE: f64 = 1e-9;
const BOUNDS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShelfSpec {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
}

impl Default for ShelfSpec {
    fn default() -> Self {
        Self { width: 0.60, depth: 0.40, height: 0.25 }
    }
}

impl ShelfSpec {
    /// Depth value rendered where no object is hit.
    pub fn back_depth(&self) -> f64 {
        self.depth
    }

    pub fn is_valid(&self) -> bool {
        [self.width, self.depth, self.height].iter().all(|v| v.is_finite() && *v > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Cuboid,
    Cylinder,
    Target,
    Polygon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub id: u32,
    pub kind: ObjectKind,
    /// Footprint in the object-local frame.
    pub footprint: Footprint,
    pub height: f64,
    pub pose: Pose2,
    pub is_target: bool,
}

impl ObjectSpec {
    /// Footprint in the shelf frame.
    pub fn posed(&self) -> Footprint {
        transform_footprint(&self.footprint, &self.pose)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub shelf: ShelfSpec,
    pub objects: Vec<ObjectSpec>,
    pub target_id: u32,
}

impl Scene {
    pub fn target(&self) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.id == self.target_id && o.is_target)
    }

    pub fn object(&self, id: u32) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_mut(&mut self, id: u32) -> Option<&mut ObjectSpec> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    /// Copy with every object except the target removed.
    pub fn target_only(&self) -> Scene {
        Scene {
            shelf: self.shelf,
            objects: self.objects.iter().filter(|o| o.is_target).cloned().collect(),
            target_id: self.target_id,
        }
    }

    /// Stable content digest (hex SHA-256 of the serialized document).
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(save_scene(self).as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    TargetCount,
    TargetIdMismatch,
    DuplicateId,
    InvalidShelf,
    NonPositiveHeight,
    OutsideShelf,
    WallClearance,
    Intersect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub object_ids: Vec<u32>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn violation(kind: ViolationKind, object_ids: Vec<u32>, message: String) -> Violation {
    Violation { kind, object_ids, message }
}

/// Checks every scene invariant; returns one entry per problem found.
pub fn validate_scene(scene: &Scene, blade_thickness: f64) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();
    let shelf = &scene.shelf;
    if !shelf.is_valid() {
        out.push(violation(InvalidShelf, vec![], format!("shelf dimensions must be positive: {shelf:?}")));
    }

    let targets: Vec<u32> = scene.objects.iter().filter(|o| o.is_target).map(|o| o.id).collect();
    if targets.len() != 1 {
        out.push(violation(
            TargetCount,
            targets.clone(),
            format!("expected exactly one target, found {}", targets.len()),
        ));
    }
    if !targets.contains(&scene.target_id) {
        out.push(violation(
            TargetIdMismatch,
            vec![scene.target_id],
            format!("target_id {} does not name a target object", scene.target_id),
        ));
    }

    let mut ids: Vec<u32> = scene.objects.iter().map(|o| o.id).collect();
    ids.sort_unstable();
    for w in ids.windows(2) {
        if w[0] == w[1] {
            out.push(violation(DuplicateId, vec![w[0]], format!("object id {} used more than once", w[0])));
        }
    }

    let posed: Vec<Footprint> = scene.objects.iter().map(ObjectSpec::posed).collect();
    for (obj, fp) in scene.objects.iter().zip(&posed) {
        if !(obj.height > 0.0) {
            out.push(violation(
                NonPositiveHeight,
                vec![obj.id],
                format!("object {} has non-positive height {}", obj.id, obj.height),
            ));
        }
        let b = fp.bounds();
        if b.min_x < -BOUNDS_TOLERANCE
            || b.max_x > shelf.width + BOUNDS_TOLERANCE
            || b.min_z < -BOUNDS_TOLERANCE
            || b.max_z > shelf.depth + BOUNDS_TOLERANCE
        {
            out.push(violation(
                OutsideShelf,
                vec![obj.id],
                format!("object {} leaves the shelf rectangle", obj.id),
            ));
        } else if b.min_x < blade_thickness - BOUNDS_TOLERANCE
            || b.max_x > shelf.width - blade_thickness + BOUNDS_TOLERANCE
        {
            out.push(violation(
                WallClearance,
                vec![obj.id],
                format!("object {} is closer than {blade_thickness} m to a side wall", obj.id),
            ));
        }
    }

    for i in 0..posed.len() {
        for j in i + 1..posed.len() {
            if posed[i].bounds().overlaps(&posed[j].bounds())
                && penetration_depth(&posed[i], &posed[j]) > PENETRATION_TOLERANCE
            {
                let (a, b) = (scene.objects[i].id, scene.objects[j].id);
                out.push(violation(Intersect, vec![a, b], format!("objects intersect: {a} and {b}")));
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene document parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported scene format {0}, expected 1")]
    Format(u32),
    #[error("invalid footprint for object {id}: {source}")]
    Footprint { id: u32, source: crate::GeometryError },
    #[error("scene failed validation: {}", .0.iter().map(|v| v.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

pub const SCENE_FORMAT: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    format: u32,
    shelf: ShelfSpec,
    target_id: u32,
    objects: Vec<ObjectDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: u32,
    kind: ObjectKind,
    vertices: Vec<[f64; 2]>,
    height: f64,
    pose: PoseDoc,
    is_target: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseDoc {
    x: f64,
    z: f64,
    theta: f64,
}

impl From<&Scene> for SceneDoc {
    fn from(s: &Scene) -> Self {
        SceneDoc {
            format: SCENE_FORMAT,
            shelf: s.shelf,
            target_id: s.target_id,
            objects: s
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    id: o.id,
                    kind: o.kind,
                    vertices: o.footprint.vertices().iter().map(|v| [v.x, v.z]).collect(),
                    height: o.height,
                    pose: PoseDoc {
                        x: o.pose.translation.x,
                        z: o.pose.translation.z,
                        theta: o.pose.rotation,
                    },
                    is_target: o.is_target,
                })
                .collect(),
        }
    }
}

/// Serializes to the versioned JSON scene document.
pub fn save_scene(scene: &Scene) -> String {
    serde_json::to_string_pretty(&SceneDoc::from(scene)).expect("scene serializes")
}

/// Parses a scene document. Structural problems (target count, ids, shelf)
/// are rejected; placement quality (clearance, contact) is left to
/// [`validate_scene`].
pub fn load_scene(text: &str) -> Result<Scene, SceneError> {
    let doc: SceneDoc = serde_json::from_str(text).map_err(|e| SceneError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.format != SCENE_FORMAT {
        return Err(SceneError::Format(doc.format));
    }
    let mut objects = Vec::with_capacity(doc.objects.len());
    for o in doc.objects {
        let footprint = Footprint::new(o.vertices.iter().map(|v| GPoint::new(v[0], v[1])).collect())
            .map_err(|source| SceneError::Footprint { id: o.id, source })?;
        objects.push(ObjectSpec {
            id: o.id,
            kind: o.kind,
            footprint,
            height: o.height,
            pose: Pose2 { translation: GPoint::new(o.pose.x, o.pose.z), rotation: o.pose.theta },
            is_target: o.is_target,
        });
    }
    let scene = Scene { shelf: doc.shelf, objects, target_id: doc.target_id };
    let structural: Vec<Violation> = validate_scene(&scene, 0.0)
        .into_iter()
        .filter(|v| {
            matches!(
                v.kind,
                ViolationKind::TargetCount
                    | ViolationKind::TargetIdMismatch
                    | ViolationKind::DuplicateId
                    | ViolationKind::InvalidShelf
                    | ViolationKind::NonPositiveHeight
            )
        })
        .collect();
    if structural.is_empty() {
        Ok(scene)
    } else {
        Err(SceneError::Invalid(structural))
    }
}
