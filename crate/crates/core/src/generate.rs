//! Seeded random scene generation by rejection sampling.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, which is specified bit-for-bit and therefore identical
//! on every platform.
//!
//! Occluders are placed first. The target is then drawn uniformly from the
//! oracle's placement grid, restricted to poses that collide with nothing,
//! keep wall clearance and, when requested, are completely hidden. Putting
//! the target on the grid means the oracle's hypothesis space contains the
//! true pose.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{polygons_intersect, regular_polygon};
use crate::occupancy::{GridSpec, OccupancyOracle};
use crate::render::{render_depth, visible_fraction, DEFAULT_IMAGE_SIZE};
use crate::scene::{ObjectKind, ObjectSpec, Scene, ShelfSpec};
use crate::{Footprint, Pose2};

pub const CYLINDER_SIDES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub seed: u64,
    pub n_occluders: usize,
    pub cuboid_side_range: [f64; 2],
    pub cuboid_height: f64,
    pub cylinder_radius_range: [f64; 2],
    pub cylinder_height_range: [f64; 2],
    pub target_side: f64,
    pub blade_thickness: f64,
    pub require_full_occlusion: bool,
    /// Placement attempts allowed per scene before giving up.
    pub max_attempts: usize,
    /// Grid the target pose is drawn from.
    pub target_grid: GridSpec,
    /// Resolution at which full occlusion is judged.
    pub image_width_px: usize,
    pub image_height_px: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_occluders: 4,
            cuboid_side_range: [0.02, 0.10],
            cuboid_height: 0.10,
            cylinder_radius_range: [0.02, 0.05],
            cylinder_height_range: [0.10, 0.20],
            target_side: 0.07,
            blade_thickness: 0.01,
            require_full_occlusion: true,
            max_attempts: 10_000,
            target_grid: GridSpec::default(),
            image_width_px: DEFAULT_IMAGE_SIZE,
            image_height_px: DEFAULT_IMAGE_SIZE,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("scene generation failed after {attempts} attempts: could not satisfy {constraint}")]
    RetryCapExceeded { attempts: usize, constraint: &'static str },
}

/// Occluder shape drawn before placement.
#[derive(Debug, Clone, PartialEq)]
pub struct OccluderShape {
    pub kind: ObjectKind,
    /// Cuboid side or cylinder radius.
    pub size: f64,
    pub height: f64,
    pub footprint: Footprint,
}

/// Draws an occluder class (50/50) and its dimensions.
pub fn sample_occluder_shape<R: Rng>(rng: &mut R, cfg: &GenerationConfig) -> OccluderShape {
    if rng.gen_bool(0.5) {
        let side = rng.gen_range(cfg.cuboid_side_range[0]..=cfg.cuboid_side_range[1]);
        OccluderShape {
            kind: ObjectKind::Cuboid,
            size: side,
            height: cfg.cuboid_height,
            footprint: Footprint::rectangle(side, side).expect("positive side"),
        }
    } else {
        let radius = rng.gen_range(cfg.cylinder_radius_range[0]..=cfg.cylinder_radius_range[1]);
        let height = rng.gen_range(cfg.cylinder_height_range[0]..=cfg.cylinder_height_range[1]);
        OccluderShape {
            kind: ObjectKind::Cylinder,
            size: radius,
            height,
            footprint: regular_polygon(radius, CYLINDER_SIDES).expect("positive radius"),
        }
    }
}

pub fn target_spec(cfg: &GenerationConfig, id: u32) -> ObjectSpec {
    ObjectSpec {
        id,
        kind: ObjectKind::Target,
        footprint: Footprint::rectangle(cfg.target_side, cfg.target_side).expect("positive target side"),
        height: cfg.target_side,
        pose: Pose2::identity(),
        is_target: true,
    }
}

fn check_config(cfg: &GenerationConfig, shelf: &ShelfSpec) -> Result<(), GenerationError> {
    let range_ok = |r: [f64; 2]| r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite();
    if !shelf.is_valid() {
        return Err(GenerationError::InvalidConfig(format!("bad shelf {shelf:?}")));
    }
    if !range_ok(cfg.cuboid_side_range) || !range_ok(cfg.cylinder_radius_range) || !range_ok(cfg.cylinder_height_range) {
        return Err(GenerationError::InvalidConfig("size ranges must be positive and non-empty".into()));
    }
    if !(cfg.cuboid_height > 0.0) || !(cfg.target_side > 0.0) || !(cfg.blade_thickness >= 0.0) {
        return Err(GenerationError::InvalidConfig("heights and target side must be positive".into()));
    }
    if cfg.image_width_px == 0 || cfg.image_height_px == 0 {
        return Err(GenerationError::InvalidConfig("image size must be non-zero".into()));
    }
    Ok(())
}

fn fits(fp: &Footprint, shelf: &ShelfSpec, blade: f64) -> bool {
    let b = fp.bounds();
    b.min_x >= blade && b.max_x <= shelf.width - blade && b.min_z >= 0.0 && b.max_z <= shelf.depth
}

pub fn generate_scene(cfg: &GenerationConfig, shelf: &ShelfSpec) -> Result<Scene, GenerationError> {
    check_config(cfg, shelf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target_id = cfg.n_occluders as u32;
    let target = target_spec(cfg, target_id);
    let oracle = OccupancyOracle::new(*shelf, &target, cfg.target_grid, cfg.image_width_px, cfg.image_height_px);
    let mut attempts = 0usize;

    'scene: loop {
        let mut objects: Vec<ObjectSpec> = Vec::with_capacity(cfg.n_occluders + 1);
        let mut posed: Vec<Footprint> = Vec::with_capacity(cfg.n_occluders);
        while objects.len() < cfg.n_occluders {
            attempts += 1;
            if attempts > cfg.max_attempts {
                return Err(GenerationError::RetryCapExceeded {
                    attempts: cfg.max_attempts,
                    constraint: "occluder placement without collision and with wall clearance",
                });
            }
            let shape = sample_occluder_shape(&mut rng, cfg);
            let pose = Pose2::new(
                rng.gen_range(0.0..shelf.width),
                rng.gen_range(0.0..shelf.depth),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let fp = crate::geometry::transform_footprint(&shape.footprint, &pose);
            if !fits(&fp, shelf, cfg.blade_thickness) || posed.iter().any(|o| polygons_intersect(o, &fp)) {
                continue;
            }
            objects.push(ObjectSpec {
                id: objects.len() as u32,
                kind: shape.kind,
                footprint: shape.footprint,
                height: shape.height,
                pose,
                is_target: false,
            });
            posed.push(fp);
        }

        let free = |t: &Footprint| fits(t, shelf, cfg.blade_thickness) && !posed.iter().any(|o| polygons_intersect(o, t));
        let mut candidates: Vec<usize> = if cfg.require_full_occlusion {
            let occluders = Scene { shelf: *shelf, objects: objects.clone(), target_id };
            let obs = render_depth(&occluders, cfg.image_width_px, cfg.image_height_px)
                .expect("non-zero image size")
                .depth;
            oracle.hidden_placements(&obs)
        } else {
            (0..oracle.templates().len()).collect()
        };
        candidates.retain(|&idx| free(&oracle.templates()[idx].footprint));

        while !candidates.is_empty() {
            attempts += 1;
            if attempts > cfg.max_attempts {
                break;
            }
            let pick = rng.gen_range(0..candidates.len());
            let idx = candidates.swap_remove(pick);
            let mut t = target.clone();
            t.pose = oracle.templates()[idx].pose;
            let mut scene_objects = objects.clone();
            scene_objects.push(t);
            let scene = Scene { shelf: *shelf, objects: scene_objects, target_id };
            if cfg.require_full_occlusion {
                match visible_fraction(&scene, cfg.image_width_px, cfg.image_height_px) {
                    Ok(f) if f == 0.0 => {}
                    _ => continue,
                }
            }
            return Ok(scene);
        }
        // no usable target pose for this occluder set: resample everything
        attempts += 1;
        if attempts > cfg.max_attempts {
            return Err(GenerationError::RetryCapExceeded {
                attempts: cfg.max_attempts,
                constraint: if cfg.require_full_occlusion {
                    "fully occluded collision-free target placement"
                } else {
                    "collision-free target placement"
                },
            });
        }
        continue 'scene;
    }
}
