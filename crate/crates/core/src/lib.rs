//! Mechanical search for an occluded target on a laterally accessed shelf.
//!
//! The crate bundles a first-order shelf simulator (extruded convex
//! polygons, frictionless chained lateral pushes), an orthographic depth
//! renderer, an exact geometric oracle for the target's occupancy
//! distribution, the Uniform / DAR / DER-n push policies, and a seeded
//! benchmark harness.
//!
//! The geometric kernel and the occupancy containers are generic over
//! [`Real`]; the world model, renderer, simulator and policies run on the
//! `f64` aliases exported here.

pub mod bench;
pub mod generate;
pub mod geometry;
pub mod occupancy;
pub mod policy;
pub mod render;
pub mod scalar;
pub mod scene;
pub mod sim;

pub use geometry::{Direction, GeometryError};
pub use scalar::Real;

pub type Point2 = geometry::Point2<f64>;
pub type Pose2 = geometry::Pose2<f64>;
pub type Footprint = geometry::Footprint<f64>;
pub type Bounds = geometry::Bounds<f64>;
pub type OccupancyGrid = occupancy::OccupancyGrid<f64>;
pub type OccupancyProfile = occupancy::OccupancyProfile<f64>;
pub type BeliefState = occupancy::BeliefState<f64>;

pub use generate::{generate_scene, GenerationConfig, GenerationError};
pub use occupancy::{OccupancyOracle, PlacementGrid};
pub use policy::{PolicyConfig, PolicyKind};
pub use render::{DepthImage, PixelMask, Segment};
pub use scene::{load_scene, save_scene, validate_scene, ObjectSpec, Scene, ShelfSpec};
pub use sim::{execute_push, rollout, PushAction, PushOutcome, RolloutRecord};
