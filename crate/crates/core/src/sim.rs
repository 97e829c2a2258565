//! First-order shelf dynamics and the closed observe / decide / push loop.
//!
//! Pushes are pure lateral translations of rigid extruded polygons without
//! friction. The pushed object sweeps along `±x`; any non-target object it
//! meets joins the moving set and travels with it for the rest of the push.
//! The push ends when the requested distance is used up, when any moving
//! object reaches a side wall, or when a moving object touches the target.
//! Contacts are resolved by exact sweep distances, not by time stepping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{contact_interval, penetration_depth, polygons_intersect, Direction};
use crate::occupancy::{
    collapse_profile, entropy, placement_consistent, update_belief, BeliefState, GridSpec, OccupancyOracle,
};
use crate::policy::{rank_actions, PolicyConfig, PolicyContext, PolicyError};
use crate::render::{
    entry_depth, footprint_columns, render_depth, segment_labels, DepthImage, PixelMask, RenderError, Segment,
    DEFAULT_DISCONTINUITY_THRESHOLD, DEFAULT_IMAGE_SIZE,
};
use crate::scene::{validate_scene, Scene, ViolationKind, PENETRATION_TOLERANCE};
use crate::{Footprint, Point2};

/// Contacts whose interval ends within this distance are treated as
/// already released (the obstacle trails the moving body).
const CONTACT_EPS: f64 = 1e-12;

/// `a(t) = (D, d, (x, z))`, plus the observed segment that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushAction {
    pub direction: Direction,
    pub distance: f64,
    /// `x` is the lateral insertion position, `z` the blade insertion depth.
    pub start: Point2,
    pub segment_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    Wall,
    TargetContact,
    DistanceExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushOutcome {
    pub pushed_id: u32,
    /// `(object id, signed x displacement)` in the order objects joined.
    pub moved: Vec<(u32, f64)>,
    pub halted_by: HaltReason,
    pub realized_distance: f64,
}

/// What happens when a moving object reaches the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetContactPolicy {
    /// Stop the push; the target never moves.
    #[default]
    Halt,
    /// Let the target join the chain like any other object.
    PushThrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub blade_thickness: f64,
    pub target_contact: TargetContactPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { blade_thickness: 0.01, target_contact: TargetContactPolicy::Halt }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("push distance must be finite and non-negative, got {0}")]
    InvalidDistance(f64),
    #[error("push start ({0}, {1}) lies outside the shelf")]
    StartOutsideShelf(f64, f64),
    #[error("no object at insertion position x = {0}")]
    NoObject(f64),
    #[error("the blade cannot be inserted beside object {0}")]
    BladeInfeasible(u32),
    #[error("scene has no target object")]
    MissingTarget,
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

fn start_inside(scene: &Scene, start: Point2) -> bool {
    let s = &scene.shelf;
    (0.0..=s.width).contains(&start.x) && (0.0..=s.depth).contains(&start.z)
}

/// Index of the nearest object whose footprint crosses the line `x`, which
/// is the object owning the floor pixel at that position.
pub fn object_at(scene: &Scene, x: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, o) in scene.objects.iter().enumerate() {
        if let Some(z) = entry_depth(&o.posed(), x) {
            if best.is_none_or(|(_, bz)| z < bz) {
                best = Some((k, z));
            }
        }
    }
    best.map(|(k, _)| k)
}

/// Blade footprint flush against the side of `fp` opposite `direction`,
/// spanning depths `[0, depth]`.
pub fn blade_footprint(fp: &Footprint, direction: Direction, thickness: f64, depth: f64) -> Option<Footprint> {
    let b = fp.bounds();
    let (x0, x1) = match direction {
        Direction::Right => (b.min_x - thickness, b.min_x),
        Direction::Left => (b.max_x, b.max_x + thickness),
    };
    Footprint::new(vec![
        Point2::new(x0, 0.0),
        Point2::new(x1, 0.0),
        Point2::new(x1, depth),
        Point2::new(x0, depth),
    ])
    .ok()
}

/// Whether the blade fits beside the object at `action.start` without
/// touching a wall or penetrating any other object.
pub fn blade_feasible(scene: &Scene, action: &PushAction, blade_thickness: f64) -> bool {
    blade_check(scene, action, blade_thickness).is_ok()
}

fn blade_check(scene: &Scene, action: &PushAction, blade_thickness: f64) -> Result<usize, SimError> {
    if !start_inside(scene, action.start) {
        return Err(SimError::StartOutsideShelf(action.start.x, action.start.z));
    }
    let k = object_at(scene, action.start.x).ok_or(SimError::NoObject(action.start.x))?;
    let obj = &scene.objects[k];
    if obj.is_target {
        return Err(SimError::BladeInfeasible(obj.id));
    }
    let blade = blade_footprint(&obj.posed(), action.direction, blade_thickness, action.start.z)
        .ok_or(SimError::BladeInfeasible(obj.id))?;
    let bb = blade.bounds();
    if bb.min_x < -CONTACT_EPS || bb.max_x > scene.shelf.width + CONTACT_EPS {
        return Err(SimError::BladeInfeasible(obj.id));
    }
    let blocked = scene.objects.iter().enumerate().any(|(j, o)| {
        if j == k {
            return false;
        }
        let fp = o.posed();
        fp.bounds().overlaps(&bb) && polygons_intersect(&blade, &fp) && penetration_depth(&blade, &fp) > PENETRATION_TOLERANCE
    });
    if blocked {
        return Err(SimError::BladeInfeasible(obj.id));
    }
    Ok(k)
}

/// Applies `action` to a copy of `scene`.
pub fn execute_push(scene: &Scene, action: &PushAction, cfg: &SimConfig) -> Result<(Scene, PushOutcome), SimError> {
    if !(action.distance >= 0.0) || !action.distance.is_finite() {
        return Err(SimError::InvalidDistance(action.distance));
    }
    let pushed = blade_check(scene, action, cfg.blade_thickness)?;
    let width = scene.shelf.width;
    let dir = action.direction;
    let sign: f64 = dir.sign();
    let mut fps: Vec<Footprint> = scene.objects.iter().map(|o| o.posed()).collect();
    let stops_at = |k: usize| scene.objects[k].is_target && cfg.target_contact == TargetContactPolicy::Halt;

    let mut moving = vec![pushed];
    let mut joined_at = vec![0.0];
    let mut is_moving = vec![false; fps.len()];
    is_moving[pushed] = true;
    let mut travel = 0.0;

    let halted_by = loop {
        let remaining = action.distance - travel;
        if remaining <= 0.0 {
            break HaltReason::DistanceExhausted;
        }
        let wall = moving
            .iter()
            .map(|&m| {
                let b = fps[m].bounds();
                let gap = match dir {
                    Direction::Right => width - b.max_x,
                    Direction::Left => b.min_x,
                };
                gap.max(0.0)
            })
            .fold(f64::INFINITY, f64::min);

        let mut halt_contact = f64::INFINITY;
        let mut contacts: Vec<(usize, f64)> = Vec::new();
        for o in 0..fps.len() {
            if is_moving[o] {
                continue;
            }
            let mut first = f64::INFINITY;
            for &m in &moving {
                if let Some((lo, hi)) = contact_interval(&fps[m], &fps[o], dir) {
                    if hi > CONTACT_EPS {
                        first = first.min(lo.max(0.0));
                    }
                }
            }
            if !first.is_finite() {
                continue;
            }
            if stops_at(o) {
                halt_contact = halt_contact.min(first);
            } else {
                contacts.push((o, first));
            }
        }
        let join = contacts.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let step = remaining.min(wall).min(halt_contact).min(join);

        for &m in &moving {
            fps[m] = fps[m].translated_x(sign * step);
        }
        travel += step;

        if halt_contact <= step {
            break HaltReason::TargetContact;
        }
        if wall <= step {
            break HaltReason::Wall;
        }
        if join <= step {
            for (o, t) in contacts {
                if t <= step + CONTACT_EPS {
                    is_moving[o] = true;
                    moving.push(o);
                    joined_at.push(travel);
                }
            }
            continue;
        }
        break HaltReason::DistanceExhausted;
    };

    let mut next = scene.clone();
    let moved: Vec<(u32, f64)> = moving
        .iter()
        .zip(&joined_at)
        .map(|(&k, &t0)| {
            let d = sign * (travel - t0);
            next.objects[k].pose.translation.x += d;
            (scene.objects[k].id, d)
        })
        .collect();
    let outcome = PushOutcome {
        pushed_id: scene.objects[pushed].id,
        moved,
        halted_by,
        realized_distance: travel,
    };
    Ok((next, outcome))
}

/// Observed free distance from the segment's leading edge to the nearest
/// blocking segment or the image border, in whole pixel columns.
pub fn plan_distance(obs: &DepthImage, segments: &[Segment], segment_id: u32, direction: Direction) -> f64 {
    let Some(seg) = segments.iter().find(|s| s.id == segment_id) else {
        return 0.0;
    };
    let blocked = blocked_columns(obs, segments, seg);
    free_columns(&blocked, seg.column_span, direction) as f64 * obs.pixel_pitch_x
}

/// Columns holding a segment the pushed one would run into: one whose
/// observed depth range starts no deeper than the pushed object's estimated
/// centre and ends no shallower than its front.
pub(crate) fn blocked_columns(obs: &DepthImage, segments: &[Segment], seg: &Segment) -> Vec<bool> {
    let w = obs.width_px;
    let reach = seg.centre_depth(obs.pixel_pitch_x);
    let mut blocked = vec![false; w];
    for other in segments {
        if other.id == seg.id || other.front_depth > reach || other.far_depth < seg.front_depth {
            continue;
        }
        for &p in &other.pixels {
            blocked[p as usize % w] = true;
        }
    }
    blocked
}

pub(crate) fn free_columns(blocked: &[bool], span: (usize, usize), direction: Direction) -> usize {
    match direction {
        Direction::Right => blocked[span.1 + 1..].iter().take_while(|b| !**b).count(),
        Direction::Left => blocked[..span.0].iter().rev().take_while(|b| !**b).count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Revealed,
    StepBudget,
    NoFeasibleAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RolloutConfig {
    pub max_steps: usize,
    pub reveal_threshold: f64,
    pub image_width_px: usize,
    pub image_height_px: usize,
    pub discontinuity_threshold: f64,
    pub grid: GridSpec,
    pub sim: SimConfig,
    /// Prefer any feasible push over one that sends the last pushed object
    /// straight back.
    pub avoid_reversal: bool,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            max_steps: 10,
            reveal_threshold: 0.9,
            image_width_px: DEFAULT_IMAGE_SIZE,
            image_height_px: DEFAULT_IMAGE_SIZE,
            discontinuity_threshold: DEFAULT_DISCONTINUITY_THRESHOLD,
            grid: GridSpec::default(),
            sim: SimConfig::default(),
            avoid_reversal: true,
        }
    }
}

/// Physical invariants checked after every executed push.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub interpenetration: usize,
    pub containment: usize,
    pub target_motion: usize,
}

impl ViolationCounts {
    pub fn add(&mut self, o: &Self) {
        self.interpenetration += o.interpenetration;
        self.containment += o.containment;
        self.target_motion += o.target_motion;
    }

    pub fn total(&self) -> usize {
        self.interpenetration + self.containment + self.target_motion
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub observation_digest: String,
    pub visible_fraction: f64,
    /// Entropy of the belief after this step's observation.
    pub entropy_before: f64,
    /// Entropy of the belief after the next observation, if there was one.
    pub entropy_after: Option<f64>,
    pub consistent_placements: usize,
    pub zero_consistency: bool,
    pub true_placement_consistent: bool,
    /// Belief mass on the columns the target actually occupies.
    pub true_column_mass: f64,
    pub action: Option<PushAction>,
    pub outcome: Option<PushOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutRecord {
    pub success: bool,
    pub steps_taken: usize,
    pub termination_reason: TerminationReason,
    pub scene_digest: String,
    pub steps: Vec<StepRecord>,
    pub violations: ViolationCounts,
}

/// Per-step view handed to rollout observers (image dumps, debugging).
pub struct StepView<'a> {
    pub step: usize,
    pub scene: &'a Scene,
    pub observation: &'a DepthImage,
    pub visible: &'a PixelMask,
    pub belief: Option<&'a BeliefState<f64>>,
}

pub fn rollout(scene: &Scene, policy: &PolicyConfig, cfg: &RolloutConfig) -> Result<RolloutRecord, SimError> {
    rollout_observed(scene, policy, cfg, |_| {})
}

/// [`rollout`] with a callback invoked once per observation.
pub fn rollout_observed(
    scene: &Scene,
    policy: &PolicyConfig,
    cfg: &RolloutConfig,
    mut observe: impl FnMut(&StepView<'_>),
) -> Result<RolloutRecord, SimError> {
    let target = scene.target().ok_or(SimError::MissingTarget)?.clone();
    let (w, h) = (cfg.image_width_px, cfg.image_height_px);
    let oracle = OccupancyOracle::new(scene.shelf, &target, cfg.grid, w, h);
    let alone = render_depth(&scene.target_only(), w, h)?.mask(target.id).count();
    if alone == 0 {
        return Err(RenderError::DegenerateTarget.into());
    }
    let true_columns: Vec<usize> = footprint_columns(&target.posed(), w, scene.shelf.width / w as f64)
        .into_iter()
        .map(|(c, _)| c)
        .collect();

    let mut current = scene.clone();
    let mut belief: Option<BeliefState<f64>> = None;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut violations = ViolationCounts::default();
    // (object, direction) pushes that moved nothing; skipped until that
    // object moves.
    let mut stalled: Vec<(u32, Direction)> = Vec::new();
    let mut last_push: Option<(u32, Direction)> = None;

    for step in 0..=cfg.max_steps {
        let rendering = render_depth(&current, w, h)?;
        let visible = rendering.mask(target.id);
        let obs = rendering.depth;
        let fraction = visible.count() as f64 / alone as f64;

        let oracle_out = oracle.evaluate(&obs, &visible);
        if !oracle_out.zero_consistency {
            let grid = oracle_out.grid();
            belief = Some(match belief.take() {
                None => BeliefState::initial(grid),
                Some(b) => update_belief(&b, &grid).expect("oracle grids share the image shape"),
            });
        }
        let profile = belief.as_ref().map(collapse_profile);
        let h_now = profile.as_ref().map_or(0.0, |p| entropy(p).map(|e| e.value).unwrap_or(0.0));
        if let Some(prev) = steps.last_mut() {
            prev.entropy_after = Some(h_now);
        }
        observe(&StepView { step, scene: &current, observation: &obs, visible: &visible, belief: belief.as_ref() });

        let mut record = StepRecord {
            step,
            observation_digest: obs.digest(),
            visible_fraction: fraction,
            entropy_before: h_now,
            entropy_after: None,
            consistent_placements: oracle_out.consistent_placements,
            zero_consistency: oracle_out.zero_consistency,
            true_placement_consistent: placement_consistent(&target.pose, &target, &scene.shelf, &obs, &visible),
            true_column_mass: profile
                .as_ref()
                .map_or(0.0, |p| true_columns.iter().map(|&c| p.values[c]).sum()),
            action: None,
            outcome: None,
        };

        let reason = if fraction >= cfg.reveal_threshold {
            Some(TerminationReason::Revealed)
        } else if step == cfg.max_steps {
            Some(TerminationReason::StepBudget)
        } else {
            None
        };
        if let Some(reason) = reason {
            steps.push(record);
            return Ok(finish(scene, reason, step, steps, violations));
        }

        let segmentation = segment_labels(&obs, cfg.discontinuity_threshold);
        let ctx = PolicyContext {
            observation: &obs,
            segments: &segmentation.segments,
            visible: &visible,
            belief: profile.as_ref().filter(|p| !oracle_out.zero_consistency && !p.is_zero()),
            oracle: &oracle,
            blade_thickness: cfg.sim.blade_thickness,
            discontinuity_threshold: cfg.discontinuity_threshold,
        };
        let ranked = rank_actions(policy, &ctx)?;
        let pushed_of = |a: &PushAction| object_at(&current, a.start.x).map(|k| current.objects[k].id);
        let reverses = |a: &PushAction| {
            cfg.avoid_reversal && last_push.is_some_and(|(id, d)| d != a.direction && pushed_of(a) == Some(id))
        };
        let feasible: Vec<_> = ranked
            .into_iter()
            .filter(|r| {
                let a = &r.candidate.action;
                let stall = pushed_of(a).is_some_and(|id| stalled.contains(&(id, a.direction)));
                !stall && blade_feasible(&current, a, cfg.sim.blade_thickness)
            })
            .collect();
        let chosen = feasible
            .iter()
            .find(|r| !reverses(&r.candidate.action))
            .or(feasible.first())
            .cloned();
        let Some(chosen) = chosen else {
            steps.push(record);
            return Ok(finish(scene, TerminationReason::NoFeasibleAction, step, steps, violations));
        };
        let action = chosen.candidate.action;
        let (next, outcome) = execute_push(&current, &action, &cfg.sim)?;
        violations.add(&check_invariants(&next, &target, cfg.sim.blade_thickness));
        if outcome.realized_distance > 0.0 {
            stalled.retain(|(id, _)| outcome.moved.iter().all(|&(m, d)| m != *id || d == 0.0));
            last_push = Some((outcome.pushed_id, action.direction));
        } else {
            stalled.push((outcome.pushed_id, action.direction));
        }
        record.action = Some(action);
        record.outcome = Some(outcome);
        steps.push(record);
        current = next;
    }
    unreachable!("the loop returns at the step budget")
}

fn finish(
    scene: &Scene,
    reason: TerminationReason,
    steps_taken: usize,
    steps: Vec<StepRecord>,
    violations: ViolationCounts,
) -> RolloutRecord {
    RolloutRecord {
        success: reason == TerminationReason::Revealed,
        steps_taken,
        termination_reason: reason,
        scene_digest: scene.digest(),
        steps,
        violations,
    }
}

fn check_invariants(scene: &Scene, target: &crate::ObjectSpec, blade: f64) -> ViolationCounts {
    let mut v = ViolationCounts::default();
    for problem in validate_scene(scene, blade) {
        match problem.kind {
            ViolationKind::Intersect => v.interpenetration += 1,
            ViolationKind::OutsideShelf => v.containment += 1,
            _ => {}
        }
    }
    match scene.target() {
        Some(t) if t.pose == target.pose && t.footprint == target.footprint => {}
        _ => v.target_motion += 1,
    }
    v
}
