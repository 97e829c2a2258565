//! Push selection: candidate generation, the Uniform and DAR area scores,
//! and DER-n multi-step entropy lookahead over predicted observations.
//!
//! All policies rank candidates best first under a fixed tie-break. Scores
//! closer than [`SCORE_TIE_TOLERANCE`] tie; ties go to the leftmost pushed
//! segment, then to a leftward push.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Direction;
use crate::occupancy::{entropy, OccupancyError, OccupancyOracle};
use crate::render::{segment_labels, DepthImage, PixelMask, Segment};
use crate::sim::{blocked_columns, free_columns, PushAction};
use crate::{OccupancyProfile, Point2};

pub const SCORE_TIE_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_NODE_BUDGET: usize = 200_000;
pub const MAX_LOOKAHEAD: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("unknown policy {0:?}; expected uniform, dar, der1, der2 or der3")]
    UnknownPolicy(String),
    #[error("lookahead must be between 1 and {MAX_LOOKAHEAD}, got {0}")]
    InvalidLookahead(usize),
    #[error("lookahead search exceeded its node budget of {0}")]
    NodeBudgetExceeded(usize),
    #[error(transparent)]
    Occupancy(#[from] OccupancyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Uniform,
    Dar,
    Der,
}

/// The only ordering rule offered; kept as a type so configs name it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LeftmostThenLeftward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Search depth; only read for [`PolicyKind::Der`].
    pub lookahead_n: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Maximum predicted nodes one DER decision may expand.
    #[serde(default = "default_budget")]
    pub node_budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_NODE_BUDGET
}

impl PolicyConfig {
    pub fn uniform() -> Self {
        Self { kind: PolicyKind::Uniform, lookahead_n: 1, tie_break: TieBreak::default(), node_budget: DEFAULT_NODE_BUDGET }
    }

    pub fn dar() -> Self {
        Self { kind: PolicyKind::Dar, ..Self::uniform() }
    }

    pub fn der(n: usize) -> Result<Self, PolicyError> {
        let cfg = Self { kind: PolicyKind::Der, lookahead_n: n, ..Self::uniform() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_node_budget(mut self, budget: usize) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.kind == PolicyKind::Der && !(1..=MAX_LOOKAHEAD).contains(&self.lookahead_n) {
            return Err(PolicyError::InvalidLookahead(self.lookahead_n));
        }
        Ok(())
    }

    /// `"uniform"`, `"dar"` or `"der<n>"`.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PolicyKind::Uniform => f.write_str("uniform"),
            PolicyKind::Dar => f.write_str("dar"),
            PolicyKind::Der => write!(f, "der{}", self.lookahead_n),
        }
    }
}

impl FromStr for PolicyConfig {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::uniform()),
            "dar" => Ok(Self::dar()),
            other => match other.strip_prefix("der").map(str::parse::<usize>) {
                Some(Ok(n)) => Self::der(n),
                _ => Err(PolicyError::UnknownPolicy(s.to_string())),
            },
        }
    }
}

/// A push the planner considers, with its column-level effect on the view.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAction {
    pub action: PushAction,
    pub pushed_segment: Segment,
    /// Columns the segment leaves.
    pub newly_revealed_columns: Vec<usize>,
    /// Columns the segment moves onto.
    pub newly_covered_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub candidate: CandidateAction,
    /// DAR score (higher is better) or predicted entropy (lower is better).
    pub value: f64,
}

/// Everything a policy sees at one decision.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext<'a> {
    pub observation: &'a DepthImage,
    pub segments: &'a [Segment],
    pub visible: &'a PixelMask,
    /// Collapsed history-minimum belief; `None` makes every policy use the
    /// uniform profile for this decision.
    pub belief: Option<&'a OccupancyProfile>,
    pub oracle: &'a OccupancyOracle,
    pub blade_thickness: f64,
    pub discontinuity_threshold: f64,
}

/// Whole-column lateral shift of `seg` for a push of `distance`, clamped so
/// the segment stays inside the image.
fn column_shift(seg: &Segment, direction: Direction, distance: f64, pitch: f64, width_px: usize) -> usize {
    let k = (distance / pitch).round().max(0.0) as usize;
    let room = match direction {
        Direction::Right => width_px - 1 - seg.column_span.1,
        Direction::Left => seg.column_span.0,
    };
    k.min(room)
}

fn shifted_span(span: (usize, usize), direction: Direction, k: usize) -> (usize, usize) {
    match direction {
        Direction::Right => (span.0 + k, span.1 + k),
        Direction::Left => (span.0 - k, span.1 - k),
    }
}

fn column_effect(span: (usize, usize), to: (usize, usize)) -> (Vec<usize>, Vec<usize>) {
    let inside = |c: usize, s: (usize, usize)| s.0 <= c && c <= s.1;
    let revealed = (span.0..=span.1).filter(|&c| !inside(c, to)).collect();
    let covered = (to.0..=to.1).filter(|&c| !inside(c, span)).collect();
    (revealed, covered)
}

/// Segments in tie-break order: leftmost first.
fn ordered(segments: &[Segment]) -> Vec<&Segment> {
    let mut v: Vec<&Segment> = segments.iter().collect();
    v.sort_by_key(|s| (s.column_span.0, s.id));
    v
}

/// Every admissible push of every observed non-target segment, in
/// tie-break order.
pub fn candidate_actions(
    obs: &DepthImage,
    segments: &[Segment],
    visible: &PixelMask,
    blade_thickness: f64,
) -> Vec<CandidateAction> {
    let w = obs.width_px;
    let pitch = obs.pixel_pitch_x;
    let target_columns = visible.columns();
    let target_seen = target_columns.iter().any(|c| *c);
    let blade_columns = (blade_thickness / pitch - 1e-9).ceil().max(1.0) as usize;
    let column_min: Vec<f64> = (0..w).map(|i| obs.column_min(i)).collect();

    let mut out = Vec::new();
    for seg in ordered(segments) {
        if seg.pixels.iter().any(|&p| visible.membership[p as usize]) {
            continue;
        }
        let blocked = blocked_columns(obs, segments, seg);
        let depth = seg.centre_depth(pitch).min(obs.back_depth);
        let floor: Vec<usize> = seg.pixels.iter().map(|&p| p as usize).filter(|&p| p < w).collect();
        let (Some(&first_floor), Some(&last_floor)) = (floor.iter().min(), floor.iter().max()) else {
            continue;
        };
        for direction in Direction::BOTH {
            // Stop a blade width short so the object stays pushable.
            let free = free_columns(&blocked, seg.column_span, direction);
            if free < blade_columns + 2 {
                continue;
            }
            let shift = free - blade_columns;
            // The blade goes on the trailing side.
            let (edge, insert) = match direction {
                Direction::Right => (seg.column_span.0, first_floor),
                Direction::Left => (seg.column_span.1, last_floor),
            };
            let blade_ok = match direction {
                Direction::Right => edge >= blade_columns && (edge - blade_columns..edge).all(|c| column_min[c] >= depth),
                Direction::Left => edge + blade_columns < w && (edge + 1..=edge + blade_columns).all(|c| column_min[c] >= depth),
            };
            if !blade_ok {
                continue;
            }
            let distance = shift as f64 * pitch;
            let to = shifted_span(seg.column_span, direction, shift);
            let (revealed, covered) = column_effect(seg.column_span, to);
            if target_seen && covered.iter().any(|&c| target_columns[c]) {
                continue;
            }
            out.push(CandidateAction {
                action: PushAction {
                    direction,
                    distance,
                    start: Point2::new(obs.column_center_x(insert), depth),
                    segment_id: seg.id,
                },
                pushed_segment: seg.clone(),
                newly_revealed_columns: revealed,
                newly_covered_columns: covered,
            });
        }
    }
    out
}

/// Equal mass on every column some segment covers. All zero when nothing
/// was segmented; callers detect that with [`OccupancyProfile::is_zero`].
pub fn uniform_profile(obs: &DepthImage, segments: &[Segment]) -> OccupancyProfile {
    let mut covered = vec![false; obs.width_px];
    for s in segments {
        for &p in &s.pixels {
            covered[p as usize % obs.width_px] = true;
        }
    }
    let n = covered.iter().filter(|c| **c).count();
    let v = if n == 0 { 0.0 } else { 1.0 / n as f64 };
    OccupancyProfile { values: covered.iter().map(|&c| if c { v } else { 0.0 }).collect() }
}

/// Mass the push uncovers minus mass it newly covers.
pub fn dar_score(candidate: &CandidateAction, profile: &OccupancyProfile) -> f64 {
    let sum = |cols: &[usize]| cols.iter().map(|&c| profile.values[c]).sum::<f64>();
    sum(&candidate.newly_revealed_columns) - sum(&candidate.newly_covered_columns)
}

/// Forward depth model: the segment's pixels slide sideways, leaving
/// background behind them and keeping whichever surface is nearer where
/// they land.
pub fn predict_depth_after(obs: &DepthImage, segment: &Segment, action: &PushAction) -> DepthImage {
    let w = obs.width_px;
    let k = column_shift(segment, action.direction, action.distance, obs.pixel_pitch_x, w);
    let mut out = obs.clone();
    for &p in &segment.pixels {
        out.data[p as usize] = obs.back_depth;
    }
    for &p in &segment.pixels {
        let p = p as usize;
        let (i, j) = (p % w, p / w);
        let ni = match action.direction {
            Direction::Right => i + k,
            Direction::Left => i - k,
        };
        let idx = j * w + ni;
        out.data[idx] = out.data[idx].min(obs.data[p]);
    }
    out
}

/// Lexicographic ranking key, smallest first.
type Key = [f64; 3];

/// Stable lexicographic selection: repeatedly keep the remaining indices
/// that tie the best value of each key component in turn, then take the
/// first of them. Candidate order settles whatever is left.
fn rank_order(keys: &[Key]) -> Vec<usize> {
    let ties = |a: f64, b: f64| (a - b).abs() <= SCORE_TIE_TOLERANCE;
    let mut remaining: Vec<usize> = (0..keys.len()).collect();
    let mut order = Vec::with_capacity(keys.len());
    while !remaining.is_empty() {
        let mut tied = remaining.clone();
        for k in 0..3 {
            let best = tied.iter().map(|&i| keys[i][k]).fold(f64::INFINITY, f64::min);
            tied.retain(|&i| ties(keys[i][k], best));
        }
        let pos = remaining.iter().position(|&i| i == tied[0]).expect("tied indices remain");
        order.push(remaining.remove(pos));
    }
    order
}

fn ranked(cands: Vec<CandidateAction>, keys: Vec<Key>, value: impl Fn(&Key) -> f64) -> Vec<RankedCandidate> {
    let order = rank_order(&keys);
    let mut slots: Vec<Option<CandidateAction>> = cands.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| RankedCandidate { candidate: slots[i].take().expect("each index once"), value: value(&keys[i]) })
        .collect()
}

/// All candidates at this decision, best first.
///
/// DAR breaks score ties by the uniform score, so that without a belief
/// signal it still exposes the most occluded area. DER-n breaks ties on the
/// n-step value by the one-step value, so a useless first push never wins
/// just because the best second push is still available afterwards, and
/// then by the DAR score, which keeps uncovering a located but partly
/// hidden target once the entropy can no longer drop.
pub fn rank_actions(cfg: &PolicyConfig, ctx: &PolicyContext<'_>) -> Result<Vec<RankedCandidate>, PolicyError> {
    cfg.validate()?;
    let cands = candidate_actions(ctx.observation, ctx.segments, ctx.visible, ctx.blade_thickness);
    if cands.is_empty() {
        return Ok(Vec::new());
    }
    let uniform = uniform_profile(ctx.observation, ctx.segments);
    match (cfg.kind, ctx.belief) {
        (PolicyKind::Dar, Some(belief)) => {
            let keys = cands.iter().map(|c| [-dar_score(c, belief), -dar_score(c, &uniform), 0.0]).collect();
            Ok(ranked(cands, keys, |k| -k[0]))
        }
        (PolicyKind::Der, Some(belief)) => {
            let mut search = DerSearch { ctx, budget: cfg.node_budget, nodes: 0 };
            let mut keys = Vec::with_capacity(cands.len());
            for c in &cands {
                let deep = search.child(ctx.observation, belief, c, cfg.lookahead_n)?;
                let shallow = if cfg.lookahead_n == 1 { deep } else { search.child(ctx.observation, belief, c, 1)? };
                keys.push([deep, shallow, -dar_score(c, belief)]);
            }
            Ok(ranked(cands, keys, |k| k[0]))
        }
        _ => {
            let keys = cands.iter().map(|c| [-dar_score(c, &uniform), 0.0, 0.0]).collect();
            Ok(ranked(cands, keys, |k| -k[0]))
        }
    }
}

/// DAR (or Uniform, with `uniform = true`) choice for this decision.
pub fn select_action_dar(ctx: &PolicyContext<'_>, uniform: bool) -> Option<CandidateAction> {
    let cfg = if uniform { PolicyConfig::uniform() } else { PolicyConfig::dar() };
    rank_actions(&cfg, ctx).ok()?.into_iter().next().map(|r| r.candidate)
}

pub fn select_action_der(ctx: &PolicyContext<'_>, n: usize, node_budget: usize) -> Result<Option<CandidateAction>, PolicyError> {
    let cfg = PolicyConfig::der(n)?.with_node_budget(node_budget);
    Ok(rank_actions(&cfg, ctx)?.into_iter().next().map(|r| r.candidate))
}

/// Predicted entropy after applying `candidate` and then acting optimally
/// for `depth - 1` more steps.
pub fn der_value(ctx: &PolicyContext<'_>, belief: &OccupancyProfile, candidate: &CandidateAction, depth: usize, node_budget: usize) -> Result<f64, PolicyError> {
    DerSearch { ctx, budget: node_budget, nodes: 0 }.child(ctx.observation, belief, candidate, depth)
}

struct DerSearch<'c, 'a> {
    ctx: &'c PolicyContext<'a>,
    budget: usize,
    nodes: usize,
}

impl DerSearch<'_, '_> {
    fn child(&mut self, obs: &DepthImage, belief: &OccupancyProfile, c: &CandidateAction, depth: usize) -> Result<f64, PolicyError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(PolicyError::NodeBudgetExceeded(self.budget));
        }
        let predicted = predict_depth_after(obs, &c.pushed_segment, &c.action);
        let q = self.ctx.oracle.evaluate(&predicted, self.ctx.visible).profile();
        let mut next = belief.clone();
        next.min_with(&q);
        self.value(&predicted, &next, depth - 1)
    }

    fn value(&mut self, obs: &DepthImage, belief: &OccupancyProfile, depth: usize) -> Result<f64, PolicyError> {
        if depth > 0 {
            let segments = segment_labels(obs, self.ctx.discontinuity_threshold).segments;
            let cands = candidate_actions(obs, &segments, self.ctx.visible, self.ctx.blade_thickness);
            if !cands.is_empty() {
                let mut best = f64::INFINITY;
                for c in &cands {
                    best = best.min(self.child(obs, belief, c, depth)?);
                }
                return Ok(best);
            }
        }
        Ok(entropy(belief)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupancy::GridSpec;
    use crate::render::{render_depth, segment_labels};
    use crate::scene::tests::boxed;
    use crate::sim::tests::scene_of;
    use crate::ObjectSpec;

    const W: usize = 256;

    /// Lateral and depth coordinates of placement-grid cell centres.
    fn gx(k: usize) -> f64 {
        (k as f64 + 0.5) * 0.6 / 14.0
    }

    fn gz(k: usize) -> f64 {
        (k as f64 + 0.5) * 0.4 / 16.0
    }

    /// Occluder `O` hides the left part of the target near the right wall.
    fn peeking() -> Fixture {
        fixture(vec![boxed(0, 0.46, 0.1, 0.12, 0.05, 0.1, false), boxed(1, gx(12), gz(12), 0.07, 0.07, 0.07, true)])
    }

    /// One wide occluder hiding the whole target, with room on both sides.
    fn hidden() -> Fixture {
        fixture(vec![boxed(0, gx(7), 0.1, 0.1, 0.05, 0.1, false), boxed(1, gx(7), gz(12), 0.07, 0.07, 0.07, true)])
    }

    struct Fixture {
        obs: DepthImage,
        segments: Vec<Segment>,
        visible: PixelMask,
        oracle: OccupancyOracle,
    }

    fn fixture(objects: Vec<ObjectSpec>) -> Fixture {
        let scene = scene_of(objects);
        let r = render_depth(&scene, W, W).unwrap();
        let segments = segment_labels(&r.depth, 0.02).segments;
        let visible = r.mask(scene.target_id);
        let oracle = OccupancyOracle::new(scene.shelf, scene.target().unwrap(), GridSpec::default(), W, W);
        Fixture { obs: r.depth, segments, visible, oracle }
    }

    impl Fixture {
        fn ctx<'a>(&'a self, belief: Option<&'a OccupancyProfile>) -> PolicyContext<'a> {
            PolicyContext {
                observation: &self.obs,
                segments: &self.segments,
                visible: &self.visible,
                belief,
                oracle: &self.oracle,
                blade_thickness: 0.01,
                discontinuity_threshold: 0.02,
            }
        }

        fn belief(&self) -> OccupancyProfile {
            self.oracle.evaluate(&self.obs, &self.visible).profile()
        }

        fn candidates(&self) -> Vec<CandidateAction> {
            candidate_actions(&self.obs, &self.segments, &self.visible, 0.01)
        }
    }

    #[test]
    fn names_round_trip() {
        for name in ["uniform", "dar", "der1", "der2", "der3"] {
            assert_eq!(name.parse::<PolicyConfig>().unwrap().name(), name);
        }
        assert_eq!("der4".parse::<PolicyConfig>(), Err(PolicyError::InvalidLookahead(4)));
        assert!(matches!("greedy".parse::<PolicyConfig>(), Err(PolicyError::UnknownPolicy(_))));
    }

    #[test]
    fn isolated_segment_has_two_candidates() {
        let f = fixture(vec![boxed(0, 0.3, 0.1, 0.05, 0.05, 0.1, false), boxed(1, 0.3, 0.3, 0.02, 0.02, 0.02, true)]);
        let c = f.candidates();
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].action.direction, c[1].action.direction), (Direction::Left, Direction::Right));
        for c in &c {
            let overlap = c.newly_revealed_columns.iter().any(|x| c.newly_covered_columns.contains(x));
            assert!(!overlap);
        }
    }

    #[test]
    fn wall_flush_segment_cannot_be_pushed() {
        // no room to move left, and no room for the blade on the left
        let f = fixture(vec![boxed(0, 0.028, 0.1, 0.05, 0.05, 0.1, false), boxed(1, 0.3, 0.3, 0.02, 0.02, 0.02, true)]);
        assert!(f.candidates().is_empty());
        // just past blade clearance plus margin the leftward push is short
        let f = fixture(vec![boxed(0, 0.045, 0.1, 0.05, 0.05, 0.1, false), boxed(1, 0.3, 0.3, 0.02, 0.02, 0.02, true)]);
        let c = f.candidates();
        assert_eq!(c.len(), 2);
        assert!(c[0].action.direction == Direction::Left && c[0].action.distance < 0.015);
        assert!(c[1].action.direction == Direction::Right && c[1].action.distance > 0.4);
    }

    #[test]
    fn covering_constraint_excludes_push_over_visible_target() {
        let f = peeking();
        assert!(!f.visible.is_empty());
        let c = f.candidates();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].action.direction, Direction::Left);
        // the same push with the target hidden is admissible
        let hidden = PixelMask::empty(W, W);
        let all = candidate_actions(&f.obs, &f.segments, &hidden, 0.01);
        let o = all.iter().find(|x| x.action.segment_id == c[0].action.segment_id && x.action.direction == Direction::Right);
        assert!(o.is_some());
        let tcols = f.visible.columns();
        assert!(o.unwrap().newly_covered_columns.iter().any(|&x| tcols[x]));
    }

    #[test]
    fn uniform_profile_cases() {
        let obs = DepthImage::background(W, W, 0.6 / W as f64, 0.25 / W as f64, 0.4);
        let seg = |id: u32, a: usize, b: usize| Segment {
            id,
            pixels: (a..=b).map(|c| c as u32).collect(),
            width_px: W,
            height_px: W,
            column_span: (a, b),
            front_depth: 0.1,
            max_depth: 0.1,
            far_depth: 0.2,
        };
        let p = uniform_profile(&obs, &[seg(0, 10, 73)]);
        assert!(p.values[10..=73].iter().all(|v| (*v - 1.0 / 64.0).abs() < 1e-15));
        assert_eq!(p.values.iter().filter(|v| **v > 0.0).count(), 64);
        let p = uniform_profile(&obs, &[seg(0, 0, 9), seg(1, 100, 109)]);
        assert!(p.values.iter().filter(|v| **v > 0.0).all(|v| (*v - 0.05).abs() < 1e-15));
        assert!(uniform_profile(&obs, &[]).is_zero());
    }

    fn shifted_overlap(c: &CandidateAction, p: &OccupancyProfile, shift: i64) -> (f64, f64) {
        let mask = c.pushed_segment.mask().columns();
        let before: f64 = (0..W).filter(|&i| mask[i]).map(|i| p.values[i]).sum();
        let after: f64 = (0..W)
            .filter(|&i| mask[i])
            .map(|i| (i as i64 + shift).clamp(0, W as i64 - 1) as usize)
            .map(|i| p.values[i])
            .sum();
        (before, after)
    }

    #[test]
    fn dar_score_matches_explicit_mask_shift() {
        let f = fixture(vec![
            boxed(0, gx(4), 0.1, 0.1, 0.05, 0.1, false),
            boxed(1, 0.45, 0.1, 0.09, 0.05, 0.1, false),
            boxed(2, gx(4), gz(12), 0.07, 0.07, 0.07, true),
        ]);
        let mut belief = f.belief();
        // skew the mass so left and right pushes differ
        for (i, v) in belief.values.iter_mut().enumerate() {
            *v *= 1.0 + i as f64 / 64.0;
        }
        for c in f.candidates() {
            let k = (c.action.distance / f.obs.pixel_pitch_x).round() as i64;
            let shift = if c.action.direction == Direction::Right { k } else { -k };
            let (before, after) = shifted_overlap(&c, &belief, shift);
            assert!((dar_score(&c, &belief) - (before - after)).abs() < 1e-12);
        }
    }

    #[test]
    fn dar_full_mass_and_zero_mass_scores() {
        let f = hidden();
        let belief = f.belief();
        let c = f.candidates();
        let seg_cols = c[0].pushed_segment.mask().columns();
        let under: f64 = (0..W).filter(|&i| seg_cols[i]).map(|i| belief.values[i]).sum();
        assert!((under - 1.0).abs() < 1e-9);
        for c in &c {
            // pushed clear of the mass onto empty columns
            assert!((dar_score(c, &belief) - under).abs() < 1e-9);
        }
        // no mass anywhere the segment touches
        let zero = OccupancyProfile::zeros(W);
        assert_eq!(dar_score(&c[0], &zero), 0.0);
    }

    #[test]
    fn dar_tie_goes_to_leftmost_then_leftward() {
        let f = fixture(vec![
            boxed(0, 0.15, 0.1, 0.05, 0.05, 0.1, false),
            boxed(1, 0.45, 0.1, 0.05, 0.05, 0.1, false),
            boxed(2, 0.3, 0.05, 0.02, 0.02, 0.02, true),
        ]);
        let zero = OccupancyProfile::zeros(W);
        let ctx = f.ctx(Some(&zero));
        let best = select_action_dar(&ctx, false).unwrap();
        assert_eq!(best.pushed_segment.column_span.0, f.segments.iter().map(|s| s.column_span.0).min().unwrap());
        assert_eq!(best.action.direction, Direction::Left);
    }

    #[test]
    fn dar_pushes_occluder_off_the_mass() {
        // a neighbour on the left leaves only a short leftward push, which
        // uncovers little; the rightward push clears the whole occluder
        let f = fixture(vec![
            boxed(0, gx(7), 0.1, 0.1, 0.05, 0.1, false),
            boxed(1, 0.22, 0.1, 0.06, 0.05, 0.1, false),
            boxed(2, gx(7), gz(12), 0.07, 0.07, 0.07, true),
        ]);
        let belief = f.belief();
        let ranked = rank_actions(&PolicyConfig::dar(), &f.ctx(Some(&belief))).unwrap();
        let best = &ranked[0].candidate;
        let occluder = f.segments.iter().max_by_key(|s| s.column_span.0).unwrap();
        assert_eq!(best.action.segment_id, occluder.id);
        assert_eq!(best.action.direction, Direction::Right);
        let left = ranked
            .iter()
            .find(|r| r.candidate.action.segment_id == occluder.id && r.candidate.action.direction == Direction::Left)
            .unwrap();
        let under: f64 = (occluder.column_span.0..=occluder.column_span.1).map(|c| belief.values[c]).sum();
        assert!((ranked[0].value - under).abs() < 1e-9);
        assert!(left.value < ranked[0].value);
        let by_hand: Vec<f64> = ranked.iter().map(|r| dar_score(&r.candidate, &belief)).collect();
        assert!(by_hand.windows(2).all(|w| w[0] >= w[1] - SCORE_TIE_TOLERANCE));
    }

    #[test]
    fn predict_depth_cases() {
        let f = fixture(vec![boxed(0, 0.3, 0.1, 0.05, 0.05, 0.1, false), boxed(1, 0.3, 0.3, 0.02, 0.02, 0.02, true)]);
        let seg = &f.segments[0];
        let c = &f.candidates()[1];
        let zero = PushAction { distance: 0.0, ..c.action };
        assert_eq!(predict_depth_after(&f.obs, seg, &zero), f.obs);

        let moved = predict_depth_after(&f.obs, seg, &c.action);
        let k = (c.action.distance / f.obs.pixel_pitch_x).round() as usize;
        for &p in &seg.pixels {
            let p = p as usize;
            assert_eq!(moved.data[p + k], f.obs.data[p]);
            if p % W + k > seg.column_span.1 && p % W < seg.column_span.0 + k {
                continue;
            }
            if p % W < seg.column_span.0 + k {
                assert_eq!(moved.data[p], f.obs.back_depth);
            }
        }

        // landing on a nearer object keeps the nearer depth
        let g = fixture(vec![
            boxed(0, 0.3, 0.2, 0.05, 0.05, 0.1, false),
            boxed(1, 0.36, 0.05, 0.05, 0.03, 0.05, false),
            boxed(2, 0.1, 0.3, 0.02, 0.02, 0.02, true),
        ]);
        let back = g.segments.iter().find(|s| s.front_depth > 0.1).unwrap();
        let action = PushAction {
            direction: Direction::Right,
            distance: 0.03,
            start: Point2::new(0.3, 0.3),
            segment_id: back.id,
        };
        let out = predict_depth_after(&g.obs, back, &action);
        let front_px = (0.36 / g.obs.pixel_pitch_x) as usize;
        assert!((out.get(front_px, 0) - 0.035).abs() < 1e-12);
        // clamped at the image border
        let far = PushAction { distance: 10.0, ..action };
        let out = predict_depth_after(&g.obs, back, &far);
        assert!(out.get(W - 1, 0) < g.obs.back_depth);
    }

    #[test]
    fn der1_on_single_occluder_matches_post_reveal_oracle() {
        let f = hidden();
        let belief = f.belief();
        let ctx = f.ctx(Some(&belief));
        let ranked = rank_actions(&PolicyConfig::der(1).unwrap(), &ctx).unwrap();
        let best = &ranked[0];
        let predicted = predict_depth_after(&f.obs, &best.candidate.pushed_segment, &best.candidate.action);
        let mut p = belief.clone();
        p.min_with(&f.oracle.evaluate(&predicted, &f.visible).profile());
        assert_eq!(best.value, entropy(&p).unwrap().value);
        assert!(best.value < entropy(&belief).unwrap().value);
    }

    #[test]
    fn der_budget_fails_loudly() {
        let f = fixture(vec![
            boxed(0, gx(3), 0.1, 0.1, 0.05, 0.1, false),
            boxed(1, 0.45, 0.1, 0.05, 0.05, 0.1, false),
            boxed(2, gx(3), gz(12), 0.07, 0.07, 0.07, true),
        ]);
        let belief = f.belief();
        let cfg = PolicyConfig::der(2).unwrap().with_node_budget(3);
        assert_eq!(rank_actions(&cfg, &f.ctx(Some(&belief))), Err(PolicyError::NodeBudgetExceeded(3)));
    }

    #[test]
    fn single_candidate_is_selected_by_every_policy() {
        let f = peeking();
        let belief = f.belief();
        let ctx = f.ctx(Some(&belief));
        let only = f.candidates().remove(0);
        assert_eq!(select_action_dar(&ctx, true).unwrap(), only);
        assert_eq!(select_action_dar(&ctx, false).unwrap(), only);
        assert!(!belief.is_zero());
        assert_eq!(select_action_der(&ctx, 1, 100).unwrap().unwrap(), only);
    }
}
