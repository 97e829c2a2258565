//! Target occupancy distributions, the history-minimum belief, and the
//! entropy cost.
//!
//! The occupancy oracle enumerates a fixed grid of target placements and
//! keeps those whose rendering agrees with the observation: wherever the
//! target would be frontmost it must have been seen, and wherever it was
//! seen it must be frontmost. The distribution is the normalized sum of the
//! rendered masks of the surviving placements.
//!
//! Every placement of a floor-standing prism under an orthographic frontal
//! camera covers the same band of rows, so the oracle works column-wise and
//! only expands to a dense grid on request.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::transform_footprint;
use crate::render::{encode_pgm16, footprint_columns, rows_covered, DepthImage, PixelMask};
use crate::scalar::Real;
use crate::scene::{ObjectSpec, ShelfSpec};
use crate::{Footprint, Pose2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OccupancyError {
    #[error("grid shape mismatch: belief is {0}x{1}, update is {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("profile entry {0} is negative or not a number")]
    NegativeEntry(usize),
}

/// Dense `p(x, y)` over the image grid, row-major with row 0 at the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid<T> {
    pub width_px: usize,
    pub height_px: usize,
    pub data: Vec<T>,
}

impl<T: Real> OccupancyGrid<T> {
    pub fn zeros(width_px: usize, height_px: usize) -> Self {
        Self { width_px, height_px, data: vec![T::zero(); width_px * height_px] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.width_px + i]
    }

    pub fn sum(&self) -> T {
        self.data.iter().fold(T::zero(), |a, v| a + *v)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == T::zero())
    }

    /// Column sums.
    pub fn collapse(&self) -> OccupancyProfile<T> {
        let mut values = vec![T::zero(); self.width_px];
        for row in self.data.chunks(self.width_px) {
            for (acc, v) in values.iter_mut().zip(row) {
                *acc = *acc + *v;
            }
        }
        OccupancyProfile { values }
    }

    /// 16-bit PGM scaled so the largest entry is white.
    pub fn to_pgm(&self) -> Vec<u8> {
        let max = self.data.iter().fold(T::zero(), |m, v| m.max(*v));
        let levels: Vec<u16> = self
            .data
            .iter()
            .map(|v| {
                if max > T::zero() {
                    (v.to_f64_lossy() / max.to_f64_lossy() * 65535.0).round() as u16
                } else {
                    0
                }
            })
            .collect();
        encode_pgm16(self.width_px, self.height_px, &levels)
    }
}

/// One-dimensional column distribution `P(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyProfile<T> {
    pub values: Vec<T>,
}

impl<T: Real> OccupancyProfile<T> {
    pub fn zeros(len: usize) -> Self {
        Self { values: vec![T::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |a, v| a + *v)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    /// Pointwise minimum with `other`, in place.
    pub fn min_with(&mut self, other: &Self) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a = a.min(*b);
        }
    }
}

/// History-minimum belief `p'(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState<T> {
    pub history_min: OccupancyGrid<T>,
    pub step_index: usize,
}

impl<T: Real> BeliefState<T> {
    /// Step-0 belief: the first grid, unchanged.
    pub fn initial(grid: OccupancyGrid<T>) -> Self {
        Self { history_min: grid, step_index: 0 }
    }
}

/// Pointwise minimum of the stored belief and `new_grid`.
pub fn update_belief<T: Real>(
    belief: &BeliefState<T>,
    new_grid: &OccupancyGrid<T>,
) -> Result<BeliefState<T>, OccupancyError> {
    let old = &belief.history_min;
    if old.width_px != new_grid.width_px || old.height_px != new_grid.height_px {
        return Err(OccupancyError::ShapeMismatch(
            old.width_px,
            old.height_px,
            new_grid.width_px,
            new_grid.height_px,
        ));
    }
    let data = old.data.iter().zip(&new_grid.data).map(|(a, b)| a.min(*b)).collect();
    Ok(BeliefState {
        history_min: OccupancyGrid { width_px: old.width_px, height_px: old.height_px, data },
        step_index: belief.step_index + 1,
    })
}

pub fn collapse_profile<T: Real>(belief: &BeliefState<T>) -> OccupancyProfile<T> {
    belief.history_min.collapse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    /// Renormalize the profile to unit mass first.
    #[default]
    Renormalized,
    /// Use the profile values as they are.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy<T> {
    pub value: T,
    /// The profile had no mass; `value` is 0 by convention.
    pub zero_mass: bool,
}

/// Shannon entropy (natural log) of the renormalized profile.
pub fn entropy<T: Real>(profile: &OccupancyProfile<T>) -> Result<Entropy<T>, OccupancyError> {
    entropy_with(profile, EntropyMode::Renormalized)
}

pub fn entropy_with<T: Real>(profile: &OccupancyProfile<T>, mode: EntropyMode) -> Result<Entropy<T>, OccupancyError> {
    if let Some(i) = profile.values.iter().position(|v| !(*v >= T::zero())) {
        return Err(OccupancyError::NegativeEntry(i));
    }
    let total = profile.total();
    if total == T::zero() {
        return Ok(Entropy { value: T::zero(), zero_mass: true });
    }
    let scale = match mode {
        EntropyMode::Renormalized => total,
        EntropyMode::Raw => T::one(),
    };
    let mut h = T::zero();
    for &v in &profile.values {
        if v > T::zero() {
            let p = v / scale;
            h = h - p * p.ln();
        }
    }
    Ok(Entropy { value: h.max(T::zero()), zero_mass: false })
}

/// Placement-grid resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_x: usize,
    pub n_z: usize,
    pub n_theta: usize,
    /// Span rotations over `[0, 2π)` instead of `[0, π)`; needed for
    /// targets without central symmetry.
    pub full_rotation: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_x: 14, n_z: 16, n_theta: 8, full_rotation: false }
    }
}

/// Target poses the oracle considers, each keeping the target on the shelf.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementGrid {
    pub spec: GridSpec,
    pub placements: Vec<Pose2>,
}

impl PlacementGrid {
    /// Cell-centred translations `x = (k + ½)·width/n_x`, `z = (k + ½)·depth/n_z`
    /// and rotations `k·π/n_θ` (or `k·2π/n_θ`), filtered to poses whose
    /// footprint stays inside the shelf rectangle.
    pub fn new(spec: GridSpec, shelf: &ShelfSpec, target: &Footprint) -> Self {
        let span = if spec.full_rotation { 2.0 * PI } else { PI };
        let mut placements = Vec::new();
        for ix in 0..spec.n_x {
            let x = (ix as f64 + 0.5) * shelf.width / spec.n_x as f64;
            for iz in 0..spec.n_z {
                let z = (iz as f64 + 0.5) * shelf.depth / spec.n_z as f64;
                for it in 0..spec.n_theta {
                    let theta = it as f64 * span / spec.n_theta as f64;
                    let pose = Pose2::new(x, z, theta);
                    let b = transform_footprint(target, &pose).bounds();
                    if b.min_x >= 0.0 && b.max_x <= shelf.width && b.min_z >= 0.0 && b.max_z <= shelf.depth {
                        placements.push(pose);
                    }
                }
            }
        }
        Self { spec, placements }
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }
}

/// Pre-rendered target at one placement: contiguous columns with their
/// entry depths; rows `0..rows` of the oracle.
#[derive(Debug, Clone)]
pub struct PlacementTemplate {
    pub pose: Pose2,
    pub footprint: Footprint,
    pub first_column: usize,
    pub depths: Vec<f64>,
}

impl PlacementTemplate {
    pub fn last_column(&self) -> usize {
        self.first_column + self.depths.len() - 1
    }
}

/// Per-column summary of an observation restricted to the target's row
/// band. Enough to decide consistency of any placement exactly.
#[derive(Debug, Clone)]
pub struct ObservationStats {
    /// Max observed depth over non-visible pixels in the band.
    hidden_max: Vec<f64>,
    vis_min: Vec<f64>,
    vis_max: Vec<f64>,
    /// Column range that must be covered by any consistent placement.
    visible_columns: Option<(usize, usize)>,
    /// Some visible pixel lies above the band: nothing can be consistent.
    impossible: bool,
}

/// Column-form oracle output. Pixel `(i, j)` of the dense grid holds
/// `values[i]` for `j < rows` and 0 above.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub values: Vec<f64>,
    pub rows: usize,
    pub height_px: usize,
    pub consistent_placements: usize,
    /// No placement was consistent; `values` is all zero.
    pub zero_consistency: bool,
}

impl OracleResult {
    pub fn grid(&self) -> OccupancyGrid<f64> {
        let w = self.values.len();
        let mut g = OccupancyGrid::zeros(w, self.height_px);
        for j in 0..self.rows {
            g.data[j * w..(j + 1) * w].copy_from_slice(&self.values);
        }
        g
    }

    /// Column sums of [`Self::grid`].
    pub fn profile(&self) -> OccupancyProfile<f64> {
        let rows = self.rows as f64;
        OccupancyProfile { values: self.values.iter().map(|v| v * rows).collect() }
    }
}

/// Exact occupancy oracle for one target geometry, placement grid and
/// image size. Target masks are rendered once at construction.
#[derive(Debug, Clone)]
pub struct OccupancyOracle {
    pub shelf: ShelfSpec,
    pub width_px: usize,
    pub height_px: usize,
    pub rows: usize,
    pub depth_tolerance: f64,
    pub grid: PlacementGrid,
    templates: Vec<PlacementTemplate>,
}

/// Depth agreement tolerance: one 16-bit quantization level of the
/// renderer's PGM scale.
pub fn depth_tolerance(shelf: &ShelfSpec) -> f64 {
    shelf.back_depth() / 65535.0
}

impl OccupancyOracle {
    pub fn new(shelf: ShelfSpec, target: &ObjectSpec, spec: GridSpec, width_px: usize, height_px: usize) -> Self {
        let grid = PlacementGrid::new(spec, &shelf, &target.footprint);
        Self::with_grid(shelf, target, grid, width_px, height_px)
    }

    pub fn with_grid(shelf: ShelfSpec, target: &ObjectSpec, grid: PlacementGrid, width_px: usize, height_px: usize) -> Self {
        let pitch_x = shelf.width / width_px as f64;
        let pitch_y = shelf.height / height_px as f64;
        let rows = rows_covered(target.height, pitch_y, height_px);
        let templates = grid
            .placements
            .iter()
            .filter_map(|pose| {
                let footprint = transform_footprint(&target.footprint, pose);
                let cols = footprint_columns(&footprint, width_px, pitch_x);
                let first_column = cols.first()?.0;
                Some(PlacementTemplate {
                    pose: *pose,
                    footprint,
                    first_column,
                    depths: cols.into_iter().map(|(_, z)| z).collect(),
                })
            })
            .collect();
        Self { shelf, width_px, height_px, rows, depth_tolerance: depth_tolerance(&shelf), grid, templates }
    }

    pub fn templates(&self) -> &[PlacementTemplate] {
        &self.templates
    }

    pub fn stats(&self, obs: &DepthImage, visible: &PixelMask) -> ObservationStats {
        let w = self.width_px;
        let mut st = ObservationStats {
            hidden_max: vec![f64::NEG_INFINITY; w],
            vis_min: vec![f64::INFINITY; w],
            vis_max: vec![f64::NEG_INFINITY; w],
            visible_columns: None,
            impossible: false,
        };
        for j in 0..obs.height_px {
            let row = &obs.data[j * w..(j + 1) * w];
            let vis = &visible.membership[j * w..(j + 1) * w];
            if j >= self.rows {
                if vis.iter().any(|v| *v) {
                    st.impossible = true;
                }
                continue;
            }
            for i in 0..w {
                let d = row[i];
                if vis[i] {
                    st.vis_min[i] = st.vis_min[i].min(d);
                    st.vis_max[i] = st.vis_max[i].max(d);
                    st.visible_columns = Some(match st.visible_columns {
                        None => (i, i),
                        Some((a, b)) => (a.min(i), b.max(i)),
                    });
                } else {
                    st.hidden_max[i] = st.hidden_max[i].max(d);
                }
            }
        }
        st
    }

    /// Consistency of template `idx` against precomputed stats.
    pub fn is_consistent(&self, idx: usize, st: &ObservationStats) -> bool {
        if st.impossible {
            return false;
        }
        let t = &self.templates[idx];
        if let Some((a, b)) = st.visible_columns {
            if t.first_column > a || t.last_column() < b {
                return false;
            }
        }
        let tol = self.depth_tolerance;
        t.depths.iter().enumerate().all(|(k, &z)| {
            let c = t.first_column + k;
            st.hidden_max[c] <= z + tol && st.vis_max[c] <= z + tol && st.vis_min[c] >= z - tol
        })
    }

    /// Templates the target could occupy while being entirely hidden behind
    /// the observed surface (strictly behind at every pixel).
    pub fn hidden_placements(&self, obs: &DepthImage) -> Vec<usize> {
        let st = self.stats(obs, &PixelMask::empty(obs.width_px, obs.height_px));
        (0..self.templates.len())
            .filter(|&idx| {
                let t = &self.templates[idx];
                t.depths.iter().enumerate().all(|(k, &z)| st.hidden_max[t.first_column + k] < z)
            })
            .collect()
    }

    pub fn evaluate(&self, obs: &DepthImage, visible: &PixelMask) -> OracleResult {
        let st = self.stats(obs, visible);
        let mut counts = vec![0u64; self.width_px];
        let mut consistent = 0usize;
        let mut mask_pixels = 0u64;
        for idx in 0..self.templates.len() {
            if self.is_consistent(idx, &st) {
                let t = &self.templates[idx];
                consistent += 1;
                mask_pixels += (t.depths.len() * self.rows) as u64;
                for c in &mut counts[t.first_column..=t.last_column()] {
                    *c += 1;
                }
            }
        }
        let values = if mask_pixels == 0 {
            vec![0.0; self.width_px]
        } else {
            let total = mask_pixels as f64;
            counts.iter().map(|&c| c as f64 / total).collect()
        };
        OracleResult {
            values,
            rows: self.rows,
            height_px: self.height_px,
            consistent_placements: consistent,
            zero_consistency: mask_pixels == 0,
        }
    }
}

/// Literal per-pixel consistency test of one placement: renders the target
/// alone at `placement` and checks it against the observation pixel by pixel.
pub fn placement_consistent(
    placement: &Pose2,
    target: &ObjectSpec,
    shelf: &ShelfSpec,
    obs: &DepthImage,
    visible: &PixelMask,
) -> bool {
    let (w, h) = (obs.width_px, obs.height_px);
    let pitch_x = shelf.width / w as f64;
    let pitch_y = shelf.height / h as f64;
    let rows = rows_covered(target.height, pitch_y, h);
    let fp = transform_footprint(&target.footprint, placement);
    let tol = depth_tolerance(shelf);
    let mut in_mask = vec![false; w * h];
    for (i, z) in footprint_columns(&fp, w, pitch_x) {
        for j in 0..rows {
            let idx = j * w + i;
            in_mask[idx] = true;
            let o = obs.data[idx];
            let ok = if visible.membership[idx] { (o - z).abs() <= tol } else { z >= o - tol };
            if !ok {
                return false;
            }
        }
    }
    visible.membership.iter().zip(&in_mask).all(|(v, m)| !*v || *m)
}

/// One-shot oracle evaluation; prefer a cached [`OccupancyOracle`] in loops.
pub fn occupancy_grid(
    obs: &DepthImage,
    visible: &PixelMask,
    target: &ObjectSpec,
    shelf: &ShelfSpec,
    grid: &PlacementGrid,
) -> OracleResult {
    OccupancyOracle::with_grid(*shelf, target, grid.clone(), obs.width_px, obs.height_px).evaluate(obs, visible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::render_depth;
    use crate::scene::tests::boxed;
    use crate::scene::Scene;
    use proptest::prelude::*;

    fn target() -> ObjectSpec {
        boxed(9, 0.0, 0.0, 0.07, 0.07, 0.07, true)
    }

    fn small_oracle(spec: GridSpec) -> OccupancyOracle {
        OccupancyOracle::new(ShelfSpec::default(), &target(), spec, 128, 64)
    }

    fn observe(objects: Vec<ObjectSpec>, w: usize, h: usize) -> (DepthImage, PixelMask) {
        let scene = Scene { shelf: ShelfSpec::default(), objects, target_id: 9 };
        let r = render_depth(&scene, w, h).unwrap();
        let vis = r.mask(9);
        (r.depth, vis)
    }

    /// Unoptimized sum-and-normalize over placements, using full renders of
    /// the target alone and a per-pixel consistency check.
    fn brute_force_grid(oracle: &OccupancyOracle, obs: &DepthImage, visible: &PixelMask) -> OccupancyGrid<f64> {
        let (w, h) = (obs.width_px, obs.height_px);
        let mut acc = vec![0.0f64; w * h];
        for pose in &oracle.grid.placements {
            let mut t = target();
            t.pose = *pose;
            if !placement_consistent(pose, &t, &oracle.shelf, obs, visible) {
                continue;
            }
            let alone = Scene { shelf: oracle.shelf, objects: vec![t], target_id: 9 };
            let m = render_depth(&alone, w, h).unwrap().mask(9);
            for (a, b) in acc.iter_mut().zip(&m.membership) {
                if *b {
                    *a += 1.0;
                }
            }
        }
        let s: f64 = acc.iter().sum();
        if s > 0.0 {
            acc.iter_mut().for_each(|a| *a /= s);
        }
        OccupancyGrid { width_px: w, height_px: h, data: acc }
    }

    fn assert_grids_close(a: &OccupancyGrid<f64>, b: &OccupancyGrid<f64>) {
        assert_eq!((a.width_px, a.height_px), (b.width_px, b.height_px));
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn grid_has_1792_raw_poses_and_filters_edges() {
        let spec = GridSpec::default();
        assert_eq!(spec.n_x * spec.n_z * spec.n_theta, 1792);
        let grid = PlacementGrid::new(spec, &ShelfSpec::default(), &target().footprint);
        assert!(grid.len() < 1792 && grid.len() > 1000);
        for p in &grid.placements {
            let b = transform_footprint(&target().footprint, p).bounds();
            assert!(b.min_x >= 0.0 && b.max_x <= 0.6 && b.min_z >= 0.0 && b.max_z <= 0.4);
            assert!(p.rotation < PI);
        }
        let full = PlacementGrid::new(GridSpec { full_rotation: true, ..spec }, &ShelfSpec::default(), &target().footprint);
        assert!(full.placements.iter().any(|p| p.rotation > PI));
    }

    #[test]
    fn empty_shelf_has_no_consistent_placement() {
        let oracle = small_oracle(GridSpec::default());
        let (obs, _) = observe(vec![], 128, 64);
        let vis = PixelMask::empty(128, 64);
        let mut t = target();
        t.pose = oracle.grid.placements[oracle.grid.len() / 2];
        assert!(!placement_consistent(&t.pose, &t, &oracle.shelf, &obs, &vis));
        let r = oracle.evaluate(&obs, &vis);
        assert!(r.zero_consistency);
        assert_eq!(r.consistent_placements, 0);
        assert!(r.grid().is_zero());
    }

    #[test]
    fn single_occluder_confines_mass_behind_it() {
        let oracle = small_oracle(GridSpec::default());
        // occluder x in [0.2, 0.36], front at z = 0.02, full height
        let (obs, _) = observe(vec![boxed(0, 0.28, 0.05, 0.16, 0.06, 0.25, false)], 128, 64);
        let vis = PixelMask::empty(128, 64);
        let r = oracle.evaluate(&obs, &vis);
        assert!(!r.zero_consistency);
        let g = r.grid();
        assert!((g.sum() - 1.0).abs() < 1e-9);
        let pitch = 0.6 / 128.0;
        for i in 0..128 {
            let x = (i as f64 + 0.5) * pitch;
            for j in 0..64 {
                if g.get(i, j) > 0.0 {
                    assert!((0.2..=0.36).contains(&x), "mass at column {i}");
                    assert!(j < oracle.rows);
                }
            }
        }
        assert_grids_close(&g, &brute_force_grid(&oracle, &obs, &vis));
        // a placement behind the occluder is consistent
        let mut t = target();
        t.pose = Pose2::new(0.28, 0.25, 0.0);
        assert!(placement_consistent(&t.pose, &t, &oracle.shelf, &obs, &vis));
    }

    #[test]
    fn partial_visibility_pins_placements() {
        let spec = GridSpec::default();
        let shelf = ShelfSpec::default();
        let grid = PlacementGrid::new(spec, &shelf, &target().footprint);
        // put the real target on a grid pose: x = 5.5 * 0.6/14, z = 10.5 * 0.4/16
        let pose = *grid.placements.iter().find(|p| p.rotation == 0.0 && (p.translation.x - 5.5 * 0.6 / 14.0).abs() < 1e-12 && (p.translation.z - 10.5 * 0.025).abs() < 1e-12).unwrap();
        let mut t = target();
        t.pose = pose;
        // occluder covering the target's left part only
        let occ = boxed(0, pose.translation.x - 0.05, 0.05, 0.08, 0.06, 0.25, false);
        let (obs, vis) = observe(vec![occ, t.clone()], 128, 64);
        assert!(!vis.is_empty());
        assert!(placement_consistent(&pose, &t, &shelf, &obs, &vis));
        let oracle = OccupancyOracle::with_grid(shelf, &target(), grid, 128, 64);
        let r = oracle.evaluate(&obs, &vis);
        assert!(r.consistent_placements >= 1);
        let g = r.grid();
        let vis_cols = vis.columns();
        for (c, v) in vis_cols.iter().enumerate() {
            if *v {
                assert!(g.get(c, 0) > 0.0);
            }
        }
        // every consistent placement covers every visible column
        let per_placement = 1.0 / (r.consistent_placements as f64);
        let _ = per_placement;
        assert_grids_close(&g, &brute_force_grid(&oracle, &obs, &vis));
    }

    #[test]
    fn compact_path_matches_fast_consistency() {
        let oracle = small_oracle(GridSpec { n_x: 7, n_z: 8, n_theta: 4, full_rotation: false });
        let (obs, vis) = observe(
            vec![
                boxed(0, 0.15, 0.08, 0.1, 0.06, 0.1, false),
                boxed(1, 0.42, 0.12, 0.09, 0.05, 0.1, false),
            ],
            128,
            64,
        );
        let st = oracle.stats(&obs, &vis);
        for (idx, t) in oracle.templates().iter().enumerate() {
            let mut spec = target();
            spec.pose = t.pose;
            assert_eq!(oracle.is_consistent(idx, &st), placement_consistent(&t.pose, &spec, &oracle.shelf, &obs, &vis));
        }
        let r = oracle.evaluate(&obs, &vis);
        let p = r.profile();
        let c = r.grid().collapse();
        for (a, b) in p.values.iter().zip(&c.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn belief_update_cases() {
        let mut a = OccupancyGrid::<f64>::zeros(4, 2);
        a.data = vec![0.1, 0.2, 0.0, 0.2, 0.1, 0.2, 0.0, 0.2];
        let mut b = a.clone();
        b.data = vec![0.3, 0.0, 0.1, 0.1, 0.3, 0.0, 0.1, 0.1];
        let s0 = BeliefState::initial(a.clone());
        assert_eq!(s0.step_index, 0);
        let same = update_belief(&s0, &a).unwrap();
        assert_eq!(same.history_min, a);
        assert_eq!(same.step_index, 1);
        let zero = update_belief(&s0, &OccupancyGrid::zeros(4, 2)).unwrap();
        assert!(zero.history_min.is_zero());
        let ab = update_belief(&s0, &b).unwrap();
        let ba = update_belief(&BeliefState::initial(b.clone()), &a).unwrap();
        assert_eq!(ab.history_min, ba.history_min);
        assert_eq!(ab.history_min.data, vec![0.1, 0.0, 0.0, 0.1, 0.1, 0.0, 0.0, 0.1]);
        assert_eq!(
            update_belief(&s0, &OccupancyGrid::zeros(3, 2)),
            Err(OccupancyError::ShapeMismatch(4, 2, 3, 2))
        );
    }

    #[test]
    fn collapse_cases() {
        let mut g = OccupancyGrid::<f64>::zeros(5, 3);
        g.data[2 * 5 + 3] = 0.7;
        let p = collapse_profile(&BeliefState::initial(g));
        assert_eq!(p.values, vec![0.0, 0.0, 0.0, 0.7, 0.0]);
        let uniform = OccupancyGrid { width_px: 4, height_px: 4, data: vec![1.0 / 16.0; 16] };
        let p: OccupancyProfile<f64> = uniform.collapse();
        assert!(p.values.iter().all(|v| (*v - 0.25).abs() < 1e-15));
        assert!((p.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_cases() {
        let mut delta = OccupancyProfile::<f64>::zeros(256);
        delta.values[17] = 0.3;
        assert_eq!(entropy(&delta).unwrap().value, 0.0);
        let uniform = OccupancyProfile { values: vec![1.0 / 256.0; 256] };
        assert!((entropy(&uniform).unwrap().value - 256f64.ln()).abs() < 1e-12);
        let mut two = OccupancyProfile::<f64>::zeros(10);
        two.values[0] = 0.5;
        two.values[1] = 0.5;
        assert!((entropy(&two).unwrap().value - 2f64.ln()).abs() < 1e-15);
        let z = entropy(&OccupancyProfile::<f64>::zeros(8)).unwrap();
        assert!(z.zero_mass && z.value == 0.0);
        let bad = OccupancyProfile { values: vec![0.5, -0.1] };
        assert_eq!(entropy(&bad), Err(OccupancyError::NegativeEntry(1)));
        // raw mode skips renormalization
        let half = OccupancyProfile { values: vec![0.25, 0.25] };
        assert!((entropy(&half).unwrap().value - 2f64.ln()).abs() < 1e-15);
        let raw = entropy_with(&half, EntropyMode::Raw).unwrap().value;
        assert!((raw - 0.5 * 4f64.ln()).abs() < 1e-15);
        // generic over f32
        let u32p = OccupancyProfile::<f32> { values: vec![0.25; 4] };
        assert!((entropy(&u32p).unwrap().value - 4f32.ln()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn entropy_bounded(values in proptest::collection::vec(0.0f64..1.0, 1..300)) {
            let n = values.len();
            let e = entropy(&OccupancyProfile { values }).unwrap().value;
            prop_assert!(e >= 0.0);
            prop_assert!(e <= (n as f64).ln() + 1e-12);
        }

        #[test]
        fn belief_monotone(grids in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 12), 1..8)) {
            let mut belief = BeliefState::initial(OccupancyGrid { width_px: 4, height_px: 3, data: grids[0].clone() });
            for g in &grids[1..] {
                let next = update_belief(&belief, &OccupancyGrid { width_px: 4, height_px: 3, data: g.clone() }).unwrap();
                for (a, b) in next.history_min.data.iter().zip(&belief.history_min.data) {
                    prop_assert!(a <= b);
                }
                belief = next;
            }
        }
    }
}
