//! Orthographic front-view depth rendering and observation segmentation.
//!
//! The camera looks along `+z`. Pixel `(i, j)` samples the ray at lateral
//! position `x = (i + 0.5) * pitch_x` and height `y = (j + 0.5) * pitch_y`;
//! row `j = 0` is the bottom of the shelf. Depth is the `z` at which the ray
//! first enters an object's footprint, provided the object is at least `y`
//! tall, and `back_depth` where nothing is hit.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scene::Scene;
use crate::Footprint;

pub const DEFAULT_IMAGE_SIZE: usize = 256;
pub const DEFAULT_DISCONTINUITY_THRESHOLD: f64 = 0.02;
const NO_OWNER: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("image dimensions must be non-zero, got {0}x{1}")]
    ZeroSize(usize, usize),
    #[error("scene has no target object")]
    MissingTarget,
    #[error("target renders to zero pixels at this resolution")]
    DegenerateTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width_px: usize,
    pub height_px: usize,
    /// Row-major, `data[j * width_px + i]`.
    pub data: Vec<f64>,
    pub pixel_pitch_x: f64,
    pub pixel_pitch_y: f64,
    pub back_depth: f64,
}

impl DepthImage {
    pub fn background(width_px: usize, height_px: usize, pitch_x: f64, pitch_y: f64, back_depth: f64) -> Self {
        Self {
            width_px,
            height_px,
            data: vec![back_depth; width_px * height_px],
            pixel_pitch_x: pitch_x,
            pixel_pitch_y: pitch_y,
            back_depth,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.width_px + i]
    }

    #[inline]
    pub fn is_background(&self, idx: usize) -> bool {
        self.data[idx] == self.back_depth
    }

    pub fn column_center_x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.pixel_pitch_x
    }

    /// Smallest depth in column `i` over all rows.
    pub fn column_min(&self, i: usize) -> f64 {
        (0..self.height_px).fold(f64::INFINITY, |m, j| m.min(self.get(i, j)))
    }

    /// Hex SHA-256 of the raw little-endian depth values.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.width_px as u64).to_le_bytes());
        h.update((self.height_px as u64).to_le_bytes());
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Binary 16-bit PGM. Levels map depth linearly:
    /// `level = round(depth / back_depth * 65535)`, so the back wall is white.
    /// The top image row is the highest pixel row.
    pub fn to_pgm(&self) -> Vec<u8> {
        let scale = 65535.0 / self.back_depth;
        let levels: Vec<u16> = self.data.iter().map(|d| (d * scale).round().clamp(0.0, 65535.0) as u16).collect();
        encode_pgm16(self.width_px, self.height_px, &levels)
    }
}

/// Encodes row-major, bottom-row-first `levels` as a binary P5 graymap with
/// maxval 65535 (big-endian samples, top row first).
pub fn encode_pgm16(width: usize, height: usize, levels: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(width * height * 2);
    for j in (0..height).rev() {
        for i in 0..width {
            out.extend_from_slice(&levels[j * width + i].to_be_bytes());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    pub width_px: usize,
    pub height_px: usize,
    pub membership: Vec<bool>,
}

impl PixelMask {
    pub fn empty(width_px: usize, height_px: usize) -> Self {
        Self { width_px, height_px, membership: vec![false; width_px * height_px] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.membership[j * self.width_px + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.membership[j * self.width_px + i] = v;
    }

    pub fn count(&self) -> usize {
        self.membership.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.membership.iter().any(|b| *b)
    }

    /// Columns containing at least one member pixel.
    pub fn columns(&self) -> Vec<bool> {
        let mut cols = vec![false; self.width_px];
        for (idx, m) in self.membership.iter().enumerate() {
            if *m {
                cols[idx % self.width_px] = true;
            }
        }
        cols
    }
}

/// Number of image rows an object of height `h` covers.
pub fn rows_covered(h: f64, pitch_y: f64, height_px: usize) -> usize {
    (0..height_px).take_while(|&j| (j as f64 + 0.5) * pitch_y <= h).count()
}

/// Depth at which the ray at lateral position `x` enters `fp`.
#[inline]
pub fn entry_depth(fp: &Footprint, x: f64) -> Option<f64> {
    fp.vertical_line_span(x).map(|(lo, _)| lo)
}

/// `(column, entry depth)` for every image column whose centre ray hits `fp`.
pub fn footprint_columns(fp: &Footprint, width_px: usize, pitch_x: f64) -> Vec<(usize, f64)> {
    let b = fp.bounds();
    let first = ((b.min_x / pitch_x - 0.5).ceil().max(1.0) as usize - 1).min(width_px);
    let mut out = Vec::new();
    for i in first..width_px {
        let x = (i as f64 + 0.5) * pitch_x;
        if x > b.max_x {
            break;
        }
        if let Some(z) = entry_depth(fp, x) {
            out.push((i, z));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Rendering {
    pub depth: DepthImage,
    /// Object id owning each pixel, `u32::MAX` for background.
    owners: Vec<u32>,
    object_ids: Vec<u32>,
}

impl Rendering {
    pub fn owner(&self, i: usize, j: usize) -> Option<u32> {
        let o = self.owners[j * self.depth.width_px + i];
        (o != NO_OWNER).then_some(o)
    }

    pub fn mask(&self, id: u32) -> PixelMask {
        PixelMask {
            width_px: self.depth.width_px,
            height_px: self.depth.height_px,
            membership: self.owners.iter().map(|o| *o == id).collect(),
        }
    }

    /// One mask per scene object, including objects that are fully hidden.
    pub fn masks(&self) -> BTreeMap<u32, PixelMask> {
        self.object_ids.iter().map(|&id| (id, self.mask(id))).collect()
    }
}

pub fn render_depth(scene: &Scene, width_px: usize, height_px: usize) -> Result<Rendering, RenderError> {
    if width_px == 0 || height_px == 0 {
        return Err(RenderError::ZeroSize(width_px, height_px));
    }
    let shelf = &scene.shelf;
    let pitch_x = shelf.width / width_px as f64;
    let pitch_y = shelf.height / height_px as f64;
    let mut depth = DepthImage::background(width_px, height_px, pitch_x, pitch_y, shelf.back_depth());
    let mut owners = vec![NO_OWNER; width_px * height_px];

    let posed: Vec<(u32, Footprint, usize)> = scene
        .objects
        .iter()
        .map(|o| (o.id, o.posed(), rows_covered(o.height, pitch_y, height_px)))
        .collect();
    for (id, fp, rows) in &posed {
        for (i, z) in footprint_columns(fp, width_px, pitch_x) {
            for j in 0..*rows {
                let idx = j * width_px + i;
                if z < depth.data[idx] {
                    depth.data[idx] = z;
                    owners[idx] = *id;
                }
            }
        }
    }
    Ok(Rendering { depth, owners, object_ids: scene.objects.iter().map(|o| o.id).collect() })
}

/// Pixels where the target is the nearest surface.
pub fn target_visible_mask(scene: &Scene, width_px: usize, height_px: usize) -> Result<PixelMask, RenderError> {
    if scene.target().is_none() {
        return Err(RenderError::MissingTarget);
    }
    Ok(render_depth(scene, width_px, height_px)?.mask(scene.target_id))
}

/// Share of the target's unoccluded projection that is currently frontmost.
pub fn visible_fraction(scene: &Scene, width_px: usize, height_px: usize) -> Result<f64, RenderError> {
    let visible = target_visible_mask(scene, width_px, height_px)?.count();
    let alone = target_visible_mask(&scene.target_only(), width_px, height_px)?.count();
    if alone == 0 {
        return Err(RenderError::DegenerateTarget);
    }
    Ok(visible as f64 / alone as f64)
}

/// A connected region of the observation bounded by depth discontinuities.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: u32,
    /// Row-major pixel indices in discovery order.
    pub pixels: Vec<u32>,
    pub width_px: usize,
    pub height_px: usize,
    /// Inclusive column range `[x_min_px, x_max_px]`.
    pub column_span: (usize, usize),
    /// Minimum observed depth.
    pub front_depth: f64,
    /// Maximum observed depth.
    pub max_depth: f64,
    /// Estimated far extent: observed max depth plus observed width.
    pub far_depth: f64,
}

impl Segment {
    /// Depth of the object's centre under the same symmetric-object guess as
    /// `far_depth`: front surface plus half the observed width.
    pub fn centre_depth(&self, pitch_x: f64) -> f64 {
        self.front_depth + 0.5 * self.column_count() as f64 * pitch_x
    }

    pub fn mask(&self) -> PixelMask {
        let mut m = PixelMask::empty(self.width_px, self.height_px);
        for &p in &self.pixels {
            m.membership[p as usize] = true;
        }
        m
    }

    pub fn column_count(&self) -> usize {
        self.column_span.1 - self.column_span.0 + 1
    }
}

/// Segments plus the per-pixel label image (`u32::MAX` for background).
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub labels: Vec<u32>,
    pub segments: Vec<Segment>,
}

impl Segmentation {
    #[inline]
    pub fn label(&self, idx: usize) -> Option<u32> {
        let l = self.labels[idx];
        (l != NO_OWNER).then_some(l)
    }
}

/// 4-connected components of non-background pixels, where neighbours join
/// iff their depths differ by less than `threshold`. Segment ids follow
/// column-major discovery order, so lower ids start further left.
pub fn segment_labels(depth: &DepthImage, threshold: f64) -> Segmentation {
    let (w, h) = (depth.width_px, depth.height_px);
    let mut labels = vec![NO_OWNER; w * h];
    let mut segments = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..w {
        for j in 0..h {
            let seed = j * w + i;
            if labels[seed] != NO_OWNER || depth.is_background(seed) {
                continue;
            }
            let id = segments.len() as u32;
            labels[seed] = id;
            stack.push(seed);
            let mut pixels = Vec::new();
            let (mut c0, mut c1) = (i, i);
            let (mut front, mut back) = (f64::INFINITY, f64::NEG_INFINITY);
            while let Some(p) = stack.pop() {
                pixels.push(p as u32);
                let d = depth.data[p];
                front = front.min(d);
                back = back.max(d);
                let (pi, pj) = (p % w, p / w);
                c0 = c0.min(pi);
                c1 = c1.max(pi);
                let mut visit = |q: usize| {
                    if labels[q] == NO_OWNER && !depth.is_background(q) && (depth.data[q] - d).abs() < threshold {
                        labels[q] = id;
                        stack.push(q);
                    }
                };
                if pi > 0 {
                    visit(p - 1);
                }
                if pi + 1 < w {
                    visit(p + 1);
                }
                if pj > 0 {
                    visit(p - w);
                }
                if pj + 1 < h {
                    visit(p + w);
                }
            }
            let width_m = (c1 - c0 + 1) as f64 * depth.pixel_pitch_x;
            segments.push(Segment {
                id,
                pixels,
                width_px: w,
                height_px: h,
                column_span: (c0, c1),
                front_depth: front,
                max_depth: back,
                far_depth: back + width_m,
            });
        }
    }
    Segmentation { labels, segments }
}

pub fn segment_observation(depth: &DepthImage, discontinuity_threshold: f64) -> Vec<Segment> {
    segment_labels(depth, discontinuity_threshold).segments
}
