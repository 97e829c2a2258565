//! Convex footprint math in the shelf's top-down `x`–`z` plane.
//!
//! `x` runs laterally (positive to the camera's right) and `z` runs into
//! the shelf, `0` at the shelf front. Everything here is generic over the
//! scalar type; the crate root exports `f64` aliases.
//!
//! Intersection uses closed-set semantics: polygons that merely touch are
//! considered intersecting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("footprint needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("footprint vertex {0} is not finite")]
    NonFinite(usize),
    #[error("footprint is degenerate (area {0})")]
    Degenerate(f64),
    #[error("footprint vertices are not counter-clockwise")]
    NotCounterClockwise,
    #[error("footprint is not convex at vertex {0}")]
    NotConvex(usize),
    #[error("sweep inputs already intersect")]
    InitiallyIntersecting,
    #[error("sweep distance must be finite and non-negative, got {0}")]
    InvalidDistance(f64),
    #[error("regular polygon needs radius > 0 and at least 3 sides")]
    InvalidRegularPolygon,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub z: T,
}

impl<T: Real> Point2<T> {
    #[inline]
    pub fn new(x: T, z: T) -> Self {
        Self { x, z }
    }

    #[inline]
    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.z - o.z)
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.z + o.z)
    }

    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.z - self.z * o.x
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.z * o.z
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.z.is_finite()
    }
}

/// Planar rigid transform: rotate about the local origin, then translate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2<T> {
    pub translation: Point2<T>,
    /// Radians in `[0, 2π)`.
    pub rotation: T,
}

impl<T: Real> Pose2<T> {
    /// Builds a pose, wrapping the rotation into `[0, 2π)`.
    pub fn new(x: T, z: T, rotation: T) -> Self {
        Self {
            translation: Point2::new(x, z),
            rotation: wrap_angle(rotation),
        }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn apply(&self, p: Point2<T>) -> Point2<T> {
        let (s, c) = self.rotation.sin_cos();
        Point2::new(
            self.translation.x + c * p.x - s * p.z,
            self.translation.z + s * p.x + c * p.z,
        )
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let mut t = theta % tau;
    if t < T::zero() {
        t = t + tau;
    }
    if t >= tau {
        t = T::zero();
    }
    t
}

/// Lateral push direction along the `x` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Left, Direction::Right];

    #[inline]
    pub fn sign<T: Real>(self) -> T {
        match self {
            Direction::Left => -T::one(),
            Direction::Right => T::one(),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

/// Axis-aligned bounds of a footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<T> {
    pub min_x: T,
    pub max_x: T,
    pub min_z: T,
    pub max_z: T,
}

impl<T: Real> Bounds<T> {
    pub fn overlaps(&self, o: &Self) -> bool {
        self.min_x <= o.max_x && o.min_x <= self.max_x && self.min_z <= o.max_z && o.min_z <= self.max_z
    }

    pub fn width(&self) -> T {
        self.max_x - self.min_x
    }
}

/// Convex, counter-clockwise, non-degenerate polygon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Footprint<T> {
    vertices: Vec<Point2<T>>,
}

impl<T: Real> Footprint<T> {
    pub fn new(vertices: Vec<Point2<T>>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        let area = signed_area(&vertices);
        let scale = vertices
            .iter()
            .fold(T::zero(), |m, v| m.max(v.x.abs()).max(v.z.abs()))
            .max(T::min_positive_value());
        let eps = T::epsilon() * T::lit(16.0) * scale * scale;
        if area.abs() <= eps {
            return Err(GeometryError::Degenerate(area.to_f64_lossy()));
        }
        if area < T::zero() {
            return Err(GeometryError::NotCounterClockwise);
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if b.sub(a).cross(c.sub(b)) < -eps {
                return Err(GeometryError::NotConvex((i + 1) % n));
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned `width` × `depth` rectangle centred on the local origin.
    pub fn rectangle(width: T, depth: T) -> Result<Self, GeometryError> {
        let hw = width / T::lit(2.0);
        let hd = depth / T::lit(2.0);
        Self::new(vec![
            Point2::new(-hw, -hd),
            Point2::new(hw, -hd),
            Point2::new(hw, hd),
            Point2::new(-hw, hd),
        ])
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn area(&self) -> T {
        signed_area(&self.vertices)
    }

    pub fn bounds(&self) -> Bounds<T> {
        let first = self.vertices[0];
        self.vertices.iter().skip(1).fold(
            Bounds { min_x: first.x, max_x: first.x, min_z: first.z, max_z: first.z },
            |b, v| Bounds {
                min_x: b.min_x.min(v.x),
                max_x: b.max_x.max(v.x),
                min_z: b.min_z.min(v.z),
                max_z: b.max_z.max(v.z),
            },
        )
    }

    /// Translation along `x` only; the cheap path used by pushes.
    pub fn translated_x(&self, dx: T) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| Point2::new(v.x + dx, v.z)).collect(),
        }
    }

    /// `z` extent of the intersection with the vertical line `x = c`, if any.
    pub fn vertical_line_span(&self, c: T) -> Option<(T, T)> {
        let n = self.vertices.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let (x0, x1) = if p.x <= q.x { (p.x, q.x) } else { (q.x, p.x) };
            if c < x0 || c > x1 {
                continue;
            }
            if p.x == q.x {
                lo = lo.min(p.z.min(q.z));
                hi = hi.max(p.z.max(q.z));
            } else {
                let z = p.z + (c - p.x) * (q.z - p.z) / (q.x - p.x);
                lo = lo.min(z);
                hi = hi.max(z);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for Footprint<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw<T> {
            vertices: Vec<Point2<T>>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        Footprint::new(raw.vertices).map_err(serde::de::Error::custom)
    }
}

fn signed_area<T: Real>(vs: &[Point2<T>]) -> T {
    let n = vs.len();
    let mut acc = T::zero();
    for i in 0..n {
        acc = acc + vs[i].cross(vs[(i + 1) % n]);
    }
    acc / T::lit(2.0)
}

/// Rotates then translates every vertex. Rotation preserves orientation, so
/// the result is still a valid footprint.
pub fn transform_footprint<T: Real>(fp: &Footprint<T>, pose: &Pose2<T>) -> Footprint<T> {
    Footprint {
        vertices: fp.vertices.iter().map(|&v| pose.apply(v)).collect(),
    }
}

/// Regular `sides`-gon with circumradius `radius`, centred on the origin,
/// first vertex on the `+x` axis.
pub fn regular_polygon<T: Real>(radius: T, sides: usize) -> Result<Footprint<T>, GeometryError> {
    if !(radius > T::zero()) || sides < 3 {
        return Err(GeometryError::InvalidRegularPolygon);
    }
    let step = T::TAU() / T::lit(sides as f64);
    let vertices = (0..sides)
        .map(|k| {
            let (s, c) = (step * T::lit(k as f64)).sin_cos();
            Point2::new(radius * c, radius * s)
        })
        .collect();
    Footprint::new(vertices)
}

fn project<T: Real>(vs: &[Point2<T>], axis: Point2<T>) -> (T, T) {
    vs.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
        let d = v.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

fn edge_normals<T: Real>(vs: &[Point2<T>]) -> impl Iterator<Item = Point2<T>> + '_ {
    let n = vs.len();
    (0..n).map(move |i| {
        let e = vs[(i + 1) % n].sub(vs[i]);
        Point2::new(e.z, -e.x)
    })
}

/// Separating-axis test on closed polygons: touching counts as intersecting.
pub fn polygons_intersect<T: Real>(a: &Footprint<T>, b: &Footprint<T>) -> bool {
    if !a.bounds().overlaps(&b.bounds()) {
        return false;
    }
    for axis in edge_normals(&a.vertices).chain(edge_normals(&b.vertices)) {
        let (a0, a1) = project(&a.vertices, axis);
        let (b0, b1) = project(&b.vertices, axis);
        if a1 < b0 || b1 < a0 {
            return false;
        }
    }
    true
}

/// Minimum overlap over all separating-axis candidates, in length units.
/// Positive means the interiors overlap by that much; zero is touching;
/// negative is the separation along the best axis.
pub fn penetration_depth<T: Real>(a: &Footprint<T>, b: &Footprint<T>) -> T {
    let mut best = T::infinity();
    for axis in edge_normals(&a.vertices).chain(edge_normals(&b.vertices)) {
        let len = axis.dot(axis).sqrt();
        let unit = Point2::new(axis.x / len, axis.z / len);
        let (a0, a1) = project(&a.vertices, unit);
        let (b0, b1) = project(&b.vertices, unit);
        let overlap = a1.min(b1) - a0.max(b0);
        best = best.min(overlap);
    }
    best
}

fn horizontal_hit<T: Real>(p: Point2<T>, q: Point2<T>, z: T) -> Option<(T, T)> {
    let (z0, z1) = if p.z <= q.z { (p.z, q.z) } else { (q.z, p.z) };
    if z < z0 || z > z1 {
        return None;
    }
    if p.z == q.z {
        Some((p.x.min(q.x), p.x.max(q.x)))
    } else {
        let x = p.x + (z - p.z) * (q.x - p.x) / (q.z - p.z);
        Some((x, x))
    }
}

/// Range of translations `t` (along `direction`) for which `moving`
/// shifted by `t` touches or overlaps `obstacle`. `None` when the swept
/// line never meets the obstacle. For convex inputs the contact set is an
/// interval whose endpoints are always vertex/edge contacts, so casting
/// rays from every vertex of each polygon against the other's edges is
/// exact.
pub fn contact_interval<T: Real>(
    moving: &Footprint<T>,
    obstacle: &Footprint<T>,
    direction: Direction,
) -> Option<(T, T)> {
    let s: T = direction.sign();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut record = |t: T| {
        lo = lo.min(t);
        hi = hi.max(t);
    };
    let mv = &moving.vertices;
    let ob = &obstacle.vertices;
    for v in mv {
        for i in 0..ob.len() {
            if let Some((x0, x1)) = horizontal_hit(ob[i], ob[(i + 1) % ob.len()], v.z) {
                record((x0 - v.x) * s);
                record((x1 - v.x) * s);
            }
        }
    }
    for w in ob {
        for i in 0..mv.len() {
            if let Some((x0, x1)) = horizontal_hit(mv[i], mv[(i + 1) % mv.len()], w.z) {
                record((w.x - x0) * s);
                record((w.x - x1) * s);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Smallest translation in `[0, max_d]` along `direction` at which `moving`
/// first touches `obstacle`; `max_d` when no contact happens in range.
pub fn sweep_contact_distance<T: Real>(
    moving: &Footprint<T>,
    obstacle: &Footprint<T>,
    direction: Direction,
    max_d: T,
) -> Result<T, GeometryError> {
    if !(max_d >= T::zero()) || !max_d.is_finite() {
        return Err(GeometryError::InvalidDistance(max_d.to_f64_lossy()));
    }
    if polygons_intersect(moving, obstacle) {
        return Err(GeometryError::InitiallyIntersecting);
    }
    Ok(match contact_interval(moving, obstacle, direction) {
        Some((lo, _)) if lo >= T::zero() => lo.min(max_d),
        _ => max_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit_square() -> Footprint<f64> {
        Footprint::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn shifted(fp: &Footprint<f64>, dx: f64, dz: f64) -> Footprint<f64> {
        transform_footprint(fp, &Pose2::new(dx, dz, 0.0))
    }

    fn same_vertex_set(a: &Footprint<f64>, b: &Footprint<f64>, tol: f64) -> bool {
        a.vertices().len() == b.vertices().len()
            && a.vertices().iter().all(|p| {
                b.vertices().iter().any(|q| (p.x - q.x).abs() < tol && (p.z - q.z).abs() < tol)
            })
    }

    #[test]
    fn identity_transform() {
        let sq = unit_square();
        assert_eq!(transform_footprint(&sq, &Pose2::identity()), sq);
    }

    #[test]
    fn quarter_turn_of_centred_square() {
        let sq = Footprint::rectangle(1.0, 1.0).unwrap();
        let turned = transform_footprint(&sq, &Pose2::new(0.0, 0.0, PI / 2.0));
        assert!(same_vertex_set(&sq, &turned, 1e-12));
    }

    #[test]
    fn pure_translation() {
        let tri = Footprint::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let moved = transform_footprint(&tri, &Pose2::new(2.0, 3.0, 0.0));
        assert_eq!(
            moved.vertices(),
            &[Point2::new(2.0, 3.0), Point2::new(3.0, 3.0), Point2::new(2.0, 4.0)]
        );
    }

    #[test]
    fn rejects_bad_footprints() {
        assert_eq!(
            Footprint::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(GeometryError::TooFewVertices(2))
        );
        assert!(matches!(
            Footprint::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)]),
            Err(GeometryError::Degenerate(_))
        ));
        assert_eq!(
            Footprint::new(vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)]),
            Err(GeometryError::NotCounterClockwise)
        );
        let dart = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.2),
            Point2::new(1.0, 2.0),
        ];
        assert!(matches!(Footprint::new(dart), Err(GeometryError::NotConvex(_))));
        assert!(matches!(
            Footprint::new(vec![Point2::new(f64::NAN, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]),
            Err(GeometryError::NonFinite(0))
        ));
    }

    #[test]
    fn intersect_basic_cases() {
        let a = unit_square();
        assert!(!polygons_intersect(&a, &shifted(&a, 2.0, 0.0)));
        assert!(polygons_intersect(&a, &shifted(&a, 0.5, 0.0)));
        // closed sets: edge contact intersects
        assert!(polygons_intersect(&a, &shifted(&a, 1.0, 0.0)));
        assert!(polygons_intersect(&a, &shifted(&a, 1.0, 1.0)));
        assert!(!polygons_intersect(&a, &shifted(&a, 1.0 + 1e-9, 0.0)));
    }

    #[test]
    fn diamond_gap_found_by_sat() {
        // AABBs overlap but the diagonal edge separates them.
        let diamond = regular_polygon(1.0, 4).unwrap();
        let sq = shifted(&Footprint::rectangle(1.0, 1.0).unwrap(), 1.2, 1.2);
        assert!(!polygons_intersect(&diamond, &sq));
        assert!(penetration_depth(&diamond, &sq) < 0.0);
    }

    #[test]
    fn sweep_axis_aligned() {
        let a = unit_square();
        let b = shifted(&a, 3.0, 0.0);
        assert_eq!(sweep_contact_distance(&a, &b, Direction::Right, 10.0).unwrap(), 2.0);
        assert_eq!(sweep_contact_distance(&a, &b, Direction::Right, 1.0).unwrap(), 1.0);
        assert_eq!(sweep_contact_distance(&a, &b, Direction::Left, 10.0).unwrap(), 10.0);
        assert_eq!(sweep_contact_distance(&b, &a, Direction::Left, 10.0).unwrap(), 2.0);
        let above = shifted(&a, 3.0, 5.0);
        assert_eq!(sweep_contact_distance(&a, &above, Direction::Right, 10.0).unwrap(), 10.0);
    }

    #[test]
    fn sweep_errors() {
        let a = unit_square();
        assert_eq!(
            sweep_contact_distance(&a, &shifted(&a, 0.5, 0.0), Direction::Right, 1.0),
            Err(GeometryError::InitiallyIntersecting)
        );
        assert!(matches!(
            sweep_contact_distance(&a, &shifted(&a, 3.0, 0.0), Direction::Right, -1.0),
            Err(GeometryError::InvalidDistance(_))
        ));
    }

    /// Translates in 1e-5 steps and returns the first step that intersects.
    fn stepped_contact(m: &Footprint<f64>, o: &Footprint<f64>, dir: Direction, max_d: f64) -> f64 {
        let step = 1e-5;
        let s: f64 = dir.sign();
        let n = (max_d / step).ceil() as usize;
        for k in 0..=n {
            let t = (k as f64 * step).min(max_d);
            if polygons_intersect(&m.translated_x(s * t), o) {
                return t;
            }
        }
        max_d
    }

    #[test]
    fn sweep_rotated_squares_match_stepped_scan() {
        let sq = Footprint::rectangle(0.1, 0.1).unwrap();
        let m = transform_footprint(&sq, &Pose2::new(0.1, 0.2, 0.4));
        let o = transform_footprint(&sq, &Pose2::new(0.35, 0.24, 1.1));
        let exact = sweep_contact_distance(&m, &o, Direction::Right, 0.5).unwrap();
        let brute = stepped_contact(&m, &o, Direction::Right, 0.5);
        assert!(exact < 0.5);
        assert!((exact - brute).abs() < 1e-4, "exact {exact} brute {brute}");
    }

    #[test]
    fn regular_polygon_cases() {
        let sq = regular_polygon(1.0f64, 4).unwrap();
        assert!(sq.vertices().iter().all(|v| ((v.x * v.x + v.z * v.z).sqrt() - 1.0).abs() < 1e-12));
        let tri = regular_polygon(1.0f64, 3).unwrap();
        let v = tri.vertices();
        let side = ((v[1].x - v[0].x).powi(2) + (v[1].z - v[0].z).powi(2)).sqrt();
        assert!((side - 3f64.sqrt()).abs() < 1e-12);
        let cyl = regular_polygon(0.03, 16).unwrap();
        let inscribed = 8.0 * 0.03 * 0.03 * (2.0 * PI / 16.0).sin();
        assert!((cyl.area() - inscribed).abs() < 1e-15);
        assert!(cyl.area() < PI * 0.03 * 0.03);
        assert_eq!(regular_polygon(0.0, 5), Err(GeometryError::InvalidRegularPolygon));
        assert_eq!(regular_polygon(1.0, 2), Err(GeometryError::InvalidRegularPolygon));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Footprint::<f32>::rectangle(1.0, 1.0).unwrap();
        let b = a.translated_x(3.0);
        assert_eq!(sweep_contact_distance(&a, &b, Direction::Right, 10.0).unwrap(), 2.0);
        assert!(polygons_intersect(&a, &a.translated_x(1.0)));
    }

    #[test]
    fn vertical_line_span_of_square() {
        let sq = unit_square();
        assert_eq!(sq.vertical_line_span(0.5), Some((0.0, 1.0)));
        assert_eq!(sq.vertical_line_span(1.0), Some((0.0, 1.0)));
        assert_eq!(sq.vertical_line_span(1.5), None);
        let d = regular_polygon(1.0f64, 4).unwrap();
        let (lo, hi) = d.vertical_line_span(0.5).unwrap();
        assert!((lo + 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
    }

    fn arb_polygon() -> impl Strategy<Value = Footprint<f64>> {
        (
            prop_oneof![Just(3usize), Just(4), Just(5), Just(6), Just(16)],
            0.01f64..0.1,
            0.2f64..1.0,
            0.0f64..(2.0 * PI),
            -0.3f64..0.3,
            -0.3f64..0.3,
        )
            .prop_map(|(sides, r, stretch, rot, x, z)| {
                let base = regular_polygon(r, sides).unwrap();
                let squashed = Footprint::new(
                    base.vertices().iter().map(|v| Point2::new(v.x, v.z * stretch)).collect(),
                )
                .unwrap();
                transform_footprint(&squashed, &Pose2::new(x, z, rot))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn intersect_is_symmetric(a in arb_polygon(), b in arb_polygon()) {
            prop_assert_eq!(polygons_intersect(&a, &b), polygons_intersect(&b, &a));
        }

        #[test]
        fn transform_preserves_area(a in arb_polygon(), x in -1.0f64..1.0, z in -1.0f64..1.0, th in 0.0f64..std::f64::consts::TAU) {
            let moved = transform_footprint(&a, &Pose2::new(x, z, th));
            prop_assert!(((moved.area() - a.area()) / a.area()).abs() < 1e-9);
            prop_assert!(Footprint::new(moved.vertices().to_vec()).is_ok());
        }

        #[test]
        fn sweep_matches_stepped_scan(a in arb_polygon(), b in arb_polygon(), right in any::<bool>()) {
            prop_assume!(!polygons_intersect(&a, &b));
            let dir = if right { Direction::Right } else { Direction::Left };
            let max_d = 0.8;
            let exact = sweep_contact_distance(&a, &b, dir, max_d).unwrap();
            let brute = stepped_contact(&a, &b, dir, max_d);
            prop_assert!((exact - brute).abs() < 1e-4, "exact {} brute {}", exact, brute);
            if exact < max_d {
                let s: f64 = dir.sign();
                if exact > 1e-6 {
                    prop_assert!(!polygons_intersect(&a.translated_x(s * (exact - 1e-6)), &b));
                }
                prop_assert!(polygons_intersect(&a.translated_x(s * (exact + 1e-6)), &b));
            }
        }
    }
}
