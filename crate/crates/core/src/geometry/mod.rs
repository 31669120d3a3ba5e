//! Planar road geometry: interpolation, resampling, alignment and the
//! geometric derivatives (angles, curvature, segments, frames, features,
//! hulls) used by the distance functions and direct measures.

mod curvature;
mod features;
mod hull;
mod intersect;
mod segments;
mod spline;

pub use curvature::{complexity_frames, curvature_profile, ComplexityVector, CurvatureProfile};
pub use features::{road_feature_vector, FeatureConfig, RoadFeatureVector, FEATURE_COUNT};
pub use hull::{convex_hull, convex_hull_area};
pub use intersect::{segments_intersect, self_intersects};
pub use segments::{segment_set, SegmentBucketing, SegmentSet};
pub use spline::interpolate_road;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Lane width assumed when a road file does not carry one.
pub const DEFAULT_LANE_WIDTH: f64 = 4.0;

/// Minimum distance between consecutive control points.
pub const MIN_POINT_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate road: {0}")]
    DegenerateRoad(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("shape mismatch: {left} vs {right} points")]
    ShapeMismatch { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates by `angle` radians about `center`.
    pub fn rotate_about(self, center: Point, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        let d = self.sub(center);
        Point::new(center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// A road as delivered by a generator: an ordered list of control points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPointRoad {
    pub id: String,
    pub control_points: Vec<Point>,
    #[serde(default = "default_lane_width")]
    pub lane_width: f64,
}

fn default_lane_width() -> f64 {
    DEFAULT_LANE_WIDTH
}

impl ControlPointRoad {
    pub fn new(id: impl Into<String>, control_points: Vec<Point>) -> Self {
        Self {
            id: id.into(),
            control_points,
            lane_width: DEFAULT_LANE_WIDTH,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.control_points.len() < 2 {
            return Err(GeometryError::DegenerateRoad(format!(
                "{}: {} control points, need at least 2",
                self.id,
                self.control_points.len()
            )));
        }
        if let Some(i) = self.control_points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(format!(
                "{}: control point {i}",
                self.id
            )));
        }
        for (i, w) in self.control_points.windows(2).enumerate() {
            if w[0].distance(w[1]) <= MIN_POINT_SEPARATION {
                return Err(GeometryError::DegenerateRoad(format!(
                    "{}: control points {i} and {} coincide",
                    self.id,
                    i + 1
                )));
            }
        }
        if !(self.lane_width.is_finite() && self.lane_width > 0.0) {
            return Err(GeometryError::NonFinite(format!("{}: lane width", self.id)));
        }
        Ok(())
    }
}

/// A resampled planar polyline with its cumulative arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadGeometry {
    id: String,
    points: Vec<Point>,
    cum_arclength: Vec<f64>,
}

impl RoadGeometry {
    /// Builds a geometry from an ordered point list. Requires at least three
    /// finite points and no repeated consecutive points.
    pub fn new(id: impl Into<String>, points: Vec<Point>) -> Result<Self, GeometryError> {
        let id = id.into();
        if points.len() < 3 {
            return Err(GeometryError::DegenerateRoad(format!(
                "{id}: {} points, need at least 3",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(format!("{id}: point {i}")));
        }
        let mut cum = Vec::with_capacity(points.len());
        cum.push(0.0);
        let mut total = 0.0;
        for (i, w) in points.windows(2).enumerate() {
            let d = w[0].distance(w[1]);
            if d <= MIN_POINT_SEPARATION {
                return Err(GeometryError::DegenerateRoad(format!(
                    "{id}: repeated point at index {}",
                    i + 1
                )));
            }
            total += d;
            cum.push(total);
        }
        Ok(Self {
            id,
            points,
            cum_arclength: cum,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn cum_arclength(&self) -> &[f64] {
        &self.cum_arclength
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length(&self) -> f64 {
        *self.cum_arclength.last().expect("at least three points")
    }

    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().expect("at least three points")
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Point at arclength `s`, clamped to the road.
    pub fn point_at(&self, s: f64) -> Point {
        let cum = &self.cum_arclength;
        if s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length() {
            return self.end();
        }
        let i = cum.partition_point(|&c| c <= s).clamp(1, cum.len() - 1);
        let (s0, s1) = (cum[i - 1], cum[i]);
        self.points[i - 1].lerp(self.points[i], (s - s0) / (s1 - s0))
    }

    /// Applies a rotation about `center` followed by a translation.
    pub fn transformed(&self, center: Point, angle: f64, shift: Point) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| p.rotate_about(center, angle).add(shift))
            .collect();
        Self::new(self.id.clone(), points).expect("rigid motion preserves validity")
    }

    /// Mirror image across the x axis.
    pub fn mirrored(&self) -> Self {
        let points = self.points.iter().map(|p| Point::new(p.x, -p.y)).collect();
        Self::new(self.id.clone(), points).expect("reflection preserves validity")
    }

    /// Moves the start to the origin and rotates so the first segment points
    /// along +x.
    pub fn canonical(&self) -> Self {
        let start = self.start();
        let first = self.points[1].sub(start);
        let angle = -first.y.atan2(first.x);
        let (s, c) = angle.sin_cos();
        let points = self
            .points
            .iter()
            .map(|p| {
                let d = p.sub(start);
                Point::new(c * d.x - s * d.y, s * d.x + c * d.y)
            })
            .collect();
        Self::new(self.id.clone(), points).expect("rigid motion preserves validity")
    }
}

/// Resamples `g` to `n` points at equal arclength intervals.
pub fn resample_uniform(g: &RoadGeometry, n: usize) -> Result<RoadGeometry, GeometryError> {
    if n < 3 {
        return Err(GeometryError::DegenerateRoad(format!(
            "{}: resampling to {n} points, need at least 3",
            g.id
        )));
    }
    let total = g.length();
    if total < 1e-6 {
        return Err(GeometryError::DegenerateRoad(format!(
            "{}: length {total} too short to resample",
            g.id
        )));
    }
    let cum = &g.cum_arclength;
    let step = total / (n - 1) as f64;
    let mut out = Vec::with_capacity(n);
    let mut seg = 1;
    for k in 0..n {
        if k == n - 1 {
            out.push(g.end());
            break;
        }
        let s = k as f64 * step;
        while seg < cum.len() - 1 && cum[seg] < s {
            seg += 1;
        }
        let (s0, s1) = (cum[seg - 1], cum[seg]);
        let t = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        out.push(g.points[seg - 1].lerp(g.points[seg], t));
    }
    RoadGeometry::new(g.id.clone(), out)
}

/// Signed heading change between consecutive segments, in `(-π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSequence {
    pub angles: Vec<f64>,
}

impl AngleSequence {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Angle from segment direction `u` to segment direction `v`, in `(-π, π]`.
pub(crate) fn turn_between(u: Point, v: Point) -> f64 {
    let a = u.cross(v).atan2(u.dot(v));
    if a <= -PI {
        PI
    } else {
        a
    }
}

pub fn turning_angles(g: &RoadGeometry) -> Result<AngleSequence, GeometryError> {
    let pts = g.points();
    let mut angles = Vec::with_capacity(pts.len().saturating_sub(2));
    for (i, w) in pts.windows(3).enumerate() {
        let u = w[1].sub(w[0]);
        let v = w[2].sub(w[1]);
        if u.norm() <= MIN_POINT_SEPARATION || v.norm() <= MIN_POINT_SEPARATION {
            return Err(GeometryError::DegenerateRoad(format!(
                "{}: repeated point near index {}",
                g.id(),
                i + 1
            )));
        }
        angles.push(turn_between(u, v));
    }
    Ok(AngleSequence { angles })
}

/// Rotation angle about the shared start point that best maps `other` onto
/// `reference` in the least-squares sense, after translating `other` so the
/// start points coincide.
pub fn procrustes_rotation(
    reference: &RoadGeometry,
    other: &RoadGeometry,
) -> Result<f64, GeometryError> {
    if reference.len() != other.len() {
        return Err(GeometryError::ShapeMismatch {
            left: reference.len(),
            right: other.len(),
        });
    }
    let (r0, o0) = (reference.start(), other.start());
    let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
    for (r, o) in reference.points().iter().zip(other.points()) {
        let rv = r.sub(r0);
        let ov = o.sub(o0);
        sin_sum += ov.cross(rv);
        cos_sum += ov.dot(rv);
    }
    Ok(sin_sum.atan2(cos_sum))
}

/// Translates `other` onto the start of `reference` and rotates it about that
/// point by the least-squares angle. Inputs are not modified.
pub fn procrustes_align(
    reference: &RoadGeometry,
    other: &RoadGeometry,
) -> Result<RoadGeometry, GeometryError> {
    let angle = procrustes_rotation(reference, other)?;
    let (r0, o0) = (reference.start(), other.start());
    let (s, c) = angle.sin_cos();
    let points = other
        .points()
        .iter()
        .map(|p| {
            let d = p.sub(o0);
            Point::new(r0.x + c * d.x - s * d.y, r0.y + s * d.x + c * d.y)
        })
        .collect();
    RoadGeometry::new(other.id().to_string(), points)
}

/// Sum of squared point-to-point distances between equally sampled roads.
pub fn residual_sum_of_squares(a: &RoadGeometry, b: &RoadGeometry) -> Result<f64, GeometryError> {
    if a.len() != b.len() {
        return Err(GeometryError::ShapeMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a
        .points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| {
            let d = p.sub(*q);
            d.dot(d)
        })
        .sum())
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn straight(len: f64, n: usize) -> RoadGeometry {
        let pts = (0..n)
            .map(|i| Point::new(len * i as f64 / (n - 1) as f64, 0.0))
            .collect();
        RoadGeometry::new("straight", pts).unwrap()
    }

    /// Counter-clockwise arc of `radius` starting at the origin heading +x.
    pub fn arc(radius: f64, sweep: f64, n: usize) -> RoadGeometry {
        let pts = (0..n)
            .map(|i| {
                let t = sweep * i as f64 / (n - 1) as f64;
                Point::new(radius * t.sin(), radius * (1.0 - t.cos()))
            })
            .collect();
        RoadGeometry::new("arc", pts).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn resample_straight_is_uniform() {
        let g = straight(10.0, 3);
        let r = resample_uniform(&g, 5).unwrap();
        let xs: Vec<f64> = r.points().iter().map(|p| p.x).collect();
        for (x, want) in xs.iter().zip([0.0, 2.5, 5.0, 7.5, 10.0]) {
            assert!((x - want).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_is_idempotent_on_uniform_input() {
        // equal chord lengths: uniform in arclength of the polyline itself
        let g = arc(15.0, 2.0, 60);
        let again = resample_uniform(&g, g.len()).unwrap();
        for (p, q) in g.points().iter().zip(again.points()) {
            assert!(p.distance(*q) <= 1e-9);
        }
    }

    #[test]
    fn resample_quarter_circle_stays_on_circle() {
        let g = arc(10.0, FRAC_PI_2, 2000);
        let r = resample_uniform(&g, 100).unwrap();
        let center = Point::new(0.0, 10.0);
        for p in r.points() {
            assert!((p.distance(center) - 10.0).abs() < 1e-3);
        }
        assert!((r.length() - g.length()).abs() / g.length() < 1e-3);
    }

    #[test]
    fn resample_rejects_tiny_roads() {
        let g = RoadGeometry::new(
            "tiny",
            vec![Point::new(0.0, 0.0), Point::new(1e-7, 0.0), Point::new(2e-7, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            resample_uniform(&g, 10),
            Err(GeometryError::DegenerateRoad(_))
        ));
    }

    #[test]
    fn turning_angles_basic_shapes() {
        let s = turning_angles(&straight(10.0, 11)).unwrap();
        assert_eq!(s.len(), 9);
        assert!(s.angles.iter().all(|a| a.abs() < 1e-15));

        let l = RoadGeometry::new(
            "l",
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)],
        )
        .unwrap();
        let a = turning_angles(&l).unwrap();
        assert_eq!(a.angles.len(), 1);
        assert!((a.angles[0] - FRAC_PI_2).abs() < 1e-15);

        // regular 12-gon path: exterior angle 30 degrees
        let poly: Vec<Point> = (0..8)
            .map(|k| {
                let t = k as f64 * PI / 6.0;
                Point::new(t.cos(), t.sin())
            })
            .collect();
        let g = RoadGeometry::new("poly", poly).unwrap();
        for a in turning_angles(&g).unwrap().angles {
            assert!((a - PI / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reversal_wraps_to_plus_pi() {
        assert_eq!(turn_between(Point::new(1.0, 0.0), Point::new(-1.0, 0.0)), PI);
        assert_eq!(turn_between(Point::new(1.0, 0.0), Point::new(-1.0, -0.0)), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(3.0 * PI), PI);
    }

    #[test]
    fn procrustes_recovers_rigid_motion() {
        let r = resample_uniform(&arc(20.0, 1.3, 50), 100).unwrap();
        assert_eq!(
            residual_sum_of_squares(&r, &procrustes_align(&r, &r).unwrap()).unwrap(),
            0.0
        );
        let moved = r.transformed(r.start(), FRAC_PI_2, Point::new(5.0, -3.0));
        let aligned = procrustes_align(&r, &moved).unwrap();
        for (p, q) in r.points().iter().zip(aligned.points()) {
            assert!(p.distance(*q) < 1e-6);
        }
    }

    #[test]
    fn procrustes_rotation_matches_grid_search() {
        let r = resample_uniform(&arc(12.0, 2.0, 80), 60).unwrap();
        for theta in [-2.9, -1.0, 0.3, 1.7, 3.0] {
            let rotated = r.transformed(r.start(), theta, Point::default());
            let got = procrustes_rotation(&r, &rotated).unwrap();
            assert!((got + theta).abs() < 1e-6, "theta {theta} got {got}");

            // coarse-to-fine grid over the angle
            let rss = |a: f64| {
                let cand = rotated.transformed(rotated.start(), a, Point::default());
                residual_sum_of_squares(&r, &cand).unwrap()
            };
            let (mut lo, mut hi) = (-PI, PI);
            for _ in 0..8 {
                let step = (hi - lo) / 200.0;
                let best = (0..=200)
                    .map(|k| lo + k as f64 * step)
                    .min_by(|a, b| rss(*a).total_cmp(&rss(*b)))
                    .unwrap();
                lo = best - step;
                hi = best + step;
            }
            let grid = 0.5 * (lo + hi);
            assert!(wrap_angle(grid - got).abs() < 1e-6);
        }
    }

    #[test]
    fn procrustes_requires_equal_counts() {
        let a = straight(10.0, 5);
        let b = straight(10.0, 6);
        assert_eq!(
            procrustes_align(&a, &b).unwrap_err(),
            GeometryError::ShapeMismatch { left: 5, right: 6 }
        );
    }

    #[test]
    fn control_point_validation() {
        let ok = ControlPointRoad::new("a", vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]);
        assert!(ok.validate().is_ok());
        let dup = ControlPointRoad::new(
            "b",
            vec![Point::new(0.0, 0.0), Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
        );
        assert!(matches!(dup.validate(), Err(GeometryError::DegenerateRoad(_))));
        let nan = ControlPointRoad::new("c", vec![Point::new(0.0, f64::NAN), Point::new(1.0, 0.0)]);
        assert!(matches!(nan.validate(), Err(GeometryError::NonFinite(_))));
    }

    #[test]
    fn canonical_frame_removes_placement() {
        let g = resample_uniform(&arc(20.0, 1.0, 30), 40).unwrap();
        let moved = g.transformed(Point::new(3.0, 4.0), 2.2, Point::new(-7.0, 1.0));
        let (a, b) = (g.canonical(), moved.canonical());
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!(p.distance(*q) < 1e-9);
        }
        assert_eq!(a.start(), Point::new(0.0, 0.0));
    }
}
