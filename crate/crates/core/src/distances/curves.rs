//! Point-sequence distances: discrete Fréchet, dynamic time warping, area
//! between curves and partial curve mapping.

use super::DistanceError;
use crate::geometry::{segments_intersect, GeometryError, Point, RoadGeometry};

/// Discrete Fréchet distance (Eiter & Mannila dynamic program).
pub fn discrete_frechet(a: &RoadGeometry, b: &RoadGeometry) -> f64 {
    frechet_points(a.points(), b.points())
}

pub(crate) fn frechet_points(p: &[Point], q: &[Point]) -> f64 {
    let m = q.len();
    let mut prev = vec![0.0_f64; m];
    let mut cur = vec![0.0_f64; m];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            let d = pi.distance(*qj);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Dynamic time warping with Euclidean point cost, full window, summed cost.
pub fn dtw_distance(a: &RoadGeometry, b: &RoadGeometry) -> f64 {
    dtw_points(a.points(), b.points())
}

pub(crate) fn dtw_points(p: &[Point], q: &[Point]) -> f64 {
    let m = q.len();
    let mut prev = vec![0.0_f64; m];
    let mut cur = vec![0.0_f64; m];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            let d = pi.distance(*qj);
            cur[j] = d + match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * b.sub(a).cross(c.sub(a)).abs()
}

fn line_intersection(p1: Point, p2: Point, q1: Point, q2: Point) -> Option<Point> {
    let r = p2.sub(p1);
    let s = q2.sub(q1);
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let t = q1.sub(p1).cross(s) / denom;
    Some(p1.add(r.scale(t)))
}

/// Unsigned area of the strip cell a0 → a1 → b1 → b0. Self-crossing cells
/// (the curves cross, or the rungs cross) are split at the crossing point.
fn strip_cell_area(a0: Point, a1: Point, b0: Point, b1: Point) -> f64 {
    if segments_intersect(a0, a1, b0, b1) {
        if let Some(x) = line_intersection(a0, a1, b0, b1) {
            return triangle_area(a0, b0, x) + triangle_area(x, a1, b1);
        }
    }
    if segments_intersect(a0, b0, a1, b1) {
        if let Some(x) = line_intersection(a0, b0, a1, b1) {
            return triangle_area(a0, a1, x) + triangle_area(x, b0, b1);
        }
    }
    0.5 * (a0.cross(a1) + a1.cross(b1) + b1.cross(b0) + b0.cross(a0)).abs()
}

/// Total area of the quadrilateral strip between corresponding points.
pub fn area_between_curves(a: &RoadGeometry, b: &RoadGeometry) -> Result<f64, DistanceError> {
    let (p, q) = (a.points(), b.points());
    if p.len() != q.len() {
        return Err(GeometryError::ShapeMismatch {
            left: p.len(),
            right: q.len(),
        }
        .into());
    }
    // Cells are evaluated relative to their own centre to limit cancellation.
    Ok((0..p.len() - 1)
        .map(|i| {
            let o = p[i].add(p[i + 1]).add(q[i]).add(q[i + 1]).scale(0.25);
            strip_cell_area(p[i].sub(o), p[i + 1].sub(o), q[i].sub(o), q[i + 1].sub(o))
        })
        .sum())
}

/// A curve translated to its centroid and scaled by its mean centroid
/// distance, with cumulative arclength.
struct NormalizedCurve {
    points: Vec<Point>,
    cum: Vec<f64>,
}

impl NormalizedCurve {
    fn new(g: &RoadGeometry) -> Result<Self, DistanceError> {
        let pts = g.points();
        let n = pts.len() as f64;
        let c = pts
            .iter()
            .fold(Point::default(), |acc, p| acc.add(*p))
            .scale(1.0 / n);
        let scale = pts.iter().map(|p| p.distance(c)).sum::<f64>() / n;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GeometryError::DegenerateRoad(format!(
                "{}: zero spatial extent",
                g.id()
            ))
            .into());
        }
        let points: Vec<Point> = pts.iter().map(|p| p.sub(c).scale(1.0 / scale)).collect();
        let mut cum = Vec::with_capacity(points.len());
        cum.push(0.0);
        for w in points.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + w[0].distance(w[1]));
        }
        Ok(Self { points, cum })
    }

    fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn at(&self, s: f64) -> Point {
        let cum = &self.cum;
        if s <= 0.0 {
            return self.points[0];
        }
        if s >= self.length() {
            return *self.points.last().unwrap();
        }
        let i = cum.partition_point(|&c| c <= s).clamp(1, cum.len() - 1);
        let (s0, s1) = (cum[i - 1], cum[i]);
        self.points[i - 1].lerp(self.points[i], (s - s0) / (s1 - s0))
    }
}

/// Trapezoidal integral, over the arclength of `short`, of the distance
/// between `short` and `long` evaluated at arclength `s + offset`.
fn mapping_cost(short: &NormalizedCurve, long: &NormalizedCurve, offset: f64) -> f64 {
    let d: Vec<f64> = short
        .points
        .iter()
        .zip(&short.cum)
        .map(|(p, s)| p.distance(long.at(s + offset)))
        .collect();
    d.windows(2)
        .zip(short.cum.windows(2))
        .map(|(d, s)| 0.5 * (d[0] + d[1]) * (s[1] - s[0]))
        .sum()
}

const PCM_GRID: usize = 200;
const PCM_REFINE_ITERS: usize = 80;

fn best_mapping(short: &NormalizedCurve, long: &NormalizedCurve) -> f64 {
    let range = (long.length() - short.length()).max(0.0);
    if range == 0.0 {
        return mapping_cost(short, long, 0.0);
    }
    let step = range / PCM_GRID as f64;
    let (best_k, best) = (0..=PCM_GRID)
        .map(|k| (k, mapping_cost(short, long, k as f64 * step)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    // golden-section refinement around the best grid offset
    let invphi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut lo = (best_k as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_k as f64 + 1.0) * step).min(range);
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let mut f1 = mapping_cost(short, long, x1);
    let mut f2 = mapping_cost(short, long, x2);
    for _ in 0..PCM_REFINE_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = mapping_cost(short, long, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = mapping_cost(short, long, x2);
        }
    }
    best.min(f1).min(f2)
}

/// Partial curve mapping: both curves are normalized, then the shorter one is
/// slid along the longer and the smallest integrated discrepancy is returned.
/// Equal normalized lengths take the minimum over both mapping directions.
pub fn pcm_distance(a: &RoadGeometry, b: &RoadGeometry) -> Result<f64, DistanceError> {
    let na = NormalizedCurve::new(a)?;
    let nb = NormalizedCurve::new(b)?;
    let (la, lb) = (na.length(), nb.length());
    Ok(if la < lb {
        best_mapping(&na, &nb)
    } else if lb < la {
        best_mapping(&nb, &na)
    } else {
        best_mapping(&na, &nb).min(best_mapping(&nb, &na))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn road(pts: Vec<Point>) -> RoadGeometry {
        RoadGeometry::new("r", pts).unwrap()
    }

    fn line(y: f64, n: usize, len: f64) -> RoadGeometry {
        road(
            (0..n)
                .map(|i| Point::new(len * i as f64 / (n - 1) as f64, y))
                .collect(),
        )
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
        (0..n)
            .map(|_| Point::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
            .collect()
    }

    /// Every monotone coupling from (0,0) to (n-1,m-1), enumerated recursively.
    fn frechet_brute(p: &[Point], q: &[Point], i: usize, j: usize) -> f64 {
        let d = p[i].distance(q[j]);
        if i == p.len() - 1 && j == q.len() - 1 {
            return d;
        }
        let mut best = f64::INFINITY;
        if i + 1 < p.len() {
            best = best.min(frechet_brute(p, q, i + 1, j));
        }
        if j + 1 < q.len() {
            best = best.min(frechet_brute(p, q, i, j + 1));
        }
        if i + 1 < p.len() && j + 1 < q.len() {
            best = best.min(frechet_brute(p, q, i + 1, j + 1));
        }
        d.max(best)
    }

    #[test]
    fn frechet_basics() {
        let a = line(0.0, 11, 10.0);
        assert_eq!(discrete_frechet(&a, &a), 0.0);
        let b = line(2.0, 11, 10.0);
        assert_eq!(discrete_frechet(&a, &b), 2.0);
        assert_eq!(discrete_frechet(&a, &b), discrete_frechet(&b, &a));
    }

    #[test]
    fn frechet_matches_coupling_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let n = rng.gen_range(2..=5);
            let m = rng.gen_range(2..=5);
            let (p, q) = (random_points(&mut rng, n), random_points(&mut rng, m));
            assert_eq!(frechet_points(&p, &q), frechet_brute(&p, &q, 0, 0));
        }
    }

    #[test]
    fn dtw_hand_unrolled_two_by_two() {
        // identical starts, ends 3 m apart: D = [[0, 3'], [.., 3]]
        let p = [Point::new(0.0, 0.0), Point::new(10.0, 0.0)];
        let q = [Point::new(0.0, 0.0), Point::new(10.0, 3.0)];
        assert_eq!(dtw_points(&p, &q), 3.0);
        let a = line(0.0, 7, 6.0);
        assert_eq!(dtw_distance(&a, &a), 0.0);
    }

    #[test]
    fn area_rectangle_and_triangle() {
        let a = line(0.0, 11, 10.0);
        let b = line(2.0, 11, 10.0);
        assert!((area_between_curves(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(area_between_curves(&a, &a).unwrap(), 0.0);
        let taper = road(
            (0..11)
                .map(|i| Point::new(i as f64, 0.2 * i as f64))
                .collect(),
        );
        assert!((area_between_curves(&a, &taper).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn area_handles_crossing_curves() {
        // X shape: two triangles of area 1 each
        let a = road(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)]);
        let b = road(vec![Point::new(0.0, 2.0), Point::new(1.0, 1.0 + 1e-12), Point::new(2.0, 0.0)]);
        let area = area_between_curves(&a, &b).unwrap();
        assert!((area - 2.0).abs() < 1e-9, "{area}");
    }

    #[test]
    fn area_requires_equal_counts() {
        let e = area_between_curves(&line(0.0, 5, 1.0), &line(0.0, 6, 1.0)).unwrap_err();
        assert!(matches!(
            e,
            DistanceError::Geometry(GeometryError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn pcm_identity_and_scale_invariance() {
        let pts: Vec<Point> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.1;
                Point::new(10.0 * t, 3.0 * t.sin() * t)
            })
            .collect();
        let a = road(pts.clone());
        assert!(pcm_distance(&a, &a).unwrap().abs() < 1e-9);
        let b = road(pts.iter().map(|p| p.scale(2.0)).collect());
        assert!(pcm_distance(&a, &b).unwrap().abs() < 1e-6);
        assert_eq!(pcm_distance(&a, &b).unwrap(), pcm_distance(&b, &a).unwrap());
    }
}
