use super::Point;

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, without
/// collinear boundary points. Duplicate inputs are ignored.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Area of the convex hull of the union of all point sets; 0 when the union
/// is collinear.
pub fn convex_hull_area<S: AsRef<[Point]>>(point_sets: &[S]) -> f64 {
    let union: Vec<Point> = point_sets
        .iter()
        .flat_map(|s| s.as_ref().iter().copied())
        .collect();
    let hull = convex_hull(&union);
    if hull.len() < 3 {
        return 0.0;
    }
    let twice: f64 = hull
        .iter()
        .zip(hull.iter().cycle().skip(1))
        .map(|(a, b)| a.x * b.y - a.y * b.x)
        .sum();
    0.5 * twice.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(n³) hull: an ordered pair (i, j) is a hull edge when every other
    /// point lies strictly left of i→j or on the segment between them.
    fn naive_hull_area(pts: &[Point]) -> f64 {
        let mut edges = Vec::new();
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate() {
                if i == j || a == b {
                    continue;
                }
                let ok = pts.iter().all(|&c| {
                    let cr = cross(a, b, c);
                    cr > 0.0
                        || (cr == 0.0
                            && (c.x - a.x) * (c.x - b.x) <= 0.0
                            && (c.y - a.y) * (c.y - b.y) <= 0.0)
                });
                if ok {
                    edges.push((a, b));
                }
            }
        }
        // shoelace over the edge set; orientation is consistent (CCW)
        0.5 * edges.iter().map(|(a, b)| a.x * b.y - a.y * b.x).sum::<f64>()
    }

    #[test]
    fn unit_square() {
        let sq = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(convex_hull_area(&[sq]), 1.0);
    }

    #[test]
    fn collinear_union_has_zero_area() {
        let line: Vec<Point> = (0..10).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(convex_hull_area(&[line]), 0.0);
        assert_eq!(convex_hull_area(&[vec![Point::new(1.0, 1.0)]]), 0.0);
    }

    #[test]
    fn matches_naive_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pts: Vec<Point> = (0..100)
                .map(|_| Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
                .collect();
            let fast = convex_hull_area(&[pts.clone()]);
            let slow = naive_hull_area(&pts);
            assert!((fast - slow).abs() <= 1e-12 * slow, "{fast} vs {slow}");
        }
    }

    #[test]
    fn adding_points_never_shrinks_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sets: Vec<Vec<Point>> = Vec::new();
        let mut prev = 0.0;
        for _ in 0..30 {
            sets.push(
                (0..20)
                    .map(|_| Point::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
                    .collect(),
            );
            let area = convex_hull_area(&sets);
            assert!(area >= prev);
            prev = area;
        }
    }
}
