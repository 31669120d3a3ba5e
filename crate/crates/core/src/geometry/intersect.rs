use super::{Point, RoadGeometry};

fn orient(a: Point, b: Point, c: Point) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// True iff two non-adjacent segments of the polyline intersect.
///
/// Segments are swept in order of their left x extent; only pairs whose x
/// ranges overlap are tested exactly.
pub fn self_intersects(g: &RoadGeometry) -> bool {
    let pts = g.points();
    let nseg = pts.len() - 1;
    let mut order: Vec<usize> = (0..nseg).collect();
    let xmin = |i: usize| pts[i].x.min(pts[i + 1].x);
    let xmax = |i: usize| pts[i].x.max(pts[i + 1].x);
    order.sort_by(|&a, &b| xmin(a).total_cmp(&xmin(b)).then(a.cmp(&b)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let left = xmin(i);
        active.retain(|&j| xmax(j) >= left);
        let (ylo, yhi) = (pts[i].y.min(pts[i + 1].y), pts[i].y.max(pts[i + 1].y));
        for &j in &active {
            if i.abs_diff(j) < 2 {
                continue;
            }
            let (jlo, jhi) = (pts[j].y.min(pts[j + 1].y), pts[j].y.max(pts[j + 1].y));
            if jhi < ylo || jlo > yhi {
                continue;
            }
            if segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                return true;
            }
        }
        active.push(i);
    }
    false
}
