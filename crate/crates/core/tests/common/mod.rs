//! Brute-force reference implementations and random instance generators
//! shared by the oracle tests and the acceptance harness.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roaddiv::distances::DistanceMatrix;
use roaddiv::geometry::{Point, RoadGeometry};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polyline with `n` points in a 20 m box; consecutive points are
/// kept at least 0.1 m apart.
pub fn random_polyline(rng: &mut impl Rng, id: &str, n: usize) -> RoadGeometry {
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = Point::new(rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
        if pts.last().map_or(true, |q| q.distance(p) > 0.1) {
            pts.push(p);
        }
    }
    RoadGeometry::new(id, pts).expect("valid polyline")
}

/// Smooth-ish random road: a walk with bounded heading changes.
pub fn random_road(rng: &mut impl Rng, id: &str, n: usize) -> RoadGeometry {
    let mut heading: f64 = rng.gen_range(-3.0..3.0);
    let mut p = Point::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
    let mut pts = vec![p];
    for _ in 1..n {
        heading += rng.gen_range(-0.3..0.3);
        let step = rng.gen_range(2.0..6.0);
        p = p.add(Point::new(heading.cos(), heading.sin()).scale(step));
        pts.push(p);
    }
    RoadGeometry::new(id, pts).expect("valid road")
}

pub fn random_matrix(rng: &mut impl Rng, n: usize) -> DistanceMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = rng.gen_range(0.0..10.0);
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    DistanceMatrix::from_rows(&rows).expect("valid matrix")
}

/// Every monotone path from (0, 0) to (n-1, m-1) with unit steps right,
/// down or diagonal; `visit` receives the path cells in order.
fn for_each_path(n: usize, m: usize, visit: &mut impl FnMut(&[(usize, usize)])) {
    fn go(
        i: usize,
        j: usize,
        n: usize,
        m: usize,
        path: &mut Vec<(usize, usize)>,
        visit: &mut impl FnMut(&[(usize, usize)]),
    ) {
        path.push((i, j));
        if i + 1 == n && j + 1 == m {
            visit(path);
        } else {
            if i + 1 < n {
                go(i + 1, j, n, m, path, visit);
            }
            if j + 1 < m {
                go(i, j + 1, n, m, path, visit);
            }
            if i + 1 < n && j + 1 < m {
                go(i + 1, j + 1, n, m, path, visit);
            }
        }
        path.pop();
    }
    go(0, 0, n, m, &mut Vec::new(), visit);
}

/// Minimum over all monotone couplings of the largest coupled distance.
pub fn frechet_by_enumeration(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for_each_path(a.len(), b.len(), &mut |path| {
        let worst = path.iter().map(|&(i, j)| a[i].distance(b[j])).fold(0.0, f64::max);
        best = best.min(worst);
    });
    best
}

/// Minimum over all warping paths of the summed point distances.
pub fn dtw_by_enumeration(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for_each_path(a.len(), b.len(), &mut |path| {
        let total = path.iter().fold(0.0, |s, &(i, j)| s + a[i].distance(b[j]));
        best = best.min(total);
    });
    best
}

pub fn levenshtein_by_recursion<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    match (a, b) {
        ([], _) => b.len(),
        (_, []) => a.len(),
        ([x, ra @ ..], [y, rb @ ..]) => {
            let sub = levenshtein_by_recursion(ra, rb) + usize::from(x != y);
            let del = levenshtein_by_recursion(ra, b) + 1;
            let ins = levenshtein_by_recursion(a, rb) + 1;
            sub.min(del).min(ins)
        }
    }
}

/// Weitzman recursion without memoization.
pub fn weitzman_by_recursion(m: &DistanceMatrix, set: &[usize]) -> f64 {
    if set.len() <= 1 {
        return 0.0;
    }
    let mut best = f64::NEG_INFINITY;
    for (k, &x) in set.iter().enumerate() {
        let rest: Vec<usize> = set.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &v)| v).collect();
        let nearest = rest.iter().map(|&y| m.get(x, y)).fold(f64::INFINITY, f64::min);
        best = best.max(weitzman_by_recursion(m, &rest) + nearest);
    }
    best
}

/// Edge weights of a minimum spanning tree found by trying every subset of
/// n-1 edges, sorted ascending.
pub fn mst_by_enumeration(m: &DistanceMatrix) -> Vec<f64> {
    let n = m.n();
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut chosen = Vec::new();
    fn spans(n: usize, edges: &[(usize, usize)]) -> bool {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] == x { x } else { let r = find(p, p[x]); p[x] = r; r }
        }
        for &(a, b) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }
    fn choose(
        start: usize,
        left: usize,
        edges: &[(usize, usize)],
        chosen: &mut Vec<(usize, usize)>,
        visit: &mut impl FnMut(&[(usize, usize)]),
    ) {
        if left == 0 {
            visit(chosen);
            return;
        }
        for k in start..edges.len() {
            chosen.push(edges[k]);
            choose(k + 1, left - 1, edges, chosen, visit);
            chosen.pop();
        }
    }
    choose(0, n - 1, &edges, &mut chosen, &mut |tree| {
        if !spans(n, tree) {
            return;
        }
        let mut w: Vec<f64> = tree.iter().map(|&(i, j)| m.get(i, j)).collect();
        w.sort_by(f64::total_cmp);
        let total: f64 = w.iter().sum();
        if best.as_ref().map_or(true, |(t, _)| total < *t) {
            best = Some((total, w));
        }
    });
    best.map(|(_, w)| w).unwrap_or_default()
}
