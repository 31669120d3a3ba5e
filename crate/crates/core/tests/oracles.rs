mod common;

use common::*;
use rand::Rng;
use roaddiv::aggregation::{distance_entropy, mst_weights, weitzman};
use roaddiv::distances::{discrete_frechet, dtw_distance, iterative_levenshtein, levenshtein, DistanceMatrix};
use roaddiv::geometry::{turning_angles, Point, RoadGeometry};
use std::time::Duration;

#[test]
fn frechet_matches_coupling_enumeration() {
    let mut r = rng(1);
    for case in 0..200 {
        let na = r.gen_range(3..=5);
        let a = random_polyline(&mut r, "a", na);
        let nb = r.gen_range(3..=5);
        let b = random_polyline(&mut r, "b", nb);
        let want = frechet_by_enumeration(a.points(), b.points());
        let got = discrete_frechet(&a, &b);
        assert!((got - want).abs() <= 1e-12, "case {case}: {got} vs {want}");
    }
}

#[test]
fn dtw_matches_warping_path_enumeration() {
    let mut r = rng(2);
    for case in 0..100 {
        let a = random_polyline(&mut r, "a", 6);
        let b = random_polyline(&mut r, "b", 6);
        let want = dtw_by_enumeration(a.points(), b.points());
        let got = dtw_distance(&a, &b);
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "case {case}: {got} vs {want}");
    }
}

#[test]
fn levenshtein_matches_naive_recursion() {
    let mut r = rng(3);
    for case in 0..200 {
        // Three to ten points give one to eight turning angles.
        let na = r.gen_range(3..=10);
        let a = random_road(&mut r, "a", na);
        let nb = r.gen_range(3..=10);
        let b = random_road(&mut r, "b", nb);
        let bucket = 5.0;
        let sym = |g: &RoadGeometry| {
            roaddiv::distances::angle_symbols(&turning_angles(g).unwrap(), bucket)
        };
        let (sa, sb) = (sym(&a), sym(&b));
        assert!(sa.len() <= 8 && sb.len() <= 8);
        let want = levenshtein_by_recursion(&sa, &sb);
        assert_eq!(iterative_levenshtein(&a, &b, bucket).unwrap(), want, "case {case}");
    }
    // Arbitrary symbol strings over a small alphabet.
    for _ in 0..200 {
        let a: Vec<i32> = (0..r.gen_range(0..=8)).map(|_| r.gen_range(-2..=2)).collect();
        let b: Vec<i32> = (0..r.gen_range(0..=8)).map(|_| r.gen_range(-2..=2)).collect();
        assert_eq!(levenshtein(&a, &b), levenshtein_by_recursion(&a, &b));
    }
}

#[test]
fn weitzman_matches_naive_recursion() {
    let mut r = rng(4);
    let all: Vec<usize> = (0..7).collect();
    for case in 0..100 {
        let m = random_matrix(&mut r, 7);
        let got = weitzman(&m, Duration::ZERO);
        assert!(got.exact && !got.timed_out);
        let want = weitzman_by_recursion(&m, &all);
        assert!((got.value - want).abs() <= 1e-12 * want.max(1.0), "case {case}: {} vs {want}", got.value);
    }
    for n in [1, 2, 7, 20] {
        assert_eq!(weitzman(&DistanceMatrix::zeros(n), Duration::ZERO).value, 0.0);
    }
}

#[test]
fn mst_matches_spanning_tree_enumeration() {
    let mut r = rng(5);
    for case in 0..100 {
        let m = random_matrix(&mut r, 6);
        let mut got = mst_weights(&m);
        got.sort_by(f64::total_cmp);
        assert_eq!(got, mst_by_enumeration(&m), "case {case}");
    }
}

#[test]
fn entropy_of_four_equidistant_points_is_ln3() {
    // Corners of a regular tetrahedron are pairwise equidistant; as a matrix
    // that is every off-diagonal entry equal.
    let m = DistanceMatrix::from_rows(&[
        vec![0.0, 2.0, 2.0, 2.0],
        vec![2.0, 0.0, 2.0, 2.0],
        vec![2.0, 2.0, 0.0, 2.0],
        vec![2.0, 2.0, 2.0, 0.0],
    ])
    .unwrap();
    assert!((distance_entropy(&m) - 3f64.ln()).abs() <= 1e-9);
}

#[test]
fn frechet_of_hand_example() {
    let a = RoadGeometry::new("a", vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]).unwrap();
    let b = RoadGeometry::new("b", vec![Point::new(0.0, 1.0), Point::new(1.9, 1.0), Point::new(2.0, 1.0)]).unwrap();
    // Best coupling is index-wise; the middle pair is 0.9 m apart in x.
    assert!((discrete_frechet(&a, &b) - 1.81f64.sqrt()).abs() < 1e-15);
}
