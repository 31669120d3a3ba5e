use super::{curvature_profile, turn_between, GeometryError, RoadGeometry};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const FEATURE_COUNT: usize = 7;

/// Number of heading bins used for direction coverage (10 degrees each).
pub const DIRECTION_BINS: usize = 36;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// |κ| below this is treated as straight when counting turns (1/m).
    pub turn_threshold: f64,
    pub min_radius_clamp: (f64, f64),
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            turn_threshold: 0.005,
            min_radius_clamp: (1.0, 1000.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadFeatureVector {
    pub total_length: f64,
    pub min_radius: f64,
    pub mean_abs_curvature: f64,
    pub max_abs_curvature: f64,
    pub direction_coverage: u32,
    pub turn_count: u32,
    pub std_heading_change: f64,
}

impl RoadFeatureVector {
    pub fn as_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.total_length,
            self.min_radius,
            self.mean_abs_curvature,
            self.max_abs_curvature,
            self.direction_coverage as f64,
            self.turn_count as f64,
            self.std_heading_change,
        ]
    }
}

/// Computes the seven road features. Headings for direction coverage are
/// measured relative to the first segment, so the vector does not depend on
/// the road's placement or orientation.
pub fn road_feature_vector(
    g: &RoadGeometry,
    cfg: &FeatureConfig,
) -> Result<RoadFeatureVector, GeometryError> {
    let profile = curvature_profile(g)?;
    let max_k = profile.max_abs_kappa();
    let (lo, hi) = cfg.min_radius_clamp;
    let min_radius = if max_k > 0.0 { (1.0 / max_k).clamp(lo, hi) } else { hi };

    let pts = g.points();
    let first = pts[1].sub(pts[0]);
    let bin_width = 2.0 * PI / DIRECTION_BINS as f64;
    let mut occupied = [false; DIRECTION_BINS];
    for w in pts.windows(2) {
        let rel = turn_between(first, w[1].sub(w[0]));
        let bin = (rel / bin_width).round() as i64;
        occupied[bin.rem_euclid(DIRECTION_BINS as i64) as usize] = true;
    }
    let direction_coverage = occupied.iter().filter(|o| **o).count() as u32;

    let mut turn_count = 0;
    let mut last_sign = 0.0;
    for k in &profile.kappa {
        if k.abs() > cfg.turn_threshold {
            let sign = k.signum();
            if last_sign != 0.0 && sign != last_sign {
                turn_count += 1;
            }
            last_sign = sign;
        }
    }

    let turns: Vec<f64> = pts
        .windows(3)
        .map(|w| turn_between(w[1].sub(w[0]), w[2].sub(w[1])))
        .collect();
    let mean = turns.iter().sum::<f64>() / turns.len() as f64;
    let var = turns.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / turns.len() as f64;

    Ok(RoadFeatureVector {
        total_length: g.length(),
        min_radius,
        mean_abs_curvature: profile.mean_abs_kappa(),
        max_abs_curvature: max_k,
        direction_coverage,
        turn_count,
        std_heading_change: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{arc, straight};
    use super::super::{Point, RoadGeometry};
    use super::*;

    #[test]
    fn straight_road_features() {
        let f = road_feature_vector(&straight(100.0, 101), &FeatureConfig::default()).unwrap();
        assert!((f.total_length - 100.0).abs() < 1e-9);
        assert_eq!(f.max_abs_curvature, 0.0);
        assert_eq!(f.mean_abs_curvature, 0.0);
        assert_eq!(f.min_radius, 1000.0);
        assert_eq!(f.direction_coverage, 1);
        assert_eq!(f.turn_count, 0);
    }

    #[test]
    fn full_circle_covers_all_directions() {
        let g = arc(30.0, 2.0 * PI * 0.999, 200);
        let f = road_feature_vector(&g, &FeatureConfig::default()).unwrap();
        assert_eq!(f.direction_coverage, 36);
        assert!((f.min_radius - 30.0).abs() < 0.1);
    }

    #[test]
    fn s_curve_has_one_turn() {
        // left arc of radius 20 then right arc of radius 20, hand-built
        let mut pts = Vec::new();
        let sweep = 1.2;
        for k in 0..=60 {
            let t = sweep * k as f64 / 60.0;
            pts.push(Point::new(20.0 * t.sin(), 20.0 * (1.0 - t.cos())));
        }
        let end = *pts.last().unwrap();
        // second center lies on the opposite side of the first
        let cx = end.x + 20.0 * sweep.sin();
        let cy = end.y - 20.0 * sweep.cos();
        for k in 1..=60 {
            let t = sweep - sweep * k as f64 / 60.0;
            pts.push(Point::new(cx - 20.0 * t.sin(), cy + 20.0 * t.cos()));
        }
        let g = RoadGeometry::new("s", pts).unwrap();
        let kappa = curvature_profile(&g).unwrap().kappa;
        let hand_count = kappa
            .iter()
            .filter(|k| k.abs() > 0.005)
            .map(|k| k.signum())
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|w| w[0] != w[1])
            .count();
        assert_eq!(hand_count, 1);
        let f = road_feature_vector(&g, &FeatureConfig::default()).unwrap();
        assert_eq!(f.turn_count, 1);
    }

    #[test]
    fn features_are_deterministic() {
        let g = arc(17.0, 2.3, 57);
        let cfg = FeatureConfig::default();
        assert_eq!(
            road_feature_vector(&g, &cfg).unwrap(),
            road_feature_vector(&g, &cfg).unwrap()
        );
    }
}
