//! Distances over rotation-invariant road derivatives: turning angles,
//! complexity frames, segment sets and feature vectors.

use super::DistanceError;
use crate::geometry::{
    complexity_frames, resample_uniform, segment_set, turning_angles, AngleSequence,
    ComplexityVector, GeometryError, RoadFeatureVector, RoadGeometry, SegmentBucketing,
    SegmentSet, FEATURE_COUNT,
};
use serde::{Deserialize, Serialize};

/// L2 distance between turning-angle profiles; the normalized variant divides
/// by the square root of the profile length.
pub fn relative_angle_distance(
    a: &RoadGeometry,
    b: &RoadGeometry,
    normalized: bool,
) -> Result<f64, DistanceError> {
    if a.len() != b.len() {
        return Err(GeometryError::ShapeMismatch {
            left: a.len(),
            right: b.len(),
        }
        .into());
    }
    angle_profile_distance(&turning_angles(a)?, &turning_angles(b)?, normalized)
}

pub(crate) fn angle_profile_distance(
    a: &AngleSequence,
    b: &AngleSequence,
    normalized: bool,
) -> Result<f64, DistanceError> {
    if a.len() != b.len() {
        return Err(GeometryError::ShapeMismatch {
            left: a.len() + 2,
            right: b.len() + 2,
        }
        .into());
    }
    let sq: f64 = a
        .angles
        .iter()
        .zip(&b.angles)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let d = sq.sqrt();
    Ok(if normalized && !a.is_empty() {
        d / (a.len() as f64).sqrt()
    } else {
        d
    })
}

/// Symmetric Hausdorff distance between the two sets of frame complexity
/// vectors: the largest distance from any frame to its complexity-wise
/// closest frame on the other road.
pub fn complexity_distance(
    a: &RoadGeometry,
    b: &RoadGeometry,
    frame_length: f64,
) -> Result<f64, DistanceError> {
    Ok(frame_set_distance(
        &complexity_frames(a, frame_length)?,
        &complexity_frames(b, frame_length)?,
    ))
}

pub(crate) fn frame_set_distance(fa: &[ComplexityVector], fb: &[ComplexityVector]) -> f64 {
    let directed = |x: &[ComplexityVector], y: &[ComplexityVector]| {
        x.iter()
            .map(|f| y.iter().map(|g| f.distance(g)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(fa, fb).max(directed(fb, fa))
}

/// Unit-cost edit distance between two symbol sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Quantizes turning angles into buckets of `bucket_deg` centred on zero.
pub fn angle_symbols(angles: &AngleSequence, bucket_deg: f64) -> Vec<i32> {
    let width = bucket_deg.to_radians();
    angles
        .angles
        .iter()
        .map(|a| (a / width).round() as i32)
        .collect()
}

/// Edit distance between the quantized turning-angle sequences.
pub fn iterative_levenshtein(
    a: &RoadGeometry,
    b: &RoadGeometry,
    angle_bucket_deg: f64,
) -> Result<usize, DistanceError> {
    if !(angle_bucket_deg.is_finite() && angle_bucket_deg > 0.0) {
        return Err(DistanceError::BadParameter(format!(
            "angle bucket must be positive, got {angle_bucket_deg}"
        )));
    }
    Ok(levenshtein(
        &angle_symbols(&turning_angles(a)?, angle_bucket_deg),
        &angle_symbols(&turning_angles(b)?, angle_bucket_deg),
    ))
}

/// Re-segments a road into pieces of roughly `bucketing.spacing` metres and
/// quantizes them.
pub fn road_segments(g: &RoadGeometry, bucketing: &SegmentBucketing) -> Result<SegmentSet, DistanceError> {
    let pieces = ((g.length() / bucketing.spacing).round() as usize).max(2);
    let coarse = resample_uniform(g, pieces + 1)?;
    Ok(segment_set(&coarse, bucketing)?)
}

/// 1 − multiset Jaccard index of the two roads' segment sets.
pub fn jaccard_distance(
    a: &RoadGeometry,
    b: &RoadGeometry,
    bucketing: &SegmentBucketing,
) -> Result<f64, DistanceError> {
    segment_set_distance(&road_segments(a, bucketing)?, &road_segments(b, bucketing)?)
}

pub(crate) fn segment_set_distance(a: &SegmentSet, b: &SegmentSet) -> Result<f64, DistanceError> {
    if a.is_empty() || b.is_empty() {
        return Err(DistanceError::EmptySegments);
    }
    Ok(1.0 - a.jaccard_index(b))
}

/// Per-feature min/max bounds over a corpus, used for min–max normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNorms {
    pub min: [f64; FEATURE_COUNT],
    pub max: [f64; FEATURE_COUNT],
}

impl FeatureNorms {
    pub fn new(min: [f64; FEATURE_COUNT], max: [f64; FEATURE_COUNT]) -> Result<Self, DistanceError> {
        for k in 0..FEATURE_COUNT {
            if !(min[k].is_finite() && max[k].is_finite()) || max[k] < min[k] {
                return Err(DistanceError::BadNormalization(format!(
                    "feature {k}: bounds [{}, {}]",
                    min[k], max[k]
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn from_vectors<'a>(
        vectors: impl IntoIterator<Item = &'a RoadFeatureVector>,
    ) -> Result<Self, DistanceError> {
        let mut min = [f64::INFINITY; FEATURE_COUNT];
        let mut max = [f64::NEG_INFINITY; FEATURE_COUNT];
        let mut any = false;
        for v in vectors {
            any = true;
            for (k, x) in v.as_array().into_iter().enumerate() {
                min[k] = min[k].min(x);
                max[k] = max[k].max(x);
            }
        }
        if !any {
            return Err(DistanceError::BadNormalization("empty corpus".into()));
        }
        Self::new(min, max)
    }

    /// Features whose bounds coincide; they contribute 0 to every distance.
    pub fn degenerate_features(&self) -> Vec<usize> {
        (0..FEATURE_COUNT).filter(|&k| self.max[k] == self.min[k]).collect()
    }

    pub fn normalize(&self, v: &RoadFeatureVector) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for (k, x) in v.as_array().into_iter().enumerate() {
            let span = self.max[k] - self.min[k];
            out[k] = if span > 0.0 {
                ((x - self.min[k]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        out
    }
}

/// L1 distance between min–max normalized feature vectors, in `[0, 7]`.
pub fn manhattan_feature_distance(
    a: &RoadFeatureVector,
    b: &RoadFeatureVector,
    norms: &FeatureNorms,
) -> f64 {
    let (x, y) = (norms.normalize(a), norms.normalize(b));
    x.iter().zip(&y).map(|(p, q)| (p - q).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{road_feature_vector, FeatureConfig, Point};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn straight(len: f64, n: usize) -> RoadGeometry {
        RoadGeometry::new(
            "s",
            (0..n)
                .map(|i| Point::new(len * i as f64 / (n - 1) as f64, 0.0))
                .collect(),
        )
        .unwrap()
    }

    fn constant_turn(phi: f64, n: usize) -> RoadGeometry {
        let mut pts = vec![Point::new(0.0, 0.0)];
        let mut h: f64 = 0.0;
        for _ in 1..n {
            let last = *pts.last().unwrap();
            pts.push(Point::new(last.x + h.cos(), last.y + h.sin()));
            h += phi;
        }
        RoadGeometry::new("t", pts).unwrap()
    }

    fn naive_edit(a: &[i32], b: &[i32]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = naive_edit(ra, rb) + usize::from(x != y);
                sub.min(naive_edit(ra, b) + 1).min(naive_edit(a, rb) + 1)
            }
        }
    }

    #[test]
    fn relative_angle_closed_form() {
        let phi = 0.07;
        let a = straight(10.0, 12);
        let b = constant_turn(phi, 12);
        let k = 10.0_f64;
        let d = relative_angle_distance(&a, &b, false).unwrap();
        assert!((d - k.sqrt() * phi).abs() < 1e-12);
        let dn = relative_angle_distance(&a, &b, true).unwrap();
        assert!((dn - phi).abs() < 1e-12);
        let rotated = b.transformed(Point::new(1.0, 2.0), 0.8, Point::new(4.0, 4.0));
        assert!(relative_angle_distance(&b, &rotated, false).unwrap() < 1e-9);
    }

    #[test]
    fn levenshtein_straights_of_different_length() {
        let a = straight(10.0, 11);
        let b = straight(12.0, 13);
        assert_eq!(iterative_levenshtein(&a, &b, 5.0).unwrap(), 2);
        assert_eq!(iterative_levenshtein(&a, &a, 5.0).unwrap(), 0);
    }

    #[test]
    fn levenshtein_matches_naive_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a: Vec<i32> = (0..rng.gen_range(0..=8)).map(|_| rng.gen_range(-2..=2)).collect();
            let b: Vec<i32> = (0..rng.gen_range(0..=8)).map(|_| rng.gen_range(-2..=2)).collect();
            assert_eq!(levenshtein(&a, &b), naive_edit(&a, &b));
        }
    }

    #[test]
    fn jaccard_identity_and_empty() {
        let g = constant_turn(0.05, 80);
        let b = SegmentBucketing::default();
        assert_eq!(jaccard_distance(&g, &g, &b).unwrap(), 0.0);
        assert_eq!(
            segment_set_distance(&SegmentSet::default(), &SegmentSet::from_symbols([(0, 0)])),
            Err(DistanceError::EmptySegments)
        );
        let x = SegmentSet::from_symbols([(0, 0)]);
        let y = SegmentSet::from_symbols([(1, 1)]);
        assert_eq!(segment_set_distance(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn complexity_distance_cases() {
        assert_eq!(
            complexity_distance(&straight(100.0, 101), &straight(60.0, 61), 20.0).unwrap(),
            0.0
        );
        let g = constant_turn(0.05, 100);
        assert_eq!(complexity_distance(&g, &g, 20.0).unwrap(), 0.0);
    }

    #[test]
    fn feature_distance_saturates_single_coordinate() {
        let cfg = FeatureConfig::default();
        let short = road_feature_vector(&straight(50.0, 51), &cfg).unwrap();
        let long = road_feature_vector(&straight(150.0, 151), &cfg).unwrap();
        let norms = FeatureNorms::from_vectors([&short, &long]).unwrap();
        assert_eq!(manhattan_feature_distance(&short, &long, &norms), 1.0);
        assert_eq!(manhattan_feature_distance(&short, &short, &norms), 0.0);
        assert_eq!(norms.degenerate_features().len(), 6);
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let mut max = [1.0; FEATURE_COUNT];
        max[3] = -1.0;
        assert!(matches!(
            FeatureNorms::new([0.0; FEATURE_COUNT], max),
            Err(DistanceError::BadNormalization(_))
        ));
    }
}
