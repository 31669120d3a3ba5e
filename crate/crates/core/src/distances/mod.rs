//! The nine pairwise road distance functions and distance matrices over a
//! test suite.

mod curves;
mod matrix;
mod sequences;

pub use curves::{area_between_curves, discrete_frechet, dtw_distance, pcm_distance};
pub use matrix::{distance_matrix, distance_matrix_prepared, extend_matrix, DistanceMatrix, Schedule};
pub use sequences::{
    angle_symbols, complexity_distance, iterative_levenshtein, jaccard_distance, levenshtein,
    manhattan_feature_distance, relative_angle_distance, road_segments, FeatureNorms,
};

use crate::geometry::{
    complexity_frames, procrustes_align, resample_uniform, road_feature_vector, turning_angles,
    AngleSequence, ComplexityVector, FeatureConfig, GeometryError, Point, RoadFeatureVector,
    RoadGeometry, SegmentBucketing, SegmentSet,
};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("empty segment set")]
    EmptySegments,
    #[error("bad normalization: {0}")]
    BadNormalization(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        source: Box<DistanceError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairwiseDistanceId {
    DiscreteFrechet,
    #[serde(rename = "PCM")]
    Pcm,
    #[serde(rename = "DTW")]
    Dtw,
    NormalizedRelativeAngle,
    ComplexityVectors,
    IterativeLevenshtein,
    JaccardDistance,
    AreaBetweenCurves,
    ManhattanFeatures,
}

impl PairwiseDistanceId {
    pub const ALL: [PairwiseDistanceId; 9] = [
        Self::DiscreteFrechet,
        Self::Pcm,
        Self::Dtw,
        Self::NormalizedRelativeAngle,
        Self::ComplexityVectors,
        Self::IterativeLevenshtein,
        Self::JaccardDistance,
        Self::AreaBetweenCurves,
        Self::ManhattanFeatures,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DiscreteFrechet => "DiscreteFrechet",
            Self::Pcm => "PCM",
            Self::Dtw => "DTW",
            Self::NormalizedRelativeAngle => "NormalizedRelativeAngle",
            Self::ComplexityVectors => "ComplexityVectors",
            Self::IterativeLevenshtein => "IterativeLevenshtein",
            Self::JaccardDistance => "JaccardDistance",
            Self::AreaBetweenCurves => "AreaBetweenCurves",
            Self::ManhattanFeatures => "ManhattanFeatures",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == name)
    }

    /// Whether the distance compares absolute point positions, so that
    /// Procrustes alignment changes its value.
    pub fn is_point_based(self) -> bool {
        matches!(
            self,
            Self::DiscreteFrechet | Self::Pcm | Self::Dtw | Self::AreaBetweenCurves
        )
    }
}

impl fmt::Display for PairwiseDistanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    /// Points per road for all point-based distances.
    pub resample_points: usize,
    pub frame_length: f64,
    pub levenshtein_bucket_deg: f64,
    pub segments: SegmentBucketing,
    pub features: FeatureConfig,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            resample_points: 100,
            frame_length: 20.0,
            levenshtein_bucket_deg: 5.0,
            segments: SegmentBucketing::default(),
            features: FeatureConfig::default(),
        }
    }
}

/// A road with every derivative the distance functions need, computed once.
#[derive(Debug, Clone)]
pub struct PreparedRoad {
    pub geometry: RoadGeometry,
    pub angles: AngleSequence,
    pub symbols: Vec<i32>,
    pub frames: Vec<ComplexityVector>,
    pub segments: SegmentSet,
    pub features: RoadFeatureVector,
}

impl PreparedRoad {
    pub fn new(g: &RoadGeometry, cfg: &DistanceConfig) -> Result<Self, DistanceError> {
        let geometry = resample_uniform(g, cfg.resample_points)?;
        let angles = turning_angles(&geometry)?;
        let symbols = angle_symbols(&angles, cfg.levenshtein_bucket_deg);
        let frames = complexity_frames(&geometry, cfg.frame_length)?;
        let segments = road_segments(&geometry, &cfg.segments)?;
        let features = road_feature_vector(&geometry, &cfg.features)?;
        Ok(Self {
            geometry,
            angles,
            symbols,
            frames,
            segments,
            features,
        })
    }

    pub fn id(&self) -> &str {
        self.geometry.id()
    }
}

/// Total order on point sequences used to fix argument order for
/// computations whose floating-point evaluation is order-dependent.
fn point_order(a: &[Point], b: &[Point]) -> Ordering {
    for (p, q) in a.iter().zip(b) {
        let o = p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y));
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn canonical_pair<'a>(a: &'a RoadGeometry, b: &'a RoadGeometry) -> (&'a RoadGeometry, &'a RoadGeometry) {
    match point_order(a.points(), b.points()).then_with(|| a.id().cmp(b.id())) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    }
}

/// Distance `id` between two prepared roads. With `aligned`, point-based
/// distances first Procrustes-align one road onto the other. The result is
/// exactly symmetric in its arguments.
pub fn prepared_distance(
    id: PairwiseDistanceId,
    a: &PreparedRoad,
    b: &PreparedRoad,
    norms: Option<&FeatureNorms>,
    aligned: bool,
) -> Result<f64, DistanceError> {
    use PairwiseDistanceId::*;
    if id.is_point_based() {
        let (first, second) = canonical_pair(&a.geometry, &b.geometry);
        let moved;
        let second = if aligned {
            moved = procrustes_align(first, second)?;
            &moved
        } else {
            second
        };
        return match id {
            DiscreteFrechet => Ok(discrete_frechet(first, second)),
            Dtw => Ok(dtw_distance(first, second)),
            AreaBetweenCurves => area_between_curves(first, second),
            Pcm => pcm_distance(first, second),
            _ => unreachable!(),
        };
    }
    match id {
        NormalizedRelativeAngle => sequences::angle_profile_distance(&a.angles, &b.angles, true),
        ComplexityVectors => Ok(sequences::frame_set_distance(&a.frames, &b.frames)),
        IterativeLevenshtein => Ok(levenshtein(&a.symbols, &b.symbols) as f64),
        JaccardDistance => sequences::segment_set_distance(&a.segments, &b.segments),
        ManhattanFeatures => {
            let norms = norms.ok_or_else(|| {
                DistanceError::BadNormalization("no feature bounds supplied".into())
            })?;
            Ok(manhattan_feature_distance(&a.features, &b.features, norms))
        }
        _ => unreachable!(),
    }
}

/// Convenience wrapper: prepares both roads and evaluates one distance,
/// normalizing features over the pair when no bounds are given.
pub fn pairwise_distance(
    id: PairwiseDistanceId,
    a: &RoadGeometry,
    b: &RoadGeometry,
    cfg: &DistanceConfig,
    aligned: bool,
) -> Result<f64, DistanceError> {
    let pa = PreparedRoad::new(a, cfg)?;
    let pb = PreparedRoad::new(b, cfg)?;
    let norms = FeatureNorms::from_vectors([&pa.features, &pb.features])?;
    prepared_distance(id, &pa, &pb, Some(&norms), aligned)
}
