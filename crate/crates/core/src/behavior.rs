//! Simulation traces, the 20-value behavior feature vector and behavioral
//! diversity of a suite.

use crate::aggregation::{distance_entropy, sum_aggregation};
use crate::distances::{DistanceMatrix, Schedule};
use crate::geometry::{Point, RoadGeometry};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of observations and statistics per observation.
pub const OBSERVATIONS: usize = 5;
pub const BEHAVIOR_FEATURES: usize = 20;

/// Observation names in feature-vector order.
pub const OBSERVATION_NAMES: [&str; OBSERVATIONS] =
    ["velocity", "acceleration", "braking", "steering", "lateral_position"];
/// Statistic names in per-observation order.
pub const STAT_NAMES: [&str; 4] = ["mean", "min", "max", "std"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BehaviorError {
    #[error("trace for road {trace} checked against road {road}")]
    RoadMismatch { trace: String, road: String },
    #[error("record {index} is {distance:.2} m from the road")]
    ProjectionFailure { index: usize, distance: f64 },
    #[error("empty observation series")]
    Empty,
    #[error("bad normalization: {0}")]
    BadNormalization(String),
    #[error("need at least {need} feature vectors, got {got}")]
    TooFew { need: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub velocity: f64,
    pub steering: f64,
    pub throttle: f64,
    pub brake: f64,
}

impl TraceRecord {
    fn is_finite(&self) -> bool {
        [
            self.t,
            self.x,
            self.y,
            self.velocity,
            self.steering,
            self.throttle,
            self.brake,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub road_id: String,
    pub agent_id: String,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TraceFlag {
    WrongDirection,
    FrequencyOutOfRange,
    IncompleteData,
}

/// Thresholds for trace validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceChecks {
    pub min_hz: f64,
    pub max_hz: f64,
    /// Fraction of the trace over which net progress must not be negative.
    pub early_fraction: f64,
    /// Minimum final progress as a fraction of road length.
    pub min_progress: f64,
    /// Lateral offset beyond which a sample counts as off the road.
    pub offroad_offset: f64,
    /// Samples farther than this from the centerline cannot be projected.
    pub max_projection: f64,
}

impl Default for TraceChecks {
    fn default() -> Self {
        Self {
            min_hz: 5.0,
            max_hz: 20.0,
            early_fraction: 0.1,
            min_progress: 0.5,
            offroad_offset: 2.0,
            max_projection: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub road_id: String,
    pub agent_id: String,
    pub flags: Vec<TraceFlag>,
    pub median_hz: Option<f64>,
}

impl TraceReport {
    pub fn is_valid(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Nearest point on the centerline: arclength, signed lateral offset (left
/// of travel positive) and unsigned distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub s: f64,
    pub lateral: f64,
    pub distance: f64,
}

pub fn project(road: &RoadGeometry, p: Point) -> Projection {
    let pts = road.points();
    let cum = road.cum_arclength();
    let mut best = Projection {
        s: 0.0,
        lateral: 0.0,
        distance: f64::INFINITY,
    };
    for k in 0..pts.len() - 1 {
        let (a, b) = (pts[k], pts[k + 1]);
        let ab = b.sub(a);
        let len2 = ab.dot(ab);
        let u = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
        let foot = a.lerp(b, u);
        let d = p.distance(foot);
        if d < best.distance {
            let side = ab.cross(p.sub(a));
            best = Projection {
                s: cum[k] + u * (cum[k + 1] - cum[k]),
                lateral: if side < 0.0 { -d } else { d },
                distance: d,
            };
        }
    }
    best
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Checks a trace for data-quality problems. All applicable flags are listed.
pub fn validate_trace(
    trace: &SimulationTrace,
    road: &RoadGeometry,
    checks: &TraceChecks,
) -> Result<TraceReport, BehaviorError> {
    if trace.road_id != road.id() {
        return Err(BehaviorError::RoadMismatch {
            trace: trace.road_id.clone(),
            road: road.id().to_string(),
        });
    }
    let recs = &trace.records;
    let mut flags = Vec::new();
    let complete = recs.len() >= 2
        && recs.iter().all(TraceRecord::is_finite)
        && recs.windows(2).all(|w| w[1].t > w[0].t);
    if !complete {
        flags.push(TraceFlag::IncompleteData);
        return Ok(TraceReport {
            road_id: trace.road_id.clone(),
            agent_id: trace.agent_id.clone(),
            flags,
            median_hz: None,
        });
    }

    let median_hz = median(recs.windows(2).map(|w| 1.0 / (w[1].t - w[0].t)).collect());
    if let Some(hz) = median_hz {
        if hz < checks.min_hz || hz > checks.max_hz {
            flags.push(TraceFlag::FrequencyOutOfRange);
        }
    }

    let proj: Vec<Projection> = recs.iter().map(|r| project(road, r.position())).collect();
    let early = ((recs.len() as f64 * checks.early_fraction).ceil() as usize).clamp(1, recs.len() - 1);
    let regress = proj[early].s < proj[0].s;
    let progress = proj[proj.len() - 1].s - proj[0].s;
    let offroad = proj.iter().any(|p| p.distance > checks.offroad_offset);
    if regress || (progress < checks.min_progress * road.length() && !offroad) {
        flags.push(TraceFlag::WrongDirection);
    }
    flags.sort();
    Ok(TraceReport {
        road_id: trace.road_id.clone(),
        agent_id: trace.agent_id.clone(),
        flags,
        median_hz,
    })
}

/// Five aligned per-sample observation series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSeries {
    pub velocity: Vec<f64>,
    pub acceleration: Vec<f64>,
    pub braking: Vec<f64>,
    pub steering: Vec<f64>,
    pub lateral_position: Vec<f64>,
}

impl ObservationSeries {
    pub fn len(&self) -> usize {
        self.velocity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocity.is_empty()
    }

    fn series(&self) -> [&[f64]; OBSERVATIONS] {
        [
            &self.velocity,
            &self.acceleration,
            &self.braking,
            &self.steering,
            &self.lateral_position,
        ]
    }
}

/// Derives the observation series. Acceleration is the forward difference of
/// velocity, repeated for the final sample.
pub fn derive_observations(
    trace: &SimulationTrace,
    road: &RoadGeometry,
    max_projection: f64,
) -> Result<ObservationSeries, BehaviorError> {
    if trace.road_id != road.id() {
        return Err(BehaviorError::RoadMismatch {
            trace: trace.road_id.clone(),
            road: road.id().to_string(),
        });
    }
    let recs = &trace.records;
    if recs.is_empty() {
        return Err(BehaviorError::Empty);
    }
    let mut lateral = Vec::with_capacity(recs.len());
    for (index, r) in recs.iter().enumerate() {
        let p = project(road, r.position());
        if p.distance > max_projection {
            return Err(BehaviorError::ProjectionFailure {
                index,
                distance: p.distance,
            });
        }
        lateral.push(p.lateral);
    }
    let mut acceleration: Vec<f64> = recs
        .windows(2)
        .map(|w| (w[1].velocity - w[0].velocity) / (w[1].t - w[0].t))
        .collect();
    acceleration.push(acceleration.last().copied().unwrap_or(0.0));
    Ok(ObservationSeries {
        velocity: recs.iter().map(|r| r.velocity).collect(),
        acceleration,
        braking: recs.iter().map(|r| r.brake).collect(),
        steering: recs.iter().map(|r| r.steering).collect(),
        lateral_position: lateral,
    })
}

/// `(mean, min, max, std)` for each observation, in [`OBSERVATION_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorFeatureVector(pub [f64; BEHAVIOR_FEATURES]);

impl BehaviorFeatureVector {
    pub fn values(&self) -> &[f64; BEHAVIOR_FEATURES] {
        &self.0
    }

    /// Column names such as `velocity_mean`.
    pub fn names() -> Vec<String> {
        OBSERVATION_NAMES
            .iter()
            .flat_map(|o| STAT_NAMES.iter().map(move |s| format!("{o}_{s}")))
            .collect()
    }
}

/// Mean, minimum, maximum and population standard deviation.
pub fn summary_stats(xs: &[f64]) -> [f64; 4] {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    // rounding can push the mean a hair outside [min, max] for constant data
    [mean.clamp(min, max), min, max, var.sqrt()]
}

pub fn behavior_features(obs: &ObservationSeries) -> Result<BehaviorFeatureVector, BehaviorError> {
    if obs.is_empty() {
        return Err(BehaviorError::Empty);
    }
    let mut out = [0.0; BEHAVIOR_FEATURES];
    for (k, s) in obs.series().iter().enumerate() {
        out[4 * k..4 * k + 4].copy_from_slice(&summary_stats(s));
    }
    Ok(BehaviorFeatureVector(out))
}

/// Per-dimension min–max bounds over a corpus of behavior vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorNorms {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BehaviorNorms {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self, BehaviorError> {
        if min.len() != BEHAVIOR_FEATURES || max.len() != BEHAVIOR_FEATURES {
            return Err(BehaviorError::BadNormalization(format!(
                "expected {BEHAVIOR_FEATURES} bounds, got {} and {}",
                min.len(),
                max.len()
            )));
        }
        for k in 0..BEHAVIOR_FEATURES {
            if !(min[k].is_finite() && max[k].is_finite()) || max[k] < min[k] {
                return Err(BehaviorError::BadNormalization(format!(
                    "dimension {k}: bounds [{}, {}]",
                    min[k], max[k]
                )));
            }
        }
        Ok(Self { min, max })
    }

    pub fn from_vectors<'a>(
        vectors: impl IntoIterator<Item = &'a BehaviorFeatureVector>,
    ) -> Result<Self, BehaviorError> {
        let mut min = vec![f64::INFINITY; BEHAVIOR_FEATURES];
        let mut max = vec![f64::NEG_INFINITY; BEHAVIOR_FEATURES];
        for v in vectors {
            for (k, &x) in v.0.iter().enumerate() {
                min[k] = min[k].min(x);
                max[k] = max[k].max(x);
            }
        }
        Self::new(min, max)
    }

    /// Spans at or below this (relative to the bound magnitudes) count as
    /// zero, so floating-point noise in an otherwise constant observation
    /// cannot be blown up to a full unit of distance.
    pub const SPAN_TOLERANCE: f64 = 1e-9;

    fn live(&self, k: usize) -> bool {
        let scale = self.min[k].abs().max(self.max[k].abs()).max(1.0);
        self.max[k] - self.min[k] > Self::SPAN_TOLERANCE * scale
    }

    /// Dimensions with (numerically) zero span; they contribute 0 to every
    /// distance.
    pub fn degenerate_dimensions(&self) -> Vec<usize> {
        (0..BEHAVIOR_FEATURES).filter(|&k| !self.live(k)).collect()
    }

    fn coordinate(&self, k: usize, x: f64) -> f64 {
        let span = self.max[k] - self.min[k];
        if self.live(k) {
            ((x - self.min[k]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Euclidean distance between min–max normalized vectors, in `[0, sqrt(20)]`.
pub fn behavioral_distance(
    a: &BehaviorFeatureVector,
    b: &BehaviorFeatureVector,
    norms: &BehaviorNorms,
) -> f64 {
    (0..BEHAVIOR_FEATURES)
        .map(|k| (norms.coordinate(k, a.0[k]) - norms.coordinate(k, b.0[k])).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Suite-level reduction of the behavioral distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BdReduction {
    #[default]
    Entropy,
    Sum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehavioralDiversity {
    pub suite_id: String,
    pub agent_id: String,
    pub value: f64,
}

pub fn behavior_matrix(features: &[BehaviorFeatureVector], norms: &BehaviorNorms) -> DistanceMatrix {
    DistanceMatrix::from_pairs(features.len(), Schedule::Sequential, |i, j| {
        Ok(behavioral_distance(&features[i], &features[j], norms))
    })
    .expect("behavioral distances are infallible")
}

/// Behavioral diversity of a suite: entropy of the minimum spanning tree of
/// the pairwise behavioral distances (or their sum).
pub fn behavioral_diversity(
    features: &[BehaviorFeatureVector],
    norms: &BehaviorNorms,
    reduction: BdReduction,
) -> Result<f64, BehaviorError> {
    if features.len() < 2 {
        return Err(BehaviorError::TooFew {
            need: 2,
            got: features.len(),
        });
    }
    let m = behavior_matrix(features, norms);
    Ok(match reduction {
        BdReduction::Entropy => distance_entropy(&m),
        BdReduction::Sum => sum_aggregation(&m),
    })
}
