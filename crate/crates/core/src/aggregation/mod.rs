//! Suite-level aggregation of distance matrices and the 47-measure catalogue.

mod catalogue;
mod weitzman;

pub use catalogue::{
    catalogue_from_parts, compute_catalogue, dedup_exact, CatalogueConfig, DirectValues,
};
pub use weitzman::{weitzman, WeitzmanOutcome, EXACT_LIMIT};

use crate::distances::{DistanceMatrix, PairwiseDistanceId};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AggregationId {
    Weitzman,
    DistanceEntropy,
    Sum,
    Average,
    AverageOfMaxima,
}

impl AggregationId {
    pub const ALL: [AggregationId; 5] = [
        Self::Weitzman,
        Self::DistanceEntropy,
        Self::Sum,
        Self::Average,
        Self::AverageOfMaxima,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Weitzman => "Weitzman",
            Self::DistanceEntropy => "DistanceEntropy",
            Self::Sum => "Sum",
            Self::Average => "Average",
            Self::AverageOfMaxima => "AverageOfMaxima",
        }
    }
}

/// One of the 47 diversity measures: a (distance, aggregation) pair or one of
/// the two direct measures. Serialized as `Distance+Aggregation` or the
/// direct measure's name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiversityMeasureId {
    Aggregated {
        distance: PairwiseDistanceId,
        aggregation: AggregationId,
    },
    TestSetDiameter,
    ConvexHull,
}

impl DiversityMeasureId {
    /// Full enumeration in catalogue order: distances (outer) × aggregations
    /// (inner), then the direct measures.
    pub fn all() -> Vec<DiversityMeasureId> {
        let mut out: Vec<DiversityMeasureId> = PairwiseDistanceId::ALL
            .iter()
            .flat_map(|&distance| {
                AggregationId::ALL.iter().map(move |&aggregation| Self::Aggregated {
                    distance,
                    aggregation,
                })
            })
            .collect();
        out.push(Self::TestSetDiameter);
        out.push(Self::ConvexHull);
        out
    }

    pub fn aggregated(distance: PairwiseDistanceId, aggregation: AggregationId) -> Self {
        Self::Aggregated {
            distance,
            aggregation,
        }
    }

    pub fn aggregation(&self) -> Option<AggregationId> {
        match self {
            Self::Aggregated { aggregation, .. } => Some(*aggregation),
            _ => None,
        }
    }

    pub fn distance(&self) -> Option<PairwiseDistanceId> {
        match self {
            Self::Aggregated { distance, .. } => Some(*distance),
            _ => None,
        }
    }
}

impl fmt::Display for DiversityMeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Aggregated {
                distance,
                aggregation,
            } => write!(f, "{}+{}", distance.name(), aggregation.name()),
            Self::TestSetDiameter => f.write_str("TestSetDiameter"),
            Self::ConvexHull => f.write_str("ConvexHull"),
        }
    }
}

impl FromStr for DiversityMeasureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "TestSetDiameter" => return Ok(Self::TestSetDiameter),
            "ConvexHull" => return Ok(Self::ConvexHull),
            _ => {}
        }
        let (d, a) = s
            .split_once('+')
            .ok_or_else(|| format!("unknown measure {s:?}"))?;
        let distance =
            PairwiseDistanceId::from_name(d).ok_or_else(|| format!("unknown distance {d:?}"))?;
        let aggregation = AggregationId::ALL
            .into_iter()
            .find(|x| x.name() == a)
            .ok_or_else(|| format!("unknown aggregation {a:?}"))?;
        Ok(Self::Aggregated {
            distance,
            aggregation,
        })
    }
}

impl Serialize for DiversityMeasureId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DiversityMeasureId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A computed measure for one suite. `value` is NaN when `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityValue {
    pub measure: DiversityMeasureId,
    pub value: f64,
    pub suite_id: String,
    pub timed_out: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DiversityValue {
    pub fn ok(measure: DiversityMeasureId, suite_id: &str, value: f64) -> Self {
        Self {
            measure,
            value,
            suite_id: suite_id.to_string(),
            timed_out: false,
            error: None,
        }
    }

    pub fn failed(measure: DiversityMeasureId, suite_id: &str, error: impl fmt::Display) -> Self {
        Self {
            measure,
            value: f64::NAN,
            suite_id: suite_id.to_string(),
            timed_out: false,
            error: Some(error.to_string()),
        }
    }
}

/// Correctly rounded sum (Shewchuk's partials, as in Python's `fsum`).
///
/// Rounding is monotone in the exact sum, so adding non-negative terms can
/// never lower the result, and the value does not depend on term order.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut kept = 0;
        for k in 0..partials.len() {
            let mut y = partials[k];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    let mut hi = match partials.pop() {
        Some(v) => v,
        None => return 0.0,
    };
    let mut lo = 0.0;
    while let Some(x) = partials.pop() {
        let y = hi;
        hi = x + y;
        lo = x - (hi - y);
        if lo != 0.0 {
            break;
        }
    }
    // round-half-even correction across the remaining partials
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

/// Sum of the upper-triangle entries, correctly rounded.
pub fn sum_aggregation(m: &DistanceMatrix) -> f64 {
    exact_sum(m.upper_triangle())
}

/// Mean of the upper-triangle entries; 0 for fewer than two roads.
pub fn average_aggregation(m: &DistanceMatrix) -> f64 {
    let pairs = m.pair_count();
    if pairs == 0 {
        return 0.0;
    }
    sum_aggregation(m) / pairs as f64
}

/// Mean over roads of the distance to the road farthest from it.
pub fn average_of_maxima(m: &DistanceMatrix) -> f64 {
    let n = m.n();
    if n < 2 {
        return 0.0;
    }
    let total: f64 = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| m.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    total / n as f64
}

/// Minimum spanning tree edge weights (Kruskal; equal weights broken by
/// lexicographic (i, j) order), in the order the edges were accepted.
pub fn mst_weights(m: &DistanceMatrix) -> Vec<f64> {
    let n = m.n();
    let mut edges: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (m.get(i, j), i, j))
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for (w, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
            out.push(w);
            if out.len() + 1 == n {
                break;
            }
        }
    }
    out
}

/// Shannon entropy (nats) of normalized weights, with 0·ln 0 = 0. An
/// all-zero weight list has entropy 0.
pub fn shannon_entropy(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let h: f64 = weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.ln()
        })
        .sum();
    if h > 0.0 {
        h
    } else {
        0.0
    }
}

/// Entropy of the minimum spanning tree weights of the complete distance graph.
pub fn distance_entropy(m: &DistanceMatrix) -> f64 {
    shannon_entropy(&mst_weights(m))
}

/// Applies one of the four non-recursive aggregations, or Weitzman with the
/// given budget. Returns `(value, timed_out)`.
pub fn aggregate(
    m: &DistanceMatrix,
    aggregation: AggregationId,
    weitzman_budget: std::time::Duration,
) -> (f64, bool) {
    match aggregation {
        AggregationId::Weitzman => {
            let out = weitzman(m, weitzman_budget);
            (out.value, out.timed_out)
        }
        AggregationId::DistanceEntropy => (distance_entropy(m), false),
        AggregationId::Sum => (sum_aggregation(m), false),
        AggregationId::Average => (average_aggregation(m), false),
        AggregationId::AverageOfMaxima => (average_of_maxima(m), false),
    }
}
