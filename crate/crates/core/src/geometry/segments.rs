use super::{turn_between, GeometryError, RoadGeometry};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentBucketing {
    pub length_buckets: u32,
    pub turn_buckets: u32,
    /// Nominal segment length; length buckets span `[0, 2 * spacing]`.
    pub spacing: f64,
}

impl Default for SegmentBucketing {
    fn default() -> Self {
        Self {
            length_buckets: 10,
            turn_buckets: 18,
            spacing: 10.0,
        }
    }
}

/// Multiset of quantized (length bucket, turn bucket) segments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SegmentSet {
    counts: BTreeMap<(u32, u32), usize>,
}

impl SegmentSet {
    pub fn from_symbols(symbols: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut counts = BTreeMap::new();
        for s in symbols {
            *counts.entry(s).or_insert(0) += 1;
        }
        Self { counts }
    }

    pub fn count(&self, symbol: (u32, u32)) -> usize {
        self.counts.get(&symbol).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = ((u32, u32), usize)> + '_ {
        self.counts.iter().map(|(k, v)| (*k, *v))
    }

    /// Multiset Jaccard index: Σ min multiplicity / Σ max multiplicity.
    pub fn jaccard_index(&self, other: &SegmentSet) -> f64 {
        let mut inter = 0usize;
        let mut union = 0usize;
        let mut keys: Vec<&(u32, u32)> = self.counts.keys().chain(other.counts.keys()).collect();
        keys.sort();
        keys.dedup();
        for k in keys {
            let (a, b) = (self.count(*k), other.count(*k));
            inter += a.min(b);
            union += a.max(b);
        }
        if union == 0 {
            return 1.0;
        }
        inter as f64 / union as f64
    }
}

/// Quantizes each polyline segment by its length and local heading change.
///
/// The local heading change of a segment is the mean of the turning angles at
/// its two end vertices (end segments use the single available angle). Turn
/// buckets are centred so that a straight segment always falls in bucket 0.
pub fn segment_set(g: &RoadGeometry, bucketing: &SegmentBucketing) -> Result<SegmentSet, GeometryError> {
    if bucketing.length_buckets == 0 || bucketing.turn_buckets == 0 {
        return Err(GeometryError::DegenerateRoad(
            "bucket counts must be at least 1".into(),
        ));
    }
    if !(bucketing.spacing.is_finite() && bucketing.spacing > 0.0) {
        return Err(GeometryError::DegenerateRoad(format!(
            "segment spacing must be positive, got {}",
            bucketing.spacing
        )));
    }
    let pts = g.points();
    let nseg = pts.len() - 1;
    let turns: Vec<f64> = pts
        .windows(3)
        .map(|w| turn_between(w[1].sub(w[0]), w[2].sub(w[1])))
        .collect();
    let length_width = 2.0 * bucketing.spacing / bucketing.length_buckets as f64;
    let turn_width = 2.0 * PI / bucketing.turn_buckets as f64;
    let symbols = (0..nseg).map(|i| {
        let len = pts[i].distance(pts[i + 1]);
        let lb = ((len / length_width).round() as i64).clamp(0, bucketing.length_buckets as i64 - 1);
        let turn = match (i.checked_sub(1).map(|j| turns[j]), turns.get(i).copied()) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.0,
        };
        let tb = ((turn / turn_width).round() as i64).rem_euclid(bucketing.turn_buckets as i64);
        (lb as u32, tb as u32)
    });
    Ok(SegmentSet::from_symbols(symbols))
}
