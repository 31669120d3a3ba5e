use super::{aggregate, AggregationId, DiversityMeasureId, DiversityValue};
use crate::direct_measures::{convex_hull_diversity, test_set_diameter, Codec};
use crate::distances::{
    distance_matrix_prepared, DistanceConfig, DistanceMatrix, FeatureNorms, PairwiseDistanceId,
    PreparedRoad, Schedule,
};
use crate::geometry::RoadGeometry;
use serde::{Deserialize, Serialize};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogueConfig {
    pub distance: DistanceConfig,
    /// Per-suite time budget for Weitzman on suites above the exact limit.
    pub weitzman_budget_secs: f64,
    /// Procrustes-align pairs before point-based distances.
    pub aligned: bool,
    pub codec: Codec,
    /// Canonically align roads before the convex hull.
    pub hull_aligned: bool,
    /// Drop exact geometric duplicates before computing anything.
    pub dedup_exact: bool,
    pub schedule: Schedule,
}

impl Default for CatalogueConfig {
    fn default() -> Self {
        Self {
            distance: DistanceConfig::default(),
            weitzman_budget_secs: 300.0,
            aligned: false,
            codec: Codec::default(),
            hull_aligned: true,
            dedup_exact: false,
            schedule: Schedule::Sequential,
        }
    }
}

impl CatalogueConfig {
    pub fn weitzman_budget(&self) -> Duration {
        Duration::from_secs_f64(self.weitzman_budget_secs.max(0.0))
    }
}

/// Results of the two direct measures for one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectValues {
    pub test_set_diameter: Result<f64, String>,
    pub convex_hull: f64,
}

impl DirectValues {
    pub fn compute(suite: &[RoadGeometry], cfg: &CatalogueConfig) -> Self {
        Self {
            test_set_diameter: test_set_diameter(suite, cfg.codec).map_err(|e| e.to_string()),
            convex_hull: convex_hull_diversity(suite, cfg.hull_aligned),
        }
    }
}

/// Keeps the first of every group of roads with identical point sequences.
pub fn dedup_exact(suite: &[RoadGeometry]) -> Vec<RoadGeometry> {
    let mut out: Vec<RoadGeometry> = Vec::with_capacity(suite.len());
    for g in suite {
        if !out.iter().any(|k| k.points() == g.points()) {
            out.push(g.clone());
        }
    }
    out
}

/// Assembles the 47 values from one matrix per distance (in
/// [`PairwiseDistanceId::ALL`] order) and the direct measures.
pub fn catalogue_from_parts(
    suite_id: &str,
    matrices: &[Result<DistanceMatrix, String>],
    direct: &DirectValues,
    weitzman_budget: Duration,
) -> Vec<DiversityValue> {
    assert_eq!(matrices.len(), PairwiseDistanceId::ALL.len());
    let mut out = Vec::with_capacity(47);
    for (&distance, matrix) in PairwiseDistanceId::ALL.iter().zip(matrices) {
        for aggregation in AggregationId::ALL {
            let measure = DiversityMeasureId::aggregated(distance, aggregation);
            out.push(match matrix {
                Ok(m) if m.n() >= 2 => {
                    let (value, timed_out) = aggregate(m, aggregation, weitzman_budget);
                    DiversityValue {
                        timed_out,
                        ..DiversityValue::ok(measure, suite_id, value)
                    }
                }
                Ok(m) => DiversityValue::failed(measure, suite_id, format!("suite of {} roads", m.n())),
                Err(e) => DiversityValue::failed(measure, suite_id, e),
            });
        }
    }
    out.push(match &direct.test_set_diameter {
        Ok(v) => DiversityValue::ok(DiversityMeasureId::TestSetDiameter, suite_id, *v),
        Err(e) => DiversityValue::failed(DiversityMeasureId::TestSetDiameter, suite_id, e),
    });
    out.push(DiversityValue::ok(
        DiversityMeasureId::ConvexHull,
        suite_id,
        direct.convex_hull,
    ));
    out
}

/// Computes all 47 diversity measures for a suite. One distance matrix is
/// built per distance and shared by its five aggregations. Feature bounds for
/// the Manhattan distance come from `norms`, or from the suite when absent.
/// Failures are recorded per measure and never abort the catalogue.
pub fn compute_catalogue(
    suite: &[RoadGeometry],
    suite_id: &str,
    cfg: &CatalogueConfig,
    norms: Option<&FeatureNorms>,
) -> Vec<DiversityValue> {
    let owned;
    let suite = if cfg.dedup_exact {
        owned = dedup_exact(suite);
        &owned[..]
    } else {
        suite
    };
    let prepared: Result<Vec<PreparedRoad>, String> = suite
        .iter()
        .map(|g| PreparedRoad::new(g, &cfg.distance).map_err(|e| format!("{}: {e}", g.id())))
        .collect();
    let matrices: Vec<Result<DistanceMatrix, String>> = match prepared {
        Err(e) => vec![Err(e); PairwiseDistanceId::ALL.len()],
        Ok(prepared) => {
            let refs: Vec<&PreparedRoad> = prepared.iter().collect();
            let own_norms = FeatureNorms::from_vectors(prepared.iter().map(|p| &p.features));
            PairwiseDistanceId::ALL
                .iter()
                .map(|&id| {
                    let norms = match norms {
                        Some(n) => Some(n),
                        None => Some(own_norms.as_ref().map_err(|e| e.to_string())?),
                    };
                    distance_matrix_prepared(&refs, id, norms, cfg.aligned, cfg.schedule)
                        .map_err(|e| e.to_string())
                })
                .collect()
        }
    };
    let direct = DirectValues::compute(suite, cfg);
    catalogue_from_parts(suite_id, &matrices, &direct, cfg.weitzman_budget())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::testutil::straight;
    use crate::geometry::Point;

    fn road(id: &str, k: f64) -> RoadGeometry {
        let pts = (0..90)
            .map(|i| {
                let x = i as f64 * 2.0;
                Point::new(x, 6.0 * (x * k / 40.0).sin())
            })
            .collect();
        RoadGeometry::new(id, pts).unwrap()
    }

    #[test]
    fn identical_roads_give_zero_aggregates() {
        let suite: Vec<RoadGeometry> = (0..4).map(|k| straight(80.0, 30).with_id(format!("s{k}"))).collect();
        let values = compute_catalogue(&suite, "same", &CatalogueConfig::default(), None);
        assert_eq!(values.len(), 47);
        for v in &values[..45] {
            assert!(v.error.is_none(), "{:?}", v);
            assert!(v.value.abs() < 1e-9, "{} = {}", v.measure, v.value);
        }
        assert_eq!(values[46].value, 0.0);
    }

    #[test]
    fn catalogue_is_complete_and_deterministic() {
        let suite: Vec<RoadGeometry> = (0..6).map(|k| road(&format!("r{k}"), 0.5 + k as f64 * 0.3)).collect();
        let mut cfg = CatalogueConfig::default();
        let a = compute_catalogue(&suite, "t", &cfg, None);
        cfg.schedule = Schedule::Parallel;
        let b = compute_catalogue(&suite, "t", &cfg, None);
        assert_eq!(a.len(), 47);
        let ids: Vec<DiversityMeasureId> = a.iter().map(|v| v.measure).collect();
        assert_eq!(ids, DiversityMeasureId::all());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.value.to_bits(), y.value.to_bits(), "{}", x.measure);
        }
        assert!(a.iter().all(|v| v.error.is_none() && v.value >= 0.0));
    }

    #[test]
    fn failures_are_inline() {
        let suite = vec![road("only", 1.0)];
        let values = compute_catalogue(&suite, "one", &CatalogueConfig::default(), None);
        assert_eq!(values.len(), 47);
        assert!(values[0].error.is_some() && values[0].value.is_nan());
        assert!(values[45].error.is_some());
        assert!(values[46].error.is_none() && values[46].value > 0.0);
    }

    #[test]
    fn dedup_drops_exact_copies_only() {
        let a = road("a", 1.0);
        let b = road("b", 1.2);
        let out = dedup_exact(&[a.clone(), b.clone(), a.clone().with_id("a2")]);
        assert_eq!(out.len(), 2);
        let mut cfg = CatalogueConfig::default();
        cfg.dedup_exact = true;
        let with = compute_catalogue(&[a.clone(), b.clone(), a.with_id("a2")], "d", &cfg, None);
        let sum = DiversityMeasureId::aggregated(PairwiseDistanceId::Dtw, AggregationId::Sum);
        let plain = compute_catalogue(&out, "d", &CatalogueConfig::default(), None);
        let pick = |vs: &[DiversityValue]| vs.iter().find(|v| v.measure == sum).unwrap().value;
        assert_eq!(pick(&with), pick(&plain));
    }
}
