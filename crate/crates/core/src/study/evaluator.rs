use super::StudyError;
use crate::aggregation::{catalogue_from_parts, CatalogueConfig, DirectValues, DiversityValue};
use crate::direct_measures::{ncd_multiset, serialize_road};
use crate::distances::{
    distance_matrix_prepared, DistanceMatrix, FeatureNorms, PairwiseDistanceId, PreparedRoad,
};
use crate::geometry::{convex_hull_area, Point, RoadGeometry};
use std::collections::HashMap;

/// Precomputed pool-level state for evaluating many suites drawn from one
/// road pool: a distance matrix per distance, pool-wide feature bounds, and
/// cached serializations and canonical frames for the direct measures.
///
/// Each matrix entry depends only on its two roads, so restricting a pool
/// matrix to a suite gives exactly the suite's own matrix.
pub struct PoolEvaluator {
    roads: Vec<RoadGeometry>,
    prepared: Vec<PreparedRoad>,
    norms: FeatureNorms,
    matrices: Vec<Result<DistanceMatrix, String>>,
    serialized: Vec<Result<Vec<u8>, String>>,
    canonical: Vec<Vec<Point>>,
    index: HashMap<String, usize>,
    cfg: CatalogueConfig,
}

impl PoolEvaluator {
    pub fn new(roads: Vec<RoadGeometry>, cfg: CatalogueConfig) -> Result<Self, StudyError> {
        let mut index = HashMap::with_capacity(roads.len());
        for (k, g) in roads.iter().enumerate() {
            if index.insert(g.id().to_string(), k).is_some() {
                return Err(StudyError::BadInput(format!("duplicate road id {}", g.id())));
            }
        }
        let prepared: Vec<PreparedRoad> = roads
            .iter()
            .map(|g| PreparedRoad::new(g, &cfg.distance))
            .collect::<Result<_, _>>()?;
        let norms = FeatureNorms::from_vectors(prepared.iter().map(|p| &p.features))?;
        let refs: Vec<&PreparedRoad> = prepared.iter().collect();
        let matrices = PairwiseDistanceId::ALL
            .iter()
            .map(|&id| {
                distance_matrix_prepared(&refs, id, Some(&norms), cfg.aligned, cfg.schedule)
                    .map_err(|e| e.to_string())
            })
            .collect();
        let serialized = roads
            .iter()
            .map(|g| serialize_road(g).map_err(|e| e.to_string()))
            .collect();
        let canonical = roads.iter().map(|g| g.canonical().points().to_vec()).collect();
        Ok(Self {
            roads,
            prepared,
            norms,
            matrices,
            serialized,
            canonical,
            index,
            cfg,
        })
    }

    pub fn config(&self) -> &CatalogueConfig {
        &self.cfg
    }

    pub fn roads(&self) -> &[RoadGeometry] {
        &self.roads
    }

    pub fn prepared(&self) -> &[PreparedRoad] {
        &self.prepared
    }

    pub fn norms(&self) -> &FeatureNorms {
        &self.norms
    }

    pub fn len(&self) -> usize {
        self.roads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roads.is_empty()
    }

    pub fn matrix(&self, id: PairwiseDistanceId) -> Result<&DistanceMatrix, &str> {
        let k = PairwiseDistanceId::ALL.iter().position(|&d| d == id).expect("known id");
        self.matrices[k].as_ref().map_err(|e| e.as_str())
    }

    pub fn indices(&self, ids: &[String]) -> Result<Vec<usize>, StudyError> {
        ids.iter()
            .map(|id| {
                self.index
                    .get(id)
                    .copied()
                    .ok_or_else(|| StudyError::UnknownRoad(id.clone()))
            })
            .collect()
    }

    pub fn mean_length(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.roads[i].length()).sum::<f64>() / idx.len() as f64
    }

    /// Drops every index whose geometry equals that of an earlier one.
    pub fn dedup_indices(&self, idx: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::with_capacity(idx.len());
        for &i in idx {
            if !out
                .iter()
                .any(|&k| k == i || self.roads[k].points() == self.roads[i].points())
            {
                out.push(i);
            }
        }
        out
    }

    pub fn direct_values(&self, idx: &[usize]) -> DirectValues {
        let test_set_diameter = (|| {
            let mut items: Vec<(&str, &Vec<u8>)> = idx
                .iter()
                .map(|&i| Ok((self.roads[i].id(), self.serialized[i].as_ref()?)))
                .collect::<Result<_, &String>>()
                .map_err(|e| e.clone())?;
            items.sort_by(|a, b| a.0.cmp(b.0).then_with(|| a.1.cmp(b.1)));
            let blobs: Vec<Vec<u8>> = items.into_iter().map(|(_, b)| b.clone()).collect();
            ncd_multiset(&blobs, self.cfg.codec).map_err(|e| e.to_string())
        })();
        let convex_hull = if self.cfg.hull_aligned {
            let sets: Vec<&[Point]> = idx.iter().map(|&i| &self.canonical[i][..]).collect();
            convex_hull_area(&sets)
        } else {
            let sets: Vec<&[Point]> = idx.iter().map(|&i| self.roads[i].points()).collect();
            convex_hull_area(&sets)
        };
        DirectValues {
            test_set_diameter,
            convex_hull,
        }
    }

    /// Per-distance matrices restricted to the suite, in catalogue order.
    pub fn suite_matrices(&self, idx: &[usize]) -> Vec<Result<DistanceMatrix, String>> {
        self.matrices
            .iter()
            .map(|m| m.as_ref().map(|m| m.select(idx)).map_err(Clone::clone))
            .collect()
    }

    /// All 47 measures for the suite given by pool indices. Equal to
    /// `compute_catalogue` on the same roads with the pool's feature bounds.
    pub fn catalogue(&self, suite_id: &str, idx: &[usize]) -> Vec<DiversityValue> {
        let owned;
        let idx = if self.cfg.dedup_exact {
            owned = self.dedup_indices(idx);
            &owned[..]
        } else {
            idx
        };
        catalogue_from_parts(
            suite_id,
            &self.suite_matrices(idx),
            &self.direct_values(idx),
            self.cfg.weitzman_budget(),
        )
    }
}
