use super::{prepared_distance, DistanceConfig, DistanceError, FeatureNorms, PairwiseDistanceId, PreparedRoad};
use crate::geometry::RoadGeometry;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How pair evaluations are scheduled. Both produce bit-identical matrices
/// because every entry is computed independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Schedule {
    #[default]
    Sequential,
    Parallel,
}

/// Symmetric, zero-diagonal table of pairwise distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from a full row-major table, checking the invariants.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DistanceError> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(DistanceError::BadParameter(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(DistanceError::BadParameter(format!(
                        "entry ({i}, {j}) = {v}"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(DistanceError::BadParameter(format!("diagonal {i} = {v}")));
                }
                if j < i && rows[j][i] != v {
                    return Err(DistanceError::BadParameter(format!(
                        "asymmetric at ({i}, {j})"
                    )));
                }
                m.entries[i * n + j] = v;
            }
        }
        Ok(m)
    }

    /// Evaluates `f(i, j)` for every `i < j` and mirrors the result.
    pub fn from_pairs<F>(n: usize, schedule: Schedule, f: F) -> Result<Self, DistanceError>
    where
        F: Fn(usize, usize) -> Result<f64, DistanceError> + Sync,
    {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let eval = |&(i, j): &(usize, usize)| {
            f(i, j).map_err(|e| DistanceError::Pair {
                i,
                j,
                source: Box::new(e),
            })
        };
        let values: Vec<f64> = match schedule {
            Schedule::Sequential => pairs.iter().map(eval).collect::<Result<_, _>>()?,
            Schedule::Parallel => pairs.par_iter().map(eval).collect::<Result<_, _>>()?,
        };
        let mut m = Self::zeros(n);
        for (&(i, j), v) in pairs.iter().zip(values) {
            m.set(i, j, v);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
        self.entries[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| self.get(i, j)))
    }

    pub fn pair_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    /// Matrix restricted to (and reordered by) `indices`; repeated indices
    /// produce zero-distance duplicates.
    pub fn select(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        let mut m = Self::zeros(k);
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                m.entries[a * k + b] = if a == b { 0.0 } else { self.get(i, j) };
            }
        }
        m
    }
}

/// Distance matrix over already prepared roads.
pub fn distance_matrix_prepared(
    roads: &[&PreparedRoad],
    id: PairwiseDistanceId,
    norms: Option<&FeatureNorms>,
    aligned: bool,
    schedule: Schedule,
) -> Result<DistanceMatrix, DistanceError> {
    DistanceMatrix::from_pairs(roads.len(), schedule, |i, j| {
        prepared_distance(id, roads[i], roads[j], norms, aligned)
    })
}

/// Prepares every road and fills the matrix. Feature bounds default to the
/// suite itself when `norms` is `None`.
pub fn distance_matrix(
    suite: &[RoadGeometry],
    id: PairwiseDistanceId,
    cfg: &DistanceConfig,
    norms: Option<&FeatureNorms>,
    aligned: bool,
    schedule: Schedule,
) -> Result<DistanceMatrix, DistanceError> {
    if suite.len() < 2 {
        return Err(DistanceError::BadParameter(format!(
            "suite of {} roads, need at least 2",
            suite.len()
        )));
    }
    let prepared: Vec<PreparedRoad> = suite
        .iter()
        .map(|g| PreparedRoad::new(g, cfg))
        .collect::<Result<_, _>>()?;
    let own;
    let norms = match norms {
        Some(n) => n,
        None => {
            own = FeatureNorms::from_vectors(prepared.iter().map(|p| &p.features))?;
            &own
        }
    };
    let refs: Vec<&PreparedRoad> = prepared.iter().collect();
    distance_matrix_prepared(&refs, id, Some(norms), aligned, schedule)
}

/// Extends `old` (over `roads[..old.n()]`) with rows for the remaining roads,
/// evaluating only the new pairs. Returns the matrix and the number of
/// distance evaluations performed.
pub fn extend_matrix(
    old: &DistanceMatrix,
    roads: &[&PreparedRoad],
    id: PairwiseDistanceId,
    norms: Option<&FeatureNorms>,
    aligned: bool,
) -> Result<(DistanceMatrix, usize), DistanceError> {
    let n = old.n();
    let total = roads.len();
    let mut m = DistanceMatrix::zeros(total);
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, old.get(i, j));
        }
    }
    let mut evaluations = 0;
    for j in n..total {
        for i in 0..j {
            let v = prepared_distance(id, roads[i], roads[j], norms, aligned).map_err(|e| {
                DistanceError::Pair {
                    i,
                    j,
                    source: Box::new(e),
                }
            })?;
            m.set(i, j, v);
            evaluations += 1;
        }
    }
    Ok((m, evaluations))
}
