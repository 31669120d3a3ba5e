//! Experiment protocols: suite sampling, the property harnesses (growth,
//! duplicates, efficiency, additivity) and the correlation analyses.

mod analysis;
mod evaluator;
mod experiments;
mod stats;

pub use analysis::{
    behavior_features_by_road, rq2_pairwise_dm_correlation, rq3_length_effect,
    rq4_dm_bd_correlation, suite_behavioral_diversity, BehaviorCorpus, CorrelationTable, DmTable,
    Rq4Mode, SuiteRow,
};
pub use evaluator::PoolEvaluator;
pub use experiments::{
    additivity_experiment, duplicate_experiment, efficiency_experiment, growth_experiment,
    summarize, Addition, ExperimentKind, ExperimentRecord, MeasureStats,
};
pub use stats::{
    average_ranks, correlate, looks_normal, pearson, shapiro_wilk, spearman, CorrelationMethod,
    CorrelationResult, Strength, NORMALITY_ALPHA,
};

use crate::behavior::BehaviorError;
use crate::distances::DistanceError;
use crate::seeds;
use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("pool of {have} roads cannot supply {need}")]
    PoolTooSmall { need: usize, have: usize },
    #[error("unknown road {0:?}")]
    UnknownRoad(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

/// A fixed-size set of roads evaluated together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSuite {
    pub suite_id: String,
    /// Sampling stratum, e.g. `all`, `shortest` or `longest`.
    pub group: String,
    pub road_ids: Vec<String>,
}

impl TestSuite {
    pub fn size(&self) -> usize {
        self.road_ids.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthSide {
    Shortest,
    Longest,
}

/// Restriction of the pool to the shortest or longest fraction of roads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthQuantile {
    pub side: LengthSide,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPlan {
    pub sizes: Vec<usize>,
    pub suites_per_size: usize,
    pub seed: u64,
    pub length_quantile: Option<LengthQuantile>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            sizes: vec![10, 20, 50, 100],
            suites_per_size: 100,
            seed: 0,
            length_quantile: None,
        }
    }
}

impl SamplingPlan {
    pub fn group(&self) -> String {
        match self.length_quantile {
            None => "all".to_string(),
            Some(LengthQuantile {
                side: LengthSide::Shortest,
                ..
            }) => "shortest".to_string(),
            Some(LengthQuantile {
                side: LengthSide::Longest,
                ..
            }) => "longest".to_string(),
        }
    }
}

/// Pool entries eligible under the plan's length restriction, as indices
/// into `pool`. Ties in length are broken by road id.
pub fn eligible_roads(pool: &[(String, f64)], plan: &SamplingPlan) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    let Some(q) = plan.length_quantile else {
        return idx;
    };
    idx.sort_by(|&a, &b| pool[a].1.total_cmp(&pool[b].1).then_with(|| pool[a].0.cmp(&pool[b].0)));
    let keep = ((pool.len() as f64) * q.fraction.clamp(0.0, 1.0)).floor() as usize;
    match q.side {
        LengthSide::Shortest => idx.truncate(keep),
        LengthSide::Longest => {
            idx.drain(..pool.len() - keep);
        }
    }
    idx
}

/// Samples `suites_per_size` suites for every size, each uniformly without
/// replacement from the (possibly length-restricted) pool of `(id, length)`.
pub fn sample_suites(pool: &[(String, f64)], plan: &SamplingPlan) -> Result<Vec<TestSuite>, StudyError> {
    if plan.suites_per_size == 0 || plan.sizes.iter().any(|&s| s == 0) {
        return Err(StudyError::BadInput("sizes and suite counts must be positive".into()));
    }
    let eligible = eligible_roads(pool, plan);
    let group = plan.group();
    let mut out = Vec::with_capacity(plan.sizes.len() * plan.suites_per_size);
    for &size in &plan.sizes {
        if size > eligible.len() {
            return Err(StudyError::PoolTooSmall {
                need: size,
                have: eligible.len(),
            });
        }
        for k in 0..plan.suites_per_size {
            let mut rng = seeds::rng(
                plan.seed,
                &[seeds::label("sample"), seeds::label(&group), size as u64, k as u64],
            );
            let picked = index::sample(&mut rng, eligible.len(), size);
            out.push(TestSuite {
                suite_id: format!("{group}-n{size}-{k:03}"),
                group: group.clone(),
                road_ids: picked.iter().map(|i| pool[eligible[i]].0.clone()).collect(),
            });
        }
    }
    Ok(out)
}
