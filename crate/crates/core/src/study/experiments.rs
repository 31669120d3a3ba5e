use super::{PoolEvaluator, StudyError, TestSuite};
use crate::aggregation::{
    aggregate, exact_sum, AggregationId, DiversityMeasureId, DiversityValue,
};
use crate::distances::{distance_matrix_prepared, extend_matrix, PairwiseDistanceId, PreparedRoad, Schedule};
use crate::seeds;
use rand::seq::index;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Growth,
    Duplicates,
    Efficiency,
    Additivity,
    Rq2,
    Rq3,
    Rq4a,
    Rq4b,
    Rq4c,
    Rq4d,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Growth => "growth",
            Self::Duplicates => "duplicates",
            Self::Efficiency => "efficiency",
            Self::Additivity => "additivity",
            Self::Rq2 => "rq2",
            Self::Rq3 => "rq3",
            Self::Rq4a => "rq4a",
            Self::Rq4b => "rq4b",
            Self::Rq4c => "rq4c",
            Self::Rq4d => "rq4d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: ExperimentKind,
    pub suite_id: String,
    pub measure: DiversityMeasureId,
    pub before: Option<f64>,
    pub after: Option<f64>,
    pub delta: Option<f64>,
    pub wall_time: Option<f64>,
    pub parameters: BTreeMap<String, String>,
    /// Further wall-clock measurements in seconds. Like `wall_time`, these
    /// are the only fields that differ between reruns.
    #[serde(default)]
    pub timings: BTreeMap<String, f64>,
}

impl ExperimentRecord {
    fn compare(
        experiment: ExperimentKind,
        suite_id: &str,
        before: &DiversityValue,
        after: &DiversityValue,
        mut parameters: BTreeMap<String, String>,
    ) -> Self {
        let ok = |v: &DiversityValue| (v.error.is_none() && v.value.is_finite()).then_some(v.value);
        let (b, a) = (ok(before), ok(after));
        let delta = match (b, a) {
            (Some(b), Some(a)) => Some(a - b),
            _ => None,
        };
        parameters.insert("timed_out_before".into(), before.timed_out.to_string());
        parameters.insert("timed_out_after".into(), after.timed_out.to_string());
        if let Some(e) = before.error.as_ref().or(after.error.as_ref()) {
            parameters.insert("error".into(), e.clone());
        }
        if let Some(d) = delta {
            parameters.insert("decreased".into(), (d < 0.0).to_string());
        }
        Self {
            experiment,
            suite_id: suite_id.to_string(),
            measure: before.measure,
            before: b,
            after: a,
            delta,
            wall_time: None,
            parameters,
            timings: BTreeMap::new(),
        }
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.parameters.get(key).map(String::as_str)
    }

    /// Both values came from exact (not time-budgeted) computations.
    pub fn exact(&self) -> bool {
        self.param("timed_out_before") != Some("true") && self.param("timed_out_after") != Some("true")
    }
}

fn params(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// `max(1, round(fraction · size))`.
fn count_for(fraction: f64, size: usize) -> usize {
    ((fraction * size as f64).round() as usize).max(1)
}

fn draw_extension(
    ev: &PoolEvaluator,
    members: &[usize],
    k: usize,
    seed: u64,
    labels: &[u64],
) -> Result<Vec<usize>, StudyError> {
    let taken: BTreeSet<usize> = members.iter().copied().collect();
    let candidates: Vec<usize> = (0..ev.len()).filter(|i| !taken.contains(i)).collect();
    if candidates.len() < k {
        return Err(StudyError::PoolTooSmall {
            need: k,
            have: candidates.len(),
        });
    }
    let mut rng = seeds::rng(seed, labels);
    Ok(index::sample(&mut rng, candidates.len(), k)
        .iter()
        .map(|i| candidates[i])
        .collect())
}

/// Extends every suite by each fraction of its size with roads drawn from the
/// pool outside the suite, recording every measure before and after.
pub fn growth_experiment(
    ev: &PoolEvaluator,
    suites: &[TestSuite],
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<ExperimentRecord>, StudyError> {
    let mut out = Vec::new();
    for (si, suite) in suites.iter().enumerate() {
        let idx = ev.indices(&suite.road_ids)?;
        let before = ev.catalogue(&suite.suite_id, &idx);
        for (fi, &fraction) in fractions.iter().enumerate() {
            let k = count_for(fraction, idx.len());
            let labels = [seeds::label("growth"), si as u64, fi as u64];
            let ext = draw_extension(ev, &idx, k, seed, &labels)?;
            let grown: Vec<usize> = idx.iter().chain(&ext).copied().collect();
            let after = ev.catalogue(&suite.suite_id, &grown);
            for (b, a) in before.iter().zip(&after) {
                out.push(ExperimentRecord::compare(
                    ExperimentKind::Growth,
                    &suite.suite_id,
                    b,
                    a,
                    params(&[
                        ("fraction", fraction.to_string()),
                        ("added", k.to_string()),
                        ("size", idx.len().to_string()),
                    ]),
                ));
            }
        }
    }
    Ok(out)
}

/// Appends copies of randomly chosen members. Every measure is recorded
/// literally; the sum aggregations are also recorded after exact-duplicate
/// removal (`mode=dedup`).
pub fn duplicate_experiment(
    ev: &PoolEvaluator,
    suites: &[TestSuite],
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<ExperimentRecord>, StudyError> {
    let mut out = Vec::new();
    for (si, suite) in suites.iter().enumerate() {
        let idx = ev.indices(&suite.road_ids)?;
        let before = ev.catalogue(&suite.suite_id, &idx);
        for (fi, &fraction) in fractions.iter().enumerate() {
            let k = count_for(fraction, idx.len()).min(idx.len());
            let mut rng = seeds::rng(seed, &[seeds::label("duplicates"), si as u64, fi as u64]);
            let copies: Vec<usize> = index::sample(&mut rng, idx.len(), k).iter().map(|i| idx[i]).collect();
            let dup: Vec<usize> = idx.iter().chain(&copies).copied().collect();
            let after = ev.catalogue(&suite.suite_id, &dup);
            let base = [
                ("fraction", fraction.to_string()),
                ("duplicated", k.to_string()),
                ("size", idx.len().to_string()),
            ];
            for (b, a) in before.iter().zip(&after) {
                let mut p = params(&base);
                p.insert("mode".into(), "literal".into());
                out.push(ExperimentRecord::compare(ExperimentKind::Duplicates, &suite.suite_id, b, a, p));
            }
            let deduped = ev.dedup_indices(&dup);
            let mats = ev.suite_matrices(&deduped);
            for (&distance, m) in PairwiseDistanceId::ALL.iter().zip(&mats) {
                let measure = DiversityMeasureId::aggregated(distance, AggregationId::Sum);
                let b = before.iter().find(|v| v.measure == measure).expect("catalogue is complete");
                let a = match m {
                    Ok(m) => DiversityValue::ok(measure, &suite.suite_id, exact_sum(m.upper_triangle())),
                    Err(e) => DiversityValue::failed(measure, &suite.suite_id, e),
                };
                let mut p = params(&base);
                p.insert("mode".into(), "dedup".into());
                out.push(ExperimentRecord::compare(ExperimentKind::Duplicates, &suite.suite_id, b, &a, p));
            }
        }
    }
    Ok(out)
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn timed_measures(
    ev: &PoolEvaluator,
    suite_id: &str,
    idx: &[usize],
) -> Vec<(DiversityValue, f64)> {
    let cfg = ev.config();
    let refs: Vec<&PreparedRoad> = idx.iter().map(|&i| &ev.prepared()[i]).collect();
    let mut out = Vec::with_capacity(47);
    for distance in PairwiseDistanceId::ALL {
        let t = Instant::now();
        let m = distance_matrix_prepared(&refs, distance, Some(ev.norms()), cfg.aligned, Schedule::Sequential);
        let matrix_time = secs(t);
        for aggregation in AggregationId::ALL {
            let measure = DiversityMeasureId::aggregated(distance, aggregation);
            match &m {
                Ok(m) => {
                    let t = Instant::now();
                    let (value, timed_out) = aggregate(m, aggregation, cfg.weitzman_budget());
                    let v = DiversityValue {
                        timed_out,
                        ..DiversityValue::ok(measure, suite_id, value)
                    };
                    out.push((v, matrix_time + secs(t)));
                }
                Err(e) => out.push((DiversityValue::failed(measure, suite_id, e), matrix_time)),
            }
        }
    }
    let suite: Vec<_> = idx.iter().map(|&i| ev.roads()[i].clone()).collect();
    let t = Instant::now();
    let tsd = crate::direct_measures::test_set_diameter(&suite, cfg.codec);
    let tsd_time = secs(t);
    out.push((
        match tsd {
            Ok(v) => DiversityValue::ok(DiversityMeasureId::TestSetDiameter, suite_id, v),
            Err(e) => DiversityValue::failed(DiversityMeasureId::TestSetDiameter, suite_id, e),
        },
        tsd_time,
    ));
    let t = Instant::now();
    let hull = crate::direct_measures::convex_hull_diversity(&suite, cfg.hull_aligned);
    out.push((DiversityValue::ok(DiversityMeasureId::ConvexHull, suite_id, hull), secs(t)));
    out
}

/// Wall time of every measure computed from scratch on each suite,
/// sequentially. The first suite is run once untimed as a warm-up.
pub fn efficiency_experiment(
    ev: &PoolEvaluator,
    suites: &[TestSuite],
) -> Result<Vec<ExperimentRecord>, StudyError> {
    if let Some(first) = suites.first() {
        let idx = ev.indices(&first.road_ids)?;
        let _ = timed_measures(ev, &first.suite_id, &idx);
    }
    let mut out = Vec::new();
    for suite in suites {
        let idx = ev.indices(&suite.road_ids)?;
        for (v, wall) in timed_measures(ev, &suite.suite_id, &idx) {
            let mut p = params(&[("size", idx.len().to_string())]);
            p.insert("timed_out".into(), v.timed_out.to_string());
            if let Some(e) = &v.error {
                p.insert("error".into(), e.clone());
            }
            out.push(ExperimentRecord {
                experiment: ExperimentKind::Efficiency,
                suite_id: suite.suite_id.clone(),
                measure: v.measure,
                before: None,
                after: v.error.is_none().then_some(v.value),
                delta: None,
                wall_time: Some(wall),
                parameters: p,
                timings: BTreeMap::new(),
            });
        }
    }
    Ok(out)
}

/// How many roads an additivity step appends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Addition {
    Roads(usize),
    Fraction(f64),
}

impl Addition {
    pub const DEFAULT: [Addition; 4] = [
        Addition::Roads(1),
        Addition::Roads(2),
        Addition::Fraction(0.1),
        Addition::Fraction(0.2),
    ];

    pub fn count(self, size: usize) -> usize {
        match self {
            Addition::Roads(k) => k,
            Addition::Fraction(f) => count_for(f, size),
        }
    }

    pub fn label(self) -> String {
        match self {
            Addition::Roads(k) => format!("{k} roads"),
            Addition::Fraction(f) => format!("{}%", f * 100.0),
        }
    }
}

/// Compares recomputing the aggregated measures from scratch after an
/// extension with extending the existing distance matrix by the new rows.
/// Sum gets its incremental update (old sum plus the new entries); the
/// other aggregations are recomputed on the extended matrix.
pub fn additivity_experiment(
    ev: &PoolEvaluator,
    suites: &[TestSuite],
    additions: &[Addition],
    seed: u64,
) -> Result<Vec<ExperimentRecord>, StudyError> {
    let cfg = ev.config();
    let budget = cfg.weitzman_budget();
    let mut out = Vec::new();
    for (si, suite) in suites.iter().enumerate() {
        let idx = ev.indices(&suite.road_ids)?;
        let n = idx.len();
        let base_refs: Vec<&PreparedRoad> = idx.iter().map(|&i| &ev.prepared()[i]).collect();
        for (ai, &addition) in additions.iter().enumerate() {
            let k = addition.count(n);
            let labels = [seeds::label("additivity"), si as u64, ai as u64];
            let ext = draw_extension(ev, &idx, k, seed, &labels)?;
            let refs: Vec<&PreparedRoad> = idx.iter().chain(&ext).map(|&i| &ev.prepared()[i]).collect();
            for distance in PairwiseDistanceId::ALL {
                let old = distance_matrix_prepared(&base_refs, distance, Some(ev.norms()), cfg.aligned, Schedule::Sequential)?;

                let t = Instant::now();
                let full = distance_matrix_prepared(&refs, distance, Some(ev.norms()), cfg.aligned, Schedule::Sequential)?;
                let full_matrix_time = secs(t);

                let t = Instant::now();
                let (grown, evaluations) = extend_matrix(&old, &refs, distance, Some(ev.norms()), cfg.aligned)?;
                let inc_matrix_time = secs(t);

                for aggregation in AggregationId::ALL {
                    let measure = DiversityMeasureId::aggregated(distance, aggregation);
                    let (old_value, _) = aggregate(&old, aggregation, budget);

                    let t = Instant::now();
                    let (full_value, timed_out) = aggregate(&full, aggregation, budget);
                    let full_time = full_matrix_time + secs(t);

                    let t = Instant::now();
                    let inc_value = if aggregation == AggregationId::Sum {
                        let new_entries = (n..refs.len()).flat_map(|j| (0..j).map(move |i| (i, j)));
                        old_value + exact_sum(new_entries.map(|(i, j)| grown.get(i, j)))
                    } else {
                        aggregate(&grown, aggregation, budget).0
                    };
                    let inc_time = inc_matrix_time + secs(t);

                    let mut p = params(&[
                        ("addition", addition.label()),
                        ("added", k.to_string()),
                        ("size", n.to_string()),
                        ("evaluations", evaluations.to_string()),
                        ("full_value", full_value.to_string()),
                    ]);
                    let timings = BTreeMap::from([
                        ("full_time".to_string(), full_time),
                        ("incremental_time".to_string(), inc_time),
                        ("ratio".to_string(), inc_time / full_time.max(f64::MIN_POSITIVE)),
                    ]);
                    p.insert("timed_out".into(), timed_out.to_string());
                    out.push(ExperimentRecord {
                        experiment: ExperimentKind::Additivity,
                        suite_id: suite.suite_id.clone(),
                        measure,
                        before: Some(old_value),
                        after: Some(inc_value),
                        delta: Some(inc_value - old_value),
                        wall_time: Some(inc_time),
                        parameters: p,
                        timings,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Summary statistics of one quantity over a group of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureStats {
    pub experiment: ExperimentKind,
    pub measure: DiversityMeasureId,
    pub group: String,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
    /// Records whose delta was negative.
    pub decreases: usize,
}

/// Groups records by `(measure, key(record))` and summarizes `value(record)`
/// with mean, min, max and population standard deviation.
pub fn summarize(
    records: &[ExperimentRecord],
    key: impl Fn(&ExperimentRecord) -> String,
    value: impl Fn(&ExperimentRecord) -> Option<f64>,
) -> Vec<MeasureStats> {
    let mut groups: BTreeMap<(DiversityMeasureId, String), (ExperimentKind, Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let entry = groups
            .entry((r.measure, key(r)))
            .or_insert((r.experiment, Vec::new(), 0));
        if let Some(v) = value(r) {
            entry.1.push(v);
        }
        if r.delta.is_some_and(|d| d < 0.0) {
            entry.2 += 1;
        }
    }
    groups
        .into_iter()
        .filter(|(_, (_, vs, _))| !vs.is_empty())
        .map(|((measure, group), (experiment, vs, decreases))| {
            let [mean, min, max, std] = crate::behavior::summary_stats(&vs);
            MeasureStats {
                experiment,
                measure,
                group,
                count: vs.len(),
                mean,
                min,
                max,
                std,
                decreases,
            }
        })
        .collect()
}
