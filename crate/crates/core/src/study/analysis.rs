use super::{correlate, CorrelationResult, PoolEvaluator, StudyError, TestSuite};
use crate::aggregation::{DiversityMeasureId, DiversityValue};
use crate::behavior::{
    behavior_features, behavioral_diversity, derive_observations, validate_trace, BdReduction,
    BehaviorFeatureVector, BehaviorNorms, BehavioralDiversity, SimulationTrace, TraceChecks,
    TraceReport,
};
use crate::geometry::RoadGeometry;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Catalogue values of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub suite_id: String,
    pub group: String,
    pub size: usize,
    pub mean_length: f64,
    pub values: Vec<DiversityValue>,
}

/// Diversity values of many suites, one column per measure.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DmTable {
    pub rows: Vec<SuiteRow>,
}

impl DmTable {
    pub fn compute(ev: &PoolEvaluator, suites: &[TestSuite]) -> Result<Self, StudyError> {
        let rows = suites
            .iter()
            .map(|s| {
                let idx = ev.indices(&s.road_ids)?;
                Ok(SuiteRow {
                    suite_id: s.suite_id.clone(),
                    group: s.group.clone(),
                    size: idx.len(),
                    mean_length: ev.mean_length(&idx),
                    values: ev.catalogue(&s.suite_id, &idx),
                })
            })
            .collect::<Result<_, StudyError>>()?;
        Ok(Self { rows })
    }

    pub fn measures(&self) -> Vec<DiversityMeasureId> {
        self.rows
            .first()
            .map(|r| r.values.iter().map(|v| v.measure).collect())
            .unwrap_or_default()
    }

    /// Value of measure column `k` per row; NaN for failed entries.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| {
                let v = &r.values[k];
                if v.error.is_none() {
                    v.value
                } else {
                    f64::NAN
                }
            })
            .collect()
    }

    fn sizes(&self) -> BTreeSet<usize> {
        self.rows.iter().map(|r| r.size).collect()
    }
}

/// Correlates over the rows where both values are finite. Too few rows give a
/// flagged placeholder rather than an error.
fn paired(x_label: &str, y_label: &str, group: &str, xs: &[f64], ys: &[f64]) -> CorrelationResult {
    let (px, py): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    match correlate(x_label, y_label, group, &px, &py) {
        Ok(r) => r,
        Err(e) => CorrelationResult {
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            group: group.to_string(),
            method: super::CorrelationMethod::Spearman,
            coefficient: 0.0,
            p_value: 1.0,
            strength: super::Strength::Slight,
            n: px.len(),
            degenerate: true,
            note: Some(format!("skipped: {e}")),
        },
    }
}

/// Square correlation table between all measures for one group of suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub group: String,
    pub labels: Vec<String>,
    /// Row-major `labels.len()²` cells.
    pub cells: Vec<CorrelationResult>,
}

impl CorrelationTable {
    pub fn get(&self, i: usize, j: usize) -> &CorrelationResult {
        &self.cells[i * self.labels.len() + j]
    }
}

fn pairwise_table(group: &str, labels: &[String], columns: &[Vec<f64>]) -> CorrelationTable {
    let n = labels.len();
    let mut upper: HashMap<(usize, usize), CorrelationResult> = HashMap::new();
    for i in 0..n {
        for j in i..n {
            let mut r = paired(&labels[i], &labels[j], group, &columns[i], &columns[j]);
            if i == j && !r.degenerate {
                r.coefficient = 1.0;
                r.p_value = 0.0;
                r.strength = super::Strength::VeryHigh;
            }
            upper.insert((i, j), r);
        }
    }
    let mut cells = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i <= j {
                cells.push(upper[&(i, j)].clone());
            } else {
                let mut r = upper[&(j, i)].clone();
                std::mem::swap(&mut r.x_label, &mut r.y_label);
                cells.push(r);
            }
        }
    }
    CorrelationTable {
        group: group.to_string(),
        labels: labels.to_vec(),
        cells,
    }
}

/// Correlation of every pair of measures across suites, over all suites and
/// per suite size.
pub fn rq2_pairwise_dm_correlation(table: &DmTable) -> Vec<CorrelationTable> {
    let labels: Vec<String> = table.measures().iter().map(|m| m.to_string()).collect();
    let all: Vec<Vec<f64>> = (0..labels.len()).map(|k| table.column(k)).collect();
    let mut out = vec![pairwise_table("all", &labels, &all)];
    for size in table.sizes() {
        let keep: Vec<bool> = table.rows.iter().map(|r| r.size == size).collect();
        let cols: Vec<Vec<f64>> = all
            .iter()
            .map(|c| c.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect())
            .collect();
        out.push(pairwise_table(&format!("size={size}"), &labels, &cols));
    }
    out
}

/// Correlation of each measure with the mean road length of the suite,
/// over all suites and per suite size.
pub fn rq3_length_effect(table: &DmTable) -> Vec<CorrelationResult> {
    let lengths: Vec<f64> = table.rows.iter().map(|r| r.mean_length).collect();
    let measures = table.measures();
    let mut groups: Vec<(String, Vec<bool>)> = vec![("all".into(), vec![true; table.rows.len()])];
    for size in table.sizes() {
        groups.push((format!("size={size}"), table.rows.iter().map(|r| r.size == size).collect()));
    }
    let mut out = Vec::new();
    for (group, keep) in &groups {
        let pick = |v: &[f64]| -> Vec<f64> { v.iter().zip(keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect() };
        let ys = pick(&lengths);
        for (k, m) in measures.iter().enumerate() {
            out.push(paired(&m.to_string(), "mean_length", group, &pick(&table.column(k)), &ys));
        }
    }
    out
}

/// Which suites a measure-versus-BD correlation is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rq4Mode {
    All,
    LowDm,
    HighDm,
    LowBd,
    HighBd,
    ByLength,
}

impl Rq4Mode {
    pub fn name(self) -> &'static str {
        match self {
            Rq4Mode::All => "all",
            Rq4Mode::LowDm => "low_dm",
            Rq4Mode::HighDm => "high_dm",
            Rq4Mode::LowBd => "low_bd",
            Rq4Mode::HighBd => "high_bd",
            Rq4Mode::ByLength => "by_length",
        }
    }
}

/// Rows in the bottom (`high = false`) or top quartile of `key`: the
/// ⌊N/4⌋ rows after sorting by key, ties by row order.
fn quartile(rows: &[usize], key: &[f64], high: bool) -> Vec<usize> {
    let mut sorted: Vec<usize> = rows.iter().copied().filter(|&r| key[r].is_finite()).collect();
    sorted.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    let q = sorted.len() / 4;
    if high {
        sorted[sorted.len() - q..].to_vec()
    } else {
        sorted[..q].to_vec()
    }
}

/// Correlation of every measure with behavioral diversity for one agent.
/// `bd` maps suite id to BD; suites without a BD value are left out.
pub fn rq4_dm_bd_correlation(
    table: &DmTable,
    bd: &BTreeMap<String, f64>,
    agent_id: &str,
    mode: Rq4Mode,
) -> Vec<CorrelationResult> {
    let rows: Vec<usize> = (0..table.rows.len())
        .filter(|&r| bd.contains_key(&table.rows[r].suite_id))
        .collect();
    let bd_col: Vec<f64> = table
        .rows
        .iter()
        .map(|r| bd.get(&r.suite_id).copied().unwrap_or(f64::NAN))
        .collect();
    let y_label = format!("BD[{agent_id}]");
    let mut out = Vec::new();
    for (k, m) in table.measures().iter().enumerate() {
        let col = table.column(k);
        let mut subsets: Vec<(String, Vec<usize>)> = Vec::new();
        match mode {
            Rq4Mode::All => subsets.push(("all".into(), rows.clone())),
            Rq4Mode::LowDm => subsets.push(("low_dm".into(), quartile(&rows, &col, false))),
            Rq4Mode::HighDm => subsets.push(("high_dm".into(), quartile(&rows, &col, true))),
            Rq4Mode::LowBd => subsets.push(("low_bd".into(), quartile(&rows, &bd_col, false))),
            Rq4Mode::HighBd => subsets.push(("high_bd".into(), quartile(&rows, &bd_col, true))),
            Rq4Mode::ByLength => {
                let mut by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
                for &r in &rows {
                    by.entry(&table.rows[r].group).or_default().push(r);
                }
                subsets.extend(by.into_iter().map(|(g, rs)| (format!("length={g}"), rs)));
            }
        }
        for (label, subset) in subsets {
            let xs: Vec<f64> = subset.iter().map(|&r| col[r]).collect();
            let ys: Vec<f64> = subset.iter().map(|&r| bd_col[r]).collect();
            let group = format!("agent={agent_id};{label}");
            out.push(paired(&m.to_string(), &y_label, &group, &xs, &ys));
        }
    }
    out
}

/// Behavior features of every valid trace, keyed by agent and road.
#[derive(Debug, Clone, Default)]
pub struct BehaviorCorpus {
    pub features: BTreeMap<String, BTreeMap<String, BehaviorFeatureVector>>,
    /// Reports of traces that failed validation or feature derivation.
    pub rejected: Vec<TraceReport>,
}

pub fn behavior_features_by_road(
    roads: &[RoadGeometry],
    traces: &[SimulationTrace],
    checks: &TraceChecks,
) -> BehaviorCorpus {
    let by_id: HashMap<&str, &RoadGeometry> = roads.iter().map(|g| (g.id(), g)).collect();
    let mut out = BehaviorCorpus::default();
    for trace in traces {
        let Some(road) = by_id.get(trace.road_id.as_str()) else {
            out.rejected.push(TraceReport {
                road_id: trace.road_id.clone(),
                agent_id: trace.agent_id.clone(),
                flags: vec![],
                median_hz: None,
            });
            continue;
        };
        let report = match validate_trace(trace, road, checks) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if !report.is_valid() {
            out.rejected.push(report);
            continue;
        }
        match derive_observations(trace, road, checks.max_projection)
            .and_then(|obs| behavior_features(&obs))
        {
            Ok(f) => {
                out.features
                    .entry(trace.agent_id.clone())
                    .or_default()
                    .insert(trace.road_id.clone(), f);
            }
            Err(_) => out.rejected.push(report),
        }
    }
    out
}

/// Behavioral diversity of every suite for one agent, with normalization
/// bounds taken over all of that agent's roads. Suites with fewer than two
/// traced roads are skipped.
pub fn suite_behavioral_diversity(
    corpus: &BehaviorCorpus,
    agent_id: &str,
    suites: &[TestSuite],
    reduction: BdReduction,
) -> Result<(Vec<BehavioralDiversity>, BehaviorNorms), StudyError> {
    let feats = corpus
        .features
        .get(agent_id)
        .ok_or_else(|| StudyError::BadInput(format!("no traces for agent {agent_id}")))?;
    let norms = BehaviorNorms::from_vectors(feats.values())?;
    let mut out = Vec::with_capacity(suites.len());
    for s in suites {
        let fs: Vec<BehaviorFeatureVector> = s.road_ids.iter().filter_map(|id| feats.get(id).copied()).collect();
        if fs.len() < 2 {
            continue;
        }
        out.push(BehavioralDiversity {
            suite_id: s.suite_id.clone(),
            agent_id: agent_id.to_string(),
            value: behavioral_diversity(&fs, &norms, reduction)?,
        });
    }
    Ok((out, norms))
}
