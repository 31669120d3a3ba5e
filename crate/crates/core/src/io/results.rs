use super::traces::csv_error;
use super::{write_file, IoError, RunConfig};
use crate::study::{CorrelationResult, CorrelationTable, DmTable, ExperimentRecord, MeasureStats};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance columns appended to every result row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultMeta {
    pub seed: u64,
    pub config_hash: String,
    pub codec: String,
    pub tool_version: String,
}

impl ResultMeta {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            seed: cfg.seed,
            config_hash: cfg.hash(),
            codec: cfg.catalogue.codec.id(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    const COLUMNS: [&'static str; 4] = ["seed", "config_hash", "codec", "tool_version"];

    fn fields(&self) -> [String; 4] {
        [
            self.seed.to_string(),
            self.config_hash.clone(),
            self.codec.clone(),
            self.tool_version.clone(),
        ]
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
    meta: &ResultMeta,
) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut full: Vec<&str> = header.to_vec();
    full.extend(ResultMeta::COLUMNS);
    w.write_record(&full).map_err(|e| csv_error(path, e))?;
    for mut row in rows {
        row.extend(meta.fields());
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| super::io_err(path)(e.into_error()))?;
    write_file(path, &bytes)
}

const RECORD_COLUMNS: [&str; 9] = [
    "experiment", "suite_id", "measure", "before", "after", "delta", "wall_time", "timings",
    "parameters",
];

/// Experiment records as one flat table. `parameters` and `timings` are
/// JSON objects; timing columns are `wall_time` and `timings`.
pub fn write_records(path: &Path, records: &[ExperimentRecord], meta: &ResultMeta) -> Result<(), IoError> {
    let rows = records.iter().map(|r| {
        vec![
            r.experiment.name().to_string(),
            r.suite_id.clone(),
            r.measure.to_string(),
            num(r.before),
            num(r.after),
            num(r.delta),
            num(r.wall_time),
            serde_json::to_string(&r.timings).expect("timings serialize"),
            serde_json::to_string(&r.parameters).expect("parameters serialize"),
        ]
    });
    write_csv(path, &RECORD_COLUMNS, rows, meta)
}

#[derive(Deserialize)]
struct RecordRow {
    experiment: String,
    suite_id: String,
    measure: String,
    before: Option<f64>,
    after: Option<f64>,
    delta: Option<f64>,
    wall_time: Option<f64>,
    timings: String,
    parameters: String,
}

/// Reads a table written by [`write_records`].
pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>, IoError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for (k, row) in reader.deserialize::<RecordRow>().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let bad = |message: String| IoError::Parse {
            path: path.to_path_buf(),
            line: k + 2,
            message,
        };
        let experiment = serde_json::from_value(serde_json::Value::String(row.experiment))
            .map_err(|e| bad(e.to_string()))?;
        let measure = row.measure.parse().map_err(|e| bad(format!("{e}")))?;
        let timings: BTreeMap<String, f64> =
            serde_json::from_str(&row.timings).map_err(|e| bad(e.to_string()))?;
        let parameters: BTreeMap<String, String> =
            serde_json::from_str(&row.parameters).map_err(|e| bad(e.to_string()))?;
        out.push(ExperimentRecord {
            experiment,
            suite_id: row.suite_id,
            measure,
            before: row.before,
            after: row.after,
            delta: row.delta,
            wall_time: row.wall_time,
            parameters,
            timings,
        });
    }
    Ok(out)
}

/// Writes correlations as a flat table at `csv_path` and, together with the
/// provenance block, as a JSON document at `json_path`.
pub fn write_correlations(
    csv_path: &Path,
    json_path: &Path,
    results: &[CorrelationResult],
    meta: &ResultMeta,
) -> Result<(), IoError> {
    let header = [
        "group", "x", "y", "method", "coefficient", "p_value", "strength", "n", "degenerate", "note",
    ];
    let rows = results.iter().map(|c| {
        vec![
            c.group.clone(),
            c.x_label.clone(),
            c.y_label.clone(),
            format!("{:?}", c.method).to_lowercase(),
            c.coefficient.to_string(),
            c.p_value.to_string(),
            c.strength.name().to_string(),
            c.n.to_string(),
            c.degenerate.to_string(),
            c.note.clone().unwrap_or_default(),
        ]
    });
    write_csv(csv_path, &header, rows, meta)?;
    #[derive(Serialize)]
    struct Doc<'a> {
        meta: &'a ResultMeta,
        correlations: &'a [CorrelationResult],
    }
    write_json(json_path, &Doc { meta, correlations: results })
}

/// Flattens correlation tables into their off-diagonal upper triangle.
pub fn correlation_cells(tables: &[CorrelationTable]) -> Vec<CorrelationResult> {
    let mut out = Vec::new();
    for t in tables {
        for i in 0..t.labels.len() {
            for j in i + 1..t.labels.len() {
                out.push(t.get(i, j).clone());
            }
        }
    }
    out
}

/// One row per suite, one column per measure; failed values are empty and
/// listed in `errors`, budget-limited ones in `timed_out`.
pub fn write_dm_table(path: &Path, table: &DmTable, meta: &ResultMeta) -> Result<(), IoError> {
    let measures: Vec<String> = table.measures().iter().map(|m| m.to_string()).collect();
    let mut header = vec!["suite_id", "group", "size", "mean_length"];
    header.extend(measures.iter().map(String::as_str));
    header.extend(["timed_out", "errors"]);
    let rows = table.rows.iter().map(|r| {
        let mut row = vec![
            r.suite_id.clone(),
            r.group.clone(),
            r.size.to_string(),
            r.mean_length.to_string(),
        ];
        row.extend(r.values.iter().map(|v| num(v.error.is_none().then_some(v.value))));
        let pick = |f: &dyn Fn(&crate::aggregation::DiversityValue) -> bool| {
            r.values.iter().filter(|v| f(v)).map(|v| v.measure.to_string()).collect::<Vec<_>>().join(";")
        };
        row.push(pick(&|v| v.timed_out));
        row.push(pick(&|v| v.error.is_some()));
        row
    });
    write_csv(path, &header, rows, meta)
}

pub fn write_stats(path: &Path, stats: &[MeasureStats], meta: &ResultMeta) -> Result<(), IoError> {
    let header = [
        "experiment", "measure", "group", "count", "mean", "min", "max", "std", "decreases",
    ];
    let rows = stats.iter().map(|s| {
        vec![
            s.experiment.name().to_string(),
            s.measure.to_string(),
            s.group.clone(),
            s.count.to_string(),
            s.mean.to_string(),
            s.min.to_string(),
            s.max.to_string(),
            s.std.to_string(),
            s.decreases.to_string(),
        ]
    });
    write_csv(path, &header, rows, meta)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("result serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::DiversityMeasureId;
    use crate::study::ExperimentKind;

    fn meta() -> ResultMeta {
        ResultMeta::new(&RunConfig::default())
    }

    #[test]
    fn empty_record_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_records(&p, &[], &meta()).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("experiment,suite_id,measure"));
        assert!(text.trim_end().ends_with("seed,config_hash,codec,tool_version"));
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let records: Vec<ExperimentRecord> = DiversityMeasureId::all()
            .into_iter()
            .enumerate()
            .map(|(k, m)| ExperimentRecord {
                experiment: ExperimentKind::Growth,
                suite_id: format!("all-n10-{k:03}"),
                measure: m,
                before: Some(0.1 * k as f64),
                after: (k % 3 != 0).then_some(1.0 / 3.0 + k as f64),
                delta: None,
                wall_time: Some(1e-7 * k as f64),
                parameters: BTreeMap::from([
                    ("fraction".to_string(), "0.1".to_string()),
                    ("error".to_string(), "a, \"quoted\"; message".to_string()),
                ]),
                timings: BTreeMap::from([("ratio".to_string(), 0.25)]),
            })
            .collect();
        write_records(&p, &records, &meta()).unwrap();
        assert_eq!(read_records(&p).unwrap(), records);
    }
}
