use super::{io_err, write_file, IoError};
use crate::behavior::{SimulationTrace, TraceRecord};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

pub const TRACE_HEADER: [&str; 9] = [
    "road_id", "agent_id", "t", "x", "y", "velocity", "steering", "throttle", "brake",
];

#[derive(Debug, Deserialize)]
struct Row {
    road_id: String,
    agent_id: String,
    t: f64,
    x: f64,
    y: f64,
    velocity: f64,
    steering: f64,
    throttle: f64,
    brake: f64,
}

impl Row {
    fn record(&self) -> TraceRecord {
        TraceRecord {
            t: self.t,
            x: self.x,
            y: self.y,
            velocity: self.velocity,
            steering: self.steering,
            throttle: self.throttle,
            brake: self.brake,
        }
    }
}

/// Reads a trace table and groups rows by `(road_id, agent_id)`, ordered by
/// that key. Rows of one trace must be contiguous in time order; the first
/// timestamp that does not increase is reported with its 1-based data row.
pub fn load_traces(path: &Path) -> Result<Vec<SimulationTrace>, IoError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header != TRACE_HEADER {
        return Err(IoError::SchemaMismatch {
            path: path.to_path_buf(),
            message: format!("expected header {}, got {}", TRACE_HEADER.join(","), header.join(",")),
        });
    }
    let mut groups: BTreeMap<(String, String), Vec<TraceRecord>> = BTreeMap::new();
    for (k, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let record = row.record();
        let records = groups.entry((row.road_id.clone(), row.agent_id.clone())).or_default();
        if let Some(prev) = records.last() {
            if !(record.t > prev.t) {
                return Err(IoError::NonMonotoneTime {
                    path: path.to_path_buf(),
                    row: k + 1,
                    road_id: row.road_id,
                    agent_id: row.agent_id,
                });
            }
        }
        records.push(record);
    }
    Ok(groups
        .into_iter()
        .map(|((road_id, agent_id), records)| SimulationTrace {
            road_id,
            agent_id,
            records,
        })
        .collect())
}

pub fn write_traces(path: &Path, traces: &[SimulationTrace]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).map_err(|e| csv_error(path, e))?;
    for tr in traces {
        for r in &tr.records {
            let fields = [r.t, r.x, r.y, r.velocity, r.steering, r.throttle, r.brake];
            let mut row = vec![tr.road_id.clone(), tr.agent_id.clone()];
            row.extend(fields.iter().map(f64::to_string));
            w.write_record(&row).map_err(|e| csv_error(path, e))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| io_err(path)(e.into_error()))?;
    write_file(path, &bytes)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => IoError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[&str]) -> String {
        let mut s = TRACE_HEADER.join(",");
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s.push('\n');
        s
    }

    #[test]
    fn groups_by_road_and_agent() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let rows: Vec<String> = (0..30)
            .flat_map(|i| {
                let t = i as f64 * 0.1;
                ["b", "a"].map(|agent| format!("r1,{agent},{t},{},0,10,0,0.2,0", 10.0 * t))
            })
            .collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        std::fs::write(&p, table(&refs)).unwrap();
        let traces = load_traces(&p).unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces[0].agent_id, "a");
        assert!(traces.iter().all(|t| t.records.len() == 30));

        let q = dir.path().join("out.csv");
        write_traces(&q, &traces).unwrap();
        assert_eq!(load_traces(&q).unwrap(), traces);
    }

    #[test]
    fn rejects_time_going_backwards() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(
            &p,
            table(&["r,a,0,0,0,1,0,0,0", "r,a,0.1,1,0,1,0,0,0", "r,a,0.1,2,0,1,0,0,0"]),
        )
        .unwrap();
        match load_traces(&p) {
            Err(IoError::NonMonotoneTime { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "road_id,t\nr,0\n").unwrap();
        assert!(matches!(load_traces(&p), Err(IoError::SchemaMismatch { .. })));
    }
}
