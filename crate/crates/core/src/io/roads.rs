use super::{io_err, sha256_hex, write_file, IoError};
use crate::geometry::{
    curvature_profile, interpolate_road, self_intersects, ControlPointRoad, Point, RoadGeometry,
    DEFAULT_LANE_WIDTH,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashSet;
use std::path::{Path, PathBuf};

/// Version of the road document layout.
pub const FORMAT_VERSION: u32 = 1;

/// One road as stored on disk: either generator control points, which are
/// spline-interpolated on load, or already interpolated road points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub road_points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane_width: Option<f64>,
}

impl RoadRecord {
    pub fn from_control_points(road: &ControlPointRoad) -> Self {
        Self {
            id: road.id.clone(),
            control_points: Some(road.control_points.iter().map(|p| [p.x, p.y]).collect()),
            road_points: None,
            lane_width: (road.lane_width != DEFAULT_LANE_WIDTH).then_some(road.lane_width),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RoadSource {
    ControlPoints(ControlPointRoad),
    Interpolated,
}

/// Quality gates applied while loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoadChecks {
    /// Arclength spacing of the interpolated centerline, in meters.
    pub spacing: f64,
    /// Largest admissible |curvature| in 1/m.
    pub max_curvature: f64,
    pub reject_self_intersecting: bool,
}

impl Default for RoadChecks {
    fn default() -> Self {
        Self {
            spacing: 1.0,
            max_curvature: 0.5,
            reject_self_intersecting: true,
        }
    }
}

/// Accepted roads plus every excluded road with its reason.
#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub roads: Vec<RoadGeometry>,
    pub sources: Vec<RoadSource>,
    pub excluded: Vec<(String, String)>,
}

fn points(v: &[[f64; 2]]) -> Vec<Point> {
    v.iter().map(|&[x, y]| Point::new(x, y)).collect()
}

fn build(record: &RoadRecord, checks: &RoadChecks) -> Result<(RoadGeometry, RoadSource), String> {
    let (g, source) = match (&record.control_points, &record.road_points) {
        (Some(cp), None) => {
            let road = ControlPointRoad {
                id: record.id.clone(),
                control_points: points(cp),
                lane_width: record.lane_width.unwrap_or(DEFAULT_LANE_WIDTH),
            };
            let g = interpolate_road(&road, checks.spacing).map_err(|e| e.to_string())?;
            (g, RoadSource::ControlPoints(road))
        }
        (None, Some(rp)) => (
            RoadGeometry::new(record.id.clone(), points(rp)).map_err(|e| e.to_string())?,
            RoadSource::Interpolated,
        ),
        _ => return Err("exactly one of control_points and road_points is required".into()),
    };
    if checks.reject_self_intersecting && self_intersects(&g) {
        return Err("self-intersecting".into());
    }
    let kmax = curvature_profile(&g).map_err(|e| e.to_string())?.max_abs_kappa();
    if kmax > checks.max_curvature {
        return Err(format!("max curvature {kmax:.4} exceeds {}", checks.max_curvature));
    }
    Ok((g, source))
}

/// Loads a road document: either `{"format_version": 1, "roads": [...]}` or
/// a bare list of road records. Invalid roads are excluded and listed.
pub fn load_roads(path: &Path, checks: &RoadChecks) -> Result<LoadedCorpus, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let schema = |message: String| IoError::SchemaMismatch {
        path: path.to_path_buf(),
        message,
    };
    let list = match doc {
        Value::Array(a) => a,
        Value::Object(mut o) => {
            if let Some(v) = o.get("format_version") {
                if v.as_u64() != Some(FORMAT_VERSION as u64) {
                    return Err(schema(format!("unsupported format_version {v}")));
                }
            }
            match o.remove("roads") {
                Some(Value::Array(a)) => a,
                _ => return Err(schema("missing \"roads\" list".into())),
            }
        }
        _ => return Err(schema("expected a list of roads".into())),
    };
    let mut out = LoadedCorpus::default();
    let mut seen = HashSet::new();
    for (k, v) in list.into_iter().enumerate() {
        let record: RoadRecord =
            serde_json::from_value(v).map_err(|e| schema(format!("road {k}: {e}")))?;
        if !seen.insert(record.id.clone()) {
            out.excluded.push((record.id, "duplicate id".into()));
            continue;
        }
        match build(&record, checks) {
            Ok((g, source)) => {
                out.roads.push(g);
                out.sources.push(source);
            }
            Err(reason) => out.excluded.push((record.id, reason)),
        }
    }
    if out.roads.is_empty() {
        return Err(IoError::EmptyCorpus(path.to_path_buf()));
    }
    Ok(out)
}

pub fn write_roads(path: &Path, records: &[RoadRecord]) -> Result<(), IoError> {
    #[derive(Serialize)]
    struct Doc<'a> {
        format_version: u32,
        roads: &'a [RoadRecord],
    }
    let mut text = serde_json::to_string_pretty(&Doc {
        format_version: FORMAT_VERSION,
        roads: records,
    })
    .expect("road records serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Describes a corpus on disk; paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub roads_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces_path: Option<String>,
    pub format_version: u32,
    pub road_count: usize,
    /// SHA-256 of the road document.
    pub checksum: String,
}

impl CorpusManifest {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| IoError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(path, text.as_bytes())
    }

    pub fn resolve(&self, manifest_path: &Path, rel: &str) -> PathBuf {
        manifest_path.parent().unwrap_or(Path::new(".")).join(rel)
    }

    /// Checks the road document checksum and record count.
    pub fn verify(&self, manifest_path: &Path) -> Result<(), IoError> {
        let roads = self.resolve(manifest_path, &self.roads_path);
        let bytes = std::fs::read(&roads).map_err(io_err(&roads))?;
        if sha256_hex(&bytes) != self.checksum {
            return Err(IoError::Checksum { path: roads });
        }
        let doc: Value = serde_json::from_slice(&bytes).map_err(|e| IoError::Parse {
            path: roads.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let count = doc
            .get("roads")
            .and_then(Value::as_array)
            .or(doc.as_array())
            .map_or(0, Vec::len);
        if count != self.road_count {
            return Err(IoError::SchemaMismatch {
                path: roads,
                message: format!("{count} roads on disk, manifest says {}", self.road_count),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_one_road() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "r.json",
            r#"[{"id": "a", "control_points": [[0,0],[30,5],[60,0],[90,-5]]}]"#,
        );
        let c = load_roads(&p, &RoadChecks::default()).unwrap();
        assert_eq!(c.roads.len(), 1);
        assert!(c.excluded.is_empty());
        assert!(matches!(c.sources[0], RoadSource::ControlPoints(_)));
    }

    #[test]
    fn excludes_bad_roads_with_reasons() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "r.json",
            r#"{"format_version": 1, "roads": [
                {"id": "ok", "road_points": [[0,0],[10,0],[20,1]]},
                {"id": "dup", "control_points": [[0,0],[10,0],[10,0],[20,0]]},
                {"id": "ok", "road_points": [[0,0],[10,0],[20,1]]},
                {"id": "loop", "road_points": [[0,0],[10,0],[10,10],[5,-5]]}
            ]}"#,
        );
        let c = load_roads(&p, &RoadChecks::default()).unwrap();
        assert_eq!(c.roads.len(), 1);
        let ids: Vec<&str> = c.excluded.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["dup", "ok", "loop"]);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "r.json", "[\n{\"id\": \"a\",\n oops}]");
        match load_roads(&p, &RoadChecks::default()) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let e = write(dir.path(), "e.json", "[]");
        assert!(matches!(load_roads(&e, &RoadChecks::default()), Err(IoError::EmptyCorpus(_))));
    }
}
