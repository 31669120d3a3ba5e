use super::{sha256_hex, write_roads, write_traces, CorpusManifest, IoError, RoadChecks, RoadRecord, FORMAT_VERSION};
use crate::behavior::{SimulationTrace, TraceRecord};
use crate::geometry::{
    curvature_profile, interpolate_road, self_intersects, ControlPointRoad, Point, RoadGeometry,
};
use crate::seeds;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Agent whose speed drops and whose lateral offset grows with curvature.
pub const CURVATURE_AGENT: &str = "curvature";
/// Agent driving the centerline at a fixed speed.
pub const CONSTANT_AGENT: &str = "constant";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeFamily {
    Straight,
    Arc,
    SCurve,
    RandomSpline,
}

impl ShapeFamily {
    pub const ALL: [ShapeFamily; 4] = [
        ShapeFamily::Straight,
        ShapeFamily::Arc,
        ShapeFamily::SCurve,
        ShapeFamily::RandomSpline,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub count: usize,
    pub seed: u64,
    /// Families are assigned round-robin.
    pub families: Vec<ShapeFamily>,
    pub trace_hz: f64,
    pub with_traces: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 7,
            families: ShapeFamily::ALL.to_vec(),
            trace_hz: 10.0,
            with_traces: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub roads: Vec<ControlPointRoad>,
    pub families: Vec<ShapeFamily>,
    pub traces: Vec<SimulationTrace>,
}

/// Heading-and-position walker that emits control points.
struct Turtle {
    pos: Point,
    heading: f64,
    points: Vec<Point>,
}

impl Turtle {
    fn new(heading: f64) -> Self {
        Self {
            pos: Point::new(0.0, 0.0),
            heading,
            points: vec![Point::new(0.0, 0.0)],
        }
    }

    fn forward(&mut self, len: f64, steps: usize) {
        let step = len / steps as f64;
        for _ in 0..steps {
            self.pos = self.pos.add(Point::new(self.heading.cos(), self.heading.sin()).scale(step));
            self.points.push(self.pos);
        }
    }

    /// Circular arc; positive sweep turns left. One point per degree.
    fn arc(&mut self, radius: f64, sweep: f64) {
        let steps = ((sweep.abs() / (PI / 180.0)).ceil() as usize).max(2);
        let side = sweep.signum();
        let center = self
            .pos
            .add(Point::new(-self.heading.sin(), self.heading.cos()).scale(side * radius));
        let start = self.pos;
        for k in 1..=steps {
            self.pos = start.rotate_about(center, sweep * k as f64 / steps as f64);
            self.points.push(self.pos);
        }
        self.heading += sweep;
    }
}

/// Control points of a circular arc of the given radius and signed sweep.
pub fn arc_control_points(radius: f64, sweep: f64) -> Vec<Point> {
    let mut t = Turtle::new(0.0);
    t.arc(radius, sweep);
    t.points
}

fn shape(family: ShapeFamily, rng: &mut impl Rng) -> Vec<Point> {
    let mut t = Turtle::new(rng.gen_range(-PI..PI));
    let sign = |rng: &mut dyn rand::RngCore| if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    match family {
        ShapeFamily::Straight => t.forward(rng.gen_range(60.0..250.0), 3),
        ShapeFamily::Arc => {
            let s = sign(rng);
            t.arc(rng.gen_range(20.0..100.0), s * rng.gen_range(PI / 3.0..4.0 * PI / 3.0));
        }
        ShapeFamily::SCurve => {
            let s = sign(rng);
            t.arc(rng.gen_range(20.0..80.0), s * rng.gen_range(PI / 4.0..PI));
            let gap = rng.gen_range(0.0..30.0);
            if gap > 5.0 {
                t.forward(gap, 2);
            }
            t.arc(rng.gen_range(20.0..80.0), -s * rng.gen_range(PI / 4.0..PI));
        }
        ShapeFamily::RandomSpline => {
            let n = rng.gen_range(5..=9);
            for _ in 0..n {
                t.heading += rng.gen_range(-0.7..0.7);
                t.forward(rng.gen_range(25.0..45.0), 1);
            }
        }
    }
    t.points
}

fn acceptable(road: &ControlPointRoad, checks: &RoadChecks) -> Option<RoadGeometry> {
    let g = interpolate_road(road, checks.spacing).ok()?;
    if self_intersects(&g) {
        return None;
    }
    let k = curvature_profile(&g).ok()?.max_abs_kappa();
    (k <= checks.max_curvature).then_some(g)
}

/// Signed curvature at arclength `s`, averaged over a 10 m window to damp
/// resampling noise.
fn curvature_lookup(g: &RoadGeometry) -> impl Fn(f64) -> f64 {
    let p = curvature_profile(g).expect("accepted roads have a curvature profile");
    move |s: f64| {
        let lo = p.s.partition_point(|&x| x < s - 5.0);
        let hi = p.s.partition_point(|&x| x <= s + 5.0);
        if hi <= lo {
            let i = p.s.partition_point(|&x| x < s).min(p.s.len().saturating_sub(1));
            return p.kappa.get(i).copied().unwrap_or(0.0);
        }
        p.kappa[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
    }
}

fn left_normal(g: &RoadGeometry, s: f64) -> Point {
    let d = g.point_at(s + 0.5).sub(g.point_at(s - 0.5));
    let n = d.norm();
    Point::new(-d.y / n, d.x / n)
}

/// Drives `g` with speed `speed(κ)` and lateral offset `offset(κ)`.
fn drive(
    g: &RoadGeometry,
    agent: &str,
    hz: f64,
    speed: impl Fn(f64) -> f64,
    offset: impl Fn(f64) -> f64,
    steering: impl Fn(f64) -> f64,
) -> SimulationTrace {
    let dt = 1.0 / hz;
    let kappa = curvature_lookup(g);
    let mut samples = Vec::new();
    let mut s = 0.0;
    while s <= g.length() {
        let k = kappa(s);
        samples.push((s, k, speed(k)));
        s += speed(k) * dt;
    }
    let n = samples.len();
    let records = (0..n)
        .map(|i| {
            let (s, k, v) = samples[i];
            let next_v = samples.get(i + 1).map_or(v, |x| x.2);
            let prev_v = if i + 1 == n && i > 0 { samples[i - 1].2 } else { v };
            let a = if i + 1 == n { (v - prev_v) / dt } else { (next_v - v) / dt };
            let p = g.point_at(s).add(left_normal(g, s).scale(offset(k)));
            TraceRecord {
                t: i as f64 * dt,
                x: p.x,
                y: p.y,
                velocity: v,
                steering: steering(k),
                throttle: (0.2 + a / 3.0).clamp(0.0, 1.0),
                brake: (-a / 5.0).clamp(0.0, 1.0),
            }
        })
        .collect();
    SimulationTrace {
        road_id: g.id().to_string(),
        agent_id: agent.to_string(),
        records,
    }
}

/// Rule-based traces: the curvature agent slows to `8 + 12 / (1 + 40|κ|)`
/// m/s and drifts `20κ` m (at most 1.5 m) toward the inside of bends; the
/// constant agent holds 10 m/s on the centerline.
pub fn synthetic_traces(g: &RoadGeometry, hz: f64) -> Vec<SimulationTrace> {
    vec![
        drive(g, CONSTANT_AGENT, hz, |_| 10.0, |_| 0.0, |_| 0.0),
        drive(
            g,
            CURVATURE_AGENT,
            hz,
            |k| 8.0 + 12.0 / (1.0 + 40.0 * k.abs()),
            |k| (20.0 * k).clamp(-1.5, 1.5),
            |k| (10.0 * k).clamp(-1.0, 1.0),
        ),
    ]
}

/// Deterministic corpus of the requested shape families. Candidates that
/// self-intersect or bend too sharply are redrawn.
pub fn generate_synthetic_corpus(spec: &SynthSpec) -> SyntheticCorpus {
    let checks = RoadChecks::default();
    let families = if spec.families.is_empty() {
        ShapeFamily::ALL.to_vec()
    } else {
        spec.families.clone()
    };
    let mut out = SyntheticCorpus {
        roads: Vec::with_capacity(spec.count),
        families: Vec::with_capacity(spec.count),
        traces: Vec::new(),
    };
    for k in 0..spec.count {
        let family = families[k % families.len()];
        let id = format!("road-{:04}", k + 1);
        let (road, g) = (0u64..)
            .find_map(|attempt| {
                let mut rng = seeds::rng(spec.seed, &[seeds::label("road"), k as u64, attempt]);
                let road = ControlPointRoad::new(id.clone(), shape(family, &mut rng));
                acceptable(&road, &checks).map(|g| (road, g))
            })
            .expect("generator eventually yields a valid road");
        if spec.with_traces {
            out.traces.extend(synthetic_traces(&g, spec.trace_hz));
        }
        out.roads.push(road);
        out.families.push(family);
    }
    out.traces
        .sort_by(|a, b| (&a.road_id, &a.agent_id).cmp(&(&b.road_id, &b.agent_id)));
    out
}

impl SyntheticCorpus {
    /// Writes `roads.json`, `traces.csv` (when traces exist) and
    /// `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<CorpusManifest, IoError> {
        let records: Vec<RoadRecord> = self.roads.iter().map(RoadRecord::from_control_points).collect();
        let roads_path = dir.join("roads.json");
        write_roads(&roads_path, &records)?;
        let bytes = std::fs::read(&roads_path).map_err(super::io_err(&roads_path))?;
        let traces_path = if self.traces.is_empty() {
            None
        } else {
            write_traces(&dir.join("traces.csv"), &self.traces)?;
            Some("traces.csv".to_string())
        };
        let manifest = CorpusManifest {
            roads_path: "roads.json".into(),
            traces_path,
            format_version: FORMAT_VERSION,
            road_count: records.len(),
            checksum: sha256_hex(&bytes),
        };
        manifest.write(&dir.join("manifest.json"))?;
        Ok(manifest)
    }
}
