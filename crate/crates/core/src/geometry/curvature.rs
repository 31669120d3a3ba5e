use super::{GeometryError, RoadGeometry};
use serde::{Deserialize, Serialize};

/// Signed curvature at interior points and its arclength derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    pub kappa: Vec<f64>,
    /// Arclength of each interior point.
    pub s: Vec<f64>,
    /// Forward differences of `kappa` over `s`.
    pub dkappa_ds: Vec<f64>,
}

impl CurvatureProfile {
    pub fn max_abs_kappa(&self) -> f64 {
        self.kappa.iter().fold(0.0, |m, k| m.max(k.abs()))
    }

    pub fn mean_abs_kappa(&self) -> f64 {
        if self.kappa.is_empty() {
            return 0.0;
        }
        self.kappa.iter().map(|k| k.abs()).sum::<f64>() / self.kappa.len() as f64
    }
}

/// Signed Menger curvature: inverse circumradius of each consecutive point
/// triplet, positive for left (counter-clockwise) turns.
pub fn curvature_profile(g: &RoadGeometry) -> Result<CurvatureProfile, GeometryError> {
    let pts = g.points();
    let cum = g.cum_arclength();
    let mut kappa = Vec::with_capacity(pts.len() - 2);
    let mut s = Vec::with_capacity(pts.len() - 2);
    for (i, w) in pts.windows(3).enumerate() {
        let (a, b, c) = (w[0], w[1], w[2]);
        let ab = b.sub(a);
        let bc = c.sub(b);
        let ac = c.sub(a);
        let denom = ab.norm() * bc.norm() * ac.norm();
        if denom <= 0.0 || !denom.is_finite() {
            return Err(GeometryError::DegenerateRoad(format!(
                "{}: zero-length triplet at index {}",
                g.id(),
                i + 1
            )));
        }
        kappa.push(2.0 * ab.cross(bc) / denom);
        s.push(cum[i + 1]);
    }
    let dkappa_ds = kappa
        .windows(2)
        .zip(s.windows(2))
        .map(|(k, s)| (k[1] - k[0]) / (s[1] - s[0]))
        .collect();
    Ok(CurvatureProfile { kappa, s, dkappa_ds })
}

/// Per-frame curvature statistics:
/// (mean |κ|, max |κ|, mean |dκ/ds|, max |dκ/ds|).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexityVector {
    pub mean_abs_kappa: f64,
    pub max_abs_kappa: f64,
    pub mean_abs_dkappa: f64,
    pub max_abs_dkappa: f64,
}

impl ComplexityVector {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.mean_abs_kappa,
            self.max_abs_kappa,
            self.mean_abs_dkappa,
            self.max_abs_dkappa,
        ]
    }

    pub fn distance(&self, other: &ComplexityVector) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

fn mean_max_abs(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut sum, mut max, mut n) = (0.0, 0.0_f64, 0usize);
    for v in values {
        sum += v.abs();
        max = max.max(v.abs());
        n += 1;
    }
    if n == 0 {
        (0.0, 0.0)
    } else {
        (sum / n as f64, max)
    }
}

/// Frame boundaries along `[0, total]`: full frames of `frame_length`, with a
/// trailing remainder kept when at least half a frame and merged otherwise.
pub(crate) fn frame_bounds(total: f64, frame_length: f64) -> Vec<(f64, f64)> {
    let full = (total / frame_length).floor() as usize;
    let remainder = total - full as f64 * frame_length;
    let mut bounds: Vec<(f64, f64)> = (0..full)
        .map(|k| (k as f64 * frame_length, (k + 1) as f64 * frame_length))
        .collect();
    if remainder >= frame_length / 2.0 || bounds.is_empty() {
        bounds.push((full as f64 * frame_length, total));
    } else if let Some(last) = bounds.last_mut() {
        last.1 = total;
    }
    bounds
}

/// Splits the road into consecutive arclength frames and summarises the
/// curvature inside each one.
pub fn complexity_frames(
    g: &RoadGeometry,
    frame_length: f64,
) -> Result<Vec<ComplexityVector>, GeometryError> {
    if !(frame_length.is_finite() && frame_length > 0.0) {
        return Err(GeometryError::DegenerateRoad(format!(
            "frame length must be positive, got {frame_length}"
        )));
    }
    let total = g.length();
    if total < frame_length / 2.0 {
        return Err(GeometryError::DegenerateRoad(format!(
            "{}: length {total} shorter than half a frame ({frame_length})",
            g.id()
        )));
    }
    let profile = curvature_profile(g)?;
    let mid_s: Vec<f64> = profile.s.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let bounds = frame_bounds(total, frame_length);
    let last = bounds.len() - 1;
    let inside = |s: f64, k: usize, (lo, hi): (f64, f64)| s >= lo && (s < hi || k == last);
    Ok(bounds
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let (mean_k, max_k) = mean_max_abs(
                profile
                    .kappa
                    .iter()
                    .zip(&profile.s)
                    .filter(|(_, &s)| inside(s, k, b))
                    .map(|(v, _)| *v),
            );
            let (mean_d, max_d) = mean_max_abs(
                profile
                    .dkappa_ds
                    .iter()
                    .zip(&mid_s)
                    .filter(|(_, &s)| inside(s, k, b))
                    .map(|(v, _)| *v),
            );
            ComplexityVector {
                mean_abs_kappa: mean_k,
                max_abs_kappa: max_k,
                mean_abs_dkappa: mean_d,
                max_abs_dkappa: max_d,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{arc, straight};
    use super::super::{resample_uniform, Point};
    use super::*;

    #[test]
    fn straight_has_zero_curvature() {
        let p = curvature_profile(&straight(20.0, 21)).unwrap();
        assert_eq!(p.kappa.len(), 19);
        assert_eq!(p.dkappa_ds.len(), 18);
        assert!(p.kappa.iter().all(|k| k.abs() < 1e-12));
    }

    #[test]
    fn circle_curvature_is_inverse_radius() {
        // radius 25 sampled every 1 m of arc
        let n = (2.0 * std::f64::consts::PI * 25.0) as usize;
        let g = arc(25.0, n as f64 / 25.0, n + 1);
        let p = curvature_profile(&g).unwrap();
        for k in &p.kappa {
            assert!((k - 0.04).abs() < 1e-3, "{k}");
        }
    }

    #[test]
    fn mirroring_negates_curvature() {
        let g = arc(10.0, 1.5, 30);
        let a = curvature_profile(&g).unwrap();
        let b = curvature_profile(&g.mirrored()).unwrap();
        for (x, y) in a.kappa.iter().zip(&b.kappa) {
            assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn folded_triplet_is_degenerate() {
        let g = RoadGeometry::new(
            "fold",
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 0.0)],
        )
        .unwrap();
        assert!(curvature_profile(&g).is_err());
    }

    #[test]
    fn frame_counts() {
        let g = straight(100.0, 101);
        let frames = complexity_frames(&g, 20.0).unwrap();
        assert_eq!(frames.len(), 5);
        assert!(frames.iter().all(|f| f.as_array() == [0.0; 4]));
        // 105 m: trailing 5 m merged; 115 m: trailing 15 m kept
        assert_eq!(frame_bounds(105.0, 20.0).len(), 5);
        assert_eq!(frame_bounds(115.0, 20.0).len(), 6);
        assert_eq!(frame_bounds(12.0, 20.0), vec![(0.0, 12.0)]);
        assert!(complexity_frames(&straight(9.0, 10), 20.0).is_err());
    }

    #[test]
    fn straight_then_arc_frames() {
        let mut pts: Vec<Point> = (0..50).map(|i| Point::new(i as f64, 0.0)).collect();
        let sweep = 50.0 / 20.0;
        for k in 0..=200 {
            let t = sweep * k as f64 / 200.0;
            pts.push(Point::new(50.0 + 20.0 * t.sin(), 20.0 * (1.0 - t.cos())));
        }
        let g = RoadGeometry::new("sa", pts).unwrap();
        let g = resample_uniform(&g, 101).unwrap();
        let frames = complexity_frames(&g, 50.0).unwrap();
        assert_eq!(frames.len(), 2);
        assert!(frames[0].mean_abs_kappa < 1e-3);
        assert!((frames[1].mean_abs_kappa - 0.05).abs() < 0.005);
    }
}
