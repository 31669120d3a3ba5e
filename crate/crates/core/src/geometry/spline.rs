use super::{resample_uniform, ControlPointRoad, GeometryError, Point, RoadGeometry};

/// Dense pre-sampling factor relative to the target spacing.
const OVERSAMPLE: f64 = 10.0;

/// Natural cubic spline for one coordinate over a strictly increasing knot
/// vector. Stores second derivatives at the knots.
struct NaturalSpline<'a> {
    knots: &'a [f64],
    values: Vec<f64>,
    second: Vec<f64>,
}

impl<'a> NaturalSpline<'a> {
    fn fit(knots: &'a [f64], values: Vec<f64>) -> Self {
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for interior second derivatives (Thomas algorithm).
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 1..n - 1 {
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] =
                    6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; m];
            sol[m - 1] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
            }
            second[1..n - 1].copy_from_slice(&sol);
        }
        Self {
            knots,
            values,
            second,
        }
    }

    /// Evaluates on interval `i` (between knots i and i+1) at local offset `t`.
    fn eval(&self, i: usize, t: f64) -> f64 {
        let h = self.knots[i + 1] - self.knots[i];
        let a = (h - t) / h;
        let b = t / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h
                / 6.0
    }
}

/// Cubic-spline interpolation of the control points, resampled at
/// approximately uniform arclength `spacing`. The output starts and ends
/// exactly at the first and last control points.
pub fn interpolate_road(
    road: &ControlPointRoad,
    spacing: f64,
) -> Result<RoadGeometry, GeometryError> {
    road.validate()?;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(GeometryError::DegenerateRoad(format!(
            "{}: spacing must be positive, got {spacing}",
            road.id
        )));
    }
    let cps = &road.control_points;
    let mut knots = Vec::with_capacity(cps.len());
    knots.push(0.0);
    for w in cps.windows(2) {
        let last = *knots.last().unwrap();
        knots.push(last + w[0].distance(w[1]));
    }
    let sx = NaturalSpline::fit(&knots, cps.iter().map(|p| p.x).collect());
    let sy = NaturalSpline::fit(&knots, cps.iter().map(|p| p.y).collect());

    let mut dense = Vec::new();
    for i in 0..cps.len() - 1 {
        let h = knots[i + 1] - knots[i];
        let steps = ((h / spacing * OVERSAMPLE).ceil() as usize).max(4);
        for k in 0..steps {
            let t = h * k as f64 / steps as f64;
            dense.push(Point::new(sx.eval(i, t), sy.eval(i, t)));
        }
    }
    dense.push(*cps.last().unwrap());
    if let Some(i) = dense.iter().position(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(format!(
            "{}: spline sample {i}",
            road.id
        )));
    }
    dense.dedup_by(|a, b| a.distance(*b) <= super::MIN_POINT_SEPARATION);
    if dense.len() < 3 {
        // Two control points produce a straight segment; split it.
        let (a, b) = (cps[0], *cps.last().unwrap());
        dense = vec![a, a.lerp(b, 0.5), b];
    }
    let dense = RoadGeometry::new(road.id.clone(), dense)?;
    let n = ((dense.length() / spacing).round() as usize + 1).max(3);
    resample_uniform(&dense, n)
}
