use super::StudyError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Significance level for the normality pre-test.
pub const NORMALITY_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Slight,
    Low,
    Moderate,
    High,
    VeryHigh,
}

impl Strength {
    /// Band of `|r|`: below 0.2 slight, then low, moderate from 0.4, high
    /// from 0.7 and very high from 0.9. Lower bounds are inclusive.
    pub fn classify(r: f64) -> Strength {
        let a = r.abs();
        if a < 0.2 {
            Strength::Slight
        } else if a < 0.4 {
            Strength::Low
        } else if a < 0.7 {
            Strength::Moderate
        } else if a < 0.9 {
            Strength::High
        } else {
            Strength::VeryHigh
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strength::Slight => "slight",
            Strength::Low => "low",
            Strength::Moderate => "moderate",
            Strength::High => "high",
            Strength::VeryHigh => "very_high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub x_label: String,
    pub y_label: String,
    /// Subset the correlation was computed on, e.g. `all` or `size=20`.
    pub group: String,
    pub method: CorrelationMethod,
    pub coefficient: f64,
    pub p_value: f64,
    pub strength: Strength,
    pub n: usize,
    /// Set when either variable is constant; coefficient is then 0.
    pub degenerate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Shapiro–Wilk W statistic and p-value (Royston's approximation), for
/// 3 ≤ n ≤ 5000. Returns `None` for constant data.
pub fn shapiro_wilk(data: &[f64]) -> Option<(f64, f64)> {
    let n = data.len();
    if !(3..=5000).contains(&n) {
        return None;
    }
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 1e-19) {
        return None;
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let an = n as f64;
    let nn2 = n / 2;
    // a[0..nn2]: coefficients for the upper half, positive
    let mut a = vec![0.0; nn2];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
        const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
        let an25 = an + 0.25;
        let m: Vec<f64> = (1..=nn2)
            .map(|i| std_normal.inverse_cdf((i as f64 - 0.375) / an25))
            .collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / an.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
                / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
                .sqrt();
            a[1] = a2;
            (2, fac)
        } else {
            let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
            (1, fac)
        };
        a[0] = a1;
        for i in first..nn2 {
            a[i] = -m[i] / fac;
        }
    }

    // W as the squared correlation between the data and the coefficients
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => -a[i],
            std::cmp::Ordering::Greater => a[j],
            std::cmp::Ordering::Equal => 0.0,
        }
    };
    let sa = (0..n).map(coef).sum::<f64>() / an;
    let sx = x.iter().map(|v| v / range).sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = xi / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    if n == 3 {
        const PI6: f64 = 1.909_859_317_102_74;
        const STQR: f64 = 1.047_197_551_196_6;
        let p = (PI6 * (w.sqrt().asin() - STQR)).max(0.0);
        return Some((w, p));
    }
    let mut y = w1.ln();
    let (m, s) = if n <= 11 {
        let gamma = poly(&[-2.273, 0.459], an);
        if y >= gamma {
            return Some((w, 1e-99));
        }
        y = -(gamma - y).ln();
        (
            poly(&[0.544, -0.39978, 0.025054, -6.714e-4], an),
            poly(&[1.3822, -0.77857, 0.062767, -0.0020322], an).exp(),
        )
    } else {
        let ln = an.ln();
        (
            poly(&[-1.5861, -0.31082, -0.083751, 0.0038915], ln),
            poly(&[-0.4803, -0.082676, 0.0030302], ln).exp(),
        )
    };
    let p = Normal::new(m, s).expect("positive scale").sf(y);
    Some((w, p))
}

/// True unless Shapiro–Wilk rejects normality at [`NORMALITY_ALPHA`].
pub fn looks_normal(xs: &[f64]) -> bool {
    match shapiro_wilk(xs) {
        Some((_, p)) => p >= NORMALITY_ALPHA,
        None => false,
    }
}

fn pearson_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Two-sided p-value of a correlation coefficient via the t distribution
/// with n − 2 degrees of freedom.
fn t_test_p(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = r.abs() * (df / denom).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t)).clamp(0.0, 1.0)
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson's r and its two-sided p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> (f64, f64) {
    let r = pearson_r(x, y);
    (r, t_test_p(r, x.len()))
}

/// Spearman's rho (Pearson on average ranks) and its two-sided p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> (f64, f64) {
    pearson(&average_ranks(x), &average_ranks(y))
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&v| v == xs[0])
}

/// Correlates two variables: Pearson when both pass the normality test,
/// Spearman otherwise. Constant inputs give a flagged degenerate result.
pub fn correlate(
    x_label: &str,
    y_label: &str,
    group: &str,
    xs: &[f64],
    ys: &[f64],
) -> Result<CorrelationResult, StudyError> {
    if xs.len() != ys.len() {
        return Err(StudyError::BadInput(format!(
            "{} vs {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(StudyError::BadInput(format!("{} samples, need 3", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StudyError::BadInput("non-finite value".into()));
    }
    let mut out = CorrelationResult {
        x_label: x_label.to_string(),
        y_label: y_label.to_string(),
        group: group.to_string(),
        method: CorrelationMethod::Spearman,
        coefficient: 0.0,
        p_value: 1.0,
        strength: Strength::Slight,
        n: xs.len(),
        degenerate: false,
        note: None,
    };
    if is_constant(xs) || is_constant(ys) {
        out.degenerate = true;
        out.note = Some("constant input".into());
        return Ok(out);
    }
    let (method, (r, p)) = if looks_normal(xs) && looks_normal(ys) {
        (CorrelationMethod::Pearson, pearson(xs, ys))
    } else {
        (CorrelationMethod::Spearman, spearman(xs, ys))
    };
    out.method = method;
    out.coefficient = r;
    out.p_value = p;
    out.strength = Strength::classify(r);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strength_bands_have_no_gaps() {
        assert_eq!(Strength::classify(0.0), Strength::Slight);
        assert_eq!(Strength::classify(0.1999999), Strength::Slight);
        assert_eq!(Strength::classify(0.2), Strength::Low);
        assert_eq!(Strength::classify(-0.4), Strength::Moderate);
        assert_eq!(Strength::classify(0.7), Strength::High);
        assert_eq!(Strength::classify(0.9), Strength::VeryHigh);
        assert_eq!(Strength::classify(1.0), Strength::VeryHigh);
        let mut prev = Strength::Slight;
        for k in 0..=10_000 {
            let s = Strength::classify(k as f64 / 10_000.0);
            assert!(s >= prev);
            prev = s;
        }
    }

    // reference values from an independent Shapiro–Wilk implementation
    #[test]
    fn shapiro_wilk_reference_values() {
        let cases: Vec<(Vec<f64>, f64, f64)> = vec![
            ((1..=12).map(|k| (k * k) as f64).collect(), 0.9162924415139415, 0.25667346795551826),
            (
                (0..25).map(|k| (1.7 * k as f64).sin() + 0.1 * k as f64).collect(),
                0.9672596446475207,
                0.5766592268078338,
            ),
            (vec![1.0, 2.0, 4.0, 7.0], 0.9456304828556503, 0.6889364384881989),
            (vec![1.0, 2.0, 4.0], 0.9642857142857142, 0.6368868450289689),
            (vec![2.0, 3.5, 3.9, 8.0, 1.0], 0.9086866026509469, 0.45973801930336095),
            ((0..60).map(|k| (0.05 * k as f64).exp()).collect(), 0.865951503342274, 9.310687367911056e-06),
        ];
        for (xs, w_ref, p_ref) in cases {
            let (w, p) = shapiro_wilk(&xs).unwrap();
            assert!((w - w_ref).abs() < 1e-4, "W {w} vs {w_ref}");
            assert!((p - p_ref).abs() < 1e-3 * p_ref.max(1e-3), "p {p} vs {p_ref}");
        }
        assert!(shapiro_wilk(&[2.0; 10]).is_none());
    }

    #[test]
    fn correlation_reference_values() {
        let x: Vec<f64> = (0..25).map(|k| (1.7 * k as f64).sin() + 0.1 * k as f64).collect();
        let y: Vec<f64> = (0..25).map(|k| (0.9 * k as f64).cos() * k as f64).collect();
        let (r, p) = pearson(&x, &y);
        assert!((r + 0.0794444227672497).abs() < 1e-12);
        assert!((p - 0.7058144172215943).abs() < 1e-9);
        let (rho, p) = spearman(&x, &y);
        assert!((rho + 0.04230769230769231).abs() < 1e-12);
        assert!((p - 0.8408565379913094).abs() < 1e-9);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn linear_and_monotone_data() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.7 - 3.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        let (r, p) = pearson(&xs, &ys);
        assert!((r - 1.0).abs() < 1e-9 && p == 0.0);
        let neg: Vec<f64> = xs.iter().map(|x| -0.5 * x).collect();
        assert!((pearson(&xs, &neg).0 + 1.0).abs() < 1e-9);
        let cubes: Vec<f64> = xs.iter().map(|x| x.powi(3)).collect();
        assert_eq!(spearman(&xs, &cubes).0, 1.0);
    }

    #[test]
    fn constant_input_is_degenerate() {
        let c = correlate("a", "b", "all", &[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(c.degenerate && c.coefficient == 0.0);
        assert!(correlate("a", "b", "all", &[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
