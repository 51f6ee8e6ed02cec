use serde::{Deserialize, Serialize};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Closed interval for a proportion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
/// Returns `None` when there are no trials.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> Option<Interval> {
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Some(Interval {
        low: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
        high: if successes == trials {
            1.0
        } else {
            (centre + half).min(1.0)
        },
    })
}

/// Weighted least-squares fit of `y = a + b x`; returns `(a, b)`.
pub fn weighted_linear_fit(points: &[(f64, f64, f64)]) -> Option<(f64, f64)> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, w) in points {
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if points.len() < 2 || det.abs() < f64::EPSILON {
        return None;
    }
    let b = (sw * sxy - sx * sy) / det;
    let a = (sy - b * sx) / sw;
    Some((a, b))
}

/// Fits `log(escape) = a + m log(1 - eps)` over `(m, escapes, trials)` points
/// with inverse-variance weights and returns the slope `log(1 - eps)`.
/// Points with no escapes carry no information on the log scale and are skipped.
pub fn escape_log_slope(points: &[(usize, u64, u64)]) -> Option<f64> {
    let data: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|&&(_, k, n)| k > 0 && n > 0)
        .map(|&(m, k, n)| {
            let q = k as f64 / n as f64;
            // delta method: var(log q) ≈ (1 - q) / (n q)
            let var = ((1.0 - q) / (n as f64 * q)).max(1.0 / (n as f64 * n as f64));
            (m as f64, q.ln(), 1.0 / var)
        })
        .collect();
    weighted_linear_fit(&data).map(|(_, b)| b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use rand::Rng;

    #[test]
    fn wilson_reference_value() {
        // statsmodels proportion_confint(8, 10, method="wilson")
        let ci = wilson_interval(8, 10, Z_95).unwrap();
        assert!((ci.low - 0.490_162).abs() < 1e-5, "{ci:?}");
        assert!((ci.high - 0.943_318).abs() < 1e-5, "{ci:?}");
        assert!(wilson_interval(0, 0, Z_95).is_none());
        let zero = wilson_interval(0, 50, Z_95).unwrap();
        assert_eq!(zero.low, 0.0);
        assert!(zero.high > 0.0);
    }

    #[test]
    fn wilson_covers_known_rate() {
        let mut rng = rng_from(77);
        for &rate in &[0.05, 0.3, 0.5, 0.9] {
            let covered = (0..1000)
                .filter(|_| {
                    let k = (0..200).filter(|_| rng.random::<f64>() < rate).count() as u64;
                    wilson_interval(k, 200, Z_95).unwrap().contains(rate)
                })
                .count();
            assert!(covered >= 930, "rate {rate}: {covered}/1000");
        }
    }

    #[test]
    fn exact_line_is_recovered() {
        let pts: Vec<(f64, f64, f64)> = (0..5)
            .map(|i| (i as f64, 2.0 - 0.5 * i as f64, 1.0 + i as f64))
            .collect();
        let (a, b) = weighted_linear_fit(&pts).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12);
        assert!(weighted_linear_fit(&pts[..1]).is_none());
    }

    #[test]
    fn slope_of_geometric_escape() {
        let pts: Vec<(usize, u64, u64)> = [1usize, 2, 4, 8]
            .iter()
            .map(|&m| (m, (1e6 * 0.5f64.powi(m as i32)).round() as u64, 1_000_000))
            .collect();
        let slope = escape_log_slope(&pts).unwrap();
        assert!((slope - 0.5f64.ln()).abs() < 1e-3);
    }
}
