/// Relative size below which a discrete derivative counts as flat.
const FLAT_RELATIVE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overshoot {
    /// `max(0, max(u) - hi) + max(0, lo - min(u))`.
    pub amplitude: f64,
    /// Sign changes of the discrete derivative.
    pub sign_changes: usize,
}

/// Overshoot of a sampled profile outside `[lo, hi]` and its oscillation count.
///
/// Differences smaller than `1e-10` times the profile range are treated as
/// flat and do not start a new monotone run.
pub fn overshoot_metric(values: &[f64], lo: f64, hi: f64) -> Overshoot {
    if values.is_empty() {
        return Overshoot {
            amplitude: 0.0,
            sign_changes: 0,
        };
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let amplitude = (max - hi).max(0.0) + (lo - min).max(0.0);
    let flat = FLAT_RELATIVE * (max - min);
    let mut last_sign = 0i8;
    let mut sign_changes = 0;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= flat {
            continue;
        }
        let s = if d > 0.0 { 1 } else { -1 };
        if last_sign != 0 && s != last_sign {
            sign_changes += 1;
        }
        last_sign = s;
    }
    Overshoot {
        amplitude,
        sign_changes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_profile() {
        let v: Vec<f64> = (0..=10).map(|i| 1.0 - i as f64 / 10.0).collect();
        let o = overshoot_metric(&v, 0.0, 1.0);
        assert_eq!(o.amplitude, 0.0);
        assert_eq!(o.sign_changes, 0);
    }

    #[test]
    fn single_dip() {
        let v = [1.0, 0.5, -0.1, 0.0, 0.0];
        let o = overshoot_metric(&v, 0.0, 1.0);
        assert!((o.amplitude - 0.1).abs() < 1e-15);
        assert_eq!(o.sign_changes, 1);
    }

    #[test]
    fn oscillation_count() {
        let v: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        // sin over [0, 19.9] has extrema near π/2 + kπ: 6 of them
        assert_eq!(overshoot_metric(&v, -1.0, 1.0).sign_changes, 6);
    }
}
