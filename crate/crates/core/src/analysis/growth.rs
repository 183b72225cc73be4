use crate::error::{invalid, Result};

const SAMPLE_POINTS: usize = 50;

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(invalid("a log-log fit needs at least two points"));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(invalid(format!(
            "log-log fit needs positive coordinates, got ({x}, {y}); move the window later"
        )));
    }
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x.ln(), sy + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        let dx = x.ln() - mx;
        (sxy + dx * (y.ln() - my), sxx + dx * dx)
    });
    if sxx == 0.0 {
        return Err(invalid("log-log fit needs at least two distinct x values"));
    }
    Ok(sxy / sxx)
}

/// Growth exponent of a cumulative series over `[t_lo, t_hi]`.
///
/// `series[t - 1]` is the value at round `t`. The slope is fitted over up to 50
/// geometrically spaced rounds in the window.
pub fn growth_exponent(series: &[f64], t_lo: usize, t_hi: usize) -> Result<f64> {
    if t_lo == 0 || t_lo >= t_hi || t_hi > series.len() {
        return Err(invalid(format!(
            "window [{t_lo}, {t_hi}] must satisfy 1 <= t_lo < t_hi <= {}",
            series.len()
        )));
    }
    let ratio = (t_hi as f64 / t_lo as f64).ln();
    let mut rounds: Vec<usize> = (0..SAMPLE_POINTS)
        .map(|i| {
            let frac = i as f64 / (SAMPLE_POINTS - 1) as f64;
            ((t_lo as f64) * (ratio * frac).exp()).round() as usize
        })
        .map(|t| t.clamp(t_lo, t_hi))
        .collect();
    rounds.dedup();
    let points: Vec<(f64, f64)> = rounds
        .into_iter()
        .map(|t| (t as f64, series[t - 1]))
        .collect();
    fit_loglog_slope(&points)
}

/// Growth exponent from `(t, value)` samples, keeping those with `t` in `[t_lo, t_hi]`.
pub fn growth_exponent_points(points: &[(u64, f64)], t_lo: u64, t_hi: u64) -> Result<f64> {
    if t_lo == 0 || t_lo >= t_hi {
        return Err(invalid(format!("window [{t_lo}, {t_hi}] is empty")));
    }
    let window: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, _)| (t_lo..=t_hi).contains(t))
        .map(|&(t, v)| (t as f64, v))
        .collect();
    fit_loglog_slope(&window)
}
