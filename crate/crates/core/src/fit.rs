//! Least-squares line fits and grids shared by the slope diagnostics.

/// `(slope, intercept)` of the least-squares line through `(x, y)`; `None`
/// with fewer than two distinct abscissae or non-finite data.
pub fn least_squares(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 || x.iter().chain(y).any(|v| !v.is_finite()) {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for k in 0..n {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Slope of `log y` against `log x` over positive pairs.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).unzip();
    least_squares(&lx, &ly).map(|p| p.0)
}

/// `per_decade` log-uniform points per factor of ten on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade > 0);
    let steps = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
    let (a, b) = (lo.ln(), hi.ln());
    (0..=steps).map(|k| (a + (b - a) * k as f64 / steps as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, c) = least_squares(&x, &y).unwrap();
        assert!((s - 2.5).abs() < 1e-14 && (c + 1.0).abs() < 1e-14);
        assert!(least_squares(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn power_law_slope() {
        let x = log_grid(1.0, 1e4, 10);
        assert_eq!(x.len(), 41);
        assert!((x[40] - 1e4).abs() < 1e-9);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
        assert!((log_log_slope(&x, &y).unwrap() + 1.5).abs() < 1e-12);
    }
}
