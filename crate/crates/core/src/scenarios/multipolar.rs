//! Pointwise checks of the multipolar eigenfunction identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, param, Result};
use crate::fit;

/// `N² / (4(N-1))`.
pub fn multipolar_constant(poles: usize) -> f64 {
    let n = poles as f64;
    n * n / (4.0 * (n - 1.0))
}

/// Eigenvalue `((n-2)/N)²` of `(1/W)(-Δ)` carried by `v`.
pub fn multipolar_eigenvalue(n: u32, poles: usize) -> f64 {
    let e = (n as f64 - 2.0) / poles as f64;
    e * e
}

/// Bottom of the essential spectrum: the classical constant for two poles,
/// `C(N)((n-2)/N)²` otherwise.
pub fn multipolar_essential_bottom(n: u32, poles: usize) -> f64 {
    multipolar_constant(poles) * multipolar_eigenvalue(n, poles)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_poles(n: u32, poles: &[Vec<f64>]) -> Result<()> {
    if n < 3 {
        return param("multipolar identity needs n >= 3");
    }
    if poles.len() < 2 {
        return param("need at least two poles");
    }
    if poles.iter().any(|p| p.len() != n as usize) {
        return param("pole dimension does not match n");
    }
    for i in 0..poles.len() {
        for j in 0..i {
            if dist2(&poles[i], &poles[j]) == 0.0 {
                return param("poles must be distinct");
            }
        }
    }
    Ok(())
}

/// `Σ_{i<j} |x_i - x_j|² / (|x - x_i|² |x - x_j|²)`.
pub fn multipolar_weight(poles: &[Vec<f64>], x: &[f64]) -> f64 {
    let rho: Vec<f64> = poles.iter().map(|p| dist2(x, p)).collect();
    let mut w = 0.0;
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            w += dist2(&poles[i], &poles[j]) / (rho[i] * rho[j]);
        }
    }
    w
}

#[derive(Debug, Clone, Serialize)]
pub struct MultipolarPoint {
    pub v: f64,
    pub w: f64,
    pub eigenvalue: f64,
    /// `|(1/W)(-Δv)/v - λ| / λ`.
    pub residual: f64,
}

/// `v = Π|x - x_i|^{(2-n)/N}` and the residual of `(1/W)(-Δv) = λ v`.
///
/// `Δv = v (Δ log v + |∇ log v|²)`, where `log v` is a sum of radial logs
/// with `Δ log ρ = (n-2)/ρ²`.
pub fn multipolar_residual(n: u32, poles: &[Vec<f64>], x: &[f64]) -> Result<MultipolarPoint> {
    check_poles(n, poles)?;
    if x.len() != n as usize {
        return param("point dimension does not match n");
    }
    let np = poles.len();
    let alpha = (2.0 - n as f64) / np as f64;
    let mut grad = vec![0.0; n as usize];
    let mut lap_log = 0.0;
    let mut log_v = 0.0;
    for p in poles {
        let r2 = dist2(x, p);
        if r2 == 0.0 {
            return domain("point coincides with a pole");
        }
        log_v += 0.5 * alpha * r2.ln();
        for (g, (xi, pi)) in grad.iter_mut().zip(x.iter().zip(p)) {
            *g += alpha * (xi - pi) / r2;
        }
        lap_log += alpha * (n as f64 - 2.0) / r2;
    }
    let v = log_v.exp();
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    let w = multipolar_weight(poles, x);
    let ratio = -(lap_log + g2) / w;
    let eigenvalue = multipolar_eigenvalue(n, np);
    Ok(MultipolarPoint { v, w, eigenvalue, residual: (ratio - eigenvalue).abs() / eigenvalue })
}

/// Unit pole configurations used by the catalog: `±e₁` for two poles, an
/// equilateral triangle in the first coordinate plane for three.
pub fn standard_poles(n: u32, count: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 || count < 2 {
        return param("need n >= 2 and at least two poles");
    }
    Ok((0..count)
        .map(|k| {
            let mut p = vec![0.0; n as usize];
            if count == 2 {
                p[0] = if k == 0 { 1.0 } else { -1.0 };
            } else {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                p[0] = a.cos();
                p[1] = a.sin();
            }
            p
        })
        .collect())
}

fn diameter(poles: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for a in poles {
        for b in poles {
            d = d.max(dist2(a, b).sqrt());
        }
    }
    d
}

fn centroid(poles: &[Vec<f64>]) -> Vec<f64> {
    let mut c = vec![0.0; poles[0].len()];
    for p in poles {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi / poles.len() as f64;
        }
    }
    c
}

/// Seeded points in the box of half-width `2·diam` around the centroid,
/// at least `1e-3·diam` away from every pole.
pub fn sample_points(n: u32, poles: &[Vec<f64>], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_poles(n, poles)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (diam, c) = (diameter(poles), centroid(poles));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = c.iter().map(|ci| ci + diam * rng.gen_range(-2.0..2.0)).collect();
        if poles.iter().all(|p| dist2(&x, p).sqrt() > 1e-3 * diam) {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FarField {
    pub min_r4w: f64,
    pub max_r4w: f64,
    /// `max/min` of `r⁴W` over all rays and radii.
    pub spread: f64,
    /// Mean fitted exponent of `W` against `|x|` along the rays.
    pub exponent: f64,
}

/// `|x|⁴ W(x)` along `rays` seeded directions for `10·diam ≤ |x - centroid| ≤ 10⁴·diam`.
pub fn far_field(n: u32, poles: &[Vec<f64>], rays: usize, seed: u64) -> Result<FarField> {
    check_poles(n, poles)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (diam, c) = (diameter(poles), centroid(poles));
    let radii = fit::log_grid(10.0 * diam, 1e4 * diam, 8);
    let (mut lo, mut hi, mut exp_sum) = (f64::INFINITY, 0.0_f64, 0.0);
    for _ in 0..rays {
        let mut dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        dir.iter_mut().for_each(|d| *d /= norm);
        let ws: Vec<f64> = radii
            .iter()
            .map(|&r| {
                let x: Vec<f64> = c.iter().zip(&dir).map(|(ci, di)| ci + r * di).collect();
                multipolar_weight(poles, &x)
            })
            .collect();
        for (r, w) in radii.iter().zip(&ws) {
            let v = r.powi(4) * w;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        exp_sum += fit::log_log_slope(&radii, &ws).unwrap_or(f64::NAN);
    }
    Ok(FarField { min_r4w: lo, max_r4w: hi, spread: hi / lo, exponent: exp_sum / rays as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
        let h = 1e-4;
        let mut s = 0.0;
        for k in 0..x.len() {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += h;
            m[k] -= h;
            s += (f(&p) - 2.0 * f(x) + f(&m)) / (h * h);
        }
        s
    }

    #[test]
    fn axis_examples() {
        let poles = standard_poles(3, 2).unwrap();
        let a = multipolar_residual(3, &poles, &[3.0, 0.0, 0.0]).unwrap();
        assert!((a.v - 0.125f64.sqrt()).abs() < 1e-15);
        assert!(a.residual < 1e-10);
        assert_eq!(a.eigenvalue, 0.25);
        let b = multipolar_residual(3, &poles, &[0.0, 1.0, 0.0]).unwrap();
        assert!((b.v - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(b.w, 1.0);
        assert!(b.residual < 1e-10);
        assert!(multipolar_residual(3, &poles, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn two_poles_recover_classical_bottom() {
        assert_eq!(multipolar_constant(2), 1.0);
        assert_eq!(multipolar_essential_bottom(3, 2), 0.25);
        assert!((multipolar_constant(3) - 9.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_laplacian_matches_finite_differences() {
        let poles = standard_poles(4, 3).unwrap();
        let alpha = -2.0 / 3.0;
        let v = |x: &[f64]| poles.iter().map(|p| dist2(x, p).sqrt().powf(alpha)).product::<f64>();
        let x = [0.3, -0.7, 0.4, 0.2];
        let lap = fd_laplacian(v, &x);
        let w = multipolar_weight(&poles, &x);
        let ratio = -lap / (w * v(&x));
        let pt = multipolar_residual(4, &poles, &x).unwrap();
        assert!((ratio - pt.eigenvalue).abs() < 1e-5 * pt.eigenvalue, "{ratio} vs {}", pt.eigenvalue);
        assert!(pt.residual < 1e-12);
    }

    #[test]
    fn far_field_is_inverse_quartic() {
        let poles = standard_poles(3, 3).unwrap();
        let f = far_field(3, &poles, 8, 7).unwrap();
        assert!(f.spread < 4.0, "{f:?}");
        assert!((f.exponent + 4.0).abs() < 0.01, "{f:?}");
    }
}
