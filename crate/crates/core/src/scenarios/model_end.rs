//! Radial model of a minimal end: volume density `ω (r - c)^{n-1}` and
//! `|∇r|² = 1 - c/r`. With this pair `Δr² = 2n` holds exactly, and the
//! Hardy profile `r^{(2-n)/2}` carries a potential of order `c/r³`.

use serde::Serialize;

use super::{hardy_constant, sphere_area, Domain};
use crate::error::{domain, param, Result};
use crate::fit;
use crate::jet::Jet;
use crate::quad;

#[derive(Debug, Clone, Serialize)]
pub struct ModelEndRow {
    pub r: f64,
    pub gamma: f64,
    /// `-Δ u_{1/2} / u_{1/2} - W` through jets.
    pub v0: f64,
    /// `(n-2)(n+2)(1-γ)/(4r²)`.
    pub v0_closed: f64,
    pub w: f64,
    /// `|V0/W| · X_1^{-1}(r^{2-n})`.
    pub cond1: f64,
    /// `n(n-2)(1-γ)/(r² W)`.
    pub cond2: f64,
    /// `S(b) / (χ(b) - χ(a))` in `v = (n-2) log r`, with `a` at the first grid point.
    pub cond3: f64,
    /// Density of `r^{2-n} W dν` per unit `v`.
    pub density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelEndReport {
    pub n: u32,
    pub c: f64,
    pub rows: Vec<ModelEndRow>,
    /// Log-log slopes over the top decade of the grid; `None` when the
    /// condition vanishes identically.
    pub slope1: Option<f64>,
    pub slope2: Option<f64>,
    /// Slope of `cond3` against `b - a`.
    pub slope3: Option<f64>,
    pub max_v0_gap: f64,
}

/// Density per unit `v = (n-2) log r` of the pushforward of `r^{2-n} W dν`:
/// `ω (n-2)/4 · (1 - c/r)^{n-1}`.
pub fn model_end_density(n: u32, c: f64, r: f64) -> f64 {
    sphere_area(n) * (n as f64 - 2.0) / 4.0 * (1.0 - c / r).powi(n as i32 - 1)
}

fn chi_between(n: u32, c: f64, va: f64, vb: f64) -> f64 {
    let k = n as f64 - 2.0;
    let panels = ((vb - va).ceil() as usize).clamp(1, 4096);
    quad::integrate(|v| model_end_density(n, c, (v / k).exp()), va, vb, panels)
}

pub fn model_end_conditions(n: u32, c: f64, r_grid: &[f64]) -> Result<ModelEndReport> {
    if n < 3 {
        return param("model ends need n >= 3");
    }
    if c < 0.0 {
        return param("c must be nonnegative");
    }
    if r_grid.len() < 2 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return param("r_grid must be increasing with at least two points");
    }
    if r_grid[0] <= c {
        return domain(format!("|∇r|² = 1 - c/r leaves (0, 1] at r = {}", r_grid[0]));
    }
    let r_max = *r_grid.last().expect("nonempty");
    let dom = Domain::Exterior { n, r_min: 0.5 * (r_grid[0] + c), r_max: 2.0 * r_max, c };
    let nf = n as f64;
    let k = nf - 2.0;
    let ch = hardy_constant(n);
    let va = k * r_grid[0].ln();
    let mut rows = Vec::with_capacity(r_grid.len());
    let mut gap = 0.0_f64;
    for &r in r_grid {
        let gamma = dom.gamma(r).v;
        let w = ch / (r * r);
        let half = Jet::var(r).powf(-k / 2.0);
        let v0 = -dom.laplacian(r, half) / half.v - w;
        let v0_closed = k * (nf + 2.0) * (1.0 - gamma) / (4.0 * r * r);
        gap = gap.max((v0 - v0_closed).abs() / w);
        let vb = k * r.ln();
        let cond1 = (v0_closed / w).abs() * (1.0 + vb);
        let cond2 = nf * k * (1.0 - gamma) / (r * r * w);
        let cond3 = if vb - va > 1.0 {
            chi_between(n, c, vb - 1.0, vb) / chi_between(n, c, va, vb)
        } else {
            f64::NAN
        };
        rows.push(ModelEndRow { r, gamma, v0, v0_closed, w, cond1, cond2, cond3, density: model_end_density(n, c, r) });
    }
    let top: Vec<&ModelEndRow> = rows.iter().filter(|row| row.r >= r_max / 10.0).collect();
    let rs: Vec<f64> = top.iter().map(|row| row.r).collect();
    let slope_of = |f: &dyn Fn(&ModelEndRow) -> f64| {
        let ys: Vec<f64> = top.iter().map(|row| f(row)).collect();
        if ys.iter().all(|y| *y == 0.0) {
            None
        } else {
            fit::log_log_slope(&rs, &ys)
        }
    };
    let slope1 = slope_of(&|row| row.cond1);
    let slope2 = slope_of(&|row| row.cond2);
    let spans: Vec<f64> = top.iter().map(|row| k * row.r.ln() - va).collect();
    let c3: Vec<f64> = top.iter().map(|row| row.cond3).collect();
    let slope3 = fit::log_log_slope(&spans, &c3);
    Ok(ModelEndReport { n, c, rows, slope1, slope2, slope3, max_v0_gap: gap })
}
