//! Push-forward measures `χ = v★μ` on the frame coordinate, their volume
//! growth `V(r) = χ([t_0, r])`, `S(r) = V(r+1) - V(r)`, the exponential rate
//! `σ`, the window criterion `S(b)/(V(b) - V(a)) < ε`, and the
//! `ε`-exponential class.

mod agmon;

use serde::Serialize;

pub use agmon::{agmon_distance, frame_bottom, sigma_rates, AgmonFrame, SigmaOptions, SigmaReport};

use crate::error::{param, Error, Result};
use crate::fit;
use crate::jet::Jet;
use crate::quad::{self, gl8};
use crate::quasimode::Frame;

/// Cap on the constant `C` of the `ε`-exponential class.
pub const C_CAP: f64 = 1e6;
/// `σ` below this is reported as subexponential growth.
pub const SUBEXPONENTIAL: f64 = 0.05;

/// Piecewise description of `χ` on `[bin_edges[0], bin_edges[last]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardMeasure {
    pub bin_edges: Vec<f64>,
    pub masses: Vec<f64>,
    /// `χ` has infinite mass beyond the represented range.
    pub infinite: bool,
    /// Quadrature nodes `(t, weight·density)`; `∫g dχ = Σ g(t)·m`.
    #[serde(skip)]
    atoms: Vec<(f64, f64)>,
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|x| !x.is_finite()) {
        return param("bin edges must be finite, strictly increasing and at least two");
    }
    Ok(())
}

/// `n` uniform bins on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

impl PushforwardMeasure {
    /// `χ` with density `f` per unit `t`, four GL8 panels per bin.
    pub fn from_density(f: impl Fn(f64) -> f64, edges: Vec<f64>, infinite: bool) -> Result<Self> {
        Self::try_from_density(|t| Ok(f(t)), edges, infinite)
    }

    fn try_from_density(f: impl Fn(f64) -> Result<f64>, edges: Vec<f64>, infinite: bool) -> Result<Self> {
        check_edges(&edges)?;
        let (xs, ws) = gl8();
        let mut atoms = Vec::with_capacity((edges.len() - 1) * 32);
        let mut masses = Vec::with_capacity(edges.len() - 1);
        for e in edges.windows(2) {
            let mut m = 0.0;
            let h = (e[1] - e[0]) / 4.0;
            for p in 0..4 {
                let c = e[0] + h * (p as f64 + 0.5);
                for (x, w) in xs.iter().zip(ws) {
                    let t = c + 0.5 * h * x;
                    let d = f(t)?;
                    if !(d >= 0.0 && d.is_finite()) {
                        return Err(Error::Evaluation(format!("density {d} at t = {t}")));
                    }
                    let a = 0.5 * h * w * d;
                    atoms.push((t, a));
                    m += a;
                }
            }
            masses.push(m);
        }
        Ok(Self { bin_edges: edges, masses, infinite, atoms })
    }

    /// `χ` of a frame in `v = 2w` units: density `χ_w(t/2)/2`.
    pub fn from_frame(frame: &dyn Frame, edges: Vec<f64>) -> Result<Self> {
        if edges.first().is_some_and(|&t| t < 2.0 * frame.w_min()) {
            return param(format!("edges start below the frame edge v = {}", 2.0 * frame.w_min()));
        }
        Self::from_density(|t| 0.5 * frame.point(0.5 * t).chi, edges, true)
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn lo(&self) -> f64 {
        self.bin_edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.bin_edges.last().expect("nonempty")
    }

    /// Mean density of bin `k`.
    pub fn density(&self, k: usize) -> f64 {
        self.masses[k] / (self.bin_edges[k + 1] - self.bin_edges[k])
    }

    /// `V(r) = χ([t_0, r])`, linear inside bins; clamped to the range.
    pub fn cumulative(&self, r: f64) -> f64 {
        if r <= self.lo() {
            return 0.0;
        }
        let k = self.bin_edges.partition_point(|&e| e <= r);
        let full: f64 = self.masses[..(k - 1).min(self.masses.len())].iter().sum();
        if k >= self.bin_edges.len() {
            return full;
        }
        let (a, b) = (self.bin_edges[k - 1], self.bin_edges[k]);
        full + self.masses[k - 1] * (r - a) / (b - a)
    }

    /// `S(r) = V(r + 1) - V(r)`; `None` past the represented range.
    pub fn unit_mass(&self, r: f64) -> Option<f64> {
        (r + 1.0 <= self.hi()).then(|| self.cumulative(r + 1.0) - self.cumulative(r))
    }

    /// `∫ g dχ` over the represented range.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(t, m)| g(t) * m).sum()
    }
}

/// A coordinate interval on which `v` is strictly monotone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Zone {
    pub lo: f64,
    pub hi: f64,
}

const MONOTONE_SAMPLES: usize = 256;

fn zone_orientation(v: &dyn Fn(f64) -> Result<Jet>, z: &Zone) -> Result<bool> {
    if !(z.hi > z.lo) {
        return param("empty zone");
    }
    let mut sign = 0.0;
    let mut prev = f64::NAN;
    for k in 1..=MONOTONE_SAMPLES {
        let s = z.lo + (z.hi - z.lo) * k as f64 / (MONOTONE_SAMPLES + 1) as f64;
        let j = v(s)?;
        let sg = j.d.signum();
        if j.d == 0.0 || (sign != 0.0 && sg != sign) || (!prev.is_nan() && (j.v - prev) * sg <= 0.0) {
            return param(format!("v is not monotone on zone [{}, {}]; split it into monotone zones", z.lo, z.hi));
        }
        sign = sg;
        prev = j.v;
    }
    Ok(sign > 0.0)
}

/// Point of `z` where `v = t`, or `None` when `t` is outside `v(z)`.
fn invert(v: &dyn Fn(f64) -> Result<Jet>, z: &Zone, increasing: bool, t: f64) -> Result<Option<f64>> {
    let (mut l, mut r) = (z.lo, z.hi);
    for _ in 0..2200 {
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            break;
        }
        if (v(m)?.v < t) == increasing {
            l = m;
        } else {
            r = m;
        }
    }
    let s = 0.5 * (l + r);
    let s = if s > z.lo && s < z.hi { s } else { return Ok(None) };
    let got = v(s)?.v;
    Ok(((got - t).abs() <= 1e-9 * t.abs().max(1.0)).then_some(s))
}

/// `χ = v★(base·ds)` binned on `edges`, with `v` strictly monotone on each
/// zone. Densities at the bin quadrature nodes use `base(s)/|v'(s)|` at the
/// preimage; contributions of all zones add.
pub fn pushforward(
    v: &dyn Fn(f64) -> Result<Jet>,
    base: &dyn Fn(f64) -> Result<f64>,
    zones: &[Zone],
    edges: Vec<f64>,
    infinite: bool,
) -> Result<PushforwardMeasure> {
    check_edges(&edges)?;
    let orient: Vec<bool> = zones.iter().map(|z| zone_orientation(v, z)).collect::<Result<_>>()?;
    let density = |t: f64| -> Result<f64> {
        let mut d = 0.0;
        for (z, &inc) in zones.iter().zip(&orient) {
            if let Some(s) = invert(v, z, inc, t)? {
                d += base(s)? / v(s)?.d.abs();
            }
        }
        Ok(d)
    };
    PushforwardMeasure::try_from_density(density, edges, infinite)
}

/// `∫ g(v(s)) base(s) ds` over the part of `zones` where `v ∈ [t0, t1]`,
/// by adaptive quadrature in the original coordinate.
pub fn integrate_direct(
    g: &dyn Fn(f64) -> f64,
    v: &dyn Fn(f64) -> Result<Jet>,
    base: &dyn Fn(f64) -> Result<f64>,
    zones: &[Zone],
    (t0, t1): (f64, f64),
) -> Result<f64> {
    let mut total = 0.0;
    for z in zones {
        let inc = zone_orientation(v, z)?;
        let ends = [invert(v, z, inc, t0)?, invert(v, z, inc, t1)?];
        let [Some(a), Some(b)] = ends else {
            return param("test range must lie inside v(zone)");
        };
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let failed = std::cell::Cell::new(None);
        let f = |s: f64| match (v(s), base(s)) {
            (Ok(j), Ok(m)) => g(j.v) * m,
            (Err(e), _) | (_, Err(e)) => {
                failed.set(Some(e.to_string()));
                0.0
            }
        };
        total += quad::adaptive(f, a, b, 1e-13);
        if let Some(e) = failed.take() {
            return Err(Error::Evaluation(e));
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub r: f64,
    pub v: f64,
    pub s: Option<f64>,
    pub log_v_over_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthCurves {
    pub rows: Vec<GrowthRow>,
    /// Max of windowed slopes of `log V` against `r` over the top half.
    pub sigma: f64,
    pub subexponential: bool,
    /// Fewer than two decades of represented range.
    pub low_confidence: bool,
}

impl GrowthCurves {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,V,S,logV_over_r\n");
        for row in &self.rows {
            let sv = row.s.map(|x| format!("{x:?}")).unwrap_or_default();
            s.push_str(&format!("{:?},{:?},{},{:?}\n", row.r, row.v, sv, row.log_v_over_r));
        }
        s
    }
}

/// Lim-sup surrogate for an exponential rate: the largest least-squares
/// slope of `y` against `x` over seven half-overlapping windows that cover
/// the top half of the samples.
pub fn windowed_rate(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 8 {
        return fit::least_squares(x, y).map(|p| p.0);
    }
    let (lo, hi) = (x[n / 2], x[n - 1]);
    let width = (hi - lo) / 4.0;
    (0..7)
        .filter_map(|k| {
            let a = lo + 0.5 * width * k as f64;
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                x.iter().zip(y).filter(|(&t, _)| t >= a && t <= a + width).map(|(a, b)| (*a, *b)).unzip();
            fit::least_squares(&xs, &ys).map(|p| p.0)
        })
        .reduce(f64::max)
}

pub fn volume_growth(chi: &PushforwardMeasure) -> Result<GrowthCurves> {
    if chi.total() <= 0.0 {
        return param("χ has no mass");
    }
    let rows: Vec<GrowthRow> = chi
        .bin_edges
        .iter()
        .skip(1)
        .map(|&r| {
            let v = chi.cumulative(r);
            GrowthRow { r, v, s: chi.unit_mass(r), log_v_over_r: v.ln() / r }
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.v > 0.0).map(|r| (r.r, r.v.ln())).unzip();
    let sigma = windowed_rate(&x, &y).unwrap_or(0.0).max(0.0);
    Ok(GrowthCurves {
        rows,
        sigma,
        subexponential: sigma < SUBEXPONENTIAL,
        low_confidence: chi.hi() < 100.0 * chi.lo().abs().max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionVerdict {
    Found,
    /// No admissible `b` in the represented range: evidence for `σ > 0`.
    GrowthObstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionRow {
    pub a: f64,
    pub d: f64,
    pub eps: f64,
    /// Infimum of `{b ≥ a + d : S(b)/(V(b) - V(a)) < ε}` in the represented range.
    pub b: Option<f64>,
    pub verdict: CriterionVerdict,
    /// `χ` was not flagged infinite, so the verdict extrapolates.
    pub extrapolated: bool,
}

fn criterion_ratio(chi: &PushforwardMeasure, va: f64, b: f64) -> f64 {
    let gap = chi.cumulative(b) - va;
    match chi.unit_mass(b) {
        Some(s) if gap > 0.0 => s / gap,
        _ => f64::INFINITY,
    }
}

/// Smallest `b ≥ a + d` with `S(b)/(V(b) - V(a)) < ε`: a scan at a quarter
/// of the finest bin width, then bisection of the first crossing.
pub fn window_search(chi: &PushforwardMeasure, a: f64, eps: f64, d: f64) -> Result<CriterionRow> {
    if !(eps > 0.0 && d >= 0.0 && a.is_finite()) {
        return param("window search needs ε > 0, d ≥ 0 and finite a");
    }
    if a < chi.lo() {
        return param(format!("a = {a} below the represented range starting at {}", chi.lo()));
    }
    let va = chi.cumulative(a);
    let step = chi.bin_edges.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min) / 4.0;
    let last = chi.hi() - 1.0;
    let below = |b: f64| criterion_ratio(chi, va, b) < eps;
    let mut row = CriterionRow {
        a,
        d,
        eps,
        b: None,
        verdict: CriterionVerdict::GrowthObstruction,
        extrapolated: !chi.infinite,
    };
    let start = a + d;
    if start > last {
        return Ok(row);
    }
    if below(start) {
        row.b = Some(start);
        row.verdict = CriterionVerdict::Found;
        return Ok(row);
    }
    let mut prev = start;
    let mut k = 1.0;
    loop {
        let b = (start + k * step).min(last);
        if below(b) {
            let (mut lo, mut hi) = (prev, b);
            for _ in 0..200 {
                let m = 0.5 * (lo + hi);
                if m <= lo || m >= hi {
                    break;
                }
                if below(m) {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            row.b = Some(hi);
            row.verdict = CriterionVerdict::Found;
            return Ok(row);
        }
        if b >= last {
            return Ok(row);
        }
        prev = b;
        k += 1.0;
    }
}

/// Alias recorded into growth reports.
pub fn growth_criterion(chi: &PushforwardMeasure, a: f64, d: f64, eps: f64) -> Result<CriterionRow> {
    window_search(chi, a, eps, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsClass {
    pub eps: f64,
    /// Smallest `C` with `C^{-1}e^{-εt} ≤ χ(t) ≤ Ce^{εt}` on the bins.
    pub c: f64,
    pub verdict: bool,
}

/// Density reading of the `ε`-exponential class: per bin, `χ(t)` is the mean
/// density and both bounds are tested at the bin's left edge, where
/// `e^{-εt}` is largest.
pub fn eps_exp_check(chi: &PushforwardMeasure, eps: f64) -> Result<EpsClass> {
    if !(eps > 0.0) {
        return param("ε must be positive");
    }
    let mut c = 0.0f64;
    for k in 0..chi.masses.len() {
        let rho = chi.density(k);
        let decay = (-eps * chi.bin_edges[k]).exp();
        let need = if rho > 0.0 { (rho * decay).max(decay / rho) } else { f64::INFINITY };
        c = c.max(need);
    }
    Ok(EpsClass { eps, c, verdict: c.is_finite() && c <= C_CAP })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub sigma: f64,
    pub curves: GrowthCurves,
    pub criterion_table: Vec<CriterionRow>,
    pub eps_class: Vec<EpsClass>,
}

pub fn growth_report(chi: &PushforwardMeasure, criteria: &[(f64, f64, f64)], eps: &[f64]) -> Result<GrowthReport> {
    let curves = volume_growth(chi)?;
    Ok(GrowthReport {
        sigma: curves.sigma,
        criterion_table: criteria.iter().map(|&(a, d, e)| growth_criterion(chi, a, d, e)).collect::<Result<_>>()?,
        eps_class: eps.iter().map(|&e| eps_exp_check(chi, e)).collect::<Result<_>>()?,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasimode::scenario_frames;
    use crate::scenarios::{scenario, Domain, Profile};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn interval_frame_chi(hi: f64) -> PushforwardMeasure {
        let setup = scenario_frames(&scenario("interval-j0").unwrap()).unwrap().remove(0);
        let lo = 2.0 * setup.frame.w_min();
        PushforwardMeasure::from_density(|t| 0.5 * setup.frame.point(0.5 * t).chi, uniform_edges(lo, hi, 400), true)
            .unwrap()
    }

    #[test]
    fn identity_pushforward_of_lebesgue() {
        let v = |s: f64| Ok(Jet::var(s));
        let base = |_: f64| Ok(1.0);
        let chi = pushforward(&v, &base, &[Zone { lo: 0.0, hi: 1.0 }], uniform_edges(0.0, 1.0, 10), false).unwrap();
        for m in &chi.masses {
            assert!((m - 0.1).abs() < 1e-12);
        }
    }

    /// `v = 1 - log(δ/D)` and `base = J_0·(δ/D)` on the unit interval, `D = 1`.
    fn interval_v(s: f64) -> Result<Jet> {
        let dom = Domain::Interval { len: 1.0 };
        Ok(1.0 - Profile::Delta { d: 1.0 }.jet(&dom, s)?.ln())
    }

    fn interval_base(s: f64) -> Result<f64> {
        let d = Domain::Interval { len: 1.0 }.delta(s)?.v;
        Ok(d / (4.0 * d * d))
    }

    const HALVES: [Zone; 2] = [Zone { lo: 0.0, hi: 0.5 }, Zone { lo: 0.5, hi: 1.0 }];

    #[test]
    fn interval_pushforward_is_linear() {
        let chi = pushforward(&interval_v, &interval_base, &HALVES, uniform_edges(5.0, 15.0, 10), true).unwrap();
        assert!((chi.total() - 5.0).abs() < 1e-9, "{}", chi.total());
        // Agrees with the frame route.
        let f = interval_frame_chi(15.0);
        assert!((f.cumulative(15.0) - f.cumulative(5.0) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn non_monotone_zone_rejected() {
        let whole = [Zone { lo: 0.0, hi: 1.0 }];
        assert!(pushforward(&interval_v, &interval_base, &whole, uniform_edges(2.0, 3.0, 2), true).is_err());
    }

    #[test]
    fn model_end_density_is_pi() {
        let setup = scenario_frames(&scenario("modelend-n3-c0").unwrap()).unwrap().remove(0);
        let chi = PushforwardMeasure::from_frame(setup.frame.as_ref(), uniform_edges(1.0, 11.0, 10)).unwrap();
        for k in 0..10 {
            assert!((chi.density(k) - std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_preserves_cumulative_mass() {
        let coarse = interval_frame_chi(40.0);
        let mut fine_edges = Vec::new();
        for w in coarse.bin_edges.windows(2) {
            fine_edges.extend([w[0], 0.5 * (w[0] + w[1])]);
        }
        fine_edges.push(coarse.hi());
        let setup = scenario_frames(&scenario("interval-j0").unwrap()).unwrap().remove(0);
        let fine = PushforwardMeasure::from_frame(setup.frame.as_ref(), fine_edges).unwrap();
        for &e in &coarse.bin_edges {
            assert!((coarse.cumulative(e) - fine.cumulative(e)).abs() < 1e-12 * coarse.total());
        }
    }

    #[test]
    fn growth_of_closed_forms() {
        let uni = PushforwardMeasure::from_density(|_| 1.0, uniform_edges(0.0, 1000.0, 1000), true).unwrap();
        let g = volume_growth(&uni).unwrap();
        assert!(g.sigma < SUBEXPONENTIAL && g.subexponential && !g.low_confidence);
        let ex = PushforwardMeasure::from_density(|t| (2.0 * t).exp(), uniform_edges(0.0, 200.0, 400), true).unwrap();
        let g = volume_growth(&ex).unwrap();
        assert!((g.sigma - 2.0).abs() < 0.05, "{}", g.sigma);
        let short = PushforwardMeasure::from_density(|_| 1.0, uniform_edges(1.0, 20.0, 19), true).unwrap();
        assert!(volume_growth(&short).unwrap().low_confidence);
    }

    #[test]
    fn interval_chi_grows_linearly() {
        let chi = interval_frame_chi(1000.0);
        let g = volume_growth(&chi).unwrap();
        assert!(g.sigma < SUBEXPONENTIAL);
        let last = g.rows.last().unwrap();
        assert!((last.v / last.r - 0.5).abs() < 0.025, "{}", last.v / last.r);
        assert!(g.to_csv().starts_with("r,V,S,logV_over_r\n"));
    }

    #[test]
    fn window_search_examples() {
        let uni = PushforwardMeasure::from_density(|_| 1.0, uniform_edges(0.0, 100.0, 100), true).unwrap();
        let row = window_search(&uni, 10.0, 0.1, 5.0).unwrap();
        assert_eq!(row.verdict, CriterionVerdict::Found);
        assert!((row.b.unwrap() - 20.0).abs() < 1e-9, "{row:?}");
        let ex = PushforwardMeasure::from_density(f64::exp, uniform_edges(0.0, 60.0, 240), true).unwrap();
        // S(b)/(V(b) - V(a)) = (e - 1)/(1 - e^{a-b}) decreases to e - 1 from above.
        let row = window_search(&ex, 10.0, 0.5, 5.0).unwrap();
        assert_eq!(row.verdict, CriterionVerdict::GrowthObstruction);
        assert!(window_search(&ex, 10.0, 1.7, 5.0).unwrap().b.is_none());
        let row = window_search(&ex, 10.0, 2.0, 5.0).unwrap();
        assert!((row.b.unwrap() - 15.0).abs() < 1e-12);
        let ex2 = PushforwardMeasure::from_density(|t| (2.0 * t).exp(), uniform_edges(0.0, 60.0, 240), true).unwrap();
        assert_eq!(growth_criterion(&ex2, 10.0, 5.0, 0.01).unwrap().verdict, CriterionVerdict::GrowthObstruction);
        assert_eq!(growth_criterion(&uni, 10.0, 5.0, 1.0).unwrap().b, Some(15.0));
        // ε ≥ 1 does not force b = a + d: for density e^t the ratio stays above e - 1.
        assert_eq!(growth_criterion(&ex, 10.0, 5.0, 1.0).unwrap().b, None);
    }

    #[test]
    fn eps_class_examples() {
        let s = 3.0;
        let uni = PushforwardMeasure::from_density(|_| s, uniform_edges(0.0, 50.0, 50), true).unwrap();
        for eps in [0.01, 0.5, 2.0] {
            let e = eps_exp_check(&uni, eps).unwrap();
            assert!(e.verdict && (e.c - 3.0).abs() < 1e-12);
        }
        let ex = PushforwardMeasure::from_density(|t| (2.0 * t).exp(), uniform_edges(0.0, 20.0, 80), true).unwrap();
        assert!(!eps_exp_check(&ex, 1.0).unwrap().verdict);
        assert!(eps_exp_check(&interval_frame_chi(200.0), 0.5).unwrap().verdict);
        let zero = PushforwardMeasure::from_density(|t| if t < 1.0 { 0.0 } else { 1.0 }, uniform_edges(0.0, 2.0, 2), true)
            .unwrap();
        assert_eq!(eps_exp_check(&zero, 0.5).unwrap().c, f64::INFINITY);
    }

    #[test]
    fn change_of_variables_for_random_polynomials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let edges = uniform_edges(2.0, 12.0, 20);
        let chi = pushforward(&interval_v, &interval_base, &HALVES, edges, true).unwrap();
        for _ in 0..20 {
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let g = move |t: f64| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t;
            let lhs = chi.integrate(g);
            let rhs = integrate_direct(&g, &interval_v, &interval_base, &HALVES, (2.0, 12.0)).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn cumulative_nondecreasing(masses in prop::collection::vec(0.0f64..5.0, 2..40), r in 0.0f64..50.0) {
            let edges = uniform_edges(0.0, masses.len() as f64, masses.len());
            let chi = PushforwardMeasure::from_density(
                |t| masses[(t.floor() as usize).min(masses.len() - 1)], edges, false).unwrap();
            prop_assert!(chi.cumulative(r) <= chi.cumulative(r + 0.37) + 1e-12);
            prop_assert!(chi.masses.iter().all(|&m| m >= 0.0));
        }
    }
}
