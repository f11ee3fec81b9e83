//! Weyl-sequence quasimodes `φ = ψ(w) e^{iμw}` on ground-state frames,
//! their residual ratios, window schedules that certify points of the
//! essential spectrum, and the transfer of such certificates between
//! comparable weights.
//!
//! Frames use `w = v/2`, so `|∇w|²_{A/W} → 1` and `μ = √η`. With
//! `L̃f = f'·L̃w - f''·G` the residual splits as
//! `e^{-iμw}(L - η)φ = Re + i·Im`,
//! `Re = ηψ(G - 1) + ψ'L̃w - ψ''G + Vψ`, `Im = μψL̃w - 2μψ'G`.

mod frames;

use rayon::prelude::*;
use serde::Serialize;

pub use frames::{frame_setup, scenario_frames, BoundaryFrame, Frame, FramePoint, FrameSetup, ModelEndFrame};

use crate::error::{param, Error, Result};
use crate::fit;
use crate::quad::gl8;
use crate::scenarios::build_weight;

pub use crate::measures::window_search;

/// `max S'` of the quintic smoothstep `S = 6x⁵ - 15x⁴ + 10x³`.
pub const MAX_D1: f64 = 1.875;
/// `max |S''| = 10/√3`.
pub const MAX_D2: f64 = 5.773_502_691_896_258;
/// `sup (|S'| + |S''|)`, attained at `x ≈ 0.2401394`.
pub const C_BOUND: f64 = 6.688_974_673_411_22;

/// Default certification tolerance on the residual ratio.
pub const DEFAULT_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b >= a + 2.0) {
            return param(format!("window [{a}, {b}] is shorter than 2"));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    /// Quadrature panels: four per ramp and geometrically growing panels on
    /// the plateau, refined near `a + 1` where the frame terms still decay.
    fn panels(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let ramp = |lo: f64, out: &mut Vec<(f64, f64)>| {
            for k in 0..4 {
                out.push((lo + 0.25 * k as f64, lo + 0.25 * (k + 1) as f64));
            }
        };
        ramp(self.a, &mut out);
        let (mut x, end) = (self.a + 1.0, self.b - 1.0);
        let mut h = 0.125;
        while x < end {
            let y = (x + h).min(end);
            if end - y < 0.5 * h {
                out.push((x, end));
                break;
            }
            out.push((x, y));
            x = y;
            h *= 1.15;
        }
        ramp(self.b - 1.0, &mut out);
        out
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        let (xs, ws) = gl8();
        let mut out = Vec::new();
        for (lo, hi) in self.panels() {
            let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (x, w) in xs.iter().zip(ws) {
                out.push((c + r * x, r * w));
            }
        }
        out
    }
}

/// `C²` cutoff: `S(w - a)` on `[a, a+1]`, 1 on the plateau, `S(b - w)` on
/// `[b-1, b]`, 0 outside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoff {
    pub window: Window,
    pub c_bound: f64,
}

fn smoothstep(x: f64) -> (f64, f64, f64) {
    let x = x.clamp(0.0, 1.0);
    let (x2, y) = (x * x, 1.0 - x);
    (x2 * x * (10.0 - 15.0 * x + 6.0 * x2), 30.0 * x2 * y * y, 60.0 * x * y * (1.0 - 2.0 * x))
}

pub fn build_cutoff(window: Window) -> Result<Cutoff> {
    let w = Window::new(window.a, window.b)?;
    Ok(Cutoff { window: w, c_bound: C_BOUND })
}

impl Cutoff {
    /// `(ψ, ψ', ψ'')` at `w`.
    pub fn eval(&self, w: f64) -> (f64, f64, f64) {
        let Window { a, b } = self.window;
        if w <= a || w >= b {
            return (0.0, 0.0, 0.0);
        }
        // On a window of length 2 both ramps meet at a + 1; the nearer end wins.
        if w - a <= b - w {
            smoothstep(w - a)
        } else {
            let (s, d, dd) = smoothstep(b - w);
            (s, -d, dd)
        }
    }
}

/// L² norms of the residual terms divided by `‖φ‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
#[allow(non_snake_case)]
pub struct ResidualTerms {
    /// `ψ'L̃w + iμψL̃w`.
    pub bulk_Lv: f64,
    /// `ηψ(G - 1)`.
    pub grad_defect: f64,
    /// `-2iμψ'G`.
    pub cutoff1: f64,
    /// `-ψ''G`.
    pub cutoff2: f64,
    /// `Vψ`.
    pub potential: f64,
}

/// Itemized a-priori bound; `total ≥ ratio` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioBound {
    /// `(2μ·max S' + max|S''|)·sup G·√(ramp mass)/‖φ‖`.
    pub cutoff: f64,
    /// `sup|L̃w|·(μ + max S'·√(ramp mass)/‖φ‖)`.
    pub bulk_lv: f64,
    /// `η·sup|G - 1|`.
    pub grad: f64,
    /// `sup|V|`.
    pub potential: f64,
    pub total: f64,
    pub ramp_mass: f64,
    pub plateau_mass: f64,
    pub sup_lw: f64,
    pub sup_grad_defect: f64,
    pub sup_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub eta: f64,
    pub window: Window,
    pub ratio: f64,
    /// `‖φ‖²`.
    pub mass: f64,
    pub terms: ResidualTerms,
    pub bound: RatioBound,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return param(format!("η = {eta}: quasimodes only target η ≥ 0, i.e. λ at or above the frame bottom"));
    }
    Ok(())
}

fn check_window(frame: &dyn Frame, window: &Window) -> Result<()> {
    Window::new(window.a, window.b)?;
    if window.a < frame.w_min() {
        return param(format!("window starts at {} below the frame edge {}", window.a, frame.w_min()));
    }
    Ok(())
}

/// Real and imaginary residual parts at one node.
fn residual_parts(p: &FramePoint, psi: (f64, f64, f64), eta: f64) -> [f64; 5] {
    let mu = eta.sqrt();
    let (s, d, dd) = psi;
    // [bulk re, bulk im, grad, cutoff1 (im), cutoff2 + potential (re)]
    [d * p.lw, mu * s * p.lw, eta * s * (p.g - 1.0), -2.0 * mu * d * p.g, -dd * p.g + p.v * s]
}

/// `‖(L - η)φ‖/‖φ‖` on the frame, with its term breakdown and bound.
pub fn quasimode_residual(frame: &dyn Frame, eta: f64, window: Window) -> Result<Residual> {
    check_eta(eta)?;
    check_window(frame, &window)?;
    let cut = build_cutoff(window)?;
    let mu = eta.sqrt();
    let (mut num, mut den) = (0.0, 0.0);
    let mut t = [0.0; 5];
    let (mut ramp_mass, mut plateau_mass) = (0.0, 0.0);
    let (mut sup_lw, mut sup_g, mut sup_gd, mut sup_v) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (w, qw) in window.nodes() {
        let p = frame.point(w);
        if !(p.chi.is_finite() && p.lw.is_finite() && p.v.is_finite() && p.g.is_finite()) {
            return Err(Error::Evaluation(format!("frame not finite at w = {w}")));
        }
        let psi = cut.eval(w);
        let [b_re, b_im, grad, c1, c2v] = residual_parts(&p, psi, eta);
        let re = b_re + grad + c2v;
        let im = b_im + c1;
        let m = qw * p.chi;
        num += m * (re * re + im * im);
        den += m * psi.0 * psi.0;
        t[0] += m * (b_re * b_re + b_im * b_im);
        t[1] += m * grad * grad;
        t[2] += m * c1 * c1;
        t[3] += m * (psi.2 * p.g).powi(2);
        t[4] += m * (p.v * psi.0).powi(2);
        if w < window.a + 1.0 || w > window.b - 1.0 {
            ramp_mass += m;
        } else {
            plateau_mass += m;
        }
        sup_lw = sup_lw.max(p.lw.abs());
        sup_g = sup_g.max(p.g.abs());
        sup_gd = sup_gd.max((p.g - 1.0).abs());
        sup_v = sup_v.max(p.v.abs());
    }
    if !(den > 0.0) {
        return Err(Error::Evaluation("zero quasimode norm on the window".into()));
    }
    let norm = den.sqrt();
    let rr = ramp_mass.sqrt() / norm;
    let cutoff = (2.0 * mu * MAX_D1 + MAX_D2) * sup_g * rr;
    let bulk_lv = sup_lw * (mu + MAX_D1 * rr);
    let grad = eta * sup_gd;
    let bound = RatioBound {
        cutoff,
        bulk_lv,
        grad,
        potential: sup_v,
        total: cutoff + bulk_lv + grad + sup_v,
        ramp_mass,
        plateau_mass,
        sup_lw,
        sup_grad_defect: sup_gd,
        sup_v,
    };
    let terms = ResidualTerms {
        bulk_Lv: t[0].sqrt() / norm,
        grad_defect: t[1].sqrt() / norm,
        cutoff1: t[2].sqrt() / norm,
        cutoff2: t[3].sqrt() / norm,
        potential: t[4].sqrt() / norm,
    };
    Ok(Residual { eta, window, ratio: (num / den).sqrt(), mass: den, terms, bound })
}

/// The same ratio computed from jets of the physical profiles: `(L - η)φ`
/// with `L = u_{1/2}^{-1}(W^{-1}P - 1)u_{1/2}` is evaluated directly at the
/// physical point of each node, and the measure is `u_{1/2}² W m |ds/dw|`.
/// Shares no frame formula with [`quasimode_residual`].
pub fn direct_residual(setup: &FrameSetup, eta: f64, window: Window) -> Result<f64> {
    check_eta(eta)?;
    check_window(setup.frame.as_ref(), &window)?;
    let cut = build_cutoff(window)?;
    let weight = build_weight(&setup.domain, &setup.weight)?;
    let mu = eta.sqrt();
    let (mut num, mut den) = (0.0, 0.0);
    for (w, qw) in window.nodes() {
        let s = setup.frame.physical(w).ok_or_else(|| {
            Error::Evaluation(format!("level set w = {w} is not resolvable in physical coordinates"))
        })?;
        let (u0, u1) = setup.pair.jets(&setup.domain, s)?;
        let half = (u0 * u1).sqrt();
        let wj = (1.0 - u0.ln() + u1.ln()) * 0.5;
        let (p0, p1, p2) = cut.eval(wj.v);
        let psi = wj.compose(p0, p1, p2);
        let phase = wj * mu;
        let wv = weight.value(s)?;
        let mut sq = 0.0;
        for part in [psi * phase.cos(), psi * phase.sin()] {
            let pf = setup.op.apply(&setup.domain, s, half * part)?;
            let r = pf / (wv * half.v) - (1.0 + eta) * part.v;
            sq += r * r;
        }
        let m = half.v * half.v * wv * setup.domain.measure(s).v / wj.d.abs();
        num += qw * m * sq;
        den += qw * m * psi.v * psi.v;
    }
    if !(den > 0.0) {
        return Err(Error::Evaluation("zero quasimode norm on the window".into()));
    }
    Ok((num / den).sqrt())
}

/// Window lengths tried in order for each `η`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSchedule {
    pub lengths: Vec<f64>,
    /// Stop an `η` at its first certified window.
    pub stop_when_certified: bool,
}

impl Default for WindowSchedule {
    /// `25·2^k`, `k = 0..=14`. The residual decays like `length^{-1/2}`, so
    /// `tol = 0.02` needs lengths near `10⁵` on exact frames.
    fn default() -> Self {
        Self::geometric(25.0, 15)
    }
}

impl WindowSchedule {
    pub fn geometric(first: f64, count: usize) -> Self {
        Self { lengths: (0..count).map(|k| first * 2f64.powi(k as i32)).collect(), stop_when_certified: true }
    }
}

/// Sup of the frame defects `max(|L̃w|, |V|, |G - 1|)` sampled on `[a, b]`.
fn defect_sup(frame: &dyn Frame, a: f64, b: f64) -> f64 {
    let n = 64;
    (0..=n)
        .map(|k| {
            // Denser near `a`, where the defects are largest.
            let x = a + (b - a) * (k as f64 / n as f64).powi(3);
            let p = frame.point(x);
            p.lw.abs().max(p.v.abs()).max((p.g - 1.0).abs())
        })
        .fold(0.0, f64::max)
}

/// Smallest `a ≥ a_min` (to resolution 1/4) whose window of length `len`
/// has defect sup at most `thr`; the defects decay toward infinity.
fn advance_start(frame: &dyn Frame, a_min: f64, len: f64, thr: f64) -> Result<f64> {
    let ok = |a: f64| defect_sup(frame, a, a + len) <= thr;
    if ok(a_min) {
        return Ok(a_min);
    }
    let mut step = 1.0;
    while !ok(a_min + step) {
        step *= 2.0;
        if step > 1e7 {
            return Err(Error::NoConvergence(format!("frame defects stay above {thr}")));
        }
    }
    let (mut lo, mut hi) = (a_min + 0.5 * step, a_min + step);
    if step == 1.0 {
        lo = a_min;
    }
    while hi - lo > 0.25 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeCell {
    pub step: usize,
    pub residual: Residual,
    /// `min(1/step, tol/4)`: the defect threshold used to place the window.
    pub threshold: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaSummary {
    pub eta: f64,
    /// Spectral parameter `1 + η` in frame units.
    pub lambda: f64,
    /// The same point in the scenario's units.
    pub scenario_lambda: f64,
    pub certified: bool,
    /// Fitted slope of `log ratio` against `log ‖φ‖²`.
    pub slope: Option<f64>,
    pub final_ratio: f64,
    pub windows: usize,
}

/// Frame conditions sampled far out: `v → ∞` holds by construction; the
/// tails of `|L̃w|`, `|G - 1|` and `|V|` must tend to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameTails {
    pub w: [f64; 3],
    pub lw: [f64; 3],
    pub grad_defect: [f64; 3],
    /// Persson side: `V → 0` keeps the essential spectrum above the frame bottom.
    pub potential: [f64; 3],
    pub decaying: bool,
}

pub fn frame_tails(frame: &dyn Frame) -> FrameTails {
    let w0 = frame.w_min();
    let w = [w0 + 10.0, w0 + 100.0, w0 + 1000.0];
    let pts = w.map(|x| frame.point(x));
    let lw = pts.map(|p| p.lw.abs());
    let gd = pts.map(|p| (p.g - 1.0).abs());
    let v = pts.map(|p| p.v.abs());
    let dec = |a: [f64; 3]| a[2] <= a[0] && a[2] < 1e-2;
    FrameTails { w, lw, grad_defect: gd, potential: v, decaying: dec(lw) && dec(gd) && dec(v) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasimodeReport {
    pub scenario: String,
    pub frame: String,
    pub tol: f64,
    pub c_bound: f64,
    pub tails: FrameTails,
    pub cells: Vec<Vec<ProbeCell>>,
    pub summary: Vec<EtaSummary>,
}

fn probe_eta(frame: &dyn Frame, eta: f64, schedule: &WindowSchedule, tol: f64) -> Result<Vec<ProbeCell>> {
    let mut cells = Vec::new();
    let mut prev_b = frame.w_min();
    for (k, &len) in schedule.lengths.iter().enumerate() {
        let step = k + 1;
        let threshold = (1.0 / step as f64).min(0.25 * tol);
        let a = advance_start(frame, frame.w_min().max(prev_b.min(step as f64)), len, threshold)?;
        let residual = quasimode_residual(frame, eta, Window::new(a, a + len)?)?;
        prev_b = a + len;
        cells.push(ProbeCell { step, residual, threshold, certified: false });
        let slope = slope_of(&cells);
        let certified = cells.len() >= 2 && residual.ratio <= tol && slope.is_some_and(|s| s < 0.0);
        cells.last_mut().expect("pushed").certified = certified;
        if certified && schedule.stop_when_certified {
            break;
        }
    }
    Ok(cells)
}

fn slope_of(cells: &[ProbeCell]) -> Option<f64> {
    let m: Vec<f64> = cells.iter().map(|c| c.residual.mass).collect();
    let r: Vec<f64> = cells.iter().map(|c| c.residual.ratio).collect();
    fit::log_log_slope(&m, &r)
}

/// Run the window schedule for every `η` in parallel. An exhausted schedule
/// leaves `η` uncertified; it is not an error.
pub fn ess_spectrum_probe(
    scenario: &str,
    setup: &FrameSetup,
    eta_grid: &[f64],
    schedule: &WindowSchedule,
    tol: f64,
) -> Result<QuasimodeReport> {
    for &eta in eta_grid {
        check_eta(eta)?;
    }
    if !(tol > 0.0) || schedule.lengths.is_empty() || schedule.lengths.iter().any(|&l| !(l >= 2.0)) {
        return param("probe needs tol > 0 and window lengths ≥ 2");
    }
    let frame = setup.frame.as_ref();
    let cells: Vec<Vec<ProbeCell>> =
        eta_grid.par_iter().map(|&eta| probe_eta(frame, eta, schedule, tol)).collect::<Result<_>>()?;
    let summary = eta_grid
        .iter()
        .zip(&cells)
        .map(|(&eta, c)| {
            let last = c.last().expect("schedule nonempty");
            EtaSummary {
                eta,
                lambda: 1.0 + eta,
                scenario_lambda: setup.scale * (1.0 + eta),
                certified: last.certified,
                slope: slope_of(c),
                final_ratio: last.residual.ratio,
                windows: c.len(),
            }
        })
        .collect();
    Ok(QuasimodeReport {
        scenario: scenario.to_string(),
        frame: frame.name(),
        tol,
        c_bound: C_BOUND,
        tails: frame_tails(frame),
        cells,
        summary,
    })
}

impl QuasimodeReport {
    /// One row per evaluated window.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "scenario,eta,a,b,ratio,bulk_Lv,grad_defect,cutoff1,cutoff2,potential,bound,mass,certified\n",
        );
        for row in &self.cells {
            for c in row {
                let r = &c.residual;
                let t = &r.terms;
                s.push_str(&format!(
                    "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}\n",
                    self.scenario,
                    r.eta,
                    r.window.a,
                    r.window.b,
                    r.ratio,
                    t.bulk_Lv,
                    t.grad_defect,
                    t.cutoff1,
                    t.cutoff2,
                    t.potential,
                    r.bound.total,
                    r.mass,
                    c.certified
                ));
            }
        }
        s
    }
}

/// `W2/W1` on the frame coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightRatio {
    Identical,
    /// `1 + A(1 + sin(2πw/period))/2`: a perturbation that persists to infinity.
    Bump { amplitude: f64, period: f64 },
    /// `1 + A e^{-κw}`: equivalent tails.
    Tail { amplitude: f64, kappa: f64 },
}

impl WeightRatio {
    pub fn value(&self, w: f64) -> f64 {
        match *self {
            WeightRatio::Identical => 1.0,
            WeightRatio::Bump { amplitude, period } => {
                1.0 + 0.5 * amplitude * (1.0 + (std::f64::consts::TAU * w / period).sin())
            }
            WeightRatio::Tail { amplitude, kappa } => 1.0 + amplitude * (-kappa * w).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transfer {
    pub eta: f64,
    /// `λ = 1 + η` in frame units.
    pub lambda: f64,
    pub ratio_w1: f64,
    /// `2·ratio_W1 + |λ|·sup|W1/W2 - 1|`, valid while `W1/W2 ≤ 2`.
    pub bound_w2: f64,
    /// `sup(W1/W2)·ratio_W1 + |λ|·sup|W1/W2 - 1|`.
    pub sharp_bound_w2: f64,
    pub ratio_w2: f64,
    pub sup_rho: f64,
    pub sup_rho_defect: f64,
}

/// Residual of the `W1` quasimode `u = u_{1/2}φ` for `W2^{-1}P - λ` in
/// `L²(W2)`. With `ρ = W1/W2`, `(W2^{-1}P - λ)u = ρ(W1^{-1}P - λ)u + λ(ρ - 1)u`
/// and `‖f‖²_{W2} = ∫|f|²/ρ dχ`.
pub fn transfer_residual(frame: &dyn Frame, w2: &WeightRatio, eta: f64, window: Window) -> Result<Transfer> {
    let r1 = quasimode_residual(frame, eta, window)?;
    let cut = build_cutoff(window)?;
    let lambda = 1.0 + eta;
    let (mut num, mut den) = (0.0, 0.0);
    let (mut sup_rho, mut sup_def) = (0.0f64, 0.0f64);
    for (w, qw) in window.nodes() {
        let ratio = w2.value(w);
        if !(ratio > 0.0 && ratio.is_finite()) {
            return param(format!("weights not comparable at w = {w}: W2/W1 = {ratio}"));
        }
        let rho = 1.0 / ratio;
        let p = frame.point(w);
        let psi = cut.eval(w);
        let [b_re, b_im, grad, c1, c2v] = residual_parts(&p, psi, eta);
        let re = rho * (b_re + grad + c2v) + lambda * (rho - 1.0) * psi.0;
        let im = rho * (b_im + c1);
        let m = qw * p.chi / rho;
        num += m * (re * re + im * im);
        den += m * psi.0 * psi.0;
        sup_rho = sup_rho.max(rho);
        sup_def = sup_def.max((rho - 1.0).abs());
    }
    let ratio_w2 = (num / den).sqrt();
    Ok(Transfer {
        eta,
        lambda,
        ratio_w1: r1.ratio,
        bound_w2: 2.0 * r1.ratio + lambda * sup_def,
        sharp_bound_w2: sup_rho * r1.ratio + lambda * sup_def,
        ratio_w2,
        sup_rho,
        sup_rho_defect: sup_def,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{scenario, Component, Domain, FrameSpec};
    use proptest::prelude::*;

    fn interval_j0() -> FrameSetup {
        scenario_frames(&scenario("interval-j0").unwrap()).unwrap().remove(0)
    }

    #[test]
    fn smoothstep_constants() {
        let cut = build_cutoff(Window::new(0.0, 10.0).unwrap()).unwrap();
        assert_eq!(cut.eval(0.0), (0.0, 0.0, 0.0));
        assert_eq!(cut.eval(1.0).0, 1.0);
        assert_eq!(cut.eval(1.0).1, 0.0);
        let n = 200_000;
        let (mut m1, mut m2, mut mc) = (0.0f64, 0.0f64, 0.0f64);
        for k in 0..=n {
            let (_, d, dd) = cut.eval(k as f64 / n as f64);
            m1 = m1.max(d.abs());
            m2 = m2.max(dd.abs());
            mc = mc.max(d.abs() + dd.abs());
        }
        assert!((m1 - MAX_D1).abs() < 1e-9);
        assert!((m2 - 10.0 / 3f64.sqrt()).abs() < 1e-8 && (MAX_D2 - 10.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((mc - C_BOUND).abs() < 1e-8 && mc <= C_BOUND);
    }

    #[test]
    fn minimal_window_has_point_plateau() {
        let cut = build_cutoff(Window::new(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(cut.eval(1.0), (1.0, 0.0, 0.0));
        assert!(cut.eval(0.999).0 < 1.0 && cut.eval(1.001).0 < 1.0);
        assert!(build_cutoff(Window { a: 0.0, b: 1.9 }).is_err());
    }

    #[test]
    fn interval_ratio_matches_closed_form() {
        // χ constant, L̃w = V = 0, G = 1: ratio² = 2(∫S''² + 4η∫S'²)/(L - 2 + 2∫S²).
        let setup = interval_j0();
        for (eta, len) in [(0.0, 50.0), (1.0, 50.0), (3.0, 400.0)] {
            let a = setup.frame.w_min() + 5.0;
            let r = quasimode_residual(setup.frame.as_ref(), eta, Window::new(a, a + len).unwrap()).unwrap();
            let s2 = 0.391_774_891_774_891_9;
            let exact = (2.0 * (120.0 / 7.0 + 4.0 * eta * 10.0 / 7.0) / (len - 2.0 + 2.0 * s2)).sqrt();
            assert!((r.ratio - exact).abs() < 1e-10 * exact, "{} vs {exact}", r.ratio);
            assert_eq!(r.terms.bulk_Lv, 0.0);
            assert_eq!(r.terms.potential, 0.0);
            assert!(r.ratio <= r.bound.total);
        }
    }

    #[test]
    fn doubling_scales_by_inverse_sqrt_two() {
        let setup = interval_j0();
        let f = setup.frame.as_ref();
        let a = f.w_min() + 5.0;
        let r1 = quasimode_residual(f, 1.0, Window::new(a, a + 1000.0).unwrap()).unwrap().ratio;
        let r2 = quasimode_residual(f, 1.0, Window::new(a, a + 2000.0).unwrap()).unwrap().ratio;
        assert!((r2 / r1 - 0.5f64.sqrt()).abs() < 2e-3);
    }

    #[test]
    fn rejects_negative_eta_and_early_windows() {
        let setup = interval_j0();
        let f = setup.frame.as_ref();
        assert!(quasimode_residual(f, -0.5, Window::new(10.0, 20.0).unwrap()).is_err());
        assert!(quasimode_residual(f, 0.5, Window::new(f.w_min() - 1.0, 20.0).unwrap()).is_err());
    }

    #[test]
    fn frame_route_matches_direct_jets() {
        let cases = [
            ("interval-j0", 0.0, 6.0, 40.0),
            // Windows keep δ ≳ 1e-6 so that `R - δ` still resolves δ.
            ("ball3-j0", 1.0, 2.0, 5.0),
            // Level ≥ 1 level sets leave double range quickly; on the interval
            // `s = δ` stays exact down to underflow.
            ("interval-j1", 0.5, 0.1, 2.3),
            ("annulus3-delta2", 1.0, 1.0, 5.0),
            ("modelend-n3-c1", 0.7, 0.5, 9.0),
            ("modelend-n3-c0", 3.0, 0.5, 30.0),
        ];
        for (name, eta, off, len) in cases {
            for setup in scenario_frames(&scenario(name).unwrap()).unwrap() {
                let f = setup.frame.as_ref();
                let win = Window::new(f.w_min() + off, f.w_min() + off + len).unwrap();
                let a = quasimode_residual(f, eta, win).unwrap().ratio;
                let b = direct_residual(&setup, eta, win).unwrap();
                assert!((a - b).abs() <= 1e-6 * a, "{name} {}: frame {a} direct {b}", f.name());
            }
        }
    }

    #[test]
    fn exact_frame_has_only_cutoff_terms_at_eta_zero() {
        let setup = interval_j0();
        let f = setup.frame.as_ref();
        let r = quasimode_residual(f, 0.0, Window::new(f.w_min() + 3.0, f.w_min() + 60.0).unwrap()).unwrap();
        assert_eq!((r.terms.bulk_Lv, r.terms.grad_defect, r.terms.cutoff1, r.terms.potential), (0.0, 0.0, 0.0, 0.0));
        assert!((r.terms.cutoff2 - r.ratio).abs() < 1e-14);
    }

    #[test]
    fn probe_certifies_interval_and_reports_slope() {
        let setup = interval_j0();
        let rep = ess_spectrum_probe("interval-j0", &setup, &[0.0, 1.0, 3.0], &WindowSchedule::default(), 0.02).unwrap();
        for s in &rep.summary {
            assert!(s.certified, "{s:?}");
            assert!((s.slope.unwrap() + 0.5).abs() < 0.02, "{s:?}");
        }
        assert!(rep.tails.decaying);
        assert!(rep.to_csv().lines().count() > 3);
    }

    #[test]
    fn probe_certifies_ball_level_one() {
        let setup = scenario_frames(&scenario("ball3-j1").unwrap()).unwrap().remove(0);
        let rep = ess_spectrum_probe("ball3-j1", &setup, &[0.5], &WindowSchedule::default(), 0.02).unwrap();
        assert!(rep.summary[0].certified, "{:?}", rep.summary[0]);
        assert!(rep.tails.potential[2] < 1e-6);
    }

    #[test]
    fn short_schedule_is_uncertified_not_an_error() {
        let setup = interval_j0();
        let rep =
            ess_spectrum_probe("interval-j0", &setup, &[1.0], &WindowSchedule::geometric(25.0, 4), 0.02).unwrap();
        assert!(!rep.summary[0].certified);
        assert_eq!(rep.summary[0].windows, 4);
        assert!(ess_spectrum_probe("x", &setup, &[-0.5], &WindowSchedule::default(), 0.02).is_err());
    }

    #[test]
    fn transfer_identical_and_bump() {
        let setup = interval_j0();
        let f = setup.frame.as_ref();
        let win = Window::new(f.w_min() + 5.0, f.w_min() + 505.0).unwrap();
        let t = transfer_residual(f, &WeightRatio::Identical, 0.25, win).unwrap();
        assert!((t.ratio_w2 - t.ratio_w1).abs() < 1e-14);
        assert_eq!(t.bound_w2, 2.0 * t.ratio_w1);
        let bump = WeightRatio::Bump { amplitude: 0.01, period: 7.0 };
        let t = transfer_residual(f, &bump, 0.25, win).unwrap();
        assert!(t.ratio_w2 <= t.sharp_bound_w2 * (1.0 + 1e-9) && t.sharp_bound_w2 <= t.bound_w2);
        assert!(t.ratio_w2 <= 2.0 * t.ratio_w1 + 1.25 * 0.01 * 1.01);
        assert!(transfer_residual(f, &WeightRatio::Tail { amplitude: -2.0, kappa: 0.0 }, 0.25, win).is_err());
    }

    #[test]
    fn transfer_certifies_shared_bottom_for_equivalent_tails() {
        // δ² frame of the interval, W2/W1 = 1 + 3e^{-w/2}: λ = 1 (¼ in δ units)
        // stays in the W2 essential spectrum as windows move out.
        let setup = scenario_frames(&scenario("interval-delta2").unwrap()).unwrap().remove(0);
        assert_eq!(setup.scale, 0.25);
        let f = setup.frame.as_ref();
        let tail = WeightRatio::Tail { amplitude: 3.0, kappa: 0.5 };
        let mut last = f64::INFINITY;
        for k in 0..6 {
            let len = 100.0 * 4f64.powi(k);
            let a = f.w_min() + 10.0 * 2f64.powi(k);
            let t = transfer_residual(f, &tail, 0.0, Window::new(a, a + len).unwrap()).unwrap();
            assert!(t.ratio_w2 <= t.sharp_bound_w2 * (1.0 + 1e-9));
            assert!(t.ratio_w2 < last);
            last = t.ratio_w2;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn bad_frame_component_rejected() {
        let d = Domain::Annulus { n: 3, inner: 1.0, outer: 2.0 };
        assert!(frame_setup(&d, &FrameSpec::Boundary { level: 0, d: 1.0, component: Component::All }, 1.0).is_err());
        assert!(frame_setup(&d, &FrameSpec::ModelEnd, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ratio_below_itemized_bound(
            name in prop::sample::select(vec!["ball3-j0", "ball3-j1", "annulus3-delta2", "modelend-n3-c1"]),
            eta in 0.0f64..4.0, off in 0.0f64..20.0, len in 2.0f64..500.0,
        ) {
            for setup in scenario_frames(&scenario(name).unwrap()).unwrap() {
                let f = setup.frame.as_ref();
                let r = quasimode_residual(f, eta, Window::new(f.w_min() + off, f.w_min() + off + len).unwrap()).unwrap();
                prop_assert!(r.ratio <= r.bound.total * (1.0 + 1e-12), "{r:?}");
                let t = &r.terms;
                let tri = t.bulk_Lv + t.grad_defect + t.cutoff1 + t.cutoff2 + t.potential;
                prop_assert!(r.ratio <= tri * (1.0 + 1e-12));
            }
        }

        #[test]
        fn cutoff_is_c2_at_joins(a in -50.0f64..50.0, len in 2.0f64..100.0) {
            let cut = build_cutoff(Window::new(a, a + len).unwrap()).unwrap();
            for x in [a, a + 1.0, a + len - 1.0, a + len] {
                let (l, r) = (cut.eval(x - 1e-9), cut.eval(x + 1e-9));
                prop_assert!((l.0 - r.0).abs() < 1e-7 && (l.1 - r.1).abs() < 1e-6 && (l.2 - r.2).abs() < 1e-6);
            }
        }

        #[test]
        fn certification_monotone_along_schedule(eta in 0.0f64..3.0) {
            let setup = interval_j0();
            let sched = WindowSchedule { stop_when_certified: false, ..WindowSchedule::geometric(25.0, 13) };
            let rep = ess_spectrum_probe("interval-j0", &setup, &[eta], &sched, 0.05).unwrap();
            let flags: Vec<bool> = rep.cells[0].iter().map(|c| c.certified).collect();
            let first = flags.iter().position(|&c| c).unwrap_or(flags.len());
            prop_assert!(flags[first..].iter().all(|&c| c), "{flags:?}");
        }
    }
}
