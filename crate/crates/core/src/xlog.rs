//! The iterated normalized logarithm `X_1(t) = 1/(1 - ln t)`, `X_{i+1} = X_1∘X_i`,
//! its products and derivatives, the product series `Σ_k X_1⋯X_k`, and the
//! choice of the scale `D`.
//!
//! Values are computed through the reciprocals `Y_k = 1/X_k`, which obey
//! `Y_1 = 1 - ln t` and `Y_{k+1} = 1 + ln Y_k`. Each `Y_k` is carried as an
//! unevaluated sum `hi + lo`.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::error::{domain, param, Result};
use crate::jet::Jet;

/// Default cap on the number of series terms.
pub const SERIES_TERM_CAP: usize = 1_000_000;
/// Default relative stopping tolerance for [`series_sum`].
pub const SERIES_TOL: f64 = 1e-10;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `ln(hi + lo)` with the first-order correction for `lo`; log1p form near 1.
#[inline]
fn ln_dw(hi: f64, lo: f64) -> f64 {
    let base = if (0.5..2.0).contains(&hi) { (hi - 1.0).ln_1p() } else { hi.ln() };
    base + lo / hi
}

/// Double-word `Y_1 = 1 - ln t`.
#[inline]
fn y1_dw(t: f64) -> (f64, f64) {
    let l = if t > 0.5 { (t - 1.0).ln_1p() } else { t.ln() };
    two_sum(1.0, -l)
}

/// Double-word `Y_{k+1} = 1 + ln Y_k`.
#[inline]
fn ynext_dw(hi: f64, lo: f64) -> (f64, f64) {
    let (s, e) = two_sum(1.0, ln_dw(hi, lo));
    two_sum(s, e)
}

#[inline]
fn recip_dw(hi: f64, lo: f64) -> f64 {
    let r = 1.0 / hi;
    r - r * r * lo
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return domain(format!("t = {t} outside (0, 1]"));
    }
    Ok(())
}

/// `Y_1(t), ..., Y_i(t)` as double-word pairs.
fn y_chain(i: usize, t: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(i);
    if i == 0 {
        return out;
    }
    let mut y = y1_dw(t);
    out.push(y);
    for _ in 1..i {
        y = ynext_dw(y.0, y.1);
        out.push(y);
    }
    out
}

/// `X_i(t)`; `X_0 ≡ 1`.
pub fn x_eval(i: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    if i == 0 {
        return Ok(1.0);
    }
    let (hi, lo) = *y_chain(i, t).last().expect("nonempty");
    Ok(recip_dw(hi, lo))
}

/// `1 / X_i(t)`, written `X_i^{-1}` in the weight formulas.
pub fn x_inv(i: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    if i == 0 {
        return Ok(1.0);
    }
    let (hi, lo) = *y_chain(i, t).last().expect("nonempty");
    Ok(hi + lo)
}

/// `[X_1(t), ..., X_i(t)]`.
pub fn x_levels(i: usize, t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    Ok(y_chain(i, t).into_iter().map(|(h, l)| recip_dw(h, l)).collect())
}

/// `Π_{k=1..i} X_k(t)`; the empty product is 1.
pub fn x_prod(i: usize, t: f64) -> Result<f64> {
    Ok(x_levels(i, t)?.into_iter().product())
}

/// `R_i(t) = Σ_{k=1..i} X_1(t)⋯X_k(t)`, with `R_0 = 0`.
pub fn r_sum(i: usize, t: f64) -> Result<f64> {
    let mut p = 1.0;
    let mut s = 0.0;
    for x in x_levels(i, t)? {
        p *= x;
        s += p;
    }
    Ok(s)
}

/// Closed form `X_i'(t) = (1/t) X_1⋯X_{i-1} X_i²`.
pub fn x_deriv(i: usize, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("x_deriv needs t in (0, 1), got {t}"));
    }
    if i == 0 {
        return Ok(0.0);
    }
    let xs = x_levels(i, t)?;
    let head: f64 = xs[..i - 1].iter().product();
    Ok(head * xs[i - 1] * xs[i - 1] / t)
}

/// Jets of `Y_1, ..., Y_i` composed with an inner jet `t(s)`.
///
/// Values use the double-word chain; derivatives follow `Y_{k+1}' = Y_k'/Y_k`.
pub fn y_jets(i: usize, t: Jet) -> Result<Vec<Jet>> {
    check_t(t.v)?;
    let chain = y_chain(i, t.v);
    let mut out = Vec::with_capacity(i);
    let mut prev = t;
    for (k, &(hi, lo)) in chain.iter().enumerate() {
        let val = hi + lo;
        let j = if k == 0 {
            let x = prev.v;
            prev.compose(val, -1.0 / x, 1.0 / (x * x))
        } else {
            let y = prev.v;
            prev.compose(val, 1.0 / y, -1.0 / (y * y))
        };
        out.push(j);
        prev = j;
    }
    Ok(out)
}

/// Jets of `X_1, ..., X_i` composed with `t(s)`.
pub fn x_jets(i: usize, t: Jet) -> Result<Vec<Jet>> {
    Ok(y_jets(i, t)?.into_iter().map(Jet::recip).collect())
}

/// Partial sums of `Σ_{k≥1} X_1(t)⋯X_k(t)` with a reported tail estimate.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesState {
    pub t: f64,
    pub partial_sums: Vec<f64>,
    /// Geometric-comparison estimate `T_k r/(1-r)` of the remainder, `r` the
    /// last term ratio. Never added to `partial_sums`.
    pub remainder_bound: f64,
    /// True only when the last two term ratios are nonincreasing, which makes
    /// the geometric comparison a proof. For this series the ratios `X_k(t)`
    /// increase toward 1, so the bound is heuristic.
    pub remainder_certified: bool,
    pub converged: bool,
}

impl SeriesState {
    pub fn sum(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> usize {
        self.partial_sums.len()
    }
}

struct SeriesCore {
    sum: f64,
    terms: usize,
    remainder: f64,
    certified: bool,
    converged: bool,
}

fn series_core(t: f64, tol: f64, cap: usize, mut record: impl FnMut(f64)) -> SeriesCore {
    if t == 0.0 {
        return SeriesCore { sum: 0.0, terms: 0, remainder: 0.0, certified: true, converged: true };
    }
    let mut y = y1_dw(t);
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 0;
    let mut r_prev;
    let mut r = f64::NAN;
    loop {
        if k > 0 {
            y = ynext_dw(y.0, y.1);
        }
        r_prev = r;
        r = recip_dw(y.0, y.1);
        term *= r;
        sum += term;
        k += 1;
        record(sum);
        if term < tol * sum {
            break;
        }
        if k >= cap {
            let (remainder, certified) = tail(term, r, r_prev);
            return SeriesCore { sum, terms: k, remainder, certified, converged: false };
        }
    }
    let (remainder, certified) = tail(term, r, r_prev);
    SeriesCore { sum, terms: k, remainder, certified, converged: true }
}

fn tail(term: f64, r: f64, r_prev: f64) -> (f64, bool) {
    let bound = if r < 1.0 { term * r / (1.0 - r) } else { f64::INFINITY };
    (bound, r_prev.is_finite() && r <= r_prev)
}

/// Sum the product series at `t ∈ [0, 1)` until the next term drops below
/// `tol` times the running sum, or `cap` terms have been added.
pub fn series_sum(t: f64, tol: f64, cap: usize) -> Result<SeriesState> {
    if !(0.0..1.0).contains(&t) {
        return domain(format!("series needs t in [0, 1), got {t}"));
    }
    if !(tol > 0.0) {
        return param("tol must be positive");
    }
    let mut partial_sums = Vec::new();
    let core = series_core(t, tol, cap, |s| partial_sums.push(s));
    Ok(SeriesState {
        t,
        partial_sums,
        remainder_bound: core.remainder,
        remainder_certified: core.certified,
        converged: core.converged,
    })
}

/// Outcome of [`select_d`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaleChoice {
    pub d: f64,
    /// The critical ratio `δ_max / D`.
    pub t_star: f64,
    /// Series value (partial sum plus reported tail) at `t_star`, or `R_{i_max}`.
    pub value: f64,
    pub remainder_bound: f64,
    /// Whether the guarantee for all `i` rests on a certified tail.
    pub tail_certified: bool,
    /// Series terms summed at `t_star` (`i_max` when bounded).
    pub terms: usize,
}

type TKey = (Option<usize>, u64);

fn t_star_cache() -> &'static Mutex<HashMap<TKey, ScaleChoice>> {
    static C: std::sync::OnceLock<Mutex<HashMap<TKey, ScaleChoice>>> = std::sync::OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Smallest `D` with `R_i(δ/D) ≤ 1 - margin` for all `δ ≤ delta_max` and all
/// `i ≤ i_max` (`None` means every `i`, using partial sum plus tail estimate).
///
/// The constraint depends on `delta_max/D` only, so `D` is homogeneous of
/// degree one in `delta_max`.
pub fn select_d(delta_max: f64, i_max: Option<usize>, margin: f64) -> Result<ScaleChoice> {
    if !(delta_max > 0.0 && delta_max.is_finite()) {
        return param("delta_max must be positive");
    }
    if !(0.0..1.0).contains(&margin) {
        return param(format!("margin must lie in [0, 1), got {margin}"));
    }
    let key = (i_max, margin.to_bits());
    let cached = t_star_cache().lock().expect("cache").get(&key).copied();
    let base = match cached {
        Some(c) => c,
        None => {
            let c = solve_t_star(i_max, margin)?;
            t_star_cache().lock().expect("cache").insert(key, c);
            c
        }
    };
    Ok(ScaleChoice { d: delta_max / base.t_star, ..base })
}

fn solve_t_star(i_max: Option<usize>, margin: f64) -> Result<ScaleChoice> {
    let target = 1.0 - margin;
    let eval = |t: f64| -> (f64, f64, bool, usize) {
        match i_max {
            Some(m) => (r_sum(m, t).expect("t in (0,1]"), 0.0, true, m),
            None => {
                if t >= 1.0 {
                    return (f64::INFINITY, f64::INFINITY, false, 0);
                }
                let c = series_core(t, SERIES_TOL, SERIES_TERM_CAP, |_| {});
                (c.sum + c.remainder, c.remainder, c.certified, c.terms)
            }
        }
    };
    let (v1, r1, c1, n1) = eval(1.0);
    if v1 <= target {
        return Ok(ScaleChoice { d: 1.0, t_star: 1.0, value: v1, remainder_bound: r1, tail_certified: c1, terms: n1 });
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid).0 <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Err(crate::Error::NoConvergence("no admissible scale ratio found".into()));
    }
    let (v, r, c, n) = eval(lo);
    Ok(ScaleChoice { d: 1.0 / lo, t_star: lo, value: v, remainder_bound: r, tail_certified: c, terms: n })
}
