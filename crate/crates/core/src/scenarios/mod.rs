//! Domains, operators, weight families and closed-form profiles.
//!
//! Every geometry here is radially reducible: functions depend on one
//! coordinate `s` (the position on an interval, or the radius), and the base
//! measure pushes forward to a density `m(s) ds`.

mod catalog;
pub mod identities;
pub mod model_end;
pub mod multipolar;

use serde::{Deserialize, Serialize};

pub use catalog::{catalog_names, scenario, Component, FrameSpec, Scenario};

use crate::error::{domain, param, Error, Result};
use crate::jet::Jet;
use crate::xlog;

/// Area of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

fn no_delta<T>() -> Result<T> {
    Err(Error::NotApplicable("distance to the boundary is not used on exterior domains".into()))
}

/// `((n-2)/2)²`.
pub fn hardy_constant(n: u32) -> f64 {
    let h = (n as f64 - 2.0) / 2.0;
    h * h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    /// `(0, len)` with Lebesgue measure.
    Interval { len: f64 },
    /// Radial ball of radius `radius` in `ℝⁿ`.
    Ball { n: u32, radius: f64 },
    /// Radial annulus `inner < r < outer`.
    Annulus { n: u32, inner: f64, outer: f64 },
    /// `r_min < r < r_max` in a model end with `|∇r|² = 1 - c/r` and volume
    /// density `ω (r - c)^{n-1}`; `c = 0` is truncated `ℝⁿ`.
    Exterior { n: u32, r_min: f64, r_max: f64, c: f64 },
}

impl Domain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Interval { len } => len > 0.0,
            Domain::Ball { n, radius } => n >= 1 && radius > 0.0,
            Domain::Annulus { n, inner, outer } => n >= 1 && inner > 0.0 && outer > inner,
            Domain::Exterior { n, r_min, r_max, c } => {
                n >= 3 && c >= 0.0 && r_min > c && r_max > r_min
            }
        };
        if ok {
            Ok(())
        } else {
            param(format!("invalid domain {self:?}"))
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Domain::Interval { len } => (0.0, len),
            Domain::Ball { radius, .. } => (0.0, radius),
            Domain::Annulus { inner, outer, .. } => (inner, outer),
            Domain::Exterior { r_min, r_max, .. } => (r_min, r_max),
        }
    }

    pub fn dim(&self) -> u32 {
        match *self {
            Domain::Interval { .. } => 1,
            Domain::Ball { n, .. } | Domain::Annulus { n, .. } | Domain::Exterior { n, .. } => n,
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, Domain::Interval { .. })
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Interval { len } => len,
            Domain::Ball { radius, .. } => 2.0 * radius,
            Domain::Annulus { outer, .. } => 2.0 * outer,
            Domain::Exterior { r_max, .. } => 2.0 * r_max,
        }
    }

    /// Interior check on the open coordinate range.
    pub fn check_interior(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.bounds();
        let lo_ok = if matches!(self, Domain::Ball { .. }) { s >= 0.0 } else { s > lo };
        if lo_ok && s < hi && s.is_finite() {
            Ok(())
        } else {
            domain(format!("point {s} outside ({lo}, {hi})"))
        }
    }

    /// Density of the base measure with respect to `ds`, sphere area included.
    pub fn measure(&self, s: f64) -> Jet {
        match *self {
            Domain::Interval { .. } => Jet::constant(1.0),
            Domain::Ball { n, .. } | Domain::Annulus { n, .. } => {
                Jet::var(s).powf(n as f64 - 1.0) * sphere_area(n)
            }
            Domain::Exterior { n, c, .. } => (Jet::var(s) - c).powf(n as f64 - 1.0) * sphere_area(n),
        }
    }

    /// `d/ds log m(s)`; exact zero where the measure is flat.
    pub fn measure_log_deriv(&self, s: f64) -> f64 {
        match *self {
            Domain::Interval { .. } => 0.0,
            Domain::Ball { n, .. } | Domain::Annulus { n, .. } => (n as f64 - 1.0) / s,
            Domain::Exterior { n, c, .. } => (n as f64 - 1.0) / (s - c),
        }
    }

    /// `γ(s) = |∇r|²`.
    pub fn gamma(&self, s: f64) -> Jet {
        match *self {
            Domain::Exterior { c, .. } if c != 0.0 => 1.0 - Jet::var(s).recip() * c,
            _ => Jet::constant(1.0),
        }
    }

    /// Largest value of the distance to the boundary.
    pub fn sup_delta(&self) -> Result<f64> {
        match *self {
            Domain::Interval { len } => Ok(len / 2.0),
            Domain::Ball { radius, .. } => Ok(radius),
            Domain::Annulus { inner, outer, .. } => Ok((outer - inner) / 2.0),
            Domain::Exterior { .. } => no_delta(),
        }
    }

    /// Distance to the boundary as a jet in `s`.
    pub fn delta(&self, s: f64) -> Result<Jet> {
        self.check_interior(s)?;
        match *self {
            Domain::Interval { len } => Ok(if s <= len / 2.0 {
                Jet::var(s)
            } else {
                Jet::new(len - s, -1.0, 0.0)
            }),
            Domain::Ball { radius, .. } => Ok(Jet::new(radius - s, -1.0, 0.0)),
            Domain::Annulus { inner, outer, .. } => Ok(if s <= 0.5 * (inner + outer) {
                Jet::new(s - inner, 1.0, 0.0)
            } else {
                Jet::new(outer - s, -1.0, 0.0)
            }),
            Domain::Exterior { .. } => no_delta(),
        }
    }

    /// Closed-form `-Δδ` from the geometry (mean curvature of the level sets).
    pub fn neg_laplacian_delta(&self, s: f64) -> Result<f64> {
        self.check_interior(s)?;
        match *self {
            Domain::Interval { .. } => Ok(0.0),
            Domain::Ball { n, .. } => Ok((n as f64 - 1.0) / s),
            Domain::Annulus { n, inner, outer } => {
                let k = (n as f64 - 1.0) / s;
                Ok(if s <= 0.5 * (inner + outer) { -k } else { k })
            }
            Domain::Exterior { .. } => no_delta(),
        }
    }

    /// Points where `δ` fails to be `C²`.
    pub fn ridge_points(&self) -> Vec<f64> {
        match *self {
            Domain::Interval { len } => vec![len / 2.0],
            Domain::Ball { .. } => vec![0.0],
            Domain::Annulus { inner, outer, .. } => vec![0.5 * (inner + outer)],
            Domain::Exterior { .. } => vec![],
        }
    }

    pub fn near_ridge(&self, s: f64, exclusion: f64) -> bool {
        self.ridge_points().iter().any(|&p| (s - p).abs() < exclusion)
    }

    /// `Δf = γ f'' + (γ' + γ m'/m) f'` for a radial `f`.
    pub fn laplacian(&self, s: f64, f: Jet) -> f64 {
        let g = self.gamma(s);
        g.v * f.dd + (g.d + g.v * self.measure_log_deriv(s)) * f.d
    }
}

/// `Pu = -(1/m)(m a u')' + (c - W_shift) u` with `a = scale·γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default = "one")]
    pub coeff_scale: f64,
    #[serde(default)]
    pub potential: f64,
    /// Subtracted weight, representing `P = -Δ - W_{i-1}`.
    #[serde(default)]
    pub shift: Option<WeightSpec>,
}

fn one() -> f64 {
    1.0
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self::laplacian()
    }
}

impl OperatorSpec {
    pub fn laplacian() -> Self {
        Self { coeff_scale: 1.0, potential: 0.0, shift: None }
    }

    pub fn shifted(shift: WeightSpec) -> Self {
        Self { shift: Some(shift), ..Self::laplacian() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coeff_scale > 0.0 && self.coeff_scale.is_finite()) {
            return param("coefficient scale must be positive");
        }
        Ok(())
    }

    pub fn coefficient(&self, dom: &Domain, s: f64) -> Jet {
        dom.gamma(s) * self.coeff_scale
    }

    /// Zeroth-order coefficient `c(s) - W_shift(s)`.
    pub fn zeroth(&self, dom: &Domain, s: f64) -> Result<f64> {
        let shift = match &self.shift {
            Some(w) => build_weight(dom, w)?.value(s)?,
            None => 0.0,
        };
        Ok(self.potential - shift)
    }

    /// `P f` at `s`.
    pub fn apply(&self, dom: &Domain, s: f64, f: Jet) -> Result<f64> {
        let a = self.coefficient(dom, s);
        let div = a.v * f.dd + (a.d + a.v * dom.measure_log_deriv(s)) * f.d;
        Ok(-div + self.zeroth(dom, s)? * f.v)
    }
}

/// Positive closed-form radial profiles with two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    One,
    /// `δ/D`.
    Delta { d: f64 },
    /// `e^{k s}`.
    Exp { k: f64 },
    /// `s^p`.
    Power { p: f64 },
    /// `U_{0,i} = (δ/D · X_0^{-1}⋯X_i^{-1}(δ/D))^{1/2}`.
    BftU0 { i: usize, d: f64 },
    /// `U_{1,i} = U_{0,i} X_{i+1}^{-1}(δ/D)`.
    BftU1 { i: usize, d: f64 },
    /// `Z_i = (r^{2-n} X_0^{-1}⋯X_i^{-1}(t))^{1/2}`, `t = (r/D)^{n-2}`.
    OriginZ0 { i: usize, d: f64 },
    /// `Z_i X_{i+1}^{-1}(t)`.
    OriginZ1 { i: usize, d: f64 },
}

/// `(r/D)^{n-2}`, the ratio of the two harmonic profiles `1` and `(D/r)^{n-2}`.
pub(crate) fn origin_ratio(dom: &Domain, s: f64, d: f64) -> Result<Jet> {
    let n = dom.dim();
    if n < 3 {
        return param("origin variant needs n >= 3");
    }
    Ok((Jet::var(s) / d).powf(n as f64 - 2.0))
}

fn delta_ratio(dom: &Domain, s: f64, d: f64) -> Result<Jet> {
    let delta = dom.delta(s)?;
    if d < dom.sup_delta()? {
        return param(format!("D = {d} is below sup δ = {}", dom.sup_delta()?));
    }
    Ok(delta / d)
}

impl Profile {
    pub fn jet(&self, dom: &Domain, s: f64) -> Result<Jet> {
        dom.check_interior(s)?;
        match *self {
            Profile::One => Ok(Jet::constant(1.0)),
            Profile::Delta { d } => Ok(dom.delta(s)? / d),
            Profile::Exp { k } => Ok((Jet::var(s) * k).exp()),
            Profile::Power { p } => Ok(Jet::var(s).powf(p)),
            Profile::BftU0 { i, d } | Profile::BftU1 { i, d } => {
                let t = delta_ratio(dom, s, d)?;
                let ys = xlog::y_jets(i + 1, t)?;
                let mut prod = t;
                for y in &ys[..i] {
                    prod = prod * *y;
                }
                let u0 = prod.sqrt();
                Ok(if matches!(self, Profile::BftU0 { .. }) { u0 } else { u0 * ys[i] })
            }
            Profile::OriginZ0 { i, d } | Profile::OriginZ1 { i, d } => {
                let t = origin_ratio(dom, s, d)?;
                let ys = xlog::y_jets(i + 1, t)?;
                let mut prod = Jet::var(s).powf(2.0 - dom.dim() as f64);
                for y in &ys[..i] {
                    prod = prod * *y;
                }
                let z = prod.sqrt();
                Ok(if matches!(self, Profile::OriginZ0 { .. }) { z } else { z * ys[i] })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilePair {
    pub u0: Profile,
    pub u1: Profile,
}

impl ProfilePair {
    pub fn new(u0: Profile, u1: Profile) -> Self {
        Self { u0, u1 }
    }

    pub fn jets(&self, dom: &Domain, s: f64) -> Result<(Jet, Jet)> {
        let a = self.u0.jet(dom, s)?;
        let b = self.u1.jet(dom, s)?;
        if !(a.v > 0.0 && b.v > 0.0) {
            return Err(Error::Evaluation(format!("profile not positive at {s}")));
        }
        Ok((a, b))
    }
}

/// Weight families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `W ≡ 1`.
    Unit,
    /// `1/(4δ²)`.
    InverseSquareDelta,
    /// `J_i = (1/(4δ²)) X_0²⋯X_i²(δ/D)`.
    IteratedLogJ { i: usize, d: f64 },
    /// `W_i = J_0 + ⋯ + J_i`.
    IteratedLogW { i: usize, d: f64 },
    /// `((n-2)/2)²/r²`.
    ClassicalHardy,
    /// `1/r²`; the spectrum of `r²(-Δ)` is measured in these units.
    InverseSquareRadius,
    /// `H_i = ¼ Σ_{k=1}^{i+1} |∇X_k^{-1}((r/D)^{n-2})|²`.
    RadialOriginH { i: usize, d: f64 },
    /// Pairwise multipolar weight; pointwise evaluation only.
    Multipolar { poles: Vec<Vec<f64>> },
    /// `¼ a |(log(u0/u1))'|²`.
    Supersolution { u0: Profile, u1: Profile },
    /// `δ^{-α}`.
    PowerDelta { alpha: f64 },
}

impl WeightSpec {
    pub fn name(&self) -> &'static str {
        match self {
            WeightSpec::Unit => "unit",
            WeightSpec::InverseSquareDelta => "inverse-square-delta",
            WeightSpec::IteratedLogJ { .. } => "iterated-log-j",
            WeightSpec::IteratedLogW { .. } => "iterated-log-w",
            WeightSpec::ClassicalHardy => "classical-hardy",
            WeightSpec::InverseSquareRadius => "inverse-square-radius",
            WeightSpec::RadialOriginH { .. } => "radial-origin-h",
            WeightSpec::Multipolar { .. } => "multipolar",
            WeightSpec::Supersolution { .. } => "supersolution",
            WeightSpec::PowerDelta { .. } => "power-delta",
        }
    }

    /// Singular (or degenerate) at the boundary components carrying `δ`.
    pub fn singular_at_boundary(&self) -> bool {
        match self {
            WeightSpec::InverseSquareDelta
            | WeightSpec::IteratedLogJ { .. }
            | WeightSpec::IteratedLogW { .. }
            | WeightSpec::Supersolution { .. } => true,
            WeightSpec::PowerDelta { alpha } => *alpha != 0.0,
            _ => false,
        }
    }

    /// Singular at `r = 0`.
    pub fn singular_at_origin(&self) -> bool {
        matches!(
            self,
            WeightSpec::ClassicalHardy | WeightSpec::InverseSquareRadius | WeightSpec::RadialOriginH { .. }
        )
    }
}

/// Closed-form evaluator returned by [`build_weight`].
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    pub domain: Domain,
    pub spec: WeightSpec,
}

/// Validate `spec` against `dom` and return its evaluator.
pub fn build_weight(dom: &Domain, spec: &WeightSpec) -> Result<Weight> {
    dom.validate()?;
    match spec {
        WeightSpec::IteratedLogJ { d, .. } | WeightSpec::IteratedLogW { d, .. } => {
            let sup = dom.sup_delta()?;
            if !(*d >= sup) {
                return param(format!("D = {d} must be at least sup δ = {sup}"));
            }
        }
        WeightSpec::InverseSquareDelta | WeightSpec::PowerDelta { .. } => {
            dom.sup_delta()?;
        }
        WeightSpec::ClassicalHardy | WeightSpec::InverseSquareRadius => {
            if !dom.is_radial() {
                return param("radial weights need a radial domain");
            }
        }
        WeightSpec::RadialOriginH { d, .. } => {
            if dom.dim() < 3 || !dom.is_radial() {
                return param("origin weights need a radial domain with n >= 3");
            }
            if *d < dom.bounds().1 {
                return param("origin weights need D >= sup r");
            }
        }
        WeightSpec::Multipolar { .. } => {
            return Err(Error::NotApplicable(
                "multipolar weights are evaluated pointwise by the multipolar module".into(),
            ))
        }
        WeightSpec::Unit | WeightSpec::Supersolution { .. } => {}
    }
    Ok(Weight { domain: *dom, spec: spec.clone() })
}

impl Weight {
    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.eval(s)?.0)
    }

    /// `(W(s), W'(s))`.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        let dom = &self.domain;
        dom.check_interior(s)?;
        let j = match &self.spec {
            WeightSpec::Unit => Jet::constant(1.0),
            WeightSpec::InverseSquareDelta => {
                let d = dom.delta(s)?;
                (d * d * 4.0).recip()
            }
            WeightSpec::PowerDelta { alpha } => dom.delta(s)?.powf(-alpha),
            WeightSpec::IteratedLogJ { i, d } => j_weights(dom, s, *i, *d)?.pop().expect("nonempty"),
            WeightSpec::IteratedLogW { i, d } => {
                j_weights(dom, s, *i, *d)?.into_iter().fold(Jet::constant(0.0), |a, b| a + b)
            }
            WeightSpec::ClassicalHardy => Jet::var(s).powf(-2.0) * hardy_constant(dom.dim()),
            WeightSpec::InverseSquareRadius => Jet::var(s).powf(-2.0),
            WeightSpec::RadialOriginH { i, d } => {
                let t = origin_ratio(dom, s, *d)?;
                let ys = xlog::y_jets(i + 1, t)?;
                let g = dom.gamma(s).v;
                let v: f64 = ys.iter().map(|y| y.d * y.d).sum::<f64>() * 0.25 * g;
                let dv: f64 = ys.iter().map(|y| y.d * y.dd).sum::<f64>() * 0.5 * g;
                return Ok((v, dv));
            }
            WeightSpec::Supersolution { u0, u1 } => {
                let pair = ProfilePair::new(*u0, *u1);
                return supersolution_weight(&pair, &OperatorSpec::laplacian(), dom, s);
            }
            WeightSpec::Multipolar { .. } => unreachable!("rejected by build_weight"),
        };
        if !j.v.is_finite() {
            return Err(Error::Evaluation(format!("weight not finite at {s}")));
        }
        Ok((j.v, j.d))
    }
}

/// `[J_0, ..., J_i]` at `s`.
fn j_weights(dom: &Domain, s: f64, i: usize, d: f64) -> Result<Vec<Jet>> {
    let delta = dom.delta(s)?;
    let t = delta / d;
    let xs = xlog::x_jets(i, t)?;
    let mut cur = (delta * delta * 4.0).recip();
    let mut out = vec![cur];
    for x in xs {
        cur = cur * x * x;
        out.push(cur);
    }
    Ok(out)
}

/// `W(u0,u1) = ¼ a |(log(u0/u1))'|²` and its derivative.
pub fn supersolution_weight(pair: &ProfilePair, op: &OperatorSpec, dom: &Domain, s: f64) -> Result<(f64, f64)> {
    let (u0, u1) = pair.jets(dom, s)?;
    let l = u0.ln() - u1.ln();
    let a = op.coefficient(dom, s);
    let v = 0.25 * a.v * l.d * l.d;
    let dv = 0.25 * a.d * l.d * l.d + 0.5 * a.v * l.d * l.dd;
    Ok((v, dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    const INTERVAL: Domain = Domain::Interval { len: 1.0 };
    const BALL3: Domain = Domain::Ball { n: 3, radius: 1.0 };

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn weight_examples() {
        let w = build_weight(&INTERVAL, &WeightSpec::InverseSquareDelta).unwrap();
        assert!((w.value(0.1).unwrap() - 25.0).abs() < 1e-12);
        let h = build_weight(&BALL3, &WeightSpec::ClassicalHardy).unwrap();
        assert!(h.value(2.0).is_err());
        assert!((h.value(0.5).unwrap() - 1.0).abs() < 1e-15);
        let j1 = build_weight(&INTERVAL, &WeightSpec::IteratedLogJ { i: 1, d: 1.0 }).unwrap();
        // e²/16 by the closed form.
        let x = (-1f64).exp();
        assert!((j1.value(x).unwrap() - E * E / 16.0).abs() < 1e-14);
        assert!((E * E / 16.0 - 0.461_816_006_183_165_6).abs() < 1e-15);
    }

    #[test]
    fn iterated_log_rejects_small_d() {
        assert!(build_weight(&INTERVAL, &WeightSpec::IteratedLogJ { i: 1, d: 0.4 }).is_err());
        assert!(build_weight(&BALL3, &WeightSpec::IteratedLogW { i: 2, d: 0.9 }).is_err());
        assert!(build_weight(&BALL3, &WeightSpec::Multipolar { poles: vec![] }).is_err());
    }

    #[test]
    fn w_differences_are_j() {
        for dom in [INTERVAL, BALL3, Domain::Annulus { n: 3, inner: 1.0, outer: 2.0 }] {
            let d = 2.0 * dom.sup_delta().unwrap();
            for i in 1..=4 {
                let wi = build_weight(&dom, &WeightSpec::IteratedLogW { i, d }).unwrap();
                let wm = build_weight(&dom, &WeightSpec::IteratedLogW { i: i - 1, d }).unwrap();
                let ji = build_weight(&dom, &WeightSpec::IteratedLogJ { i, d }).unwrap();
                let (lo, hi) = dom.bounds();
                for k in 1..40 {
                    let s = lo + (hi - lo) * k as f64 / 40.0;
                    let diff = wi.value(s).unwrap() - wm.value(s).unwrap();
                    let j = ji.value(s).unwrap();
                    assert!((diff - j).abs() <= 1e-12 * wi.value(s).unwrap(), "{dom:?} i={i} s={s}");
                }
            }
        }
    }

    #[test]
    fn supersolution_examples() {
        let op = OperatorSpec::laplacian();
        let p = ProfilePair::new(Profile::Delta { d: 1.0 }, Profile::One);
        let (w, _) = supersolution_weight(&p, &op, &INTERVAL, 0.2).unwrap();
        assert!((w - 1.0 / (4.0 * 0.04)).abs() < 1e-12);
        let same = ProfilePair::new(Profile::Exp { k: 0.3 }, Profile::Exp { k: 0.3 });
        assert_eq!(supersolution_weight(&same, &op, &INTERVAL, 0.2).unwrap().0, 0.0);
        let ext = Domain::Exterior { n: 3, r_min: 1.0, r_max: 10.0, c: 0.0 };
        let r = ProfilePair::new(Profile::Power { p: -1.0 }, Profile::One);
        let (w, _) = supersolution_weight(&r, &op, &ext, 2.0).unwrap();
        assert!((w - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn delta_has_unit_slope_off_ridge() {
        for dom in [INTERVAL, BALL3, Domain::Annulus { n: 3, inner: 1.0, outer: 2.0 }] {
            let (lo, hi) = dom.bounds();
            for k in 1..100 {
                let s = lo + (hi - lo) * k as f64 / 100.0;
                if dom.near_ridge(s, 1e-3 * dom.diameter()) {
                    continue;
                }
                assert_eq!(dom.delta(s).unwrap().d.abs(), 1.0);
            }
        }
    }

    #[test]
    fn neg_laplacian_delta_matches_operator() {
        let dom = Domain::Annulus { n: 3, inner: 1.0, outer: 2.0 };
        for s in [1.1, 1.3, 1.7, 1.95] {
            let d = dom.delta(s).unwrap();
            assert!((-dom.laplacian(s, d) - dom.neg_laplacian_delta(s).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn weight_spec_round_trips_json() {
        let w = WeightSpec::IteratedLogJ { i: 2, d: 3.5 };
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"family":"iterated-log-j","i":2,"d":3.5}"#);
        assert_eq!(serde_json::from_str::<WeightSpec>(&s).unwrap(), w);
        assert!(serde_json::from_str::<WeightSpec>(r#"{"family":"power-delta","alpha":2.0,"x":1}"#).is_err());
    }
}
