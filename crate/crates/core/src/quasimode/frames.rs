//! Ground-state frames in the normalized coordinate `w = v/2`, where
//! `v = X_1^{-1}(u0/u1) = 1 - log(u0/u1)`.
//!
//! In these coordinates `L = L̃ + V` with `L̃f = f'·L̃w - f''·G`, where
//! `G = |∇w|²_{A/W}` (1 for exact pairs) and the measure is `χ(w) dw`.

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::scenarios::{
    hardy_constant, sphere_area, Component, Domain, FrameSpec, OperatorSpec, Profile, ProfilePair, Scenario,
    WeightSpec,
};
use crate::xlog;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FramePoint {
    /// Density of `u_{1/2}² W dν` per unit `w`.
    pub chi: f64,
    /// `L̃w`.
    pub lw: f64,
    /// `|∇w|²_{A/W}`.
    pub g: f64,
    /// `(V_0 + V_1)/(2W)` shifted by `W(u0,u1)/W - 1` when the weights differ.
    pub v: f64,
}

pub trait Frame: Sync + Send {
    fn name(&self) -> String;
    /// Smallest admissible `w`; the frame extends to `+∞`.
    fn w_min(&self) -> f64;
    fn point(&self, w: f64) -> FramePoint;
    /// Physical coordinate of the level set `{w}` when representable.
    fn physical(&self, w: f64) -> Option<f64>;
}

/// Level-`i` boundary frame: `W = J_i`, `P = -Δ - W_{i-1}`,
/// `u0 = U_{0,i-1}`, `u1 = U_{1,i-1}` (`δ/D` and 1 at level 0).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrame {
    pub domain: Domain,
    pub level: usize,
    pub d: f64,
    pub component: Component,
    w_min: f64,
}

impl BoundaryFrame {
    pub fn new(domain: Domain, level: usize, d: f64, component: Component) -> Result<Self> {
        domain.validate()?;
        let sup = domain.sup_delta()?;
        if d < sup {
            return param(format!("D = {d} below sup δ = {sup}"));
        }
        match (&domain, component) {
            (Domain::Interval { .. }, Component::All)
            | (Domain::Ball { .. }, Component::All | Component::Outer)
            | (Domain::Annulus { .. }, Component::Inner | Component::Outer) => {}
            _ => return param(format!("component {component:?} does not fit {domain:?}")),
        }
        let w_min = 0.5 * xlog::x_inv(level + 1, sup / d)?;
        Ok(Self { domain, level, d, component, w_min })
    }

    /// `ln y_1, ..., ln y_{i+1}` with `y_{i+1} = 2w` and `y_k = e^{y_{k+1} - 1}`.
    fn log_ys(&self, w: f64) -> Vec<f64> {
        let i = self.level;
        let mut ly = vec![0.0; i + 1];
        ly[i] = (2.0 * w).ln();
        for k in (0..i).rev() {
            ly[k] = ly[k + 1].exp() - 1.0;
        }
        ly
    }

    /// `(ln δ, Σ_{k≤i} ln y_k, R_i)`.
    fn levels(&self, w: f64) -> (f64, f64, f64) {
        let ly = self.log_ys(w);
        let i = self.level;
        let y1 = ly[0].exp();
        let ln_delta = self.d.ln() + 1.0 - y1;
        let mut acc = 0.0;
        let mut r = 0.0;
        for l in &ly[..i] {
            acc += l;
            r += (-acc).exp();
        }
        (ln_delta, acc, r)
    }

    /// `(-Δδ, area of {δ = const} collected by this frame)`.
    fn geometry(&self, delta: f64) -> (f64, f64) {
        match (self.domain, self.component) {
            (Domain::Interval { .. }, _) => (0.0, 2.0),
            (Domain::Ball { n, radius }, _) => {
                let r = radius - delta;
                ((n as f64 - 1.0) / r, sphere_area(n) * r.powi(n as i32 - 1))
            }
            (Domain::Annulus { n, inner, .. }, Component::Inner) => {
                let r = inner + delta;
                (-(n as f64 - 1.0) / r, sphere_area(n) * r.powi(n as i32 - 1))
            }
            (Domain::Annulus { n, outer, .. }, _) => {
                let r = outer - delta;
                ((n as f64 - 1.0) / r, sphere_area(n) * r.powi(n as i32 - 1))
            }
            (Domain::Exterior { .. }, _) => unreachable!("rejected in new"),
        }
    }

    pub fn delta(&self, w: f64) -> f64 {
        self.levels(w).0.exp()
    }
}

impl Frame for BoundaryFrame {
    fn name(&self) -> String {
        format!("boundary-l{}-{:?}", self.level, self.component).to_lowercase()
    }

    fn w_min(&self) -> f64 {
        self.w_min
    }

    fn point(&self, w: f64) -> FramePoint {
        let (ln_delta, sum_ly, r) = self.levels(w);
        let delta = ln_delta.exp();
        let (lap, area) = self.geometry(delta);
        let chi = area / (2.0 * self.d);
        if lap == 0.0 || ln_delta == f64::NEG_INFINITY {
            return FramePoint { chi, lw: 0.0, g: 1.0, v: 0.0 };
        }
        // δ/P_i and δ/P_i² in log space; both vanish as δ → 0.
        let d_over_p = (ln_delta + sum_ly).exp();
        let d_over_p2 = (ln_delta + 2.0 * sum_ly).exp();
        FramePoint { chi, lw: -2.0 * lap * d_over_p, g: 1.0, v: 2.0 * lap * d_over_p2 * (1.0 - r) }
    }

    fn physical(&self, w: f64) -> Option<f64> {
        let delta = self.delta(w);
        if !(delta > 0.0) {
            return None;
        }
        let s = match (self.domain, self.component) {
            (Domain::Interval { .. }, _) => delta,
            (Domain::Ball { radius, .. }, _) => radius - delta,
            (Domain::Annulus { inner, .. }, Component::Inner) => inner + delta,
            (Domain::Annulus { outer, .. }, _) => outer - delta,
            (Domain::Exterior { .. }, _) => return None,
        };
        // The coordinate must carry δ to 1e-8 relative, or the level set is lost.
        let back = self.domain.delta(s).ok()?.v;
        ((back - delta).abs() <= 1e-8 * delta).then_some(s)
    }
}

/// Model end with `|∇r|² = 1 - c/r`, `W = C_H/r²`, `u0 = r^{2-n}`, `u1 = 1`,
/// so `w = ½ + ((n-2)/2) log r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEndFrame {
    pub n: u32,
    pub c: f64,
    pub r_min: f64,
}

impl ModelEndFrame {
    pub fn new(n: u32, c: f64, r_min: f64) -> Result<Self> {
        if n < 3 || c < 0.0 || r_min <= c {
            return param("model end frame needs n >= 3 and r_min > c >= 0");
        }
        Ok(Self { n, c, r_min })
    }

    pub fn radius(&self, w: f64) -> f64 {
        ((2.0 * w - 1.0) / (self.n as f64 - 2.0)).exp()
    }
}

impl Frame for ModelEndFrame {
    fn name(&self) -> String {
        format!("model-end-n{}-c{}", self.n, self.c)
    }

    fn w_min(&self) -> f64 {
        0.5 + 0.5 * (self.n as f64 - 2.0) * self.r_min.ln()
    }

    fn point(&self, w: f64) -> FramePoint {
        let k = self.n as f64 - 2.0;
        let cr = self.c / self.radius(w);
        let chi = sphere_area(self.n) * k / 2.0 * (1.0 - cr).powi(self.n as i32 - 1);
        FramePoint { chi, lw: -2.0 * self.n as f64 * cr / k, g: 1.0 - cr, v: (self.n as f64 + 2.0) * cr / k }
    }

    fn physical(&self, w: f64) -> Option<f64> {
        let r = self.radius(w);
        r.is_finite().then_some(r)
    }
}

/// A frame together with the physical data it was derived from, so the
/// residual can be recomputed from jets in the original coordinates.
pub struct FrameSetup {
    pub frame: Box<dyn Frame>,
    pub domain: Domain,
    pub pair: ProfilePair,
    pub op: OperatorSpec,
    pub weight: WeightSpec,
    /// Scenario spectral parameter per unit frame spectral parameter.
    pub scale: f64,
}

pub fn frame_setup(domain: &Domain, spec: &FrameSpec, scale: f64) -> Result<FrameSetup> {
    match *spec {
        FrameSpec::Boundary { level, d, component } => {
            let frame = BoundaryFrame::new(*domain, level, d, component)?;
            let (pair, op, weight) = if level == 0 {
                (
                    ProfilePair::new(Profile::Delta { d }, Profile::One),
                    OperatorSpec::laplacian(),
                    WeightSpec::InverseSquareDelta,
                )
            } else {
                (
                    ProfilePair::new(Profile::BftU0 { i: level - 1, d }, Profile::BftU1 { i: level - 1, d }),
                    OperatorSpec::shifted(WeightSpec::IteratedLogW { i: level - 1, d }),
                    WeightSpec::IteratedLogJ { i: level, d },
                )
            };
            Ok(FrameSetup { frame: Box::new(frame), domain: *domain, pair, op, weight, scale })
        }
        FrameSpec::ModelEnd => {
            let Domain::Exterior { n, r_min, c, .. } = *domain else {
                return param("model end frames need an exterior domain");
            };
            let frame = ModelEndFrame::new(n, c, r_min)?;
            let dom = Domain::Exterior { n, r_min, r_max: 1e300, c };
            let pair = ProfilePair::new(Profile::Power { p: 2.0 - n as f64 }, Profile::One);
            debug_assert!(hardy_constant(n) > 0.0);
            Ok(FrameSetup {
                frame: Box::new(frame),
                domain: dom,
                pair,
                op: OperatorSpec::laplacian(),
                weight: WeightSpec::ClassicalHardy,
                scale,
            })
        }
    }
}

/// Frames of a catalog scenario.
pub fn scenario_frames(sc: &Scenario) -> Result<Vec<FrameSetup>> {
    if sc.frames.is_empty() {
        return Err(Error::NotApplicable(format!("{} has no ground-state frame", sc.name)));
    }
    sc.frames.iter().map(|f| frame_setup(&sc.domain, f, sc.frame_scale)).collect()
}
