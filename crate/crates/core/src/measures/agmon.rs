//! Agmon distance `ρ(x, y) = |h(x) - h(y)|` with `h = ½X_1^{-1}(u0/u1)`,
//! and the exponential rates `σ_0`, `σ_1` of `μ_i = u_i² W ν` on Agmon balls.

use serde::Serialize;

use crate::discretize::{assemble_sl, finish, AssemblyOptions, Mesh, PencilMeta};
use crate::eigen;
use crate::error::{param, Error, Result};
use crate::jet::Jet;
use crate::quad;
use crate::quasimode::{Frame, FrameSetup};
use crate::scenarios::{build_weight, Domain, OperatorSpec, ProfilePair, Scenario, WeightSpec};

use super::windowed_rate;

/// Physical data of an Agmon metric `|ξ|² = W⟨A^{-1}ξ, ξ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgmonFrame {
    pub domain: Domain,
    pub pair: ProfilePair,
    pub op: OperatorSpec,
    pub weight: WeightSpec,
}

impl AgmonFrame {
    /// Rejects incomplete frames, where `h` stays bounded toward infinity.
    pub fn new(domain: Domain, pair: ProfilePair, op: OperatorSpec, weight: WeightSpec) -> Result<Self> {
        let f = Self { domain, pair, op, weight };
        build_weight(&f.domain, &f.weight)?;
        if !f.complete()? {
            return Err(Error::Infeasible("Agmon frame is incomplete: h stays bounded toward infinity".into()));
        }
        Ok(f)
    }

    pub fn from_setup(setup: &FrameSetup) -> Result<Self> {
        Self::new(setup.domain, setup.pair, setup.op.clone(), setup.weight.clone())
    }

    /// The first frame of a scenario measured against the scenario's own weight.
    pub fn for_scenario(sc: &Scenario) -> Result<Self> {
        let setup = crate::quasimode::scenario_frames(sc)?.remove(0);
        let dom = if matches!(sc.domain, Domain::Exterior { .. }) { setup.domain } else { sc.domain };
        Self::new(dom, setup.pair, sc.op.clone(), sc.weight.clone())
    }

    /// `h = ½(1 - log(u0/u1))`.
    pub fn h(&self, s: f64) -> Result<Jet> {
        let (u0, u1) = self.pair.jets(&self.domain, s)?;
        Ok((1.0 - u0.ln() + u1.ln()) * 0.5)
    }

    /// `|∇h|²_{A/W} = a h'²/W`.
    pub fn eikonal(&self, s: f64) -> Result<f64> {
        let h = self.h(s)?;
        let w = build_weight(&self.domain, &self.weight)?.value(s)?;
        Ok(self.op.coefficient(&self.domain, s).v * h.d * h.d / w)
    }

    /// Points approaching each end where the frame's infinity can lie.
    fn approaches(&self) -> Vec<Vec<f64>> {
        let ks = 1..=14;
        match self.domain {
            Domain::Interval { len } => vec![
                ks.clone().map(|k| len * 10f64.powi(-k)).collect(),
                ks.map(|k| len * (1.0 - 10f64.powi(-k))).collect(),
            ],
            Domain::Ball { radius, .. } => vec![ks.map(|k| radius * (1.0 - 10f64.powi(-k))).collect()],
            Domain::Annulus { inner, outer, .. } => {
                let w = outer - inner;
                vec![
                    ks.clone().map(|k| inner + w * 10f64.powi(-k)).collect(),
                    ks.map(|k| outer - w * 10f64.powi(-k)).collect(),
                ]
            }
            Domain::Exterior { r_min, r_max, .. } => {
                vec![(1..=40).map(|k| r_min * 2f64.powi(k)).take_while(|&r| r < r_max).collect()]
            }
        }
    }

    /// `|h| → ∞` toward some end: `h` strictly increases along the approach
    /// and its increments do not collapse (geometric decay of the increments
    /// signals a finite limit).
    pub fn complete(&self) -> Result<bool> {
        for path in self.approaches() {
            let hs: Vec<f64> = path.iter().map(|&s| self.h(s).map(|j| j.v)).collect::<Result<_>>()?;
            let inc: Vec<f64> = hs.windows(2).map(|w| w[1] - w[0]).collect();
            if inc.len() >= 2 && inc.iter().all(|&d| d > 0.0) && inc[inc.len() - 1] > 1e-3 * inc[0] {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Largest sampled `|∇h|²_{A/W}` over `samples` interior points.
    pub fn eikonal_sup(&self, samples: usize) -> Result<f64> {
        let (lo, hi) = self.domain.bounds();
        let pts: Vec<f64> = match self.domain {
            Domain::Exterior { r_max, .. } => {
                let top = r_max.min(1e12);
                (1..samples).map(|k| lo * (top / lo).powf(k as f64 / samples as f64)).collect()
            }
            _ => (1..samples).map(|k| lo + (hi - lo) * k as f64 / samples as f64).collect(),
        };
        pts.into_iter().map(|s| self.eikonal(s)).try_fold(0.0f64, |m, e| Ok(m.max(e?)))
    }
}

pub fn agmon_distance(frame: &AgmonFrame, x: f64, y: f64) -> Result<f64> {
    Ok((frame.h(x)?.v - frame.h(y)?.v).abs())
}

/// Bottom of the frame operator `L̃ + V` with Dirichlet conditions on
/// `[w_k, w_k + len]`, returned as `1 + bottom` in frame units. Removing the
/// compact part `w < w_k` is the exhaustion of Persson's formula; the
/// Dirichlet cut at `w_k + len` biases the value up by about `(π/len)²`.
pub fn frame_bottom(frame: &dyn Frame, w_k: f64, len: f64, n: usize) -> Result<f64> {
    if w_k < frame.w_min() || !(len > 0.0) || n < 4 {
        return param("frame pencil needs w_k ≥ frame edge, len > 0 and n ≥ 4");
    }
    let nodes: Vec<f64> = (0..=n).map(|k| w_k + len * k as f64 / n as f64).collect();
    let mesh = Mesh::from_nodes(nodes, (true, true), vec![])?;
    let parts = assemble_sl(
        &mesh,
        |w| {
            let p = frame.point(w);
            Ok(p.chi * p.g)
        },
        |w| {
            let p = frame.point(w);
            Ok(p.chi * p.v)
        },
        |w| Ok(frame.point(w).chi),
        &[],
        AssemblyOptions::default(),
    )?;
    let meta = PencilMeta { scenario: frame.name(), weight: "frame".into(), frame: true };
    Ok(1.0 + eigen::bottom(&finish(parts, &mesh, meta)?, 1e-10)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaOptions {
    /// Largest Agmon radius sampled.
    pub r_max: f64,
    pub samples: usize,
    /// Exhaustion offset and length of the Persson-side pencil.
    pub exhaustion: f64,
    pub pencil_len: f64,
    pub pencil_n: usize,
    pub tol: f64,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self { r_max: 40.0, samples: 80, exhaustion: 20.0, pencil_len: 400.0, pencil_n: 800, tol: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaReport {
    pub frame: String,
    /// Decay rate of `μ_0(Ω) - V_0(R)` on Agmon balls about the frame edge.
    pub sigma0: f64,
    /// Growth rate of `V_1(R)`.
    pub sigma1: f64,
    pub mu0_mass: f64,
    pub mu0_finite: bool,
    pub mu1_infinite: bool,
    /// `sup u0/u1 = e^{1 - 2h_min}` on the frame.
    pub ratio_sup: f64,
    /// Persson-side estimate of the essential bottom in frame units.
    pub lambda_inf: f64,
    pub exhaustion: f64,
    /// `λ_∞ ≤ σ_i²/4 + tol` for both `i`.
    pub brooks_check: bool,
    /// `σ_i²/4 = 1 ± tol` for both `i`.
    pub equality_check: bool,
}

/// `σ_0`, `σ_1` in the frame coordinate `h = w`, where `μ = χ dw`,
/// `μ_0 = e^{1-2w}μ` and `μ_1 = e^{2w-1}μ`. Agmon balls about a point on the
/// frame edge `h_0` are `{h < h_0 + R}`.
pub fn sigma_rates(setup: &FrameSetup, opts: &SigmaOptions) -> Result<SigmaReport> {
    let frame = setup.frame.as_ref();
    let w0 = frame.w_min();
    if !(opts.r_max > 2.0 && opts.samples >= 8) {
        return param("sigma rates need r_max > 2 and at least 8 samples");
    }
    let chi = |w: f64| frame.point(w).chi;
    let radii: Vec<f64> = (1..=opts.samples).map(|k| opts.r_max * k as f64 / opts.samples as f64).collect();
    // log V_1(R) = 2(w0 + R) - 1 + log ∫_0^R e^{2(τ - R)} χ(w0 + τ) dτ.
    let log_v1: Vec<f64> = radii
        .iter()
        .map(|&r| 2.0 * (w0 + r) - 1.0 + quad::adaptive(|t| (2.0 * (t - r)).exp() * chi(w0 + t), 0.0, r, 1e-12).ln())
        .collect();
    // log tail_0(R) = 1 - 2(w0 + R) + log ∫_0^∞ e^{-2τ} χ(w0 + R + τ) dτ.
    let tail_int = |r: f64| quad::adaptive(|t| (-2.0 * t).exp() * chi(w0 + r + t), 0.0, 40.0, 1e-12);
    let log_tail: Vec<f64> = radii.iter().map(|&r| 1.0 - 2.0 * (w0 + r) + tail_int(r).ln()).collect();
    let mu0_mass = (1.0 - 2.0 * w0).exp() * tail_int(0.0);
    let neg_tail: Vec<f64> = log_tail.iter().map(|x| -x).collect();
    let sigma1 = windowed_rate(&radii, &log_v1).unwrap_or(0.0).max(0.0);
    let sigma0 = windowed_rate(&radii, &neg_tail).unwrap_or(0.0).max(0.0);
    // χ is bounded on the frame tail, so the tail integral has converged when
    // e^{-80} is negligible against its value.
    let mu0_finite = mu0_mass.is_finite() && (-80.0f64).exp() * chi(w0 + 40.0) < 1e-12 * tail_int(0.0);
    let exhaustion = w0 + opts.exhaustion;
    let lambda_inf = frame_bottom(frame, exhaustion, opts.pencil_len, opts.pencil_n)?;
    let q = |s: f64| s * s / 4.0;
    Ok(SigmaReport {
        frame: frame.name(),
        sigma0,
        sigma1,
        mu0_mass,
        mu0_finite,
        mu1_infinite: sigma1 > super::SUBEXPONENTIAL,
        ratio_sup: (1.0 - 2.0 * w0).exp(),
        lambda_inf,
        exhaustion,
        brooks_check: lambda_inf <= q(sigma0) + opts.tol && lambda_inf <= q(sigma1) + opts.tol,
        equality_check: (q(sigma0) - 1.0).abs() <= opts.tol && (q(sigma1) - 1.0).abs() <= opts.tol,
    })
}
