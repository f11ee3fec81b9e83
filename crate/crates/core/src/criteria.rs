//! The acceptance experiments A1–A10, each returning its measured values so
//! that failures are diagnosable from the report alone.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::discretize::{assemble_pencil, scenario_pencil, Mesh};
use crate::eigen::{bottom, count_below};
use crate::error::{param, Result};
use crate::fit;
use crate::measures::{sigma_rates, volume_growth, window_search, PushforwardMeasure, SigmaOptions};
use crate::quasimode::{
    ess_spectrum_probe, quasimode_residual, scenario_frames, transfer_residual, WeightRatio, Window, WindowSchedule,
    DEFAULT_TOL,
};
use crate::scenarios::identities::{sample_radial, verify_bft_identities, verify_origin_identities, RIDGE_EXCLUSION};
use crate::scenarios::model_end::model_end_conditions;
use crate::scenarios::multipolar::{far_field, multipolar_residual, sample_points, standard_poles};
use crate::scenarios::{catalog_names, scenario, Domain, OperatorSpec, WeightSpec};
use crate::xlog;

pub const IDS: [&str; 10] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub pass: bool,
    /// The numeric checks alone.
    pub checks_pass: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub summary: String,
    pub details: Value,
}

fn budget(id: &str) -> f64 {
    match id {
        "A1" | "A6" => 30.0,
        "A2" => 120.0,
        "A4" | "A5" | "A7" => 10.0,
        _ => 60.0,
    }
}

/// Run one criterion; `seed` drives every sampled point set.
pub fn run_criterion(id: &str, seed: u64) -> Result<CriterionResult> {
    let t = Instant::now();
    let (checks_pass, summary, details) = match id {
        "A1" => a1()?,
        "A2" => a2()?,
        "A3" => a3()?,
        "A4" => a4(seed)?,
        "A5" => a5(seed)?,
        "A6" => a6()?,
        "A7" => a7()?,
        "A8" => a8()?,
        "A9" => a9()?,
        "A10" => a10()?,
        _ => return param(format!("unknown criterion {id}; known: {}", IDS.join(", "))),
    };
    let seconds = t.elapsed().as_secs_f64();
    let budget_seconds = budget(id);
    Ok(CriterionResult {
        id: id.to_string(),
        pass: checks_pass && seconds <= budget_seconds,
        checks_pass,
        seconds,
        budget_seconds,
        summary,
        details,
    })
}

type Outcome = Result<(bool, String, Value)>;

fn probe_certifies(name: &str, etas: &[f64], schedule: &WindowSchedule) -> Result<(bool, Value)> {
    let sc = scenario(name)?;
    let mut ok = true;
    let mut rows = Vec::new();
    for setup in scenario_frames(&sc)? {
        let rep = ess_spectrum_probe(name, &setup, etas, schedule, DEFAULT_TOL)?;
        for s in &rep.summary {
            ok &= s.certified;
            rows.push(json!({
                "frame": rep.frame, "eta": s.eta, "lambda": s.scenario_lambda, "certified": s.certified,
                "final_ratio": s.final_ratio, "slope": s.slope, "windows": s.windows,
                "final_length": rep.cells.iter().flatten().rfind(|c| c.residual.eta == s.eta)
                    .map(|c| c.residual.window.len()),
            }));
        }
    }
    Ok((ok, Value::Array(rows)))
}

const DELTA2_MESHES: [(usize, f64, f64); 4] = [(200, 0.7, 1e-8), (400, 0.7, 1e-10), (800, 0.8, 1e-12), (1600, 0.8, 1e-12)];

fn a1() -> Outcome {
    let sc = scenario("interval-delta2")?;
    let mut bottoms = Vec::new();
    for (n, q, eps) in DELTA2_MESHES {
        bottoms.push(bottom(&scenario_pencil(&sc, n, q, eps)?, 1e-12)?);
    }
    let lower_ok = bottoms.iter().all(|&b| b >= 0.25 - 1e-9);
    // λ ∈ {1, 1.25, 2}·¼ on windows of length at most 400.
    let short = WindowSchedule::geometric(25.0, 5);
    let (cert, rows) = probe_certifies("interval-delta2", &[0.0, 0.25, 1.0], &short)?;
    let summary = format!(
        "min bottom {:.12} (≥ 0.25 - 1e-9: {lower_ok}); certified at length ≤ 400: {cert}",
        bottoms.iter().cloned().fold(f64::INFINITY, f64::min)
    );
    Ok((lower_ok && cert, summary, json!({"bottoms": bottoms, "probe": rows})))
}

fn a2() -> Outcome {
    let mut ok = true;
    let mut rows = Vec::new();
    for name in ["interval-j1", "interval-j2", "ball3-j1", "ball3-j2"] {
        let sc = scenario(name)?;
        let mut counts = Vec::new();
        for (n, q, eps) in [(200, 0.7, 1e-6), (400, 0.7, 1e-8), (800, 0.8, 1e-10)] {
            counts.push(count_below(&scenario_pencil(&sc, n, q, eps)?, 0.999));
        }
        let (cert, probe) = probe_certifies(name, &[0.0, 0.5, 2.0], &WindowSchedule::default())?;
        let good = counts.iter().all(|&c| c == 0) && cert;
        ok &= good;
        rows.push(json!({"scenario": name, "counts_below_0.999": counts, "probe": probe, "pass": good}));
    }
    Ok((ok, format!("count_below(0.999) = 0 and λ ∈ {{1, 1.5, 3}} certified: {ok}"), Value::Array(rows)))
}

fn a3() -> Outcome {
    let sc = scenario("annulus3-delta2")?;
    let mut counts = Vec::new();
    for (n, eps) in [(400, 1e-6), (800, 1e-6), (1600, 1e-6), (800, 5e-7), (800, 2.5e-7)] {
        counts.push(json!({"n": n, "eps_min": eps, "count": count_below(&scenario_pencil(&sc, n, 0.7, eps)?, 0.249)}));
    }
    let first = counts[0]["count"].clone();
    let ok = counts.iter().all(|c| c["count"] == first);
    Ok((ok, format!("count_below(0.249) = {first} on every mesh: {ok}"), Value::Array(counts)))
}

fn a4(seed: u64) -> Outcome {
    let interval = Domain::Interval { len: 1.0 };
    let ball = Domain::Ball { n: 3, radius: 1.0 };
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (label, dom) in [("interval", interval), ("ball3", ball)] {
        let pts = sample_radial(&dom, 200, seed)?;
        let d = xlog::select_d(dom.sup_delta()?, None, 0.0)?.d;
        for i in 0..=3 {
            let r = verify_bft_identities(i, d, &dom, &pts, RIDGE_EXCLUSION)?;
            let m = r.max_residual().max(r.max_weight_gap);
            worst = worst.max(m);
            rows.push(json!({"domain": label, "i": i, "form1": r.max_first, "form2": r.max_second, "h_vs_w": r.max_weight_gap}));
        }
    }
    let pts = sample_radial(&ball, 200, seed ^ 0x9e37_79b9)?;
    let d = xlog::select_d(1.0, None, 0.0)?.d;
    for i in 0..=3 {
        let r = verify_origin_identities(i, d, &ball, &pts)?;
        worst = worst.max(r.max_residual());
        rows.push(json!({"domain": "ball3-origin", "i": i, "form12": r.max_first, "form22": r.max_second}));
    }
    Ok((worst < 1e-8, format!("max identity residual {worst:.3e} (< 1e-8)"), Value::Array(rows)))
}

fn a5(seed: u64) -> Outcome {
    let mut ok = true;
    let mut rows = Vec::new();
    for (n, count) in [(3, 2), (4, 2), (3, 3)] {
        let poles = standard_poles(n, count)?;
        let pts = sample_points(n, &poles, 100, seed)?;
        let worst = pts
            .iter()
            .map(|x| multipolar_residual(n, &poles, x).map(|p| p.residual))
            .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))?;
        let ff = far_field(n, &poles, 8, seed)?;
        let good = worst < 1e-8 && ff.spread <= 4.0;
        ok &= good;
        rows.push(json!({"n": n, "poles": count, "max_residual": worst, "far_field_spread": ff.spread,
            "far_field_exponent": ff.exponent, "pass": good}));
    }
    Ok((ok, format!("multipolar residuals < 1e-8 and r⁴W spread ≤ 4: {ok}"), Value::Array(rows)))
}

fn a6() -> Outcome {
    let setup = scenario_frames(&scenario("interval-j0")?)?.remove(0);
    let f = setup.frame.as_ref();
    let a = f.w_min() + 5.0;
    let mut halving = true;
    let mut rows = Vec::new();
    for eta in [0.0, 1.0, 3.0] {
        let r1 = quasimode_residual(f, eta, Window::new(a, a + 100.0)?)?.ratio;
        let r2 = quasimode_residual(f, eta, Window::new(a, a + 200.0)?)?.ratio;
        let q = r2 / r1;
        halving &= (0.4..=0.6).contains(&q);
        rows.push(json!({"eta": eta, "ratio_100": r1, "ratio_200": r2, "quotient": q}));
    }
    let uni = PushforwardMeasure::from_density(|_| 1.0, crate::measures::uniform_edges(0.0, 100.0, 100), true)?;
    let b = window_search(&uni, 10.0, 0.1, 5.0)?.b;
    let b_ok = b.is_some_and(|b| (b - 20.0).abs() < 1e-9);
    let summary = format!(
        "doubling quotients {:?} (target 0.5 ± 20%): {halving}; window_search b = {b:?}: {b_ok}",
        rows.iter().map(|r| r["quotient"].as_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>()
    );
    Ok((halving && b_ok, summary, json!({"doubling": rows, "window_search_b": b})))
}

fn a7() -> Outcome {
    let setup = scenario_frames(&scenario("interval-j0")?)?.remove(0);
    let f = setup.frame.as_ref();
    let win = Window::new(f.w_min() + 5.0, f.w_min() + 505.0)?;
    let bump = WeightRatio::Bump { amplitude: 0.01, period: 7.0 };
    let mut ok = true;
    let mut rows = Vec::new();
    for lambda in [1.0, 1.25] {
        let t = transfer_residual(f, &bump, lambda - 1.0, win)?;
        let good = t.ratio_w2 <= t.bound_w2 + 1e-6;
        ok &= good;
        rows.push(json!(t));
    }
    Ok((ok, format!("ratio_W2 ≤ 2·ratio_W1 + |λ|·sup|W1/W2 - 1| + 1e-6: {ok}"), Value::Array(rows)))
}

fn a8() -> Outcome {
    let setup = scenario_frames(&scenario("interval-j0")?)?.remove(0);
    let rates = sigma_rates(&setup, &SigmaOptions::default())?;
    let rates_ok = (1.9..=2.1).contains(&rates.sigma0) && (1.9..=2.1).contains(&rates.sigma1);
    let d = match setup.weight {
        WeightSpec::InverseSquareDelta => match setup.pair.u0 {
            crate::scenarios::Profile::Delta { d } => d,
            _ => 1.0,
        },
        _ => 1.0,
    };
    let lo = 2.0 * setup.frame.w_min();
    let chi = PushforwardMeasure::from_frame(setup.frame.as_ref(), crate::measures::uniform_edges(lo, 1000.0, 1000))?;
    let curves = volume_growth(&chi)?;
    let (x, y): (Vec<f64>, Vec<f64>) = curves.rows.iter().map(|r| (r.r, r.v)).unzip();
    let slope = fit::least_squares(&x, &y).map(|p| p.0).unwrap_or(f64::NAN);
    let slope_ok = (slope * 2.0 * d - 1.0).abs() <= 0.05;
    let mut brooks = Vec::new();
    let mut brooks_ok = true;
    for name in catalog_names() {
        let sc = scenario(name)?;
        let Ok(setups) = scenario_frames(&sc) else {
            brooks.push(json!({"scenario": name, "status": "not-applicable"}));
            continue;
        };
        for s in setups {
            let r = sigma_rates(&s, &SigmaOptions::default())?;
            brooks_ok &= r.brooks_check;
            brooks.push(json!({"scenario": name, "frame": r.frame, "lambda_inf": r.lambda_inf,
                "sigma0": r.sigma0, "sigma1": r.sigma1, "brooks": r.brooks_check}));
        }
    }
    let ok = rates_ok && slope_ok && brooks_ok;
    let summary = format!(
        "σ0 = {:.4}, σ1 = {:.4}; χ slope {slope:.5} vs 1/(2D) = {}; Brooks in every framed scenario: {brooks_ok}",
        rates.sigma0,
        rates.sigma1,
        0.5 / d
    );
    Ok((ok, summary, json!({"rates": rates, "chi_slope": slope, "brooks": brooks})))
}

fn a9() -> Outcome {
    let sc = scenario("modelend-n3-c0")?;
    let mut bottoms = Vec::new();
    for (n, q) in [(200, 1.0), (400, 1.0), (800, 1.0)] {
        bottoms.push(bottom(&scenario_pencil(&sc, n, q, 1e-3)?, 1e-12)?);
    }
    let lower_ok = bottoms.iter().all(|&b| b >= 0.25 - 1e-9);
    let (cert, probe) = probe_certifies("modelend-n3-c0", &[0.0, 1.0, 3.0], &WindowSchedule::default())?;
    let rep = model_end_conditions(3, 1.0, &fit::log_grid(10.0, 1e8, 10))?;
    let slopes = [rep.slope1, rep.slope2, rep.slope3];
    let decay_ok = slopes.iter().all(|s| s.is_some_and(|s| s <= -0.9));
    let summary = format!("bottoms ≥ 1/4 - 1e-9: {lower_ok}; λ ∈ {{¼, ½, 1}} certified: {cert}; c = 1 slopes {slopes:?}");
    Ok((lower_ok && cert && decay_ok, summary, json!({"bottoms": bottoms, "probe": probe, "slopes": slopes})))
}

/// Bottom of `δ^α(-Δ)` on the boundary layer `{δ < ε}` of the unit interval,
/// Dirichlet at `δ = ε` and at the truncation `δ = 1e-10·ε`.
pub fn boundary_layer_bottom(alpha: f64, eps: f64, n: usize) -> Result<f64> {
    let dom = Domain::Interval { len: 1.0 };
    let t0 = 1e-10 * eps;
    let nodes: Vec<f64> = (0..=n).map(|k| t0 * (eps / t0).powf(k as f64 / n as f64)).collect();
    let mesh = Mesh::from_nodes(nodes, (true, true), vec![])?;
    let p = assemble_pencil(&dom, &OperatorSpec::laplacian(), &WeightSpec::PowerDelta { alpha }, &mesh)?;
    bottom(&p, 1e-10)
}

fn a10() -> Outcome {
    let eps: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
    let growth = |alpha: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let b: Vec<f64> = eps.iter().map(|&e| boundary_layer_bottom(alpha, e, 400)).collect::<Result<_>>()?;
        let q = b.windows(2).map(|w| w[1] / w[0]).collect();
        Ok((b, q))
    };
    let (b3, q3) = growth(3.0)?;
    let ok = q3.iter().all(|&q| q >= 1.8);
    // Diagnostic: the same experiment for α = 1, where the layer bottom scales
    // like ε^{α-2} and does blow up.
    let (b1, q1) = growth(1.0)?;
    let summary = format!("α = 3 bottom quotients per ε-halving {q3:.4?} (need ≥ 1.8); α = 1 diagnostic {q1:.4?}");
    Ok((ok, summary, json!({"eps": eps, "alpha3": {"bottoms": b3, "quotients": q3}, "alpha1": {"bottoms": b1, "quotients": q1}})))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_is_usage_error() {
        assert!(run_criterion("A11", 0).is_err());
    }

    #[test]
    fn boundary_layer_scaling() {
        // λ(ε) ∝ ε^{α-2}: halving ε halves the α = 3 bottom and doubles the α = 1 bottom.
        let r3 = boundary_layer_bottom(3.0, 0.05, 400).unwrap() / boundary_layer_bottom(3.0, 0.1, 400).unwrap();
        let r1 = boundary_layer_bottom(1.0, 0.05, 400).unwrap() / boundary_layer_bottom(1.0, 0.1, 400).unwrap();
        assert!((r3 - 0.5).abs() < 1e-3, "{r3}");
        assert!((r1 - 2.0).abs() < 1e-3, "{r1}");
    }
}
