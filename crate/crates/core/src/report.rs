//! Run configuration, the config-driven pipeline and the summary bundle.
//!
//! Everything here is deterministic given the configuration: artifacts are
//! returned as `(file name, contents)` pairs, JSON maps are key-sorted and
//! floats in CSV use the shortest round-trip decimal.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::criteria::{CriterionResult, IDS};
use crate::discretize::scenario_pencil;
use crate::eigen::{brackets_csv, count_below, eig_bottom};
use crate::error::{param, Error, Result};
use crate::measures::{growth_report, uniform_edges, PushforwardMeasure};
use crate::quasimode::{ess_spectrum_probe, scenario_frames, WeightRatio, WindowSchedule};
use crate::scenarios::{catalog_names, scenario, Domain, Scenario, WeightSpec};

pub const SCHEMA: &str = "hardy-run/1";
pub const REPORT_SCHEMA: &str = "hardy-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => param(format!("unknown format {s:?}; expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(alias = "N")]
    pub n: usize,
    pub q: f64,
    pub eps_min: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n: 400, q: 0.7, eps_min: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub k: usize,
    pub tol: f64,
    /// Count threshold; defaults to `0.999·λ_ess` of the scenario.
    pub threshold: Option<f64>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { k: 3, tol: 1e-10, threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasimodeConfig {
    pub eta_grid: Vec<f64>,
    /// Window lengths; defaults to the geometric schedule.
    pub windows: Option<Vec<f64>>,
    pub tol: f64,
}

impl Default for QuasimodeConfig {
    fn default() -> Self {
        Self { eta_grid: vec![0.0, 1.0, 3.0], windows: None, tol: crate::quasimode::DEFAULT_TOL }
    }
}

impl QuasimodeConfig {
    pub fn schedule(&self) -> WindowSchedule {
        match &self.windows {
            Some(l) => WindowSchedule { lengths: l.clone(), stop_when_certified: true },
            None => WindowSchedule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub bins: usize,
    /// Upper end of the sampled range, in frame units `v`.
    pub r_max: f64,
    pub eps: Vec<f64>,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self { bins: 1000, r_max: 200.0, eps: vec![0.5, 1.0, 2.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub scenario: String,
    /// Replaces the scenario weight; required for bare domain names.
    #[serde(default)]
    pub weight: Option<WeightSpec>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub quasimode: QuasimodeConfig,
    #[serde(default)]
    pub growth: GrowthConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.to_string(),
            scenario: "interval-j0".to_string(),
            weight: None,
            mesh: MeshConfig::default(),
            spectral: SpectralConfig::default(),
            quasimode: QuasimodeConfig::default(),
            growth: GrowthConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field against the registry before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return param(format!("schema {:?} is not {SCHEMA:?}", self.schema));
        }
        resolve_scenario(&self.scenario, self.weight.as_ref())?;
        let m = &self.mesh;
        if m.n < 2 || !(m.q > 0.0 && m.q <= 1.0) || !(m.eps_min > 0.0) {
            return param(format!("invalid mesh {m:?}"));
        }
        let s = &self.spectral;
        if s.k == 0 || !(s.tol > 0.0) || s.threshold.is_some_and(|t| !t.is_finite()) {
            return param(format!("invalid spectral section {s:?}"));
        }
        let q = &self.quasimode;
        if q.eta_grid.is_empty() || q.eta_grid.iter().any(|e| !(*e >= 0.0)) || !(q.tol > 0.0) {
            return param(format!("invalid quasimode section {q:?}"));
        }
        if let Some(w) = &q.windows {
            if w.is_empty() || w.iter().any(|l| !(*l >= 2.0)) || w.windows(2).any(|p| p[1] <= p[0]) {
                return param("quasimode windows must be increasing lengths ≥ 2");
            }
        }
        let g = &self.growth;
        if g.bins < 20 || !(g.r_max > 0.0) || g.eps.iter().any(|e| !(*e > 0.0)) {
            return param(format!("invalid growth section {g:?}"));
        }
        if self.output.formats.is_empty() {
            return param("output.formats is empty");
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }
}

fn bare_domain(name: &str) -> Option<Domain> {
    match name {
        "interval" => Some(Domain::Interval { len: 1.0 }),
        "ball3" => Some(Domain::Ball { n: 3, radius: 1.0 }),
        "annulus3" => Some(Domain::Annulus { n: 3, inner: 1.0, outer: 2.0 }),
        _ => None,
    }
}

/// A catalog name, or a bare domain (`interval`, `ball3`, `annulus3`) with an
/// explicit weight. A bare domain whose weight matches a catalog scenario
/// inherits that scenario's known spectral data and frames.
pub fn resolve_scenario(name: &str, weight: Option<&WeightSpec>) -> Result<Scenario> {
    if let Ok(mut sc) = scenario(name) {
        if let Some(w) = weight {
            if *w != sc.weight {
                sc.weight = w.clone();
                sc.lambda0 = None;
                sc.lambda_inf = None;
                sc.frames.clear();
                sc.pair = None;
            }
        }
        return Ok(sc);
    }
    let Some(domain) = bare_domain(name) else {
        return param(format!(
            "unknown scenario {name:?}; known: interval, ball3, annulus3, {}",
            catalog_names().join(", ")
        ));
    };
    let Some(w) = weight else {
        return param(format!("bare domain {name:?} needs a weight"));
    };
    for cand in catalog_names() {
        let sc = scenario(cand)?;
        if sc.domain == domain && sc.weight == *w {
            return Ok(Scenario { name: name.to_string(), ..sc });
        }
    }
    Ok(Scenario {
        name: name.to_string(),
        domain,
        op: Default::default(),
        weight: w.clone(),
        lambda0: None,
        lambda_inf: None,
        frames: vec![],
        frame_scale: 1.0,
        pair: None,
        poles: None,
    })
}

/// Parse `name` or `name:key=value,...` into the internally tagged object
/// `{tag: name, key: value, ...}`; text starting with `{` is read as JSON.
fn parse_tagged<T: serde::de::DeserializeOwned>(text: &str, tag: &str, integer_keys: &[&str]) -> Result<T> {
    let t = text.trim();
    let value = if t.starts_with('{') {
        serde_json::from_str::<Value>(t).map_err(|e| Error::Parse(e.to_string()))?
    } else {
        let (name, args) = t.split_once(':').unwrap_or((t, ""));
        let mut obj = serde_json::Map::new();
        obj.insert(tag.into(), json!(name));
        for kv in args.split(',').filter(|s| !s.is_empty()) {
            let Some((k, v)) = kv.split_once('=') else {
                return param(format!("argument {kv:?} is not key=value"));
            };
            let val = if integer_keys.contains(&k) {
                json!(v.parse::<u64>().map_err(|_| Error::Parse(format!("{kv:?}: expected an integer")))?)
            } else {
                json!(v.parse::<f64>().map_err(|_| Error::Parse(format!("{kv:?}: expected a number")))?)
            };
            obj.insert(k.to_string(), val);
        }
        Value::Object(obj)
    };
    serde_json::from_value(value).map_err(|e| Error::Parse(format!("{t:?}: {e}")))
}

/// `family` or `family:key=value,...`, e.g. `power-delta:alpha=3`, or JSON.
pub fn parse_weight(text: &str) -> Result<WeightSpec> {
    parse_tagged(text, "family", &["i"])
}

/// `identical`, `bump:amplitude=A,period=P` or `tail:amplitude=A,kappa=K`.
pub fn parse_weight_ratio(text: &str) -> Result<WeightRatio> {
    parse_tagged(text, "kind", &[])
}

/// Pushforward of the first frame's measure on `bins` bins of `[v_min, v_min + r_max]`.
pub fn scenario_chi(sc: &Scenario, bins: usize, r_max: f64) -> Result<PushforwardMeasure> {
    let setup = scenario_frames(sc)?.remove(0);
    let lo = 2.0 * setup.frame.w_min();
    PushforwardMeasure::from_frame(setup.frame.as_ref(), uniform_edges(lo, lo + r_max, bins))
}

/// One named pass/fail check of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub scenario: String,
    pub seed: u64,
    pub checks: BTreeMap<String, Check>,
    pub artifacts: Vec<(String, String)>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn summary_json(&self) -> String {
        let v = json!({"schema": SCHEMA, "scenario": self.scenario, "seed": self.seed, "pass": self.pass(),
            "checks": self.checks, "artifacts": self.artifacts.iter().map(|a| &a.0).collect::<Vec<_>>()});
        pretty(&v)
    }
}

pub fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_else(|e| format!("{{\"error\": {:?}}}", e.to_string()));
    s.push('\n');
    s
}

/// Spectrum, quasimode probe and growth analysis of the configured scenario.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let sc = resolve_scenario(&cfg.scenario, cfg.weight.as_ref())?;
    let mut checks = BTreeMap::new();
    let mut artifacts = Vec::new();
    let stem = sc.name.clone();
    let csv = cfg.wants(Format::Csv);
    let js = cfg.wants(Format::Json);

    let m = &cfg.mesh;
    let p = scenario_pencil(&sc, m.n, m.q, m.eps_min)?;
    let br = eig_bottom(&p, cfg.spectral.k.min(p.k_diag.len()), cfg.spectral.tol)?;
    let bottom = br.first().map(|b| b.value).unwrap_or(f64::NAN);
    if let Some(l0) = sc.lambda0 {
        checks.insert(
            "eig-bottom".into(),
            Check { pass: bottom >= l0 - 1e-9, detail: format!("bottom {bottom:?} vs λ0 {l0:?}") },
        );
    }
    let threshold = cfg.spectral.threshold.or(sc.lambda_inf.map(|l| 0.999 * l));
    let count = threshold.map(|t| count_below(&p, t));
    if csv {
        artifacts.push((format!("{stem}.eig.csv"), brackets_csv(&br)));
    }
    if js {
        artifacts.push((
            format!("{stem}.eig.json"),
            pretty(&json!({"scenario": stem, "mesh": m, "brackets": br, "threshold": threshold, "count_below": count})),
        ));
    }

    if !sc.frames.is_empty() {
        let schedule = cfg.quasimode.schedule();
        let mut chi_done = false;
        for setup in scenario_frames(&sc)? {
            let rep = ess_spectrum_probe(&stem, &setup, &cfg.quasimode.eta_grid, &schedule, cfg.quasimode.tol)?;
            let ok = rep.summary.iter().all(|s| s.certified);
            checks.insert(
                format!("probe-{}", rep.frame),
                Check { pass: ok, detail: format!("{} of {} η certified", rep.summary.iter().filter(|s| s.certified).count(), rep.summary.len()) },
            );
            if csv {
                artifacts.push((format!("{stem}.{}.probe.csv", rep.frame), rep.to_csv()));
            }
            if js {
                artifacts.push((format!("{stem}.{}.probe.json", rep.frame), pretty(&rep)));
            }
            if !chi_done {
                chi_done = true;
                let chi = scenario_chi(&sc, cfg.growth.bins, cfg.growth.r_max)?;
                let g = growth_report(&chi, &[], &cfg.growth.eps)?;
                if csv {
                    artifacts.push((format!("{stem}.growth.csv"), g.curves.to_csv()));
                }
                if js {
                    artifacts.push((format!("{stem}.growth.json"), pretty(&g)));
                }
            }
        }
    }
    Ok(RunOutcome { scenario: stem, seed: cfg.seed, checks, artifacts })
}

/// File name under which a criterion result is stored in an output directory.
pub fn criterion_file(id: &str) -> String {
    format!("criterion-{id}.json")
}

/// The stored form of a criterion result. Timing is left out so reruns are
/// byte-identical; the budget verdict is kept.
pub fn criterion_json(r: &CriterionResult) -> String {
    pretty(&json!({
        "id": r.id, "pass": r.pass, "checks_pass": r.checks_pass,
        "within_budget": r.seconds <= r.budget_seconds, "budget_seconds": r.budget_seconds,
        "summary": r.summary, "details": r.details,
    }))
}

/// Aggregate the criterion files (and run summaries) found in `dir`.
pub fn report_bundle(dir: &Path) -> Result<Value> {
    let entries: Vec<String> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect(),
        Err(e) => return param(format!("cannot read {}: {e}", dir.display())),
    };
    let mut criteria = serde_json::Map::new();
    let mut runs = serde_json::Map::new();
    let read = |name: &str| -> Result<Value> {
        let text = std::fs::read_to_string(dir.join(name)).map_err(|e| Error::Parse(format!("{name}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{name}: {e}")))
    };
    let mut found = 0;
    for id in IDS {
        let name = criterion_file(id);
        let status = if entries.contains(&name) {
            found += 1;
            let v = read(&name)?;
            match v.get("pass").and_then(Value::as_bool) {
                Some(true) => "pass",
                Some(false) => "fail",
                None => return Err(Error::Parse(format!("{name}: missing pass field"))),
            }
        } else {
            "not-run"
        };
        criteria.insert(id.to_string(), json!(status));
    }
    let mut names: Vec<&String> = entries.iter().filter(|n| n.ends_with(".summary.json")).collect();
    names.sort();
    for name in names {
        found += 1;
        let v = read(name)?;
        let pass = v.get("pass").and_then(Value::as_bool).unwrap_or(false);
        runs.insert(name.trim_end_matches(".summary.json").to_string(), json!(if pass { "pass" } else { "fail" }));
    }
    if found == 0 {
        return param(format!("{} holds no run outputs", dir.display()));
    }
    let count = |s: &str| criteria.values().filter(|v| *v == s).count();
    Ok(json!({
        "schema": REPORT_SCHEMA,
        "criteria": criteria,
        "passed": count("pass"), "failed": count("fail"), "not_run": count("not-run"),
        "runs": runs,
    }))
}
