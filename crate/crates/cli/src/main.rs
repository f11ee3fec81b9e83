//! `hardy`: command-line driver for hardy-core.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails or a
//! computation breaks down, 1 on usage errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hardy_core::criteria::{run_criterion, IDS};
use hardy_core::discretize::{make_mesh, scenario_pencil};
use hardy_core::eigen::{brackets_csv, count_below, eig_bottom};
use hardy_core::error::Error;
use hardy_core::fit::log_grid;
use hardy_core::measures::{
    agmon_distance, eps_exp_check, growth_criterion, sigma_rates, volume_growth, AgmonFrame, SigmaOptions,
};
use hardy_core::quasimode::{
    ess_spectrum_probe, scenario_frames, transfer_residual, Window, WindowSchedule,
};
use hardy_core::report::{
    criterion_file, criterion_json, parse_weight, parse_weight_ratio, pretty, report_bundle, resolve_scenario,
    run, scenario_chi, Format, RunConfig,
};
use hardy_core::scenarios::identities::{
    appendix_identity, sample_radial, verify_bft_identities, verify_origin_identities, verify_supconstruct,
    RIDGE_EXCLUSION,
};
use hardy_core::scenarios::model_end::model_end_conditions;
use hardy_core::scenarios::multipolar::{far_field, multipolar_residual, sample_points, standard_poles};
use hardy_core::scenarios::Scenario;
use hardy_core::xlog;

/// Identity residuals below this count as exact.
const IDENTITY_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(name = "hardy", version, about = "Optimal Hardy weights: identities, spectra, quasimodes and growth rates")]
struct Cli {
    /// JSON run configuration (schema "hardy-run/1"); supplies defaults for every subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write artifacts here instead of printing them.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated subset of csv,json.
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<String>>,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Iterated logarithms and the scale choice.
    #[command(subcommand)]
    Xlog(XlogCmd),
    /// Pointwise identity checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Graded mesh of a scenario.
    Mesh(MeshArgs),
    /// Pencil eigenvalues.
    #[command(subcommand)]
    Eig(EigCmd),
    /// Weyl quasimodes.
    #[command(subcommand)]
    Probe(ProbeCmd),
    /// Volume growth of the pushed-forward measure.
    #[command(subcommand)]
    Growth(GrowthCmd),
    /// Agmon metric.
    #[command(subcommand)]
    Agmon(AgmonCmd),
    /// Run acceptance criteria and bundle the results into summary.json.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
enum XlogCmd {
    /// X_i, X_i' and R_i at the given points.
    Eval {
        #[arg(long)]
        i: usize,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        t: Vec<f64>,
    },
    /// Partial sums of the product series.
    Series {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = xlog::SERIES_TOL)]
        tol: f64,
        #[arg(long, default_value_t = xlog::SERIES_TERM_CAP)]
        cap: usize,
    },
    /// Smallest D with R_i(δ/D) ≤ 1 - margin.
    SelectD {
        #[arg(long)]
        delta_max: f64,
        #[arg(long)]
        i_max: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// Catalog name, or interval|ball3|annulus3 together with --weight.
    #[arg(long)]
    scenario: Option<String>,
    /// Weight family, e.g. inverse-square-delta or power-delta:alpha=3.
    #[arg(long)]
    weight: Option<String>,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Both supersolution identities for the scenario's profile pair.
    Supconstruct {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Level-i boundary identities (or the origin variants with --origin).
    Bft {
        #[arg(long)]
        i: usize,
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        origin: bool,
    },
    /// Multipolar eigenfunction residuals and far-field spread.
    Multipolar {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        poles: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 8)]
        rays: usize,
    },
    /// The radial product expansion of -Δφ/φ.
    Appendix {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.001,0.01,0.1,0.5")]
        r: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        d: f64,
    },
    /// The three model-end limit conditions.
    Modelend {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 10.0)]
        r_min: f64,
        #[arg(long, default_value_t = 1e8)]
        r_max: f64,
        #[arg(long, default_value_t = 10)]
        per_decade: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct MeshArgs {
    #[command(flatten)]
    sc: ScenarioArgs,
    #[arg(long, alias = "N")]
    n: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    eps_min: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum EigCmd {
    /// Lowest k eigenvalue brackets.
    Bottom {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Number of eigenvalues below a threshold.
    Count {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        threshold: Option<f64>,
        /// Fail unless the count equals this.
        #[arg(long)]
        expect: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum ProbeCmd {
    /// Certify λ = 1 + η in the essential spectrum of every frame.
    Ess {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long, value_delimiter = ',')]
        eta: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Residual of a frame quasimode under a perturbed weight W2 = W1/ρ.
    Transfer {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long, value_delimiter = ',')]
        eta: Option<Vec<f64>>,
        /// identical | bump:amplitude=A,period=P | tail:amplitude=A,kappa=K
        #[arg(long, default_value = "bump:amplitude=0.01,period=7")]
        ratio: String,
        /// Window start past the frame edge.
        #[arg(long, default_value_t = 5.0)]
        offset: f64,
        #[arg(long, default_value_t = 500.0)]
        len: f64,
    },
}

#[derive(Subcommand, Debug)]
enum GrowthCmd {
    /// Volume curves and the exponential rate σ.
    Sigma {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Window search S(b)/(V(b) - V(a)) < ε.
    Criterion {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Membership in the ε-exponential class.
    EpsClass {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        r_max: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
enum AgmonCmd {
    /// ρ(x, y) = |h(x) - h(y)| in the radial coordinate.
    Distance {
        #[command(flatten)]
        sc: ScenarioArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// σ_0, σ_1 and the Brooks-type bound for every frame.
    Rates {
        #[command(flatten)]
        sc: ScenarioArgs,
    },
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Criteria to run (default: all).
    #[arg(long, value_delimiter = ',')]
    run: Option<Vec<String>>,
    /// Only aggregate existing results in --out.
    #[arg(long)]
    bundle_only: bool,
}

/// A command's result before it is written out.
struct Output {
    stem: String,
    csv: Option<String>,
    json: Value,
    pass: bool,
    /// Extra files written next to the main artifacts.
    extra: Vec<(String, String)>,
}

impl Output {
    fn new(stem: impl Into<String>, csv: Option<String>, json: Value, pass: bool) -> Self {
        Self { stem: stem.into(), csv, json, pass, extra: vec![] }
    }
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Parse(_) | Error::Domain(_) | Error::NotApplicable(_) | Error::Infeasible(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

type Res<T> = Result<T, Failure>;

struct Ctx {
    cfg: RunConfig,
    formats: Vec<Format>,
    formats_given: bool,
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(2)
        }
    }
}

fn context(cli: &Cli) -> Res<Ctx> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let formats_given = cli.format.is_some();
    if let Some(f) = &cli.format {
        let mut v: Vec<Format> = f.iter().map(|s| s.trim().parse()).collect::<Result<_, Error>>()?;
        v.dedup();
        if v.is_empty() {
            return Err(Failure::Usage("--format is empty".into()));
        }
        cfg.output.formats = v;
    }
    let out = cli.out.clone().or(cfg.output.dir.as_ref().map(PathBuf::from));
    Ok(Ctx { formats: cfg.output.formats.clone(), formats_given, out, cfg })
}

fn dispatch(cli: Cli) -> Res<bool> {
    let ctx = context(&cli)?;
    let Some(cmd) = cli.cmd else {
        if cli.config.is_none() {
            return Err(Failure::Usage("give a subcommand, or --config FILE to run a configuration".into()));
        }
        return run_config(&ctx);
    };
    let output = match cmd {
        Cmd::Xlog(c) => xlog_cmd(c)?,
        Cmd::Verify(c) => verify_cmd(&ctx, c)?,
        Cmd::Mesh(m) => mesh_cmd(&ctx, &m)?,
        Cmd::Eig(c) => eig_cmd(&ctx, c)?,
        Cmd::Probe(c) => probe_cmd(&ctx, c)?,
        Cmd::Growth(c) => growth_cmd(&ctx, c)?,
        Cmd::Agmon(c) => agmon_cmd(&ctx, c)?,
        Cmd::Report(r) => return report_cmd(&ctx, &r),
    };
    emit(&ctx, &output)?;
    Ok(output.pass)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Res<()> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    std::fs::write(&p, contents).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn emit(ctx: &Ctx, o: &Output) -> Res<()> {
    let json_text = pretty(&o.json);
    match &ctx.out {
        Some(dir) => {
            for f in &ctx.formats {
                match f {
                    Format::Csv => {
                        if let Some(c) = &o.csv {
                            write_file(dir, &format!("{}.csv", o.stem), c)?;
                        }
                    }
                    Format::Json => write_file(dir, &format!("{}.json", o.stem), &json_text)?,
                }
            }
            for (name, contents) in &o.extra {
                write_file(dir, name, contents)?;
            }
            println!("{} {}", if o.pass { "PASS" } else { "FAIL" }, o.stem);
        }
        None => {
            // Without --format, print the CSV when there is one.
            let formats: Vec<Format> = if ctx.formats_given {
                ctx.formats.clone()
            } else if o.csv.is_some() {
                vec![Format::Csv]
            } else {
                vec![Format::Json]
            };
            for f in formats {
                match f {
                    Format::Csv => {
                        if let Some(c) = &o.csv {
                            print!("{c}");
                        }
                    }
                    Format::Json => print!("{json_text}"),
                }
            }
        }
    }
    Ok(())
}

fn run_config(ctx: &Ctx) -> Res<bool> {
    let outcome = run(&ctx.cfg)?;
    let summary = outcome.summary_json();
    match &ctx.out {
        Some(dir) => {
            for (name, contents) in &outcome.artifacts {
                write_file(dir, name, contents)?;
            }
            write_file(dir, &format!("{}.summary.json", outcome.scenario), &summary)?;
            for (name, c) in &outcome.checks {
                println!("{} {name}: {}", if c.pass { "PASS" } else { "FAIL" }, c.detail);
            }
        }
        None => print!("{summary}"),
    }
    Ok(outcome.pass())
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn json_of(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn xlog_cmd(c: XlogCmd) -> Res<Output> {
    match c {
        XlogCmd::Eval { i, t } => {
            let mut rows = Vec::new();
            let mut js = Vec::new();
            for &t in &t {
                let x = xlog::x_eval(i, t)?;
                let dx = xlog::x_deriv(i, t)?;
                let r = xlog::r_sum(i, t)?;
                rows.push(vec![i.to_string(), f(t), f(x), f(dx), f(r)]);
                js.push(json!({"i": i, "t": t, "x": x, "x_deriv": dx, "r_sum": r}));
            }
            Ok(Output::new(format!("xlog-eval-i{i}"), Some(csv("i,t,x,x_deriv,r_sum", rows)), json!(js), true))
        }
        XlogCmd::Series { t, tol, cap } => {
            let s = xlog::series_sum(t, tol, cap)?;
            let js = json!({"t": s.t, "sum": s.sum(), "terms": s.terms(), "remainder_bound": s.remainder_bound,
                "remainder_certified": s.remainder_certified, "converged": s.converged});
            let row = vec![f(s.t), f(s.sum()), s.terms().to_string(), f(s.remainder_bound),
                s.remainder_certified.to_string(), s.converged.to_string()];
            Ok(Output::new(
                "xlog-series",
                Some(csv("t,sum,terms,remainder_bound,remainder_certified,converged", [row])),
                js,
                s.converged,
            ))
        }
        XlogCmd::SelectD { delta_max, i_max, margin } => {
            let c = xlog::select_d(delta_max, i_max, margin)?;
            let row = vec![f(delta_max), f(c.d), f(c.t_star), f(c.value), f(c.remainder_bound),
                c.tail_certified.to_string(), c.terms.to_string()];
            Ok(Output::new(
                "xlog-select-d",
                Some(csv("delta_max,d,t_star,value,remainder_bound,tail_certified,terms", [row])),
                json_of(&c),
                true,
            ))
        }
    }
}

/// Scenario from the flags, falling back to the configuration.
fn scenario_of(ctx: &Ctx, a: &ScenarioArgs) -> Res<Scenario> {
    let weight = match &a.weight {
        Some(w) => Some(parse_weight(w)?),
        None => ctx.cfg.weight.clone(),
    };
    let name = a.scenario.clone().unwrap_or_else(|| ctx.cfg.scenario.clone());
    Ok(resolve_scenario(&name, weight.as_ref())?)
}

fn identity_csv(rows: &[hardy_core::scenarios::identities::IdentityRow]) -> String {
    csv("s,first,second", rows.iter().map(|r| vec![f(r.s), f(r.first), f(r.second)]))
}

fn verify_cmd(ctx: &Ctx, c: VerifyCmd) -> Res<Output> {
    let seed = ctx.cfg.seed;
    match c {
        VerifyCmd::Supconstruct { sc, points } => {
            let s = scenario_of(ctx, &sc)?;
            let Some(pair) = s.pair else {
                return Err(Failure::Usage(format!("scenario {} has no profile pair", s.name)));
            };
            let pts = sample_radial(&s.domain, points, seed)?;
            let r = verify_supconstruct(&s.domain, &pair, &s.op, &pts)?;
            let pass = r.max_residual() < IDENTITY_TOL;
            let js = json!({"scenario": s.name, "seed": seed, "max_first": r.max_first, "max_second": r.max_second});
            Ok(Output::new(format!("verify-supconstruct-{}", s.name), Some(identity_csv(&r.rows)), js, pass))
        }
        VerifyCmd::Bft { i, sc, d, points, origin } => {
            let s = scenario_of_domain(ctx, &sc)?;
            let dom = s.domain;
            let d = match d {
                Some(d) => d,
                None => xlog::select_d(dom.sup_delta()?, None, 0.0)?.d,
            };
            let pts = sample_radial(&dom, points, seed)?;
            let r = if origin {
                verify_origin_identities(i, d, &dom, &pts)?
            } else {
                verify_bft_identities(i, d, &dom, &pts, RIDGE_EXCLUSION)?
            };
            let worst = r.max_residual().max(r.max_weight_gap);
            let js = json!({"scenario": s.name, "i": i, "d": d, "origin": origin, "seed": seed,
                "max_first": r.max_first, "max_second": r.max_second, "max_weight_gap": r.max_weight_gap});
            let kind = if origin { "origin" } else { "bft" };
            Ok(Output::new(format!("verify-{kind}-i{i}-{}", s.name), Some(identity_csv(&r.rows)), js, worst < IDENTITY_TOL))
        }
        VerifyCmd::Multipolar { n, poles, points, rays } => {
            let p = standard_poles(n, poles)?;
            let pts = sample_points(n, &p, points, seed)?;
            let mut rows = Vec::new();
            let mut worst = 0.0f64;
            for x in &pts {
                let m = multipolar_residual(n, &p, x)?;
                worst = worst.max(m.residual);
                let mut row: Vec<String> = x.iter().map(|c| f(*c)).collect();
                row.extend([f(m.v), f(m.w), f(m.residual)]);
                rows.push(row);
            }
            let ff = far_field(n, &p, rays, seed)?;
            let header: Vec<String> =
                (0..n).map(|k| format!("x{k}")).chain(["v", "w", "residual"].map(String::from)).collect();
            let pass = worst < IDENTITY_TOL && ff.spread <= 4.0;
            let js = json!({"n": n, "poles": p, "seed": seed, "max_residual": worst, "far_field": ff,
                "eigenvalue": hardy_core::scenarios::multipolar::multipolar_eigenvalue(n, poles)});
            Ok(Output::new(format!("verify-multipolar-n{n}-p{poles}"), Some(csv(&header.join(","), rows)), js, pass))
        }
        VerifyCmd::Appendix { n, k, r, d } => {
            let mut rows = Vec::new();
            let mut js = Vec::new();
            let mut pass = true;
            for &r in &r {
                let a = appendix_identity(n, k, r, d)?;
                pass &= a.residual < IDENTITY_TOL && a.margin >= 0.0;
                rows.push(vec![f(r), f(a.lhs), f(a.rhs), f(a.residual), f(a.lower_bound), f(a.margin), f(a.margin_closed)]);
                js.push(json!({"r": r, "report": a}));
            }
            Ok(Output::new(
                format!("verify-appendix-n{n}-k{k}"),
                Some(csv("r,lhs,rhs,residual,lower_bound,margin,margin_closed", rows)),
                json!({"n": n, "k": k, "d": d, "rows": js}),
                pass,
            ))
        }
        VerifyCmd::Modelend { n, c, r_min, r_max, per_decade } => {
            let rep = model_end_conditions(n, c, &log_grid(r_min, r_max, per_decade))?;
            let pass = [rep.slope1, rep.slope2, rep.slope3].iter().all(|s| s.is_none_or(|s| s <= -0.9));
            let rows = rep.rows.iter().map(|r| {
                vec![f(r.r), f(r.gamma), f(r.v0), f(r.v0_closed), f(r.w), f(r.cond1), f(r.cond2), f(r.cond3), f(r.density)]
            });
            Ok(Output::new(
                format!("verify-modelend-n{n}-c{c}"),
                Some(csv("r,gamma,v0,v0_closed,w,cond1,cond2,cond3,density", rows)),
                json!({"n": n, "c": c, "slope1": rep.slope1, "slope2": rep.slope2, "slope3": rep.slope3,
                    "max_v0_gap": rep.max_v0_gap}),
                pass,
            ))
        }
    }
}

/// Like [`scenario_of`] but a bare domain name needs no weight.
fn scenario_of_domain(ctx: &Ctx, a: &ScenarioArgs) -> Res<Scenario> {
    match (&a.scenario, &a.weight) {
        (Some(name), None) if matches!(name.as_str(), "interval" | "ball3" | "annulus3") => {
            let w = hardy_core::scenarios::WeightSpec::InverseSquareDelta;
            Ok(resolve_scenario(name, Some(&w))?)
        }
        _ => scenario_of(ctx, a),
    }
}

fn mesh_params(ctx: &Ctx, m: &MeshArgs) -> (usize, f64, f64) {
    let c = &ctx.cfg.mesh;
    (m.n.unwrap_or(c.n), m.q.unwrap_or(c.q), m.eps_min.unwrap_or(c.eps_min))
}

fn mesh_cmd(ctx: &Ctx, m: &MeshArgs) -> Res<Output> {
    let s = scenario_of(ctx, &m.sc)?;
    let (n, q, eps) = mesh_params(ctx, m);
    let mesh = make_mesh(&s.domain, &s.weight, n, q, eps)?;
    let rows = mesh.nodes.iter().enumerate().map(|(k, x)| vec![k.to_string(), f(*x)]);
    let js = json!({"scenario": s.name, "n": n, "q": q, "eps_min": eps, "nodes": mesh.nodes.len(),
        "graded": mesh.graded, "dirichlet": mesh.dirichlet, "grading_violation": mesh.grading_violation()});
    Ok(Output::new(format!("mesh-{}-n{n}", s.name), Some(csv("k,x", rows)), js, true))
}

fn eig_cmd(ctx: &Ctx, c: EigCmd) -> Res<Output> {
    match c {
        EigCmd::Bottom { mesh, k, tol } => {
            let s = scenario_of(ctx, &mesh.sc)?;
            let (n, q, eps) = mesh_params(ctx, &mesh);
            let p = scenario_pencil(&s, n, q, eps)?;
            let k = k.unwrap_or(ctx.cfg.spectral.k).min(p.k_diag.len()).max(1);
            let br = eig_bottom(&p, k, tol.unwrap_or(ctx.cfg.spectral.tol))?;
            let bottom = br[0].value;
            let pass = s.lambda0.is_none_or(|l| bottom >= l - 1e-9);
            let js = json!({"scenario": s.name, "weight": s.weight, "n": n, "q": q, "eps_min": eps,
                "lambda0": s.lambda0, "brackets": br, "pass": pass});
            Ok(Output::new(format!("eig-bottom-{}-n{n}", s.name), Some(brackets_csv(&br)), js, pass))
        }
        EigCmd::Count { mesh, threshold, expect } => {
            let s = scenario_of(ctx, &mesh.sc)?;
            let (n, q, eps) = mesh_params(ctx, &mesh);
            let thr = threshold
                .or(ctx.cfg.spectral.threshold)
                .or(s.lambda_inf.map(|l| 0.999 * l))
                .ok_or_else(|| Failure::Usage("no --threshold and no known essential bottom".into()))?;
            let p = scenario_pencil(&s, n, q, eps)?;
            let count = count_below(&p, thr);
            let pass = expect.is_none_or(|e| e == count);
            let row = vec![s.name.clone(), n.to_string(), f(eps), f(thr), count.to_string()];
            Ok(Output::new(
                format!("eig-count-{}-n{n}", s.name),
                Some(csv("scenario,n,eps_min,threshold,count", [row])),
                json!({"scenario": s.name, "n": n, "q": q, "eps_min": eps, "threshold": thr, "count": count, "expect": expect}),
                pass,
            ))
        }
    }
}

fn probe_cmd(ctx: &Ctx, c: ProbeCmd) -> Res<Output> {
    match c {
        ProbeCmd::Ess { sc, eta, windows, tol } => {
            let s = scenario_of(ctx, &sc)?;
            let etas = eta.unwrap_or_else(|| ctx.cfg.quasimode.eta_grid.clone());
            let schedule = match windows {
                Some(l) => WindowSchedule { lengths: l, stop_when_certified: true },
                None => ctx.cfg.quasimode.schedule(),
            };
            let tol = tol.unwrap_or(ctx.cfg.quasimode.tol);
            let mut reports = Vec::new();
            let mut csv_text = String::new();
            let mut pass = true;
            for setup in scenario_frames(&s)? {
                let rep = ess_spectrum_probe(&s.name, &setup, &etas, &schedule, tol)?;
                pass &= rep.summary.iter().all(|x| x.certified);
                let c = rep.to_csv();
                // One header for all frames.
                if csv_text.is_empty() {
                    csv_text.push_str(&c);
                } else {
                    csv_text.extend(c.lines().skip(1).map(|l| format!("{l}\n")));
                }
                reports.push(json_of(&rep));
            }
            Ok(Output::new(format!("probe-ess-{}", s.name), Some(csv_text), json!(reports), pass))
        }
        ProbeCmd::Transfer { sc, eta, ratio, offset, len } => {
            let s = scenario_of(ctx, &sc)?;
            let rho = parse_weight_ratio(&ratio)?;
            let etas = eta.unwrap_or_else(|| vec![0.0, 0.25]);
            let mut rows = Vec::new();
            let mut js = Vec::new();
            let mut pass = true;
            for setup in scenario_frames(&s)? {
                let fr = setup.frame.as_ref();
                let a = fr.w_min() + offset;
                let win = Window::new(a, a + len)?;
                for &e in &etas {
                    let t = transfer_residual(fr, &rho, e, win)?;
                    pass &= t.ratio_w2 <= t.bound_w2 + 1e-6;
                    rows.push(vec![fr.name(), f(t.eta), f(t.lambda), f(t.ratio_w1), f(t.ratio_w2), f(t.bound_w2),
                        f(t.sharp_bound_w2), f(t.sup_rho), f(t.sup_rho_defect)]);
                    js.push(json!({"frame": fr.name(), "window": [win.a, win.b], "transfer": t}));
                }
            }
            Ok(Output::new(
                format!("probe-transfer-{}", s.name),
                Some(csv("frame,eta,lambda,ratio_w1,ratio_w2,bound_w2,sharp_bound_w2,sup_rho,sup_rho_defect", rows)),
                json!({"scenario": s.name, "ratio": rho, "rows": js}),
                pass,
            ))
        }
    }
}

fn growth_cmd(ctx: &Ctx, c: GrowthCmd) -> Res<Output> {
    let g = &ctx.cfg.growth;
    match c {
        GrowthCmd::Sigma { sc, bins, r_max } => {
            let s = scenario_of(ctx, &sc)?;
            let chi = scenario_chi(&s, bins.unwrap_or(g.bins), r_max.unwrap_or(g.r_max))?;
            let curves = volume_growth(&chi)?;
            let js = json!({"scenario": s.name, "sigma": curves.sigma, "subexponential": curves.subexponential,
                "low_confidence": curves.low_confidence, "total": chi.total()});
            Ok(Output::new(format!("growth-sigma-{}", s.name), Some(curves.to_csv()), js, true))
        }
        GrowthCmd::Criterion { sc, a, d, eps, bins, r_max } => {
            let s = scenario_of(ctx, &sc)?;
            let chi = scenario_chi(&s, bins.unwrap_or(g.bins), r_max.unwrap_or(g.r_max))?;
            let row = growth_criterion(&chi, a, d, eps)?;
            let verdict = json_of(&row.verdict);
            let line = vec![f(row.a), f(row.d), f(row.eps), row.b.map(f).unwrap_or_default(),
                verdict.as_str().unwrap_or_default().to_string(), row.extrapolated.to_string()];
            Ok(Output::new(
                format!("growth-criterion-{}", s.name),
                Some(csv("a,d,eps,b,verdict,extrapolated", [line])),
                json!({"scenario": s.name, "row": row}),
                true,
            ))
        }
        GrowthCmd::EpsClass { sc, eps, bins, r_max } => {
            let s = scenario_of(ctx, &sc)?;
            let chi = scenario_chi(&s, bins.unwrap_or(g.bins), r_max.unwrap_or(g.r_max))?;
            let eps = eps.unwrap_or_else(|| g.eps.clone());
            let rows: Vec<_> = eps.iter().map(|&e| eps_exp_check(&chi, e)).collect::<Result<_, Error>>()?;
            Ok(Output::new(
                format!("growth-eps-class-{}", s.name),
                Some(csv("eps,c,verdict", rows.iter().map(|r| vec![f(r.eps), f(r.c), r.verdict.to_string()]))),
                json!({"scenario": s.name, "rows": rows}),
                true,
            ))
        }
    }
}

fn agmon_cmd(ctx: &Ctx, c: AgmonCmd) -> Res<Output> {
    match c {
        AgmonCmd::Distance { sc, x, y } => {
            let s = scenario_of(ctx, &sc)?;
            let fr = AgmonFrame::for_scenario(&s)?;
            let d = agmon_distance(&fr, x, y)?;
            Ok(Output::new(
                format!("agmon-distance-{}", s.name),
                Some(csv("x,y,distance", [vec![f(x), f(y), f(d)]])),
                json!({"scenario": s.name, "x": x, "y": y, "distance": d}),
                true,
            ))
        }
        AgmonCmd::Rates { sc } => {
            let s = scenario_of(ctx, &sc)?;
            let mut rows = Vec::new();
            let mut js = Vec::new();
            let mut pass = true;
            for setup in scenario_frames(&s)? {
                let r = sigma_rates(&setup, &SigmaOptions::default())?;
                pass &= r.brooks_check;
                rows.push(vec![r.frame.clone(), f(r.sigma0), f(r.sigma1), f(r.lambda_inf), r.brooks_check.to_string(),
                    r.equality_check.to_string()]);
                js.push(json_of(&r));
            }
            Ok(Output::new(
                format!("agmon-rates-{}", s.name),
                Some(csv("frame,sigma0,sigma1,lambda_inf,brooks,equality", rows)),
                json!({"scenario": s.name, "frames": js}),
                pass,
            ))
        }
    }
}

fn report_cmd(ctx: &Ctx, r: &ReportArgs) -> Res<bool> {
    let Some(dir) = &ctx.out else {
        return Err(Failure::Usage("report needs --out DIR".into()));
    };
    let mut all = true;
    if !r.bundle_only {
        let ids: Vec<String> = match &r.run {
            Some(v) => v.iter().map(|s| s.trim().to_uppercase()).collect(),
            None => IDS.iter().map(|s| s.to_string()).collect(),
        };
        for id in &ids {
            let res = run_criterion(id, ctx.cfg.seed)?;
            all &= res.pass;
            write_file(dir, &criterion_file(id), &criterion_json(&res))?;
            let mut line = String::new();
            let _ = write!(line, "{} {id} ({:.2}s) {}", if res.pass { "PASS" } else { "FAIL" }, res.seconds, res.summary);
            println!("{line}");
        }
    }
    let bundle = report_bundle(dir)?;
    write_file(dir, "summary.json", &pretty(&bundle))?;
    print!("{}", pretty(&bundle));
    let failed = bundle["failed"].as_u64().unwrap_or(0);
    Ok(all && failed == 0)
}
