//! Named scenarios used by the CLI, the configuration files and the
//! acceptance criteria.

use serde::{Deserialize, Serialize};

use super::{multipolar, Domain, OperatorSpec, Profile, ProfilePair, WeightSpec};
use crate::error::{Error, Result};
use crate::xlog;

/// Which boundary components a boundary frame collects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    /// Every component (both ends of an interval, the sphere of a ball).
    All,
    Inner,
    Outer,
}

/// Coordinates in which a scenario's operator becomes a one-dimensional
/// Schrödinger-type operator near its infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "frame", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrameSpec {
    /// Level-`i` profiles built from `δ/D`; the weight is `J_i` and the
    /// operator is `-Δ - W_{i-1}`.
    Boundary { level: usize, d: f64, component: Component },
    /// The model end of the scenario's exterior domain with `W = C_H/r²`.
    ModelEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub domain: Domain,
    pub op: OperatorSpec,
    pub weight: WeightSpec,
    /// Known bottom of the spectrum, when the theory provides it.
    pub lambda0: Option<f64>,
    /// Known bottom of the essential spectrum.
    pub lambda_inf: Option<f64>,
    pub frames: Vec<FrameSpec>,
    /// Spectral parameter of the scenario divided by that of its frames.
    pub frame_scale: f64,
    /// Profiles whose supersolution construction produces the frame.
    pub pair: Option<ProfilePair>,
    /// Pole configuration for pointwise multipolar scenarios.
    pub poles: Option<Vec<Vec<f64>>>,
}

const NAMES: &[&str] = &[
    "interval-j0",
    "interval-j1",
    "interval-j2",
    "interval-delta2",
    "ball3-j0",
    "ball3-j1",
    "ball3-j2",
    "ball3-delta2",
    "annulus3-delta2",
    "multipolar-2p-n3",
    "multipolar-2p-n4",
    "multipolar-3p-n3",
    "modelend-n3-c0",
    "modelend-n3-c1",
    "power-delta3",
];

pub fn catalog_names() -> &'static [&'static str] {
    NAMES
}

fn base(name: &str, domain: Domain, weight: WeightSpec) -> Scenario {
    Scenario {
        name: name.to_string(),
        domain,
        op: OperatorSpec::laplacian(),
        weight,
        lambda0: None,
        lambda_inf: None,
        frames: vec![],
        frame_scale: 1.0,
        pair: None,
        poles: None,
    }
}

/// Level-`i` scenario `J_i^{-1}(-Δ - W_{i-1})`; `D` is the all-level scale
/// for `i ≥ 1` and `2·sup δ` for `i = 0`.
fn iterated(name: &str, domain: Domain, level: usize, component: Component) -> Result<Scenario> {
    let sup = domain.sup_delta()?;
    let d = if level == 0 { 2.0 * sup } else { xlog::select_d(sup, None, 0.0)?.d };
    let (weight, pair) = if level == 0 {
        (WeightSpec::InverseSquareDelta, ProfilePair::new(Profile::Delta { d }, Profile::One))
    } else {
        (
            WeightSpec::IteratedLogJ { i: level, d },
            ProfilePair::new(Profile::BftU0 { i: level - 1, d }, Profile::BftU1 { i: level - 1, d }),
        )
    };
    let mut s = base(name, domain, weight);
    if level > 0 {
        s.op = OperatorSpec::shifted(WeightSpec::IteratedLogW { i: level - 1, d });
    }
    s.lambda0 = Some(1.0);
    s.lambda_inf = Some(1.0);
    s.frames = vec![FrameSpec::Boundary { level, d, component }];
    s.pair = Some(pair);
    Ok(s)
}

fn delta_squared(name: &str, domain: Domain, frames: Vec<FrameSpec>, lambda0: Option<f64>) -> Scenario {
    let mut s = base(name, domain, WeightSpec::PowerDelta { alpha: 2.0 });
    s.lambda0 = lambda0;
    s.lambda_inf = Some(0.25);
    s.frames = frames;
    s.frame_scale = 0.25;
    s
}

fn multipolar_scenario(name: &str, n: u32, count: usize) -> Result<Scenario> {
    let poles = multipolar::standard_poles(n, count)?;
    let mut s = base(
        name,
        Domain::Exterior { n, r_min: 1e-3, r_max: 1e3, c: 0.0 },
        WeightSpec::Multipolar { poles: poles.clone() },
    );
    s.lambda0 = Some(multipolar::multipolar_eigenvalue(n, count));
    s.lambda_inf = Some(multipolar::multipolar_essential_bottom(n, count));
    s.poles = Some(poles);
    Ok(s)
}

fn model_end(name: &str, c: f64) -> Scenario {
    let n = 3;
    let r_min = if c == 0.0 { 1.0 } else { 2.0 * c };
    let mut s = base(name, Domain::Exterior { n, r_min, r_max: 1e6, c }, WeightSpec::InverseSquareRadius);
    let ch = super::hardy_constant(n);
    if c == 0.0 {
        s.lambda0 = Some(ch);
    }
    s.lambda_inf = Some(ch);
    s.frames = vec![FrameSpec::ModelEnd];
    s.frame_scale = ch;
    s.pair = Some(ProfilePair::new(Profile::Power { p: 2.0 - n as f64 }, Profile::One));
    s
}

/// Look up a catalog scenario by name.
pub fn scenario(name: &str) -> Result<Scenario> {
    let interval = Domain::Interval { len: 1.0 };
    let ball = Domain::Ball { n: 3, radius: 1.0 };
    let annulus = Domain::Annulus { n: 3, inner: 1.0, outer: 2.0 };
    let bframe = |component| FrameSpec::Boundary { level: 0, d: 1.0, component };
    match name {
        "interval-j0" => iterated(name, interval, 0, Component::All),
        "interval-j1" => iterated(name, interval, 1, Component::All),
        "interval-j2" => iterated(name, interval, 2, Component::All),
        "ball3-j0" => iterated(name, ball, 0, Component::Outer),
        "ball3-j1" => iterated(name, ball, 1, Component::Outer),
        "ball3-j2" => iterated(name, ball, 2, Component::Outer),
        "interval-delta2" => Ok(delta_squared(name, interval, vec![bframe(Component::All)], Some(0.25))),
        "ball3-delta2" => Ok(delta_squared(name, ball, vec![bframe(Component::Outer)], Some(0.25))),
        "annulus3-delta2" => Ok(delta_squared(
            name,
            annulus,
            vec![bframe(Component::Inner), bframe(Component::Outer)],
            None,
        )),
        "multipolar-2p-n3" => multipolar_scenario(name, 3, 2),
        "multipolar-2p-n4" => multipolar_scenario(name, 4, 2),
        "multipolar-3p-n3" => multipolar_scenario(name, 3, 3),
        "modelend-n3-c0" => Ok(model_end(name, 0.0)),
        "modelend-n3-c1" => Ok(model_end(name, 1.0)),
        "power-delta3" => {
            let mut s = base(name, interval, WeightSpec::PowerDelta { alpha: 3.0 });
            s.lambda_inf = Some(0.0);
            Ok(s)
        }
        _ => Err(Error::Parameter(format!(
            "unknown scenario '{name}'; known: {}",
            NAMES.join(", ")
        ))),
    }
}
