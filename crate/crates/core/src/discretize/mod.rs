//! Conforming P1 discretization of `λ ∫ W u² dν ≤ q(u)` on graded meshes.
//!
//! `K` discretizes `q(u) = ∫ (a u'² + c u²) dν` and `M` discretizes
//! `∫ W u² dν`, both on the same P1 space, so every discrete Rayleigh
//! quotient is a continuum Rayleigh quotient of a P1 function.

mod io;
mod mesh;

use rayon::prelude::*;
use serde::Serialize;

pub use io::{read_pencil, write_pencil};
pub use mesh::{make_mesh, Mesh};

use crate::error::{param, Error, Result};
use crate::quad;
use crate::scenarios::{build_weight, supersolution_weight, Domain, OperatorSpec, ProfilePair, Scenario, WeightSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PencilMeta {
    pub scenario: String,
    pub weight: String,
    pub frame: bool,
}

/// Symmetric tridiagonal pencil `(K, M)` over the free nodes of `mesh`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pencil {
    pub k_diag: Vec<f64>,
    /// `k_off[j]` couples unknowns `j` and `j + 1`; length `dim - 1`.
    pub k_off: Vec<f64>,
    pub m_diag: Vec<f64>,
    pub m_off: Vec<f64>,
    pub mesh: Mesh,
    pub meta: PencilMeta,
}

impl Pencil {
    pub fn dim(&self) -> usize {
        self.k_diag.len()
    }

    /// Maximum absolute row sum of `K`.
    pub fn k_norm(&self) -> f64 {
        row_norm(&self.k_diag, &self.k_off)
    }

    pub fn m_norm(&self) -> f64 {
        row_norm(&self.m_diag, &self.m_off)
    }

    pub fn apply_k(&self, x: &[f64]) -> Vec<f64> {
        tri_apply(&self.k_diag, &self.k_off, x)
    }

    pub fn apply_m(&self, x: &[f64]) -> Vec<f64> {
        tri_apply(&self.m_diag, &self.m_off, x)
    }

    /// `xᵀKx / xᵀMx`.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply_k(x)) / dot(x, &self.apply_m(x))
    }

    /// Smallest LDLᵀ pivot of `M`; positive iff `M` is positive definite.
    pub fn min_mass_pivot(&self) -> f64 {
        let mut d = self.m_diag[0];
        let mut min = d;
        for j in 1..self.dim() {
            d = self.m_diag[j] - self.m_off[j - 1] * self.m_off[j - 1] / d;
            min = min.min(d);
        }
        min
    }
}

fn row_norm(d: &[f64], o: &[f64]) -> f64 {
    (0..d.len())
        .map(|j| {
            let l = if j > 0 { o[j - 1].abs() } else { 0.0 };
            let r = if j < o.len() { o[j].abs() } else { 0.0 };
            d[j].abs() + l + r
        })
        .fold(0.0, f64::max)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn tri_apply(d: &[f64], o: &[f64], x: &[f64]) -> Vec<f64> {
    let n = d.len();
    (0..n)
        .map(|j| {
            let mut s = d[j] * x[j];
            if j > 0 {
                s += o[j - 1] * x[j - 1];
            }
            if j + 1 < n {
                s += o[j] * x[j + 1];
            }
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Row-sum lumping of `M`. Breaks the lower-bound property; off by default.
    pub lumped: bool,
}

/// Local `(K, M)` 2×2 blocks stored as `[k00, k01, k11, m00, m01, m11]`.
type Local = [f64; 6];

/// Assemble a Sturm–Liouville pencil from densities with respect to `ds`:
/// `K = ∫ stiff u'v' + pot uv`, `M = ∫ mass uv`, plus point terms `c·u(p)v(p)`.
pub fn assemble_sl<S, P, W>(
    mesh: &Mesh,
    stiff: S,
    pot: P,
    mass: W,
    points: &[(f64, f64)],
    opts: AssemblyOptions,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)>
where
    S: Fn(f64) -> Result<f64> + Sync,
    P: Fn(f64) -> Result<f64> + Sync,
    W: Fn(f64) -> Result<f64> + Sync,
{
    let (gx, gw) = quad::gl8();
    let locals: Vec<Local> = (0..mesh.elements())
        .into_par_iter()
        .map(|e| -> Result<Local> {
            let (x0, x1) = (mesh.nodes[e], mesh.nodes[e + 1]);
            let h = x1 - x0;
            let mut loc = [0.0; 6];
            for (a, b) in mesh.pieces(e) {
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for (xi, wi) in gx.iter().zip(gw) {
                    let s = mid + half * xi;
                    let w = wi * half;
                    let (p0, p1) = ((x1 - s) / h, (s - x0) / h);
                    let (st, po, ma) = (stiff(s)?, pot(s)?, mass(s)?);
                    if !(st.is_finite() && po.is_finite() && ma.is_finite()) {
                        return Err(Error::Evaluation(format!("non-finite coefficient at {s}")));
                    }
                    let sk = w * st / (h * h);
                    loc[0] += sk + w * po * p0 * p0;
                    loc[1] += -sk + w * po * p0 * p1;
                    loc[2] += sk + w * po * p1 * p1;
                    loc[3] += w * ma * p0 * p0;
                    loc[4] += w * ma * p0 * p1;
                    loc[5] += w * ma * p1 * p1;
                }
            }
            if opts.lumped {
                loc[3] += loc[4];
                loc[5] += loc[4];
                loc[4] = 0.0;
            }
            Ok(loc)
        })
        .collect::<Result<_>>()?;

    let n = mesh.dim();
    let (mut kd, mut ko, mut md, mut mo) = (vec![0.0; n], vec![0.0; n.saturating_sub(1)], vec![0.0; n], vec![0.0; n.saturating_sub(1)]);
    for (e, loc) in locals.iter().enumerate() {
        let (i, j) = (mesh.dof(e), mesh.dof(e + 1));
        if let Some(i) = i {
            kd[i] += loc[0];
            md[i] += loc[3];
        }
        if let Some(j) = j {
            kd[j] += loc[2];
            md[j] += loc[5];
        }
        if let (Some(i), Some(_)) = (i, j) {
            ko[i] += loc[1];
            mo[i] += loc[4];
        }
    }
    for &(p, c) in points {
        let e = match mesh.nodes.windows(2).position(|w| p >= w[0] && p <= w[1]) {
            Some(e) => e,
            None => continue,
        };
        let (x0, x1) = (mesh.nodes[e], mesh.nodes[e + 1]);
        let (p0, p1) = ((x1 - p) / (x1 - x0), (p - x0) / (x1 - x0));
        let (i, j) = (mesh.dof(e), mesh.dof(e + 1));
        if let Some(i) = i {
            kd[i] += c * p0 * p0;
        }
        if let Some(j) = j {
            kd[j] += c * p1 * p1;
        }
        if let (Some(i), Some(_)) = (i, j) {
            ko[i] += c * p0 * p1;
        }
    }
    Ok((kd, ko, md, mo))
}

pub(crate) fn finish(parts: (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>), mesh: &Mesh, meta: PencilMeta) -> Result<Pencil> {
    let (k_diag, k_off, m_diag, m_off) = parts;
    let p = Pencil { k_diag, k_off, m_diag, m_off, mesh: mesh.clone(), meta };
    let piv = p.min_mass_pivot();
    if !(piv > 0.0) {
        return Err(Error::Indefinite(format!("mass matrix pivot {piv}")));
    }
    Ok(p)
}

/// Pencil of `q(u)` against `∫ W u² dν` with Dirichlet conditions at the
/// mesh's Dirichlet ends.
pub fn assemble_pencil(dom: &Domain, op: &OperatorSpec, weight: &WeightSpec, mesh: &Mesh) -> Result<Pencil> {
    assemble_pencil_with(dom, op, weight, mesh, AssemblyOptions::default())
}

pub fn assemble_pencil_with(
    dom: &Domain,
    op: &OperatorSpec,
    weight: &WeightSpec,
    mesh: &Mesh,
    opts: AssemblyOptions,
) -> Result<Pencil> {
    op.validate()?;
    let w = build_weight(dom, weight)?;
    let shift = op.shift.as_ref().map(|s| build_weight(dom, s)).transpose()?;
    let parts = assemble_sl(
        mesh,
        |s| Ok(op.coefficient(dom, s).v * dom.measure(s).v),
        |s| {
            let sh = match &shift {
                Some(sw) => sw.value(s)?,
                None => 0.0,
            };
            Ok((op.potential - sh) * dom.measure(s).v)
        },
        |s| Ok(w.value(s)? * dom.measure(s).v),
        &[],
        opts,
    )?;
    let meta = PencilMeta { scenario: String::new(), weight: weight.name().into(), frame: false };
    finish(parts, mesh, meta)
}

/// Pencil of `L = u_{1/2}^{-1}(W^{-1}P - 1)u_{1/2}` on `L²(u_{1/2}² W dν)`:
/// stiffness `a u_{1/2}² m`, potential `(½(V0+V1) + W(u0,u1) - W) u_{1/2}² m`,
/// plus the jump of `u_{1/2}'` at ridge points.
pub fn assemble_groundstate_frame(
    dom: &Domain,
    pair: &ProfilePair,
    op: &OperatorSpec,
    weight: &WeightSpec,
    mesh: &Mesh,
) -> Result<Pencil> {
    op.validate()?;
    let w = build_weight(dom, weight)?;
    let degenerate = (0..mesh.elements()).all(|e| {
        let s = 0.5 * (mesh.nodes[e] + mesh.nodes[e + 1]);
        matches!(supersolution_weight(pair, op, dom, s), Ok((v, _)) if v == 0.0)
    });
    if degenerate {
        return param("W(u0, u1) vanishes on the mesh; the frame is undefined");
    }
    let density = |s: f64| -> Result<(f64, f64, f64)> {
        let (u0, u1) = pair.jets(dom, s)?;
        let h2 = u0.v * u1.v;
        let v0 = op.apply(dom, s, u0)? / u0.v;
        let v1 = op.apply(dom, s, u1)? / u1.v;
        let (wsup, _) = supersolution_weight(pair, op, dom, s)?;
        let m = dom.measure(s).v;
        let wv = w.value(s)?;
        Ok((op.coefficient(dom, s).v * h2 * m, (0.5 * (v0 + v1) + wsup - wv) * h2 * m, wv * h2 * m))
    };
    let mut points = Vec::new();
    for &p in &mesh.breaks {
        let eta = 1e-9 * dom.diameter();
        let left = (pair.u0.jet(dom, p - eta)? * pair.u1.jet(dom, p - eta)?).sqrt();
        let right = (pair.u0.jet(dom, p + eta)? * pair.u1.jet(dom, p + eta)?).sqrt();
        let jump = left.d - right.d;
        if jump != 0.0 {
            let (u0, u1) = pair.jets(dom, p)?;
            let h = (u0.v * u1.v).sqrt();
            points.push((p, op.coefficient(dom, p).v * dom.measure(p).v * h * jump));
        }
    }
    let parts = assemble_sl(
        mesh,
        |s| density(s).map(|d| d.0),
        |s| density(s).map(|d| d.1),
        |s| density(s).map(|d| d.2),
        &points,
        AssemblyOptions::default(),
    )?;
    let meta = PencilMeta { scenario: String::new(), weight: weight.name().into(), frame: true };
    finish(parts, mesh, meta)
}

/// Mesh and pencil for a catalog scenario.
pub fn scenario_pencil(sc: &Scenario, n: usize, q: f64, eps_min: f64) -> Result<Pencil> {
    if sc.poles.is_some() {
        return Err(Error::NotApplicable(format!(
            "{} is a pointwise multipolar scenario; use the multipolar checks",
            sc.name
        )));
    }
    let mesh = make_mesh(&sc.domain, &sc.weight, n, q, eps_min)?;
    let mut p = assemble_pencil(&sc.domain, &sc.op, &sc.weight, &mesh)?;
    p.meta.scenario = sc.name.clone();
    Ok(p)
}

/// Ground-state frame of a catalog scenario on the scenario's own mesh.
pub fn scenario_frame_pencil(sc: &Scenario, n: usize, q: f64, eps_min: f64) -> Result<Pencil> {
    let pair = sc
        .pair
        .ok_or_else(|| Error::NotApplicable(format!("{} has no profile pair", sc.name)))?;
    let mesh = make_mesh(&sc.domain, &sc.weight, n, q, eps_min)?;
    let mut p = assemble_groundstate_frame(&sc.domain, &pair, &sc.op, &sc.weight, &mesh)?;
    p.meta.scenario = sc.name.clone();
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{scenario, Profile};

    const INTERVAL: Domain = Domain::Interval { len: 1.0 };

    fn p1_eval(mesh: &Mesh, x: &[f64], s: f64) -> (f64, f64) {
        let full: Vec<f64> = (0..mesh.nodes.len()).map(|k| mesh.dof(k).map_or(0.0, |j| x[j])).collect();
        let e = mesh.nodes.windows(2).position(|w| s >= w[0] && s <= w[1]).unwrap();
        let (x0, x1) = (mesh.nodes[e], mesh.nodes[e + 1]);
        let d = (full[e + 1] - full[e]) / (x1 - x0);
        (full[e] + d * (s - x0), d)
    }

    #[test]
    fn pencil_is_symmetric_with_positive_mass() {
        for name in ["interval-j1", "ball3-j0", "annulus3-delta2", "modelend-n3-c1"] {
            let sc = scenario(name).unwrap();
            let p = scenario_pencil(&sc, 120, 0.6, 1e-6).unwrap();
            assert!(p.min_mass_pivot() > 0.0, "{name}");
            assert_eq!(p.k_off.len(), p.dim() - 1);
        }
    }

    #[test]
    fn rayleigh_quotient_is_continuum_quotient_of_interpolant() {
        let sc = scenario("interval-j1").unwrap();
        let p = scenario_pencil(&sc, 40, 0.5, 1e-4).unwrap();
        let x: Vec<f64> = p.mesh.dof_nodes().iter().map(|s| (3.0 * s).sin() + s * s).collect();
        let w = build_weight(&sc.domain, &sc.weight).unwrap();
        let shift = build_weight(&sc.domain, sc.op.shift.as_ref().unwrap()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for e in 0..p.mesh.elements() {
            for (a, b) in p.mesh.pieces(e) {
                num += quad::integrate(
                    |s| {
                        let (u, du) = p1_eval(&p.mesh, &x, s);
                        du * du - shift.value(s).unwrap() * u * u
                    },
                    a,
                    b,
                    16,
                );
                den += quad::integrate(
                    |s| {
                        let (u, _) = p1_eval(&p.mesh, &x, s);
                        w.value(s).unwrap() * u * u
                    },
                    a,
                    b,
                    16,
                );
            }
        }
        let xk = dot(&x, &p.apply_k(&x));
        let xm = dot(&x, &p.apply_m(&x));
        assert!((xk - num).abs() < 1e-10 * num.abs(), "{xk} vs {num}");
        assert!((xm - den).abs() < 1e-10 * den, "{xm} vs {den}");
    }

    #[test]
    fn frame_potential_vanishes_for_distance_pair() {
        let pair = ProfilePair::new(Profile::Delta { d: 1.0 }, Profile::One);
        let op = OperatorSpec::laplacian();
        for s in [0.01, 0.2, 0.45, 0.7, 0.99] {
            let (u0, u1) = pair.jets(&INTERVAL, s).unwrap();
            let v = 0.5 * (op.apply(&INTERVAL, s, u0).unwrap() / u0.v + op.apply(&INTERVAL, s, u1).unwrap() / u1.v)
                + supersolution_weight(&pair, &op, &INTERVAL, s).unwrap().0
                - build_weight(&INTERVAL, &WeightSpec::InverseSquareDelta).unwrap().value(s).unwrap();
            assert!(v.abs() < 1e-9 / (s * (1.0 - s)), "{s} {v}");
        }
    }

    #[test]
    fn equal_profiles_are_rejected() {
        let mesh = make_mesh(&INTERVAL, &WeightSpec::Unit, 20, 1.0, 1e-4).unwrap();
        let pair = ProfilePair::new(Profile::Exp { k: 1.0 }, Profile::Exp { k: 1.0 });
        assert!(assemble_groundstate_frame(&INTERVAL, &pair, &OperatorSpec::laplacian(), &WeightSpec::Unit, &mesh).is_err());
    }

    #[test]
    fn multipolar_scenarios_have_no_pencil() {
        let sc = scenario("multipolar-2p-n3").unwrap();
        assert!(matches!(scenario_pencil(&sc, 50, 1.0, 1e-4), Err(Error::NotApplicable(_))));
    }
}
