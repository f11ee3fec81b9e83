use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::scenarios::{Domain, WeightSpec};

/// Nodes of a P1 mesh in the radial coordinate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    /// Strictly increasing, first and last included.
    pub nodes: Vec<f64>,
    pub q: f64,
    pub eps_min: f64,
    /// Dirichlet condition at the first and last node.
    pub dirichlet: (bool, bool),
    /// Points where the coefficients lose smoothness; element quadrature splits there.
    pub breaks: Vec<f64>,
    /// Number of geometrically graded elements at each end.
    pub graded: (usize, usize),
}

impl Mesh {
    pub fn from_nodes(nodes: Vec<f64>, dirichlet: (bool, bool), breaks: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return param("a mesh needs at least two nodes");
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return param("mesh nodes must be finite and strictly increasing");
        }
        let m = Self { nodes, q: 1.0, eps_min: 0.0, dirichlet, breaks, graded: (0, 0) };
        if m.dim() == 0 {
            return param("mesh has no free nodes");
        }
        Ok(m)
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Index of the first free node.
    pub fn first_dof(&self) -> usize {
        usize::from(self.dirichlet.0)
    }

    /// Number of unknowns.
    pub fn dim(&self) -> usize {
        self.nodes.len() - usize::from(self.dirichlet.0) - usize::from(self.dirichlet.1)
    }

    /// Unknown index of node `k`, `None` on Dirichlet nodes.
    pub fn dof(&self, k: usize) -> Option<usize> {
        let last = self.nodes.len() - 1;
        if (k == 0 && self.dirichlet.0) || (k == last && self.dirichlet.1) {
            None
        } else {
            Some(k - self.first_dof())
        }
    }

    /// Coordinates of the unknowns.
    pub fn dof_nodes(&self) -> &[f64] {
        let end = self.nodes.len() - usize::from(self.dirichlet.1);
        &self.nodes[self.first_dof()..end]
    }

    /// Sub-intervals of element `e` after splitting at interior break points.
    pub fn pieces(&self, e: usize) -> Vec<(f64, f64)> {
        let (a, b) = (self.nodes[e], self.nodes[e + 1]);
        let mut cuts = vec![a];
        cuts.extend(self.breaks.iter().copied().filter(|&p| p > a && p < b));
        cuts.push(b);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Bisect every element; the P1 spaces are nested.
    pub fn refine(&self) -> Mesh {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().expect("nonempty"));
        Mesh { nodes, graded: (2 * self.graded.0, 2 * self.graded.1), ..self.clone() }
    }

    /// Largest deviation of adjacent element-length ratios from `[q, 1/q]`
    /// inside the graded zones, beyond `1e-12` plus the rounding error of
    /// the node coordinates themselves.
    pub fn grading_violation(&self) -> f64 {
        let h: Vec<f64> = self.nodes.windows(2).map(|w| w[1] - w[0]).collect();
        // Relative error of each length from rounding its two endpoints.
        let err: Vec<f64> =
            self.nodes.windows(2).zip(&h).map(|(w, h)| f64::EPSILON * (w[0].abs() + w[1].abs()) / h).collect();
        let (lo, hi) = (self.q, 1.0 / self.q);
        let zone = |from: usize, to: usize| {
            (from + 1..to).fold(0.0_f64, |acc, k| {
                let r = h[k] / h[k - 1];
                let slack = 1e-12 + r * (err[k] + err[k - 1]);
                acc.max(lo - slack - r).max(r - hi - slack)
            })
        };
        let (gl, gr) = self.graded;
        zone(0, gl).max(zone(h.len() - gr, h.len()))
    }
}

#[derive(Debug, Clone, Copy)]
struct End {
    singular: bool,
    dirichlet: bool,
}

fn ends(dom: &Domain, weight: &WeightSpec) -> (End, End) {
    let b = End { singular: weight.singular_at_boundary(), dirichlet: true };
    match dom {
        Domain::Ball { .. } => {
            let o = weight.singular_at_origin();
            (End { singular: o, dirichlet: o }, b)
        }
        _ => (b, b),
    }
}

/// Mesh graded toward the singular ends of `weight` on `dom`.
///
/// A singular end is truncated at distance `eps_min` with a Dirichlet
/// condition; from there, element lengths grow by `1/q` until they reach the
/// uniform spacing of the middle zone. Exterior domains get log-uniform nodes.
pub fn make_mesh(dom: &Domain, weight: &WeightSpec, n: usize, q: f64, eps_min: f64) -> Result<Mesh> {
    dom.validate()?;
    if n < 3 {
        return param("need at least 3 nodes");
    }
    if !(q > 0.0 && q <= 1.0) {
        return param(format!("grading ratio {q} outside (0, 1]"));
    }
    let breaks: Vec<f64> = dom.ridge_points();
    if let Domain::Exterior { r_min, r_max, .. } = *dom {
        let (a, b) = (r_min.ln(), r_max.ln());
        let mut nodes: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
        nodes[0] = r_min;
        nodes[n - 1] = r_max;
        return Ok(Mesh { nodes, q: 1.0, eps_min: 0.0, dirichlet: (true, true), breaks: vec![], graded: (0, 0) });
    }
    if !(eps_min > 0.0 && eps_min < 1e-2 * dom.diameter()) {
        return param(format!("eps_min = {eps_min} must lie in (0, 1e-2·diameter)"));
    }
    let (lo, hi) = dom.bounds();
    let (le, re) = ends(dom, weight);
    let elems = n - 1;
    let len = hi - lo;
    let sides = usize::from(le.singular) + usize::from(re.singular);
    let eps = eps_min;

    // Offsets of the graded nodes from a singular boundary point.
    let m = if sides == 0 || q == 1.0 {
        0
    } else {
        let mut best = None;
        let mut m = 1;
        loop {
            let reach = eps * q.powi(-(m as i32));
            if sides * m >= elems || sides as f64 * reach >= len {
                break;
            }
            let h_u = (len - sides as f64 * reach) / (elems - sides * m) as f64;
            let h_last = reach * (1.0 - q);
            if h_u >= h_last {
                best = Some(m);
            }
            m += 1;
        }
        best.ok_or_else(|| {
            Error::Infeasible(format!("{n} nodes cannot honor eps_min = {eps} with grading q = {q}"))
        })?
    };
    let graded: Vec<f64> = (0..=m).map(|k| eps * q.powi(-(k as i32))).collect();

    let mut nodes = Vec::with_capacity(n);
    let start = if le.singular {
        nodes.extend(graded.iter().map(|d| lo + d));
        lo + graded[m]
    } else {
        nodes.push(lo);
        lo
    };
    let end = if re.singular { hi - graded[m] } else { hi };
    let uniform = elems - sides * m;
    for j in 1..uniform {
        // Fill symmetrically so mirror-symmetric domains get mirror-symmetric nodes.
        let t = j as f64 / uniform as f64;
        nodes.push(if t <= 0.5 { start + (end - start) * t } else { end - (end - start) * (1.0 - t) });
    }
    if re.singular {
        nodes.extend(graded.iter().rev().map(|d| hi - d));
    } else {
        nodes.push(hi);
    }
    debug_assert_eq!(nodes.len(), n);
    let breaks = breaks.into_iter().filter(|&p| p > nodes[0] && p < nodes[n - 1]).collect();
    let graded = (if le.singular { m } else { 0 }, if re.singular { m } else { 0 });
    let mesh = Mesh { nodes, q, eps_min: eps, dirichlet: (le.dirichlet, re.dirichlet), breaks, graded };
    if mesh.nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Infeasible("mesh construction produced non-increasing nodes".into()));
    }
    Ok(mesh)
}
