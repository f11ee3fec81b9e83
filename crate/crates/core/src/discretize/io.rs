//! Columnar text format for pencils.
//!
//! ```text
//! # scenario: interval-j1
//! # weight: iterated-log-j
//! # frame: false
//! # N: 6
//! # q: 0.5
//! # eps_min: 1e-6
//! # dirichlet: true true
//! # graded: 12 12
//! # left: 1e-6
//! # right: 0.999999
//! # breaks: 0.5
//! node Kdiag Koff Mdiag Moff
//! 2e-6 ...
//! ```
//!
//! `N` counts all mesh nodes; `left` and `right` are the Dirichlet end nodes
//! (absent for natural ends). `Koff`/`Moff` couple a row to the next one and
//! are 0 on the last row. Floats use shortest round-trip formatting.

use std::fmt::Write;

use super::{Mesh, Pencil, PencilMeta};
use crate::error::{Error, Result};

pub fn write_pencil(p: &Pencil) -> String {
    let m = &p.mesh;
    let mut out = String::new();
    let _ = writeln!(out, "# scenario: {}", p.meta.scenario);
    let _ = writeln!(out, "# weight: {}", p.meta.weight);
    let _ = writeln!(out, "# frame: {}", p.meta.frame);
    let _ = writeln!(out, "# N: {}", m.nodes.len());
    let _ = writeln!(out, "# q: {:?}", m.q);
    let _ = writeln!(out, "# eps_min: {:?}", m.eps_min);
    let _ = writeln!(out, "# dirichlet: {} {}", m.dirichlet.0, m.dirichlet.1);
    let _ = writeln!(out, "# graded: {} {}", m.graded.0, m.graded.1);
    if m.dirichlet.0 {
        let _ = writeln!(out, "# left: {:?}", m.nodes[0]);
    }
    if m.dirichlet.1 {
        let _ = writeln!(out, "# right: {:?}", m.nodes[m.nodes.len() - 1]);
    }
    let breaks: Vec<String> = m.breaks.iter().map(|b| format!("{b:?}")).collect();
    let _ = writeln!(out, "# breaks: {}", breaks.join(" "));
    out.push_str("node Kdiag Koff Mdiag Moff\n");
    for (j, x) in m.dof_nodes().iter().enumerate() {
        let ko = p.k_off.get(j).copied().unwrap_or(0.0);
        let mo = p.m_off.get(j).copied().unwrap_or(0.0);
        let _ = writeln!(out, "{x:?} {:?} {ko:?} {:?} {mo:?}", p.k_diag[j], p.m_diag[j]);
    }
    out
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad number '{s}': {e}")))
}

fn flag(s: &str) -> Result<bool> {
    s.trim().parse::<bool>().map_err(|e| Error::Parse(format!("bad flag '{s}': {e}")))
}

pub fn read_pencil(text: &str) -> Result<Pencil> {
    let mut meta = PencilMeta { scenario: String::new(), weight: String::new(), frame: false };
    let (mut q, mut eps, mut n_nodes) = (1.0, 0.0, None);
    let (mut dirichlet, mut left, mut right) = ((false, false), None, None);
    let mut graded = (0, 0);
    let mut breaks = Vec::new();
    let mut rows: Vec<[f64; 5]> = Vec::new();
    let mut saw_columns = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let (key, val) = h.split_once(':').ok_or_else(|| Error::Parse(format!("bad header '{line}'")))?;
            let val = val.trim();
            match key.trim() {
                "scenario" => meta.scenario = val.to_string(),
                "weight" => meta.weight = val.to_string(),
                "frame" => meta.frame = flag(val)?,
                "N" => n_nodes = Some(val.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "q" => q = num(val)?,
                "eps_min" => eps = num(val)?,
                "dirichlet" => {
                    let v: Vec<&str> = val.split_whitespace().collect();
                    if v.len() != 2 {
                        return Err(Error::Parse("dirichlet needs two flags".into()));
                    }
                    dirichlet = (flag(v[0])?, flag(v[1])?);
                }
                "graded" => {
                    let v: Vec<usize> = val
                        .split_whitespace()
                        .map(|x| x.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
                        .collect::<Result<_>>()?;
                    if v.len() != 2 {
                        return Err(Error::Parse("graded needs two counts".into()));
                    }
                    graded = (v[0], v[1]);
                }
                "left" => left = Some(num(val)?),
                "right" => right = Some(num(val)?),
                "breaks" => breaks = val.split_whitespace().map(num).collect::<Result<_>>()?,
                other => return Err(Error::Parse(format!("unknown header key '{other}'"))),
            }
            continue;
        }
        if !saw_columns {
            if line.split_whitespace().collect::<Vec<_>>() != ["node", "Kdiag", "Koff", "Mdiag", "Moff"] {
                return Err(Error::Parse(format!("expected column header, got '{line}'")));
            }
            saw_columns = true;
            continue;
        }
        let v: Vec<f64> = line.split_whitespace().map(num).collect::<Result<_>>()?;
        if v.len() != 5 {
            return Err(Error::Parse(format!("expected 5 columns, got '{line}'")));
        }
        rows.push([v[0], v[1], v[2], v[3], v[4]]);
    }
    if rows.is_empty() {
        return Err(Error::Parse("pencil has no rows".into()));
    }
    let mut nodes = Vec::with_capacity(rows.len() + 2);
    if dirichlet.0 {
        nodes.push(left.ok_or_else(|| Error::Parse("missing left end".into()))?);
    }
    nodes.extend(rows.iter().map(|r| r[0]));
    if dirichlet.1 {
        nodes.push(right.ok_or_else(|| Error::Parse("missing right end".into()))?);
    }
    if let Some(n) = n_nodes {
        if n != nodes.len() {
            return Err(Error::Parse(format!("header N = {n} but {} nodes present", nodes.len())));
        }
    }
    let mut mesh = Mesh::from_nodes(nodes, dirichlet, breaks).map_err(|e| Error::Parse(e.to_string()))?;
    mesh.q = q;
    mesh.eps_min = eps;
    mesh.graded = graded;
    let d = rows.len();
    Ok(Pencil {
        k_diag: rows.iter().map(|r| r[1]).collect(),
        k_off: rows[..d - 1].iter().map(|r| r[2]).collect(),
        m_diag: rows.iter().map(|r| r[3]).collect(),
        m_off: rows[..d - 1].iter().map(|r| r[4]).collect(),
        mesh,
        meta,
    })
}
