//! Generalized symmetric tridiagonal eigenproblems `Kx = λMx` by Sylvester
//! inertia: the number of negative pivots of `K - λM` equals the number of
//! eigenvalues below `λ` when `M` is positive definite.

use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::{dot, Pencil};
use crate::error::{param, Error, Result};

/// Smallest admissible relative bisection tolerance.
pub const MIN_TOL: f64 = 1e-13;
/// Bisection steps allowed per eigenvalue.
pub const BISECTION_CAP: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inertia {
    /// Eigenvalues strictly below `λ` of the perturbed pencil.
    pub count: usize,
    /// Exact-zero pivots replaced by `eta`.
    pub perturbed: usize,
    pub eta: f64,
}

fn sturm(p: &Pencil, lambda: f64, eta: f64) -> (usize, usize) {
    let n = p.dim();
    let mut count = 0;
    let mut perturbed = 0;
    let mut d = 0.0;
    for j in 0..n {
        let t = p.k_diag[j] - lambda * p.m_diag[j];
        d = if j == 0 {
            t
        } else {
            let o = p.k_off[j - 1] - lambda * p.m_off[j - 1];
            t - o * o / d
        };
        if d == 0.0 {
            d = eta;
            perturbed += 1;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    (count, perturbed)
}

fn pivot_eta(p: &Pencil) -> f64 {
    let e = 1e-14 * p.k_norm();
    if e > 0.0 {
        e
    } else {
        f64::MIN_POSITIVE
    }
}

/// Number of eigenvalues strictly below `lambda`; zero pivots become
/// `1e-14·‖K‖`.
pub fn inertia(p: &Pencil, lambda: f64) -> Inertia {
    let eta = pivot_eta(p);
    let (count, perturbed) = sturm(p, lambda, eta);
    Inertia { count, perturbed, eta }
}

pub fn count_below(p: &Pencil, threshold: f64) -> usize {
    inertia(p, threshold).count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenBracket {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    /// Bracket midpoint.
    pub value: f64,
    /// Eigenvalues found in a slightly widened bracket.
    pub multiplicity_hint: usize,
}

fn bisect(p: &Pencil, j: usize, tol: f64, eta: f64) -> Result<EigenBracket> {
    let count = |x: f64| sturm(p, x, eta).0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut guard = 0;
    if count(lo) > j {
        lo = -1.0;
        while count(lo) > j {
            lo *= 2.0;
            guard += 1;
            if guard > 2100 {
                return Err(Error::IterationCap { cap: guard, lower: lo, upper: hi });
            }
        }
    }
    hi = hi.max(lo + 1.0);
    while count(hi) <= j {
        hi *= 2.0;
        guard += 1;
        if guard > 2100 || !hi.is_finite() {
            return Err(Error::IterationCap { cap: guard, lower: lo, upper: hi });
        }
    }
    // Absolute floor so that an exact zero eigenvalue terminates.
    let floor = tol * 1e-12 * (p.k_norm() / p.m_norm()).max(f64::MIN_POSITIVE);
    let mut steps = 0;
    while hi - lo > (tol * lo.abs().max(hi.abs())).max(floor) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
        if steps >= BISECTION_CAP {
            return Err(Error::IterationCap { cap: BISECTION_CAP, lower: lo, upper: hi });
        }
    }
    let width = (hi - lo).max(tol * hi.abs().max(lo.abs()));
    let mult = count(hi + 10.0 * width) - count(lo - 10.0 * width);
    Ok(EigenBracket { index: j, lower: lo, upper: hi, value: 0.5 * (lo + hi), multiplicity_hint: mult.max(1) })
}

fn check_query(p: &Pencil, k: usize, tol: f64) -> Result<()> {
    if k == 0 || k > p.dim() {
        return param(format!("k = {k} outside 1..={}", p.dim()));
    }
    if !(tol >= MIN_TOL) {
        return param(format!("tol = {tol} below {MIN_TOL}"));
    }
    Ok(())
}

/// The `k` smallest eigenvalues, ascending and with multiplicity, each
/// bracketed to relative width `tol`.
pub fn eig_bottom(p: &Pencil, k: usize, tol: f64) -> Result<Vec<EigenBracket>> {
    check_query(p, k, tol)?;
    let eta = pivot_eta(p);
    (0..k).into_par_iter().map(|j| bisect(p, j, tol, eta)).collect()
}

/// Eigenvalue with a given index.
pub fn eig_index(p: &Pencil, j: usize, tol: f64) -> Result<EigenBracket> {
    check_query(p, j + 1, tol)?;
    bisect(p, j, tol, pivot_eta(p))
}

/// Smallest eigenvalue.
pub fn bottom(p: &Pencil, tol: f64) -> Result<f64> {
    Ok(eig_index(p, 0, tol)?.value)
}

/// CSV with columns `index,lower,upper,value,multiplicity_hint`.
pub fn brackets_csv(b: &[EigenBracket]) -> String {
    let mut s = String::from("index,lower,upper,value,multiplicity_hint\n");
    for e in b {
        s.push_str(&format!("{},{:?},{:?},{:?},{}\n", e.index, e.lower, e.upper, e.value, e.multiplicity_hint));
    }
    s
}

/// Solve a general tridiagonal system with partial pivoting.
/// `sub[j]` is entry `(j+1, j)`, `sup[j]` is `(j, j+1)`.
pub(crate) fn tridiag_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    du.push(0.0);
    let mut dl = sub.to_vec();
    let mut du2 = vec![0.0; n];
    let mut b = rhs.to_vec();
    for j in 0..n.saturating_sub(1) {
        if d[j].abs() >= dl[j].abs() {
            if d[j] == 0.0 {
                return None;
            }
            let f = dl[j] / d[j];
            d[j + 1] -= f * du[j];
            b[j + 1] -= f * b[j];
            dl[j] = 0.0;
        } else {
            let f = d[j] / dl[j];
            d[j] = dl[j];
            let t = d[j + 1];
            d[j + 1] = du[j] - f * t;
            du2[j] = du[j + 1];
            du[j + 1] *= -f;
            du[j] = t;
            b.swap(j, j + 1);
            b[j + 1] -= f * b[j];
        }
    }
    if d[n - 1] == 0.0 {
        return None;
    }
    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let mut s = b[j];
        if j + 1 < n {
            s -= du[j] * x[j + 1];
        }
        if j + 2 < n {
            s -= du2[j] * x[j + 2];
        }
        x[j] = s / d[j];
    }
    Some(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenVector {
    /// Unit `M`-norm, `Σx > 0`.
    pub x: Vec<f64>,
    /// Rayleigh quotient of `x`.
    pub value: f64,
    /// `‖Kx - λMx‖ / ‖Kx‖`.
    pub residual: f64,
    pub multiplicity: usize,
    pub warning: Option<String>,
}

/// Eigenvector for an eigenvalue `lambda` by shifted inverse iteration.
pub fn eigvec(p: &Pencil, lambda: f64) -> Result<EigenVector> {
    let n = p.dim();
    let mut sigma = lambda;
    let sub: Vec<f64> = p.k_off.iter().zip(&p.m_off).map(|(k, m)| k - sigma * m).collect();
    let mut diag: Vec<f64> = p.k_diag.iter().zip(&p.m_diag).map(|(k, m)| k - sigma * m).collect();
    let mut x: Vec<f64> = (0..n).map(|j| 1.0 + 0.01 * ((j * 7919) % 13) as f64).collect();
    let m_norm = |v: &[f64]| dot(v, &p.apply_m(v)).sqrt();
    let (mut value, mut residual) = (lambda, f64::INFINITY);
    for _ in 0..60 {
        let rhs = p.apply_m(&x);
        let y = match tridiag_solve(&sub, &diag, &sub, &rhs) {
            Some(y) => y,
            None => {
                sigma += 1e-12 * sigma.abs().max(1e-300);
                diag = p.k_diag.iter().zip(&p.m_diag).map(|(k, m)| k - sigma * m).collect();
                continue;
            }
        };
        let nrm = m_norm(&y);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::NoConvergence("inverse iteration produced a non-finite vector".into()));
        }
        x = y.iter().map(|v| v / nrm).collect();
        let kx = p.apply_k(&x);
        let mx = p.apply_m(&x);
        value = dot(&x, &kx);
        let r: f64 = kx.iter().zip(&mx).map(|(a, b)| (a - value * b).powi(2)).sum::<f64>().sqrt();
        let kn = dot(&kx, &kx).sqrt();
        residual = if kn > 0.0 { r / kn } else { r };
        if residual <= 1e-8 {
            break;
        }
    }
    if residual > 1e-8 {
        return Err(Error::NoConvergence(format!("inverse iteration residual {residual:e} after 60 steps")));
    }
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let w = 1e-6 * value.abs().max(1e-12);
    let multiplicity = count_below(p, value + w) - count_below(p, value - w);
    let warning = (multiplicity > 1)
        .then(|| format!("{multiplicity} eigenvalues within {w:e} of {value}; returned one vector of the cluster"));
    Ok(EigenVector { x, value, residual, multiplicity, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_pencil, make_mesh, scenario_pencil, Mesh, PencilMeta};
    use crate::scenarios::{scenario, Domain, OperatorSpec, WeightSpec};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn dense(d: &[f64], o: &[f64]) -> DMatrix<f64> {
        let n = d.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                d[i]
            } else if i + 1 == j {
                o[i]
            } else if j + 1 == i {
                o[j]
            } else {
                0.0
            }
        })
    }

    /// Dense generalized eigenvalues through `L⁻¹ K L⁻ᵀ`.
    fn dense_oracle(p: &Pencil) -> Vec<f64> {
        let k = dense(&p.k_diag, &p.k_off);
        let m = dense(&p.m_diag, &p.m_off);
        let l = m.cholesky().expect("M positive definite").l();
        let li = l.clone().try_inverse().unwrap();
        let a = &li * k * li.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    fn raw_pencil(kd: Vec<f64>, ko: Vec<f64>, md: Vec<f64>, mo: Vec<f64>) -> Pencil {
        let n = kd.len();
        let nodes: Vec<f64> = (0..n + 2).map(|k| k as f64).collect();
        Pencil {
            k_diag: kd,
            k_off: ko,
            m_diag: md,
            m_off: mo,
            mesh: Mesh::from_nodes(nodes, (true, true), vec![]).unwrap(),
            meta: PencilMeta { scenario: "raw".into(), weight: "unit".into(), frame: false },
        }
    }

    fn free_laplacian(n: usize) -> (Pencil, f64) {
        let dom = Domain::Interval { len: 1.0 };
        let mesh = make_mesh(&dom, &WeightSpec::Unit, n + 2, 1.0, 1e-4).unwrap();
        let p = assemble_pencil(&dom, &OperatorSpec::laplacian(), &WeightSpec::Unit, &mesh).unwrap();
        (p, 1.0 / (n + 1) as f64)
    }

    fn closed_form(k: usize, n: usize, h: f64) -> f64 {
        let th = k as f64 * std::f64::consts::PI / (n + 1) as f64;
        6.0 / (h * h) * (1.0 - th.cos()) / (2.0 + th.cos())
    }

    #[test]
    fn uniform_pencil_matches_closed_form_and_dense() {
        let (p, h) = free_laplacian(10);
        let ev = eig_bottom(&p, 10, 1e-13).unwrap();
        let oracle = dense_oracle(&p);
        for (j, e) in ev.iter().enumerate() {
            let c = closed_form(j + 1, 10, h);
            assert!((e.value - c).abs() < 1e-12 * c, "{j}: {} vs {c}", e.value);
            assert!((e.value - oracle[j]).abs() < 1e-11 * c);
            assert_eq!(e.multiplicity_hint, 1);
        }
    }

    #[test]
    fn inertia_examples() {
        let (p, h) = free_laplacian(10);
        assert_eq!(inertia(&p, -1.0).count, 0);
        let mid = 0.5 * (closed_form(1, 10, h) + closed_form(2, 10, h));
        assert_eq!(inertia(&p, mid).count, 1);
        assert_eq!(inertia(&p, 1e12).count, 10);
    }

    #[test]
    fn inertia_jumps_by_multiplicity() {
        // Two decoupled copies of the same block give double eigenvalues.
        let (p, h) = free_laplacian(5);
        let mut kd = p.k_diag.clone();
        kd.extend(&p.k_diag);
        let mut ko = p.k_off.clone();
        ko.push(0.0);
        ko.extend(&p.k_off);
        let mut md = p.m_diag.clone();
        md.extend(&p.m_diag);
        let mut mo = p.m_off.clone();
        mo.push(0.0);
        mo.extend(&p.m_off);
        let q = raw_pencil(kd, ko, md, mo);
        let l1 = closed_form(1, 5, h);
        assert_eq!(count_below(&q, l1 * (1.0 + 1e-9)) - count_below(&q, l1 * (1.0 - 1e-9)), 2);
        let ev = eig_bottom(&q, 2, 1e-12).unwrap();
        assert_eq!(ev[0].multiplicity_hint, 2);
        let v = eigvec(&q, ev[0].value).unwrap();
        assert!(v.warning.is_some());
    }

    #[test]
    fn full_spectrum_sums_to_generalized_trace() {
        let sc = scenario("interval-j1").unwrap();
        let p = scenario_pencil(&sc, 30, 0.5, 1e-3).unwrap();
        let ev = eig_bottom(&p, p.dim(), 1e-13).unwrap();
        let k = dense(&p.k_diag, &p.k_off);
        let m = dense(&p.m_diag, &p.m_off);
        let trace = m.lu().solve(&k).unwrap().trace();
        let sum: f64 = ev.iter().map(|e| e.value).sum();
        assert!((sum - trace).abs() < 1e-9 * trace.abs(), "{sum} vs {trace}");
    }

    #[test]
    fn interval_dirichlet_laplacian_approaches_pi_squared() {
        let dom = Domain::Interval { len: 1.0 };
        let mesh = make_mesh(&dom, &WeightSpec::Unit, 101, 1.0, 1e-4).unwrap();
        let p = assemble_pencil(&dom, &OperatorSpec::laplacian(), &WeightSpec::Unit, &mesh).unwrap();
        let l = bottom(&p, 1e-12).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((l - pi2).abs() < 1e-3 * pi2, "{l}");
        assert!(l >= pi2);
    }

    #[test]
    fn ball_dirichlet_laplacian_approaches_pi_squared() {
        let dom = Domain::Ball { n: 3, radius: 1.0 };
        let pi2 = std::f64::consts::PI.powi(2);
        let mut prev = f64::INFINITY;
        for n in [50, 100, 200, 400] {
            let mesh = make_mesh(&dom, &WeightSpec::Unit, n, 1.0, 1e-4).unwrap();
            let p = assemble_pencil(&dom, &OperatorSpec::laplacian(), &WeightSpec::Unit, &mesh).unwrap();
            let l = bottom(&p, 1e-12).unwrap();
            assert!(l >= pi2 && l < prev);
            prev = l;
        }
        assert!((prev - pi2).abs() < 1e-3 * pi2, "{prev}");
    }

    #[test]
    fn delta_squared_bottom_respects_hardy_constant() {
        let sc = scenario("interval-delta2").unwrap();
        for (n, q, eps) in [(40, 0.5, 1e-4), (200, 0.7, 1e-8), (801, 0.9, 1e-6)] {
            let p = scenario_pencil(&sc, n, q, eps).unwrap();
            assert!(bottom(&p, 1e-12).unwrap() >= 0.25 - 1e-9);
            assert_eq!(count_below(&p, 0.249), 0);
        }
    }

    #[test]
    fn mean_convex_ball_has_no_eigenvalue_below_one() {
        let sc = scenario("ball3-j1").unwrap();
        for n in [100, 400] {
            let p = scenario_pencil(&sc, n, 0.7, 1e-6).unwrap();
            assert_eq!(count_below(&p, 0.999), 0);
        }
    }

    #[test]
    fn annulus_count_is_mesh_stable() {
        let sc = scenario("annulus3-delta2").unwrap();
        let a = count_below(&scenario_pencil(&sc, 400, 0.7, 1e-6).unwrap(), 0.249);
        let b = count_below(&scenario_pencil(&sc, 800, 0.7, 1e-6).unwrap(), 0.249);
        assert_eq!(a, b);
        // Golden value computed by this solver and frozen.
        assert_eq!(a, ANNULUS_COUNT);
    }

    const ANNULUS_COUNT: usize = 0;

    #[test]
    fn refinement_never_raises_the_bottom() {
        let sc = scenario("ball3-j2").unwrap();
        let mut p = scenario_pencil(&sc, 60, 0.6, 1e-5).unwrap();
        let mut prev = bottom(&p, 1e-13).unwrap();
        for _ in 0..3 {
            let mesh = p.mesh.refine();
            p = assemble_pencil(&sc.domain, &sc.op, &sc.weight, &mesh).unwrap();
            let l = bottom(&p, 1e-13).unwrap();
            assert!(l <= prev * (1.0 + 1e-12), "{l} > {prev}");
            prev = l;
        }
    }

    #[test]
    fn first_eigenvector_is_discrete_sine() {
        let (p, h) = free_laplacian(20);
        let v = eigvec(&p, closed_form(1, 20, h)).unwrap();
        assert!(v.residual <= 1e-8);
        assert!(v.warning.is_none());
        let s: Vec<f64> = (1..=20).map(|j| (j as f64 * std::f64::consts::PI * h).sin()).collect();
        let scale = v.x[0] / s[0];
        for (a, b) in v.x.iter().zip(&s) {
            assert!((a - scale * b).abs() < 1e-9, "{a} vs {}", scale * b);
        }
        assert!(v.x.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn brackets_csv_layout() {
        let (p, _) = free_laplacian(4);
        let csv = brackets_csv(&eig_bottom(&p, 2, 1e-10).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,lower,upper,value,multiplicity_hint");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn tridiagonal_solver_pivots() {
        let sub = [1.0, 2.0, 0.5];
        let diag = [1e-20, 1.0, -3.0, 2.0];
        let sup = [4.0, 1.0, -1.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut b = [0.0; 4];
        for i in 0..4 {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += sub[i - 1] * x[i - 1];
            }
            if i < 3 {
                b[i] += sup[i] * x[i + 1];
            }
        }
        let y = tridiag_solve(&sub, &diag, &sup, &b).unwrap();
        for (a, e) in y.iter().zip(&x) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    fn random_pencil() -> impl Strategy<Value = Pencil> {
        (3usize..50).prop_flat_map(|n| {
            (
                proptest::collection::vec(-3.0f64..3.0, n),
                proptest::collection::vec(-1.0f64..1.0, n - 1),
                proptest::collection::vec(0.5f64..2.0, n),
                proptest::collection::vec(-0.2f64..0.2, n - 1),
            )
                .prop_map(|(kd, ko, md, mo)| raw_pencil(kd, ko, md, mo))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn inertia_is_monotone(p in random_pencil(), a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(count_below(&p, lo) <= count_below(&p, hi));
        }

        #[test]
        fn brackets_contain_dense_eigenvalues(p in random_pencil()) {
            let oracle = dense_oracle(&p);
            let ev = eig_bottom(&p, p.dim(), 1e-12).unwrap();
            for (e, o) in ev.iter().zip(&oracle) {
                let slack = 1e-9 * o.abs().max(1.0);
                prop_assert!(e.lower - slack <= *o && *o <= e.upper + slack, "{:?} vs {}", e, o);
            }
        }
    }
}
