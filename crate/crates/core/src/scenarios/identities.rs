//! Pointwise residuals of the supersolution identities and of the iterated
//! logarithm profile equations, all through analytic jets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{origin_ratio, Domain, OperatorSpec, ProfilePair};
use crate::error::{domain, param, Result};
use crate::jet::Jet;
use crate::xlog;

/// Default ridge exclusion as a fraction of the domain diameter.
pub const RIDGE_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub s: f64,
    /// Residual of the first identity divided by its local scale.
    pub first: f64,
    pub second: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    pub max_first: f64,
    pub max_second: f64,
    /// Largest relative gap between the weight of the construction and its
    /// closed form (0 when no closed form is compared).
    pub max_weight_gap: f64,
}

impl IdentityReport {
    fn from_rows(rows: Vec<IdentityRow>, max_weight_gap: f64) -> Self {
        let max_first = rows.iter().map(|r| r.first).fold(0.0, f64::max);
        let max_second = rows.iter().map(|r| r.second).fold(0.0, f64::max);
        Self { rows, max_first, max_second, max_weight_gap }
    }

    pub fn max_residual(&self) -> f64 {
        self.max_first.max(self.max_second)
    }
}

/// `|r| / max(scale terms)`; an exact zero stays zero.
fn relative(residual: f64, scales: &[f64]) -> f64 {
    if residual == 0.0 {
        return 0.0;
    }
    let s = scales.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    if s == 0.0 {
        residual.abs()
    } else {
        residual.abs() / s
    }
}

/// Both supersolution identities at each sample point, with
/// `V_k = P u_k / u_k` and `W = W(u0, u1)`.
pub fn verify_supconstruct(
    dom: &Domain,
    pair: &ProfilePair,
    op: &OperatorSpec,
    points: &[f64],
) -> Result<IdentityReport> {
    dom.validate()?;
    op.validate()?;
    let mut rows = Vec::with_capacity(points.len());
    for &s in points {
        dom.check_interior(s)?;
        let (u0, u1) = pair.jets(dom, s)?;
        let v0 = op.apply(dom, s, u0)? / u0.v;
        let v1 = op.apply(dom, s, u1)? / u1.v;
        let (w, _) = super::supersolution_weight(pair, op, dom, s)?;
        let half = (u0 * u1).sqrt();
        let mean = 0.5 * (v0 + v1);

        let p_half = op.apply(dom, s, half)?;
        let r1 = p_half - (mean + w) * half.v;

        // X_1^{-1}(u0/u1) = 1 - log(u0/u1).
        let y = 1.0 - (u0.ln() - u1.ln());
        let f = half * y;
        let p_f = op.apply(dom, s, f)?;
        let coef = mean - (v0 - v1) / y.v + w;
        let r2 = p_f - coef * f.v;

        let first = relative(r1 / half.v, &[p_half / half.v, mean, w]);
        let second = relative(r2 / f.v, &[p_f / f.v, mean, (v0 - v1) / y.v, w]);
        rows.push(IdentityRow { s, first, second });
    }
    Ok(IdentityReport::from_rows(rows, 0.0))
}

fn check_ridge(dom: &Domain, s: f64, exclusion: f64) -> Result<()> {
    if dom.near_ridge(s, exclusion * dom.diameter()) {
        return domain(format!("sample {s} lies in the ridge exclusion zone"));
    }
    Ok(())
}

/// Residuals of the level-`i` profile equations for `U_{0,i}` and `U_{1,i}`
/// built from `δ/D`, and the gap between `H_i` and the closed-form `W_i`.
pub fn verify_bft_identities(
    i: usize,
    d: f64,
    dom: &Domain,
    points: &[f64],
    exclusion: f64,
) -> Result<IdentityReport> {
    dom.validate()?;
    let sup = dom.sup_delta()?;
    if d < sup {
        return param(format!("D = {d} is below sup δ = {sup}"));
    }
    let w_closed = super::build_weight(dom, &super::WeightSpec::IteratedLogW { i, d })?;
    let mut rows = Vec::with_capacity(points.len());
    let mut gap = 0.0_f64;
    for &s in points {
        dom.check_interior(s)?;
        check_ridge(dom, s, exclusion)?;
        let delta = dom.delta(s)?;
        let t = delta / d;
        let ys = xlog::y_jets(i + 1, t)?;
        let mut prod = t;
        for y in &ys[..i] {
            prod = prod * *y;
        }
        let u0 = prod.sqrt();
        let u1 = u0 * ys[i];

        let h: f64 = 0.25 * ys.iter().map(|y| y.d * y.d).sum::<f64>();
        let tv = t.v;
        let r_i = xlog::r_sum(i, tv)?;
        let p_next = xlog::x_prod(i + 1, tv)?;
        let k = dom.neg_laplacian_delta(s)? / delta.v;
        let c0 = 0.5 * k * (1.0 - r_i);
        let c1 = c0 - k * p_next;

        let lap0 = -dom.laplacian(s, u0) / u0.v;
        let lap1 = -dom.laplacian(s, u1) / u1.v;
        let first = relative(lap0 - c0 - h, &[lap0, c0, h]);
        let second = relative(lap1 - c1 - h, &[lap1, c0, k * p_next, h]);
        rows.push(IdentityRow { s, first, second });

        let wv = w_closed.value(s)?;
        gap = gap.max((h - wv).abs() / wv);
    }
    Ok(IdentityReport::from_rows(rows, gap))
}

/// Residuals of the origin-variant equations for `Z_i` and
/// `Z_i X_{i+1}^{-1}`, built from the harmonic ratio `(r/D)^{n-2}`.
pub fn verify_origin_identities(i: usize, d: f64, dom: &Domain, points: &[f64]) -> Result<IdentityReport> {
    dom.validate()?;
    let (_, hi) = dom.bounds();
    if !dom.is_radial() || d < hi {
        return param("origin variant needs a radial domain with D >= sup r");
    }
    let weight = super::build_weight(dom, &super::WeightSpec::RadialOriginH { i, d })?;
    let n = dom.dim() as f64;
    let mut rows = Vec::with_capacity(points.len());
    for &s in points {
        if s <= 0.0 {
            return domain("origin variant is singular at r = 0");
        }
        dom.check_interior(s)?;
        let t = origin_ratio(dom, s, d)?;
        let ys = xlog::y_jets(i + 1, t)?;
        let mut prod = Jet::var(s).powf(2.0 - n);
        for y in &ys[..i] {
            prod = prod * *y;
        }
        let z0 = prod.sqrt();
        let z1 = z0 * ys[i];
        let h = weight.value(s)?;
        let lap0 = -dom.laplacian(s, z0) / z0.v;
        let lap1 = -dom.laplacian(s, z1) / z1.v;
        rows.push(IdentityRow {
            s,
            first: relative(lap0 - h, &[lap0, h]),
            second: relative(lap1 - h, &[lap1, h]),
        });
    }
    Ok(IdentityReport::from_rows(rows, 0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `(n-2)/(2r²) Σ X_1⋯X_i`, the claimed lower bound.
    pub lower_bound: f64,
    /// `lhs - lower_bound`.
    pub margin: f64,
    /// `(1/(4r²)) Σ (X_1⋯X_i)²`, the closed form of the margin.
    pub margin_closed: f64,
}

/// `-Δφ/φ` for `φ = Π_{j≤k} X_j^{-1/2}(r/D)` against its displayed expansion.
pub fn appendix_identity(n: u32, k: usize, r: f64, d: f64) -> Result<AppendixReport> {
    if n < 3 {
        return param("appendix identity needs n >= 3");
    }
    if !(r > 0.0) {
        return domain("appendix identity is singular at r = 0");
    }
    if r > d {
        return domain(format!("r = {r} exceeds D = {d}"));
    }
    let t = Jet::var(r) / d;
    let ys = xlog::y_jets(k, t)?;
    let phi = ys.iter().fold(Jet::constant(1.0), |a, y| a * y.sqrt());
    let nf = n as f64;
    let lap = phi.dd + (nf - 1.0) / r * phi.d;
    let lhs = -lap / phi.v;

    let mut p = 1.0;
    let (mut s1, mut s2) = (0.0, 0.0);
    for x in xlog::x_levels(k, t.v)? {
        p *= x;
        s1 += p;
        s2 += p * p;
    }
    let lower_bound = (nf - 2.0) / (2.0 * r * r) * s1;
    let margin_closed = s2 / (4.0 * r * r);
    let rhs = lower_bound + margin_closed;
    Ok(AppendixReport {
        lhs,
        rhs,
        residual: relative(lhs - rhs, &[lhs, rhs]),
        lower_bound,
        margin: lhs - lower_bound,
        margin_closed,
    })
}

/// Seeded interior sample points at least `2·RIDGE_EXCLUSION·diam` from
/// every ridge and from the ends.
pub fn sample_radial(dom: &Domain, count: usize, seed: u64) -> Result<Vec<f64>> {
    dom.validate()?;
    let (lo, hi) = dom.bounds();
    let gap = 2.0 * RIDGE_EXCLUSION * (hi - lo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let s = rng.gen_range(lo + gap..hi - gap);
        if !dom.near_ridge(s, 2.0 * RIDGE_EXCLUSION) {
            out.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::Profile;
    use super::*;

    const INTERVAL: Domain = Domain::Interval { len: 1.0 };
    const BALL3: Domain = Domain::Ball { n: 3, radius: 1.0 };

    #[test]
    fn exponential_pair_on_interval() {
        let pair = ProfilePair::new(Profile::Exp { k: -1.0 }, Profile::Exp { k: 1.0 });
        let rep = verify_supconstruct(&INTERVAL, &pair, &OperatorSpec::laplacian(), &[0.1, 0.3, 0.5, 0.9]).unwrap();
        assert!(rep.max_residual() < 1e-12, "{rep:?}");
    }

    #[test]
    fn delta_pair_on_ball() {
        let pair = ProfilePair::new(Profile::Delta { d: 1.0 }, Profile::One);
        let rep = verify_supconstruct(&BALL3, &pair, &OperatorSpec::laplacian(), &[0.2, 0.5, 0.9]).unwrap();
        assert!(rep.max_first < 1e-10, "{rep:?}");
        assert!(rep.max_second < 1e-10, "{rep:?}");
    }

    #[test]
    fn equal_profiles_give_exact_zero() {
        let pair = ProfilePair::new(Profile::One, Profile::One);
        let rep = verify_supconstruct(&INTERVAL, &pair, &OperatorSpec::laplacian(), &[0.2, 0.7]).unwrap();
        assert_eq!(rep.max_first, 0.0);
        assert_eq!(rep.max_second, 0.0);
    }

    #[test]
    fn bft_examples() {
        let rep = verify_bft_identities(0, 1.0, &BALL3, &[0.5], RIDGE_EXCLUSION).unwrap();
        assert!(rep.max_residual() < 1e-10, "{rep:?}");
        let d = xlog::select_d(0.5, None, 0.0).unwrap().d;
        let rep = verify_bft_identities(1, d, &INTERVAL, &[0.2, 0.8], RIDGE_EXCLUSION).unwrap();
        assert!(rep.max_residual() < 1e-10, "{rep:?}");
        assert!(rep.max_weight_gap < 1e-12, "{rep:?}");
    }

    #[test]
    fn bft_levels_and_annulus() {
        let ann = Domain::Annulus { n: 3, inner: 1.0, outer: 2.0 };
        let d = xlog::select_d(0.5, None, 0.0).unwrap().d;
        let pts: Vec<f64> = (1..40).map(|k| 1.0 + k as f64 / 40.0).filter(|s| (s - 1.5).abs() > 0.01).collect();
        for i in 0..=4 {
            let rep = verify_bft_identities(i, d, &ann, &pts, RIDGE_EXCLUSION).unwrap();
            assert!(rep.max_residual() < 1e-10, "i={i} {rep:?}");
            assert!(rep.max_weight_gap < 1e-12, "i={i} {rep:?}");
        }
    }

    #[test]
    fn bft_rejects_ridge() {
        assert!(verify_bft_identities(0, 1.0, &INTERVAL, &[0.5], RIDGE_EXCLUSION).is_err());
    }

    #[test]
    fn origin_example() {
        let rep = verify_origin_identities(0, 1.0, &BALL3, &[0.3]).unwrap();
        assert!(rep.max_first < 1e-10, "{rep:?}");
        let ball5 = Domain::Ball { n: 5, radius: 1.0 };
        for i in 0..3 {
            let rep = verify_origin_identities(i, 1.5, &ball5, &[0.05, 0.3, 0.9]).unwrap();
            assert!(rep.max_residual() < 1e-10, "i={i} {rep:?}");
        }
    }

    #[test]
    fn appendix_examples() {
        let a = appendix_identity(3, 1, 0.3, 1.0).unwrap();
        assert!(a.residual < 1e-10);
        let b = appendix_identity(4, 2, 0.5, 1.0).unwrap();
        let x = xlog::x_levels(2, 0.5).unwrap();
        let m = (x[0] * x[0] + (x[0] * x[1]).powi(2)) / (4.0 * 0.25);
        assert!((b.margin_closed - m).abs() < 1e-15);
        assert!((b.margin - m).abs() < 1e-10 * m);
        let c = appendix_identity(3, 5, 1.0, 1.0).unwrap();
        assert!((c.margin_closed - 5.0 / 4.0).abs() < 1e-14);
        assert!(appendix_identity(3, 1, 0.0, 1.0).is_err());
    }
}
