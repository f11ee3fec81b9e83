//! Gauss–Legendre rules on [-1, 1].

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point rule, computed by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// The 8-point rule used for element and panel quadrature.
pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(8))
}

/// Composite integral of `f` over `[a, b]` split into `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gl8();
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(c + 0.5 * h * xi);
        }
        total += 0.5 * h * s;
    }
    total
}

fn gl8_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = gl8();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * x.iter().zip(w).map(|(xi, wi)| wi * f(c + r * xi)).sum::<f64>()
}

/// Adaptive 8-point Gauss–Legendre: bisect until the two halves agree with
/// the whole panel to `tol` relative to the running total.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (gl8_panel(f, a, m), gl8_panel(f, m, b));
        if depth == 0 || (l + r - whole).abs() <= tol * (l + r).abs().max(f64::MIN_POSITIVE) {
            return l + r;
        }
        rec(f, a, m, l, tol, depth - 1) + rec(f, m, b, r, tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    rec(&f, a, b, gl8_panel(&f, a, b), tol, 48)
}
