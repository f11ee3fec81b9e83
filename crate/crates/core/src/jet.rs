//! Second-order forward-mode jets: value, first and second derivative with
//! respect to a single scalar coordinate. Every closed-form profile in the
//! crate is evaluated through these, so derivatives are exact up to rounding.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const fn new(v: f64, d: f64, dd: f64) -> Self {
        Self { v, d, dd }
    }

    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0)
    }

    /// The coordinate itself.
    pub const fn var(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    /// Chain rule for `g(self)` given `g`, `g'`, `g''` at `self.v`.
    #[inline]
    pub fn compose(self, g: f64, g1: f64, g2: f64) -> Self {
        Self::new(g, g1 * self.d, g2 * self.d * self.d + g1 * self.dd)
    }

    pub fn ln(self) -> Self {
        let x = self.v;
        self.compose(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.v;
        let xp = x.powf(p);
        self.compose(xp, p * xp / x, p * (p - 1.0) * xp / (x * x))
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.compose(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c)
    }

    /// `d/ds log(self)`.
    pub fn log_deriv(self) -> f64 {
        self.d / self.v
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d, self.dd + o.dd)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d, self.dd - o.dd)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d * o.v + self.v * o.d,
            self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d, -self.dd)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet::new(self.v + c, self.d, self.dd)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, c: f64) -> Jet {
        Jet::new(self.v - c, self.d, self.dd)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        Jet::new(self.v * c, self.d * c, self.dd * c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        Jet::new(self.v / c, self.d / c, self.dd / c)
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, j: Jet) -> Jet {
        Jet::new(self - j.v, -j.d, -j.dd)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        j * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> (f64, f64) {
        let h = 1e-4;
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        let dd = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        (d, dd)
    }

    #[test]
    fn composite_matches_finite_differences() {
        let g = |j: Jet| (j.ln() * j.sqrt() + j.powf(1.5)).exp() / (1.0 - j.ln());
        let gf = |x: f64| ((x.ln() * x.sqrt() + x.powf(1.5)).exp()) / (1.0 - x.ln());
        for &x in &[0.2, 0.5, 0.9] {
            let j = g(Jet::var(x));
            let (d, dd) = fd(gf, x);
            assert!((j.v - gf(x)).abs() < 1e-14 * gf(x).abs());
            assert!((j.d - d).abs() < 1e-6 * d.abs().max(1.0));
            assert!((j.dd - dd).abs() < 1e-4 * dd.abs().max(1.0));
        }
    }

    #[test]
    fn trig_pair() {
        let x = Jet::var(0.7);
        let s = x.sin() * x.sin() + x.cos() * x.cos();
        assert!((s.v - 1.0).abs() < 1e-15 && s.d.abs() < 1e-15 && s.dd.abs() < 1e-14);
    }
}
