//! Scalar abstraction used by all geometric field definitions.
//!
//! Every family writes its metric, complex structure, Killing field and
//! momentum function once, generically over [`Real`]. Instantiated at `f64`
//! the definitions give plain values; instantiated at [`Jet`] they carry
//! exact first and second partial derivatives with respect to the four chart
//! coordinates, which is what the curvature and Hessian layers consume on
//! their analytic path. Finite differencing remains available as a second,
//! independent differentiation route.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of independent variables a [`Jet`] differentiates against.
pub const NVARS: usize = 4;

/// Scalar arithmetic shared by `f64` and [`Jet`].
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(x: f64) -> Self;
    /// The underlying value (derivative information discarded).
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn recip(self) -> Self;
    fn acos(self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn constant(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn acos(self) -> Self {
        f64::acos(self)
    }
}

/// Second-order jet: value, gradient and Hessian with respect to up to
/// [`NVARS`] seed variables. Arithmetic propagates derivatives exactly
/// (to roundoff), so quantities built from jets need no step-size tuning.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; NVARS],
    pub h: [[f64; NVARS]; NVARS],
}

impl Jet {
    /// Seed the jet that represents the `i`-th independent variable with
    /// value `x`.
    pub fn variable(x: f64, i: usize) -> Self {
        let mut g = [0.0; NVARS];
        g[i] = 1.0;
        Jet {
            v: x,
            g,
            h: [[0.0; NVARS]; NVARS],
        }
    }

    /// Seed all four chart coordinates at once.
    pub fn seed(coords: &[f64; 4]) -> [Jet; 4] {
        [
            Jet::variable(coords[0], 0),
            Jet::variable(coords[1], 1),
            Jet::variable(coords[2], 2),
            Jet::variable(coords[3], 3),
        ]
    }

    /// Apply a smooth univariate function given its value and first two
    /// derivatives at `self.v`.
    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Jet {
            v: f,
            g: [0.0; NVARS],
            h: [[0.0; NVARS]; NVARS],
        };
        for i in 0..NVARS {
            out.g[i] = df * self.g[i];
        }
        for i in 0..NVARS {
            for j in 0..NVARS {
                out.h[i][j] = d2f * self.g[i] * self.g[j] + df * self.h[i][j];
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut out = self;
        out.v += rhs.v;
        for i in 0..NVARS {
            out.g[i] += rhs.g[i];
            for j in 0..NVARS {
                out.h[i][j] += rhs.h[i][j];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let mut out = self;
        out.v = -out.v;
        for i in 0..NVARS {
            out.g[i] = -out.g[i];
            for j in 0..NVARS {
                out.h[i][j] = -out.h[i][j];
            }
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = Jet {
            v: self.v * rhs.v,
            g: [0.0; NVARS],
            h: [[0.0; NVARS]; NVARS],
        };
        for i in 0..NVARS {
            out.g[i] = self.v * rhs.g[i] + rhs.v * self.g[i];
        }
        for i in 0..NVARS {
            for j in 0..NVARS {
                out.h[i][j] = self.v * rhs.h[i][j]
                    + rhs.v * self.h[i][j]
                    + self.g[i] * rhs.g[j]
                    + self.g[j] * rhs.g[i];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    // Division is defined through the chain-rule reciprocal.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Real for Jet {
    fn constant(x: f64) -> Self {
        Jet {
            v: x,
            g: [0.0; NVARS],
            h: [[0.0; NVARS]; NVARS],
        }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }
    fn powi(self, n: i32) -> Self {
        let x = self.v;
        let f = x.powi(n);
        let df = f64::from(n) * x.powi(n - 1);
        let d2f = f64::from(n) * f64::from(n - 1) * x.powi(n - 2);
        self.chain(f, df, d2f)
    }
    fn recip(self) -> Self {
        let x = self.v;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
    fn acos(self) -> Self {
        let x = self.v;
        let d = -1.0 / (1.0 - x * x).sqrt();
        let d2 = -x / (1.0 - x * x).powf(1.5);
        self.chain(x.acos(), d, d2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample<T: Real>(x: [T; 4]) -> T {
        // exp(x0) * sin(x1) + x2^3 / sqrt(x3) + ln(x3) * x0
        x[0].exp() * x[1].sin() + x[2].powi(3) / x[3].sqrt() + x[3].ln() * x[0]
    }

    #[test]
    fn jet_matches_finite_differences() {
        let base = [0.3, 1.1, -0.7, 2.4];
        let jets = Jet::seed(&base);
        let j = sample(jets);
        assert!((j.v - sample(base)).abs() < 1e-14);

        let h = 1e-5;
        for i in 0..4 {
            let mut up = base;
            let mut dn = base;
            up[i] += h;
            dn[i] -= h;
            let fd = (sample(up) - sample(dn)) / (2.0 * h);
            assert!(
                (j.g[i] - fd).abs() < 1e-8,
                "grad[{i}]: jet {} vs fd {fd}",
                j.g[i]
            );
        }
        for i in 0..4 {
            for k in 0..4 {
                let mut pp = base;
                let mut pm = base;
                let mut mp = base;
                let mut mm = base;
                pp[i] += h;
                pp[k] += h;
                pm[i] += h;
                pm[k] -= h;
                mp[i] -= h;
                mp[k] += h;
                mm[i] -= h;
                mm[k] -= h;
                let fd = (sample(pp) - sample(pm) - sample(mp) + sample(mm)) / (4.0 * h * h);
                assert!(
                    (j.h[i][k] - fd).abs() < 1e-5,
                    "hess[{i}][{k}]: jet {} vs fd {fd}",
                    j.h[i][k]
                );
            }
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let jets = Jet::seed(&[0.9, 0.2, 1.7, 0.5]);
        let j = sample(jets);
        for i in 0..4 {
            for k in 0..4 {
                assert!((j.h[i][k] - j.h[k][i]).abs() < 1e-13);
            }
        }
    }
}
