//! Forward-mode automatic differentiation.
//!
//! Two number types are provided:
//!
//! - [`Dual<N>`] carries a value and its `N` first partial derivatives. The
//!   bracket engine uses `Dual<6>` over the phase-space coordinates `(x, p)`.
//! - [`Jet<N>`] additionally carries the symmetric `N x N` Hessian. It backs
//!   user-defined level functions (`Jet<3>`) and parametric charts
//!   (`Jet<2>`), where curvature needs exact second derivatives.
//!
//! Both implement [`Real`], so geometry can be written once and evaluated on
//! plain `f64` or on either derivative-carrying type.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64`, [`Dual`] and [`Jet`].
pub trait Real:
    Copy
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;

    fn powi(self, n: i32) -> Self {
        let mut acc = Self::from(1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc * self;
        }
        if n < 0 {
            Self::from(1.0) / acc
        } else {
            acc
        }
    }
}

impl Real for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// First-order forward-mode number: `re + Σ eps[i]·εᵢ` with `εᵢεⱼ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub eps: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(re: f64) -> Self {
        Self { re, eps: [0.0; N] }
    }

    /// Independent variable `index` with unit seed.
    pub fn variable(re: f64, index: usize) -> Self {
        let mut eps = [0.0; N];
        eps[index] = 1.0;
        Self { re, eps }
    }

    pub fn new(re: f64, eps: [f64; N]) -> Self {
        Self { re, eps }
    }

    /// Applies a scalar function with derivative `d` at `self.re`.
    fn chain(self, value: f64, d: f64) -> Self {
        let mut eps = self.eps;
        eps.iter_mut().for_each(|e| *e *= d);
        Self { re: value, eps }
    }
}

impl<const N: usize> From<f64> for Dual<N> {
    fn from(re: f64) -> Self {
        Self::constant(re)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for (a, b) in self.eps.iter_mut().zip(rhs.eps) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = self.re * rhs.eps[i] + rhs.re * self.eps[i];
        }
        Self {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let re = self.re * inv;
        let mut eps = [0.0; N];
        for i in 0..N {
            eps[i] = (self.eps[i] - re * rhs.eps[i]) * inv;
        }
        Self { re, eps }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.chain(-self.re, -1.0)
    }
}

impl<const N: usize> Real for Dual<N> {
    fn value(&self) -> f64 {
        self.re
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), 1.0 / self.re)
    }
}

/// Second-order forward-mode number in `N` variables: value, gradient and
/// symmetric Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(v: f64) -> Self {
        Self {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    pub fn variable(v: f64, index: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[index] = 1.0;
        j
    }

    /// Seeds all `N` coordinates of a point as independent variables.
    pub fn seed(point: [f64; N]) -> [Self; N] {
        std::array::from_fn(|i| Self::variable(point[i], i))
    }

    /// `f(self)` given `f`, `f'`, `f''` at `self.v`.
    fn chain(self, f: f64, d1: f64, d2: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.g[i] = d1 * self.g[i];
            for j in 0..N {
                out.h[i][j] = d1 * self.h[i][j] + d2 * self.g[i] * self.g[j];
            }
        }
        out
    }

    fn recip(self) -> Self {
        let inv = 1.0 / self.v;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl<const N: usize> From<f64> for Jet<N> {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.v += rhs.v;
        for i in 0..N {
            self.g[i] += rhs.g[i];
            for j in 0..N {
                self.h[i][j] += rhs.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.v * rhs.v);
        for i in 0..N {
            out.g[i] = self.v * rhs.g[i] + rhs.v * self.g[i];
            for j in 0..N {
                out.h[i][j] = self.v * rhs.h[i][j]
                    + rhs.v * self.h[i][j]
                    + self.g[i] * rhs.g[j]
                    + rhs.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.chain(-self.v, -1.0, 0.0)
    }
}

impl<const N: usize> Real for Jet<N> {
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
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
        let inv = 1.0 / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn f<T: Real>(x: T, y: T) -> T {
        x * x * y + (x * y).sin() / (T::from(2.0) + y.exp()) + (x * x + y * y).sqrt()
    }

    #[test]
    fn dual_matches_central_differences() {
        let (x0, y0) = (0.7, -0.4);
        let d = f(Dual::<2>::variable(x0, 0), Dual::<2>::variable(y0, 1));
        let h = 1e-6;
        let fx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2.0 * h);
        let fy = (f(x0, y0 + h) - f(x0, y0 - h)) / (2.0 * h);
        assert_relative_eq!(d.re, f(x0, y0), epsilon = 1e-15);
        assert_relative_eq!(d.eps[0], fx, max_relative = 1e-8);
        assert_relative_eq!(d.eps[1], fy, max_relative = 1e-8);
    }

    #[test]
    fn jet_hessian_matches_differences_of_duals() {
        let p = [0.3, 1.1];
        let [x, y] = Jet::<2>::seed(p);
        let j = f(x, y);
        let h = 1e-5;
        for a in 0..2 {
            let mut plus = p;
            let mut minus = p;
            plus[a] += h;
            minus[a] -= h;
            let gp = f(Dual::<2>::variable(plus[0], 0), Dual::<2>::variable(plus[1], 1));
            let gm = f(Dual::<2>::variable(minus[0], 0), Dual::<2>::variable(minus[1], 1));
            for b in 0..2 {
                let fd = (gp.eps[b] - gm.eps[b]) / (2.0 * h);
                assert_relative_eq!(j.h[b][a], fd, max_relative = 1e-7, epsilon = 1e-9);
            }
        }
        assert_eq!(j.h[0][1], j.h[1][0]);
    }

    #[test]
    fn powi_handles_negative_exponents() {
        let x = Jet::<1>::variable(2.0, 0);
        let y = x.powi(-2);
        assert_relative_eq!(y.v, 0.25);
        assert_relative_eq!(y.g[0], -0.25);
        assert_relative_eq!(y.h[0][0], 6.0 / 16.0);
    }
}
