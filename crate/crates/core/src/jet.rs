//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] holds the normalized Taylor coefficients `c_k = f^(k)(x)/k!` of a
//! function at one point. Arithmetic on jets propagates derivatives exactly
//! (up to round-off), which is how every derivative of a power row is
//! obtained in this crate: the derivative of an integral is its integrand,
//! so a row's jet is the integral of the jet of its integrand.

use crate::C64;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    coeffs: Vec<C64>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl Jet {
    /// Jet of a constant function.
    pub fn constant(value: C64, order: usize) -> Self {
        let mut coeffs = vec![zero(); order + 1];
        coeffs[0] = value;
        Jet { coeffs }
    }

    /// Jet of the identity function `x ↦ x` at `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut coeffs = vec![zero(); order + 1];
        coeffs[0] = C64::new(x, 0.0);
        if order >= 1 {
            coeffs[1] = C64::new(1.0, 0.0);
        }
        Jet { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// The `k`-th ordinary derivative `f^(k)(x)`.
    pub fn derivative_value(&self, k: usize) -> C64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs[k] * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        Jet {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    /// Jet of `f'`; the order drops by one.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Jet::constant(zero(), 0);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|k| self.coeffs[k] * k as f64)
            .collect();
        Jet { coeffs }
    }

    /// Jet of the antiderivative taking `value` at the expansion point.
    pub fn integral(&self, value: C64) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(value);
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / (k as f64 + 1.0)),
        );
        Jet { coeffs }
    }

    pub fn scale(&self, s: C64) -> Self {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(C64::new(1.0, 0.0), self.order()).div(self)
    }

    pub fn div(&self, other: &Jet) -> Self {
        let n = self.order().min(other.order());
        let b0 = other.coeffs[0];
        let mut q = vec![zero(); n + 1];
        for k in 0..=n {
            let mut acc = self.coeffs[k];
            for i in 1..=k {
                acc -= other.coeffs[i] * q[k - i];
            }
            q[k] = acc / b0;
        }
        Jet { coeffs: q }
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![zero(); n + 1];
        e[0] = self.coeffs[0].exp();
        for k in 1..=n {
            let mut acc = zero();
            for i in 1..=k {
                acc += self.coeffs[i] * e[k - i] * i as f64;
            }
            e[k] = acc / k as f64;
        }
        Jet { coeffs: e }
    }

    pub fn sqrt(&self) -> Self {
        let n = self.order();
        let mut s = vec![zero(); n + 1];
        s[0] = self.coeffs[0].sqrt();
        for k in 1..=n {
            let mut acc = self.coeffs[k];
            for i in 1..k {
                acc -= s[i] * s[k - i];
            }
            s[k] = acc / (s[0] * 2.0);
        }
        Jet { coeffs: s }
    }

    /// Returns `(sin, cos)` of the jet.
    pub fn sin_cos(&self) -> (Self, Self) {
        self.paired(|a| (a.sin(), a.cos()), -1.0)
    }

    /// Returns `(sinh, cosh)` of the jet.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        self.paired(|a| (a.sinh(), a.cosh()), 1.0)
    }

    // s' = c a', c' = sign * s a'
    fn paired(&self, init: impl Fn(C64) -> (C64, C64), sign: f64) -> (Self, Self) {
        let n = self.order();
        let mut s = vec![zero(); n + 1];
        let mut c = vec![zero(); n + 1];
        let (s0, c0) = init(self.coeffs[0]);
        s[0] = s0;
        c[0] = c0;
        for k in 1..=n {
            let mut acc_s = zero();
            let mut acc_c = zero();
            for i in 1..=k {
                let da = self.coeffs[i] * i as f64;
                acc_s += da * c[k - i];
                acc_c += da * s[k - i];
            }
            s[k] = acc_s / k as f64;
            c[k] = acc_c * sign / k as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }

    pub fn powi(&self, n: i32) -> Self {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut result = Jet::constant(C64::new(1.0, 0.0), self.order());
        for _ in 0..n.unsigned_abs() {
            result = &result * &base;
        }
        result
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        Jet {
            coeffs: (0..=n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        Jet {
            coeffs: (0..=n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        let coeffs = (0..=n)
            .map(|k| {
                (0..=k)
                    .map(|i| self.coeffs[i] * rhs.coeffs[k - i])
                    .sum::<C64>()
            })
            .collect();
        Jet { coeffs }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: f64) -> bool {
        (a - C64::new(b, 0.0)).norm() < 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn exp_of_variable_gives_factorial_coefficients() {
        let j = Jet::variable(0.0, 6).exp();
        for k in 0..=6 {
            assert!(close(j.derivative_value(k), 1.0));
        }
    }

    #[test]
    fn sin_cos_derivatives_cycle() {
        let x = 0.7_f64;
        let (s, c) = Jet::variable(x, 5).sin_cos();
        let expect = [x.sin(), x.cos(), -x.sin(), -x.cos(), x.sin(), x.cos()];
        for (k, e) in expect.iter().enumerate() {
            assert!(close(s.derivative_value(k), *e));
        }
        assert!(close(c.derivative_value(1), -x.sin()));
    }

    #[test]
    fn sqrt_squares_back() {
        let j = (&Jet::variable(1.3, 6) * &Jet::variable(1.3, 6)).exp();
        let s = j.sqrt();
        let back = &s * &s;
        for k in 0..=6 {
            assert!((back.coeffs()[k] - j.coeffs()[k]).norm() < 1e-12 * j.coeffs()[k].norm().max(1.0));
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Jet::variable(0.4, 5).exp();
        let b = Jet::variable(0.4, 5).sinh_cosh().1;
        let q = (&a * &b).div(&b);
        for k in 0..=5 {
            assert!((q.coeffs()[k] - a.coeffs()[k]).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_then_integral_round_trips() {
        let a = Jet::variable(0.2, 4).powi(3);
        let back = a.derivative().integral(a.value());
        assert_eq!(back.order(), a.order());
        for k in 0..=4 {
            assert!((back.coeffs()[k] - a.coeffs()[k]).norm() < 1e-14);
        }
    }
}
