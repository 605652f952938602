//! Closed-form real-variable expressions with exact Taylor jets.

use crate::jet::Jet;
use crate::C64;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub enum Expr {
    Const(C64),
    X,
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Exp(Arc<Expr>),
    Sqrt(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Sinh(Arc<Expr>),
    Cosh(Arc<Expr>),
    Powi(Arc<Expr>, i32),
}

impl Expr {
    pub fn x() -> Self {
        Expr::X
    }

    pub fn constant(c: C64) -> Self {
        Expr::Const(c)
    }

    pub fn real(r: f64) -> Self {
        Expr::Const(C64::new(r, 0.0))
    }

    /// Polynomial `Σ c_k x^k` in Horner form.
    pub fn polynomial(coeffs: &[C64]) -> Self {
        let mut it = coeffs.iter().rev();
        let mut acc = match it.next() {
            Some(c) => Expr::Const(*c),
            None => return Expr::real(0.0),
        };
        for c in it {
            acc = Expr::Const(*c) + Expr::X * acc;
        }
        acc
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Arc::new(self))
    }
    pub fn sqrt(self) -> Self {
        Expr::Sqrt(Arc::new(self))
    }
    pub fn sin(self) -> Self {
        Expr::Sin(Arc::new(self))
    }
    pub fn cos(self) -> Self {
        Expr::Cos(Arc::new(self))
    }
    pub fn sinh(self) -> Self {
        Expr::Sinh(Arc::new(self))
    }
    pub fn cosh(self) -> Self {
        Expr::Cosh(Arc::new(self))
    }
    pub fn powi(self, n: i32) -> Self {
        Expr::Powi(Arc::new(self), n)
    }
    pub fn recip(self) -> Self {
        Expr::real(1.0) / self
    }

    pub fn eval(&self, x: f64) -> C64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X => C64::new(x, 0.0),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Sinh(a) => a.eval(x).sinh(),
            Expr::Cosh(a) => a.eval(x).cosh(),
            Expr::Powi(a, n) => a.eval(x).powi(*n),
        }
    }

    /// Normalized Taylor coefficients of the expression at `x` up to `order`.
    pub fn jet(&self, x: f64, order: usize) -> Jet {
        match self {
            Expr::Const(c) => Jet::constant(*c, order),
            Expr::X => Jet::variable(x, order),
            Expr::Add(a, b) => &a.jet(x, order) + &b.jet(x, order),
            Expr::Sub(a, b) => &a.jet(x, order) - &b.jet(x, order),
            Expr::Mul(a, b) => &a.jet(x, order) * &b.jet(x, order),
            Expr::Div(a, b) => a.jet(x, order).div(&b.jet(x, order)),
            Expr::Neg(a) => -&a.jet(x, order),
            Expr::Exp(a) => a.jet(x, order).exp(),
            Expr::Sqrt(a) => a.jet(x, order).sqrt(),
            Expr::Sin(a) => a.jet(x, order).sin_cos().0,
            Expr::Cos(a) => a.jet(x, order).sin_cos().1,
            Expr::Sinh(a) => a.jet(x, order).sinh_cosh().0,
            Expr::Cosh(a) => a.jet(x, order).sinh_cosh().1,
            Expr::Powi(a, n) => a.jet(x, order).powi(*n),
        }
    }

    pub fn derivative_at(&self, x: f64) -> C64 {
        self.jet(x, 1).derivative_value(1)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Arc::new(self), Arc::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Arc::new(self))
    }
}
