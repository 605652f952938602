use crate::analytic::Expr;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quadrature::{Quadrature, Rule};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Uniform grid on `[a, b]` with an odd node count, a base node `x0` and
/// the quadrature rule every integral on it uses.
#[derive(Clone, Debug)]
pub struct Grid {
    a: f64,
    b: f64,
    h: f64,
    nodes: Arc<[f64]>,
    x0_index: usize,
    rule: Rule,
}

impl Grid {
    /// Builds the grid and locates `x0` among its nodes.
    pub fn uniform(a: f64, b: f64, count: usize, x0: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidGrid(format!("need finite a < b, got [{a}, {b}]")));
        }
        if count < 5 || count % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "node count must be odd and at least 5, got {count}"
            )));
        }
        let h = (b - a) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|i| a + i as f64 * h).collect();
        nodes[count - 1] = b;
        let grid = Grid {
            a,
            b,
            h,
            nodes: nodes.into(),
            x0_index: 0,
            rule: Rule::default(),
        };
        let idx = grid
            .index_of(x0)
            .ok_or_else(|| Error::InvalidGrid(format!("x0 = {x0} is not a grid node")))?;
        Ok(Grid { x0_index: idx, ..grid })
    }

    /// Validates externally supplied nodes (uniform within 1e-12 relative).
    pub fn from_nodes(nodes: Vec<f64>, x0_index: usize) -> Result<Self> {
        let count = nodes.len();
        if count < 5 || count % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "node count must be odd and at least 5, got {count}"
            )));
        }
        let (a, b) = (nodes[0], nodes[count - 1]);
        if !(a < b) {
            return Err(Error::InvalidGrid("nodes must increase".into()));
        }
        let h = (b - a) / (count - 1) as f64;
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - h).abs() > 1e-12 * h.max((b - a).abs()) {
                return Err(Error::InvalidGrid("spacing is not uniform".into()));
            }
        }
        if x0_index >= count {
            return Err(Error::InvalidGrid(format!("x0 index {x0_index} out of range")));
        }
        Ok(Grid {
            a,
            b,
            h,
            nodes: nodes.into(),
            x0_index,
            rule: Rule::default(),
        })
    }

    pub fn with_base(&self, x0_index: usize) -> Result<Self> {
        if x0_index >= self.len() {
            return Err(Error::InvalidGrid(format!("x0 index {x0_index} out of range")));
        }
        Ok(Grid {
            x0_index,
            ..self.clone()
        })
    }

    pub fn with_rule(self, rule: Rule) -> Self {
        Grid { rule, ..self }
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn quadrature(&self) -> Quadrature {
        Quadrature::new(self.h, self.rule)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn x0_index(&self) -> usize {
        self.x0_index
    }
    pub fn x0(&self) -> f64 {
        self.nodes[self.x0_index]
    }
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Index of the node equal to `x` up to a millionth of the spacing.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let t = ((x - self.a) / self.h).round();
        if !(0.0..self.len() as f64).contains(&t) {
            return None;
        }
        let i = t as usize;
        ((self.nodes[i] - x).abs() <= 1e-6 * self.h).then_some(i)
    }

    /// True when both grids carry the same nodes; the base may differ.
    pub fn same_nodes(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.nodes, &other.nodes)
            || (self.len() == other.len() && self.a == other.a && self.b == other.b)
    }
}

/// Anything that can report values and exact local jets at grid nodes.
pub trait JetSource: Sync {
    fn grid(&self) -> &Grid;
    fn value(&self, i: usize) -> C64;
    fn jet(&self, i: usize, order: usize) -> Jet;
}

impl JetSource for SampledFunction {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn value(&self, i: usize) -> C64 {
        self.values[i]
    }
    fn jet(&self, i: usize, order: usize) -> Jet {
        self.jet_at(i, order)
    }
}

/// Complex samples of a function on a grid, optionally with an exact
/// derivative array and a closed form that provides exact jets.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<C64>,
    derivative: Option<Vec<C64>>,
    expr: Option<Expr>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(SampledFunction {
            grid,
            values,
            derivative: None,
            expr: None,
        })
    }

    pub fn from_expr(grid: &Grid, expr: Expr) -> Self {
        let values = grid.nodes().iter().map(|&x| expr.eval(x)).collect();
        let derivative = grid.nodes().iter().map(|&x| expr.derivative_at(x)).collect();
        SampledFunction {
            grid: grid.clone(),
            values,
            derivative: Some(derivative),
            expr: Some(expr),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        SampledFunction {
            grid: grid.clone(),
            values,
            derivative: None,
            expr: None,
        }
    }

    pub fn constant(grid: &Grid, c: C64) -> Self {
        Self::from_expr(grid, Expr::constant(c))
    }

    pub fn with_derivative(mut self, derivative: Vec<C64>) -> Result<Self> {
        if derivative.len() != self.grid.len() {
            return Err(Error::InvalidArgument("derivative length mismatch".into()));
        }
        self.derivative = Some(derivative);
        Ok(self)
    }

    /// Fills the derivative array by 4th-order finite differences.
    pub fn with_fd_derivative(self) -> Self {
        let d = fd_derivative(&self.values, self.grid.h());
        SampledFunction {
            derivative: Some(d),
            ..self
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn derivative(&self) -> Option<&[C64]> {
        self.derivative.as_deref()
    }
    pub fn expr(&self) -> Option<&Expr> {
        self.expr.as_ref()
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same function viewed on the same nodes with another base index.
    pub fn rebased(&self, x0_index: usize) -> Result<Self> {
        Ok(SampledFunction {
            grid: self.grid.with_base(x0_index)?,
            ..self.clone()
        })
    }

    /// Jet at node `i`: exact from the closed form, otherwise from a local
    /// interpolating polynomial on `order + 3` neighbouring nodes.
    pub fn jet_at(&self, i: usize, order: usize) -> Jet {
        match &self.expr {
            Some(e) => e.jet(self.grid.nodes()[i], order),
            None => local_fit_jet(&self.values, self.grid.h(), i, order),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_real(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.im.abs() <= 1e-14 * v.norm().max(1e-300))
    }

    pub fn is_real_positive(&self) -> bool {
        self.is_real() && self.values.iter().all(|v| v.re > 0.0)
    }

    /// First node whose magnitude is at most `tol`, if any.
    pub fn first_vanishing(&self, tol: f64) -> Option<(usize, f64, f64)> {
        self.values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.norm() > tol))
            .map(|(i, v)| (i, self.grid.nodes()[i], v.norm()))
    }

    pub fn check_nonvanishing(&self, tol: f64) -> Result<()> {
        match self.first_vanishing(tol) {
            Some((index, x, magnitude)) => Err(Error::NonvanishingViolation { index, x, magnitude }),
            None => Ok(()),
        }
    }

    fn combine(&self, other: &Self, op: impl Fn(C64, C64) -> C64, eop: impl Fn(Expr, Expr) -> Expr) -> Result<Self> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| op(*a, *b))
            .collect();
        let expr = match (&self.expr, &other.expr) {
            (Some(a), Some(b)) => Some(eop(a.clone(), b.clone())),
            _ => None,
        };
        let mut out = SampledFunction {
            grid: self.grid.clone(),
            values,
            derivative: None,
            expr,
        };
        out.refresh_derivative();
        Ok(out)
    }

    fn refresh_derivative(&mut self) {
        self.derivative = self.expr.as_ref().map(|e| {
            self.grid
                .nodes()
                .iter()
                .map(|&x| e.derivative_at(x))
                .collect()
        });
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a * b, |a, b| a * b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b, |a, b| a - b)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a / b, |a, b| a / b)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
            derivative: None,
            expr: self.expr.clone().map(|e| Expr::constant(s) * e),
        };
        match &self.derivative {
            Some(d) if out.expr.is_none() => out.derivative = Some(d.iter().map(|v| v * s).collect()),
            _ => out.refresh_derivative(),
        }
        out
    }

    /// Pointwise reciprocal; the derivative follows the quotient rule.
    pub fn recip(&self) -> Self {
        let values: Vec<C64> = self.values.iter().map(|v| v.inv()).collect();
        let derivative = self.derivative.as_ref().map(|d| {
            d.iter()
                .zip(&self.values)
                .map(|(dv, v)| -dv / (v * v))
                .collect()
        });
        SampledFunction {
            grid: self.grid.clone(),
            values,
            derivative,
            expr: self.expr.clone().map(Expr::recip),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        let mut out = SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.powi(n)).collect(),
            derivative: None,
            expr: self.expr.clone().map(|e| e.powi(n)),
        };
        match &self.derivative {
            Some(d) if out.expr.is_none() => {
                out.derivative = Some(
                    d.iter()
                        .zip(&self.values)
                        .map(|(dv, v)| dv * v.powi(n - 1) * n as f64)
                        .collect(),
                )
            }
            _ => out.refresh_derivative(),
        }
        out
    }

    /// Square root on the principal branch.
    pub fn sqrt(&self) -> Self {
        let values: Vec<C64> = self.values.iter().map(|v| v.sqrt()).collect();
        let mut out = SampledFunction {
            grid: self.grid.clone(),
            derivative: None,
            expr: self.expr.clone().map(Expr::sqrt),
            values,
        };
        match &self.derivative {
            Some(d) if out.expr.is_none() => {
                out.derivative = Some(
                    d.iter()
                        .zip(&out.values)
                        .map(|(dv, s)| dv / (s * 2.0))
                        .collect(),
                )
            }
            _ => out.refresh_derivative(),
        }
        out
    }

    /// The `k`-th ordinary derivative at every node.
    pub fn nth_derivative(&self, k: usize) -> Vec<C64> {
        (0..self.len())
            .map(|i| self.jet_at(i, k).derivative_value(k))
            .collect()
    }
}

/// 4th-order central differences with one-sided 5-point stencils at the ends.
pub fn fd_derivative(f: &[C64], h: f64) -> Vec<C64> {
    let m = f.len();
    assert!(m >= 5, "need at least five samples");
    let s = 1.0 / (12.0 * h);
    let mut d = vec![C64::new(0.0, 0.0); m];
    d[0] = (f[0] * -25.0 + f[1] * 48.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) * s;
    d[1] = (f[0] * -3.0 - f[1] * 10.0 + f[2] * 18.0 - f[3] * 6.0 + f[4]) * s;
    for i in 2..m - 2 {
        d[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * s;
    }
    let e = m - 1;
    d[e] = -(f[e] * -25.0 + f[e - 1] * 48.0 - f[e - 2] * 36.0 + f[e - 3] * 16.0 - f[e - 4] * 3.0) * s;
    d[e - 1] = -(f[e] * -3.0 - f[e - 1] * 10.0 + f[e - 2] * 18.0 - f[e - 3] * 6.0 + f[e - 4]) * s;
    d
}

/// Jet at node `i` of the polynomial interpolating `order + 3` nodes
/// (at least five) centred on `i` where the grid allows.
pub fn local_fit_jet(values: &[C64], h: f64, i: usize, order: usize) -> Jet {
    let m = values.len();
    let width = (order + 3).max(5).min(m);
    let half = width / 2;
    let start = i.saturating_sub(half).min(m - width);
    let ts: Vec<f64> = (start..start + width).map(|k| k as f64 - i as f64).collect();
    let vander = DMatrix::from_fn(width, width, |r, c| ts[r].powi(c as i32));
    let lu = vander.lu();
    let re = DVector::from_iterator(width, values[start..start + width].iter().map(|v| v.re));
    let im = DVector::from_iterator(width, values[start..start + width].iter().map(|v| v.im));
    let cre = lu.solve(&re).expect("Vandermonde on distinct nodes is invertible");
    let cim = lu.solve(&im).expect("Vandermonde on distinct nodes is invertible");
    let coeffs = (0..=order)
        .map(|k| {
            if k < width {
                C64::new(cre[k], cim[k]) / h.powi(k as i32)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Jet::from_coeffs(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_even_and_small_counts() {
        assert!(Grid::uniform(0.0, 1.0, 4, 0.0).is_err());
        assert!(Grid::uniform(0.0, 1.0, 6, 0.0).is_err());
        assert!(Grid::uniform(1.0, 0.0, 5, 0.0).is_err());
        assert!(Grid::uniform(0.0, 1.0, 5, 0.1).is_err());
    }

    #[test]
    fn locates_base_node() {
        let g = Grid::uniform(-1.0, 1.0, 9, 0.5).unwrap();
        assert_eq!(g.x0_index(), 6);
        assert_eq!(g.nodes()[0], -1.0);
        assert_eq!(g.nodes()[8], 1.0);
    }

    #[test]
    fn fd_derivative_is_exact_on_quartics() {
        let g = Grid::uniform(0.0, 1.0, 11, 0.0).unwrap();
        let f = SampledFunction::from_fn(&g, |x| C64::new(x.powi(4) - x, 0.0));
        let d = fd_derivative(f.values(), g.h());
        for (x, v) in g.nodes().iter().zip(&d) {
            assert!((v.re - (4.0 * x.powi(3) - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn local_fit_recovers_polynomial_jets() {
        let g = Grid::uniform(0.0, 2.0, 21, 0.0).unwrap();
        let f = SampledFunction::from_fn(&g, |x| C64::new(x.powi(3), x * x));
        for &i in &[0usize, 7, 20] {
            let x = g.nodes()[i];
            let j = f.jet_at(i, 3);
            assert!((j.derivative_value(1) - C64::new(3.0 * x * x, 2.0 * x)).norm() < 1e-9);
            assert!((j.derivative_value(3) - C64::new(6.0, 0.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn vanishing_node_is_reported() {
        let g = Grid::uniform(-1.0, 1.0, 5, 0.0).unwrap();
        let f = SampledFunction::from_fn(&g, |x| C64::new(x, 0.0));
        assert_eq!(
            f.check_nonvanishing(1e-12),
            Err(Error::NonvanishingViolation { index: 2, x: 0.0, magnitude: 0.0 })
        );
    }
}
