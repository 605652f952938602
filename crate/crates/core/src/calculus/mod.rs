//! Φ-derivatives and the identities built on them.
//!
//! `D h = Φ h'` and `D̃ h = h'/Φ`. Higher orders alternate with the named
//! operator outermost: `D⁽ᵏ⁾ = D D̃ D …` and `D̃⁽ᵏ⁾ = D̃ D D̃ …`, `k` factors.
//! Every derivative is taken on exact jets, never on sampled differences.

mod cauchy;
mod expansion;
mod taylor;
mod wronskian;

pub use cauchy::{
    fundamental_set_residual, particular_solution, particular_solution_residual, FundamentalSetReport,
};
pub use expansion::{derivative_expansion_coefficients, ExpansionCoefficients};
pub use taylor::{taylor_expand, TaylorExpansion};
pub use wronskian::{wronskian_numeric, wronskian_matrix, WronskianForms, WRONSKIAN_ORDER_CAP};

use crate::error::{Error, Result};
use crate::grid::{JetSource, SampledFunction};
use crate::jet::Jet;
use crate::powers::{Family, PowerRow, PowerTable};
use crate::C64;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PhiOp {
    /// `Φ d/dx`
    D,
    /// `(1/Φ) d/dx`
    Dt,
}

impl PhiOp {
    pub fn other(self) -> Self {
        match self {
            PhiOp::D => PhiOp::Dt,
            PhiOp::Dt => PhiOp::D,
        }
    }
}

/// `k` alternating factors, outermost first, starting with `outer`.
pub fn alternating(outer: PhiOp, k: usize) -> Vec<PhiOp> {
    let mut ops = Vec::with_capacity(k);
    let mut op = outer;
    for _ in 0..k {
        ops.push(op);
        op = op.other();
    }
    ops
}

/// `D⁽ᵏ⁾`
pub fn d_k(k: usize) -> Vec<PhiOp> {
    alternating(PhiOp::D, k)
}

/// `D̃⁽ᵏ⁾`
pub fn dt_k(k: usize) -> Vec<PhiOp> {
    alternating(PhiOp::Dt, k)
}

/// `𝒟ₖ`: `D̃⁽ᵏ⁾` for odd `k`, `D⁽ᵏ⁾` for even `k`.
pub fn script_d(k: usize) -> Vec<PhiOp> {
    if k % 2 == 1 {
        dt_k(k)
    } else {
        d_k(k)
    }
}

/// Applies sequences of `D` and `D̃` for a fixed Φ.
#[derive(Clone, Debug)]
pub struct PhiDerivativeOperator {
    phi: SampledFunction,
}

impl PhiDerivativeOperator {
    pub fn new(phi: &SampledFunction) -> Self {
        PhiDerivativeOperator { phi: phi.clone() }
    }

    pub fn phi(&self) -> &SampledFunction {
        &self.phi
    }

    /// `ops` applied to `f` at node `i`; `ops[0]` acts last.
    pub fn apply_at(&self, f: &(impl JetSource + ?Sized), i: usize, ops: &[PhiOp]) -> C64 {
        self.apply_jet(i, f.jet(i, ops.len()), ops)
    }

    /// `ops` applied to a function given by its jet at node `i`, of order
    /// at least `ops.len()`.
    pub fn apply_jet(&self, i: usize, mut jet: Jet, ops: &[PhiOp]) -> C64 {
        let phi = self.phi.jet_at(i, ops.len());
        let inv = phi.recip();
        for op in ops.iter().rev() {
            let d = jet.derivative();
            jet = match op {
                PhiOp::D => &phi * &d,
                PhiOp::Dt => &inv * &d,
            };
        }
        jet.value()
    }

    pub fn apply(&self, f: &(impl JetSource + ?Sized), ops: &[PhiOp]) -> Vec<C64> {
        (0..self.phi.len())
            .into_par_iter()
            .map(|i| self.apply_at(f, i, ops))
            .collect()
    }
}

/// The four operator/row pairings covered by the derivative-of-power rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PowerDerivative {
    /// `D⁽ᵏ⁾ X⁽ⁿ⁾`, same parity
    DkXn,
    /// `D̃⁽ᵏ⁾ X̃⁽ⁿ⁾`, same parity
    DtkXtn,
    /// `D̃⁽ᵏ⁾ X⁽ⁿ⁾`, opposite parity
    DtkXn,
    /// `D⁽ᵏ⁾ X̃⁽ⁿ⁾`, opposite parity
    DkXtn,
}

impl PowerDerivative {
    pub const ALL: [PowerDerivative; 4] =
        [PowerDerivative::DkXn, PowerDerivative::DtkXtn, PowerDerivative::DtkXn, PowerDerivative::DkXtn];

    pub fn name(self) -> &'static str {
        match self {
            PowerDerivative::DkXn => "DkXn",
            PowerDerivative::DtkXtn => "DtkXtn",
            PowerDerivative::DtkXn => "DtkXn",
            PowerDerivative::DkXtn => "DkXtn",
        }
    }

    pub fn family(self) -> Family {
        match self {
            PowerDerivative::DkXn | PowerDerivative::DtkXn => Family::Plain,
            PowerDerivative::DtkXtn | PowerDerivative::DkXtn => Family::Tilde,
        }
    }

    pub fn operator(self, k: usize) -> Vec<PhiOp> {
        match self {
            PowerDerivative::DkXn | PowerDerivative::DkXtn => d_k(k),
            PowerDerivative::DtkXtn | PowerDerivative::DtkXn => dt_k(k),
        }
    }

    /// Whether the rule covers `(k, n)`.
    pub fn applies(self, k: usize, n: usize) -> bool {
        let same = k % 2 == n % 2;
        match self {
            PowerDerivative::DkXn | PowerDerivative::DtkXtn => same && n >= k,
            PowerDerivative::DtkXn | PowerDerivative::DkXtn => !same && n > k,
        }
    }
}

/// Falling factorial `n!/(n-k)!`.
pub fn falling(n: usize, k: usize) -> f64 {
    ((n - k + 1)..=n).map(|v| v as f64).product()
}

/// The operator of `variant` applied to the order-`n` row; the rule says
/// this equals `n!/(n-k)!` times the order `n-k` row of the same family.
pub fn phi_derivative_power(table: &PowerTable, k: usize, n: usize, variant: PowerDerivative) -> Result<Vec<C64>> {
    if !variant.applies(k, n) {
        return Err(Error::ParityMismatch { k, n, variant: variant.name() });
    }
    if n > table.order() {
        return Err(Error::InsufficientOrder { required: n, available: table.order() });
    }
    let row = PowerRow { table, n, family: variant.family() };
    Ok(PhiDerivativeOperator::new(table.phi()).apply(&row, &variant.operator(k)))
}

/// Max over nodes of `|computed − n!/(n−k)! X⁽ⁿ⁻ᵏ⁾|`, relative to the sup of
/// the right-hand side (or absolute when that is below one).
pub fn power_derivative_residual(table: &PowerTable, k: usize, n: usize, variant: PowerDerivative) -> Result<f64> {
    let got = phi_derivative_power(table, k, n, variant)?;
    let f = falling(n, k);
    let want = table.row(n - k, variant.family());
    let scale = want.iter().map(|v| v.norm() * f).fold(1.0, f64::max);
    Ok(got
        .iter()
        .zip(want)
        .map(|(g, w)| (g - w * f).norm())
        .fold(0.0, f64::max)
        / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::phi::{materialize_phi, FunctionSpec};

    fn table(spec: FunctionSpec, n: usize) -> PowerTable {
        let g = Grid::uniform(0.0, 1.0, 65, 0.0).unwrap();
        PowerTable::build(&materialize_phi(&spec, &g).unwrap(), 0, n).unwrap()
    }

    #[test]
    fn operator_sequences_alternate_from_the_outside() {
        assert_eq!(d_k(3), vec![PhiOp::D, PhiOp::Dt, PhiOp::D]);
        assert_eq!(dt_k(2), vec![PhiOp::Dt, PhiOp::D]);
        assert_eq!(script_d(3), dt_k(3));
        assert_eq!(script_d(4), d_k(4));
        assert!(script_d(0).is_empty());
    }

    #[test]
    fn order_k_of_order_k_is_factorial() {
        let t = table(FunctionSpec::ShiftedSquare, 5);
        for k in 0..=5 {
            for v in phi_derivative_power(&t, k, k, PowerDerivative::DkXn).unwrap() {
                assert!((v - C64::new(falling(k, k), 0.0)).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn second_derivative_of_cubic_row_has_correction_term() {
        let t = table(FunctionSpec::ShiftedSquare, 3);
        let got = phi_derivative_power(&t, 2, 3, PowerDerivative::DkXn);
        assert!(matches!(got, Err(Error::ParityMismatch { k: 2, n: 3, .. })));
        // D⁽²⁾ = D D̃ applied to X⁽³⁾ directly
        let op = PhiDerivativeOperator::new(t.phi());
        let row = PowerRow { table: &t, n: 3, family: Family::Plain };
        let vals = op.apply(&row, &d_k(2));
        for (i, &x) in t.grid().nodes().iter().enumerate() {
            let phi = (1.0 + x) * (1.0 + x);
            let dphi = 2.0 * (1.0 + x);
            let want = 6.0 * t.x(1)[i] - t.x(2)[i] * (6.0 * dphi / (phi * phi));
            assert!((vals[i] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn unit_phi_gives_classical_derivative() {
        let t = table(FunctionSpec::Constant { value: crate::phi::ComplexValue::Real(1.0) }, 4);
        let v = phi_derivative_power(&t, 2, 4, PowerDerivative::DkXn).unwrap();
        for (x, d) in t.grid().nodes().iter().zip(v) {
            assert!((d.re - 12.0 * x * x).abs() < 1e-12);
        }
    }
}
