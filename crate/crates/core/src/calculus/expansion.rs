use super::{d_k, dt_k, wronskian_matrix, PhiDerivativeOperator};
use crate::error::{Error, Result};
use crate::grid::JetSource;
use crate::powers::PowerTable;
use crate::C64;
use nalgebra::DMatrix;

pub const EXPANSION_ORDER_CAP: usize = 3;
/// Wronskian matrices with a larger singular-value ratio are refused.
pub const CONDITION_LIMIT: f64 = 1e10;

/// `D⁽ⁿ⁾f = Σₖ a[k] f⁽ᵏ⁾` and `D̃⁽ⁿ⁾f = Σₖ at[k] f⁽ᵏ⁾`, sampled per node.
#[derive(Clone, Debug)]
pub struct ExpansionCoefficients {
    pub n: usize,
    /// `a[k][i]` for `k = 0..=n`
    pub a: Vec<Vec<C64>>,
    pub at: Vec<Vec<C64>>,
    /// largest condition estimate met over the nodes
    pub condition: f64,
}

impl ExpansionCoefficients {
    /// `Σₖ a[k] f⁽ᵏ⁾` (or with `at`) at every node.
    pub fn apply(&self, f: &(impl JetSource + ?Sized), tilde: bool) -> Vec<C64> {
        let coeffs = if tilde { &self.at } else { &self.a };
        (0..coeffs[0].len())
            .map(|i| {
                let jet = f.jet(i, self.n);
                (0..=self.n).map(|k| coeffs[k][i] * jet.derivative_value(k)).sum()
            })
            .collect()
    }

    /// `max |Σ a_k f⁽ᵏ⁾ − D⁽ⁿ⁾f|` over both operators, relative to
    /// `max(1, ‖D⁽ⁿ⁾f‖∞)`.
    pub fn reconstruction_residual(&self, table: &PowerTable, f: &(impl JetSource + ?Sized)) -> f64 {
        let op = PhiDerivativeOperator::new(table.phi());
        let mut worst: f64 = 0.0;
        for (tilde, ops) in [(false, d_k(self.n)), (true, dt_k(self.n))] {
            let direct = op.apply(f, &ops);
            let expanded = self.apply(f, tilde);
            let scale = direct.iter().map(|v| v.norm()).fold(1.0, f64::max);
            let r = direct.iter().zip(&expanded).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst = worst.max(r / scale);
        }
        worst
    }
}

// Coefficients of L_n f = 𝒲[𝒴₀..𝒴ₙ₋₁, f] / 𝒲ₙ₋₁ by cofactors of the last column.
fn l_coefficients(table: &PowerTable, n: usize, i: usize, tilde: bool) -> Result<(Vec<C64>, f64)> {
    let full = wronskian_matrix(table, n, i, tilde);
    let lead = full.view((0, 0), (n, n)).into_owned();
    let sv = lead.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::ConditioningFailure { index: i, condition });
    }
    let w = lead.determinant();
    let basis = full.columns(0, n).into_owned();
    let coeffs = (0..=n)
        .map(|r| {
            let minor: DMatrix<C64> = basis.clone().remove_row(r);
            let sign = if (r + n) % 2 == 0 { 1.0 } else { -1.0 };
            let det = if n == 0 { C64::new(1.0, 0.0) } else { minor.determinant() };
            det * sign / w
        })
        .collect();
    Ok((coeffs, condition))
}

/// `D⁽ⁿ⁾ = L_n` (even `n`) or `Φ L̃_n` (odd `n`); `D̃⁽ⁿ⁾ = L_n/Φ` (odd `n`)
/// or `L̃_n` (even `n`); `L̃` is `L` on the `𝒴̃` basis.
pub fn derivative_expansion_coefficients(table: &PowerTable, n: usize) -> Result<ExpansionCoefficients> {
    if n == 0 {
        return Err(Error::InvalidArgument("expansion order must be at least 1".into()));
    }
    if n > EXPANSION_ORDER_CAP {
        return Err(Error::OrderCapExceeded { requested: n, cap: EXPANSION_ORDER_CAP });
    }
    if n > table.order() {
        return Err(Error::InsufficientOrder { required: n, available: table.order() });
    }
    if !table.phi().is_real_positive() {
        return Err(Error::PositivePhiRequired);
    }
    let m = table.grid().len();
    let mut a = vec![vec![C64::new(0.0, 0.0); m]; n + 1];
    let mut at = a.clone();
    let mut condition: f64 = 0.0;
    for i in 0..m {
        let (l, c1) = l_coefficients(table, n, i, false)?;
        let (lt, c2) = l_coefficients(table, n, i, true)?;
        condition = condition.max(c1).max(c2);
        let phi = table.phi().values()[i];
        for k in 0..=n {
            if n % 2 == 0 {
                a[k][i] = l[k];
                at[k][i] = lt[k];
            } else {
                a[k][i] = lt[k] * phi;
                at[k][i] = l[k] / phi;
            }
        }
    }
    Ok(ExpansionCoefficients { n, a, at, condition })
}
