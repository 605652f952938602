use super::{d_k, dt_k, PhiDerivativeOperator, PhiOp};
use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::jet::Jet;
use crate::powers::{Family, PowerRow, PowerTable, YBasis};
use crate::C64;
use rayon::prelude::*;

/// Cap on the order of the fundamental-set and particular-solution checks.
pub const CAUCHY_ORDER_CAP: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalSetReport {
    pub n: usize,
    /// `max |op 𝒴ₖ|` over members of `𝒮ₙ`, with `op` its annihilator
    pub plain_set: f64,
    /// the same over `𝒮̃ₙ`
    pub tilde_set: f64,
    /// `n!`, the size of the constants the operators pass through
    pub scale: f64,
}

impl FundamentalSetReport {
    pub fn max(&self) -> f64 {
        self.plain_set.max(self.tilde_set)
    }
}

/// For odd `n`, `D⁽ⁿ⁺¹⁾` annihilates `𝒮ₙ` and `D̃⁽ⁿ⁺¹⁾` annihilates `𝒮̃ₙ`;
/// even `n` swaps the operators.
pub fn fundamental_set_residual(table: &PowerTable, n: usize) -> Result<FundamentalSetReport> {
    if n > CAUCHY_ORDER_CAP {
        return Err(Error::OrderCapExceeded { requested: n, cap: CAUCHY_ORDER_CAP });
    }
    if n > table.order() {
        return Err(Error::InsufficientOrder { required: n, available: table.order() });
    }
    let op = PhiDerivativeOperator::new(table.phi());
    let (plain_op, tilde_op) = if n % 2 == 1 { (d_k(n + 1), dt_k(n + 1)) } else { (dt_k(n + 1), d_k(n + 1)) };
    let worst = |tilde: bool, ops: &[PhiOp]| {
        (0..=n)
            .map(|k| {
                let mut family = YBasis::family(k);
                if tilde {
                    family = family.conjugate();
                }
                let row = PowerRow { table, n: k, family };
                op.apply(&row, ops).iter().map(|v| v.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    Ok(FundamentalSetReport {
        n,
        plain_set: worst(false, &plain_op),
        tilde_set: worst(true, &tilde_op),
        scale: super::falling(n, n),
    })
}

// Kernel family and integrand weight: D⁽ⁿ⁺¹⁾ uses X̃ with h/Φ, D̃⁽ⁿ⁺¹⁾ uses X with Φh.
fn setup(table: &PowerTable, h: &SampledFunction, tilde: bool) -> (Family, Vec<C64>) {
    if tilde {
        (Family::Plain, h.values().iter().zip(table.phi().values()).map(|(a, b)| a * b).collect())
    } else {
        (Family::Tilde, h.values().iter().zip(table.inv_phi().values()).map(|(a, b)| a * b).collect())
    }
}

fn check(table: &PowerTable, h: &SampledFunction, n: usize) -> Result<()> {
    if !h.grid().same_nodes(table.grid()) {
        return Err(Error::GridMismatch);
    }
    if n > CAUCHY_ORDER_CAP {
        return Err(Error::OrderCapExceeded { requested: n, cap: CAUCHY_ORDER_CAP });
    }
    if n > table.order() {
        return Err(Error::InsufficientOrder { required: n, available: table.order() });
    }
    Ok(())
}

// I_m(x_j) = ∫_{x₀}^{x_j} K⁽ᵐ⁾(ξ, x_j) g(ξ) dξ for m = 0..=n.
fn cauchy_integrals(table: &PowerTable, g: &[C64], n: usize, family: Family) -> Vec<Vec<C64>> {
    let pairs = table.two_point(n);
    let m = table.grid().len();
    let base = table.x0_index();
    let q = table.grid().quadrature();
    (0..=n)
        .map(|order| {
            (0..m)
                .into_par_iter()
                .map(|j| q.definite_with(|xi| g[xi] * pairs.get(order, family, xi, j), 0, m - 1, base, j))
                .collect()
        })
        .collect()
}

/// Particular solution of `D⁽ⁿ⁺¹⁾y = h` (or `D̃⁽ⁿ⁺¹⁾y = h` when `tilde`)
/// vanishing to order `n` at the base node:
/// `y(x) = (1/n!) ∫_{x₀}^{x} X̃⁽ⁿ⁾(ξ, x) h(ξ)/Φ(ξ) dξ`, and with `X` and `Φh`
/// for the tilde equation.
pub fn particular_solution(table: &PowerTable, h: &SampledFunction, n: usize, tilde: bool) -> Result<SampledFunction> {
    check(table, h, n)?;
    let (family, g) = setup(table, h, tilde);
    let mut rows = cauchy_integrals(table, &g, n, family);
    let fact = super::falling(n, n);
    let values = rows.swap_remove(n).into_iter().map(|v| v / fact).collect();
    SampledFunction::new(table.grid().clone(), values)
}

/// `max |op y − h| / max(1, ‖h‖∞)` with `op = D⁽ⁿ⁺¹⁾` (or `D̃⁽ⁿ⁺¹⁾`).
///
/// Jets of `y` come from `I_m' = [m = 0] g + m w_m I_{m−1}`, the derivative
/// of the kernel in its second argument, seeded with the computed `I_m`.
pub fn particular_solution_residual(table: &PowerTable, h: &SampledFunction, n: usize, tilde: bool) -> Result<f64> {
    check(table, h, n)?;
    let (family, g) = setup(table, h, tilde);
    let rows = cauchy_integrals(table, &g, n, family);
    let op = PhiDerivativeOperator::new(table.phi());
    let ops = if tilde { dt_k(n + 1) } else { d_k(n + 1) };
    let order = n + 1;
    let fact = super::falling(n, n);
    let worst = (0..table.grid().len())
        .into_par_iter()
        .map(|i| {
            let phi = table.phi().jet_at(i, order);
            let inv = phi.recip();
            let weight_jet = if tilde { &phi } else { &inv };
            let g_jet = &h.jet_at(i, order) * weight_jet;
            let mut jet: Jet = g_jet.integral(rows[0][i]).truncate(order);
            for m in 1..=n {
                let w = if family.weight_is_phi(m) { &phi } else { &inv };
                jet = (w * &jet).scale(C64::new(m as f64, 0.0)).integral(rows[m][i]).truncate(order);
            }
            (op.apply_jet(i, jet.scale(C64::new(1.0 / fact, 0.0)), &ops) - h.values()[i]).norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst / h.max_abs().max(1.0))
}
