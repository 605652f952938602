use super::{script_d, PhiDerivativeOperator};
use crate::error::{Error, Result};
use crate::grid::JetSource;
use crate::powers::{PowerTable, YBasis};
use crate::C64;
use rayon::prelude::*;

/// Expansion of `f` in the `𝒴` basis around the table's base node, with the
/// integral remainder sampled at every node.
#[derive(Clone, Debug)]
pub struct TaylorExpansion {
    pub x0_index: usize,
    pub order: usize,
    /// `𝒟ₖ f(x₀) / k!` for `k = 0..=order`
    pub coefficients: Vec<C64>,
    /// `Σ coefficients[k] 𝒴ₖ(x₀, ·)`
    pub partial_sum: Vec<C64>,
    pub remainder: Vec<C64>,
}

impl TaylorExpansion {
    /// `max |partial_sum + remainder − f|` relative to `max(1, ‖f‖∞)`.
    pub fn reconstruction_residual(&self, f: &(impl JetSource + ?Sized)) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for (i, (p, r)) in self.partial_sum.iter().zip(&self.remainder).enumerate() {
            let v = f.value(i);
            scale = scale.max(v.norm());
            worst = worst.max((p + r - v).norm());
        }
        worst / scale
    }
}

pub fn taylor_expand(f: &(impl JetSource + ?Sized), table: &PowerTable, n: usize) -> Result<TaylorExpansion> {
    if !table.phi().is_real() {
        return Err(Error::RealPhiRequired);
    }
    if !f.grid().same_nodes(table.grid()) {
        return Err(Error::GridMismatch);
    }
    if n > table.order() {
        return Err(Error::InsufficientOrder { required: n, available: table.order() });
    }
    let op = PhiDerivativeOperator::new(table.phi());
    let base = table.x0_index();
    let mut fact = 1.0;
    let coefficients: Vec<C64> = (0..=n)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            op.apply_at(f, base, &script_d(k)) / fact
        })
        .collect();
    let basis = table.y_basis();
    let m = table.grid().len();
    let partial_sum: Vec<C64> = (0..m)
        .map(|i| (0..=n).map(|k| coefficients[k] * basis.y(k)[i]).sum())
        .collect();

    // Rₙ(x) = (1/n!) ∫_{x₀}^{x} Φ^{(−1)ⁿ}(ξ) 𝒴ₙ(ξ, x) 𝒟ₙ₊₁f(ξ) dξ
    let top = op.apply(f, &script_d(n + 1));
    let weight = if n % 2 == 0 { table.phi().values() } else { table.inv_phi().values() };
    let integrand: Vec<C64> = top.iter().zip(weight).map(|(d, w)| d * w).collect();
    let pairs = table.two_point(n);
    let family = YBasis::family(n);
    let q = table.grid().quadrature();
    let remainder = (0..m)
        .into_par_iter()
        .map(|j| q.definite_with(|xi| integrand[xi] * pairs.get(n, family, xi, j), 0, m - 1, base, j) / fact)
        .collect();
    Ok(TaylorExpansion { x0_index: base, order: n, coefficients, partial_sum, remainder })
}
