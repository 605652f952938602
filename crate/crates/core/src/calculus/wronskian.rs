use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::powers::{Family, PowerTable, YBasis};
use crate::C64;
use nalgebra::DMatrix;

/// Largest `n` for which the numeric `(n+1)×(n+1)` determinant is formed.
pub const WRONSKIAN_ORDER_CAP: usize = 4;

/// Closed forms `𝒲ₙ = αₙ (√Φ)^{n+1}` (odd `n`), `αₙ (√Φ)ⁿ` (even `n`), and
/// the tilde forms with `1/√Φ`; `αₙ = Π_{k≤n} k!`.
#[derive(Clone, Debug)]
pub struct WronskianForms {
    pub n: usize,
    pub alpha: f64,
    phi: SampledFunction,
}

impl WronskianForms {
    pub fn new(phi: &SampledFunction, n: usize) -> Result<Self> {
        if !phi.is_real_positive() {
            return Err(Error::PositivePhiRequired);
        }
        let mut alpha = 1.0;
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
            alpha *= fact;
        }
        Ok(WronskianForms { n, alpha, phi: phi.clone() })
    }

    fn exponent(&self) -> i32 {
        if self.n % 2 == 1 {
            self.n as i32 + 1
        } else {
            self.n as i32
        }
    }

    /// `(𝒲ₙ(x_i), 𝒲̃ₙ(x_i))`
    pub fn at(&self, i: usize) -> (f64, f64) {
        let root = self.phi.values()[i].re.sqrt();
        let p = self.exponent();
        (self.alpha * root.powi(p), self.alpha * root.powi(-p))
    }
}

/// Matrix of ordinary derivatives `d^r/dx^r 𝒴_c` (or `𝒴̃_c`) at node `i`,
/// rows `r` and columns `c` in `0..=n`.
pub fn wronskian_matrix(table: &PowerTable, n: usize, i: usize, tilde: bool) -> DMatrix<C64> {
    let plain = table.row_jets(Family::Plain, i, n, n);
    let tilde_jets = table.row_jets(Family::Tilde, i, n, n);
    DMatrix::from_fn(n + 1, n + 1, |r, c| {
        let mut family = YBasis::family(c);
        if tilde {
            family = family.conjugate();
        }
        let jets = if family == Family::Plain { &plain } else { &tilde_jets };
        jets[c].derivative_value(r)
    })
}

pub fn wronskian_numeric(table: &PowerTable, n: usize, i: usize, tilde: bool) -> Result<C64> {
    if n > WRONSKIAN_ORDER_CAP {
        return Err(Error::OrderCapExceeded { requested: n, cap: WRONSKIAN_ORDER_CAP });
    }
    if n > table.order() {
        return Err(Error::InsufficientOrder { required: n, available: table.order() });
    }
    Ok(wronskian_matrix(table, n, i, tilde).determinant())
}
