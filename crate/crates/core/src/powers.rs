//! Φ-generalized powers.
//!
//! `X[n] = n ∫ X[n-1] w_n` from the base node, with `w_n = 1/Φ` for odd `n`
//! and `Φ` for even `n`; the tilde family swaps the two weights.

use crate::error::{Error, Result};
use crate::grid::{Grid, JetSource, SampledFunction};
use crate::jet::Jet;
use crate::phi::VANISH_TOLERANCE;
use crate::quadrature::Quadrature;
use crate::C64;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Plain,
    Tilde,
}

impl Family {
    pub fn conjugate(self) -> Self {
        match self {
            Family::Plain => Family::Tilde,
            Family::Tilde => Family::Plain,
        }
    }

    /// True when step `n` of this family integrates against `Φ`.
    pub fn weight_is_phi(self, n: usize) -> bool {
        (n % 2 == 0) == (self == Family::Plain)
    }
}

#[derive(Clone, Debug)]
pub struct PowerTable {
    phi: SampledFunction,
    inv_phi: SampledFunction,
    order: usize,
    x: Vec<Vec<C64>>,
    xt: Vec<Vec<C64>>,
    max_phi: f64,
    max_inv_phi: f64,
    c_bound: f64,
}

pub fn build_power_table(phi: &SampledFunction, x0_index: usize, order: usize) -> Result<PowerTable> {
    PowerTable::build(phi, x0_index, order)
}

fn recursion(phi: &[C64], inv: &[C64], q: Quadrature, base: usize, order: usize, family: Family) -> Vec<Vec<C64>> {
    let m = phi.len();
    let mut rows = Vec::with_capacity(order + 1);
    rows.push(vec![C64::new(1.0, 0.0); m]);
    for n in 1..=order {
        let w = if family.weight_is_phi(n) { phi } else { inv };
        let prev = &rows[n - 1];
        let integrand: Vec<C64> = prev.iter().zip(w).map(|(p, w)| p * w * n as f64).collect();
        let mut row = q.cumulative(&integrand, base);
        row[base] = C64::new(0.0, 0.0);
        rows.push(row);
    }
    rows
}

impl PowerTable {
    pub fn build(phi: &SampledFunction, x0_index: usize, order: usize) -> Result<Self> {
        phi.check_nonvanishing(VANISH_TOLERANCE)?;
        let phi = phi.rebased(x0_index)?;
        let inv_phi = phi.recip();
        let h = phi.grid().quadrature();
        let x = recursion(phi.values(), inv_phi.values(), h, x0_index, order, Family::Plain);
        let xt = recursion(phi.values(), inv_phi.values(), h, x0_index, order, Family::Tilde);
        let max_phi = phi.max_abs();
        let max_inv_phi = inv_phi.max_abs();
        let len = phi.grid().length();
        Ok(PowerTable {
            c_bound: max_phi * max_inv_phi * len * len,
            phi,
            inv_phi,
            order,
            x,
            xt,
            max_phi,
            max_inv_phi,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }
    pub fn phi(&self) -> &SampledFunction {
        &self.phi
    }
    pub fn inv_phi(&self) -> &SampledFunction {
        &self.inv_phi
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn x0_index(&self) -> usize {
        self.grid().x0_index()
    }
    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }
    pub fn max_phi(&self) -> f64 {
        self.max_phi
    }
    pub fn max_inv_phi(&self) -> f64 {
        self.max_inv_phi
    }

    pub fn rows(&self, family: Family) -> &[Vec<C64>] {
        match family {
            Family::Plain => &self.x,
            Family::Tilde => &self.xt,
        }
    }

    pub fn row(&self, n: usize, family: Family) -> &[C64] {
        &self.rows(family)[n]
    }

    pub fn x(&self, n: usize) -> &[C64] {
        &self.x[n]
    }

    pub fn xt(&self, n: usize) -> &[C64] {
        &self.xt[n]
    }

    /// Weight of step `n` in `family` as a sampled function.
    pub fn weight(&self, n: usize, family: Family) -> &SampledFunction {
        if family.weight_is_phi(n) {
            &self.phi
        } else {
            &self.inv_phi
        }
    }

    /// The table of `1/Φ` on the same base; its rows are this table's rows swapped.
    pub fn conjugate(&self) -> Self {
        let inv = self.inv_phi.clone();
        let phi = self.phi.clone();
        let h = self.grid().quadrature();
        let base = self.x0_index();
        PowerTable {
            x: recursion(inv.values(), phi.values(), h, base, self.order, Family::Plain),
            xt: recursion(inv.values(), phi.values(), h, base, self.order, Family::Tilde),
            max_phi: self.max_inv_phi,
            max_inv_phi: self.max_phi,
            c_bound: self.c_bound,
            order: self.order,
            phi: inv,
            inv_phi: phi,
        }
    }

    /// `X(x_b, ·)` of order `n` for another base node `x_b`.
    pub fn power_at_base(&self, n: usize, base_index: usize, family: Family) -> Result<Vec<C64>> {
        if base_index >= self.grid().len() {
            return Err(Error::InvalidArgument(format!("base index {base_index} out of range")));
        }
        let mut rows = recursion(
            self.phi.values(),
            self.inv_phi.values(),
            self.grid().quadrature(),
            base_index,
            n,
            family,
        );
        Ok(rows.swap_remove(n))
    }

    pub fn rebased(&self, base_index: usize) -> Result<Self> {
        PowerTable::build(&self.phi, base_index, self.order)
    }

    /// Both-argument tables `X(x_k, x_j)` for orders up to `n_max`.
    pub fn two_point(&self, n_max: usize) -> TwoPointTable {
        let m = self.grid().len();
        let h = self.grid().quadrature();
        let (phi, inv) = (self.phi.values(), self.inv_phi.values());
        let per_base: Vec<(Vec<Vec<C64>>, Vec<Vec<C64>>)> = (0..m)
            .into_par_iter()
            .map(|k| {
                (
                    recursion(phi, inv, h, k, n_max, Family::Plain),
                    recursion(phi, inv, h, k, n_max, Family::Tilde),
                )
            })
            .collect();
        let mut x = vec![Vec::with_capacity(m * m); n_max + 1];
        let mut xt = vec![Vec::with_capacity(m * m); n_max + 1];
        for (px, pxt) in &per_base {
            for n in 0..=n_max {
                x[n].extend_from_slice(&px[n]);
                xt[n].extend_from_slice(&pxt[n]);
            }
        }
        TwoPointTable { m, order: n_max, x, xt }
    }

    pub fn y_basis(&self) -> YBasis<'_> {
        YBasis { table: self }
    }

    /// Jets at node `i` of every row of `family` up to `n_max`, each of
    /// order `order`, from the recurrence `X[n]' = n w_n X[n-1]`.
    pub fn row_jets(&self, family: Family, i: usize, order: usize, n_max: usize) -> Vec<Jet> {
        let phi = self.phi.jet_at(i, order);
        let inv = phi.recip();
        let rows = self.rows(family);
        let mut jets = Vec::with_capacity(n_max + 1);
        jets.push(Jet::constant(C64::new(1.0, 0.0), order));
        for n in 1..=n_max {
            let w = if family.weight_is_phi(n) { &phi } else { &inv };
            let d = (w * &jets[n - 1]).scale(C64::new(n as f64, 0.0));
            jets.push(d.integral(rows[n][i]).truncate(order));
        }
        jets
    }

    /// Largest ratio of `|X|` to its growth bound over all rows and nodes;
    /// at most 1 when the bounds hold.
    pub fn growth_bound_ratio(&self) -> f64 {
        let len = self.grid().length();
        let mut worst: f64 = 0.0;
        for (family, odd_factor) in [
            (Family::Plain, len * self.max_inv_phi),
            (Family::Tilde, len * self.max_phi),
        ] {
            for (n, row) in self.rows(family).iter().enumerate() {
                let j = (n / 2) as i32;
                let mut bound = self.c_bound.powi(j);
                if n % 2 == 1 {
                    bound *= odd_factor;
                }
                let sup = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
                worst = worst.max(sup / bound);
            }
        }
        worst
    }
}

/// `X(x_k, x_j)` and `X̃(x_k, x_j)` for all node pairs, base index first.
#[derive(Clone, Debug)]
pub struct TwoPointTable {
    m: usize,
    order: usize,
    x: Vec<Vec<C64>>,
    xt: Vec<Vec<C64>>,
}

impl TwoPointTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, n: usize, family: Family, base: usize, at: usize) -> C64 {
        self.flat(n, family)[base * self.m + at]
    }

    /// Row of order `n` with base node `base`.
    pub fn from_base(&self, n: usize, family: Family, base: usize) -> &[C64] {
        &self.flat(n, family)[base * self.m..(base + 1) * self.m]
    }

    fn flat(&self, n: usize, family: Family) -> &[C64] {
        match family {
            Family::Plain => &self.x[n],
            Family::Tilde => &self.xt[n],
        }
    }
}

/// `𝒴_n = X̃⁽ⁿ⁾` for odd `n` and `X⁽ⁿ⁾` for even `n`; `𝒴̃_n` swaps.
#[derive(Clone, Copy, Debug)]
pub struct YBasis<'a> {
    table: &'a PowerTable,
}

impl<'a> YBasis<'a> {
    pub fn family(n: usize) -> Family {
        if n % 2 == 1 {
            Family::Tilde
        } else {
            Family::Plain
        }
    }

    pub fn tilde_family(n: usize) -> Family {
        Self::family(n).conjugate()
    }

    pub fn y(&self, n: usize) -> &'a [C64] {
        self.table.row(n, Self::family(n))
    }

    pub fn yt(&self, n: usize) -> &'a [C64] {
        self.table.row(n, Self::tilde_family(n))
    }

    pub fn y_row(&self, n: usize) -> PowerRow<'a> {
        PowerRow { table: self.table, n, family: Self::family(n) }
    }

    pub fn yt_row(&self, n: usize) -> PowerRow<'a> {
        PowerRow { table: self.table, n, family: Self::tilde_family(n) }
    }
}

/// One row of a table seen as a function with exact recurrence jets.
#[derive(Clone, Copy, Debug)]
pub struct PowerRow<'a> {
    pub table: &'a PowerTable,
    pub n: usize,
    pub family: Family,
}

impl JetSource for PowerRow<'_> {
    fn grid(&self) -> &Grid {
        self.table.grid()
    }
    fn value(&self, i: usize) -> C64 {
        self.table.row(self.n, self.family)[i]
    }
    fn jet(&self, i: usize, order: usize) -> Jet {
        self.table
            .row_jets(self.family, i, order, self.n)
            .swap_remove(self.n)
    }
}

/// `Σ_n coeffs[n] · row(n, family)` with jets from the rows' recurrences.
#[derive(Clone, Debug)]
pub struct RowSum<'a> {
    table: &'a PowerTable,
    family: Family,
    coeffs: Vec<C64>,
    values: Vec<C64>,
}

impl<'a> RowSum<'a> {
    pub fn new(table: &'a PowerTable, family: Family, coeffs: Vec<C64>) -> Self {
        assert!(coeffs.len() <= table.order() + 1, "combination exceeds table order");
        let rows = table.rows(family);
        let values = (0..table.grid().len())
            .map(|i| coeffs.iter().zip(rows).map(|(c, r)| c * r[i]).sum())
            .collect();
        RowSum { table, family, coeffs, values }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }
}

impl JetSource for RowSum<'_> {
    fn grid(&self) -> &Grid {
        self.table.grid()
    }
    fn value(&self, i: usize) -> C64 {
        self.values[i]
    }
    fn jet(&self, i: usize, order: usize) -> Jet {
        let n_max = self.coeffs.len().saturating_sub(1);
        let jets = self.table.row_jets(self.family, i, order, n_max);
        let mut acc = Jet::constant(C64::new(0.0, 0.0), order);
        for (c, j) in self.coeffs.iter().zip(&jets) {
            acc = &acc + &j.scale(*c);
        }
        acc
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl PowerTable {
    /// Swapping the arguments: `X̃⁽ⁿ⁾(x₀, x_b) = X⁽ⁿ⁾(x_b, x₀)` for even `n`,
    /// `X⁽ⁿ⁾(x₀, x_b) = −X⁽ⁿ⁾(x_b, x₀)` (and for `X̃`) for odd `n`. Max over
    /// `bases`, relative to `max(1, |X⁽ⁿ⁾(x₀, x_b)|)`.
    pub fn symmetry_residual(&self, n: usize, bases: &[usize]) -> Result<f64> {
        if n > self.order {
            return Err(Error::InsufficientOrder { required: n, available: self.order });
        }
        let x0 = self.x0_index();
        let mut worst: f64 = 0.0;
        for &b in bases {
            let back = self.power_at_base(n, b, Family::Plain)?[x0];
            let pairs = if n % 2 == 0 {
                vec![(self.xt[n][b], back)]
            } else {
                let back_t = self.power_at_base(n, b, Family::Tilde)?[x0];
                vec![(self.x[n][b], -back), (self.xt[n][b], -back_t)]
            };
            for (a, c) in pairs {
                worst = worst.max((a - c).norm() / a.norm().max(1.0));
            }
        }
        Ok(worst)
    }

    /// Moving the base into the integrand: for even `n`,
    /// `X⁽ⁿ⁾(x₀, x) = n ∫_{x₀}^x X̃⁽ⁿ⁻¹⁾(ξ, x)/Φ(ξ) dξ`; for odd `n`,
    /// `X̃⁽ⁿ⁾(x₀, x) = n ∫_{x₀}^x Φ(ξ) X⁽ⁿ⁻¹⁾(ξ, x) dξ`. Relative to `max(1, ‖row‖∞)`.
    pub fn moved_base_residual(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.order {
            return Err(Error::InsufficientOrder { required: n.max(1), available: self.order });
        }
        let pairs = self.two_point(n - 1);
        let m = self.grid().len();
        let base = self.x0_index();
        let q = self.grid().quadrature();
        let (family, w, target) = if n % 2 == 0 {
            (Family::Tilde, self.inv_phi.values(), &self.x[n])
        } else {
            (Family::Plain, self.phi.values(), &self.xt[n])
        };
        let scale = target.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let worst = (0..m)
            .into_par_iter()
            .map(|j| {
                let v = q.definite_with(|k| w[k] * pairs.get(n - 1, family, k, j), 0, m - 1, base, j) * n as f64;
                (v - target[j]).norm()
            })
            .reduce(|| 0.0, f64::max);
        Ok(worst / scale)
    }

    /// `Σ (−1)ᵏ C(n,k) X⁽ᵏ⁾ X̃⁽ⁿ⁻ᵏ⁾` for even `n ≥ 2`, or `Σ (−1)ᵏ C(n,k) X⁽ᵏ⁾ X⁽ⁿ⁻ᵏ⁾`
    /// for odd `n`, both zero; max over nodes relative to the largest term.
    pub fn binomial_residual(&self, n: usize) -> Result<f64> {
        if n > self.order {
            return Err(Error::InsufficientOrder { required: n, available: self.order });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("binomial identity needs n >= 1".into()));
        }
        let other = if n % 2 == 0 { &self.xt } else { &self.x };
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..self.grid().len() {
            let mut sum = C64::new(0.0, 0.0);
            for k in 0..=n {
                let term = self.x[k][i] * other[n - k][i] * binomial(n, k);
                scale = scale.max(term.norm());
                sum += if k % 2 == 0 { term } else { -term };
            }
            worst = worst.max(sum.norm());
        }
        Ok(worst / scale.max(f64::MIN_POSITIVE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{materialize_phi, ComplexValue, FunctionSpec};

    fn table(spec: FunctionSpec, a: f64, b: f64, m: usize, x0: f64, n: usize) -> PowerTable {
        let g = Grid::uniform(a, b, m, x0).unwrap();
        let phi = materialize_phi(&spec, &g).unwrap();
        PowerTable::build(&phi, g.x0_index(), n).unwrap()
    }

    #[test]
    fn unit_weight_gives_monomials() {
        let t = table(FunctionSpec::Constant { value: ComplexValue::Real(1.0) }, 0.0, 1.0, 65, 0.0, 6);
        // integrands up to degree 5 are exact
        for n in 0..=6 {
            for (x, v) in t.grid().nodes().iter().zip(t.x(n)) {
                assert!((v.re - x.powi(n as i32)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shifted_square_values_at_one() {
        let t = table(FunctionSpec::ShiftedSquare, 0.0, 1.0, 257, 0.0, 2);
        let last = t.grid().len() - 1;
        assert!((t.x(1)[last].re - 0.5).abs() < 1e-9);
        assert!((t.xt(1)[last].re - 7.0 / 3.0).abs() < 1e-12);
        assert!((t.x(2)[last].re - 5.0 / 3.0).abs() < 1e-9);
        assert!((t.xt(2)[last].re - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn conjugate_swaps_and_is_involutive() {
        let t = table(FunctionSpec::ShiftedSquare, 0.0, 1.0, 65, 0.0, 5);
        let c = t.conjugate();
        let cc = c.conjugate();
        for n in 0..=5 {
            for i in 0..65 {
                assert!((c.x(n)[i] - t.xt(n)[i]).norm() < 1e-14);
                assert!((cc.x(n)[i] - t.x(n)[i]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rebasing_at_original_base_reproduces_rows() {
        let t = table(FunctionSpec::SqrtCosh, 0.0, 2.0, 33, 0.5, 4);
        let r = t.power_at_base(4, t.x0_index(), Family::Tilde).unwrap();
        assert_eq!(r, t.xt(4));
    }

    #[test]
    fn row_jets_follow_recurrence() {
        let t = table(FunctionSpec::ShiftedSquare, 0.0, 1.0, 33, 0.0, 3);
        let i = 10;
        let x = t.grid().nodes()[i];
        let phi = (1.0 + x) * (1.0 + x);
        let jets = t.row_jets(Family::Plain, i, 2, 3);
        // X3' = 3 X2 / Φ
        assert!((jets[3].derivative_value(1).re - 3.0 * t.x(2)[i].re / phi).abs() < 1e-13);
        // X2'' = (2 Φ X1)' = 2 Φ' X1 + 2 Φ X1' = 2 Φ' X1 + 2
        let want = 2.0 * 2.0 * (1.0 + x) * t.x(1)[i].re + 2.0;
        assert!((jets[2].derivative_value(2).re - want).abs() < 1e-12);
    }

    #[test]
    fn shifted_square_identities_hold_at_a_few_bases() {
        let t = table(FunctionSpec::ShiftedSquare, 0.0, 1.0, 129, 0.0, 6);
        for n in 1..=6 {
            assert!(t.symmetry_residual(n, &[13, 64, 128]).unwrap() < 1e-10, "n = {n}");
            assert!(t.moved_base_residual(n).unwrap() < 1e-10, "n = {n}");
            assert!(t.binomial_residual(n).unwrap() < 1e-12, "n = {n}");
        }
        // X̃⁽²⁾(0,1) = X⁽²⁾(1,0) = 2/3
        assert!((t.power_at_base(2, 128, Family::Plain).unwrap()[0].re - 2.0 / 3.0).abs() < 1e-12);
    }
}
