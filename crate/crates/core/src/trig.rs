//! Φ-trigonometric and Φ-hyperbolic functions as truncated power series.
//!
//! `C = Σ (−1)ʲ X⁽²ʲ⁾/(2j)!`, `S = Σ (−1)ʲ X⁽²ʲ⁺¹⁾/(2j+1)!`, tilde versions
//! from `X̃`, and the hyperbolic ones without the signs; `j = 0..=K`.
//! Since `|X⁽²ʲ⁾| ≤ cʲ` and `|X⁽²ʲ⁺¹⁾| ≤ (b−a) m cʲ` with `m` the sup of the
//! odd-step weight, the dropped terms are bounded by
//! `Σ_{j>K} cʲ/(2j)! · (1 + (b−a) max(‖Φ‖∞, ‖1/Φ‖∞))`.

use crate::calculus::{PhiDerivativeOperator, PhiOp};
use crate::error::{Error, Result};
use crate::powers::{Family, PowerTable, RowSum};
use crate::C64;

/// Truncations searched before giving up.
pub const MAX_TRUNCATION: usize = 400;
pub const DEFAULT_EPSILON: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct PhiTrigSet<'a> {
    table: &'a PowerTable,
    pub k: usize,
    pub tail_bound: f64,
    pub c: Vec<C64>,
    pub ct: Vec<C64>,
    pub s: Vec<C64>,
    pub st: Vec<C64>,
    pub ch: Vec<C64>,
    pub cht: Vec<C64>,
    pub sh: Vec<C64>,
    pub sht: Vec<C64>,
}

fn odd_factor(table: &PowerTable) -> f64 {
    1.0 + table.grid().length() * table.max_phi().max(table.max_inv_phi())
}

// Σ_{j>k} c^j/(2j)!, summed until the terms stop mattering.
fn even_tail(c: f64, k: usize) -> f64 {
    let mut term = 1.0;
    for j in 1..=k + 1 {
        term *= c / ((2 * j - 1) as f64 * (2 * j) as f64);
    }
    let mut sum = 0.0;
    let mut j = k + 1;
    while term > 1e-300 && (term > 1e-20 * sum || j < k + 4) {
        sum += term;
        j += 1;
        term *= c / ((2 * j - 1) as f64 * (2 * j) as f64);
    }
    sum
}

/// Certified bound on the dropped terms for truncation `k`.
pub fn tail_bound(table: &PowerTable, k: usize) -> f64 {
    even_tail(table.c_bound(), k) * odd_factor(table)
}

/// Accuracy floor of the summed series in double precision.
pub fn roundoff_floor(table: &PowerTable) -> f64 {
    4.0 * f64::EPSILON * table.c_bound().sqrt().cosh() * odd_factor(table)
}

/// Smallest `K` whose tail bound is at most `epsilon`.
pub fn required_truncation(table: &PowerTable, epsilon: f64) -> Result<usize> {
    let floor = roundoff_floor(table);
    if !(epsilon >= floor) {
        return Err(Error::ToleranceTooTight(floor));
    }
    (0..=MAX_TRUNCATION)
        .find(|&k| tail_bound(table, k) <= epsilon)
        .ok_or(Error::ToleranceTooTight(epsilon))
}

/// Builds the eight series with the truncation certified for `epsilon`.
pub fn build_trig(table: &PowerTable, epsilon: f64) -> Result<PhiTrigSet<'_>> {
    let k = required_truncation(table, epsilon)?;
    build_trig_with(table, k)
}

fn series(table: &PowerTable, family: Family, k: usize, odd: bool, alternating: bool) -> Vec<C64> {
    RowSum::new(table, family, coefficients(k, odd, alternating)).into_values()
}

fn coefficients(k: usize, odd: bool, alternating: bool) -> Vec<C64> {
    let len = 2 * k + 2;
    let mut coeffs = vec![C64::new(0.0, 0.0); len];
    let mut fact = 1.0;
    for n in 0..len {
        if n > 0 {
            fact *= n as f64;
        }
        if (n % 2 == 1) == odd {
            let j = n / 2;
            let sign = if alternating && j % 2 == 1 { -1.0 } else { 1.0 };
            coeffs[n] = C64::new(sign / fact, 0.0);
        }
    }
    coeffs
}

/// Builds the series summed for `j = 0..=k`; needs table order `2k+1`.
pub fn build_trig_with(table: &PowerTable, k: usize) -> Result<PhiTrigSet<'_>> {
    let required = 2 * k + 1;
    if table.order() < required {
        return Err(Error::InsufficientOrder { required, available: table.order() });
    }
    let (p, t) = (Family::Plain, Family::Tilde);
    Ok(PhiTrigSet {
        table,
        k,
        tail_bound: tail_bound(table, k),
        c: series(table, p, k, false, true),
        ct: series(table, t, k, false, true),
        s: series(table, p, k, true, true),
        st: series(table, t, k, true, true),
        ch: series(table, p, k, false, false),
        cht: series(table, t, k, false, false),
        sh: series(table, p, k, true, false),
        sht: series(table, t, k, true, false),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigDerivativeReport {
    /// `max |D S − C|`
    pub ds_minus_c: f64,
    /// `max |D̃ C + S|`
    pub dtc_plus_s: f64,
    /// `max |D Sh − Ch|`
    pub dsh_minus_ch: f64,
    /// `max |D̃ Ch − Sh|`
    pub dtch_minus_sh: f64,
    /// bound on the last odd term, `(b−a) max(‖Φ‖∞, ‖1/Φ‖∞) c^K/(2K+1)!`,
    /// which is what `D̃C + S` and `D̃ Ch − Sh` reduce to
    pub defect_bound: f64,
}

impl TrigDerivativeReport {
    pub fn max(&self) -> f64 {
        self.ds_minus_c.max(self.dtc_plus_s).max(self.dsh_minus_ch).max(self.dtch_minus_sh)
    }
}

fn sup_diff(a: &[C64], b: &[C64], sign: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y * sign).norm()).fold(0.0, f64::max)
}

impl<'a> PhiTrigSet<'a> {
    pub fn table(&self) -> &'a PowerTable {
        self.table
    }

    /// `max |C C̃ + S S̃ − 1|`
    pub fn elliptic_residual(&self) -> f64 {
        (0..self.c.len())
            .map(|i| (self.c[i] * self.ct[i] + self.s[i] * self.st[i] - 1.0).norm())
            .fold(0.0, f64::max)
    }

    /// `max |Ch C̃h − Sh S̃h − 1|`
    pub fn hyperbolic_residual(&self) -> f64 {
        (0..self.c.len())
            .map(|i| (self.ch[i] * self.cht[i] - self.sh[i] * self.sht[i] - 1.0).norm())
            .fold(0.0, f64::max)
    }

    /// Phase-space pairs `(C C̃, S S̃)` per node; they lie on `u + v = 1`.
    pub fn elliptic_phase(&self) -> Vec<(C64, C64)> {
        (0..self.c.len()).map(|i| (self.c[i] * self.ct[i], self.s[i] * self.st[i])).collect()
    }

    /// Phase-space pairs `(Ch C̃h, Sh S̃h)` per node; they lie on `u − v = 1`.
    pub fn hyperbolic_phase(&self) -> Vec<(C64, C64)> {
        (0..self.c.len()).map(|i| (self.ch[i] * self.cht[i], self.sh[i] * self.sht[i])).collect()
    }

    /// Residuals of `DS = C`, `D̃C = −S`, `D Sh = Ch`, `D̃ Ch = Sh` with exact
    /// jet derivatives. Truncation leaves `D̃C` and `D̃ Ch` one term short,
    /// so those two are bounded by [`Self::defect_bound`], not round-off.
    pub fn derivative_check(&self) -> TrigDerivativeReport {
        let op = PhiDerivativeOperator::new(self.table.phi());
        let row = |odd, alt| RowSum::new(self.table, Family::Plain, coefficients(self.k, odd, alt));
        let d = |f: &RowSum, o: PhiOp| op.apply(f, &[o]);
        TrigDerivativeReport {
            ds_minus_c: sup_diff(&d(&row(true, true), PhiOp::D), &self.c, 1.0),
            dtc_plus_s: sup_diff(&d(&row(false, true), PhiOp::Dt), &self.s, -1.0),
            dsh_minus_ch: sup_diff(&d(&row(true, false), PhiOp::D), &self.ch, 1.0),
            dtch_minus_sh: sup_diff(&d(&row(false, false), PhiOp::Dt), &self.sh, 1.0),
            defect_bound: self.defect_bound(),
        }
    }

    pub fn defect_bound(&self) -> f64 {
        let t = self.table;
        let mut b = t.grid().length() * t.max_phi().max(t.max_inv_phi());
        for n in 1..=2 * self.k + 1 {
            b /= n as f64;
        }
        b * t.c_bound().powi(self.k as i32)
    }
}

/// `trig_derivative_check` over a built set.
pub fn trig_derivative_check(trig: &PhiTrigSet<'_>) -> TrigDerivativeReport {
    trig.derivative_check()
}
