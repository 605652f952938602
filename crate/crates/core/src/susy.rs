//! Ground-state SUSY pairs: `W = −ψ₀'/ψ₀`, `V₁ = W² − W'`, `V₂ = W² + W'`.
//!
//! `H₁ = −d² + V₁` annihilates `ψ₀` and `H₂ = −d² + V₂` annihilates `1/ψ₀`,
//! so replacing `ψ₀` by `1/ψ₀` negates `W` and swaps the two potentials.

use crate::error::{Error, Result};
use crate::grid::{fd_derivative, SampledFunction};
use crate::phi::VANISH_TOLERANCE;
use crate::spps::{build_spps, dirichlet_eigenvalues_with, schrodinger_problem, EigenOptions, EigenResult};
use crate::C64;

#[derive(Clone, Debug)]
pub struct SusyPair {
    pub psi0: SampledFunction,
    pub w: SampledFunction,
    /// `W'`
    pub dw: Vec<C64>,
    pub v1: SampledFunction,
    pub v2: SampledFunction,
    /// `ψ₀²`
    pub phi: SampledFunction,
}

/// `W` and `W'` from jets (closed form or local fit); tabulated `ψ₀` without
/// a closed form goes through 4th-order differences instead.
pub fn build_susy_pair(psi0: &SampledFunction) -> Result<SusyPair> {
    if let Some((index, x, _)) = psi0.first_vanishing(VANISH_TOLERANCE) {
        return Err(Error::GroundStateVanishes { index, x });
    }
    let g = psi0.grid();
    let m = g.len();
    let (w, dw): (Vec<C64>, Vec<C64>) = if psi0.expr().is_some() {
        (0..m)
            .map(|i| {
                let j = psi0.jet_at(i, 2);
                let (p, d1, d2) = (j.value(), j.derivative_value(1), j.derivative_value(2));
                (-d1 / p, (d1 * d1 - d2 * p) / (p * p))
            })
            .unzip()
    } else {
        let d = match psi0.derivative() {
            Some(d) => d.to_vec(),
            None => fd_derivative(psi0.values(), g.h()),
        };
        let w: Vec<C64> = d.iter().zip(psi0.values()).map(|(d, p)| -d / p).collect();
        let dw = fd_derivative(&w, g.h());
        (w, dw)
    };
    let v1 = (0..m).map(|i| w[i] * w[i] - dw[i]).collect();
    let v2 = (0..m).map(|i| w[i] * w[i] + dw[i]).collect();
    Ok(SusyPair {
        psi0: psi0.clone(),
        w: SampledFunction::new(g.clone(), w)?,
        dw,
        v1: SampledFunction::new(g.clone(), v1)?,
        v2: SampledFunction::new(g.clone(), v2)?,
        phi: psi0.powi(2),
    })
}

/// The pair generated by `1/ψ₀`.
pub fn r_transform(pair: &SusyPair) -> Result<SusyPair> {
    build_susy_pair(&pair.psi0.recip())
}

impl SusyPair {
    /// `max |V₂ − V₁ − 2W'|`
    pub fn difference_residual(&self) -> f64 {
        (0..self.w.len())
            .map(|i| (self.v2.values()[i] - self.v1.values()[i] - self.dw[i] * 2.0).norm())
            .fold(0.0, f64::max)
    }

    /// `max |−(1/ψ₀)'' + V₂/ψ₀| / ‖V₂/ψ₀‖∞`
    pub fn partner_ground_residual(&self) -> f64 {
        let inv = self.psi0.recip();
        let m = inv.len();
        let second: Vec<C64> = if inv.expr().is_some() {
            (0..m).map(|i| inv.jet_at(i, 2).derivative_value(2)).collect()
        } else {
            let h = inv.grid().h();
            fd_derivative(&fd_derivative(inv.values(), h), h)
        };
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..m {
            let vi = self.v2.values()[i] * inv.values()[i];
            worst = worst.max((vi - second[i]).norm());
            scale = scale.max(vi.norm());
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumRow {
    pub level: usize,
    /// `E⁽¹⁾ₙ₊₁`
    pub e1: f64,
    /// `E⁽²⁾ₙ`, which should equal the shifted first spectrum
    pub e2_shifted: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// `E⁽¹⁾₀`
    pub ground: Option<f64>,
    pub rows: Vec<SpectrumRow>,
    pub max_difference: f64,
    pub h1: Option<EigenResult>,
    pub h2: Option<EigenResult>,
}

/// Dirichlet spectra of `H₁` (SPPS with `u₀ = ψ₀`) and `H₂` (with `u₀ = 1/ψ₀`)
/// on the grid of `ψ₀` with its left endpoint as base, compared level by level.
pub fn partner_spectrum_check(
    pair: &SusyPair,
    n_levels: usize,
    k: usize,
    range: (f64, f64),
    opts: &EigenOptions,
) -> Result<SpectrumReport> {
    if n_levels == 0 {
        return Ok(SpectrumReport { ground: None, rows: Vec::new(), max_difference: 0.0, h1: None, h2: None });
    }
    let psi = pair.psi0.rebased(0)?;
    let inv = psi.recip();
    let v1 = pair.v1.rebased(0)?;
    let v2 = pair.v2.rebased(0)?;
    let solve = |v: &SampledFunction, u0: &SampledFunction, count: usize| -> Result<EigenResult> {
        let problem = schrodinger_problem(v, u0)?;
        let series = build_spps(&problem, k)?;
        let e = dirichlet_eigenvalues_with(&series, range, count, opts)?;
        if e.eigenvalues.len() < count {
            return Err(Error::TooFewEigenvalues { found: e.eigenvalues.len(), needed: count });
        }
        Ok(e)
    };
    let (h1, h2) = rayon::join(|| solve(&v1, &psi, n_levels + 1), || solve(&v2, &inv, n_levels));
    let (h1, h2) = (h1?, h2?);
    let rows: Vec<SpectrumRow> = (0..n_levels)
        .map(|n| {
            let (e1, e2) = (h1.eigenvalues[n + 1], h2.eigenvalues[n]);
            SpectrumRow { level: n, e1, e2_shifted: e2, difference: (e2 - e1).abs() }
        })
        .collect();
    let max_difference = rows.iter().map(|r| r.difference).fold(0.0, f64::max);
    Ok(SpectrumReport { ground: Some(h1.eigenvalues[0]), rows, max_difference, h1: Some(h1), h2: Some(h2) })
}
