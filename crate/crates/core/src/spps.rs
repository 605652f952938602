//! Spectral parameter power series for `(p u')' + q u = λ r u`.
//!
//! With a particular solution `u₀` of the `λ = 0` equation the rows
//! `Zₙ = X⁽ⁿ⁾/n!` satisfy `Zₙ = ∫_{x₀} Zₙ₋₁ wₙ`, where `wₙ = 1/(u₀²p)` on odd
//! steps and `u₀²r` on even steps; `Z̃ₙ` swaps the two. Then
//! `u₁ = u₀ Σ λᵏ Z̃₂ₖ` and `u₂ = u₀ Σ λᵏ Z₂ₖ₊₁` span the solutions.
//! Storing `Zₙ` rather than `X⁽ⁿ⁾` keeps large orders finite.

use crate::error::{Error, Result};
use crate::grid::{fd_derivative, Grid, SampledFunction};
use crate::phi::VANISH_TOLERANCE;
use crate::C64;
use rayon::prelude::*;

pub const DEFAULT_TRUNCATION: usize = 30;
pub const DEFAULT_SCAN_POINTS: usize = 2000;
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
pub const DEFAULT_SEPARATION_TOL: f64 = 1e-8;
pub const DEFAULT_SERIES_TOL: f64 = 1e-10;
/// Relative tolerance on `(p u₀')' + q u₀` for accepting `u₀`.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct SturmLiouvilleProblem {
    pub p: SampledFunction,
    pub q: SampledFunction,
    pub r: SampledFunction,
    pub u0: SampledFunction,
}

impl SturmLiouvilleProblem {
    pub fn new(p: SampledFunction, q: SampledFunction, r: SampledFunction, u0: SampledFunction) -> Result<Self> {
        Self::with_residual_tol(p, q, r, u0, DEFAULT_RESIDUAL_TOL)
    }

    pub fn with_residual_tol(
        p: SampledFunction,
        q: SampledFunction,
        r: SampledFunction,
        u0: SampledFunction,
        resid_tol: f64,
    ) -> Result<Self> {
        let g = u0.grid();
        if ![&p, &q, &r].iter().all(|f| f.grid().same_nodes(g)) {
            return Err(Error::GridMismatch);
        }
        if let Some((index, x, _)) = u0.first_vanishing(VANISH_TOLERANCE) {
            return Err(Error::GroundStateVanishes { index, x });
        }
        if let Some((index, x, _)) = p.first_vanishing(VANISH_TOLERANCE) {
            return Err(Error::InvalidArgument(format!("p vanishes at node {index} (x = {x})")));
        }
        let problem = SturmLiouvilleProblem { p, q, r, u0 };
        let finite = problem
            .odd_weight()
            .iter()
            .chain(&problem.even_weight())
            .all(|v| v.re.is_finite() && v.im.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("u0^2 r or 1/(u0^2 p) is not finite".into()));
        }
        let residual = problem.particular_residual();
        if !(residual <= resid_tol) {
            return Err(Error::NotAParticularSolution { residual });
        }
        Ok(problem)
    }

    pub fn grid(&self) -> &Grid {
        self.u0.grid()
    }

    /// `1/(u₀²p)`
    pub fn odd_weight(&self) -> Vec<C64> {
        self.u0.values().iter().zip(self.p.values()).map(|(u, p)| (u * u * p).inv()).collect()
    }

    /// `u₀²r`
    pub fn even_weight(&self) -> Vec<C64> {
        self.u0.values().iter().zip(self.r.values()).map(|(u, r)| u * u * r).collect()
    }

    /// `‖(p u₀')' + q u₀‖∞ / max(‖q u₀‖∞, ‖u₀‖∞)` with jet derivatives.
    pub fn particular_residual(&self) -> f64 {
        let m = self.grid().len();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..m {
            let flux = &self.p.jet_at(i, 1) * &self.u0.jet_at(i, 2).derivative();
            let qu = self.q.values()[i] * self.u0.values()[i];
            worst = worst.max((flux.derivative_value(1) + qu).norm());
            scale = scale.max(qu.norm()).max(self.u0.values()[i].norm());
        }
        worst / scale
    }

    pub fn is_real(&self) -> bool {
        [&self.p, &self.q, &self.r, &self.u0].iter().all(|f| f.is_real())
    }

    /// `c = ‖u₀²r‖∞ ‖1/(u₀²p)‖∞ (b−a)²`
    pub fn c_bound(&self) -> f64 {
        let len = self.grid().length();
        sup(&self.even_weight()) * sup(&self.odd_weight()) * len * len
    }
}

/// `−ψ'' + V ψ = λ ψ`, i.e. `p = −1`, `q = V`, `r = 1`, `u₀ = ψ₀`.
pub fn schrodinger_problem(potential: &SampledFunction, psi0: &SampledFunction) -> Result<SturmLiouvilleProblem> {
    let g = psi0.grid();
    SturmLiouvilleProblem::new(
        SampledFunction::constant(g, C64::new(-1.0, 0.0)),
        potential.clone(),
        SampledFunction::constant(g, C64::new(1.0, 0.0)),
        psi0.clone(),
    )
}

#[derive(Clone, Debug)]
pub struct SppsSeries {
    problem: SturmLiouvilleProblem,
    k: usize,
    odd_w: Vec<C64>,
    even_w: Vec<C64>,
    /// `Z[n] = X⁽ⁿ⁾/n!` for `n = 0..=2K+1`
    z: Vec<Vec<C64>>,
    zt: Vec<Vec<C64>>,
}

pub fn build_spps(problem: &SturmLiouvilleProblem, k: usize) -> Result<SppsSeries> {
    if let Some((index, x, _)) = problem.u0.first_vanishing(VANISH_TOLERANCE) {
        return Err(Error::GroundStateVanishes { index, x });
    }
    let q = problem.grid().quadrature();
    let base = problem.grid().x0_index();
    let odd_w = problem.odd_weight();
    let even_w = problem.even_weight();
    let rows = |tilde: bool| {
        let mut rows = Vec::with_capacity(2 * k + 2);
        rows.push(vec![C64::new(1.0, 0.0); odd_w.len()]);
        for n in 1..=2 * k + 1 {
            let w = if (n % 2 == 1) != tilde { &odd_w } else { &even_w };
            let integrand: Vec<C64> = rows[n - 1].iter().zip(w).map(|(a, b)| a * b).collect();
            let mut row = q.cumulative(&integrand, base);
            row[base] = zero();
            rows.push(row);
        }
        rows
    };
    let (z, zt) = rayon::join(|| rows(false), || rows(true));
    Ok(SppsSeries { problem: problem.clone(), k, odd_w, even_w, z, zt })
}

/// Truncation diagnostics for `|λ|` at a given `K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationEstimate {
    /// `Σ_{k>K} (|λ| c)ᵏ/(2k)! · (1 + (b−a) max w)`, relative to the series sum
    pub rigorous: f64,
    /// geometric-factorial extrapolation of the computed coefficient decay,
    /// relative to the series sum
    pub extrapolated: f64,
    pub c_effective: f64,
    /// smallest `K` the better of the two estimates accepts
    pub needed: usize,
}

impl TruncationEstimate {
    pub fn passes(&self, tol: f64) -> bool {
        self.rigorous.min(self.extrapolated) <= tol
    }
}

/// Solution pair and the combination `u = c₁u₁ + c₂u₂`, with exact `x`-derivatives.
#[derive(Clone, Debug)]
pub struct SppsSolution {
    pub lambda: C64,
    pub u: Vec<C64>,
    pub du: Vec<C64>,
    pub u1: Vec<C64>,
    pub du1: Vec<C64>,
    pub u2: Vec<C64>,
    pub du2: Vec<C64>,
    pub truncation: TruncationEstimate,
}

impl SppsSeries {
    pub fn problem(&self) -> &SturmLiouvilleProblem {
        &self.problem
    }
    pub fn truncation(&self) -> usize {
        self.k
    }
    pub fn grid(&self) -> &Grid {
        self.problem.grid()
    }

    /// `X⁽ⁿ⁾/n!` rows of the general recursion.
    pub fn scaled_row(&self, n: usize) -> &[C64] {
        &self.z[n]
    }
    pub fn scaled_row_tilde(&self, n: usize) -> &[C64] {
        &self.zt[n]
    }

    /// `X⁽ⁿ⁾` itself; overflows for large `n` long before `Zₙ` does.
    pub fn row(&self, n: usize) -> Vec<C64> {
        let f: f64 = (1..=n).map(|v| v as f64).product();
        self.z[n].iter().map(|v| v * f).collect()
    }
    pub fn row_tilde(&self, n: usize) -> Vec<C64> {
        let f: f64 = (1..=n).map(|v| v as f64).product();
        self.zt[n].iter().map(|v| v * f).collect()
    }

    /// Coefficients `β_k = max(‖Z₂ₖ₊₁‖∞, ‖Z̃₂ₖ‖∞)`.
    fn betas(&self) -> Vec<f64> {
        (0..=self.k).map(|k| sup(&self.z[2 * k + 1]).max(sup(&self.zt[2 * k]))).collect()
    }

    pub fn truncation_estimate(&self, lambda_abs: f64) -> TruncationEstimate {
        let k = self.k;
        let betas = self.betas();
        let sum: f64 = betas.iter().enumerate().map(|(j, b)| b * lambda_abs.powi(j as i32)).sum();
        let sum = sum.max(1.0);

        let len = self.grid().length();
        let c = self.problem.c_bound();
        let odd = 1.0 + len * sup(&self.odd_w).max(sup(&self.even_w));
        let rig_term = |j: usize| -> f64 {
            // (|λ| c)^j/(2j)! in logs so huge c cannot overflow
            let l = j as f64 * (lambda_abs * c).ln() - ln_factorial(2 * j);
            l.exp()
        };
        let mut rigorous = 0.0;
        let mut rig_needed = None;
        if lambda_abs == 0.0 || c == 0.0 {
            rigorous = 0.0;
            rig_needed = Some(0);
        } else {
            let mut j = k + 1;
            loop {
                let t = rig_term(j);
                rigorous += t;
                if (t < 1e-17 * rigorous.max(1e-300) && j > k + 3) || j > k + 2000 {
                    break;
                }
                j += 1;
            }
            rigorous *= odd / sum;
            if !rigorous.is_finite() {
                rigorous = f64::INFINITY;
            }
        }

        let c_eff = (k.saturating_sub(2).max(1)..=k)
            .filter(|&j| betas[j - 1] > 0.0)
            .map(|j| betas[j] / betas[j - 1] * (2 * j) as f64 * (2 * j + 1) as f64)
            .fold(0.0, f64::max);
        let extrapolate = |from: usize, beta: f64| -> f64 {
            let mut t = beta * lambda_abs.powi(from as i32);
            let mut tail = 0.0;
            let mut j = from + 1;
            while j < from + 4000 {
                t *= lambda_abs * c_eff / ((2 * j) as f64 * (2 * j + 1) as f64);
                tail += t;
                if t <= 1e-17 * tail || t == 0.0 {
                    break;
                }
                j += 1;
            }
            tail / sum
        };
        let extrapolated = if k == 0 { f64::INFINITY } else { extrapolate(k, betas[k]) };

        // first K' whose estimated remainder clears a 1e-10 target
        let target = 1e-10;
        let needed = if extrapolated <= target || rigorous <= target {
            k
        } else {
            let mut beta = betas[k];
            let mut j = k;
            loop {
                if extrapolate(j, beta) <= target || j > k + 4000 {
                    break j;
                }
                j += 1;
                beta *= c_eff / ((2 * j) as f64 * (2 * j + 1) as f64);
            }
        };
        let needed = rig_needed.unwrap_or(needed);
        TruncationEstimate { rigorous, extrapolated, c_effective: c_eff, needed }
    }

    /// Errors with `TruncationTooSmall` unless the estimate for `|λ|` passes `tol`.
    pub fn check_truncation(&self, lambda_abs: f64, tol: f64) -> Result<TruncationEstimate> {
        let est = self.truncation_estimate(lambda_abs);
        if est.passes(tol) {
            Ok(est)
        } else {
            Err(Error::TruncationTooSmall { current: self.k, needed: est.needed.max(self.k + 1) })
        }
    }

    fn u0_derivative(&self) -> Vec<C64> {
        match self.problem.u0.derivative() {
            Some(d) => d.to_vec(),
            None => (0..self.grid().len()).map(|i| self.problem.u0.jet_at(i, 1).derivative_value(1)).collect(),
        }
    }

    /// `u = c₁u₁ + c₂u₂` at `λ`, refusing `λ` beyond the truncation's reach.
    pub fn evaluate(&self, lambda: C64, c1: C64, c2: C64, series_tol: f64) -> Result<SppsSolution> {
        let truncation = self.check_truncation(lambda.norm(), series_tol)?;
        Ok(self.evaluate_unchecked(lambda, c1, c2, truncation))
    }

    fn evaluate_unchecked(&self, lambda: C64, c1: C64, c2: C64, truncation: TruncationEstimate) -> SppsSolution {
        let m = self.grid().len();
        let k = self.k;
        let u0 = self.problem.u0.values();
        let du0 = self.u0_derivative();
        let mut s1 = vec![zero(); m];
        let mut ds1 = vec![zero(); m];
        let mut s2 = vec![zero(); m];
        let mut ds2 = vec![zero(); m];
        // Horner in λ; Z̃₂ⱼ' = Z̃₂ⱼ₋₁/(u₀²p) and Z₂ⱼ₊₁' = Z₂ⱼ/(u₀²p)
        for j in (0..=k).rev() {
            for i in 0..m {
                s1[i] = s1[i] * lambda + self.zt[2 * j][i];
                let d1 = if j == 0 { zero() } else { self.zt[2 * j - 1][i] * self.odd_w[i] };
                ds1[i] = ds1[i] * lambda + d1;
                s2[i] = s2[i] * lambda + self.z[2 * j + 1][i];
                ds2[i] = ds2[i] * lambda + self.z[2 * j][i] * self.odd_w[i];
            }
        }
        let u1: Vec<C64> = (0..m).map(|i| u0[i] * s1[i]).collect();
        let du1: Vec<C64> = (0..m).map(|i| du0[i] * s1[i] + u0[i] * ds1[i]).collect();
        let u2: Vec<C64> = (0..m).map(|i| u0[i] * s2[i]).collect();
        let du2: Vec<C64> = (0..m).map(|i| du0[i] * s2[i] + u0[i] * ds2[i]).collect();
        let u = (0..m).map(|i| c1 * u1[i] + c2 * u2[i]).collect();
        let du = (0..m).map(|i| c1 * du1[i] + c2 * du2[i]).collect();
        SppsSolution { lambda, u, du, u1, du1, u2, du2, truncation }
    }

    /// Coefficients `a_k = u₀(b) Z₂ₖ₊₁(b)` of `λ ↦ u₂(b; λ)`.
    pub fn characteristic_coefficients(&self) -> Vec<f64> {
        let last = self.grid().len() - 1;
        let ub = self.problem.u0.values()[last].re;
        (0..=self.k).map(|j| ub * self.z[2 * j + 1][last].re).collect()
    }
}

/// `ln n!`
fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|v| (v as f64).ln()).sum()
}

pub fn evaluate_solution(series: &SppsSeries, lambda: C64, c1: C64, c2: C64) -> Result<SppsSolution> {
    series.evaluate(lambda, c1, c2, DEFAULT_SERIES_TOL)
}

/// `max |(p u')' + q u − λ r u|` over interior nodes, with `(p u')'` from
/// 4th-order differences of the exact flux, relative to `(|λ|+1) ‖u‖∞`.
pub fn ode_residual(problem: &SturmLiouvilleProblem, sol: &SppsSolution) -> f64 {
    let g = problem.grid();
    let flux: Vec<C64> = sol.du.iter().zip(problem.p.values()).map(|(d, p)| d * p).collect();
    let dflux = fd_derivative(&flux, g.h());
    let m = g.len();
    let worst = (2..m - 2)
        .map(|i| {
            (dflux[i] + problem.q.values()[i] * sol.u[i] - sol.lambda * problem.r.values()[i] * sol.u[i]).norm()
        })
        .fold(0.0, f64::max);
    worst / ((sol.lambda.norm() + 1.0) * sup(&sol.u).max(f64::MIN_POSITIVE))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenOptions {
    pub scan_points: usize,
    pub root_tol: f64,
    pub separation_tol: f64,
    pub series_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            scan_points: DEFAULT_SCAN_POINTS,
            root_tol: DEFAULT_ROOT_TOL,
            separation_tol: DEFAULT_SEPARATION_TOL,
            series_tol: DEFAULT_SERIES_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// `|u₂(b; λ)|` at each root divided by `Σ |λ|ᵏ |a_k|`
    pub residuals: Vec<f64>,
    pub k: usize,
    pub range: (f64, f64),
    pub truncation: TruncationEstimate,
}

// Horner value and the normalizer Σ |λ|^k |a_k|
fn characteristic(a: &[f64], lambda: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut s = 0.0;
    for c in a.iter().rev() {
        v = v * lambda + c;
        s = s * lambda.abs() + c.abs();
    }
    (v, s)
}

pub fn dirichlet_eigenvalues(series: &SppsSeries, range: (f64, f64), count: usize) -> Result<EigenResult> {
    dirichlet_eigenvalues_with(series, range, count, &EigenOptions::default())
}

/// Roots of `λ ↦ u₂(b; λ)` in `range`, ascending, at most `count`.
pub fn dirichlet_eigenvalues_with(
    series: &SppsSeries,
    range: (f64, f64),
    count: usize,
    opts: &EigenOptions,
) -> Result<EigenResult> {
    let g = series.grid();
    if g.x0_index() != 0 {
        return Err(Error::InvalidArgument("Dirichlet eigenvalues need x0 at the left endpoint".into()));
    }
    if !series.problem().is_real() {
        return Err(Error::InvalidArgument("Dirichlet eigenvalues need real p, q, r and u0".into()));
    }
    let (lo, hi) = range;
    if !(lo < hi) || opts.scan_points < 2 {
        return Err(Error::NoRootsInRange { lo, hi });
    }
    let truncation = series.check_truncation(lo.abs().max(hi.abs()), opts.series_tol)?;
    let a = series.characteristic_coefficients();
    let n = opts.scan_points;
    let mesh: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let values: Vec<f64> = mesh.par_iter().map(|&l| characteristic(&a, l).0).collect();
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n - 1 {
        let (mut l, mut r) = (mesh[i], mesh[i + 1]);
        let (mut fl, fr) = (values[i], values[i + 1]);
        if fl == 0.0 {
            roots.push(l);
            continue;
        }
        if fl.signum() == fr.signum() || fr == 0.0 {
            continue;
        }
        while r - l > opts.root_tol {
            let mid = 0.5 * (l + r);
            if mid <= l || mid >= r {
                break;
            }
            let fm = characteristic(&a, mid).0;
            if fm == 0.0 {
                l = mid;
                r = mid;
                break;
            }
            if fm.signum() == fl.signum() {
                l = mid;
                fl = fm;
            } else {
                r = mid;
            }
        }
        roots.push(0.5 * (l + r));
    }
    if values[n - 1] == 0.0 {
        roots.push(hi);
    }
    roots.dedup_by(|b, a| (*b - *a).abs() <= opts.separation_tol);
    if roots.is_empty() {
        return Err(Error::NoRootsInRange { lo, hi });
    }
    roots.truncate(count);
    let residuals = roots
        .iter()
        .map(|&l| {
            let (v, s) = characteristic(&a, l);
            v.abs() / s.max(f64::MIN_POSITIVE)
        })
        .collect();
    Ok(EigenResult { eigenvalues: roots, residuals, k: series.truncation(), range, truncation })
}
