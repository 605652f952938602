//! Volterra composition of the first type on grid kernels.
//!
//! `(f⋆g)(x, y) = ∫ₓʸ f(x, ξ) g(ξ, y) dξ`, oriented, so `y < x` integrates
//! backwards. Powers `f^⟨n⟩ = f^⟨n−1⟩⋆f` start at `n = 1`; the identity `f^⟨0⟩`
//! is a delta and has no array form.

use crate::calculus::falling;
use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction};
use crate::phi::VANISH_TOLERANCE;
use crate::powers::{Family, PowerTable};
use crate::C64;
use rayon::prelude::*;

/// Dense storage cap; composition is `O(M³)`.
pub const MAX_KERNEL_NODES: usize = 1025;
/// Neumann terms summed before giving up.
pub const MAX_NEUMANN_TERMS: usize = 2000;
pub const DEFAULT_SERIES_TOL: f64 = 1e-14;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    /// defined for every node pair
    Full,
    /// defined for `i ≤ j`; entries below the diagonal are zero
    Ordered,
}

#[derive(Clone, Debug)]
pub struct Kernel {
    grid: Grid,
    m: usize,
    /// row-major `K[i][j] = f(xᵢ, xⱼ)`
    values: Vec<C64>,
    support: Support,
}

impl Kernel {
    pub fn from_fn(grid: &Grid, support: Support, f: impl Fn(usize, usize) -> C64 + Sync) -> Result<Self> {
        let m = grid.len();
        if m > MAX_KERNEL_NODES {
            return Err(Error::InvalidArgument(format!("kernels are capped at {MAX_KERNEL_NODES} nodes, got {m}")));
        }
        let values = (0..m * m)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / m, k % m);
                if support == Support::Ordered && j < i {
                    zero()
                } else {
                    f(i, j)
                }
            })
            .collect();
        Ok(Kernel { grid: grid.clone(), m, values, support })
    }

    /// `𝟏(x, y) = 1`
    pub fn one(grid: &Grid, support: Support) -> Result<Self> {
        Self::from_fn(grid, support, |_, _| C64::new(1.0, 0.0))
    }

    /// `σ(x, y) = Φ(y)/Φ(x)`
    pub fn sigma(phi: &SampledFunction, support: Support) -> Result<Self> {
        let v = phi.values();
        Self::from_fn(phi.grid(), support, |i, j| v[j] / v[i])
    }

    /// `w(y) X(x, y)` of order `n` from both-argument power tables, with
    /// `w = Φ`, `1/Φ` or `1` per `outer`. Defined for every node pair.
    pub fn power(table: &PowerTable, n: usize, family: Family, outer: Outer) -> Result<Self> {
        let pairs = table.two_point(n);
        let w = outer.weights(table);
        Self::from_fn(table.grid(), Support::Full, |i, j| pairs.get(n, family, i, j) * w[j])
    }

    /// `ρ(x, y) = Φ(y) ∫ₓʸ dξ/Φ` with `Φ = ψ₀²`, one rebased integral per row.
    pub fn rho(psi0: &SampledFunction) -> Result<Self> {
        let phi: Vec<C64> = psi0.values().iter().map(|v| v * v).collect();
        let inv: Vec<C64> = phi.iter().map(|v| v.inv()).collect();
        Self::rebased_primitive(psi0.grid(), &inv, &phi)
    }

    /// `ρ̃(x, y) = (1/Φ(y)) ∫ₓʸ Φ dξ` with `Φ = ψ₀²`.
    pub fn rho_tilde(psi0: &SampledFunction) -> Result<Self> {
        let phi: Vec<C64> = psi0.values().iter().map(|v| v * v).collect();
        let inv: Vec<C64> = phi.iter().map(|v| v.inv()).collect();
        Self::rebased_primitive(psi0.grid(), &phi, &inv)
    }

    // K(x, y) = outer(y) ∫ₓʸ inner
    fn rebased_primitive(grid: &Grid, inner: &[C64], outer: &[C64]) -> Result<Self> {
        let m = grid.len();
        if m > MAX_KERNEL_NODES {
            return Err(Error::InvalidArgument(format!("kernels are capped at {MAX_KERNEL_NODES} nodes, got {m}")));
        }
        let q = grid.quadrature();
        let rows: Vec<Vec<C64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut row = q.cumulative(inner, i);
                row[i] = zero();
                row.iter_mut().zip(outer).for_each(|(v, w)| *v *= w);
                row
            })
            .collect();
        Ok(Kernel { grid: grid.clone(), m, values: rows.concat(), support: Support::Full })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn support(&self) -> Support {
        self.support
    }
    pub fn len(&self) -> usize {
        self.m
    }
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.m + j]
    }
    pub fn row(&self, i: usize) -> &[C64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    /// Sup-norm of `self − other` over the entries both define.
    pub fn max_diff(&self, other: &Kernel) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        sup(&self.values)
    }

    pub fn scale(&self, s: C64) -> Kernel {
        Kernel { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        if !self.grid.same_nodes(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let support = if self.support == Support::Full && other.support == Support::Full {
            Support::Full
        } else {
            Support::Ordered
        };
        Kernel::from_fn(&self.grid, support, |i, j| self.get(i, j) + other.get(i, j))
    }
}

/// Outer factor in `y` for [`Kernel::power`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outer {
    One,
    Phi,
    InvPhi,
}

impl Outer {
    fn weights(self, table: &PowerTable) -> Vec<C64> {
        match self {
            Outer::One => vec![C64::new(1.0, 0.0); table.grid().len()],
            Outer::Phi => table.phi().values().to_vec(),
            Outer::InvPhi => table.inv_phi().values().to_vec(),
        }
    }
}

/// `(f⋆g)[i][j] = ∫_{xᵢ}^{xⱼ} f(xᵢ, ξ) g(ξ, xⱼ) dξ`. Ordered operands are
/// sampled only between `xᵢ` and `xⱼ` and give an ordered result.
pub fn compose(f: &Kernel, g: &Kernel) -> Result<Kernel> {
    if !f.grid.same_nodes(&g.grid) {
        return Err(Error::GridMismatch);
    }
    let m = f.m;
    let q = f.grid.quadrature();
    let ordered = f.support == Support::Ordered || g.support == Support::Ordered;
    let support = if ordered { Support::Ordered } else { Support::Full };
    // columns of g made contiguous
    let gt: Vec<C64> = (0..m * m).map(|k| g.values[(k % m) * m + k / m]).collect();
    let rows: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let fi = f.row(i);
            (0..m)
                .map(|j| {
                    if ordered && j < i {
                        return zero();
                    }
                    let gj = &gt[j * m..(j + 1) * m];
                    let (lo, hi) = if ordered { (i, j) } else { (0, m - 1) };
                    q.definite_with(|k| fi[k] * gj[k], lo, hi, i, j)
                })
                .collect()
        })
        .collect();
    Ok(Kernel { grid: f.grid.clone(), m, values: rows.concat(), support })
}

/// `f^⟨n⟩` for `n ≥ 1`.
pub fn kernel_power(f: &Kernel, n: usize) -> Result<Kernel> {
    if n == 0 {
        return Err(Error::IdentityNotMaterializable);
    }
    let mut p = f.clone();
    for _ in 1..n {
        p = compose(&p, f)?;
    }
    Ok(p)
}

/// `y ↦ ∫_{x_b}^{y} row(ξ) g(ξ, y) dξ`, one row of `f⋆g` with `row = f(x_b, ·)`.
pub fn compose_row(row: &[C64], base: usize, g: &Kernel) -> Vec<C64> {
    let m = g.m;
    let q = g.grid.quadrature();
    (0..m)
        .into_par_iter()
        .map(|j| match g.support {
            Support::Ordered if j < base => zero(),
            Support::Ordered => q.definite_with(|k| row[k] * g.get(k, j), base, j, base, j),
            Support::Full => q.definite_with(|k| row[k] * g.get(k, j), 0, m - 1, base, j),
        })
        .collect()
}

/// Residuals of `(ΦX⁽¹⁾)^⟨n⟩ = Φ X⁽²ⁿ⁻¹⁾/(2n−1)!`, its tilde mirror with `1/Φ`,
/// and the `⋆𝟏` forms giving `X⁽²ⁿ⁾/(2n)!`, for `n = 1..=n_max`, each
/// relative to the sup of its right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeReport {
    pub power: Vec<f64>,
    pub power_tilde: Vec<f64>,
    pub closed: Vec<f64>,
    pub closed_tilde: Vec<f64>,
}

impl BridgeReport {
    pub fn max(&self) -> f64 {
        self.power.iter().chain(&self.power_tilde).chain(&self.closed).chain(&self.closed_tilde).fold(0.0, |a, b| a.max(*b))
    }
}

fn relative(got: &Kernel, want: &Kernel) -> f64 {
    got.max_diff(want) / want.max_abs().max(f64::MIN_POSITIVE)
}

pub fn bridge_check(table: &PowerTable, n_max: usize) -> Result<BridgeReport> {
    if 2 * n_max > table.order() {
        return Err(Error::InsufficientOrder { required: 2 * n_max, available: table.order() });
    }
    let g = table.grid();
    let one = Kernel::one(g, Support::Full)?;
    let mut rep = BridgeReport { power: vec![], power_tilde: vec![], closed: vec![], closed_tilde: vec![] };
    for (family, outer) in [(Family::Plain, Outer::Phi), (Family::Tilde, Outer::InvPhi)] {
        let base = Kernel::power(table, 1, family, outer)?;
        let mut p = base.clone();
        for n in 1..=n_max {
            if n > 1 {
                p = compose(&p, &base)?;
            }
            let odd = Kernel::power(table, 2 * n - 1, family, outer)?.scale(C64::new(1.0 / falling(2 * n - 1, 2 * n - 1), 0.0));
            let even = Kernel::power(table, 2 * n, family, Outer::One)?.scale(C64::new(1.0 / falling(2 * n, 2 * n), 0.0));
            let r1 = relative(&p, &odd);
            let r2 = relative(&compose(&p, &one)?, &even);
            if family == Family::Plain {
                rep.power.push(r1);
                rep.closed.push(r2);
            } else {
                rep.power_tilde.push(r1);
                rep.closed_tilde.push(r2);
            }
        }
    }
    Ok(rep)
}

/// `(2n−1)!(2m)!/(2n+2m)!`
pub fn coefficient_a(n: usize, m: usize) -> f64 {
    falling(2 * m, 2 * m) / falling(2 * n + 2 * m, 2 * m + 1)
}

/// `(2n−1)!(2m−1)!/(2n+2m−1)!`
pub fn coefficient_b(n: usize, m: usize) -> f64 {
    falling(2 * m - 1, 2 * m - 1) / falling(2 * n + 2 * m - 1, 2 * m)
}

/// Largest relative residual of
/// `ΦX⁽²ⁿ⁻¹⁾⋆X⁽²ᵐ⁾ = A X⁽²ⁿ⁺²ᵐ⁾`, `(1/Φ)X̃⁽²ⁿ⁻¹⁾⋆X̃⁽²ᵐ⁾ = A X̃⁽²ⁿ⁺²ᵐ⁾`,
/// `ΦX⁽²ⁿ⁻¹⁾⋆X⁽²ᵐ⁻¹⁾ = B X⁽²ⁿ⁺²ᵐ⁻¹⁾`, `(1/Φ)X̃⁽²ⁿ⁻¹⁾⋆X̃⁽²ᵐ⁻¹⁾ = B X̃⁽²ⁿ⁺²ᵐ⁻¹⁾`.
pub fn proposition51_check(table: &PowerTable, n: usize, m: usize) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("orders start at 1".into()));
    }
    let required = 2 * n + 2 * m;
    if required > table.order() {
        return Err(Error::InsufficientOrder { required, available: table.order() });
    }
    let (a, b) = (coefficient_a(n, m), coefficient_b(n, m));
    let mut worst: f64 = 0.0;
    for (family, outer) in [(Family::Plain, Outer::Phi), (Family::Tilde, Outer::InvPhi)] {
        let left = Kernel::power(table, 2 * n - 1, family, outer)?;
        for (k, coeff) in [(2 * m, a), (2 * m - 1, b)] {
            let right = Kernel::power(table, k, family, Outer::One)?;
            let want = Kernel::power(table, 2 * n + k, family, Outer::One)?.scale(C64::new(coeff, 0.0));
            worst = worst.max(relative(&compose(&left, &right)?, &want));
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct ResolventSolution {
    pub psi0: SampledFunction,
    pub lambda: C64,
    pub x0_index: usize,
    pub neumann_terms: usize,
    /// `ψ₀ [(Σ λᵏ ρ̃^⟨k⟩) ⋆ 𝟏](x₀, ·)`
    pub u1_part: Vec<C64>,
    /// `(1/ψ₀) Σ λᵏ ρ^⟨k+1⟩(x₀, ·)`
    pub u2_part: Vec<C64>,
    /// sup of the last term added
    pub tail_estimate: f64,
}

impl ResolventSolution {
    pub fn combine(&self, c1: C64, c2: C64) -> Vec<C64> {
        self.u1_part.iter().zip(&self.u2_part).map(|(a, b)| c1 * a + c2 * b).collect()
    }
}

/// Truncated Neumann series for `λ`; only the base row of each kernel power
/// is formed, so each term costs `O(M²)`.
pub fn resolvent_solution(psi0: &SampledFunction, lambda: C64, x0_index: usize, series_tol: f64) -> Result<ResolventSolution> {
    if let Some((index, x, magnitude)) = psi0.first_vanishing(VANISH_TOLERANCE) {
        return Err(Error::NonvanishingViolation { index, x, magnitude });
    }
    let g = psi0.grid();
    if x0_index >= g.len() {
        return Err(Error::InvalidArgument(format!("base index {x0_index} out of range")));
    }
    let (rho, rho_t) = (Kernel::rho(psi0)?, Kernel::rho_tilde(psi0)?);
    let q = g.quadrature();
    let base = x0_index;
    let m = g.len();

    let phi_sup = psi0.values().iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let inv_sup = psi0.values().iter().map(|v| 1.0 / v.norm_sqr()).fold(0.0, f64::max);
    let c = phi_sup * inv_sup * g.length() * g.length();
    let onset = (lambda.norm() * c).sqrt().ceil() as usize;

    let mut s1 = vec![C64::new(1.0, 0.0); m];
    let mut r_row = rho.row(base).to_vec();
    let mut s2 = r_row.clone();
    let mut rt_row = rho_t.row(base).to_vec();
    let mut lk = C64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    let mut growing = 0;
    let mut k = 1;
    let tail = loop {
        lk *= lambda;
        let mut t1 = q.cumulative(&rt_row, base);
        t1[base] = zero();
        r_row = compose_row(&r_row, base, &rho);
        let mut newest: f64 = 0.0;
        for i in 0..m {
            let (a, b) = (lk * t1[i], lk * r_row[i]);
            s1[i] += a;
            s2[i] += b;
            newest = newest.max(a.norm()).max(b.norm());
        }
        if newest <= series_tol {
            break newest;
        }
        if k > onset && newest > last {
            growing += 1;
            if growing > 3 {
                return Err(Error::DivergenceSuspected { term: k });
            }
        } else {
            growing = 0;
        }
        if k >= MAX_NEUMANN_TERMS {
            return Err(Error::DivergenceSuspected { term: k });
        }
        last = newest;
        rt_row = compose_row(&rt_row, base, &rho_t);
        k += 1;
    };
    let v = psi0.values();
    Ok(ResolventSolution {
        psi0: psi0.clone(),
        lambda,
        x0_index,
        neumann_terms: k + 1,
        u1_part: (0..m).map(|i| v[i] * s1[i]).collect(),
        u2_part: (0..m).map(|i| s2[i] / v[i]).collect(),
        tail_estimate: tail,
    })
}

/// The same series for `1/ψ₀`, which swaps `ρ` and `ρ̃`.
pub fn partner_resolvent(psi0: &SampledFunction, lambda: C64, x0_index: usize, series_tol: f64) -> Result<ResolventSolution> {
    resolvent_solution(&psi0.recip(), lambda, x0_index, series_tol)
}
