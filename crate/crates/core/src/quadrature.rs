//! Cumulative integration on uniform grids.
//!
//! Two rules are available. [`Rule::Quintic`] integrates every cell with the
//! quintic through the six nodes around it, shifted inwards near the edge of
//! the usable window; global error is O(h^6). [`Rule::Simpson`] uses Simpson
//! pairs from the base and closes an odd offset with the 3-point stencil
//! `h/12 (-f[n-2] + 8 f[n-1] + 5 f[n])`; global error is O(h^4).
//!
//! With the quintic rule each cell contributes the same amount whatever the
//! base, so cumulative integrals from different bases differ by a constant.

use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Simpson,
    #[default]
    Quintic,
}

/// Interval weights times `DENOM[p]` for a stencil of `p` nodes whose
/// node `r` is the left end of the cell.
const DENOM: [f64; 7] = [0.0, 0.0, 2.0, 12.0, 24.0, 720.0, 1440.0];
const W2: [[f64; 2]; 1] = [[1.0, 1.0]];
const W3: [[f64; 3]; 2] = [[5.0, 8.0, -1.0], [-1.0, 8.0, 5.0]];
const W4: [[f64; 4]; 3] = [[9.0, 19.0, -5.0, 1.0], [-1.0, 13.0, 13.0, -1.0], [1.0, -5.0, 19.0, 9.0]];
const W5: [[f64; 5]; 4] = [
    [251.0, 646.0, -264.0, 106.0, -19.0],
    [-19.0, 346.0, 456.0, -74.0, 11.0],
    [11.0, -74.0, 456.0, 346.0, -19.0],
    [-19.0, 106.0, -264.0, 646.0, 251.0],
];
const W6: [[f64; 6]; 5] = [
    [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0],
    [-27.0, 637.0, 1022.0, -258.0, 77.0, -11.0],
    [11.0, -93.0, 802.0, 802.0, -93.0, 11.0],
    [-11.0, 77.0, -258.0, 1022.0, 637.0, -27.0],
    [27.0, -173.0, 482.0, -798.0, 1427.0, 475.0],
];

fn weights(p: usize, r: usize) -> &'static [f64] {
    match p {
        2 => &W2[r],
        3 => &W3[r],
        4 => &W4[r],
        5 => &W5[r],
        _ => &W6[r],
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// A rule bound to a spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub h: f64,
    pub rule: Rule,
}

impl Quadrature {
    pub fn new(h: f64, rule: Rule) -> Self {
        Quadrature { h, rule }
    }

    /// `F[k] = ∫_{x_from}^{x_k} f` for every node, in both directions.
    pub fn cumulative(&self, f: &[C64], from: usize) -> Vec<C64> {
        match self.rule {
            Rule::Simpson => simpson_cumulative(f, self.h, from),
            Rule::Quintic => {
                let m = f.len();
                let mut out = vec![zero(); m];
                let cell = |k: usize| quintic_cell(|i| f[i], 0, m - 1, k);
                for k in from..m.saturating_sub(1) {
                    out[k + 1] = out[k] + cell(k) * self.h;
                }
                for k in (0..from).rev() {
                    out[k] = out[k + 1] - cell(k) * self.h;
                }
                out
            }
        }
    }

    /// Oriented integral of `f` from node `i` to node `j`.
    pub fn definite(&self, f: &[C64], i: usize, j: usize) -> C64 {
        self.definite_with(|k| f[k], 0, f.len() - 1, i, j)
    }

    /// Oriented integral from node `i` to node `j` of an integrand that may
    /// only be sampled on nodes `lo..=hi`, which must contain both ends.
    pub fn definite_with(&self, g: impl Fn(usize) -> C64, lo: usize, hi: usize, i: usize, j: usize) -> C64 {
        debug_assert!(lo <= i.min(j) && i.max(j) <= hi);
        if i == j {
            return zero();
        }
        let (s, e, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        match self.rule {
            Rule::Simpson => {
                // walk from i towards j
                let walk: Vec<C64> = if i < j {
                    (s..=e).map(&g).collect()
                } else {
                    (s..=e).rev().map(&g).collect()
                };
                let (before, after) = if i < j {
                    ((i > lo).then(|| g(i - 1)), (j < hi).then(|| g(j + 1)))
                } else {
                    ((i < hi).then(|| g(i + 1)), (j > lo).then(|| g(j - 1)))
                };
                walk_integral(&walk, self.h, before, after) * sign
            }
            Rule::Quintic => {
                // each sample is read once
                let p = (hi - lo + 1).min(6);
                let first = s.saturating_sub(2).max(lo).min(hi + 1 - p);
                let last = (e + 2).min(hi).max(lo + p - 1);
                let samples: Vec<C64> = (first..=last).map(&g).collect();
                let mut acc = zero();
                for k in s..e {
                    acc += quintic_cell(|n| samples[n - first], lo.max(first), hi.min(last), k);
                }
                acc * (self.h * sign)
            }
        }
    }
}

// Integral over cell [k, k+1] in units of h, from nodes within lo..=hi.
#[inline]
fn quintic_cell(g: impl Fn(usize) -> C64, lo: usize, hi: usize, k: usize) -> C64 {
    let p = (hi - lo + 1).min(6);
    let start = k.saturating_sub(2).max(lo).min(hi + 1 - p);
    let w = weights(p, k - start);
    let mut acc = zero();
    for (m, wm) in w.iter().enumerate() {
        acc += g(start + m) * *wm;
    }
    acc / DENOM[p]
}

/// Simpson integral along a walk of unit steps of length `h` over all of
/// `g`. `before` is the sample one step behind `g[0]`, `after` one step past
/// the end; they matter only for a single-interval walk.
pub fn walk_integral(g: &[C64], h: f64, before: Option<C64>, after: Option<C64>) -> C64 {
    let n = g.len().saturating_sub(1);
    match n {
        0 => zero(),
        1 => match (after, before) {
            (Some(a), _) => (g[0] * 5.0 + g[1] * 8.0 - a) * (h / 12.0),
            (None, Some(b)) => (g[0] * 8.0 + g[1] * 5.0 - b) * (h / 12.0),
            (None, None) => (g[0] + g[1]) * (h / 2.0),
        },
        _ => {
            let even = n - n % 2;
            let mut acc = zero();
            let mut k = 0;
            while k < even {
                acc += g[k] + g[k + 1] * 4.0 + g[k + 2];
                k += 2;
            }
            acc *= h / 3.0;
            if n % 2 == 1 {
                acc += (g[n - 1] * 8.0 + g[n] * 5.0 - g[n - 2]) * (h / 12.0);
            }
            acc
        }
    }
}

fn simpson_cumulative(f: &[C64], h: f64, from: usize) -> Vec<C64> {
    let m = f.len();
    let mut out = vec![zero(); m];
    sweep(m - from, |s| f[from + s], h, |s, v| out[from + s] = v, from.checked_sub(1).map(|k| f[k]));
    sweep(from + 1, |s| f[from - s], h, |s, v| out[from - s] = -v, (from + 1 < m).then(|| f[from + 1]));
    out
}

// Cumulative Simpson walk over `len` samples; `behind` is the sample opposite the walk.
fn sweep(len: usize, g: impl Fn(usize) -> C64, h: f64, mut put: impl FnMut(usize, C64), behind: Option<C64>) {
    if len < 2 {
        return;
    }
    let first = if len > 2 {
        (g(0) * 5.0 + g(1) * 8.0 - g(2)) * (h / 12.0)
    } else {
        walk_integral(&[g(0), g(1)], h, behind, None)
    };
    put(1, first);
    let mut even_acc = zero();
    for s in 2..len {
        if s % 2 == 0 {
            even_acc += (g(s - 2) + g(s - 1) * 4.0 + g(s)) * (h / 3.0);
            put(s, even_acc);
        } else {
            put(s, even_acc + (g(s - 1) * 8.0 + g(s) * 5.0 - g(s - 2)) * (h / 12.0));
        }
    }
}

/// Cumulative integral of a sampled function from one of its nodes, with
/// the grid's rule.
pub fn cumulative_integral(f: &SampledFunction, from_index: usize) -> Result<SampledFunction> {
    if from_index >= f.len() {
        return Err(Error::InvalidArgument(format!(
            "base index {from_index} outside grid of {} nodes",
            f.len()
        )));
    }
    let values = f.grid().quadrature().cumulative(f.values(), from_index);
    SampledFunction::new(f.grid().clone(), values)?.with_derivative(f.values().to_vec())
}
