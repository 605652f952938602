use crate::analytic::Expr;
use crate::error::{Error, Result};
use crate::grid::{fd_derivative, Grid, SampledFunction};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Default magnitude below which a weight counts as vanishing.
pub const VANISH_TOLERANCE: f64 = 1e-12;

/// A complex number written either as a plain real or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> C64 {
        match self {
            ComplexValue::Real(r) => C64::new(r, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexValue {
    fn from(c: C64) -> Self {
        if c.im == 0.0 {
            ComplexValue::Real(c.re)
        } else {
            ComplexValue::Pair([c.re, c.im])
        }
    }
}

fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}

/// Function of one real variable, either builtin closed form or tabulated.
///
/// The kinds `constant`, `polynomial`, `shifted_square`, `sqrt_cosh`,
/// `gaussian_ground` and `table` are the weight kinds; the rest are handy
/// for right-hand sides, probes and ground states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: ComplexValue,
    },
    /// `Σ c_k x^k`, lowest order first.
    Polynomial {
        coefficients: Vec<ComplexValue>,
    },
    /// `(1 + x)^2`
    ShiftedSquare,
    /// `sqrt(cosh x)`
    SqrtCosh,
    /// `exp(-x^2)`, the square of the oscillator ground state.
    GaussianGround,
    /// `exp(-alpha x^2)`
    Gaussian {
        #[serde(default = "half")]
        alpha: f64,
    },
    /// `exp(rate x)`
    Exp {
        #[serde(default = "one")]
        rate: f64,
    },
    /// `sin(frequency x)`
    Sin {
        #[serde(default = "one")]
        frequency: f64,
    },
    /// `cos(frequency x)`
    Cos {
        #[serde(default = "one")]
        frequency: f64,
    },
    /// `cosh(rate x)`
    Cosh {
        #[serde(default = "one")]
        rate: f64,
    },
    /// CSV rows `node,value_re[,value_im]` on exactly the grid nodes.
    Table {
        path: PathBuf,
    },
}

pub type PhiSpec = FunctionSpec;

impl FunctionSpec {
    pub fn expr(&self) -> Option<Expr> {
        let x = Expr::x;
        Some(match self {
            FunctionSpec::Constant { value } => Expr::constant(value.value()),
            FunctionSpec::Polynomial { coefficients } => {
                let c: Vec<C64> = coefficients.iter().map(|v| v.value()).collect();
                Expr::polynomial(&c)
            }
            FunctionSpec::ShiftedSquare => (Expr::real(1.0) + x()).powi(2),
            FunctionSpec::SqrtCosh => x().cosh().sqrt(),
            FunctionSpec::GaussianGround => (-(x() * x())).exp(),
            FunctionSpec::Gaussian { alpha } => (Expr::real(-alpha) * x() * x()).exp(),
            FunctionSpec::Exp { rate } => (Expr::real(*rate) * x()).exp(),
            FunctionSpec::Sin { frequency } => (Expr::real(*frequency) * x()).sin(),
            FunctionSpec::Cos { frequency } => (Expr::real(*frequency) * x()).cos(),
            FunctionSpec::Cosh { rate } => (Expr::real(*rate) * x()).cosh(),
            FunctionSpec::Table { .. } => return None,
        })
    }

    /// Samples the function on the grid; tables get 4th-order differences
    /// for the derivative array.
    pub fn materialize(&self, grid: &Grid) -> Result<SampledFunction> {
        match self {
            FunctionSpec::Table { path } => {
                let values = read_table(path, grid)?;
                let d = fd_derivative(&values, grid.h());
                SampledFunction::new(grid.clone(), values)?.with_derivative(d)
            }
            other => Ok(SampledFunction::from_expr(
                grid,
                other.expr().expect("closed-form kinds have an expression"),
            )),
        }
    }
}

/// Materializes a weight and checks it never vanishes on the grid.
pub fn materialize_phi(spec: &PhiSpec, grid: &Grid) -> Result<SampledFunction> {
    materialize_phi_with(spec, grid, VANISH_TOLERANCE)
}

pub fn materialize_phi_with(spec: &PhiSpec, grid: &Grid, vanish_tolerance: f64) -> Result<SampledFunction> {
    let phi = spec.materialize(grid)?;
    phi.check_nonvanishing(vanish_tolerance)?;
    Ok(phi)
}

/// A closed-form weight with the interval and base it is exercised on.
#[derive(Clone, Debug, PartialEq)]
pub struct BuiltinCase {
    pub name: &'static str,
    pub spec: PhiSpec,
    pub a: f64,
    pub b: f64,
    pub x0: f64,
}

impl BuiltinCase {
    pub fn grid(&self, count: usize) -> Result<Grid> {
        Grid::uniform(self.a, self.b, count, self.x0)
    }

    pub fn is_real(&self) -> bool {
        !matches!(&self.spec, FunctionSpec::Polynomial { coefficients } if coefficients.iter().any(|c| c.value().im != 0.0))
    }
}

/// The weights every identity is checked against, the last one complex.
pub fn builtin_suite() -> Vec<BuiltinCase> {
    let case = |name, spec, a, b, x0| BuiltinCase { name, spec, a, b, x0 };
    vec![
        case("unit", FunctionSpec::Constant { value: ComplexValue::Real(1.0) }, 0.0, 1.0, 0.0),
        case("shifted_square", FunctionSpec::ShiftedSquare, 0.0, 1.0, 0.0),
        case("sqrt_cosh", FunctionSpec::SqrtCosh, 0.0, 2.0, 0.0),
        case("gaussian_ground", FunctionSpec::GaussianGround, -1.0, 1.0, 0.0),
        case(
            "complex_quadratic",
            FunctionSpec::Polynomial {
                coefficients: vec![ComplexValue::Real(1.0), ComplexValue::Pair([0.0, 0.5]), ComplexValue::Real(0.25)],
            },
            -1.0,
            1.0,
            -0.5,
        ),
    ]
}

/// Reads `node,value_re[,value_im]` rows whose nodes coincide with the grid.
/// A non-numeric first row is taken as a header.
pub fn read_table(path: &Path, grid: &Grid) -> Result<Vec<C64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) if (2..=3).contains(&v.len()) => rows.push((v[0], C64::new(v[1], *v.get(2).unwrap_or(&0.0)))),
            Ok(v) => {
                return Err(Error::Table(format!(
                    "{} line {}: expected 2 or 3 columns, found {}",
                    path.display(),
                    line + 1,
                    v.len()
                )))
            }
            Err(_) if line == 0 && rows.is_empty() => continue,
            Err(e) => return Err(Error::Table(format!("{} line {}: {e}", path.display(), line + 1))),
        }
    }
    if rows.len() != grid.len() {
        return Err(Error::Table(format!(
            "{}: {} rows for a grid of {} nodes",
            path.display(),
            rows.len(),
            grid.len()
        )));
    }
    let tol = 1e-12 * grid.length().max(1.0);
    for (k, ((x, _), node)) in rows.iter().zip(grid.nodes()).enumerate() {
        if (x - node).abs() > tol {
            return Err(Error::Table(format!(
                "{}: row {} has node {x}, grid node is {node}",
                path.display(),
                k + 1
            )));
        }
    }
    Ok(rows.into_iter().map(|(_, v)| v).collect())
}
