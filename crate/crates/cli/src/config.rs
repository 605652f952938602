use phipower::phi::{ComplexValue, FunctionSpec};
use phipower::quadrature::Rule;
use phipower::Grid;
use serde::Deserialize;
use std::path::Path;

/// One run: the grid, an optional weight, and the block for the subcommand.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub interval: Interval,
    pub grid_size: usize,
    pub x0: f64,
    #[serde(default)]
    pub quadrature: Rule,
    pub phi: Option<FunctionSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub powers: PowersBlock,
    #[serde(default)]
    pub trig: TrigBlock,
    pub taylor: Option<TaylorBlock>,
    pub solve: Option<SolveBlock>,
    pub eigen: Option<EigenBlock>,
    pub susy: Option<SusyBlock>,
    pub volterra: Option<VolterraBlock>,
    #[serde(default)]
    pub verify: VerifyBlock,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub identity: f64,
    pub epsilon: f64,
    pub series: f64,
    pub root: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-8, epsilon: 1e-10, series: 1e-12, root: 1e-10 }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowersBlock {
    pub order: usize,
}

impl Default for PowersBlock {
    fn default() -> Self {
        PowersBlock { order: 8 }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrigBlock {
    /// fixed truncation instead of the certified one
    pub truncation: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaylorBlock {
    pub f: FunctionSpec,
    pub order: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `−ψ'' + Vψ = λψ`
    Schrodinger { potential: FunctionSpec, psi0: FunctionSpec },
    /// `(p u')' + q u = λ r u`
    SturmLiouville { p: FunctionSpec, q: FunctionSpec, r: FunctionSpec, u0: FunctionSpec },
}

fn default_truncation() -> usize {
    30
}

fn one() -> ComplexValue {
    ComplexValue::Real(1.0)
}

fn zero() -> ComplexValue {
    ComplexValue::Real(0.0)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveBlock {
    pub problem: ProblemSpec,
    pub lambda: ComplexValue,
    #[serde(default = "one")]
    pub c1: ComplexValue,
    #[serde(default = "zero")]
    pub c2: ComplexValue,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_scan() -> usize {
    phipower::spps::DEFAULT_SCAN_POINTS
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenBlock {
    pub problem: ProblemSpec,
    pub range: [f64; 2],
    pub count: usize,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_scan")]
    pub scan_points: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SusyBlock {
    pub psi0: FunctionSpec,
    pub levels: usize,
    pub range: [f64; 2],
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolterraBlock {
    pub psi0: FunctionSpec,
    pub lambda: ComplexValue,
    #[serde(default = "one")]
    pub c1: ComplexValue,
    #[serde(default = "one")]
    pub c2: ComplexValue,
    /// sum the partner series (`ψ₀ → 1/ψ₀`) instead
    #[serde(default)]
    pub partner: bool,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    pub order: usize,
    pub kernel_nodes: usize,
    pub seed: u64,
    pub spectra: bool,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        let d = phipower::verify::VerifyOptions::default();
        VerifyBlock { order: d.order, kernel_nodes: d.kernel_nodes, seed: d.seed, spectra: d.spectra }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Tolerance knobs that the environment may override.
pub const ENV_OVERRIDES: [&str; 4] =
    ["PHIPOWER_TOL_IDENTITY", "PHIPOWER_EPSILON", "PHIPOWER_SERIES_TOL", "PHIPOWER_ROOT_TOL"];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        cfg.apply_env(|k| std::env::var(k).ok())?;
        if let Some(dir) = path.parent() {
            cfg.resolve_tables(dir);
        }
        Ok(cfg)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        let slots = [
            &mut self.tolerances.identity,
            &mut self.tolerances.epsilon,
            &mut self.tolerances.series,
            &mut self.tolerances.root,
        ];
        for (name, slot) in ENV_OVERRIDES.iter().zip(slots) {
            if let Some(v) = get(name) {
                let parsed: f64 =
                    v.trim().parse().map_err(|_| ConfigError(format!("{name}={v:?} is not a number")))?;
                if !(parsed > 0.0 && parsed.is_finite()) {
                    return Err(ConfigError(format!("{name} must be positive, got {v}")));
                }
                *slot = parsed;
            }
        }
        Ok(())
    }

    // Table paths are relative to the config file.
    fn resolve_tables(&mut self, dir: &Path) {
        let fix = |spec: &mut FunctionSpec| {
            if let FunctionSpec::Table { path } = spec {
                if path.is_relative() {
                    *path = dir.join(&*path);
                }
            }
        };
        let problem = |p: &mut ProblemSpec| match p {
            ProblemSpec::Schrodinger { potential, psi0 } => {
                fix(potential);
                fix(psi0);
            }
            ProblemSpec::SturmLiouville { p, q, r, u0 } => {
                for s in [p, q, r, u0] {
                    fix(s);
                }
            }
        };
        if let Some(p) = &mut self.phi {
            fix(p);
        }
        if let Some(t) = &mut self.taylor {
            fix(&mut t.f);
        }
        if let Some(s) = &mut self.solve {
            problem(&mut s.problem);
        }
        if let Some(e) = &mut self.eigen {
            problem(&mut e.problem);
        }
        if let Some(s) = &mut self.susy {
            fix(&mut s.psi0);
        }
        if let Some(v) = &mut self.volterra {
            fix(&mut v.psi0);
        }
    }

    pub fn grid(&self) -> Result<Grid, phipower::Error> {
        Ok(Grid::uniform(self.interval.a, self.interval.b, self.grid_size, self.x0)?.with_rule(self.quadrature))
    }

    pub fn phi(&self) -> Result<&FunctionSpec, ConfigError> {
        self.phi.as_ref().ok_or_else(|| ConfigError("this subcommand needs a `phi` entry".into()))
    }
}

pub fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
    block.as_ref().ok_or_else(|| ConfigError(format!("this subcommand needs a `{name}` block")))
}
