mod config;

use clap::{Parser, Subcommand};
use config::{require, ConfigError, ProblemSpec, RunConfig};
use phipower::calculus::taylor_expand;
use phipower::export;
use phipower::phi::{materialize_phi, FunctionSpec};
use phipower::powers::PowerTable;
use phipower::spps::{build_spps, dirichlet_eigenvalues_with, schrodinger_problem, EigenOptions, SturmLiouvilleProblem};
use phipower::susy::{build_susy_pair, partner_spectrum_check};
use phipower::trig::{build_trig, build_trig_with, required_truncation};
use phipower::verify::{verify, Status, VerifyOptions};
use phipower::volterra::{partner_resolvent, resolvent_solution};
use phipower::{Grid, SampledFunction};
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "phipower", version, about = "Phi-generalized powers, SPPS spectra and Volterra resolvents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Io {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// directory for the output files
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Power table X⁽ⁿ⁾, X̃⁽ⁿ⁾ as powers.csv
    Powers(Io),
    /// Φ-trigonometric and hyperbolic functions as trig.csv and trig_phase.csv
    Trig(Io),
    /// Taylor coefficients and remainder
    Taylor(Io),
    /// SPPS solution at one spectral parameter
    Solve(Io),
    /// Dirichlet eigenvalues as eigen.csv
    Eigen(Io),
    /// SUSY pair and partner spectrum report
    Susy(Io),
    /// Neumann-series solution parts as volterra.csv
    Volterra(Io),
    /// Full invariant suite; exits 1 if any entry fails
    Verify(Io),
}

enum Failure {
    Config(String),
    Library(phipower::Error),
    Output(io::Error),
    Invariant(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<phipower::Error> for Failure {
    fn from(e: phipower::Error) -> Self {
        Failure::Library(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Output(e)
    }
}

impl Failure {
    /// 1 for failures found while computing, 2 for bad input or output.
    fn code(&self) -> u8 {
        match self {
            Failure::Library(e) if !e.is_precondition() => 1,
            Failure::Invariant(_) => 1,
            _ => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("config error: {m}"),
            Failure::Library(e) => format!("{}: {e}", e.name()),
            Failure::Output(e) => format!("io error: {e}"),
            Failure::Invariant(m) => format!("invariant failure: {m}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Powers(io) => with_config(io, powers),
        Command::Trig(io) => with_config(io, trig),
        Command::Taylor(io) => with_config(io, taylor),
        Command::Solve(io) => with_config(io, solve),
        Command::Eigen(io) => with_config(io, eigen),
        Command::Susy(io) => with_config(io, susy),
        Command::Volterra(io) => with_config(io, volterra),
        Command::Verify(io) => with_config(io, run_verify),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("phipower: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn with_config(io: &Io, run: fn(&RunConfig, &Path) -> Outcome) -> Outcome {
    let cfg = RunConfig::load(&io.config)?;
    std::fs::create_dir_all(&io.out)?;
    run(&cfg, &io.out)
}

fn create(out: &Path, name: &str) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn phi_on(cfg: &RunConfig, grid: &Grid) -> Result<SampledFunction, Failure> {
    Ok(materialize_phi(cfg.phi()?, grid)?)
}

fn powers(cfg: &RunConfig, out: &Path) -> Outcome {
    let g = cfg.grid()?;
    let table = PowerTable::build(&phi_on(cfg, &g)?, g.x0_index(), cfg.powers.order)?;
    export::write_powers(create(out, "powers.csv")?, &table)?;
    println!("powers: order {} on {} nodes, c = {}", table.order(), g.len(), table.c_bound());
    Ok(())
}

fn trig(cfg: &RunConfig, out: &Path) -> Outcome {
    let g = cfg.grid()?;
    let phi = phi_on(cfg, &g)?;
    let probe = PowerTable::build(&phi, g.x0_index(), 0)?;
    let k = match cfg.trig.truncation {
        Some(k) => k,
        None => required_truncation(&probe, cfg.tolerances.epsilon)?,
    };
    let table = PowerTable::build(&phi, g.x0_index(), 2 * k + 1)?;
    let set = match cfg.trig.truncation {
        Some(k) => build_trig_with(&table, k)?,
        None => build_trig(&table, cfg.tolerances.epsilon)?,
    };
    export::write_trig(create(out, "trig.csv")?, &set)?;
    export::write_trig_phase(create(out, "trig_phase.csv")?, &set)?;
    println!(
        "trig: K = {}, tail bound {:e}, elliptic residual {:e}, hyperbolic residual {:e}",
        set.k,
        set.tail_bound,
        set.elliptic_residual(),
        set.hyperbolic_residual()
    );
    Ok(())
}

fn taylor(cfg: &RunConfig, out: &Path) -> Outcome {
    let block = require(&cfg.taylor, "taylor")?;
    let g = cfg.grid()?;
    let table = PowerTable::build(&phi_on(cfg, &g)?, g.x0_index(), block.order)?;
    let f = block.f.materialize(&g)?;
    let e = taylor_expand(&f, &table, block.order)?;
    export::write_taylor_coefficients(create(out, "taylor_coefficients.csv")?, &e)?;
    export::write_taylor_nodes(create(out, "taylor_nodes.csv")?, &g, &e)?;
    let r = e.reconstruction_residual(&f);
    println!("taylor: order {}, reconstruction residual {r:e}", block.order);
    if !(r <= cfg.tolerances.identity) {
        return Err(Failure::Invariant(format!("Taylor reconstruction residual {r:e} above {:e}", cfg.tolerances.identity)));
    }
    Ok(())
}

fn problem(spec: &ProblemSpec, g: &Grid) -> Result<SturmLiouvilleProblem, Failure> {
    let m = |s: &FunctionSpec| s.materialize(g);
    Ok(match spec {
        ProblemSpec::Schrodinger { potential, psi0 } => schrodinger_problem(&m(potential)?, &m(psi0)?)?,
        ProblemSpec::SturmLiouville { p, q, r, u0 } => SturmLiouvilleProblem::new(m(p)?, m(q)?, m(r)?, m(u0)?)?,
    })
}

fn solve(cfg: &RunConfig, out: &Path) -> Outcome {
    let block = require(&cfg.solve, "solve")?;
    let g = cfg.grid()?;
    let p = problem(&block.problem, &g)?;
    let series = build_spps(&p, block.truncation)?;
    let sol = series.evaluate(block.lambda.value(), block.c1.value(), block.c2.value(), cfg.tolerances.series)?;
    export::write_solution(create(out, "solution.csv")?, &g, &sol)?;
    let r = phipower::spps::ode_residual(&p, &sol);
    println!("solve: lambda = {}, K = {}, ODE residual {r:e}", sol.lambda, block.truncation);
    Ok(())
}

fn eigen(cfg: &RunConfig, out: &Path) -> Outcome {
    let block = require(&cfg.eigen, "eigen")?;
    // the left endpoint is the base, so u₂ carries the left boundary condition
    let g = cfg.grid()?.with_base(0)?;
    let series = build_spps(&problem(&block.problem, &g)?, block.truncation)?;
    let opts = EigenOptions {
        scan_points: block.scan_points,
        root_tol: cfg.tolerances.root,
        series_tol: cfg.tolerances.series,
        ..EigenOptions::default()
    };
    let e = dirichlet_eigenvalues_with(&series, (block.range[0], block.range[1]), block.count, &opts)?;
    export::write_eigen(create(out, "eigen.csv")?, &e)?;
    println!("eigen: {} eigenvalues in [{}, {}] with K = {}", e.eigenvalues.len(), block.range[0], block.range[1], e.k);
    for (n, l) in e.eigenvalues.iter().enumerate() {
        println!("  {n}: {l}");
    }
    Ok(())
}

fn susy(cfg: &RunConfig, out: &Path) -> Outcome {
    let block = require(&cfg.susy, "susy")?;
    let g = cfg.grid()?;
    let pair = build_susy_pair(&block.psi0.materialize(&g)?)?;
    export::write_susy_pair(create(out, "susy_pair.csv")?, &pair)?;
    let opts = EigenOptions { root_tol: cfg.tolerances.root, series_tol: cfg.tolerances.series, ..EigenOptions::default() };
    let rep = partner_spectrum_check(&pair, block.levels, block.truncation, (block.range[0], block.range[1]), &opts)?;
    export::write_spectrum(create(out, "spectrum.csv")?, &rep)?;
    println!(
        "susy: partner ground residual {:e}, ground energy {:?}, max shift mismatch {:e}",
        pair.partner_ground_residual(),
        rep.ground,
        rep.max_difference
    );
    Ok(())
}

fn volterra(cfg: &RunConfig, out: &Path) -> Outcome {
    let block = require(&cfg.volterra, "volterra")?;
    let g = cfg.grid()?;
    let psi0 = block.psi0.materialize(&g)?;
    let sum = if block.partner { partner_resolvent } else { resolvent_solution };
    let r = sum(&psi0, block.lambda.value(), g.x0_index(), cfg.tolerances.series)?;
    export::write_resolvent(create(out, "volterra.csv")?, &r, block.c1.value(), block.c2.value())?;
    println!("volterra: {} Neumann terms, tail {:e}", r.neumann_terms, r.tail_estimate);
    Ok(())
}

fn run_verify(cfg: &RunConfig, out: &Path) -> Outcome {
    let g = cfg.grid()?;
    let phi = phi_on(cfg, &g)?;
    let t = cfg.tolerances;
    let opts = VerifyOptions {
        tol_identity: t.identity,
        epsilon: t.epsilon,
        series_tol: t.series,
        root_tol: t.root,
        order: cfg.verify.order,
        kernel_nodes: cfg.verify.kernel_nodes,
        seed: cfg.verify.seed,
        spectra: cfg.verify.spectra,
    };
    let rep = verify(&phi, &opts)?;
    let file = create(out, "verify.json")?;
    serde_json::to_writer_pretty(file, &rep).map_err(io::Error::from)?;
    for e in &rep.entries {
        let tag = match e.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let note = e.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
        println!("{tag} {:<16} {:<36} {:>12.3e} <= {:.1e}{note}", e.module, e.name, e.residual, e.tolerance);
    }
    println!("verify: {} passed, {} failed, {} skipped", rep.passed, rep.failed, rep.skipped);
    if rep.all_passed() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("{} verify entries failed", rep.failed)))
    }
}
