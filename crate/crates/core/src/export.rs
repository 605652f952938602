//! CSV writers. Floats are printed as `{:.16e}` (17 significant digits), so
//! a value read back is the value written.

use crate::calculus::TaylorExpansion;
use crate::grid::Grid;
use crate::powers::PowerTable;
use crate::spps::{EigenResult, SppsSolution};
use crate::susy::{SpectrumReport, SusyPair};
use crate::trig::PhiTrigSet;
use crate::volterra::ResolventSolution;
use crate::C64;
use std::io::{self, Write};

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// `node` followed by `name_re,name_im` for each complex column.
pub fn write_node_columns<W: Write>(out: W, grid: &Grid, columns: &[(&str, &[C64])]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["node".to_string()];
    for (name, col) in columns {
        debug_assert_eq!(col.len(), grid.len());
        header.push(format!("{name}_re"));
        header.push(format!("{name}_im"));
    }
    w.write_record(&header)?;
    for (i, x) in grid.nodes().iter().enumerate() {
        let mut rec = Vec::with_capacity(header.len());
        rec.push(fmt(*x));
        for (_, col) in columns {
            rec.push(fmt(col[i].re));
            rec.push(fmt(col[i].im));
        }
        w.write_record(&rec)?;
    }
    w.flush()
}

/// `node, X0..XN, Xt0..XtN`, each as a re/im pair.
pub fn write_powers<W: Write>(out: W, table: &PowerTable) -> io::Result<()> {
    let names: Vec<String> = (0..=table.order())
        .map(|n| format!("X{n}"))
        .chain((0..=table.order()).map(|n| format!("Xt{n}")))
        .collect();
    let rows = (0..=table.order()).map(|n| table.x(n)).chain((0..=table.order()).map(|n| table.xt(n)));
    let columns: Vec<(&str, &[C64])> = names.iter().map(String::as_str).zip(rows).collect();
    write_node_columns(out, table.grid(), &columns)
}

pub fn write_trig<W: Write>(out: W, trig: &PhiTrigSet<'_>) -> io::Result<()> {
    let columns: [(&str, &[C64]); 8] = [
        ("C", &trig.c),
        ("Ct", &trig.ct),
        ("S", &trig.s),
        ("St", &trig.st),
        ("Ch", &trig.ch),
        ("Cht", &trig.cht),
        ("Sh", &trig.sh),
        ("Sht", &trig.sht),
    ];
    write_node_columns(out, trig.table().grid(), &columns)
}

/// Phase pairs `(C C̃, S S̃)` and `(Ch C̃h, Sh S̃h)` per node.
pub fn write_trig_phase<W: Write>(out: W, trig: &PhiTrigSet<'_>) -> io::Result<()> {
    let (cc, ss): (Vec<C64>, Vec<C64>) = trig.elliptic_phase().into_iter().unzip();
    let (chch, shsh): (Vec<C64>, Vec<C64>) = trig.hyperbolic_phase().into_iter().unzip();
    let columns: [(&str, &[C64]); 4] = [("CCt", &cc), ("SSt", &ss), ("ChCht", &chch), ("ShSht", &shsh)];
    write_node_columns(out, trig.table().grid(), &columns)
}

/// `k, coefficient_re, coefficient_im`
pub fn write_taylor_coefficients<W: Write>(out: W, e: &TaylorExpansion) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "coefficient_re", "coefficient_im"])?;
    for (k, c) in e.coefficients.iter().enumerate() {
        w.write_record([k.to_string(), fmt(c.re), fmt(c.im)])?;
    }
    w.flush()
}

pub fn write_taylor_nodes<W: Write>(out: W, grid: &Grid, e: &TaylorExpansion) -> io::Result<()> {
    write_node_columns(out, grid, &[("partial_sum", &e.partial_sum), ("remainder", &e.remainder)])
}

/// `index, lambda, residual`
pub fn write_eigen<W: Write>(out: W, e: &EigenResult) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "lambda", "residual"])?;
    for (k, (l, r)) in e.eigenvalues.iter().zip(&e.residuals).enumerate() {
        w.write_record([k.to_string(), fmt(*l), fmt(*r)])?;
    }
    w.flush()
}

/// `level, E1, E2_shifted, difference`
pub fn write_spectrum<W: Write>(out: W, rep: &SpectrumReport) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "E1", "E2_shifted", "difference"])?;
    for row in &rep.rows {
        w.write_record([row.level.to_string(), fmt(row.e1), fmt(row.e2_shifted), fmt(row.difference)])?;
    }
    w.flush()
}

pub fn write_susy_pair<W: Write>(out: W, pair: &SusyPair) -> io::Result<()> {
    let columns: [(&str, &[C64]); 5] = [
        ("psi0", pair.psi0.values()),
        ("W", pair.w.values()),
        ("dW", &pair.dw),
        ("V1", pair.v1.values()),
        ("V2", pair.v2.values()),
    ];
    write_node_columns(out, pair.psi0.grid(), &columns)
}

pub fn write_solution<W: Write>(out: W, grid: &Grid, sol: &SppsSolution) -> io::Result<()> {
    let columns: [(&str, &[C64]); 6] =
        [("u", &sol.u), ("du", &sol.du), ("u1", &sol.u1), ("du1", &sol.du1), ("u2", &sol.u2), ("du2", &sol.du2)];
    write_node_columns(out, grid, &columns)
}

/// `u1_part`, `u2_part` and `u = c₁ u1_part + c₂ u2_part`.
pub fn write_resolvent<W: Write>(out: W, r: &ResolventSolution, c1: C64, c2: C64) -> io::Result<()> {
    let u = r.combine(c1, c2);
    let columns: [(&str, &[C64]); 3] = [("u1_part", &r.u1_part), ("u2_part", &r.u2_part), ("u", &u)];
    write_node_columns(out, r.psi0.grid(), &columns)
}
