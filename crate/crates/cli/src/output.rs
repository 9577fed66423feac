//! CSV with fixed 12-significant-digit numbers; inapplicable cells empty.

use std::io::Write;

use anyhow::Result;
use diracsusy::model::Eigenpair;

use crate::solve::Row;

/// 12 significant digits, fixed notation for moderate exponents, trailing
/// zeros dropped. Zero of either sign prints as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-3..12).contains(&exp) {
        trim(&format!("{x:.*}", (11 - exp) as usize))
    } else {
        format!("{}e{exp}", trim(mant))
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub const LEVEL_HEADER: [&str; 8] =
    ["n", "branch", "E_closed_form", "E_engine", "E_oracle", "rel_err_engine_oracle", "stability", "method"];

pub fn write_rows<W: Write>(out: W, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LEVEL_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.branch.to_string(),
            cell(r.closed),
            cell(r.engine),
            cell(r.oracle),
            cell(r.rel_err),
            r.stability.to_string(),
            r.method.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One sweep point: its levels, or the error that stopped it.
pub struct SweepPoint {
    pub value: f64,
    pub outcome: std::result::Result<Vec<(usize, &'static str, f64)>, String>,
}

pub fn write_sweep<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["param", "n", "branch", "E", "error"])?;
    for p in points {
        match &p.outcome {
            Ok(levels) => {
                for (n, branch, e) in levels {
                    w.write_record([num(p.value), n.to_string(), branch.to_string(), num(*e), String::new()])?;
                }
            }
            Err(msg) => w.write_record([num(p.value), String::new(), String::new(), String::new(), msg.clone()])?,
        }
    }
    w.flush()?;
    Ok(())
}

/// A comment line with E and the norm, then `x,psi1,psi2`.
pub fn write_wavefunction<W: Write>(mut out: W, n: usize, branch: &str, eig: &Eigenpair) -> Result<()> {
    writeln!(out, "# n={n} branch={branch} E={} norm={}", num(eig.energy), num(eig.norm))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "psi1", "psi2"])?;
    let s = &eig.spinor;
    for i in 0..s.x.len() {
        w.write_record([num(s.x[i]), num(s.upper[i]), num(s.lower[i])])?;
    }
    w.flush()?;
    Ok(())
}
