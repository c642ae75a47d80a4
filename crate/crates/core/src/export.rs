//! CSV and JSON writers for profiles. Numbers are written with 17
//! significant digits so identical runs give byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::additive::AdditiveProfile;
use crate::error::Result;
use crate::multiplicative::MultiplicativeProfile;

/// `x` in scientific notation with 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows<W: Write>(
    out: &mut W,
    header: &str,
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    writeln!(out, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(format_number).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Columns `a,v,w,psi`.
pub fn write_additive_profile<W: Write>(out: &mut W, p: &AdditiveProfile) -> Result<()> {
    write_rows(
        out,
        "a,v,w,psi",
        p.rows.iter().map(|r| vec![r.a, r.v, r.w, r.psi]),
    )
}

/// Columns `y,p`: the density of μ ⊞ σ_t at y = ψ_t(a), inside the support.
pub fn write_additive_law<W: Write>(out: &mut W, p: &AdditiveProfile) -> Result<()> {
    write_rows(
        out,
        "y,p",
        p.law_rows().into_iter().map(|(y, d)| vec![y, d]),
    )
}

/// Columns `theta,r,phi,w,arg_density`.
pub fn write_multiplicative_profile<W: Write>(
    out: &mut W,
    p: &MultiplicativeProfile,
) -> Result<()> {
    write_rows(
        out,
        "theta,r,phi,w,arg_density",
        p.rows
            .iter()
            .map(|r| vec![r.theta, r.r, r.phi, r.w, r.arg_density]),
    )
}

/// Columns `phi,p`: the density of the law of u·u_t at e^{iφ}, inside U_t.
pub fn write_multiplicative_law<W: Write>(out: &mut W, p: &MultiplicativeProfile) -> Result<()> {
    write_rows(
        out,
        "phi,p",
        p.law_rows().into_iter().map(|(x, d)| vec![x, d]),
    )
}

#[derive(Serialize)]
struct IntervalsSidecar<'a> {
    t: f64,
    intervals: &'a [(f64, f64)],
}

#[derive(Serialize)]
struct ArcsSidecar {
    t: f64,
    arcs: Vec<(f64, f64)>,
}

/// `{"t":..., "intervals":[[lo,hi],...]}`
pub fn write_intervals_json<W: Write>(out: &mut W, p: &AdditiveProfile) -> Result<()> {
    let side = IntervalsSidecar {
        t: p.time(),
        intervals: &p.support_intervals,
    };
    serde_json::to_writer_pretty(&mut *out, &side)?;
    writeln!(out)?;
    Ok(())
}

/// `{"t":..., "arcs":[[start,end],...]}`; `end` may exceed π for an arc
/// through the negative real axis.
pub fn write_arcs_json<W: Write>(out: &mut W, p: &MultiplicativeProfile) -> Result<()> {
    let side = ArcsSidecar {
        t: p.time(),
        arcs: p.arcs().iter().map(|a| (a.start, a.end)).collect(),
    };
    serde_json::to_writer_pretty(&mut *out, &side)?;
    writeln!(out)?;
    Ok(())
}
