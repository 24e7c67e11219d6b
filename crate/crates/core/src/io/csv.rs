use std::io::Write;

use crate::bounds::{BoundsCurve, ImprecisionCurve, TimeScale};
use crate::error::Result;
use crate::structure::SurvivalSignature;

/// Renders `x` with 10 significant digits, in plain decimal notation for
/// magnitudes in `[1e-6, 1e15)` and in exponent notation otherwise.
/// Trailing zeros are dropped.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-6..15).contains(&mag) {
        return format!("{x:.9e}");
    }
    let decimals = (9 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

/// Things that export as one CSV table.
pub trait CsvExport {
    fn write_csv<W: Write>(&self, w: &mut W) -> Result<()>;
}

impl CsvExport for BoundsCurve<f64> {
    fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        write_bounds_csv(self, w)
    }
}

impl CsvExport for ImprecisionCurve<f64> {
    fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        write_imprecision_csv(self, w)
    }
}

impl CsvExport for SurvivalSignature {
    fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        write_signature_csv(self, w)
    }
}

pub fn emit_curve_csv<C: CsvExport, W: Write>(curve: &C, w: &mut W) -> Result<()> {
    curve.write_csv(w)
}

fn join(cells: impl IntoIterator<Item = String>) -> String {
    cells.into_iter().collect::<Vec<_>>().join(",")
}

/// `t,lower,upper,argmin_n0_<type>...,argmax_n0_<type>...`
pub fn write_bounds_csv<W: Write>(curve: &BoundsCurve<f64>, w: &mut W) -> Result<()> {
    let header = ["t".to_string(), "lower".into(), "upper".into()]
        .into_iter()
        .chain(curve.type_names.iter().map(|n| format!("argmin_n0_{n}")))
        .chain(curve.type_names.iter().map(|n| format!("argmax_n0_{n}")));
    writeln!(w, "{}", join(header))?;
    for p in &curve.points {
        let row = [p.t, p.lower, p.upper]
            .into_iter()
            .chain(p.argmin_n0.iter().copied())
            .chain(p.argmax_n0.iter().copied())
            .map(format_number);
        writeln!(w, "{}", join(row))?;
    }
    Ok(())
}

/// `t,delta` or `t_prospective,delta`.
pub fn write_imprecision_csv<W: Write>(curve: &ImprecisionCurve<f64>, w: &mut W) -> Result<()> {
    let first = match curve.scale {
        TimeScale::Elapsed => "t",
        TimeScale::Prospective => "t_prospective",
    };
    writeln!(w, "{first},delta")?;
    for &(t, d) in &curve.points {
        writeln!(w, "{},{}", format_number(t), format_number(d))?;
    }
    Ok(())
}

/// `l_<type>...,phi,phi_exact`, one row per count vector.
pub fn write_signature_csv<W: Write>(sig: &SurvivalSignature, w: &mut W) -> Result<()> {
    let header = sig
        .type_names()
        .iter()
        .map(|n| format!("l_{n}"))
        .chain(["phi".to_string(), "phi_exact".to_string()]);
    writeln!(w, "{}", join(header))?;
    for (l, phi) in sig.iter() {
        let value = *phi.numer() as f64 / *phi.denom() as f64;
        let row = l
            .iter()
            .map(|x| x.to_string())
            .chain([format_number(value), phi.to_string()]);
        writeln!(w, "{}", join(row))?;
    }
    Ok(())
}

/// Bounds of one hypothetical data set at one prospective time.
#[derive(Debug, Clone, PartialEq)]
pub struct WhatIfRow {
    pub scenario: String,
    pub t_now: f64,
    pub t_prospective: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `scenario,t_now,t_prospective,lower,upper,delta`
pub fn write_what_if_csv<W: Write>(rows: &[WhatIfRow], w: &mut W) -> Result<()> {
    writeln!(w, "scenario,t_now,t_prospective,lower,upper,delta")?;
    for r in rows {
        writeln!(
            w,
            "{},{}",
            r.scenario,
            join([r.t_now, r.t_prospective, r.lower, r.upper, r.upper - r.lower].map(format_number))
        )?;
    }
    Ok(())
}
