//! CSV rendering. Rationals are written as `p/q`; when a digit count is
//! given, each rational column is followed by a `_decimal` column rounded
//! to that many significant digits.

use std::fmt::Write as _;

use crate::builder::CertificateReport;
use crate::cantor::WindowReport;
use crate::density::{DensityProfile, SosdCertificate, SosdReport, Verdict};
use crate::estimator::LipEstimate;
use crate::rational::{format_rational, to_decimal, Rational};

/// Cell of a CSV row.
pub enum Cell {
    Exact(Rational),
    Text(String),
}

impl From<&Rational> for Cell {
    fn from(q: &Rational) -> Self {
        Cell::Exact(q.clone())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Header plus rows, rendered with optional decimal companions.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self, decimal: Option<usize>) -> String {
        let exact_columns: Vec<bool> = (0..self.header.len())
            .map(|i| self.rows.first().is_some_and(|r| matches!(r[i], Cell::Exact(_))))
            .collect();
        let mut out = String::new();
        let mut header = Vec::new();
        for (name, exact) in self.header.iter().zip(&exact_columns) {
            header.push(name.clone());
            if decimal.is_some() && *exact {
                header.push(format!("{name}_decimal"));
            }
        }
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut fields = Vec::new();
            for (cell, exact) in row.iter().zip(&exact_columns) {
                match cell {
                    Cell::Exact(q) => {
                        fields.push(format_rational(q));
                        if let (Some(sig), true) = (decimal, exact) {
                            fields.push(to_decimal(q, sig));
                        }
                    }
                    Cell::Text(s) => fields.push(s.clone()),
                }
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "INCONCLUSIVE",
    }
}

/// `x,r,left,right,max`.
pub fn profiles_csv(profiles: &[DensityProfile], decimal: Option<usize>) -> String {
    let mut t = Table::new(&["x", "r", "left", "right", "max"]);
    for p in profiles {
        for row in &p.rows {
            t.push(vec![(&p.point).into(), (&row.radius).into(), (&row.left).into(), (&row.right).into(), (&row.max).into()]);
        }
    }
    t.render(decimal)
}

/// `x,min_max_density,worst_radius,threshold,r_min,r_max,verdict,radii_examined`.
pub fn sosd_csv(reports: &[SosdReport], decimal: Option<usize>) -> String {
    let mut t = Table::new(&["x", "min_max_density", "worst_radius", "threshold", "r_min", "r_max", "verdict", "radii_examined"]);
    for r in reports {
        t.push(vec![
            (&r.point).into(),
            (&r.min_max_density).into(),
            (&r.worst_radius).into(),
            (&r.threshold).into(),
            (&r.r_min).into(),
            (&r.r_max).into(),
            verdict_text(r.verdict).into(),
            r.radii_examined.to_string().into(),
        ]);
    }
    t.render(decimal)
}

/// `x,lower_bound,min_found,worst_radius,threshold,verdict`; an empty bound means none was proven.
pub fn certificates_csv(reports: &[SosdCertificate], decimal: Option<usize>) -> String {
    let mut t = Table::new(&["x", "min_found", "worst_radius", "threshold", "verdict", "lower_bound"]);
    for r in reports {
        t.push(vec![
            (&r.point).into(),
            (&r.min_found).into(),
            (&r.worst_radius).into(),
            (&r.threshold).into(),
            verdict_text(r.verdict).into(),
            r.lower_bound.as_ref().map(format_rational).unwrap_or_default().into(),
        ]);
    }
    t.render(decimal)
}

/// `x,f(x)`.
pub fn values_csv(values: &[(Rational, Rational)], decimal: Option<usize>) -> String {
    let mut t = Table::new(&["x", "f(x)"]);
    for (x, fx) in values {
        t.push(vec![x.into(), fx.into()]);
    }
    t.render(decimal)
}

/// `x,f(x),skipped_bound` for truncated evaluation.
pub fn truncated_values_csv(values: &[(Rational, Rational, Rational)], decimal: Option<usize>) -> String {
    let mut t = Table::new(&["x", "f(x)", "skipped_bound"]);
    for (x, fx, bound) in values {
        t.push(vec![x.into(), fx.into(), bound.into()]);
    }
    t.render(decimal)
}

/// Per-radius rows `x,r,mf_lower,mf_upper`, a blank line, then the summary
/// section `x,lip_lower,lip_upper,Lip_lower,Lip_upper`.
pub fn lipscan_csv(estimates: &[LipEstimate], decimal: Option<usize>) -> String {
    let mut rows = Table::new(&["x", "r", "mf_lower", "mf_upper"]);
    let mut summary = Table::new(&["x", "lip_lower", "lip_upper", "Lip_lower", "Lip_upper"]);
    for e in estimates {
        for row in &e.rows {
            rows.push(vec![(&e.x).into(), (&row.r).into(), (&row.lower).into(), (&row.upper).into()]);
        }
        summary.push(vec![
            (&e.x).into(),
            (&e.lip_lower).into(),
            (&e.lip_upper).into(),
            (&e.big_lip_lower).into(),
            (&e.big_lip_upper).into(),
        ]);
    }
    let mut out = rows.render(decimal);
    out.push('\n');
    out.push_str(&summary.render(decimal));
    out
}

/// `component_lo,component_hi,level,x,side,density`.
pub fn windows_csv(report: &WindowReport, decimal: Option<usize>) -> String {
    let mut t = Table::new(&["component_lo", "component_hi", "level", "x", "side", "density"]);
    for r in &report.rows {
        t.push(vec![
            (&r.component_lo).into(),
            (&r.component_hi).into(),
            r.level.to_string().into(),
            (&r.x).into(),
            r.side.to_string().into(),
            (&r.density).into(),
        ]);
    }
    t.render(decimal)
}

/// `a,b,difference,measure` for every violated pair, preceded by a count line.
pub fn certificate_csv(report: &CertificateReport, decimal: Option<usize>) -> String {
    let mut t = Table::new(&["a", "b", "difference", "measure"]);
    for v in &report.violations {
        t.push(vec![(&v.a).into(), (&v.b).into(), (&v.difference).into(), (&v.measure).into()]);
    }
    let mut out = String::new();
    let _ = writeln!(out, "# checked {} pairs, {} violations", report.checked, report.violations.len());
    out.push_str(&t.render(decimal));
    out
}
