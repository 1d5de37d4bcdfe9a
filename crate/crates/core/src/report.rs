//! CSV emission and parsing for every subcommand.
//!
//! Floats are written with 12 significant digits in scientific notation so a
//! file always reparses into the same rounded values. Leading `#` lines carry
//! units and run metadata; readers skip them.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::bounds::{Binding, BoundReport};
use crate::config::Mode;
use crate::error::Result;
use crate::leakage::LeakageProfile;
use crate::schemes::{MonteCarloReport, SchemeVariant};
use crate::verify::CheckLine;

/// 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds through the textual form, i.e. what a reader will see.
pub fn round12(x: f64) -> f64 {
    num(x).parse().expect("formatted float reparses")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_comments<W: Write>(w: &mut W, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    Ok(())
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}

/// One row of the bounds table. Columns for curves outside the requested
/// modes are empty.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BoundRow {
    pub d: f64,
    pub rate_lower_classic: Option<f64>,
    pub rate_lower_modified: Option<f64>,
    pub rate_upper: Option<f64>,
    pub ntilde1: Option<usize>,
    pub ntilde2: Option<usize>,
    pub n2: Option<usize>,
    pub n3: Option<usize>,
    pub n1: Option<usize>,
    pub binding_classic: Option<Binding>,
    pub binding_modified: Option<Binding>,
}

pub const BOUND_COLUMNS: [&str; 11] = [
    "d",
    "rate_lower_classic",
    "rate_lower_modified",
    "rate_upper",
    "ntilde1",
    "ntilde2",
    "n2",
    "n3",
    "n1",
    "binding_classic",
    "binding_modified",
];

impl BoundRow {
    pub fn from_report(r: &BoundReport, modes: &[Mode]) -> Self {
        let classic = modes.contains(&Mode::Classic);
        let modified = modes.contains(&Mode::Modified);
        let upper = modes.contains(&Mode::UpperExact) || modes.contains(&Mode::UpperAsymptotic);
        let keep = |on: bool, v: f64| on.then_some(v);
        let keep_n = |on: bool, v: usize| on.then_some(v);
        Self {
            d: r.d,
            rate_lower_classic: keep(classic, r.rate_lower_classic),
            rate_lower_modified: keep(modified, r.rate_lower_modified),
            rate_upper: keep(upper, r.rate_upper),
            ntilde1: keep_n(classic, r.ntilde1),
            ntilde2: keep_n(classic, r.ntilde2),
            n2: keep_n(modified, r.n2),
            n3: keep_n(modified, r.n3),
            n1: keep_n(upper, r.n1),
            binding_classic: classic.then_some(r.binding_classic),
            binding_modified: modified.then_some(r.binding_modified),
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            num(self.d),
            opt_num(self.rate_lower_classic),
            opt_num(self.rate_lower_modified),
            opt_num(self.rate_upper),
            opt(self.ntilde1),
            opt(self.ntilde2),
            opt(self.n2),
            opt(self.n3),
            opt(self.n1),
            opt(self.binding_classic),
            opt(self.binding_modified),
        ]
    }
}

pub fn write_bounds<W: Write>(mut w: W, comments: &[String], rows: &[BoundRow]) -> Result<()> {
    write_comments(&mut w, comments)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BOUND_COLUMNS)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_bounds<R: Read>(r: R) -> Result<Vec<BoundRow>> {
    Ok(reader(r).deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Monte Carlo excess-distortion estimate at one threshold, with the
/// analytic value alongside.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SimulateRow {
    pub variant: SchemeVariant,
    pub n: usize,
    pub d: f64,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub exact: f64,
    pub seed: u64,
}

pub const SIMULATE_COLUMNS: [&str; 9] = [
    "variant",
    "n",
    "d",
    "trials",
    "hits",
    "estimate",
    "ci_halfwidth",
    "exact",
    "seed",
];

impl SimulateRow {
    pub fn new(variant: SchemeVariant, n: usize, d: f64, report: &MonteCarloReport, exact: f64) -> Self {
        Self {
            variant,
            n,
            d,
            trials: report.trials,
            hits: report.hits,
            estimate: report.estimate,
            ci_halfwidth: report.ci_halfwidth,
            exact,
            seed: report.seed,
        }
    }

    pub fn report(&self) -> MonteCarloReport {
        MonteCarloReport {
            trials: self.trials,
            hits: self.hits,
            estimate: self.estimate,
            ci_halfwidth: self.ci_halfwidth,
            seed: self.seed,
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.variant.to_string(),
            self.n.to_string(),
            num(self.d),
            self.trials.to_string(),
            self.hits.to_string(),
            num(self.estimate),
            num(self.ci_halfwidth),
            num(self.exact),
            self.seed.to_string(),
        ]
    }
}

pub fn write_simulate<W: Write>(mut w: W, comments: &[String], rows: &[SimulateRow]) -> Result<()> {
    write_comments(&mut w, comments)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SIMULATE_COLUMNS)?;
    for r in rows {
        out.write_record(r.record())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_simulate<R: Read>(r: R) -> Result<Vec<SimulateRow>> {
    Ok(reader(r).deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Exact leakage against the bound at one blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct LeakageRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub exact_leakage: f64,
    pub f2_bound: f64,
    pub margin: f64,
}

pub const LEAKAGE_COLUMNS: [&str; 4] = ["N", "exact_leakage", "f2_bound", "margin"];

pub fn leakage_rows(profile: &LeakageProfile) -> Vec<LeakageRow> {
    (1..=profile.n_max)
        .map(|n| LeakageRow {
            n,
            exact_leakage: profile.exact[n - 1],
            f2_bound: profile.f2[n - 1],
            margin: profile.margin(n),
        })
        .collect()
}

pub fn write_leakage<W: Write>(mut w: W, comments: &[String], rows: &[LeakageRow]) -> Result<()> {
    write_comments(&mut w, comments)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(LEAKAGE_COLUMNS)?;
    for r in rows {
        out.write_record([r.n.to_string(), num(r.exact_leakage), num(r.f2_bound), num(r.margin)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_leakage<R: Read>(r: R) -> Result<Vec<LeakageRow>> {
    Ok(reader(r).deserialize().collect::<std::result::Result<_, _>>()?)
}

/// A verification check as written to disk.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub verdict: String,
}

pub const CHECK_COLUMNS: [&str; 5] = ["name", "observed", "expected", "tolerance", "verdict"];

pub fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

pub fn write_checks<W: Write>(mut w: W, comments: &[String], lines: &[CheckLine]) -> Result<()> {
    write_comments(&mut w, comments)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CHECK_COLUMNS)?;
    for l in lines {
        out.write_record([
            l.name.clone(),
            num(l.observed),
            num(l.expected),
            num(l.tolerance),
            verdict(l.passed()).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_checks<R: Read>(r: R) -> Result<Vec<CheckRow>> {
    Ok(reader(r).deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.1), "1.00000000000e-1");
        assert_eq!(num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(round12(std::f64::consts::PI), 3.14159265359);
    }

    #[test]
    fn bounds_roundtrip_with_empty_columns() {
        let report = BoundReport {
            d: 0.15,
            rate_lower_classic: 1.0 / 217.0,
            rate_lower_modified: 1.0 / 112.0,
            rate_upper: 1.0,
            ntilde1: 217,
            ntilde2: 3,
            n2: 112,
            n3: 85,
            n1: 2,
            binding_classic: Binding::Distortion,
            binding_modified: Binding::Secrecy,
        };
        let rows = vec![
            BoundRow::from_report(&report, &Mode::ALL),
            BoundRow::from_report(&report, &[Mode::Modified]),
        ];
        let mut buf = Vec::new();
        write_bounds(&mut buf, &["units: test".into()], &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# units: test\nd,rate_lower_classic,"));
        let back = read_bounds(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].rate_lower_classic, Some(round12(1.0 / 217.0)));
        assert_eq!(back[0].binding_modified, Some(Binding::Secrecy));
        assert_eq!(back[1].rate_lower_classic, None);
        assert_eq!(back[1].n2, Some(112));
        assert_eq!(back[1].n1, None);
    }

    #[test]
    fn simulate_and_leakage_roundtrip() {
        let rep = MonteCarloReport::from_counts(1000, 7, 42);
        let rows = vec![SimulateRow::new(SchemeVariant::Modified, 50, 0.5, &rep, 0.00612)];
        let mut buf = Vec::new();
        write_simulate(&mut buf, &[], &rows).unwrap();
        let back = read_simulate(&buf[..]).unwrap();
        assert_eq!(back[0].variant, SchemeVariant::Modified);
        assert_eq!(back[0].report().hits, 7);
        assert_eq!(back[0].estimate, round12(rep.estimate));

        let lrows = vec![LeakageRow {
            n: 1,
            exact_leakage: 0.02326,
            f2_bound: 70.0 / 2400.0,
            margin: 70.0 / 2400.0 - 0.02326,
        }];
        let mut buf = Vec::new();
        write_leakage(&mut buf, &[], &lrows).unwrap();
        let back = read_leakage(&buf[..]).unwrap();
        assert_eq!(back[0].n, 1);
        assert_eq!(back[0].f2_bound, round12(70.0 / 2400.0));
    }

    #[test]
    fn checks_roundtrip() {
        let lines = vec![
            CheckLine::within("a", 1.0, 1.0, 0.1),
            CheckLine::at_most("b", 2.0, 1.0, 0.0),
        ];
        let mut buf = Vec::new();
        write_checks(&mut buf, &[], &lines).unwrap();
        let back = read_checks(&buf[..]).unwrap();
        assert_eq!(back[0].verdict, "pass");
        assert_eq!(back[1].verdict, "fail");
        assert_eq!(back[1].name, "b");
    }
}
