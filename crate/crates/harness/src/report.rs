//! Reports and their CSV form.

use std::io::Write;

use capacity_core::report::Verdict;

use crate::scenario::Kind;
use crate::HarnessError;

pub const CSV_COLUMNS: [&str; 9] = ["id", "kind", "capacity", "method", "bound", "slack", "verdict", "h", "runtime"];

/// Outcome of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: String,
    pub kind: Kind,
    /// Scenario and descriptor text, verbatim.
    pub inputs: String,
    pub capacity: Option<f64>,
    /// `grid-energy`, `closed-form`, `quadrature` or `ode`.
    pub method: String,
    pub error_indicator: f64,
    pub bound: Option<f64>,
    /// `computed − bound` for lower bounds, `bound − computed` for upper.
    pub slack: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub h: Option<f64>,
    pub runtime: f64,
    pub h0: Option<f64>,
    /// `(quantity, source)` for every number that enters the verdict.
    pub provenance: Vec<(String, String)>,
    pub notes: Vec<String>,
    /// `(outer radius, cap(K, B_R))` of an exhaustion.
    pub trace: Vec<(f64, f64)>,
    pub trace_monotone: Option<bool>,
}

impl Report {
    pub fn new(id: &str, kind: Kind, inputs: &str) -> Report {
        Report {
            id: id.to_string(),
            kind,
            inputs: inputs.to_string(),
            capacity: None,
            method: String::new(),
            error_indicator: 0.0,
            bound: None,
            slack: None,
            tolerance: 0.0,
            verdict: Verdict::Inapplicable,
            h: None,
            runtime: 0.0,
            h0: None,
            provenance: Vec::new(),
            notes: Vec::new(),
            trace: Vec::new(),
            trace_monotone: None,
        }
    }

    pub fn provenance(&mut self, what: &str, source: impl Into<String>) {
        self.provenance.push((what.to_string(), source.into()));
    }

    /// Multi-line human-readable form, inputs included.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map_or("-".to_string(), format_number);
        s += &format!("id:              {}\n", self.id);
        s += &format!("kind:            {}\n", self.kind.as_str());
        s += &format!("verdict:         {}\n", self.verdict);
        s += &format!("capacity:        {} ({})\n", opt(self.capacity), self.method);
        s += &format!("bound:           {}\n", opt(self.bound));
        s += &format!("slack:           {}\n", opt(self.slack));
        s += &format!("tolerance:       {}\n", format_number(self.tolerance));
        s += &format!("error indicator: {}\n", format_number(self.error_indicator));
        s += &format!("H0:              {}\n", opt(self.h0));
        s += &format!("h:               {}\n", opt(self.h));
        s += &format!("runtime [s]:     {:.3}\n", self.runtime);
        for (what, src) in &self.provenance {
            s += &format!("source:          {what} <- {src}\n");
        }
        if !self.trace.is_empty() {
            s += "exhaustion:\n";
            for (r, c) in &self.trace {
                s += &format!("  R = {}  cap = {}\n", format_number(*r), format_number(*c));
            }
            if let Some(m) = self.trace_monotone {
                s += &format!("  nonincreasing: {m}\n");
            }
        }
        for n in &self.notes {
            s += &format!("note:            {n}\n");
        }
        s += "inputs:\n";
        for line in self.inputs.lines() {
            s += &format!("  | {line}\n");
        }
        s
    }
}

/// Twelve significant digits, round-trippable through `str::parse`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        format!("{v}")
    }
}

/// Writes the header and one row per report.
pub fn emit_csv<W: Write>(reports: &[Report], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), format_number);
    for r in reports {
        w.write_record([
            r.id.clone(),
            r.kind.as_str().to_string(),
            opt(r.capacity),
            r.method.clone(),
            opt(r.bound),
            opt(r.slack),
            r.verdict.as_str().to_string(),
            opt(r.h),
            format!("{:.3}", r.runtime),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub id: String,
    pub kind: String,
    pub capacity: Option<f64>,
    pub method: String,
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    pub verdict: Verdict,
    pub h: Option<f64>,
    pub runtime: f64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, HarnessError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(HarnessError::Invalid("unexpected CSV header".into()));
    }
    let num = |s: &str| -> Result<Option<f64>, HarnessError> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| HarnessError::Invalid(format!("bad number `{s}`")))
        }
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(CsvRow {
            id: rec[0].to_string(),
            kind: rec[1].to_string(),
            capacity: num(&rec[2])?,
            method: rec[3].to_string(),
            bound: num(&rec[4])?,
            slack: num(&rec[5])?,
            verdict: Verdict::parse(&rec[6]).ok_or_else(|| HarnessError::Invalid(format!("bad verdict `{}`", &rec[6])))?,
            h: num(&rec[7])?,
            runtime: num(&rec[8])?.unwrap_or(0.0),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut r = Report::new("ball", Kind::Thm31, "id = \"ball\"");
        r.capacity = Some(4.0 * std::f64::consts::PI);
        r.bound = Some(4.0 * std::f64::consts::PI * (1.0 - 1e-9));
        r.slack = Some(r.capacity.unwrap() - r.bound.unwrap());
        r.verdict = Verdict::Equality;
        r.method = "grid-energy".into();
        let mut buf = Vec::new();
        emit_csv(&[r.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 1);
        let printed = format_number(r.slack.unwrap());
        assert_eq!(format_number(rows[0].slack.unwrap()), printed);
        assert_eq!(rows[0].slack.unwrap(), printed.parse::<f64>().unwrap());
        assert_eq!(rows[0].verdict, Verdict::Equality);
        assert_eq!(rows[0].h, None);
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359e0");
        assert_eq!(format_number(-0.000123456789012345), "-1.23456789012e-4");
    }
}
