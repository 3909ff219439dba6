use std::fmt;
use std::io::Write;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    Numeric,
    Analytic,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Numeric => "numeric",
            Provenance::Analytic => "analytic",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub axis_value: f64,
    pub observable: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub provenance: Provenance,
}

/// Scenario output: one row per (axis point, observable, provenance).
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub axis: String,
    pub rows: Vec<Row>,
    /// `key = value` lines written as `#` metadata before the config.
    pub metadata: Vec<(String, String)>,
    /// Resolved config text, written line by line as `#` metadata.
    pub config: String,
}

pub const CSV_HEADER: [&str; 6] = [
    "axis",
    "axis_value",
    "observable",
    "value",
    "std_error",
    "provenance",
];

/// 17 significant digits.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultTable {
    pub fn new(axis: impl Into<String>) -> Self {
        ResultTable {
            axis: axis.into(),
            rows: Vec::new(),
            metadata: Vec::new(),
            config: String::new(),
        }
    }

    pub fn push(&mut self, axis_value: f64, observable: impl Into<String>, value: f64, provenance: Provenance) {
        self.rows.push(Row {
            axis_value,
            observable: observable.into(),
            value,
            std_error: None,
            provenance,
        });
    }

    pub fn push_with_error(
        &mut self,
        axis_value: f64,
        observable: impl Into<String>,
        value: f64,
        std_error: f64,
        provenance: Provenance,
    ) {
        self.rows.push(Row {
            axis_value,
            observable: observable.into(),
            value,
            std_error: Some(std_error),
            provenance,
        });
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    /// Rows of one observable and provenance, in table order.
    pub fn series(&self, observable: &str, provenance: Provenance) -> Vec<&Row> {
        self.rows
            .iter()
            .filter(|r| r.observable == observable && r.provenance == provenance)
            .collect()
    }

    /// Checks that every number is finite and that no (axis point,
    /// observable, provenance) appears twice.
    pub fn check(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.rows {
            let finite = r.axis_value.is_finite() && r.value.is_finite() && r.std_error.is_none_or(f64::is_finite);
            if !finite {
                return Err(Error::param(
                    "table",
                    format!("non-finite entry for {} at {} = {}", r.observable, self.axis, r.axis_value),
                ));
            }
            if !seen.insert((r.axis_value.to_bits(), r.observable.as_str(), r.provenance)) {
                return Err(Error::param(
                    "table",
                    format!("duplicate row for {} at {} = {}", r.observable, self.axis, r.axis_value),
                ));
            }
        }
        Ok(())
    }

    /// Writes the metadata block and rows in the CSV dialect.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "# --- config ---")?;
        for line in self.config.lines() {
            if line.is_empty() {
                writeln!(out, "#")?;
            } else {
                writeln!(out, "# {line}")?;
            }
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                self.axis.clone(),
                float(r.axis_value),
                r.observable.clone(),
                float(r.value),
                r.std_error.map(float).unwrap_or_default(),
                r.provenance.label().to_string(),
            ])?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

/// Extracts the config text from the metadata block of a CSV file.
pub fn config_from_csv(text: &str) -> Option<String> {
    let mut lines = text.lines().take_while(|l| l.starts_with('#'));
    lines.find(|l| *l == "# --- config ---")?;
    let mut out = String::new();
    for l in lines {
        let body = l.strip_prefix("# ").unwrap_or(l.strip_prefix('#').unwrap_or(l));
        out.push_str(body);
        out.push('\n');
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let mut t = ResultTable::new("Omega_c");
        t.meta("scenario", "fig-parabola");
        t.config = "[scenario]\nname = fig-parabola\n\n[solver]\ncutoffs = 6\n".into();
        t.push(0.5, "n_ss", 1.0 / 3.0, Provenance::Analytic);
        t.push_with_error(0.5, "n_ss", 0.1, 0.01, Provenance::Numeric);
        t
    }

    #[test]
    fn csv_layout() {
        let s = table().to_csv_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# scenario = fig-parabola");
        assert!(lines.contains(&"axis,axis_value,observable,value,std_error,provenance"));
        assert!(lines.contains(&"Omega_c,5.0000000000000000e-1,n_ss,3.3333333333333331e-1,,analytic"));
        assert!(s.ends_with("numeric\n"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn floats_round_trip() {
        for x in [1.0 / 3.0, 9.783e-7, -2.5e300, 5e-324] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn config_block_round_trips() {
        let t = table();
        assert_eq!(config_from_csv(&t.to_csv_string()).unwrap(), t.config);
    }

    #[test]
    fn check_rejects_duplicates_and_nan() {
        let mut t = table();
        t.check().unwrap();
        t.push(0.5, "n_ss", 0.2, Provenance::Analytic);
        assert!(t.check().is_err());
        let mut t = table();
        t.push(0.6, "n_ss", f64::NAN, Provenance::Analytic);
        assert!(t.check().is_err());
    }
}
