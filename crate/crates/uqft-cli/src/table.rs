//! Result tables and their CSV and JSON encodings.

use std::io::Write;

use serde_json::{json, Value};

use crate::scenario::Format;

/// A column name with its unit; text columns carry no unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: Option<String>,
}

impl Column {
    pub fn num(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: Some(unit.into()),
        }
    }

    pub fn text(name: &str) -> Self {
        Self {
            name: name.into(),
            unit: None,
        }
    }

    fn header(&self) -> String {
        match &self.unit {
            Some(u) => format!("{} [{u}]", self.name),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        }
    } else if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if (1e-4..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Where an output came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub kind: String,
    pub scenario_sha256: Option<String>,
    pub units: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Deterministic remarks written as header comments.
    pub notes: Vec<String>,
    /// Run-dependent remarks such as timings, kept on their own comment lines.
    pub timings: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(
        &self,
        prov: &Provenance,
        format: Format,
        out: &mut dyn Write,
    ) -> anyhow::Result<()> {
        match format {
            Format::Csv => self.write_csv(prov, out),
            Format::Json => self.write_json(prov, out),
        }
    }

    fn write_csv(&self, prov: &Provenance, out: &mut dyn Write) -> anyhow::Result<()> {
        writeln!(out, "# uqft {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# kind: {}", prov.kind)?;
        writeln!(
            out,
            "# scenario sha256: {}",
            prov.scenario_sha256.as_deref().unwrap_or("none")
        )?;
        writeln!(out, "# units: {}", prov.units)?;
        for n in &self.notes {
            writeln!(out, "# note: {n}")?;
        }
        for t in &self.timings {
            writeln!(out, "# timing: {t}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(Column::header))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, prov: &Provenance, out: &mut dyn Write) -> anyhow::Result<()> {
        let doc = json!({
            "provenance": {
                "version": env!("CARGO_PKG_VERSION"),
                "kind": prov.kind,
                "scenario_sha256": prov.scenario_sha256,
                "units": prov.units,
            },
            "notes": self.notes,
            "timings": self.timings,
            "columns": self.columns.iter().map(|c| json!({"name": c.name, "unit": c.unit})).collect::<Vec<_>>(),
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prov() -> Provenance {
        Provenance {
            kind: "orbit".into(),
            scenario_sha256: None,
            units: "natural".into(),
        }
    }

    #[test]
    fn csv_has_comments_header_and_quoting() {
        let mut t = Table::new(vec![Column::num("x", "λ_c"), Column::text("flags")]);
        t.push(vec![1.5.into(), "a, b".into()]);
        t.notes.push("hello".into());
        let mut buf = Vec::new();
        t.write(&prov(), Format::Csv, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# uqft "));
        assert_eq!(lines[4], "# note: hello");
        assert_eq!(lines[5], "x [λ_c],flags");
        assert_eq!(lines[6], "1.5,\"a, b\"");
    }

    #[test]
    fn json_maps_non_finite_to_null() {
        let mut t = Table::new(vec![Column::num("x", "1")]);
        t.push(vec![f64::NAN.into()]);
        let mut buf = Vec::new();
        t.write(&prov(), Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert!(v["rows"][0][0].is_null());
        assert_eq!(v["columns"][0]["unit"], "1");
    }

    #[test]
    fn special_values() {
        assert_eq!(format_f64(0.0), "0");
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(1.23314e-54), "1.23314e-54");
        assert_eq!(format_f64(0.25), "0.25");
    }

    proptest! {
        #[test]
        fn floats_round_trip(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = format_f64(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
