use serde_json::{json, Value};

use crate::Format;

/// First line of every CSV report.
pub const VERSION_HEADER: &str = concat!("# pm ", env!("CARGO_PKG_VERSION"));

/// A rendered-on-demand report: a CSV table (plus optional trailing
/// summary lines) and the equivalent JSON document.
pub(crate) struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
    pub json: Value,
}

impl Report {
    pub fn new(header: Vec<&'static str>, json: Value) -> Self {
        Report {
            header,
            rows: Vec::new(),
            summary: Vec::new(),
            json,
        }
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let mut doc = json!({ "version": env!("CARGO_PKG_VERSION") });
                if let (Value::Object(dst), Value::Object(src)) = (&mut doc, &self.json) {
                    dst.extend(src.clone());
                }
                Ok(serde_json::to_string_pretty(&doc)? + "\n")
            }
        }
    }

    fn csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let body = String::from_utf8(w.into_inner()?)?;
        let mut out = format!("{VERSION_HEADER}\n{body}");
        for line in &self.summary {
            out.push_str(line);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Shortest round-trip rendering, so printed values parse back exactly.
/// Very small or large magnitudes use exponent form; negative zero prints
/// as `0`.
pub(crate) fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.abs() < 1e-4 || x.abs() >= 1e15 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
