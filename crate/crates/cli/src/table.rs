//! Deterministic table emission: CSV with '#'-prefixed header lines and
//! 17-significant-digit floats (round-trip exact), or the same content as
//! a single JSON object. Identical inputs produce byte-identical output.

use std::io::Write;

use crate::config::CliError;

/// One field of a row.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

/// 17 significant digits; enough to reconstruct the exact double.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    /// Ordered key/value header block (provenance echo).
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str) -> Self {
        let mut t = Table::default();
        t.kv("version", env!("CARGO_PKG_VERSION"));
        t.kv("command", command);
        t
    }

    pub fn kv(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn kv_f(&mut self, key: &str, value: f64) {
        self.header.push((key.to_string(), fmt_f(value)));
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.columns = names.iter().map(|s| s.to_string()).collect();
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.header {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "# columns: {}", self.columns.join(","))?;
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_f(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write + ?Sized>(&self, w: &mut W) -> std::io::Result<()> {
        let header: serde_json::Map<String, serde_json::Value> = self
            .header
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        // NaN has no JSON encoding; null marks "not available".
                        Cell::Num(v) if v.is_nan() => serde_json::Value::Null,
                        Cell::Num(v) => serde_json::json!(v),
                        Cell::Int(v) => serde_json::json!(v),
                        Cell::Text(s) => serde_json::json!(s),
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({
            "header": header,
            "columns": self.columns,
            "rows": rows,
        });
        writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)
    }

    /// Writes to the path (or stdout when `out` is None) in the requested
    /// format.
    pub fn emit(&self, out: Option<&std::path::Path>, json: bool) -> Result<(), CliError> {
        let write_to = |w: &mut dyn Write| {
            if json {
                self.write_json(w)
            } else {
                self.write_csv(w)
            }
        };
        match out {
            Some(path) => {
                let mut f = std::fs::File::create(path)
                    .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))?;
                write_to(&mut f)
                    .map_err(|e| CliError::Numeric(format!("write to {} failed: {e}", path.display())))
            }
            None => {
                let stdout = std::io::stdout();
                write_to(&mut stdout.lock())
                    .map_err(|e| CliError::Numeric(format!("write to stdout failed: {e}")))
            }
        }
    }
}

/// `steps + 1` evenly spaced points over [lo, hi].
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps.max(1) as f64)
        .collect()
}
