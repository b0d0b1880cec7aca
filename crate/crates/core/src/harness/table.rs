//! In-memory CSV tables with a fixed header.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value bit for bit. Undefined values are written as empty
//! cells; each such column is paired with an explicit validity flag by the
//! experiment that produces it. Metadata goes in leading `# key: value` lines.

use std::fmt;
use std::io::{self, Read, Write};
use std::path::Path;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Real)
    }

    pub fn flag(b: bool) -> Cell {
        Cell::Int(b as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Real(v) => f.write_str(&format_real(*v)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl fmt::Display) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    /// Panics on a row of the wrong width; schemas are fixed at compile time.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width does not match header {:?}",
            self.header
        );
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = io::BufWriter::new(out);
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        buf
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }
}

/// A parsed CSV file with string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvData {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvData {
    pub fn parse(text: &str) -> io::Result<Self> {
        let mut metadata = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix("# ") else { break };
            let rest = rest.trim_end_matches('\n');
            let (k, v) = rest.split_once(": ").unwrap_or((rest, ""));
            metadata.push((k.to_string(), v.to_string()));
            body_start += line.len();
        }
        let mut r = csv::ReaderBuilder::new().from_reader(&text.as_bytes()[body_start..]);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { metadata, header, rows })
    }

    pub fn read<R: Read>(mut input: R) -> io::Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Value of `name` in `row`; `None` for a missing cell or unknown column.
    pub fn get<'a>(&'a self, row: &'a [String], name: &str) -> Option<&'a str> {
        let i = self.column_index(name)?;
        row.get(i).map(String::as_str).filter(|s| !s.is_empty())
    }

    pub fn real(&self, row: &[String], name: &str) -> Option<f64> {
        self.get(row, name).and_then(|s| s.parse().ok())
    }

    pub fn column_reals(&self, name: &str) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| self.real(r, name)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let mut t = CsvTable::new(&["a", "b", "c"]);
        t.meta("experiment", "x");
        t.push(vec![Cell::Real(0.1), Cell::Missing, "z".into()]);
        let text = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(text, "# experiment: x\na,b,c\n1.0000000000000001e-1,,z\n");
        let back = CsvData::parse(&text).unwrap();
        assert_eq!(back.meta("experiment"), Some("x"));
        assert_eq!(back.real(&back.rows[0], "a"), Some(0.1));
        assert_eq!(back.get(&back.rows[0], "b"), None);
    }

    #[test]
    #[should_panic]
    fn width_is_enforced() {
        CsvTable::new(&["a"]).push(vec![Cell::Int(1), Cell::Int(2)]);
    }

    proptest! {
        #[test]
        fn floats_round_trip_bitwise(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let mut t = CsvTable::new(&["v"]);
            t.push(vec![Cell::Real(v)]);
            let back = CsvData::parse(std::str::from_utf8(&t.to_bytes()).unwrap()).unwrap();
            let w = back.real(&back.rows[0], "v").unwrap();
            prop_assert_eq!(w.to_bits(), v.to_bits());
        }
    }
}
