//! Tables of numbers in CSV or JSON, with a metadata block.
//!
//! CSV files start with `# key: value` lines, then a header row. Floats are
//! written with 17 significant digits so that every `f64` reads back exactly.
//! JSON files are objects `{"schema": 1, "meta": {..}, "columns": [..], "rows": [[..]]}`;
//! non-finite floats are stored as the strings `"inf"`, `"-inf"` and `"NaN"`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};

pub const SCHEMA: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Cell::Int(i) => Some(*i),
            _ => None,
        }
    }

    fn parse(s: &str) -> Cell {
        if let Ok(i) = i64::from_str(s) {
            Cell::Int(i)
        } else if let Ok(x) = f64::from_str(s) {
            Cell::Float(x)
        } else {
            Cell::Text(s.to_string())
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => json!(x.to_string()),
            Cell::Text(s) => json!(s),
        }
    }

    fn from_json(v: &Value) -> Option<Cell> {
        Some(match v {
            Value::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Cell::Int(i),
                _ => Cell::Float(n.as_f64()?),
            },
            Value::String(s) => match s.as_str() {
                "inf" | "-inf" | "NaN" => Cell::Float(f64::from_str(s).ok()?),
                _ => Cell::Text(s.clone()),
            },
            _ => return None,
        })
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) if x.is_finite() => write!(f, "{x:.16e}"),
            Cell::Float(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Source line of each row, when read from CSV.
    pub lines: Vec<u64>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize, IoError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| IoError::Format(format!("missing column `{name}`")))
    }

    fn line(&self, row: usize) -> u64 {
        self.lines.get(row).copied().unwrap_or(row as u64 + 1)
    }

    /// Numeric column; a non-numeric entry is reported with its line.
    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>, IoError> {
        let c = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[c].as_f64().ok_or_else(|| IoError::Parse {
                    line: self.line(r),
                    message: format!("`{}` in column `{name}` is not a number", row[c]),
                })
            })
            .collect()
    }

    pub fn int_column(&self, name: &str) -> Result<Vec<i64>, IoError> {
        let c = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[c].as_i64().ok_or_else(|| IoError::Parse {
                    line: self.line(r),
                    message: format!("`{}` in column `{name}` is not an integer", row[c]),
                })
            })
            .collect()
    }

    /// Row indices grouped by the integer column `key`, in order of first appearance.
    pub fn group_by(&self, key: &str) -> Result<Vec<(i64, Vec<usize>)>, IoError> {
        let keys = self.int_column(key)?;
        let mut out: Vec<(i64, Vec<usize>)> = Vec::new();
        let mut index: BTreeMap<i64, usize> = BTreeMap::new();
        for (r, k) in keys.into_iter().enumerate() {
            match index.get(&k) {
                Some(&g) => out[g].1.push(r),
                None => {
                    index.insert(k, out.len());
                    out.push((k, vec![r]));
                }
            }
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("writing to memory");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input"));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, IoError> {
        let mut meta = BTreeMap::new();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else { break };
            if let Some((k, v)) = rest.split_once(':') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let columns: Vec<String> = r
            .headers()
            .map_err(csv_error)?
            .iter()
            .map(str::to_string)
            .collect();
        if columns.is_empty() || columns.iter().all(String::is_empty) {
            return Err(IoError::Format("missing header row".into()));
        }
        let mut table = Table {
            meta,
            columns,
            ..Table::default()
        };
        for rec in r.records() {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map_or(0, |p| p.line());
            table.rows.push(rec.iter().map(Cell::parse).collect());
            table.lines.push(line);
        }
        Ok(table)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "meta": self.meta,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let v: Value = serde_json::from_str(text).map_err(|e| IoError::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        let schema = v.get("schema").and_then(Value::as_u64);
        if schema != Some(SCHEMA) {
            return Err(IoError::Format(format!("unsupported schema {schema:?}")));
        }
        let meta = v
            .get("meta")
            .and_then(Value::as_object)
            .map(|m| {
                m.iter()
                    .map(|(k, v)| (k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_string)))
                    .collect()
            })
            .unwrap_or_default();
        let columns: Vec<String> = v
            .get("columns")
            .and_then(Value::as_array)
            .ok_or_else(|| IoError::Format("missing `columns`".into()))?
            .iter()
            .map(|c| c.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| IoError::Format("column names must be strings".into()))?;
        let mut rows = Vec::new();
        for (i, row) in v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| IoError::Format("missing `rows`".into()))?
            .iter()
            .enumerate()
        {
            let cells = row
                .as_array()
                .filter(|r| r.len() == columns.len())
                .and_then(|r| r.iter().map(Cell::from_json).collect::<Option<Vec<_>>>())
                .ok_or_else(|| IoError::Format(format!("row {i} is malformed")))?;
            rows.push(cells);
        }
        Ok(Table {
            meta,
            columns,
            rows,
            lines: Vec::new(),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
                s.push('\n');
                s
            }
        }
    }

    pub fn parse(text: &str, format: Format) -> Result<Self, IoError> {
        match format {
            Format::Csv => Self::from_csv(text),
            Format::Json => Self::from_json(text),
        }
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|source| IoError::File {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, Format::from_path(path))
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn write(&self, path: Option<&Path>, format: Format) -> Result<(), IoError> {
        let text = self.render(format);
        match path {
            Some(p) => fs::write(p, text).map_err(|source| IoError::File {
                path: p.display().to_string(),
                source,
            }),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| IoError::File {
                    path: "<stdout>".into(),
                    source,
                }),
        }
    }
}

fn csv_error(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    IoError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Equal-width histogram over the range of the data.
pub fn histogram(values: &[f64], bins: usize) -> Result<Table, IoError> {
    let (lo, hi) = range(values)?;
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        counts[bin_of(v, lo, width, bins)] += 1;
    }
    let mut t = Table::new(&["bin_lo", "bin_hi", "count"]);
    for (b, &c) in counts.iter().enumerate() {
        let a = lo + b as f64 * width;
        let e = if b + 1 == bins { hi } else { a + width };
        t.push(vec![a.into(), e.into(), c.into()]);
    }
    Ok(t)
}

/// Counts on a `bins × bins` grid of rectangular cells, reported at the cell
/// centres; empty cells are omitted.
pub fn grid_counts(xs: &[f64], ys: &[f64], bins: usize) -> Result<Table, IoError> {
    if xs.len() != ys.len() {
        return Err(IoError::Format("coordinate columns differ in length".into()));
    }
    let bins = bins.max(1);
    let (xlo, xhi) = range(xs)?;
    let (ylo, yhi) = range(ys)?;
    let (wx, wy) = ((xhi - xlo) / bins as f64, (yhi - ylo) / bins as f64);
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&x, &y) in xs.iter().zip(ys) {
        *counts.entry((bin_of(x, xlo, wx, bins), bin_of(y, ylo, wy, bins))).or_default() += 1;
    }
    let mut t = Table::new(&["x", "y", "count"]);
    for ((i, j), c) in counts {
        let x = xlo + (i as f64 + 0.5) * wx;
        let y = ylo + (j as f64 + 0.5) * wy;
        t.push(vec![x.into(), y.into(), c.into()]);
    }
    Ok(t)
}

fn range(values: &[f64]) -> Result<(f64, f64), IoError> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(IoError::Format("no finite values to bin".into()));
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) })
}

fn bin_of(v: f64, lo: f64, width: f64, bins: usize) -> usize {
    (((v - lo) / width) as usize).min(bins - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["rep", "idx", "re", "im", "class"]);
        t.meta.insert("seed".into(), "7".into());
        t.push(vec![0usize.into(), 0usize.into(), 0.1f64.into(), (1.0f64 / 3.0).into(), "pair".into()]);
        t.push(vec![0usize.into(), 1usize.into(), f64::NEG_INFINITY.into(), 1e-300.into(), "imag".into()]);
        t
    }

    fn without_lines(mut t: Table) -> Table {
        t.lines.clear();
        t
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let text = t.to_csv();
        assert!(text.starts_with("# seed: 7\nrep,idx,re,im,class\n"));
        assert_eq!(without_lines(Table::from_csv(&text).unwrap()), t);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let t = sample();
        let back = Table::from_json(&t.render(Format::Json)).unwrap();
        assert_eq!(back, t);
        let via_csv = Table::from_csv(&back.to_csv()).unwrap();
        assert_eq!(without_lines(via_csv), t);
    }

    #[test]
    fn arbitrary_floats_survive_both_formats() {
        let mut t = Table::new(&["x"]);
        let mut bits: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..2000 {
            bits = bits.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            let x = f64::from_bits(bits);
            if x.is_finite() {
                t.push(vec![x.into()]);
            }
        }
        let json = Table::from_json(&t.render(Format::Json)).unwrap();
        assert_eq!(json, t);
        assert_eq!(without_lines(Table::from_csv(&json.to_csv()).unwrap()), t);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# a: b\nrep,j,a\n0,0,1.5\n0,1\n";
        match Table::from_csv(text).unwrap_err() {
            IoError::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        let t = Table::from_csv("rep,j,a\n0,0,1.5\n0,1,x\n").unwrap();
        match t.f64_column("a").unwrap_err() {
            IoError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        assert!(Table::from_json("{\"schema\": 2}").is_err());
    }

    #[test]
    fn grouping_keeps_first_appearance_order() {
        let t = Table::from_csv("rep,j\n3,0\n1,0\n3,1\n").unwrap();
        assert_eq!(t.group_by("rep").unwrap(), vec![(3, vec![0, 2]), (1, vec![1])]);
    }

    #[test]
    fn histogram_counts_everything() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
        let h = histogram(&v, 100).unwrap();
        assert_eq!(h.rows.len(), 100);
        let total: i64 = h.int_column("count").unwrap().iter().sum();
        assert_eq!(total, 1000);
        let g = grid_counts(&v, &v, 10).unwrap();
        assert_eq!(g.rows.len(), 10);
    }
}
