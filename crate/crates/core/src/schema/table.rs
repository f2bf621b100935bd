use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use super::dictionary::{ColumnKind, DataDictionary, DateFormat};
use crate::error::{Error, Result};

/// Schema-described table. Cells are stored in dictionary column order;
/// `None` is a missing cell. Integer cells are canonical decimal strings
/// and date cells are ISO `YYYY-MM-DD`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    dictionary: DataDictionary,
    rows: Vec<Vec<Option<String>>>,
}

/// True for the literal missing markers: empty string or `NA` in any case.
pub fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na")
}

impl RawTable {
    /// Builds a table from rows already in dictionary column order. Only
    /// the arity is checked here; use [`validate`] for cell contents.
    pub fn new(dictionary: DataDictionary, rows: Vec<Vec<Option<String>>>) -> Result<Self> {
        let width = dictionary.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                return Err(Error::RowArity {
                    line: i as u64 + 2,
                    expected: width,
                    found: r.len(),
                });
            }
        }
        Ok(Self { dictionary, rows })
    }

    pub fn dictionary(&self) -> &DataDictionary {
        &self.dictionary
    }

    pub fn rows(&self) -> &[Vec<Option<String>>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cell(&self, row: usize, column: &str) -> Option<&str> {
        let c = self.dictionary.index_of(column)?;
        self.rows[row][c].as_deref()
    }

    /// Keeps rows whose value in `column` is one of `keep`. Missing cells
    /// never match.
    pub fn filter_rows(&self, column: &str, keep: &[String]) -> Result<RawTable> {
        let c = self
            .dictionary
            .index_of(column)
            .ok_or_else(|| Error::UnknownVariable(column.to_string()))?;
        let keep: HashSet<&str> = keep.iter().map(String::as_str).collect();
        let rows: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r[c].as_deref().is_some_and(|v| keep.contains(v)))
            .cloned()
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyResult(format!(
                "no rows left after filtering {column:?}"
            )));
        }
        Ok(RawTable {
            dictionary: self.dictionary.clone(),
            rows,
        })
    }

    /// Writes the table as CSV with the dictionary's column order. Dates are
    /// rendered in each column's declared layout so the output parses back
    /// to an identical table.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let cols = self.dictionary.columns();
        w.write_record(cols.iter().map(|c| c.name.as_str()))
            .expect("write to Vec");
        for row in &self.rows {
            let rendered: Vec<String> = row
                .iter()
                .zip(cols)
                .map(|(cell, col)| match cell {
                    None => String::new(),
                    Some(v) if col.kind == ColumnKind::Date => col
                        .effective_date_format()
                        .render_iso(v)
                        .unwrap_or_else(|| v.clone()),
                    Some(v) => v.clone(),
                })
                .collect();
            w.write_record(&rendered).expect("write to Vec");
        }
        String::from_utf8(w.into_inner().expect("flush Vec")).expect("utf-8 cells")
    }
}

/// Reads a CSV registry described by `dict`.
pub fn parse_csv(path: impl AsRef<Path>, dict: &DataDictionary) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv_reader(file, dict)
}

pub fn parse_csv_reader<R: Read>(reader: R, dict: &DataDictionary) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => {
            return Err(Error::Csv {
                line: 1,
                message: "file is empty; a header line is required".into(),
            })
        }
        Some(r) => r.map_err(csv_error)?,
    };
    let mut header_names = Vec::with_capacity(header.len());
    for (i, h) in header.iter().enumerate() {
        let h = if i == 0 { h.trim_start_matches('\u{feff}') } else { h };
        header_names.push(h.trim().to_string());
    }

    // slot[file column] = dictionary column index
    let mut slot = Vec::with_capacity(header_names.len());
    let mut seen = HashSet::new();
    for name in &header_names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateHeader(name.clone()));
        }
        match dict.index_of(name) {
            Some(i) => slot.push(i),
            None => return Err(Error::ExtraColumn(name.clone())),
        }
    }
    if let Some(missing) = dict
        .columns()
        .iter()
        .find(|c| !seen.contains(c.name.as_str()))
    {
        return Err(Error::MissingColumn(missing.name.clone()));
    }

    let cols = dict.columns();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != slot.len() {
            return Err(Error::RowArity {
                line,
                expected: slot.len(),
                found: rec.len(),
            });
        }
        let mut row: Vec<Option<String>> = vec![None; cols.len()];
        for (field, &ci) in rec.iter().zip(&slot) {
            if is_missing(field) {
                continue;
            }
            let col = &cols[ci];
            let bad = |reason: &str| Error::BadCell {
                line,
                column: col.name.clone(),
                value: field.to_string(),
                reason: reason.to_string(),
            };
            let value = match col.kind {
                ColumnKind::Integer => field
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| bad("not an integer"))?
                    .to_string(),
                ColumnKind::Date => {
                    let fmt = col.effective_date_format();
                    fmt.parse_date(field)
                        .ok_or_else(|| bad(&format!("not a {} date", fmt.name())))?
                        .format("%Y-%m-%d")
                        .to_string()
                }
                ColumnKind::Categorical | ColumnKind::Identifier => field.to_string(),
            };
            row[ci] = Some(value);
        }
        rows.push(row);
    }
    Ok(RawTable {
        dictionary: dict.clone(),
        rows,
    })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Csv {
        line,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationIssue {
    /// 1-based data row.
    pub row: usize,
    pub column: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks every non-missing cell against its column kind, allowed labels
/// and integer bounds. Issues come out sorted by (row, column position).
pub fn validate(raw: &RawTable) -> ValidationReport {
    let cols = raw.dictionary().columns();
    let mut issues = Vec::new();
    for (r, row) in raw.rows().iter().enumerate() {
        for (col, cell) in cols.iter().zip(row) {
            let Some(v) = cell else { continue };
            let mut push = |message: String| {
                issues.push(ValidationIssue {
                    row: r + 1,
                    column: col.name.clone(),
                    message,
                })
            };
            match col.kind {
                ColumnKind::Categorical => {
                    if let Some(allowed) = &col.allowed_values {
                        if !allowed.iter().any(|a| a == v) {
                            push(format!("{v:?} is not an allowed value"));
                        }
                    }
                }
                ColumnKind::Integer => match v.trim().parse::<i64>() {
                    Err(_) => push(format!("{v:?} is not an integer")),
                    Ok(x) => {
                        let below = col.min.is_some_and(|lo| x < lo);
                        let above = col.max.is_some_and(|hi| x > hi);
                        if below || above {
                            let lo = col.min.map_or("-inf".into(), |v| v.to_string());
                            let hi = col.max.map_or("+inf".into(), |v| v.to_string());
                            push(format!("{x} outside [{lo}, {hi}]"));
                        }
                    }
                },
                ColumnKind::Date => {
                    if DateFormat::Iso.parse_date(v).is_none() {
                        push(format!("{v:?} is not a valid date"));
                    }
                }
                ColumnKind::Identifier => {}
            }
        }
    }
    ValidationReport { issues }
}
