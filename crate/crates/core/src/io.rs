//! CSV ingestion and numeric output formatting.
//!
//! Input tables have a header row; the first column holds row identifiers,
//! an optional column named `group` holds group labels, and every other
//! column is a part. Empty cells are rejected.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::compmat::{CompositionMatrix, RawCountMatrix};
use crate::error::{CodaError, Result};

/// Name of the optional group-label column.
pub const GROUP_COLUMN: &str = "group";

#[derive(Debug, Clone)]
pub struct Table {
    pub row_ids: Vec<String>,
    pub part_names: Vec<String>,
    pub values: DMatrix<f64>,
    pub groups: Option<Vec<String>>,
}

impl Table {
    pub fn into_raw(self) -> Result<RawCountMatrix> {
        RawCountMatrix::new(self.values, self.part_names, self.row_ids, self.groups)
    }

    /// Closes the rows (a no-op up to rounding for already closed input).
    pub fn into_composition(self) -> Result<CompositionMatrix> {
        Ok(self.into_raw()?.close())
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> CodaError {
    CodaError::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path)?;
    read_table_from(file)
}

pub fn read_table_from<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.len() < 3 {
        return Err(parse_err(1, "need an identifier column and at least two parts"));
    }
    let group_col = header.iter().position(|h| h == GROUP_COLUMN);
    if group_col == Some(0) {
        return Err(parse_err(1, "the first column must hold row identifiers"));
    }
    let part_cols: Vec<usize> = (1..header.len()).filter(|&j| Some(j) != group_col).collect();
    let part_names: Vec<String> = part_cols.iter().map(|&j| header[j].to_string()).collect();
    if let Some(j) = part_names.iter().position(|p| p.is_empty()) {
        return Err(parse_err(1, format!("part name in column {} is empty", part_cols[j] + 1)));
    }
    let mut row_ids = Vec::new();
    let mut groups = group_col.map(|_| Vec::new());
    let mut flat: Vec<f64> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        if rec[0].is_empty() {
            return Err(parse_err(line, "empty row identifier"));
        }
        row_ids.push(rec[0].to_string());
        if let (Some(g), Some(gs)) = (group_col, groups.as_mut()) {
            if rec[g].is_empty() {
                return Err(parse_err(line, "empty group label"));
            }
            gs.push(rec[g].to_string());
        }
        for (k, &j) in part_cols.iter().enumerate() {
            let cell = &rec[j];
            if cell.is_empty() {
                return Err(parse_err(line, format!("empty cell for part '{}'", part_names[k])));
            }
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(line, format!("'{cell}' is not a number (part '{}')", part_names[k]))
            })?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value for part '{}'", part_names[k])));
            }
            flat.push(v);
        }
    }
    if row_ids.is_empty() {
        return Err(parse_err(2, "no data rows"));
    }
    let values = DMatrix::from_row_slice(row_ids.len(), part_cols.len(), &flat);
    Ok(Table {
        row_ids,
        part_names,
        values,
        groups,
    })
}

/// Formats a number rounded to 10 significant digits, in the shortest form
/// that reads back as the rounded value.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    let exp = rounded.abs().log10().floor() as i32;
    if (-6..=15).contains(&exp) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Writes a CSV with a header row.
pub fn write_csv<W: Write>(out: W, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CodaError::Io(std::io::Error::other(e.to_string()));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a labelled numeric matrix: first column `corner` with row labels.
pub fn write_matrix<W: Write>(
    out: W,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    m: &DMatrix<f64>,
) -> Result<()> {
    let mut header = vec![corner.to_string()];
    header.extend(col_labels.iter().cloned());
    let rows: Vec<Vec<String>> = (0..m.nrows())
        .map(|i| {
            let mut r = vec![row_labels[i].clone()];
            r.extend((0..m.ncols()).map(|j| fmt_num(m[(i, j)])));
            r
        })
        .collect();
    write_csv(out, &header, &rows)
}
