use std::io::Write;

use crate::discrete::Trajectory;
use crate::error::{Error, Result};
use crate::numerics::Vector;

/// 17 significant digits, enough to reproduce any `f64` exactly.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Columns written after `k` and `t`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryColumns {
    pub names: Vec<String>,
    /// Additional per-point series such as `Ld` or `V`; `None` leaves the
    /// cell empty where the quantity is undefined.
    pub extras: Vec<(String, Vec<Option<f64>>)>,
}

impl TrajectoryColumns {
    pub fn new(names: &[String]) -> Self {
        Self { names: names.to_vec(), extras: Vec::new() }
    }

    pub fn with_extra(mut self, name: &str, values: Vec<Option<f64>>) -> Self {
        self.extras.push((name.to_string(), values));
        self
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Csv { line, message: e.to_string() }
}

/// Writes `# `-prefixed `preamble` lines, the header
/// `k,t,<names>[,<extras>]`, one row per point and then the `trailer`
/// comment lines.
pub fn write_trajectory<W: Write>(
    out: &mut W,
    traj: &Trajectory,
    cols: &TrajectoryColumns,
    preamble: &[String],
    trailer: &[String],
) -> Result<()> {
    let dim = traj.points.first().map_or(cols.names.len(), |p| p.len());
    if cols.names.len() != dim {
        return Err(Error::DimensionMismatch(format!("{} column names for dimension {dim}", cols.names.len())));
    }
    if let Some((name, _)) = cols.extras.iter().find(|(_, v)| v.len() != traj.len()) {
        return Err(Error::DimensionMismatch(format!("column `{name}` does not have one value per point")));
    }
    for line in preamble {
        writeln!(out, "# {line}")?;
    }
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut *out);
        let mut header = vec!["k".to_string(), "t".to_string()];
        header.extend(cols.names.iter().cloned());
        header.extend(cols.extras.iter().map(|(n, _)| n.clone()));
        w.write_record(&header).map_err(csv_error)?;
        for (k, p) in traj.points.iter().enumerate() {
            let mut row = vec![k.to_string(), format_real(traj.time(k))];
            row.extend(p.iter().map(|x| format_real(*x)));
            row.extend(cols.extras.iter().map(|(_, v)| v[k].map(format_real).unwrap_or_default()));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
    }
    for line in trailer {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}

/// A parsed trajectory file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    /// Cells by row; empty cells are `None`.
    pub rows: Vec<Vec<Option<f64>>>,
    /// Comment lines without the leading `#` and one following space.
    pub comments: Vec<String>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Configuration points from the `dim` columns following `k,t`.
    pub fn points(&self, dim: usize) -> Result<Vec<Vector>> {
        if self.header.len() < 2 + dim {
            return Err(Error::Csv { line: 1, message: format!("fewer than {dim} coordinate columns") });
        }
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[2..2 + dim]
                    .iter()
                    .map(|c| c.ok_or_else(|| Error::Csv { line: i + 2, message: "empty coordinate".into() }))
                    .collect::<Result<Vec<f64>>>()
                    .map(Vector::from_vec)
            })
            .collect()
    }
}

/// Parses the output of [`write_trajectory`].
pub fn read_table(text: &str) -> Result<Table> {
    let comments = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|l| l.strip_prefix(' ').unwrap_or(l).to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header.len() < 2 || header[0] != "k" || header[1] != "t" {
        return Err(Error::Csv { line: 1, message: "header must start with `k,t`".into() });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|cell| {
                let cell = cell.trim();
                if cell.is_empty() {
                    return Ok(None);
                }
                cell.parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Csv { line, message: format!("`{cell}` is not a number") })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows, comments })
}
