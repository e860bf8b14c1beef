use std::path::Path;

use crate::{Error, Result};

/// A CSV with a header row: numeric feature columns, an optional response
/// column and an optional id column carried through untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub response: Option<Vec<f64>>,
    pub ids: Option<Vec<String>>,
}

fn parse_cell(cell: &str, line: usize, column: &str) -> Result<f64> {
    cell.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}, column '{column}': '{cell}' is not a number")))
}

impl Dataset {
    pub fn load(path: &Path, response: Option<&str>, id: Option<&str>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let find = |name: &str| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("column '{name}' not found in {}", path.display())))
        };
        let response_col = response.map(find).transpose()?;
        let id_col = id.map(find).transpose()?;
        let feature_cols: Vec<usize> = (0..header.len()).filter(|c| Some(*c) != response_col && Some(*c) != id_col).collect();

        let mut rows = Vec::new();
        let mut resp = Vec::new();
        let mut ids = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record?;
            let line = k + 2;
            if record.len() != header.len() {
                return Err(Error::Parse(format!("line {line}: expected {} fields, found {}", header.len(), record.len())));
            }
            rows.push(
                feature_cols
                    .iter()
                    .map(|&c| parse_cell(&record[c], line, &header[c]))
                    .collect::<Result<Vec<_>>>()?,
            );
            if let Some(c) = response_col {
                resp.push(parse_cell(&record[c], line, &header[c])?);
            }
            if let Some(c) = id_col {
                ids.push(record[c].to_string());
            }
        }
        if rows.is_empty() {
            return Err(Error::Parse(format!("{} has no data rows", path.display())));
        }
        Ok(Self {
            feature_names: feature_cols.iter().map(|&c| header[c].clone()).collect(),
            rows,
            response: response_col.map(|_| resp),
            ids: id_col.map(|_| ids),
        })
    }

    /// Rows restricted to `names`, in that order.
    pub fn select(&self, names: &[String]) -> Result<Vec<Vec<f64>>> {
        let cols = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::Parse(format!("schema mismatch: model feature '{n}' missing from data")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect())
    }
}
