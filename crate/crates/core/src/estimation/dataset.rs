use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Binary,
    Ordinal,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: ColumnKind,
}

/// Sidecar describing a CSV file: column types and the binary outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    pub columns: Vec<ColumnSchema>,
    pub outcome: String,
}

impl DatasetSchema {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Column-major table of numeric values with `None` for missing entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: DatasetSchema,
    columns: Vec<Vec<Option<f64>>>,
}

const MISSING: [&str; 5] = ["", "NA", "na", "NaN", "."];

impl Dataset {
    pub fn new(schema: DatasetSchema, columns: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if schema.columns.len() != columns.len() {
            return Err(Error::Usage(format!(
                "schema declares {} columns, got {}",
                schema.columns.len(),
                columns.len()
            )));
        }
        for (i, c) in schema.columns.iter().enumerate() {
            if schema.columns[..i].iter().any(|d| d.name == c.name) {
                return Err(Error::Usage(format!("duplicate column '{}'", c.name)));
            }
        }
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Usage("columns have different lengths".into()));
        }
        let outcome = schema
            .columns
            .iter()
            .find(|c| c.name == schema.outcome)
            .ok_or_else(|| Error::Usage(format!("outcome '{}' is not a column", schema.outcome)))?;
        if outcome.kind != ColumnKind::Binary {
            return Err(Error::Usage(format!("outcome '{}' must be declared binary", outcome.name)));
        }
        for (spec, col) in schema.columns.iter().zip(&columns) {
            if spec.kind == ColumnKind::Binary {
                if let Some(bad) = col.iter().flatten().find(|v| **v != 0.0 && **v != 1.0) {
                    return Err(Error::Usage(format!("binary column '{}' contains {bad}", spec.name)));
                }
            }
        }
        Ok(Self { schema, columns })
    }

    /// Builds a dataset from complete columns.
    pub fn from_columns(outcome: &str, cols: Vec<(&str, ColumnKind, Vec<f64>)>) -> Result<Self> {
        let schema = DatasetSchema {
            columns: cols.iter().map(|(n, k, _)| ColumnSchema { name: n.to_string(), kind: *k }).collect(),
            outcome: outcome.to_string(),
        };
        let columns = cols.into_iter().map(|(_, _, v)| v.into_iter().map(Some).collect()).collect();
        Self::new(schema, columns)
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn outcome(&self) -> &str {
        &self.schema.outcome
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.schema
            .columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::Usage(format!("no column named '{name}'")))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.position(name).is_ok()
    }

    pub fn column(&self, name: &str) -> Result<&[Option<f64>]> {
        Ok(&self.columns[self.position(name)?])
    }

    /// A column known to be complete (e.g. after [`Dataset::complete_cases`]).
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        self.column(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Estimation(format!("column '{name}' is missing at row {i}"))))
            .collect()
    }

    pub fn kind(&self, name: &str) -> Result<ColumnKind> {
        Ok(self.schema.columns[self.position(name)?].kind)
    }

    /// Listwise deletion: keeps rows complete on `names`, returning the number dropped.
    pub fn complete_cases<S: AsRef<str>>(&self, names: &[S]) -> Result<(Dataset, usize)> {
        let cols: Vec<usize> = names.iter().map(|n| self.position(n.as_ref())).collect::<Result<_>>()?;
        let keep: Vec<usize> =
            (0..self.n_rows()).filter(|&r| cols.iter().all(|&c| self.columns[c][r].is_some())).collect();
        let dropped = self.n_rows() - keep.len();
        Ok((self.take(&keep), dropped))
    }

    /// Rows at `rows`, in that order (repeats allowed).
    pub fn take(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&r| c[r]).collect()).collect(),
        }
    }

    pub fn with_column(mut self, name: &str, kind: ColumnKind, values: Vec<f64>) -> Result<Dataset> {
        if values.len() != self.n_rows() {
            return Err(Error::Usage(format!("column '{name}' has {} rows, expected {}", values.len(), self.n_rows())));
        }
        if let Ok(p) = self.position(name) {
            self.schema.columns[p].kind = kind;
            self.columns[p] = values.into_iter().map(Some).collect();
            return Ok(self);
        }
        self.schema.columns.push(ColumnSchema { name: name.to_string(), kind });
        self.columns.push(values.into_iter().map(Some).collect());
        Ok(self)
    }

    /// Reads a CSV with a header row; columns absent from `schema` are ignored.
    pub fn from_csv<R: Read>(reader: R, schema: DatasetSchema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        let idx: Vec<usize> = schema
            .columns
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == c.name)
                    .ok_or_else(|| Error::Parse(format!("CSV has no column '{}'", c.name)))
            })
            .collect::<Result<_>>()?;
        let mut columns = vec![Vec::new(); schema.columns.len()];
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (k, &i) in idx.iter().enumerate() {
                let raw = rec.get(i).unwrap_or("");
                let v = if MISSING.contains(&raw) {
                    None
                } else {
                    Some(raw.parse::<f64>().map_err(|_| {
                        Error::Parse(format!(
                            "row {}: column '{}' has non-numeric value '{raw}'",
                            line + 1,
                            schema.columns[k].name
                        ))
                    })?)
                };
                columns[k].push(v);
            }
        }
        Self::new(schema, columns)
    }

    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.schema.columns.iter().map(|c| c.name.as_str()))?;
        for r in 0..self.n_rows() {
            w.write_record(self.columns.iter().map(|c| c[r].map(format_value).unwrap_or_default()))?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
