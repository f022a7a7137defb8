use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::graph::validate_names;
use crate::scalar::Scalar;

/// `n x d` observation matrix with ordered variable names (rows are samples).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T: Scalar> {
    names: Vec<String>,
    x: Array2<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(names: Vec<String>, x: Array2<T>) -> Result<Self> {
        validate_names(&names)?;
        if x.ncols() != names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns but {} names",
                x.ncols(),
                names.len()
            )));
        }
        if let Some(((r, c), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "row {}, column `{}`",
                r + 1,
                names[c]
            )));
        }
        Ok(Self { names, x })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn data(&self) -> &Array2<T> {
        &self.x
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    /// Per-column zero mean and unit (population) variance.
    pub fn standardized(&self) -> Result<Self> {
        let n = T::from_usize_lossy(self.n_samples());
        if self.n_samples() == 0 {
            return Err(Error::InvalidArgument(
                "cannot standardize an empty dataset".into(),
            ));
        }
        let mut x = self.x.clone();
        for (c, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let mean = col.sum() / n;
            col.mapv_inplace(|v| v - mean);
            let var = col.iter().fold(T::zero(), |a, &v| a + v * v) / n;
            if var <= T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "column `{}` is constant and cannot be standardized",
                    self.names[c]
                )));
            }
            let sd = var.sqrt();
            col.mapv_inplace(|v| v / sd);
        }
        Ok(Self {
            names: self.names.clone(),
            x,
        })
    }

    /// Header row of names, one observation per row, shortest round-trip
    /// float formatting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.names)?;
        for row in self.x.outer_iter() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if names.is_empty() || names.iter().all(String::is_empty) {
            return Err(Error::Parse {
                row: 0,
                column: String::new(),
                message: "missing header row".into(),
            });
        }
        validate_names(&names).map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?;
        let d = names.len();
        let mut flat = Vec::new();
        let mut rows = 0usize;
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = r + 1;
            if rec.len() != d {
                return Err(Error::Parse {
                    row,
                    column: String::new(),
                    message: format!("expected {d} fields, found {}", rec.len()),
                });
            }
            for (c, cell) in rec.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: names[c].clone(),
                    message: format!("`{cell}` is not a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: names[c].clone(),
                        message: format!("`{cell}` is not finite"),
                    });
                }
                flat.push(T::lit(v));
            }
            rows += 1;
        }
        let x = Array2::from_shape_vec((rows, d), flat)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        Self::new(names, x)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
