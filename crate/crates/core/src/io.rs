//! Dataset and table I/O.
//!
//! Datasets are CSV with a header row: a `time` column (positive, raw
//! scale; the logarithm is taken on read), a `status` column (0/1) and any
//! number of covariate columns, kept in file order.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::sim::StudyRow;
use crate::survival::SurvivalDataset;

/// Parsed dataset plus the covariate column names in file order.
#[derive(Debug)]
pub struct NamedDataset<F> {
    pub data: SurvivalDataset<F>,
    pub covariate_names: Vec<String>,
}

/// Read a dataset from CSV. Times must be positive (their log is stored);
/// status entries must be exactly 0 or 1. Errors carry 1-based line
/// numbers.
pub fn read_dataset_csv<F: Scalar>(path: &Path) -> Result<NamedDataset<F>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv {
            line: 0,
            msg: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let mut time_col = None;
    let mut status_col = None;
    let mut covariate_cols = Vec::new();
    let mut covariate_names = Vec::new();
    for (idx, name) in headers.iter().enumerate() {
        match name {
            "time" => {
                if time_col.replace(idx).is_some() {
                    return Err(Error::Csv {
                        line: 1,
                        msg: "duplicate `time` column".into(),
                    });
                }
            }
            "status" => {
                if status_col.replace(idx).is_some() {
                    return Err(Error::Csv {
                        line: 1,
                        msg: "duplicate `status` column".into(),
                    });
                }
            }
            other => {
                covariate_cols.push(idx);
                covariate_names.push(other.to_string());
            }
        }
    }
    let time_col = time_col.ok_or(Error::Csv {
        line: 1,
        msg: "missing `time` column".into(),
    })?;
    let status_col = status_col.ok_or(Error::Csv {
        line: 1,
        msg: "missing `status` column".into(),
    })?;

    let mut times = Vec::new();
    let mut status = Vec::new();
    let mut rows: Vec<Vec<F>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|e| Error::Csv {
            line,
            msg: e.to_string(),
        })?;
        let raw_time: f64 = record
            .get(time_col)
            .ok_or(Error::Csv {
                line,
                msg: "short record".into(),
            })?
            .parse()
            .map_err(|e| Error::Csv {
                line,
                msg: format!("bad time value: {e}"),
            })?;
        if !(raw_time > 0.0) || !raw_time.is_finite() {
            return Err(Error::Csv {
                line,
                msg: format!("time must be positive and finite, got {raw_time}"),
            });
        }
        times.push(F::cast(raw_time.ln()));
        let status_txt = record.get(status_col).ok_or(Error::Csv {
            line,
            msg: "short record".into(),
        })?;
        match status_txt {
            "0" => status.push(0u8),
            "1" => status.push(1u8),
            other => {
                return Err(Error::Csv {
                    line,
                    msg: format!("status must be 0 or 1, got `{other}`"),
                })
            }
        }
        let mut row = Vec::with_capacity(covariate_cols.len());
        for &c in &covariate_cols {
            let v: f64 = record
                .get(c)
                .ok_or(Error::Csv {
                    line,
                    msg: "short record".into(),
                })?
                .parse()
                .map_err(|e| Error::Csv {
                    line,
                    msg: format!("bad covariate value in `{}`: {e}", headers.get(c).unwrap_or("?")),
                })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    msg: "covariates must be finite (no missing values)".into(),
                });
            }
            row.push(F::cast(v));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let p = covariate_cols.len();
    let mut x = Array2::<F>::zeros((rows.len(), p));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x[[i, j]] = v;
        }
    }
    let data = SurvivalDataset::new(Array1::from(times), status, x)?;
    Ok(NamedDataset {
        data,
        covariate_names,
    })
}

/// Write a dataset as CSV (times exponentiated back to the raw scale).
pub fn write_dataset_csv<F: Scalar>(
    path: &Path,
    data: &SurvivalDataset<F>,
    covariate_names: &[String],
) -> Result<()> {
    if covariate_names.len() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} covariates",
            covariate_names.len(),
            data.p()
        )));
    }
    let mut out = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        line: 0,
        msg: e.to_string(),
    })?;
    let mut header = vec!["time".to_string(), "status".to_string()];
    header.extend_from_slice(covariate_names);
    out.write_record(&header).map_err(csv_err)?;
    for i in 0..data.n() {
        let mut record = vec![
            format!("{}", data.times()[i].exp()),
            if data.is_event(i) { "1" } else { "0" }.to_string(),
        ];
        for j in 0..data.p() {
            record.push(format!("{}", data.covariates()[[i, j]]));
        }
        out.write_record(&record).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Kaplan–Meier curve coordinates per group: columns `time, survival,
/// group`.
pub fn write_km_csv<F: Scalar>(path: &Path, curves: &[(String, Vec<(F, F)>)]) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record(["time", "survival", "group"]).map_err(csv_err)?;
    for (group, curve) in curves {
        for &(t, s) in curve {
            out.write_record([format!("{t}"), format!("{s}"), group.clone()])
                .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Selection-frequency study table: one row per (block, method) cell.
pub fn write_study_csv<F: Scalar>(path: &Path, rows: &[StudyRow<F>]) -> Result<()> {
    let mut out = csv::Writer::from_path(path).map_err(csv_err)?;
    out.write_record(["block", "method", "censoring", "rho", "model", "min", "mean", "max"])
        .map_err(csv_err)?;
    for row in rows {
        out.write_record([
            row.block.clone(),
            row.method.clone(),
            format!("{}", row.censoring),
            format!("{}", row.rho),
            row.model.clone(),
            format!("{}", row.min),
            format!("{}", row.mean),
            format!("{}", row.max),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv {
        line: 0,
        msg: e.to_string(),
    }
}

/// Write bytes atomically enough for our purposes (create + write + flush).
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}
