//! CSV ingestion and the CSV/JSON export formats.
//!
//! CSV format: first row is the header, comma delimiter, '.' decimal
//! point, no quoting of numerics. Error messages reference 1-based row
//! numbers counting the header as row 1.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use vtreg_core::{CoefBands, CoefCurves, Dataset, Error, EvalReport, Matrix};

use crate::CliError;

#[derive(Debug)]
pub struct CsvTable {
    pub headers: Vec<String>,
    /// Column-major values; `columns[j][i]` pairs with `headers[j]`.
    pub columns: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Result<CsvTable, Error> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header_line)) = lines.next() else {
        return Err(Error::NoDataRows);
    };
    let headers: Vec<String> = header_line
        .split(',')
        .map(|h| h.trim().trim_matches('"').to_string())
        .collect();
    let ncol = headers.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); ncol];
    let mut rows = 0usize;
    for (line_idx, line) in lines {
        let row_number = line_idx + 1; // 1-based, header included
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncol {
            return Err(Error::RaggedRow {
                row: row_number,
                expected: ncol,
                got: fields.len(),
            });
        }
        for (j, field) in fields.iter().enumerate() {
            let trimmed = field.trim();
            match trimmed.parse::<f64>() {
                Ok(v) if v.is_finite() => columns[j].push(v),
                _ => {
                    return Err(Error::CsvCell {
                        row: row_number,
                        column: headers[j].clone(),
                        value: trimmed.to_string(),
                    })
                }
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::NoDataRows);
    }
    Ok(CsvTable { headers, columns })
}

/// Builds a dataset from parsed columns. When `covariates` is None every
/// non-response column is used, in file order.
pub fn dataset_from_table(
    table: &CsvTable,
    response: &str,
    covariates: Option<&[String]>,
) -> Result<Dataset, Error> {
    let find = |name: &str| -> Result<usize, Error> {
        table
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let y_idx = find(response)?;
    let cov_names: Vec<String> = match covariates {
        Some(names) => {
            for name in names {
                find(name)?;
            }
            names.to_vec()
        }
        None => table
            .headers
            .iter()
            .filter(|h| h.as_str() != response)
            .cloned()
            .collect(),
    };
    let n = table.columns[y_idx].len();
    let p = cov_names.len();
    let mut x = Matrix::zeros(n, p);
    for (j, name) in cov_names.iter().enumerate() {
        let cj = find(name)?;
        for i in 0..n {
            x.set(i, j, table.columns[cj][i]);
        }
    }
    Dataset::new(table.columns[y_idx].clone(), x, cov_names)
}

pub fn load_dataset(
    path: &Path,
    response: &str,
    covariates: Option<&[String]>,
) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let table = parse_csv(&text)?;
    Ok(dataset_from_table(&table, response, covariates)?)
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(path, e))?;
        }
    }
    fs::write(path, content).map_err(|e| CliError::io(path, e))
}

pub fn dataset_csv(d: &Dataset) -> String {
    let mut out = String::from("y");
    for name in d.names() {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for i in 0..d.n() {
        let _ = write!(out, "{}", d.y()[i]);
        for v in d.row(i) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Coefficient curves as (theta, coef_name, estimate, se_lower, se_upper);
/// the band columns stay empty when no standard errors exist.
pub fn curves_csv(curves: &CoefCurves, z: f64) -> String {
    let mut out = String::from("theta,coef_name,estimate,se_lower,se_upper\n");
    for (c, name) in curves.names.iter().enumerate() {
        for (t, theta) in curves.thetas.iter().enumerate() {
            let est = curves.estimates[c][t];
            match &curves.se {
                Some(se) => {
                    let half = z * se[c][t];
                    let _ = writeln!(
                        out,
                        "{theta},{name},{est},{},{}",
                        est - half,
                        est + half
                    );
                }
                None => {
                    let _ = writeln!(out, "{theta},{name},{est},,");
                }
            }
        }
    }
    out
}

pub fn bands_csv(bands: &[&CoefBands]) -> String {
    let mut out = String::from("coef,theta,estimate,lower,upper,method,level\n");
    for b in bands {
        for (c, name) in b.names.iter().enumerate() {
            for (t, theta) in b.thetas.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{name},{theta},{},{},{},{},{}",
                    b.estimate[c][t],
                    b.lower[c][t],
                    b.upper[c][t],
                    b.method.name(),
                    b.level
                );
            }
        }
    }
    out
}

pub fn eval_csv(report: &EvalReport) -> String {
    let mut out = String::from("split,method,mae,rps\n");
    for row in &report.rows {
        let _ = writeln!(out, "{},{},{},{}", row.split, row.method, row.mae, row.rps);
    }
    out
}

/// Importance table (variable, importance) sorted descending.
pub fn importance_csv(names: &[String], importances: &[f64]) -> String {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]));
    let mut out = String::from("variable,importance\n");
    for idx in order {
        let _ = writeln!(out, "{},{}", names[idx], importances[idx]);
    }
    out
}

pub fn importance_by_threshold_csv(
    names: &[String],
    rows: &[(f64, Vec<f64>)],
) -> String {
    let mut out = String::from("theta,variable,importance\n");
    for (theta, imps) in rows {
        for (name, imp) in names.iter().zip(imps) {
            let _ = writeln!(out, "{theta},{name},{imp}");
        }
    }
    out
}
