//! Feature matrix CSV: `account_id` then feature columns in lexicographic
//! order, floats with 17 significant digits.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use gamechurn_core::features::FeatureMatrix;

use crate::error::{Error, Result};
use crate::labels::{create, finish, open, writer};

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix<W: Write>(w: W, m: &FeatureMatrix) -> Result<()> {
    let mut w = writer(w);
    w.write_record(std::iter::once("account_id").chain(m.columns().iter().map(String::as_str)))?;
    for (account, row) in m.accounts().iter().zip(m.rows()) {
        w.write_record(std::iter::once(account.clone()).chain(row.iter().map(|v| format_float(*v))))?;
    }
    finish(w)
}

pub fn write_matrix_file(path: &Path, m: &FeatureMatrix) -> Result<()> {
    write_matrix(BufWriter::new(create(path)?), m)
}

pub fn read_matrix<R: Read>(r: R) -> Result<FeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("account_id") {
        return Err(Error::format("matrix header must start with account_id"));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut accounts = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .skip(1)
            .map(|f| f.parse::<f64>().map_err(|_| Error::format(format!("line {line}: invalid number {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        accounts.push(rec[0].to_string());
        rows.push(row);
    }
    Ok(FeatureMatrix::new(accounts, columns, rows)?)
}

pub fn read_matrix_file(path: &Path) -> Result<FeatureMatrix> {
    read_matrix(std::io::BufReader::new(open(path)?))
}
