//! Event catalog CSV: `log_id,name,group`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use gamechurn_core::{EventCatalog, LogId};

use crate::error::{Error, Result};

pub const CATALOG_HEADER: [&str; 3] = ["log_id", "name", "group"];

pub fn read_catalog<R: Read>(reader: R) -> Result<EventCatalog> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    if rdr.headers()?.iter().ne(CATALOG_HEADER.iter().copied()) {
        return Err(Error::format("catalog header must be log_id,name,group"));
    }
    let mut catalog = EventCatalog::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let id: u16 =
            rec[0].parse().map_err(|_| Error::format(format!("line {line}: invalid log_id {:?}", &rec[0])))?;
        catalog.insert(LogId(id), &rec[1], &rec[2])?;
    }
    Ok(catalog)
}

pub fn read_catalog_file(path: &Path) -> Result<EventCatalog> {
    read_catalog(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// The file's catalog when given, otherwise the built-in standard catalog.
pub fn load_catalog(path: Option<&Path>) -> Result<EventCatalog> {
    path.map_or_else(|| Ok(EventCatalog::standard()), read_catalog_file)
}

pub fn write_catalog<W: Write>(writer: W, catalog: &EventCatalog) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(CATALOG_HEADER)?;
    for (id, entry) in catalog.iter() {
        w.write_record([id.0.to_string().as_str(), &entry.name, &entry.group])?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}
