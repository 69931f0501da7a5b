use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{Dataset, EmbeddingRecord};
use crate::{Error, Result};

/// Parses `label,f0,...,f{D-1}` rows. Label names get indices in order of
/// first appearance.
pub fn read_csv_from<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(input);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => h.map_err(|e| Error::Format(e.to_string()))?,
        None => return Err(Error::Format("empty CSV: missing header".into())),
    };
    if header.get(0) != Some("label") || header.len() < 2 {
        return Err(Error::Format("CSV header must be label,f0,...,f{D-1}".into()));
    }
    let dim = header.len() - 1;
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut records = Vec::new();
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if row.len() != dim + 1 {
            return Err(Error::Format(format!(
                "line {line}: {} features, header declares {dim}",
                row.len().saturating_sub(1)
            )));
        }
        let name = row[0].to_string();
        let label = *index.entry(name.clone()).or_insert_with(|| {
            names.push(name.clone());
            names.len() - 1
        });
        let vector = row
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {line}: non-numeric feature {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        records.push(EmbeddingRecord {
            label,
            label_name: name,
            vector,
        });
    }
    Dataset::new(names, dim, None, records)
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    read_csv_from(std::fs::File::open(path)?)
}

pub fn write_csv_to<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    let csv_err = |e: ::csv::Error| Error::Io(std::io::Error::other(e));
    let mut header = vec!["label".to_string()];
    header.extend((0..ds.dim()).map(|k| format!("f{k}")));
    w.write_record(&header).map_err(csv_err)?;
    for r in &ds.records {
        let mut row = vec![r.label_name.clone()];
        row.extend(r.vector.iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, ds: &Dataset) -> Result<()> {
    write_csv_to(ds, std::fs::File::create(path)?)
}
