use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use statpriv::Dataset;

use crate::parse::num;

/// Single numeric column, optional header, LF or CRLF.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: bad CSV", path.display()))?;
        if rec.len() != 1 {
            bail!("{}: line {} has {} columns, expected 1", path.display(), i + 1, rec.len());
        }
        let field = &rec[0];
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {}
            Err(_) => bail!("{}: line {}: `{field}` is not a number", path.display(), i + 1),
        }
    }
    Ok(Dataset::new(values)?)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["value"])?;
    for v in data.samples() {
        w.write_record([num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

/// Pretty JSON to `out` or standard output.
pub fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => {
            let mut f = create(p)?;
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        None => writeln!(io::stdout().lock(), "{text}")?,
    }
    Ok(())
}

/// CSV rows to `out` or standard output.
pub fn emit_csv(header: &[&str], rows: &[Vec<String>], out: Option<&Path>) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}
