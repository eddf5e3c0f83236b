use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Malformed or unusable input data; reported with exit code 3.
#[derive(Debug)]
pub struct DataError(pub String);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataError {}

/// Reads one numeric series from CSV. The last column is used; a first row
/// whose leading field is not a number is treated as a header.
pub fn read_series(path: Option<&Path>) -> Result<Vec<f64>> {
    let reader: Box<dyn Read> = match path {
        Some(p) if p != Path::new("-") => Box::new(
            File::open(p)
                .map_err(|e| DataError(format!("cannot open {}: {e}", p.display())))?,
        ),
        _ => Box::new(io::stdin().lock()),
    };
    parse_series(reader)
}

pub fn parse_series<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = rdr
            .read_record(&mut record)
            .map_err(|e| DataError(format!("malformed CSV: {e}")))?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if record.get(0).is_some_and(|t| t.parse::<f64>().is_err()) {
                continue;
            }
        }
        let field = record.get(record.len() - 1).unwrap_or("");
        let v: f64 = field
            .parse()
            .map_err(|_| DataError(format!("line {line}: cannot parse {field:?} as a number")))?;
        if !v.is_finite() {
            return Err(DataError(format!("line {line}: non-finite value {field:?}")).into());
        }
        values.push(v);
    }
    Ok(values)
}

/// Writes to `path` through a temporary file in the same directory that is
/// renamed into place only after `body` succeeds; stdout when `path` is
/// `None`.
pub fn write_output<F>(path: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w).context("writing to stdout")?;
            w.flush().context("writing to stdout")?;
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .with_context(|| format!("creating temporary file in {}", dir.display()))?;
            {
                let mut w = BufWriter::new(tmp.as_file_mut());
                body(&mut w).with_context(|| format!("writing {}", path.display()))?;
                w.flush().with_context(|| format!("writing {}", path.display()))?;
            }
            tmp.persist(path)
                .with_context(|| format!("renaming output to {}", path.display()))?;
            Ok(())
        }
    }
}
