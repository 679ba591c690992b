use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Raw contents of a `knot,value` function file.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionFile {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

fn parse_error(path: &Path, line: u64, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Reads a function file: a `knot,value` header followed by one pair per
/// line. Class invariants are checked later, when the grid is built.
pub fn read_function_csv(path: &Path) -> Result<FunctionFile> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(parse_error(
            path,
            1,
            "empty file (expected header `knot,value`)",
        ));
    }
    if headers.len() != 2 || &headers[0] != "knot" || &headers[1] != "value" {
        return Err(parse_error(
            path,
            1,
            format!(
                "expected header `knot,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut out = FunctionFile {
        knots: Vec::new(),
        values: Vec::new(),
    };
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(parse_error(
                path,
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| parse_error(path, line, format!("bad {name} {:?}: {e}", &record[i])))
        };
        out.knots.push(field(0, "knot")?);
        out.values.push(field(1, "value")?);
    }
    if out.knots.is_empty() {
        return Err(parse_error(path, 1, "no data rows"));
    }
    Ok(out)
}

/// Writes a `knot,value` file atomically.
pub fn write_function_csv(path: &Path, knots: &[f64], values: &[f64]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["knot", "value"])
            .map_err(|e| csv_write_error(path, e))?;
        for (k, v) in knots.iter().zip(values) {
            w.write_record([k.to_string(), v.to_string()])
                .map_err(|e| csv_write_error(path, e))?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    write_atomic(path, &buf)
}

fn csv_write_error(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    }
}

/// Write to a sibling temporary file, then rename over the target.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp: PathBuf = path.to_path_buf();
    let name = path
        .file_name()
        .map(|n| format!(".{}.tmp", n.to_string_lossy()))
        .unwrap_or_else(|| ".out.tmp".into());
    tmp.set_file_name(name);
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(io)
}
