//! Shared helpers for the line-oriented artifact formats.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses a header of the form `# <magic> v1 key=value key=value ...`.
pub(crate) fn parse_header(path: &Path, line: Option<&str>, magic: &str) -> Result<BTreeMap<String, String>> {
    let malformed = |reason: String| Error::MalformedHeader { path: path.to_path_buf(), reason };
    let line = line.ok_or_else(|| malformed("file is empty".into()))?;
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("#") || tokens.next() != Some(magic) {
        return Err(malformed(format!("expected `# {magic}`")));
    }
    if tokens.next() != Some("v1") {
        return Err(malformed("unsupported version".into()));
    }
    let mut fields = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| malformed(format!("bad field `{tok}`")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    Ok(fields)
}

pub(crate) fn header_field<T: std::str::FromStr>(
    path: &Path,
    fields: &BTreeMap<String, String>,
    key: &str,
) -> Result<T> {
    let raw = fields.get(key).ok_or_else(|| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: format!("missing `{key}`"),
    })?;
    raw.parse().map_err(|_| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: format!("invalid value `{raw}` for `{key}`"),
    })
}

pub(crate) fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: format!("invalid number `{}`", tok.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse { path: path.to_path_buf(), line, reason: "non-finite value".into() });
    }
    Ok(v)
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
