//! Shared framing for the text model formats.
//!
//! ```text
//! credtree-model <kind> <version>
//! @relation ...          <- ARFF header of the training schema, class last
//! @attribute ...
//! @model
//! <kind-specific body lines>
//! ```

use std::sync::Arc;

use crate::dataset::{parse_arff, Schema};
use crate::error::{Error, Result};

pub(crate) const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "credtree-model";

pub(crate) fn write_header(out: &mut String, kind: &str, schema: &Schema) {
    out.push_str(&format!("{MAGIC} {kind} {FORMAT_VERSION}\n"));
    crate::dataset::write_schema_header(out, schema);
    out.push_str("@model\n");
}

/// Body lines paired with their 1-based line numbers.
pub(crate) type BodyLines<'a> = Vec<(usize, &'a str)>;

/// Reads the framing of a model file and returns the schema plus the
/// numbered body lines (blank lines dropped).
pub(crate) fn read_header<'a>(text: &'a str, kind: &str) -> Result<(Arc<Schema>, BodyLines<'a>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| Error::model(1, "empty model file"))?;
    let mut parts = first.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::model(1, "not a credtree model file"));
    }
    match parts.next() {
        Some(k) if k == kind => {}
        Some(k) => return Err(Error::model(1, format!("expected a {kind} model, found {k}"))),
        None => return Err(Error::model(1, "missing model kind")),
    }
    match parts.next().map(str::parse::<u32>) {
        Some(Ok(FORMAT_VERSION)) => {}
        _ => return Err(Error::model(1, "unsupported model format version")),
    }

    let mut header = String::new();
    let mut body = Vec::new();
    let mut in_body = false;
    for (n, line) in lines {
        if in_body {
            if !line.trim().is_empty() {
                body.push((n, line));
            }
        } else if line.trim().eq_ignore_ascii_case("@model") {
            in_body = true;
        } else {
            header.push_str(line);
            header.push('\n');
        }
    }
    if !in_body {
        return Err(Error::model(1, "missing @model section"));
    }
    header.push_str("@data\n");
    let schema = parse_arff(&header)
        .map_err(|e| match e {
            Error::Parse { line, message } => Error::model(line + 1, message),
            other => other,
        })?
        .shared_schema();
    Ok((schema, body))
}

/// Model kind named on the first line of a model file.
pub fn model_kind(text: &str) -> Option<&str> {
    let mut parts = text.lines().next()?.split_whitespace();
    (parts.next()? == MAGIC).then(|| parts.next()).flatten()
}

pub(crate) fn parse_f64(token: &str, line: usize) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::model(line, format!("'{token}' is not a finite number")))
}

pub(crate) fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::model(line, format!("'{token}' is not an index")))
}

pub(crate) fn parse_list(token: &str, line: usize) -> Result<Vec<f64>> {
    token.split(',').map(|t| parse_f64(t, line)).collect()
}

pub(crate) fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

/// Value of a `key=value` token.
pub(crate) fn keyed<'a>(token: Option<&'a str>, key: &str, line: usize) -> Result<&'a str> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::model(line, format!("expected {key}=...")))
}
