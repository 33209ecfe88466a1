//! Canonical text serialization.
//!
//! Every persisted or emitted object goes through these helpers: pretty JSON
//! with struct-declared field order, sorted maps, shortest round-trip floats
//! and a single trailing newline. Two equal values always produce the same
//! bytes.

use serde::Serialize;

use crate::error::Result;

/// Pretty canonical form used for files, CLI output and API bodies.
pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    Ok(out)
}

/// Single-line form used for line-delimited record files.
pub fn to_line<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(value)?)
}
