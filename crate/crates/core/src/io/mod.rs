//! File formats: CSV tables, JSON documents, store directories and SVG plots.

mod config;
mod store_dir;
mod svg;
mod tables;

pub use config::{Manifest, PipelineConfig, StoreSizes, TstrConfig};
pub use store_dir::{load_store, save_store, StoreIndex, StoreIndexEntry};
pub use svg::{heatmap_svg, overlay_svg};
pub use tables::{
    read_annotations_csv, read_beats_csv, read_features_csv, read_signal_csv, write_annotations_csv, write_beats_csv,
    write_features_csv, write_signal_csv, write_tstr_csv, write_tstr_text,
};

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: "<memory>".into(),
        source,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    write_file(path, to_json_string(value)?.as_bytes())
}

pub fn read_json<D: DeserializeOwned>(path: impl AsRef<Path>) -> Result<D> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Writes bytes, creating parent directories.
pub fn write_file(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(bytes).map_err(|e| io_err(path, e))
}

/// Renders into memory with `render`, then writes the file.
pub fn write_with(path: impl AsRef<Path>, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    write_file(path, &buf)
}
