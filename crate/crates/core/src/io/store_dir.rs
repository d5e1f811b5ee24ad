//! Store directory: `index.json` plus one beat CSV per label.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tables::{read_beats_csv_opt, write_beats_csv_sized};
use super::{io_err, read_json, to_json_string, write_file};
use crate::delineate::Feature;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{BeatLabel, BeatWindow};
use crate::store::{build_store, BeatStore, DescriptorStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreIndexEntry {
    pub id: u64,
    pub label: BeatLabel,
    /// Descriptor values in schema order.
    pub descriptors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreIndex {
    pub fs: u32,
    pub window: BeatWindow,
    pub schema: Vec<Feature>,
    pub normal_count: usize,
    pub abnormal_count: usize,
    pub descriptor_stats: DescriptorStats,
    pub beats: Vec<StoreIndexEntry>,
}

fn file_for(label: BeatLabel) -> &'static str {
    match label {
        BeatLabel::Normal => "normal.csv",
        BeatLabel::Abnormal => "abnormal.csv",
    }
}

pub fn save_store<T: Scalar>(dir: impl AsRef<Path>, store: &BeatStore<T>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let beats = BeatLabel::ALL
        .iter()
        .flat_map(|&l| store.beats(l).iter().enumerate().map(move |(i, b)| (l, i, b)))
        .map(|(l, i, b)| StoreIndexEntry {
            id: b.id,
            label: b.label,
            descriptors: store.descriptor_row(l, i).to_vec(),
        })
        .collect();
    let index = StoreIndex {
        fs: store.fs(),
        window: store.window(),
        schema: store.schema().to_vec(),
        normal_count: store.count(BeatLabel::Normal),
        abnormal_count: store.count(BeatLabel::Abnormal),
        descriptor_stats: store.stats().clone(),
        beats,
    };
    write_file(dir.join("index.json"), to_json_string(&index)?.as_bytes())?;
    for label in BeatLabel::ALL {
        let mut buf = Vec::new();
        write_beats_csv_sized(&mut buf, store.beats(label), store.window().len())?;
        write_file(dir.join(file_for(label)), &buf)?;
    }
    Ok(())
}

pub fn load_store<T: Scalar>(dir: impl AsRef<Path>) -> Result<BeatStore<T>> {
    let dir = dir.as_ref();
    let index_path = dir.join("index.json");
    let index: StoreIndex = read_json(&index_path)?;
    let bad = |msg: String| Error::Parse {
        path: index_path.display().to_string(),
        line: 0,
        message: msg,
    };
    let mut beats = Vec::with_capacity(index.beats.len());
    for label in BeatLabel::ALL {
        let mut part = read_beats_csv_opt::<T>(&dir.join(file_for(label)), true)?;
        let expected = match label {
            BeatLabel::Normal => index.normal_count,
            BeatLabel::Abnormal => index.abnormal_count,
        };
        if part.len() != expected {
            return Err(bad(format!("{} lists {expected} {label} beats, file has {}", "index", part.len())));
        }
        if part.iter().any(|b| b.label != label) {
            return Err(bad(format!("{} contains a beat of the other label", file_for(label))));
        }
        beats.append(&mut part);
    }
    if beats.len() != index.beats.len() {
        return Err(bad("descriptor entries do not match beat files".into()));
    }
    for (b, entry) in beats.iter_mut().zip(&index.beats) {
        if b.id != entry.id || b.label != entry.label || entry.descriptors.len() != index.schema.len() {
            return Err(bad(format!("descriptor entry for beat {} is out of order or malformed", entry.id)));
        }
        b.descriptors = index.schema.iter().zip(&entry.descriptors).map(|(&f, &v)| (f, T::lit(v))).collect();
    }
    let store = build_store(beats, &index.schema, index.window, index.fs)?;
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
    if !close(&store.stats().mean, &index.descriptor_stats.mean) || !close(&store.stats().std, &index.descriptor_stats.std) {
        return Err(bad("descriptor statistics disagree with the stored beats".into()));
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::BeatRecord;
    use std::collections::BTreeMap;

    #[test]
    fn store_round_trips_with_an_empty_label() {
        let window = BeatWindow { pre_r: 1, post_r: 2 };
        let beats: Vec<BeatRecord<f64>> = (0..4)
            .map(|i| BeatRecord {
                id: 10 + i,
                label: BeatLabel::Normal,
                waveform: vec![0.1 * i as f64, 1.0, -0.2, 0.0],
                descriptors: BTreeMap::from([(Feature::RAmp, 1.0 + i as f64 / 7.0)]),
            })
            .collect();
        let store = build_store(beats, &[Feature::RAmp], window, 128).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_store(dir.path(), &store).unwrap();
        let back: BeatStore<f64> = load_store(dir.path()).unwrap();
        assert_eq!(back, store);
        assert_eq!(fs::read_to_string(dir.path().join("abnormal.csv")).unwrap(), "id,label,s0,s1,s2,s3\n");
    }
}
