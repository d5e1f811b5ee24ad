//! CSV formats. All tables use `,` separators, LF line endings and a header row.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::io_err;
use crate::delineate::{Feature, FeatureTrajectory, FeatureVector};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::signal::{BeatLabel, BeatRecord, Signal};
use crate::tstr::TstrRow;

fn csv_err(e: csv::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        source: e.into(),
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Parsed CSV: header fields and data records with their 1-based line numbers.
struct Table {
    path: String,
    header: Vec<String>,
    records: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        Self::read_opt(path, false)
    }

    fn read_opt(path: &Path, allow_empty: bool) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
        let label = path.display().to_string();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: label.clone(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if header.iter().all(String::is_empty) {
            return Err(parse_err(1, "missing header".into()));
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            records.push((line, rec.iter().map(|s| s.trim().to_string()).collect()));
        }
        if records.is_empty() && !allow_empty {
            return Err(parse_err(2, "no data rows".into()));
        }
        Ok(Table {
            path: label,
            header,
            records,
        })
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn expect_header(&self, expected: &[&str]) -> Result<()> {
        if self.header != expected {
            return Err(self.err(1, format!("expected header {:?}, found {:?}", expected.join(","), self.header.join(","))));
        }
        Ok(())
    }

    fn number<T: Scalar>(&self, line: usize, field: &str) -> Result<T> {
        let v: f64 = field.parse().map_err(|_| self.err(line, format!("invalid number {field:?}")))?;
        if !v.is_finite() {
            return Err(self.err(line, format!("non-finite value {field:?}")));
        }
        Ok(T::lit(v))
    }

    fn label(&self, line: usize, field: &str) -> Result<BeatLabel> {
        field.parse().map_err(|_| self.err(line, format!("invalid label {field:?}")))
    }
}

/// Header `t,amplitude_mv`; time in seconds, amplitude with six decimals.
pub fn write_signal_csv<T: Scalar, W: Write>(w: W, signal: &Signal<T>) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["t", "amplitude_mv"]).map_err(csv_err)?;
    let fs = signal.fs() as f64;
    for (i, v) in signal.samples().iter().enumerate() {
        wr.write_record([format!("{}", i as f64 / fs), format!("{:.6}", v.as_f64())]).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| io_err(Path::new("<output>"), e))
}

/// Reads a signal CSV; the sampling rate and channel come from the manifest.
pub fn read_signal_csv<T: Scalar>(path: impl AsRef<Path>, fs: u32, channel_name: &str) -> Result<Signal<T>> {
    let t = Table::read(path.as_ref())?;
    t.expect_header(&["t", "amplitude_mv"])?;
    let mut samples = Vec::with_capacity(t.records.len());
    for (line, rec) in &t.records {
        t.number::<f64>(*line, &rec[0])?;
        samples.push(t.number(*line, &rec[1])?);
    }
    Signal::new(samples, fs, channel_name)
}

/// Header `id,label,s0,...,s{W-1}`; samples in shortest round-trip form.
pub fn write_beats_csv<T: Scalar, W: Write>(w: W, beats: &[BeatRecord<T>]) -> Result<()> {
    write_beats_csv_sized(w, beats, beats.first().map_or(0, |b| b.waveform.len()))
}

/// As [`write_beats_csv`] with an explicit beat length, so an empty table still has its header.
pub(crate) fn write_beats_csv_sized<T: Scalar, W: Write>(w: W, beats: &[BeatRecord<T>], len: usize) -> Result<()> {
    let mut wr = writer(w);
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend((0..len).map(|i| format!("s{i}")));
    wr.write_record(&header).map_err(csv_err)?;
    for b in beats {
        if b.waveform.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: b.waveform.len(),
            });
        }
        let mut rec = vec![b.id.to_string(), b.label.to_string()];
        rec.extend(b.waveform.iter().map(|v| v.to_string()));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| io_err(Path::new("<output>"), e))
}

/// Reads a beat CSV. Descriptors are left empty.
pub fn read_beats_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<BeatRecord<T>>> {
    read_beats_csv_opt(path.as_ref(), false)
}

pub(crate) fn read_beats_csv_opt<T: Scalar>(path: &Path, allow_empty: bool) -> Result<Vec<BeatRecord<T>>> {
    let t = Table::read_opt(path, allow_empty)?;
    let w = t.header.len().saturating_sub(2);
    let expected: Vec<String> = ["id".to_string(), "label".to_string()].into_iter().chain((0..w).map(|i| format!("s{i}"))).collect();
    if w == 0 || t.header != expected {
        return Err(t.err(1, "expected header id,label,s0,...".to_string()));
    }
    t.records
        .iter()
        .map(|(line, rec)| {
            Ok(BeatRecord {
                id: rec[0].parse().map_err(|_| t.err(*line, format!("invalid id {:?}", rec[0])))?,
                label: t.label(*line, &rec[1])?,
                waveform: rec[2..].iter().map(|f| t.number(*line, f)).collect::<Result<_>>()?,
                descriptors: Default::default(),
            })
        })
        .collect()
}

/// Header: schema names then `label`.
pub fn write_features_csv<T: Scalar, W: Write>(w: W, trajectory: &FeatureTrajectory<T>) -> Result<()> {
    let mut wr = writer(w);
    let mut header: Vec<&str> = trajectory.schema.iter().map(|f| f.as_str()).collect();
    header.push("label");
    wr.write_record(&header).map_err(csv_err)?;
    for row in &trajectory.rows {
        let mut rec: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
        rec.push(row.label.to_string());
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| io_err(Path::new("<output>"), e))
}

pub fn read_features_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<FeatureTrajectory<T>> {
    let t = Table::read(path.as_ref())?;
    let (last, names) = t.header.split_last().ok_or_else(|| t.err(1, "empty header"))?;
    if last != "label" || names.is_empty() {
        return Err(t.err(1, "header must list features followed by label"));
    }
    let schema: Vec<Feature> = names
        .iter()
        .map(|n| n.parse().map_err(|_| t.err(1, format!("unknown feature {n:?}"))))
        .collect::<Result<_>>()?;
    let d = schema.len();
    let rows = t
        .records
        .iter()
        .map(|(line, rec)| {
            Ok(FeatureVector {
                values: rec[..d].iter().map(|f| t.number(*line, f)).collect::<Result<_>>()?,
                label: t.label(*line, &rec[d])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureTrajectory::new(schema, rows)
}

/// Header `sample,label`: annotated beat positions.
pub fn write_annotations_csv<W: Write>(w: W, r_indices: &[usize], labels: &[BeatLabel]) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["sample", "label"]).map_err(csv_err)?;
    for (r, l) in r_indices.iter().zip(labels) {
        wr.write_record([r.to_string(), l.to_string()]).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| io_err(Path::new("<output>"), e))
}

pub fn read_annotations_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, BeatLabel)>> {
    let t = Table::read(path.as_ref())?;
    t.expect_header(&["sample", "label"])?;
    t.records
        .iter()
        .map(|(line, rec)| {
            let sample = rec[0].parse().map_err(|_| t.err(*line, format!("invalid sample index {:?}", rec[0])))?;
            Ok((sample, t.label(*line, &rec[1])?))
        })
        .collect()
}

pub const TSTR_COLUMNS: [&str; 12] = [
    "classifier", "protocol", "acc_overall", "acc_n", "acc_a", "prec_n", "prec_a", "rec_n", "rec_a", "f1_n", "f1_a", "mcc",
];

fn tstr_values(row: &TstrRow) -> [f64; 10] {
    let r = &row.report;
    [
        r.overall_accuracy,
        r.normal.accuracy,
        r.abnormal.accuracy,
        r.normal.precision,
        r.abnormal.precision,
        r.normal.recall,
        r.abnormal.recall,
        r.normal.f1,
        r.abnormal.f1,
        r.mcc,
    ]
}

/// One row per classifier and protocol; rates with six decimals.
pub fn write_tstr_csv<W: Write>(w: W, rows: &[TstrRow]) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(TSTR_COLUMNS).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![row.classifier.name().to_string(), row.protocol.as_str().to_string()];
        rec.extend(tstr_values(row).iter().map(|v| format!("{v:.6}")));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| io_err(Path::new("<output>"), e))
}

/// Fixed-width text rendering of the TSTR table.
pub fn write_tstr_text<W: Write>(mut w: W, rows: &[TstrRow]) -> Result<()> {
    let out = |e| io_err(Path::new("<output>"), e);
    let heads = ["Acc", "Acc(N)", "Acc(A)", "Prec(N)", "Prec(A)", "Rec(N)", "Rec(A)", "F1(N)", "F1(A)", "MCC"];
    write!(w, "{:<30}{:<6}", "Classifier", "Proto").map_err(out)?;
    for h in heads {
        write!(w, "{h:>9}").map_err(out)?;
    }
    writeln!(w).map_err(out)?;
    for row in rows {
        write!(w, "{:<30}{:<6}", row.classifier.name(), row.protocol.as_str()).map_err(out)?;
        for v in tstr_values(row) {
            write!(w, "{v:>9.4}").map_err(out)?;
        }
        writeln!(w).map_err(out)?;
    }
    Ok(())
}
