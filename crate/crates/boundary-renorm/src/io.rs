//! CSV and JSON persistence with reproducibility headers.
//!
//! Every CSV starts with one `#` line carrying the config hash and seed,
//! followed by a header row. JSON documents wrap the payload as
//! `{"meta": …, "record": …}` with struct fields in declaration order and
//! maps sorted by key, so identical inputs give identical bytes.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::experiments::ExperimentRecord;
use crate::Result;

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Metadata embedded in every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputMeta {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl OutputMeta {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        OutputMeta { config_hash: config_hash.into(), seed, version: env!("CARGO_PKG_VERSION").to_string() }
    }

    fn comment(&self) -> String {
        format!("# config_hash={} seed={} version={}\n", self.config_hash, self.seed, self.version)
    }
}

/// Shortest round-trip decimal, in exponent form for very small or large
/// magnitudes; `inf`, `-inf` and `nan` for non-finite values, empty for
/// `None`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v != 0.0 && !(1e-4..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Write a CSV with the metadata line, a header row and string rows.
pub fn write_csv(path: &Path, meta: &OutputMeta, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let body = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    let mut out = meta.comment().into_bytes();
    out.extend(body);
    ensure_parent(path)?;
    fs::write(path, out)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent() {
        if !p.as_os_str().is_empty() {
            fs::create_dir_all(p)?;
        }
    }
    Ok(())
}

/// Pretty JSON of `{"meta": meta, "record": value}` with a trailing newline.
pub fn write_json(path: &Path, meta: &OutputMeta, value: &impl Serialize) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T: Serialize> {
        meta: &'a OutputMeta,
        record: &'a T,
    }
    let mut s = serde_json::to_string_pretty(&Doc { meta, record: value })?;
    s.push('\n');
    ensure_parent(path)?;
    fs::write(path, s)?;
    Ok(())
}

/// Column order of [`record_rows`].
pub const RECORD_HEADER: [&str; 6] = ["arm", "eps", "seed", "status", "key", "value"];

/// Flatten runs to `(arm, eps, seed, status, key, value)`; pairings appear
/// as `pairing-j`.
pub fn record_rows(rec: &ExperimentRecord) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for r in &rec.runs {
        let status = match r.status {
            crate::solvers::RunStatus::Ok => "ok".to_string(),
            crate::solvers::RunStatus::Blowup { step, .. } => format!("blowup@{step}"),
        };
        let mut push = |k: String, v: f64| {
            rows.push(vec![r.arm.clone(), fmt_f64(r.eps), r.seed.to_string(), status.clone(), k, fmt_f64(v)]);
        };
        for (k, v) in &r.values {
            push(k.clone(), *v);
        }
        for (j, v) in r.pairings.iter().enumerate() {
            push(format!("pairing-{j}"), *v);
        }
    }
    rows
}

/// Column order of [`series_rows`].
pub const SERIES_HEADER: [&str; 3] = ["series", "x", "y"];

pub fn series_rows(rec: &ExperimentRecord) -> Vec<Vec<String>> {
    rec.series
        .iter()
        .flat_map(|s| s.x.iter().zip(&s.y).map(move |(x, y)| vec![s.name.clone(), fmt_f64(*x), fmt_f64(*y)]))
        .collect()
}

/// Write `<dir>/<stem>.json`, `<dir>/<stem>.csv` (runs) and, when the
/// record has series, `<dir>/<stem>_series.csv`.
pub fn write_record(dir: &Path, stem: &str, meta: &OutputMeta, rec: &ExperimentRecord) -> Result<()> {
    write_json(&dir.join(format!("{stem}.json")), meta, rec)?;
    write_csv(&dir.join(format!("{stem}.csv")), meta, &RECORD_HEADER, &record_rows(rec))?;
    if !rec.series.is_empty() {
        write_csv(&dir.join(format!("{stem}_series.csv")), meta, &SERIES_HEADER, &series_rows(rec))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 1e300] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(2.5e-17), "2.5e-17");
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn csv_has_comment_then_header() {
        let dir = std::env::temp_dir().join(format!("brenorm-io-{}", std::process::id()));
        let p = dir.join("t.csv");
        let meta = OutputMeta::new("abc", 7);
        write_csv(&p, &meta, &["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        let s = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# config_hash=abc seed=7"));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "1,\"x,y\"");
        fs::remove_dir_all(dir).unwrap();
    }
}
