//! Batch decisions with an append-only JSON-lines cache.
//!
//! The cache starts with a header line `{"etaforge_cache":1}` followed by one
//! [`CacheLine`] per finished cell. On resume, cells already present under the
//! same mode and version are reused; a damaged trailing line is cut off.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScanFormat;
use crate::arithmetic::{h_of, in_s, Level};
use crate::error::{Error, Result};
use crate::theorems::{decide, rwhyp_holds, verify_decision, Verdict};

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u64,
    pub k: u32,
    pub verdict: Verdict,
    pub hit_count: Option<usize>,
    #[serde(rename = "h_N")]
    pub h_n: u64,
    #[serde(rename = "in_S")]
    pub in_s: bool,
    pub rwhyp: Option<bool>,
    pub consistent: Option<bool>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheLine {
    pub version: u32,
    pub mode: String,
    pub row: ScanRow,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheHeader {
    etaforge_cache: u32,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub min_n: u64,
    pub max_n: u64,
    pub weights: Vec<i64>,
    pub out: PathBuf,
    pub format: ScanFormat,
    pub resume: bool,
    pub verify: bool,
    pub workers: usize,
    pub cache: PathBuf,
}

impl ScanOptions {
    fn mode(&self) -> &'static str {
        if self.verify {
            "verify"
        } else {
            "decide"
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanSummary {
    pub rows: Vec<ScanRow>,
    pub computed: usize,
    pub reused: usize,
    pub inconsistent: usize,
}

/// Levels in `[min_n, max_n]` coprime to 6.
pub fn scan_levels(min_n: u64, max_n: u64) -> Vec<u64> {
    (min_n.max(5)..=max_n).filter(|n| n % 2 != 0 && n % 3 != 0).collect()
}

pub fn scan_cell(n: u64, k: i64, verify: bool) -> Result<ScanRow> {
    let start = Instant::now();
    let level = Level::new(n)?;
    let decision = decide(&level, k)?;
    let (hit_count, consistent) = if verify && level.is_squarefree() {
        let v = verify_decision(&level, &decision)?;
        (v.hit_count, Some(v.consistent))
    } else {
        (None, None)
    };
    let rwhyp = if level.is_squarefree() { Some(rwhyp_holds(&level)?) } else { None };
    Ok(ScanRow {
        n,
        k: decision.k,
        verdict: decision.verdict,
        hit_count,
        h_n: h_of(&level)?,
        in_s: in_s(&level)?,
        rwhyp,
        consistent,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Reads the usable prefix of a cache file and truncates anything after it.
/// Returns `None` when the file is absent or its header is unusable.
pub fn load_cache(path: &Path) -> Result<Option<Vec<CacheLine>>> {
    let mut bytes = Vec::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_end(&mut bytes).map_err(io_err)?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(e)),
    }
    let mut lines = Vec::new();
    let mut offset = 0usize;
    let mut header_ok = false;
    while offset < bytes.len() {
        let Some(rel) = bytes[offset..].iter().position(|&b| b == b'\n') else {
            break;
        };
        let line = &bytes[offset..offset + rel];
        if !header_ok {
            match serde_json::from_slice::<CacheHeader>(line) {
                Ok(h) if h.etaforge_cache == CACHE_VERSION => header_ok = true,
                _ => return Ok(None),
            }
        } else {
            match serde_json::from_slice::<CacheLine>(line) {
                Ok(l) => lines.push(l),
                Err(_) => break,
            }
        }
        offset += rel + 1;
    }
    if !header_ok {
        return Ok(None);
    }
    if offset < bytes.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(io_err)?;
        f.set_len(offset as u64).map_err(io_err)?;
    }
    Ok(Some(lines))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Precondition(format!("i/o: {e}"))
}

fn fresh_cache(path: &Path) -> Result<File> {
    let mut f = File::create(path).map_err(io_err)?;
    let header = serde_json::to_string(&CacheHeader { etaforge_cache: CACHE_VERSION })
        .map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(f, "{header}").map_err(io_err)?;
    f.flush().map_err(io_err)?;
    Ok(f)
}

pub fn run_scan(opts: &ScanOptions) -> Result<ScanSummary> {
    let mut weights = Vec::with_capacity(opts.weights.len());
    for &k in &opts.weights {
        crate::search::check_weight(k)?;
        weights.push(k);
    }
    let mode = opts.mode();

    let mut done: BTreeMap<(u64, u32), ScanRow> = BTreeMap::new();
    let existing = if opts.resume { load_cache(&opts.cache)? } else { None };
    let cache_file = match existing {
        Some(lines) => {
            for l in lines {
                if l.version == CACHE_VERSION && l.mode == mode {
                    done.insert((l.row.n, l.row.k), l.row);
                }
            }
            OpenOptions::new().append(true).open(&opts.cache).map_err(io_err)?
        }
        None => fresh_cache(&opts.cache)?,
    };

    let levels = scan_levels(opts.min_n, opts.max_n);
    let wanted: Vec<(u64, i64)> =
        levels.iter().flat_map(|&n| weights.iter().map(move |&k| (n, k))).collect();
    let todo: Vec<(u64, i64)> =
        wanted.iter().copied().filter(|&(n, k)| !done.contains_key(&(n, k as u32))).collect();
    let reused = wanted.len() - todo.len();

    let (tx, rx) = mpsc::channel::<ScanRow>();
    let mode_owned = mode.to_string();
    let writer = std::thread::spawn(move || -> std::io::Result<Vec<ScanRow>> {
        let mut w = BufWriter::new(cache_file);
        let mut rows = Vec::new();
        for row in rx {
            let line = CacheLine { version: CACHE_VERSION, mode: mode_owned.clone(), row };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
            w.flush()?;
            rows.push(line.row);
        }
        Ok(rows)
    });

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let verify = opts.verify;
    let outcome: Result<()> = pool.install(|| {
        todo.par_iter().try_for_each_with(tx, |tx, &(n, k)| {
            let row = scan_cell(n, k, verify)?;
            tx.send(row).map_err(|_| Error::Precondition("cache writer stopped".into()))
        })
    });
    let fresh = writer
        .join()
        .map_err(|_| Error::Precondition("cache writer panicked".into()))?
        .map_err(io_err)?;
    outcome?;

    let computed = fresh.len();
    for row in fresh {
        done.insert((row.n, row.k), row);
    }
    let rows: Vec<ScanRow> = wanted
        .iter()
        .filter_map(|&(n, k)| done.get(&(n, k as u32)).cloned())
        .collect();
    write_rows(&opts.out, opts.format, &rows)?;
    let inconsistent = rows.iter().filter(|r| r.consistent == Some(false)).count();
    Ok(ScanSummary { rows, computed, reused, inconsistent })
}

pub fn write_rows(path: &Path, format: ScanFormat, rows: &[ScanRow]) -> Result<()> {
    let f = File::create(path).map_err(io_err)?;
    match format {
        ScanFormat::Jsonl => {
            let mut w = BufWriter::new(f);
            for row in rows {
                serde_json::to_writer(&mut w, row).map_err(|e| Error::Parse(e.to_string()))?;
                w.write_all(b"\n").map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
        }
        ScanFormat::Csv => {
            let mut w = csv::Writer::from_writer(f);
            let csv_err = |e: csv::Error| Error::Precondition(format!("csv: {e}"));
            w.write_record(["n", "k", "verdict", "hit_count", "h_N", "in_S", "rwhyp", "elapsed_ms"])
                .map_err(csv_err)?;
            let opt = |x: Option<String>| x.unwrap_or_default();
            for r in rows {
                w.write_record([
                    r.n.to_string(),
                    r.k.to_string(),
                    r.verdict.as_str().to_string(),
                    opt(r.hit_count.map(|c| c.to_string())),
                    r.h_n.to_string(),
                    r.in_s.to_string(),
                    opt(r.rwhyp.map(|b| b.to_string())),
                    r.elapsed_ms.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}
