//! On-disk coefficient cache.
//!
//! Little-endian layout:
//!
//! ```text
//! "FPOU"            4 bytes
//! version           u32 (= 1)
//! m, n              u64, u64
//! H, λ              f64, f64
//! inner, outer      u32, u32
//! entries           n(n+1)/2 × f64, row-major over the lower triangle
//! checksum          u64, FNV-1a over the entry bytes
//! ```

use std::fs::File;
use std::hash::Hasher;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use fnv::FnvHasher;

use crate::error::{format_err, Result};
use crate::kernel::{build_from_spec, CoefficientTable, QuadMeta, TableSpec};

pub const MAGIC: &[u8; 4] = b"FPOU";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8 + 8 + 4 + 4;
const CHUNK: usize = 1 << 16;

pub fn payload_checksum(entries: &[f64]) -> u64 {
    let mut h = FnvHasher::default();
    for e in entries {
        h.write(&e.to_le_bytes());
    }
    h.finish()
}

pub fn cache_write(table: &CoefficientTable, path: &Path) -> Result<u64> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&table.m.to_le_bytes())?;
    w.write_all(&(table.n as u64).to_le_bytes())?;
    w.write_all(&table.hurst.to_le_bytes())?;
    w.write_all(&table.lambda.to_le_bytes())?;
    w.write_all(&table.quad.inner_order.to_le_bytes())?;
    w.write_all(&table.quad.outer_order.to_le_bytes())?;
    let mut h = FnvHasher::default();
    for e in &table.entries {
        let b = e.to_le_bytes();
        h.write(&b);
        w.write_all(&b)?;
    }
    let sum = h.finish();
    w.write_all(&sum.to_le_bytes())?;
    w.flush()?;
    Ok(sum)
}

/// Header fields as stored in a cache file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheHeader {
    pub m: u64,
    pub n: u64,
    pub hurst: f64,
    pub lambda: f64,
    pub quad: QuadMeta,
}

fn parse_header(buf: &[u8; HEADER_LEN]) -> Result<CacheHeader> {
    if &buf[0..4] != MAGIC {
        return Err(format_err("magic", "not an FPOU coefficient cache"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(format_err("version", format!("expected {VERSION}, found {version}")));
    }
    Ok(CacheHeader {
        m: u64_at(8),
        n: u64_at(16),
        hurst: f64_at(24),
        lambda: f64_at(32),
        quad: QuadMeta {
            inner_order: u32_at(40),
            outer_order: u32_at(44),
        },
    })
}

fn check_against(header: &CacheHeader, spec: &TableSpec) -> Result<()> {
    let mismatch = |field: &str, want: String, got: String| {
        Err(format_err(field, format!("requested {want}, file has {got}")))
    };
    if header.m != spec.m {
        return mismatch("m", spec.m.to_string(), header.m.to_string());
    }
    if header.n != spec.n as u64 {
        return mismatch("n", spec.n.to_string(), header.n.to_string());
    }
    if header.hurst.to_bits() != spec.hurst.to_bits() {
        return mismatch("H", spec.hurst.to_string(), header.hurst.to_string());
    }
    if header.lambda.to_bits() != spec.lambda.to_bits() {
        return mismatch("lambda", spec.lambda.to_string(), header.lambda.to_string());
    }
    if header.quad.inner_order != spec.quad.inner_order {
        return mismatch(
            "inner_order",
            spec.quad.inner_order.to_string(),
            header.quad.inner_order.to_string(),
        );
    }
    if header.quad.outer_order != spec.quad.outer_order {
        return mismatch(
            "outer_order",
            spec.quad.outer_order.to_string(),
            header.quad.outer_order.to_string(),
        );
    }
    Ok(())
}

/// Read a cache file and check it against the requested table inputs.
/// Nothing is returned unless the whole payload and checksum are intact.
pub fn cache_read(path: &Path, spec: &TableSpec) -> Result<CoefficientTable> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; HEADER_LEN];
    r.read_exact(&mut head)
        .map_err(|_| format_err("header", "file shorter than the header"))?;
    let header = parse_header(&head)?;
    check_against(&header, spec)?;

    let n = header.n as usize;
    let count = n * (n + 1) / 2;
    let mut entries = Vec::with_capacity(count);
    let mut h = FnvHasher::default();
    let mut buf = vec![0u8; CHUNK * 8];
    while entries.len() < count {
        let take = (count - entries.len()).min(CHUNK);
        let bytes = &mut buf[..take * 8];
        r.read_exact(bytes)
            .map_err(|_| format_err("entries", format!("truncated after {} of {count} entries", entries.len())))?;
        h.write(bytes);
        entries.extend(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap())),
        );
    }
    let mut tail = [0u8; 8];
    r.read_exact(&mut tail)
        .map_err(|_| format_err("checksum", "missing trailing checksum"))?;
    let stored = u64::from_le_bytes(tail);
    if stored != h.finish() {
        return Err(format_err("checksum", "payload checksum mismatch"));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(format_err("entries", "trailing bytes after checksum"));
    }

    Ok(CoefficientTable {
        m: header.m,
        n,
        hurst: header.hurst,
        lambda: header.lambda,
        quad: header.quad,
        entries,
    })
}

/// Cache file name for a table spec.
pub fn cache_file_name(spec: &TableSpec) -> String {
    format!(
        "fpou_m{}_n{}_H{:016x}_L{:016x}_q{}-{}.bin",
        spec.m,
        spec.n,
        spec.hurst.to_bits(),
        spec.lambda.to_bits(),
        spec.quad.inner_order,
        spec.quad.outer_order
    )
}

/// Outcome of [`load_or_build`].
#[derive(Debug)]
pub struct CachedTable {
    pub table: CoefficientTable,
    pub path: Option<PathBuf>,
    pub checksum: u64,
    pub reused: bool,
}

/// Load the table from `dir` when a valid cache exists, otherwise build it
/// and (when `dir` is given) write the cache.
pub fn load_or_build(spec: &TableSpec, dir: Option<&Path>, max_n: usize) -> Result<CachedTable> {
    let Some(dir) = dir else {
        let table = build_from_spec(spec, max_n)?;
        let checksum = table.checksum();
        return Ok(CachedTable {
            table,
            path: None,
            checksum,
            reused: false,
        });
    };
    let path = dir.join(cache_file_name(spec));
    if path.exists() {
        if let Ok(table) = cache_read(&path, spec) {
            let checksum = table.checksum();
            return Ok(CachedTable {
                table,
                path: Some(path),
                checksum,
                reused: true,
            });
        }
    }
    let table = build_from_spec(spec, max_n)?;
    std::fs::create_dir_all(dir)?;
    let checksum = cache_write(&table, &path)?;
    Ok(CachedTable {
        table,
        path: Some(path),
        checksum,
        reused: false,
    })
}
