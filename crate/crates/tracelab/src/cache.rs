//! Binary cache files for field contexts and weight tables.
//!
//! Context cache ("TLFF"): magic, u8 version, u64 p, u64 g, then p u32
//! dlog entries, all little-endian. Weight-table cache ("TLWT"): magic,
//! u8 version, u64 p, u64 spec hash (FNV-1a of the canonical
//! s-expression), then p (f64, f64) pairs.
//!
//! The cache directory comes from TRACELAB_CACHE, default
//! "./.tracelab-cache".

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ffield::PrimeFieldContext;
use crate::weights::{WeightSpec, WeightTable};

const FF_MAGIC: &[u8; 4] = b"TLFF";
const WT_MAGIC: &[u8; 4] = b"TLWT";
const VERSION: u8 = 1;

pub fn cache_dir() -> PathBuf {
    std::env::var_os("TRACELAB_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("./.tracelab-cache"))
}

fn context_path(dir: &Path, p: u32) -> PathBuf {
    dir.join(format!("ctx-{p}.tlff"))
}

fn table_path(dir: &Path, p: u32, spec_hash: u64) -> PathBuf {
    dir.join(format!("wt-{p}-{spec_hash:016x}.tlwt"))
}

pub fn write_context(dir: &Path, ctx: &PrimeFieldContext) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = context_path(dir, ctx.p());
    let mut buf = Vec::with_capacity(21 + 4 * ctx.p() as usize);
    buf.extend_from_slice(FF_MAGIC);
    buf.push(VERSION);
    buf.extend_from_slice(&(ctx.p() as u64).to_le_bytes());
    buf.extend_from_slice(&(ctx.primitive_root() as u64).to_le_bytes());
    for &d in ctx.dlog_table() {
        buf.extend_from_slice(&d.to_le_bytes());
    }
    fs::write(&path, buf)?;
    Ok(path)
}

pub fn read_context(dir: &Path, p: u32) -> Result<Option<PrimeFieldContext>> {
    let path = context_path(dir, p);
    if !path.exists() {
        return Ok(None);
    }
    let mut f = fs::File::open(&path)?;
    let mut header = [0u8; 21];
    f.read_exact(&mut header)?;
    if &header[..4] != FF_MAGIC || header[4] != VERSION {
        return Err(Error::parse(format!(
            "bad context cache header in {}",
            path.display()
        )));
    }
    let pf = u64::from_le_bytes(header[5..13].try_into().unwrap());
    let g = u64::from_le_bytes(header[13..21].try_into().unwrap());
    if pf != p as u64 {
        return Err(Error::parse(format!(
            "context cache {} holds p = {pf}, expected {p}",
            path.display()
        )));
    }
    // dlog entries are present for integrity but the tables are rebuilt
    // from g (the walk is O(p) and also rebuilds pow/inv/unity)
    let ctx = PrimeFieldContext::from_root(p, g as u32);
    let mut stored = vec![0u8; 4 * p as usize];
    f.read_exact(&mut stored)?;
    for (x, chunk) in stored.chunks_exact(4).enumerate() {
        let d = u32::from_le_bytes(chunk.try_into().unwrap());
        if x > 0 && ctx.dlog(x as u32) != d {
            return Err(Error::parse(format!(
                "context cache {} is corrupt at x = {x}",
                path.display()
            )));
        }
    }
    Ok(Some(ctx))
}

/// Builds a context, consulting and populating the cache directory.
pub fn build_context_cached(p: u64, dir: &Path) -> Result<PrimeFieldContext> {
    if p < 3 || p >= (1 << 31) {
        return Err(Error::validation(format!(
            "context requires a prime 3 <= p < 2^31, got {p}"
        )));
    }
    if let Some(ctx) = read_context(dir, p as u32)? {
        return Ok(ctx);
    }
    let ctx = PrimeFieldContext::new(p)?;
    write_context(dir, &ctx)?;
    Ok(ctx)
}

pub fn write_table(dir: &Path, table: &WeightTable) -> Result<PathBuf> {
    let spec = table.spec.as_ref().ok_or_else(|| {
        Error::validation("only constructor-built tables (with a spec) are cacheable")
    })?;
    fs::create_dir_all(dir)?;
    let path = table_path(dir, table.p, spec.hash());
    let mut buf = Vec::with_capacity(21 + 16 * table.values.len());
    buf.extend_from_slice(WT_MAGIC);
    buf.push(VERSION);
    buf.extend_from_slice(&(table.p as u64).to_le_bytes());
    buf.extend_from_slice(&spec.hash().to_le_bytes());
    for v in &table.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(&path, buf)?;
    Ok(path)
}

pub fn read_table(dir: &Path, p: u32, spec: &WeightSpec) -> Result<Option<WeightTable>> {
    let path = table_path(dir, p, spec.hash());
    if !path.exists() {
        return Ok(None);
    }
    let mut f = fs::File::open(&path)?;
    let mut header = [0u8; 21];
    f.read_exact(&mut header)?;
    if &header[..4] != WT_MAGIC || header[4] != VERSION {
        return Err(Error::parse(format!(
            "bad table cache header in {}",
            path.display()
        )));
    }
    let pf = u64::from_le_bytes(header[5..13].try_into().unwrap());
    let hash = u64::from_le_bytes(header[13..21].try_into().unwrap());
    if pf != p as u64 || hash != spec.hash() {
        return Err(Error::parse(format!(
            "table cache {} does not match (p, spec)",
            path.display()
        )));
    }
    let mut raw = vec![0u8; 16 * p as usize];
    f.read_exact(&mut raw)?;
    let values: Vec<Complex64> = raw
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(Some(WeightTable {
        p,
        values,
        conductor_estimate: crate::weights::conductor_estimate(spec, p),
        exceptional: None,
        spec: Some(spec.clone()),
    }))
}

/// Evaluates a weight, consulting and populating the table cache.
pub fn bulk_eval_cached(
    ctx: &PrimeFieldContext,
    spec: &WeightSpec,
    dir: &Path,
) -> Result<WeightTable> {
    if let Some(t) = read_table(dir, ctx.p(), spec)? {
        return Ok(t);
    }
    let t = crate::weights::bulk_eval(ctx, spec)?;
    write_table(dir, &t)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::bulk_eval;

    #[test]
    fn context_roundtrip_bit_identical() {
        let dir = std::env::temp_dir().join(format!("tracelab-test-{}", std::process::id()));
        let ctx = PrimeFieldContext::new(101).unwrap();
        write_context(&dir, &ctx).unwrap();
        let back = read_context(&dir, 101).unwrap().unwrap();
        assert_eq!(back.primitive_root(), ctx.primitive_root());
        for x in 1..101u32 {
            assert_eq!(back.dlog(x), ctx.dlog(x));
            assert_eq!(back.inv(x), ctx.inv(x));
        }
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn table_roundtrip_bit_identical() {
        let dir = std::env::temp_dir().join(format!("tracelab-test-wt-{}", std::process::id()));
        let ctx = PrimeFieldContext::new(101).unwrap();
        let spec = WeightSpec::HyperKloosterman(2);
        let t = bulk_eval(&ctx, &spec).unwrap();
        write_table(&dir, &t).unwrap();
        let back = read_table(&dir, 101, &spec).unwrap().unwrap();
        assert_eq!(back.values.len(), t.values.len());
        for (a, b) in t.values.iter().zip(&back.values) {
            // bit-identical round trip
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        // different spec misses
        assert!(read_table(&dir, 101, &WeightSpec::HyperKloosterman(3))
            .unwrap()
            .is_none());
        let _ = fs::remove_dir_all(&dir);
    }
}
