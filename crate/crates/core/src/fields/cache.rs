//! Binary cache of built towers.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "GPCX"  magic
//! u8      format version (1)
//! u64 p, u32 t, u64 n, u64 r
//! u64 × (t·n·r + 1)   modulus coefficients, ascending
//! u64     primitive element handle
//! u8      1 if log tables follow, else 0
//! u32 × N       log table    (N = p^{tnr})
//! u32 × (N-1)   antilog table
//! ```
//!
//! Loading re-verifies the modulus, the primitive element and the tables, so a
//! cached tower is indistinguishable from a freshly built one.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{fp_poly, FieldTower, TowerConfig, TowerParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"GPCX";
const VERSION: u8 = 1;

pub fn file_name(params: &TowerParams) -> String {
    format!(
        "tower_p{}_t{}_n{}_r{}.gpcx",
        params.p, params.t, params.n, params.r
    )
}

pub fn write(tower: &FieldTower, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let params = tower.params();
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&params.p.to_le_bytes())?;
    w.write_all(&params.t.to_le_bytes())?;
    w.write_all(&params.n.to_le_bytes())?;
    w.write_all(&params.r.to_le_bytes())?;
    for c in tower.modulus() {
        w.write_all(&c.to_le_bytes())?;
    }
    w.write_all(&tower.primitive_element().0.to_le_bytes())?;
    match tower.log_tables() {
        Some(t) => {
            w.write_all(&[1])?;
            for v in t.log.iter().chain(&t.exp) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        None => w.write_all(&[0])?,
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Cache(format!("truncated file: {e}")))?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn u32_vec(&mut self, len: usize) -> Result<Vec<u32>> {
        let mut raw = vec![0u8; len * 4];
        self.inner
            .read_exact(&mut raw)
            .map_err(|e| Error::Cache(format!("truncated table: {e}")))?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn read(path: &Path, config: TowerConfig) -> Result<FieldTower> {
    let mut r = Reader {
        inner: BufReader::new(fs::File::open(path)?),
    };
    if &r.bytes::<4>()? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let (p, t, n, rr) = (r.u64()?, r.u32()?, r.u64()?, r.u64()?);
    let params = TowerParams::new(p, t, n, rr)?;
    let degree = params.degree() as usize;
    let modulus = (0..=degree).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    if modulus[degree] != 1 || modulus.iter().any(|&c| c >= p) {
        return Err(Error::Cache("modulus is not a monic polynomial over F_p".into()));
    }
    if !fp_poly::is_irreducible(&fp_poly::FpPoly::new(modulus.clone()), p) {
        return Err(Error::Cache("modulus is reducible".into()));
    }
    let primitive = r.u64()?;
    let tables = match r.u8()? {
        0 => None,
        1 => {
            let order = params.order() as usize;
            let log = r.u32_vec(order)?;
            let exp = r.u32_vec(order - 1)?;
            Some((log, exp))
        }
        other => return Err(Error::Cache(format!("bad table flag {other}"))),
    };
    FieldTower::assemble(params, modulus, Some(primitive), tables, config)
}

/// Loads the tower from `dir` if a cache file exists, otherwise builds it and
/// writes the cache. A corrupt cache file is rebuilt and overwritten.
pub fn load_or_build(dir: &Path, params: TowerParams, config: TowerConfig) -> Result<FieldTower> {
    let path: PathBuf = dir.join(file_name(&params));
    if path.exists() {
        if let Ok(tower) = read(&path, config) {
            if tower.params() == &params {
                return Ok(tower);
            }
        }
    }
    let tower = FieldTower::build(params, config)?;
    fs::create_dir_all(dir)?;
    write(&tower, &path)?;
    Ok(tower)
}
