//! On-disk cache of class sets, keyed by `(p, g)` and protected by a SHA-256 checksum.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::classes::{expected_mass, PolarizedClass, PolarizedClassSet};
use super::lattice::ClassLattice;
use super::matrix::QuatMatrix;
use crate::error::{Error, Result};
use crate::lattice::intlin::HnfBasis;
use crate::quat_core::{order_for_prime, Quaternion};

pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CachedClass {
    /// Doubled Gram matrix of the trace form on the lattice basis.
    pub gram: Vec<Vec<i64>>,
    /// Ambient hermitian matrix, entries as 4 rational coordinates.
    pub hermitian: Vec<Vec<[String; 4]>>,
    pub e: u64,
    /// Lattice basis in ambient coordinates, when it is not `O^g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<i64>,
}

#[derive(Serialize, Deserialize)]
struct Payload {
    version: u32,
    p: u64,
    g: usize,
    h: usize,
    classes: Vec<CachedClass>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    p: u64,
    g: usize,
    h: usize,
    classes: Vec<CachedClass>,
    checksum: String,
}

fn checksum(payload: &Payload) -> Result<String> {
    let bytes = serde_json::to_vec(payload)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn cache_path(dir: &Path, p: u64, g: usize) -> PathBuf {
    dir.join(format!("classes-p{p}-g{g}.json"))
}

/// The stored form of one class.
pub fn cached_class(c: &PolarizedClass) -> CachedClass {
    let lat = c.lattice();
    let g = lat.genus();
    let h = lat.hermitian();
    let hermitian = (0..g)
        .map(|r| (0..g).map(|s| h.get(r, s).to_strings()).collect())
        .collect();
    let (basis, scale) = if lat.is_free() {
        (None, None)
    } else {
        (Some(lat.basis().rows().to_vec()), Some(lat.scale()))
    };
    CachedClass { gram: lat.form().gram2().to_vec(), hermitian, e: c.aut_count(), basis, scale }
}

/// Serialized cache contents for a class set (the exact bytes written to disk).
pub fn to_json_string(set: &PolarizedClassSet) -> Result<String> {
    let payload = Payload {
        version: CACHE_VERSION,
        p: set.p(),
        g: set.g(),
        h: set.h(),
        classes: set.classes().iter().map(cached_class).collect(),
    };
    let checksum = checksum(&payload)?;
    let file = CacheFile {
        version: payload.version,
        p: payload.p,
        g: payload.g,
        h: payload.h,
        classes: payload.classes,
        checksum,
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

/// Rebuilds a class set from cache contents, verifying every stored invariant.
/// Returns `Ok(None)` for a cache written by a different format version.
pub fn from_json_str(s: &str, p: u64, g: usize) -> Result<Option<PolarizedClassSet>> {
    let integrity = |m: &str| Error::CacheIntegrity(m.to_string());
    let value: serde_json::Value = serde_json::from_str(s).map_err(|e| integrity(&format!("malformed JSON: {e}")))?;
    if value.get("version").and_then(|v| v.as_u64()) != Some(CACHE_VERSION as u64) {
        return Ok(None);
    }
    let file: CacheFile = serde_json::from_value(value).map_err(|e| integrity(&format!("malformed cache: {e}")))?;
    let payload = Payload { version: file.version, p: file.p, g: file.g, h: file.h, classes: file.classes };
    if checksum(&payload)? != file.checksum {
        return Err(integrity("checksum mismatch"));
    }
    if payload.p != p || payload.g != g || payload.h != payload.classes.len() {
        return Err(integrity("header does not match contents"));
    }
    let order = Arc::new(order_for_prime(p)?);
    let mut classes = Vec::with_capacity(payload.h);
    for c in &payload.classes {
        if c.hermitian.len() != g || c.hermitian.iter().any(|r| r.len() != g) {
            return Err(integrity("hermitian matrix has the wrong size"));
        }
        let entries = c
            .hermitian
            .iter()
            .flatten()
            .map(|q| Quaternion::from_strings(q))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| integrity("malformed hermitian entry"))?;
        let h = QuatMatrix::from_entries(g, g, entries);
        let lat = match (&c.basis, c.scale) {
            (None, None) => ClassLattice::free(order.clone(), h),
            (Some(b), Some(d)) => {
                let basis = HnfBasis::from_generators(b, 4 * g).ok_or_else(|| integrity("degenerate basis"))?;
                ClassLattice::new(order.clone(), h, basis, d)
            }
            _ => return Err(integrity("basis and scale must appear together")),
        }
        .map_err(|e| integrity(&format!("invalid class: {e}")))?;
        if lat.form().gram2() != c.gram.as_slice() {
            return Err(integrity("stored Gram matrix does not match the hermitian data"));
        }
        if c.e == 0 || c.e % 2 != 0 {
            return Err(integrity("automorphism count must be positive and even"));
        }
        classes.push(PolarizedClass::new(lat, c.e));
    }
    let set = PolarizedClassSet::from_parts(order, g, classes);
    if set.mass() != expected_mass(p, g) {
        return Err(integrity("automorphism counts do not add up to the mass"));
    }
    Ok(Some(set))
}

/// Loads the cached class set for `(p, g)`, if present and of the current format version.
pub fn load(dir: &Path, p: u64, g: usize) -> Result<Option<PolarizedClassSet>> {
    let path = cache_path(dir, p, g);
    match fs::read_to_string(&path) {
        Ok(s) => from_json_str(&s, p, g),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn save(dir: &Path, set: &PolarizedClassSet) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, set.p(), set.g());
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, to_json_string(set)?)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}
