//! On-disk cache of expensive operator expansions.
//!
//! Each entry is a JSON file named by its key. The key hashes the entry name
//! together with the cache version, so changing the format or the operator
//! tables turns old entries into misses.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::{System, ALL_TABLES};
use crate::diffop::{DiffOp, DiffOpError, DIFFOP_FORMAT_VERSION};

pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt cache entry {0}: {1}")]
    Corrupt(String, String),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub name: String,
    pub version: String,
    /// sha256 of `payload`.
    pub integrity: String,
    /// Canonical operator text.
    pub payload: String,
}

/// How a value was obtained by [`OperatorCache::get_or_compute`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
    /// A corrupt entry was found, discarded and rebuilt.
    Recomputed(String),
}

fn sha256_hex(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Digest of every operator table, including the printed forms of amended rows.
pub fn catalog_fingerprint() -> String {
    let mut parts = Vec::new();
    for t in ALL_TABLES {
        parts.push(t.name);
        parts.extend(t.rows.iter().copied());
        for a in t.amendments {
            parts.push(a.printed);
        }
    }
    sha256_hex(&parts)
}

pub fn default_version() -> String {
    format!("{CACHE_FORMAT_VERSION}.{DIFFOP_FORMAT_VERSION}.{}", &catalog_fingerprint()[..16])
}

#[derive(Debug, Clone)]
pub struct OperatorCache {
    dir: PathBuf,
    version: String,
}

impl OperatorCache {
    pub fn open(dir: &Path) -> Result<Self, CacheError> {
        Self::with_version(dir, &default_version())
    }

    pub fn with_version(dir: &Path, version: &str) -> Result<Self, CacheError> {
        fs::create_dir_all(dir)?;
        Ok(OperatorCache { dir: dir.to_path_buf(), version: version.to_string() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(&self, name: &str) -> String {
        sha256_hex(&[name, &self.version])
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}.json", self.key(name)))
    }

    pub fn store(&self, name: &str, system: System, op: &DiffOp) -> Result<CacheEntry, CacheError> {
        let payload = op.to_canonical_text(&system.var_names());
        let entry = CacheEntry {
            key: self.key(name),
            name: name.to_string(),
            version: self.version.clone(),
            integrity: sha256_hex(&[&payload]),
            payload,
        };
        let json = serde_json::to_string(&entry).map_err(|e| CacheError::Corrupt(name.into(), e.to_string()))?;
        let tmp = self.path(name).with_extension("tmp");
        fs::write(&tmp, json)?;
        fs::rename(&tmp, self.path(name))?;
        Ok(entry)
    }

    /// `Ok(None)` on a miss, including entries written under another version.
    pub fn load(&self, name: &str) -> Result<Option<DiffOp>, CacheError> {
        let text = match fs::read_to_string(self.path(name)) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |m: String| CacheError::Corrupt(name.to_string(), m);
        let entry: CacheEntry = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if entry.version != self.version || entry.name != name {
            return Ok(None);
        }
        if sha256_hex(&[&entry.payload]) != entry.integrity {
            return Err(corrupt("integrity hash mismatch".into()));
        }
        let parsed = DiffOp::parse_canonical_text(&entry.payload).map_err(|e| corrupt(e.to_string()))?;
        Ok(Some(parsed.op))
    }

    /// Every entry file in the directory, parsed and integrity-checked.
    pub fn entries(&self) -> Result<Vec<(PathBuf, Result<CacheEntry, CacheError>)>, CacheError> {
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        Ok(paths
            .into_iter()
            .map(|p| {
                let label = p.display().to_string();
                let corrupt = |m: String| CacheError::Corrupt(label.clone(), m);
                let checked = fs::read_to_string(&p)
                    .map_err(CacheError::from)
                    .and_then(|t| serde_json::from_str::<CacheEntry>(&t).map_err(|e| corrupt(e.to_string())))
                    .and_then(|e| {
                        if sha256_hex(&[&e.payload]) != e.integrity {
                            Err(corrupt("integrity hash mismatch".into()))
                        } else {
                            DiffOp::parse_canonical_text(&e.payload).map_err(|x| corrupt(x.to_string()))?;
                            Ok(e)
                        }
                    });
                (p, checked)
            })
            .collect())
    }

    /// Removes every entry file; returns how many were removed.
    pub fn clear(&self) -> Result<usize, CacheError> {
        let mut n = 0;
        for e in fs::read_dir(&self.dir)? {
            let p = e?.path();
            if p.extension().is_some_and(|x| x == "json" || x == "tmp") {
                fs::remove_file(&p)?;
                n += 1;
            }
        }
        Ok(n)
    }

    pub fn is_current(&self, entry: &CacheEntry) -> bool {
        entry.version == self.version && entry.key == self.key(&entry.name)
    }

    pub fn get_or_compute<E>(
        &self,
        name: &str,
        system: System,
        compute: impl FnOnce() -> Result<DiffOp, E>,
    ) -> Result<(DiffOp, CacheOutcome), E>
    where
        E: From<CacheError>,
    {
        let outcome = match self.load(name) {
            Ok(Some(op)) => return Ok((op, CacheOutcome::Hit)),
            Ok(None) => CacheOutcome::Miss,
            Err(CacheError::Io(e)) => return Err(CacheError::Io(e).into()),
            Err(e) => CacheOutcome::Recomputed(e.to_string()),
        };
        let op = compute()?;
        self.store(name, system, &op)?;
        Ok((op, outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn round_trip_tamper_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let cache = OperatorCache::open(dir.path()).unwrap();
        let ix = catalog::b2_ix();
        let sq = ix.compose(&ix).unwrap();
        assert_eq!(cache.load("b2:Ix^2").unwrap(), None);
        cache.store("b2:Ix^2", System::B2, &sq).unwrap();
        assert_eq!(cache.load("b2:Ix^2").unwrap(), Some(sq.clone()));

        let bumped = OperatorCache::with_version(dir.path(), "0.0.test").unwrap();
        assert_eq!(bumped.load("b2:Ix^2").unwrap(), None);

        let path = cache.path("b2:Ix^2");
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replacen(" : ", " : 7", 1)).unwrap();
        assert!(matches!(cache.load("b2:Ix^2"), Err(CacheError::Corrupt(..))));
        let (op, outcome) =
            cache.get_or_compute::<CacheError>("b2:Ix^2", System::B2, || Ok(ix.compose(&ix)?)).unwrap();
        assert_eq!(op, sq);
        assert!(matches!(outcome, CacheOutcome::Recomputed(_)));
        let (_, outcome) = cache.get_or_compute::<CacheError>("b2:Ix^2", System::B2, || unreachable!()).unwrap();
        assert_eq!(outcome, CacheOutcome::Hit);

        let listed = cache.entries().unwrap();
        assert_eq!(listed.len(), 1);
        assert!(cache.is_current(listed[0].1.as_ref().unwrap()));
        assert!(!bumped.is_current(listed[0].1.as_ref().unwrap()));
        assert_eq!(cache.clear().unwrap(), 1);
        assert!(cache.entries().unwrap().is_empty());
    }
}
