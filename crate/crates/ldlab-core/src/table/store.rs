//! Shared access to built tables: an in-memory map of `Arc` handles plus an
//! optional disk cache.
//!
//! Reads are lock-free once a level is resident. Disk writes go through an
//! exclusive lock file and a temp-file rename, so concurrent processes never
//! observe a partial file; a corrupt or unreadable cache entry is silently
//! rebuilt (and rewritten) rather than surfaced as an error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use super::{LaverTable, TableError, MAX_LEVEL};

pub struct TableStore {
    max_level: u8,
    cache_dir: Option<PathBuf>,
    tables: RwLock<BTreeMap<u8, Arc<LaverTable>>>,
}

impl TableStore {
    /// A store that builds on demand and keeps tables only in memory.
    pub fn in_memory() -> TableStore {
        TableStore { max_level: MAX_LEVEL, cache_dir: None, tables: RwLock::new(BTreeMap::new()) }
    }

    /// A store backed by `dir`: levels are loaded from disk when present and
    /// persisted (best-effort) after building.
    pub fn with_cache_dir(dir: impl Into<PathBuf>) -> TableStore {
        TableStore {
            max_level: MAX_LEVEL,
            cache_dir: Some(dir.into()),
            tables: RwLock::new(BTreeMap::new()),
        }
    }

    /// Lower the largest level this store will hand out.
    pub fn with_max_level(mut self, max_level: u8) -> TableStore {
        self.max_level = max_level.min(MAX_LEVEL);
        self
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    /// Levels currently resident in memory.
    pub fn resident_levels(&self) -> Vec<u8> {
        self.tables.read().unwrap().keys().copied().collect()
    }

    /// Get (load or build) the level-`k` table.
    pub fn get(&self, k: u8) -> Result<Arc<LaverTable>, TableError> {
        if k == 0 || k > self.max_level {
            return Err(TableError::InvalidLevel { level: k, max: self.max_level });
        }
        if let Some(t) = self.tables.read().unwrap().get(&k) {
            return Ok(t.clone());
        }
        let table = match self.try_load_cached(k) {
            Some(t) => t,
            None => {
                let t = LaverTable::build(k)?;
                self.try_persist(k, &t);
                t
            }
        };
        let arc = Arc::new(table);
        let mut w = self.tables.write().unwrap();
        Ok(w.entry(k).or_insert(arc).clone())
    }

    fn cache_path(&self, k: u8) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(format!("laver-{k:02}.ldt")))
    }

    fn try_load_cached(&self, k: u8) -> Option<LaverTable> {
        let path = self.cache_path(k)?;
        match LaverTable::load(&path) {
            Ok(t) if t.level() == k => Some(t),
            _ => None,
        }
    }

    /// Best-effort persist: any I/O failure (including losing the writer
    /// lock to another process) leaves the in-memory result unaffected.
    fn try_persist(&self, k: u8, t: &LaverTable) {
        let Some(path) = self.cache_path(k) else { return };
        let Some(dir) = self.cache_dir.as_ref() else { return };
        if std::fs::create_dir_all(dir).is_err() {
            return;
        }
        let lock_path = dir.join(format!("laver-{k:02}.lock"));
        let Ok(_lock) =
            std::fs::OpenOptions::new().write(true).create_new(true).open(&lock_path)
        else {
            return;
        };
        let tmp = dir.join(format!("laver-{k:02}.tmp-{}", std::process::id()));
        let wrote = std::fs::write(&tmp, t.to_bytes()).is_ok()
            && std::fs::rename(&tmp, &path).is_ok();
        if !wrote {
            let _ = std::fs::remove_file(&tmp);
        }
        let _ = std::fs::remove_file(&lock_path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_shares_one_handle_per_level() {
        let store = TableStore::in_memory();
        let a = store.get(5).unwrap();
        let b = store.get(5).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(store.resident_levels(), vec![5]);
    }

    #[test]
    fn respects_max_level() {
        let store = TableStore::in_memory().with_max_level(4);
        assert!(store.get(4).is_ok());
        assert!(store.get(5).is_err());
        assert!(store.get(0).is_err());
    }

    #[test]
    fn disk_cache_roundtrip_and_corruption_recovery() {
        let dir = tempfile::tempdir().unwrap();
        let expected = LaverTable::build(4).unwrap();
        {
            let store = TableStore::with_cache_dir(dir.path());
            assert_eq!(*store.get(4).unwrap(), expected);
        }
        let path = dir.path().join("laver-04.ldt");
        assert!(path.exists(), "table should have been persisted");

        // fresh store loads the cached file
        let store = TableStore::with_cache_dir(dir.path());
        assert_eq!(*store.get(4).unwrap(), expected);

        // corrupt cache entries are rebuilt, not trusted
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        std::fs::write(&path, &bytes).unwrap();
        let store = TableStore::with_cache_dir(dir.path());
        assert_eq!(*store.get(4).unwrap(), expected);
    }

    #[test]
    fn concurrent_getters_converge() {
        let store = Arc::new(TableStore::in_memory());
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let store = store.clone();
                std::thread::spawn(move || store.get(6).unwrap())
            })
            .collect();
        let tables: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let canonical = store.get(6).unwrap();
        for t in tables {
            assert_eq!(*t, *canonical);
        }
    }

    #[test]
    fn stale_lock_only_skips_persistence() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("laver-03.lock"), b"").unwrap();
        let store = TableStore::with_cache_dir(dir.path());
        // still serves the table, just doesn't write the cache file
        assert_eq!(store.get(3).unwrap().level(), 3);
        assert!(!dir.path().join("laver-03.ldt").exists());
    }
}
