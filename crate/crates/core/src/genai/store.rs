use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{AssetRecord, GenError, GenKind};
use crate::clock::Timestamp;

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Sidecar stored next to each payload as `<key>.meta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetMeta {
    pub kind: GenKind,
    pub media_type: String,
    pub created_at: Timestamp,
}

/// Directory-backed store: payload in `<key>`, metadata in `<key>.meta`.
///
/// The meta file is written last, so its presence marks a complete record.
#[derive(Debug, Clone)]
pub struct AssetStore {
    dir: PathBuf,
}

pub fn is_asset_key(key: &str) -> bool {
    key.len() == 64 && key.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

impl AssetStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, GenError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(AssetStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn checked_paths(&self, key: &str) -> Result<(PathBuf, PathBuf), GenError> {
        if !is_asset_key(key) {
            return Err(GenError::NotFound(key.to_string()));
        }
        Ok((self.dir.join(key), self.dir.join(format!("{key}.meta"))))
    }

    pub fn put(&self, record: &AssetRecord) -> Result<(), GenError> {
        let (data_path, meta_path) = self.checked_paths(&record.key)?;
        let meta = AssetMeta {
            kind: record.kind,
            media_type: record.media_type.clone(),
            created_at: record.created_at,
        };
        let meta_json = serde_json::to_vec(&meta).map_err(|e| GenError::Cache(e.to_string()))?;
        self.write_atomic(&data_path, &record.bytes)?;
        self.write_atomic(&meta_path, &meta_json)?;
        Ok(())
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), GenError> {
        let tmp = self.dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        drop(file);
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn meta(&self, key: &str) -> Result<AssetMeta, GenError> {
        let (_, meta_path) = self.checked_paths(key)?;
        let text = match fs::read(&meta_path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(GenError::NotFound(key.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        serde_json::from_slice(&text).map_err(|e| GenError::Cache(format!("{key}.meta: {e}")))
    }

    pub fn get(&self, key: &str) -> Result<AssetRecord, GenError> {
        let meta = self.meta(key)?;
        let (data_path, _) = self.checked_paths(key)?;
        let bytes = match fs::read(&data_path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(GenError::NotFound(key.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        Ok(AssetRecord {
            key: key.to_string(),
            kind: meta.kind,
            media_type: meta.media_type,
            bytes,
            created_at: meta.created_at,
        })
    }

    pub fn keys(&self) -> Result<Vec<String>, GenError> {
        let mut keys = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            if let Some(key) = name.to_str().and_then(|n| n.strip_suffix(".meta")) {
                if is_asset_key(key) {
                    keys.push(key.to_string());
                }
            }
        }
        keys.sort();
        Ok(keys)
    }

    /// Removes every record created strictly before `older_than`.
    pub fn purge(&self, older_than: Timestamp) -> Result<usize, GenError> {
        let mut removed = 0;
        for key in self.keys()? {
            let meta = match self.meta(&key) {
                Ok(m) => m,
                Err(GenError::NotFound(_)) => continue,
                Err(e) => return Err(e),
            };
            if meta.created_at < older_than {
                let (data_path, meta_path) = self.checked_paths(&key)?;
                fs::remove_file(&meta_path)?;
                match fs::remove_file(&data_path) {
                    Ok(()) => {}
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                    Err(e) => return Err(e.into()),
                }
                removed += 1;
            }
        }
        Ok(removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn rejects_non_key_paths() {
        let dir = tempfile::tempdir().unwrap();
        let store = AssetStore::open(dir.path()).unwrap();
        assert!(matches!(store.get("../etc/passwd"), Err(GenError::NotFound(_))));
        assert!(matches!(store.get(&"A".repeat(64)), Err(GenError::NotFound(_))));
    }

    #[test]
    fn sidecar_layout() {
        let dir = tempfile::tempdir().unwrap();
        let store = AssetStore::open(dir.path()).unwrap();
        let key = "a".repeat(64);
        let record = AssetRecord {
            key: key.clone(),
            kind: GenKind::Text,
            media_type: "text/plain".into(),
            bytes: b"hello".to_vec(),
            created_at: chrono::Utc.with_ymd_and_hms(2024, 5, 1, 0, 0, 0).unwrap(),
        };
        store.put(&record).unwrap();
        assert_eq!(fs::read(dir.path().join(&key)).unwrap(), b"hello");
        let meta: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join(format!("{key}.meta"))).unwrap())
                .unwrap();
        assert_eq!(meta["kind"], "text");
        assert_eq!(meta["media_type"], "text/plain");
        assert_eq!(meta["created_at"], "2024-05-01T00:00:00Z");
        assert_eq!(store.get(&key).unwrap(), record);
        assert_eq!(store.keys().unwrap(), vec![key]);
    }
}
