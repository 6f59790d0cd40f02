//! Content-addressed response cache: one JSON file per request digest.
//!
//! The key is the bundle's [`PromptBundle::cache_key`], so any change
//! to messages, model, or decoding parameters misses cleanly, while an
//! interrupted run resumes from whatever was already stored. Writes go
//! through a temp file and rename so a crash never leaves a truncated
//! record behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::template::PromptBundle;
use super::{PromptError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub request: PromptBundle,
    pub raw_text: String,
    pub normalized_text: String,
    /// Unix seconds at store time; informational only, never part of
    /// the key.
    pub timestamp: u64,
    pub provider_meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| PromptError::Cache {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn err_at(&self, path: &Path, e: impl std::fmt::Display) -> PromptError {
        PromptError::Cache {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Look up a record by key. A missing file is a miss; an unreadable
    /// or unparsable file is an error, loudly, since silent re-fetching
    /// would mask corruption.
    pub fn load(&self, key: &str) -> Result<Option<CacheRecord>> {
        let path = self.path_for(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(self.err_at(&path, e)),
        };
        let record = serde_json::from_str(&text).map_err(|e| self.err_at(&path, e))?;
        Ok(Some(record))
    }

    /// Store a record under its request's key.
    pub fn store(&self, record: &CacheRecord) -> Result<()> {
        let key = record.request.cache_key();
        let path = self.path_for(&key);
        let tmp = self.dir.join(format!(".{key}.tmp"));
        let json =
            serde_json::to_vec_pretty(record).map_err(|e| self.err_at(&path, e))?;
        std::fs::write(&tmp, &json).map_err(|e| self.err_at(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| self.err_at(&path, e))?;
        Ok(())
    }

    /// Keys of every stored record, sorted; reports embed these so a
    /// run's provenance is auditable.
    pub fn keys(&self) -> Result<Vec<String>> {
        let mut keys = Vec::new();
        let entries = std::fs::read_dir(&self.dir).map_err(|e| self.err_at(&self.dir, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| self.err_at(&self.dir, e))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if let Some(key) = name.strip_suffix(".json") {
                if !key.starts_with('.') {
                    keys.push(key.to_string());
                }
            }
        }
        keys.sort();
        Ok(keys)
    }
}

pub(crate) fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompting::{Message, Role};

    fn bundle(text: &str) -> PromptBundle {
        PromptBundle {
            messages: vec![
                Message {
                    role: Role::System,
                    text: "Fix.".into(),
                },
                Message {
                    role: Role::User,
                    text: text.into(),
                },
            ],
            model_id: "m1".into(),
            temperature: 0.0,
            max_output_tokens: 40,
        }
    }

    fn record(text: &str) -> CacheRecord {
        CacheRecord {
            request: bundle(text),
            raw_text: format!("\"{text}\"\n"),
            normalized_text: text.to_string(),
            timestamp: now_unix(),
            provider_meta: BTreeMap::from([("status".to_string(), "200".to_string())]),
        }
    }

    #[test]
    fn round_trip_preserves_texts_byte_identically() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let rec = record("कुछ पाठ");
        cache.store(&rec).unwrap();
        let loaded = cache.load(&rec.request.cache_key()).unwrap().unwrap();
        assert_eq!(loaded.raw_text, rec.raw_text);
        assert_eq!(loaded.normalized_text, rec.normalized_text);
        assert_eq!(loaded, rec);
    }

    #[test]
    fn missing_key_is_a_clean_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        assert_eq!(cache.load(&"0".repeat(64)).unwrap(), None);
    }

    #[test]
    fn corrupt_record_is_a_loud_error() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let rec = record("x");
        let key = rec.request.cache_key();
        std::fs::write(cache.path_for(&key), "{not json").unwrap();
        assert!(matches!(cache.load(&key), Err(PromptError::Cache { .. })));
    }

    #[test]
    fn keys_lists_stored_records_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let a = record("क");
        let b = record("ख");
        cache.store(&a).unwrap();
        cache.store(&b).unwrap();
        let mut expected = vec![a.request.cache_key(), b.request.cache_key()];
        expected.sort();
        assert_eq!(cache.keys().unwrap(), expected);
    }

    #[test]
    fn distinct_requests_use_distinct_files() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        cache.store(&record("एक")).unwrap();
        cache.store(&record("दो")).unwrap();
        assert_eq!(cache.keys().unwrap().len(), 2);
    }

    #[test]
    fn nested_cache_dir_is_created() {
        let dir = tempfile::tempdir().unwrap();
        let nested = dir.path().join("a/b/c");
        let cache = Cache::new(&nested).unwrap();
        cache.store(&record("x")).unwrap();
        assert!(nested.exists());
    }
}
