//! File-backed, versioned profile store.
//!
//! Layout under the store directory:
//!
//! ```text
//! snapshots/00000001.json   one canonical snapshot per publish
//! CURRENT                   id of the latest published snapshot
//! verdicts.jsonl            append-only log of recorded claim verdicts
//! ```
//!
//! A publish writes the snapshot to a temporary file, syncs it, renames it
//! into place and only then swaps `CURRENT` the same way. A crash at any
//! point leaves the previous `CURRENT` pointing at a complete snapshot.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};
use crate::verdict::{ClaimVerdict, MediaProfile};

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;
const CURRENT: &str = "CURRENT";
const SNAPSHOTS: &str = "snapshots";
const VERDICTS: &str = "verdicts.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSnapshot {
    pub format_version: u32,
    pub snapshot_id: u64,
    pub created_at: i64,
    pub profiles: BTreeMap<String, MediaProfile>,
}

impl ProfileSnapshot {
    pub fn empty() -> Self {
        ProfileSnapshot {
            format_version: SNAPSHOT_FORMAT_VERSION,
            snapshot_id: 0,
            created_at: 0,
            profiles: BTreeMap::new(),
        }
    }
}

/// Single writer, many readers. Readers hold an `Arc` to an immutable
/// snapshot; a publish swaps the pointer.
#[derive(Debug)]
pub struct ProfileStore {
    dir: PathBuf,
    current: RwLock<Arc<ProfileSnapshot>>,
    writer: Mutex<()>,
}

pub fn snapshot_path(dir: &Path, id: u64) -> PathBuf {
    dir.join(SNAPSHOTS).join(format!("{id:08}.json"))
}

/// Reads and validates one snapshot file.
pub fn load_snapshot_file(path: &Path) -> Result<ProfileSnapshot> {
    let corrupt = |message: String| Error::CorruptSnapshot {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| corrupt(e.to_string()))?;
    let snapshot: ProfileSnapshot = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if snapshot.format_version != SNAPSHOT_FORMAT_VERSION {
        return Err(corrupt(format!("unsupported format version {}", snapshot.format_version)));
    }
    for profile in snapshot.profiles.values() {
        profile.validate().map_err(|e| corrupt(e.to_string()))?;
    }
    Ok(snapshot)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    if let Some(parent) = path.parent() {
        // directory fsync makes the rename durable; not all platforms allow it
        if let Ok(d) = File::open(parent) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

impl ProfileStore {
    /// Opens (or initializes) a store directory and loads the snapshot named
    /// by `CURRENT`. A missing or empty directory yields an empty store.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join(SNAPSHOTS)).map_err(|e| Error::io(&dir, e))?;
        let pointer = dir.join(CURRENT);
        let snapshot = if pointer.exists() {
            let text = fs::read_to_string(&pointer).map_err(|e| Error::io(&pointer, e))?;
            let id: u64 = text.trim().parse().map_err(|_| Error::CorruptSnapshot {
                path: pointer.clone(),
                message: format!("bad snapshot id `{}`", text.trim()),
            })?;
            let snapshot = load_snapshot_file(&snapshot_path(&dir, id))?;
            if snapshot.snapshot_id != id {
                return Err(Error::CorruptSnapshot {
                    path: snapshot_path(&dir, id),
                    message: format!("file holds snapshot {}", snapshot.snapshot_id),
                });
            }
            snapshot
        } else {
            ProfileSnapshot::empty()
        };
        Ok(ProfileStore {
            dir,
            current: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn get_snapshot(&self) -> Arc<ProfileSnapshot> {
        Arc::clone(&self.current.read().unwrap_or_else(|p| p.into_inner()))
    }

    /// Inserts or replaces the profile for its domain and publishes a new
    /// snapshot. The stored `profile_version` only advances when the content
    /// (ignoring `created_at` and `profile_version`) differs from the prior
    /// profile; an unchanged profile keeps its prior record.
    pub fn put_profile(&self, profile: MediaProfile, now: i64) -> Result<u64> {
        self.put_profiles(std::iter::once(profile), now)
    }

    /// Like [`put_profile`](Self::put_profile) for several profiles under a
    /// single published snapshot.
    pub fn put_profiles<I>(&self, profiles: I, now: i64) -> Result<u64>
    where
        I: IntoIterator<Item = MediaProfile>,
    {
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let prior = self.get_snapshot();
        let mut next = ProfileSnapshot {
            format_version: SNAPSHOT_FORMAT_VERSION,
            snapshot_id: prior.snapshot_id + 1,
            created_at: now,
            profiles: prior.profiles.clone(),
        };
        for mut profile in profiles {
            profile.validate()?;
            match prior.profiles.get(&profile.domain) {
                Some(old) if old.same_content(&profile) => {
                    profile = old.clone();
                }
                Some(old) => profile.profile_version = old.profile_version + 1,
                None => profile.profile_version = 1,
            }
            next.profiles.insert(profile.domain.clone(), profile);
        }
        let bytes = canonical::to_string(&next)?;
        write_atomic(&snapshot_path(&self.dir, next.snapshot_id), bytes.as_bytes())?;
        write_atomic(&self.dir.join(CURRENT), format!("{}\n", next.snapshot_id).as_bytes())?;
        let id = next.snapshot_id;
        *self.current.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(next);
        Ok(id)
    }

    /// Appends a verdict to the verdict log.
    pub fn record_verdict(&self, verdict: &ClaimVerdict) -> Result<()> {
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.dir.join(VERDICTS);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let line = canonical::to_line(verdict)? + "\n";
        file.write_all(line.as_bytes()).map_err(|e| Error::io(&path, e))?;
        file.sync_all().map_err(|e| Error::io(&path, e))
    }

    pub fn verdicts(&self) -> Result<Vec<ClaimVerdict>> {
        let path = self.dir.join(VERDICTS);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| Ok(serde_json::from_str(l)?))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reliability::ModelMode;

    fn profile(domain: &str, reliability: f64) -> MediaProfile {
        MediaProfile {
            domain: domain.into(),
            reliability,
            model_mode: ModelMode::Heuristic,
            propaganda_degree: 0.1,
            flagged_article_fraction: 0.0,
            ideology: Some("center".into()),
            frames: None,
            hyper_partisanship: None,
            article_count: 3,
            channel_availability: BTreeMap::new(),
            channel_scores: BTreeMap::new(),
            created_at: 100,
            profile_version: 1,
        }
    }

    #[test]
    fn empty_store() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        let snap = store.get_snapshot();
        assert_eq!(snap.snapshot_id, 0);
        assert!(snap.profiles.is_empty());
    }

    #[test]
    fn put_and_versions() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        assert_eq!(store.put_profile(profile("a.com", 0.5), 1).unwrap(), 1);
        assert_eq!(store.get_snapshot().profiles["a.com"].profile_version, 1);

        let mut again = profile("a.com", 0.5);
        again.created_at = 999;
        assert_eq!(store.put_profile(again, 2).unwrap(), 2);
        let snap = store.get_snapshot();
        assert_eq!(snap.profiles["a.com"].profile_version, 1);
        assert_eq!(snap.profiles["a.com"].created_at, 100);

        store.put_profile(profile("a.com", 0.6), 3).unwrap();
        assert_eq!(store.get_snapshot().profiles["a.com"].profile_version, 2);
    }

    #[test]
    fn reload_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        store.put_profile(profile("a.com", 0.5), 1).unwrap();
        store.put_profile(profile("b.org", 0.25), 2).unwrap();
        let before = store.get_snapshot();
        let reopened = ProfileStore::open(dir.path()).unwrap();
        assert_eq!(*reopened.get_snapshot(), *before);
        assert_eq!(
            canonical::to_string(&*reopened.get_snapshot()).unwrap(),
            fs::read_to_string(snapshot_path(dir.path(), 2)).unwrap()
        );
    }

    #[test]
    fn truncated_snapshot_detected() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        store.put_profile(profile("a.com", 0.5), 1).unwrap();
        store.put_profile(profile("a.com", 0.7), 2).unwrap();
        let latest = snapshot_path(dir.path(), 2);
        let text = fs::read_to_string(&latest).unwrap();
        fs::write(&latest, &text[..text.len() / 2]).unwrap();

        match ProfileStore::open(dir.path()) {
            Err(Error::CorruptSnapshot { path, .. }) => assert_eq!(path, latest),
            other => panic!("unexpected {other:?}"),
        }
        let previous = load_snapshot_file(&snapshot_path(dir.path(), 1)).unwrap();
        assert_eq!(previous.profiles["a.com"].reliability, 0.5);
    }

    #[test]
    fn crash_before_pointer_swap_keeps_previous_state() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        store.put_profile(profile("a.com", 0.5), 1).unwrap();
        // simulate a half-finished publish: new snapshot written, CURRENT untouched
        fs::write(snapshot_path(dir.path(), 2), "{ partial").unwrap();
        fs::write(dir.path().join("CURRENT.tmp"), "2\n").unwrap();
        let reopened = ProfileStore::open(dir.path()).unwrap();
        assert_eq!(reopened.get_snapshot().snapshot_id, 1);
    }

    #[test]
    fn concurrent_readers_see_whole_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(ProfileStore::open(dir.path()).unwrap());
        let readers: Vec<_> = (0..4)
            .map(|_| {
                let store = Arc::clone(&store);
                std::thread::spawn(move || {
                    let mut last = 0;
                    for _ in 0..200 {
                        let snap = store.get_snapshot();
                        assert!(snap.snapshot_id >= last);
                        last = snap.snapshot_id;
                        // each publish writes both domains with the same reliability
                        let values: Vec<f64> = snap.profiles.values().map(|p| p.reliability).collect();
                        assert!(values.windows(2).all(|w| w[0] == w[1]));
                    }
                })
            })
            .collect();
        for i in 0..20 {
            let r = f64::from(i) / 20.0;
            store
                .put_profiles([profile("a.com", r), profile("b.com", r)], i64::from(i))
                .unwrap();
        }
        for r in readers {
            r.join().unwrap();
        }
    }
}
