//! File formats: newline-delimited incident records, the binary index
//! container, the summary cache, and evaluation pair files.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use rca_core::incident::Incident;
use rca_core::index::{decode_index, encode_index, IndexError, IndexKind};
use rca_core::summarize::{SummaryCache, SummaryCacheEntry, SummaryKind};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} is non-empty but contains no parsable incident records")]
    NoParsableRecords { path: String },
    #[error("{path}:{line}: {message}")]
    BadRecord {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Index {
        path: String,
        source: IndexError,
    },
}

fn file_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::File {
        path: path.display().to_string(),
        source,
    }
}

/// Load newline-delimited incident records. Malformed lines and duplicate
/// ids are counted as rejected, never silently dropped. A non-empty file
/// yielding zero incidents is an error.
pub fn load_incidents(path: &Path) -> Result<(Vec<Incident>, usize), IoError> {
    let file = File::open(path).map_err(|e| file_err(path, e))?;
    let reader = BufReader::new(file);
    let mut incidents = Vec::new();
    let mut seen_ids = BTreeSet::new();
    let mut rejected = 0usize;
    let mut saw_content = false;
    for line in reader.lines() {
        let line = line.map_err(|e| file_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        saw_content = true;
        match Incident::parse_record(&line) {
            Ok(incident) if seen_ids.insert(incident.id.clone()) => incidents.push(incident),
            _ => rejected += 1,
        }
    }
    if saw_content && incidents.is_empty() {
        return Err(IoError::NoParsableRecords {
            path: path.display().to_string(),
        });
    }
    Ok((incidents, rejected))
}

/// Write incidents as one JSON record per line.
pub fn write_incidents(path: &Path, incidents: &[Incident]) -> Result<(), IoError> {
    let mut out = String::new();
    for incident in incidents {
        out.push_str(&incident.to_json_line());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| file_err(path, e))
}

/// Load a single-incident JSON file.
pub fn load_single_incident(path: &Path) -> Result<Incident, IoError> {
    let raw = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    Incident::parse_record(raw.trim()).map_err(|e| IoError::BadRecord {
        path: path.display().to_string(),
        line: 1,
        message: e.to_string(),
    })
}

pub fn save_index(path: &Path, index: &IndexKind) -> Result<(), IoError> {
    std::fs::write(path, encode_index(index)).map_err(|e| file_err(path, e))
}

pub fn load_index(path: &Path) -> Result<IndexKind, IoError> {
    let bytes = std::fs::read(path).map_err(|e| file_err(path, e))?;
    decode_index(&bytes).map_err(|source| IoError::Index {
        path: path.display().to_string(),
        source,
    })
}

/// One `{candidate, reference}` evaluation pair.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct EvalPair {
    pub candidate: String,
    pub reference: String,
}

/// Load newline-delimited `{candidate, reference}` pairs.
pub fn load_eval_pairs(path: &Path) -> Result<Vec<(String, String)>, IoError> {
    let raw = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    let mut pairs = Vec::new();
    for (number, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let pair: EvalPair = serde_json::from_str(line).map_err(|e| IoError::BadRecord {
            path: path.display().to_string(),
            line: number + 1,
            message: e.to_string(),
        })?;
        pairs.push((pair.candidate, pair.reference));
    }
    Ok(pairs)
}

/// Summary cache persisted as newline-delimited `{key, kind, value}`
/// records. Writes append under a lock and flush immediately; lookups are
/// lock-guarded map reads, so concurrent summarization threads can share it.
pub struct FileSummaryCache {
    entries: Mutex<std::collections::BTreeMap<String, String>>,
    appender: Mutex<File>,
}

impl FileSummaryCache {
    /// Open or create the cache file, loading any existing entries.
    /// Unparsable lines are skipped: a stale or truncated tail means a
    /// re-summarization, not a failed run.
    pub fn open(path: &Path) -> Result<Self, IoError> {
        let mut entries = std::collections::BTreeMap::new();
        if path.exists() {
            let raw = std::fs::read_to_string(path).map_err(|e| file_err(path, e))?;
            for line in raw.lines() {
                if let Ok(entry) = serde_json::from_str::<SummaryCacheEntry>(line) {
                    entries.entry(entry.key).or_insert(entry.value);
                }
            }
        }
        let appender = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| file_err(path, e))?;
        Ok(FileSummaryCache {
            entries: Mutex::new(entries),
            appender: Mutex::new(appender),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SummaryCache for FileSummaryCache {
    fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    fn put(&self, key: &str, kind: SummaryKind, value: &str) {
        let mut entries = self.entries.lock().expect("cache lock");
        if entries.contains_key(key) {
            return;
        }
        entries.insert(key.to_string(), value.to_string());
        let entry = SummaryCacheEntry {
            key: key.to_string(),
            kind,
            value: value.to_string(),
        };
        let mut appender = self.appender.lock().expect("cache file lock");
        let line = serde_json::to_string(&entry).expect("cache entry serializes");
        let _ = writeln!(appender, "{line}");
        let _ = appender.flush();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rca_core::synth::{generate_synthetic_corpus, SynthConfig};

    #[test]
    fn incident_files_round_trip_with_rejection_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("incidents.ndjson");
        let corpus = generate_synthetic_corpus(&SynthConfig {
            incidents: 12,
            families: 4,
            seed: 3,
        })
        .unwrap();
        write_incidents(&path, &corpus).unwrap();
        // Append one malformed line and one duplicate record.
        let mut raw = std::fs::read_to_string(&path).unwrap();
        raw.push_str("{\"id\":\"broken\"\n");
        raw.push_str(&corpus[0].to_json_line());
        raw.push('\n');
        std::fs::write(&path, raw).unwrap();
        let (loaded, rejected) = load_incidents(&path).unwrap();
        assert_eq!(loaded, corpus);
        assert_eq!(rejected, 2);
    }

    #[test]
    fn empty_file_loads_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.ndjson");
        std::fs::write(&path, "").unwrap();
        let (loaded, rejected) = load_incidents(&path).unwrap();
        assert!(loaded.is_empty());
        assert_eq!(rejected, 0);
    }

    #[test]
    fn all_garbage_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("garbage.ndjson");
        std::fs::write(&path, "not json\nstill not json\n").unwrap();
        assert!(matches!(
            load_incidents(&path),
            Err(IoError::NoParsableRecords { .. })
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load_incidents(Path::new("/nonexistent/nowhere.ndjson")),
            Err(IoError::File { .. })
        ));
    }

    #[test]
    fn file_cache_persists_across_opens() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.ndjson");
        {
            let cache = FileSummaryCache::open(&path).unwrap();
            cache.put("k1", SummaryKind::IncidentSummary, "short one");
            cache.put("k2", SummaryKind::RootCause, "short two");
            assert_eq!(cache.get("k1").as_deref(), Some("short one"));
        }
        let reopened = FileSummaryCache::open(&path).unwrap();
        assert_eq!(reopened.len(), 2);
        assert_eq!(reopened.get("k2").as_deref(), Some("short two"));
        assert_eq!(reopened.get("k3"), None);
    }
}
