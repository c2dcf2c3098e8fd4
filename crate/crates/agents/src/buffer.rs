//! Append-only store of validated descriptions keyed by variant signature.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use vrpkit_core::{ConstraintSet, VariantFlags};

use crate::description::{canonical_input, tag_of, ProblemDescription};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferEntry {
    pub signature: String,
    pub description: ProblemDescription,
    pub config: ConstraintSet<f64>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub hit_count: u64,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// `CODE#hash`, where the hash covers the sorted constraint tags and the
/// sorted input names. Stable across runs and platforms.
pub fn signature(desc: &ProblemDescription) -> String {
    let code = VariantFlags::parse_lenient(&desc.problem_type)
        .map(|f| f.code())
        .unwrap_or_else(|| desc.problem_type.trim().to_ascii_uppercase());
    let mut tags: Vec<String> = desc
        .constraints
        .iter()
        .map(|c| tag_of(&c.name).map_or_else(|| c.name.to_ascii_lowercase(), |t| format!("{t:?}")))
        .collect();
    tags.sort();
    tags.dedup();
    let mut inputs: Vec<String> = desc
        .inputs
        .iter()
        .map(|x| canonical_input(x).map_or_else(|| x.to_ascii_lowercase(), String::from))
        .collect();
    inputs.sort();
    inputs.dedup();
    let key = format!("{}|{}", tags.join(","), inputs.join(","));
    format!("{code}#{:016x}", fnv1a(key.as_bytes()))
}

/// Entries in memory, mirrored to a JSON-lines file when opened from a
/// path. Updates append a fresh line; on load the last line per signature
/// wins. Callers sharing one buffer across threads wrap it in a mutex.
#[derive(Debug, Default)]
pub struct Buffer {
    path: Option<PathBuf>,
    entries: IndexMap<String, BufferEntry>,
}

impl Buffer {
    pub fn in_memory() -> Self {
        Buffer::default()
    }

    /// Loads `path` if it exists; unreadable lines are skipped with a warning.
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = IndexMap::new();
        match File::open(&path) {
            Ok(f) => {
                for (k, line) in BufReader::new(f).lines().enumerate() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    match serde_json::from_str::<BufferEntry>(&line) {
                        Ok(e) => {
                            entries.insert(e.signature.clone(), e);
                        }
                        Err(err) => log::warn!("{}:{}: skipping buffer line: {err}", path.display(), k + 1),
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e),
        }
        Ok(Buffer {
            path: Some(path),
            entries,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, signature: &str) -> Option<&BufferEntry> {
        self.entries.get(signature)
    }

    pub fn entries(&self) -> impl Iterator<Item = &BufferEntry> {
        self.entries.values()
    }

    /// Stores a new entry, or refreshes an existing one (bumping its hit
    /// count and keeping its creation time).
    pub fn store(&mut self, description: ProblemDescription, config: ConstraintSet<f64>) -> io::Result<BufferEntry> {
        let sig = signature(&description);
        let entry = match self.entries.get(&sig) {
            Some(old) => BufferEntry {
                hit_count: old.hit_count + 1,
                description,
                config,
                ..old.clone()
            },
            None => BufferEntry {
                signature: sig.clone(),
                description,
                config,
                created_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                hit_count: 0,
            },
        };
        self.append(&entry)?;
        self.entries.insert(sig, entry.clone());
        Ok(entry)
    }

    fn append(&self, entry: &BufferEntry) -> io::Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut line = serde_json::to_string(entry).map_err(io::Error::other)?;
        line.push('\n');
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        // one write per line keeps appends whole
        f.write_all(line.as_bytes())
    }
}
