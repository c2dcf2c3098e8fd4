use std::fmt::{self, Write as _};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::provider::Role;

/// One provider call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub role: Role,
    pub round: usize,
    pub prompt: String,
    /// Reply text, or the provider error.
    pub response: Result<String, String>,
    pub elapsed: Duration,
}

/// A pipeline note that is not a provider call (buffer hit, solve result).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub round: usize,
    /// Number of provider calls made before this event.
    pub after_call: usize,
    pub text: String,
}

/// Every provider call of one pipeline run, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    pub events: Vec<TranscriptEvent>,
}

impl Transcript {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.events.is_empty()
    }

    pub fn roles(&self) -> Vec<Role> {
        self.entries.iter().map(|e| e.role).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.entries.iter().filter(|e| e.role == role).count()
    }

    pub fn note(&mut self, round: usize, text: impl Into<String>) {
        self.events.push(TranscriptEvent {
            round,
            after_call: self.entries.len(),
            text: text.into(),
        });
    }

    pub fn has_event(&self, needle: &str) -> bool {
        self.events.iter().any(|e| e.text.contains(needle))
    }

    /// Total time spent waiting on the provider.
    pub fn provider_time(&self) -> Duration {
        self.entries.iter().map(|e| e.elapsed).sum()
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut events = self.events.iter().peekable();
        let mut out = String::new();
        for (k, e) in self.entries.iter().enumerate() {
            while let Some(ev) = events.next_if(|ev| ev.after_call <= k) {
                let _ = writeln!(out, "== round {} note: {}", ev.round, ev.text);
            }
            let _ = writeln!(out, "== call {} round {} {} ({:.3}s)", k + 1, e.round, e.role, e.elapsed.as_secs_f64());
            let _ = writeln!(out, "-- prompt\n{}", e.prompt.trim_end());
            match &e.response {
                Ok(r) => {
                    let _ = writeln!(out, "-- response\n{}", r.trim_end());
                }
                Err(err) => {
                    let _ = writeln!(out, "-- error\n{err}");
                }
            }
        }
        for ev in events {
            let _ = writeln!(out, "== round {} note: {}", ev.round, ev.text);
        }
        f.write_str(&out)
    }
}
