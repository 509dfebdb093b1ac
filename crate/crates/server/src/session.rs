//! In-memory keyword-selection sessions with idle expiry.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use indexmap::IndexSet;
use parking_lot::Mutex;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub session_id: String,
    /// In selection order.
    pub selected_keywords: IndexSet<String>,
    pub selected_node_ids: BTreeSet<usize>,
    pub created_at: DateTime<Utc>,
}

impl Session {
    fn new(session_id: &str) -> Self {
        Self {
            session_id: session_id.to_string(),
            selected_keywords: IndexSet::new(),
            selected_node_ids: BTreeSet::new(),
            created_at: Utc::now(),
        }
    }

    pub fn keywords(&self) -> Vec<String> {
        self.selected_keywords.iter().cloned().collect()
    }
}

struct Entry {
    session: Arc<Mutex<Session>>,
    last_used: Instant,
}

/// Sessions are created on first use. Each has its own lock, so mutations on
/// one session serialize without blocking the others.
pub struct SessionTable {
    entries: Mutex<HashMap<String, Entry>>,
    ttl: Duration,
}

impl SessionTable {
    pub fn new(ttl: Duration) -> Self {
        Self {
            entries: Mutex::new(HashMap::new()),
            ttl,
        }
    }

    pub fn get_or_create(&self, session_id: &str) -> Arc<Mutex<Session>> {
        let now = Instant::now();
        let mut entries = self.entries.lock();
        entries.retain(|id, e| id == session_id || now.duration_since(e.last_used) < self.ttl);
        let entry = entries.entry(session_id.to_string()).or_insert_with(|| Entry {
            session: Arc::new(Mutex::new(Session::new(session_id))),
            last_used: now,
        });
        if now.duration_since(entry.last_used) >= self.ttl {
            entry.session = Arc::new(Mutex::new(Session::new(session_id)));
        }
        entry.last_used = now;
        Arc::clone(&entry.session)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drop every session, e.g. after the vocabulary changed.
    pub fn clear(&self) {
        self.entries.lock().clear();
    }
}
