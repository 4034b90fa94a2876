use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;
use mvcolor_core::Session;

/// One session plus the flag marking a running optimization.
#[derive(Debug)]
pub struct Slot {
    pub session: tokio::sync::Mutex<Session>,
    busy: AtomicBool,
}

impl Slot {
    pub fn new(session: Session) -> Slot {
        Slot { session: tokio::sync::Mutex::new(session), busy: AtomicBool::new(false) }
    }

    pub fn is_busy(&self) -> bool {
        self.busy.load(Ordering::Acquire)
    }

    /// Marks the slot busy until the guard drops; `None` if it already is.
    pub fn claim(self: &Arc<Self>) -> Option<BusyGuard> {
        (!self.busy.swap(true, Ordering::AcqRel)).then(|| BusyGuard(Arc::clone(self)))
    }
}

pub struct BusyGuard(Arc<Slot>);

impl Drop for BusyGuard {
    fn drop(&mut self) {
        self.0.busy.store(false, Ordering::Release);
    }
}

/// In-memory sessions with least-recently-used eviction.
#[derive(Debug)]
pub struct SessionStore {
    capacity: usize,
    slots: Mutex<IndexMap<String, Arc<Slot>>>,
}

impl SessionStore {
    pub fn new(capacity: usize) -> SessionStore {
        SessionStore { capacity: capacity.max(1), slots: Mutex::new(IndexMap::new()) }
    }

    pub fn insert(&self, id: String, slot: Slot) {
        let mut slots = self.slots.lock().expect("session map poisoned");
        slots.insert(id, Arc::new(slot));
        while slots.len() > self.capacity {
            // Prefer evicting idle sessions; a busy one is dropped only if all are busy.
            let victim = slots.iter().position(|(_, s)| !s.is_busy()).unwrap_or(0);
            let (id, _) = slots.shift_remove_index(victim).expect("non-empty");
            log::debug!("evicted session {id}");
        }
    }

    /// Looks a session up and marks it most recently used.
    pub fn get(&self, id: &str) -> Option<Arc<Slot>> {
        let mut slots = self.slots.lock().expect("session map poisoned");
        let (key, slot) = slots.shift_remove_entry(id)?;
        slots.insert(key, Arc::clone(&slot));
        Some(slot)
    }

    pub fn len(&self) -> usize {
        self.slots.lock().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
