use std::any::Any;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;

/// String-keyed store for intermediate pipeline outputs.
///
/// Each profile owns one. A pipeline stage puts its result here (similarity
/// vectors, neighbor sets, predictions, per-user partials) and later stages
/// or user code read it back by key. Values are shared via `Arc`, so reads
/// never block behind a long-lived borrow.
#[derive(Default)]
pub struct Store {
    entries: RwLock<HashMap<String, Arc<dyn Any + Send + Sync>>>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `value` under `key`, replacing any previous payload.
    pub fn put<T: Any + Send + Sync>(&self, key: &str, value: T) {
        self.entries.write().insert(key.to_owned(), Arc::new(value));
    }

    /// Returns the most recent payload for `key`, or `None` when the key is
    /// unused or holds a value of a different type.
    pub fn get<T: Any + Send + Sync>(&self, key: &str) -> Option<Arc<T>> {
        let entries = self.entries.read();
        entries.get(key).cloned()?.downcast::<T>().ok()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.read().contains_key(key)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.read().is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries = self.entries.read();
        let mut keys: Vec<&str> = entries.keys().map(String::as_str).collect();
        keys.sort_unstable();
        f.debug_struct("Store").field("keys", &keys).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_then_get_round_trips() {
        let store = Store::new();
        store.put("SIMILARITIES", vec![0.5_f64, 0.25]);
        let back = store.get::<Vec<f64>>("SIMILARITIES").unwrap();
        assert_eq!(*back, vec![0.5, 0.25]);
    }

    #[test]
    fn unused_key_is_absent() {
        let store = Store::new();
        assert!(store.get::<f64>("NEIGHBORS").is_none());
        assert!(!store.contains("NEIGHBORS"));
    }

    #[test]
    fn put_overwrites() {
        let store = Store::new();
        store.put("K", 1_usize);
        store.put("K", 2_usize);
        assert_eq!(*store.get::<usize>("K").unwrap(), 2);
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn type_mismatch_reads_as_absent() {
        let store = Store::new();
        store.put("K", 1_usize);
        assert!(store.get::<f64>("K").is_none());
    }
}
