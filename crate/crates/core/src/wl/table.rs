use crate::hashing::hash_words;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

/// A canonical color id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Color(pub u64);

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// RELABEL: maps canonical refinement keys to color ids.
///
/// Ids are content hashes of `(tag, key)`, so the mapping is injective up to hash
/// collisions and independent of insertion order and thread schedule. One table can
/// be shared by any number of graphs without synchronising id assignment. A checked
/// table additionally records every key it has seen and counts ids that were handed
/// out for two different keys.
#[derive(Default)]
pub struct ColorTable {
    seen: Option<Mutex<HashMap<(u64, u64), Vec<u64>>>>,
    collisions: Mutex<usize>,
}

impl fmt::Debug for ColorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ColorTable")
            .field("checked", &self.seen.is_some())
            .field("collisions", &self.collisions())
            .finish()
    }
}

impl ColorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// A table that verifies key equality whenever two keys map to one id.
    pub fn checked() -> Self {
        ColorTable {
            seen: Some(Mutex::new(HashMap::new())),
            collisions: Mutex::new(0),
        }
    }

    pub fn relabel(&self, tag: u64, key: &[u64]) -> Color {
        let id = hash_words(tag, key);
        if let Some(seen) = &self.seen {
            let mut map = seen.lock().expect("color table lock");
            match map.get(&(tag, id)) {
                Some(prev) if prev.as_slice() != key => {
                    *self.collisions.lock().expect("collision lock") += 1;
                }
                Some(_) => {}
                None => {
                    map.insert((tag, id), key.to_vec());
                }
            }
        }
        Color(id)
    }

    pub fn is_checked(&self) -> bool {
        self.seen.is_some()
    }

    /// Number of distinct keys recorded (checked tables only).
    pub fn len(&self) -> usize {
        self.seen
            .as_ref()
            .map_or(0, |s| s.lock().expect("color table lock").len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn collisions(&self) -> usize {
        *self.collisions.lock().expect("collision lock")
    }
}
