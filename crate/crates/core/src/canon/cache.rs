//! Process-wide memoization of canonical forms, sharded by digest prefix.
//!
//! Keys are digests of the exact input (graph plus colors), so hits return
//! both the code and the input-specific canonical vertex order. Entries can
//! be exported and re-imported to persist across runs.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

const SHARDS: usize = 16;

pub(super) struct Entry {
    pub code_bytes: Vec<u8>,
    pub vertex_order: Vec<usize>,
}

struct Cache {
    shards: Vec<RwLock<HashMap<[u8; 32], Arc<Entry>>>>,
}

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Cache {
        shards: (0..SHARDS).map(|_| RwLock::new(HashMap::new())).collect(),
    })
}

fn shard(key: &[u8; 32]) -> usize {
    key[0] as usize % SHARDS
}

pub(super) fn lookup(key: &[u8; 32]) -> Option<Arc<Entry>> {
    cache().shards[shard(key)].read().unwrap().get(key).cloned()
}

pub(super) fn insert(key: [u8; 32], entry: Arc<Entry>) {
    cache().shards[shard(&key)]
        .write()
        .unwrap()
        .insert(key, entry);
}

/// A cache entry in portable form: input digest, code bytes, vertex order.
pub type PortableEntry = ([u8; 32], Vec<u8>, Vec<usize>);

/// Snapshots every cached entry, in unspecified order.
pub fn export() -> Vec<PortableEntry> {
    let mut out = Vec::new();
    for shard in &cache().shards {
        for (key, entry) in shard.read().unwrap().iter() {
            out.push((*key, entry.code_bytes.clone(), entry.vertex_order.clone()));
        }
    }
    out
}

/// Seeds the cache with previously exported entries. Existing keys keep
/// their current value.
pub fn import(entries: Vec<PortableEntry>) {
    for (key, code_bytes, vertex_order) in entries {
        let shard = &cache().shards[shard(&key)];
        shard.write().unwrap().entry(key).or_insert_with(|| {
            Arc::new(Entry {
                code_bytes,
                vertex_order,
            })
        });
    }
}

/// Number of cached canonical forms.
pub fn len() -> usize {
    cache()
        .shards
        .iter()
        .map(|s| s.read().unwrap().len())
        .sum()
}
