//! SHA-256 helpers used for provenance stamps and determinism checks.

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Incremental digest over a sequence of fields.
///
/// Fields are length-prefixed so that `("ab", "c")` and `("a", "bc")` differ.
#[derive(Default, Clone)]
pub struct Digester {
    inner: Sha256,
}

impl Digester {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        self.inner.update((bytes.len() as u64).to_le_bytes());
        self.inner.update(bytes);
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.field(s.as_bytes())
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.inner.update(v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.inner.update(v.to_bits().to_le_bytes());
        self
    }

    pub fn finish(self) -> String {
        hex::encode(self.inner.finalize())
    }
}
