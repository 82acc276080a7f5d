use sha2::{Digest, Sha256};

/// Incremental 64-bit fingerprint over tagged little-endian fields.
pub(crate) struct Fingerprint(Sha256);

impl Fingerprint {
    pub(crate) fn new(tag: &str) -> Self {
        let mut h = Sha256::new();
        h.update(tag.as_bytes());
        Fingerprint(h)
    }

    pub(crate) fn u64(&mut self, v: u64) -> &mut Self {
        self.0.update(v.to_le_bytes());
        self
    }

    pub(crate) fn f64s(&mut self, vs: &[f64]) -> &mut Self {
        self.u64(vs.len() as u64);
        for v in vs {
            self.0.update(v.to_bits().to_le_bytes());
        }
        self
    }

    pub(crate) fn finish(self) -> u64 {
        let out = self.0.finalize();
        u64::from_le_bytes(out[..8].try_into().expect("sha256 output is 32 bytes"))
    }
}
