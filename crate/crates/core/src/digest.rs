//! Content digests used to tie artifact files to their inputs.

use sha2::{Digest, Sha256};

use crate::ordering::{PatternOrder, SpectralCoord};
use crate::raster::ImageBuffer;

/// Incremental SHA-256 with helpers for the crate's data types.
#[derive(Default, Clone)]
pub struct Hasher(Sha256);

impl std::fmt::Debug for Hasher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Hasher")
    }
}

impl Hasher {
    pub fn new() -> Self {
        Self(Sha256::new())
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.0.update(b);
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.0.update(v.to_le_bytes());
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.0.update(v.to_bits().to_le_bytes());
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u64(s.len() as u64);
        self.0.update(s.as_bytes());
        self
    }

    pub fn coords(&mut self, coords: &[SpectralCoord]) -> &mut Self {
        for c in coords {
            self.u64(c.u as u64).u64(c.v as u64);
        }
        self
    }

    pub fn image(&mut self, img: &ImageBuffer) -> &mut Self {
        self.u64(img.width() as u64).u64(img.height() as u64);
        for &v in img.as_slice() {
            self.f64(v);
        }
        self
    }

    pub fn finish(self) -> [u8; 32] {
        self.0.finalize().into()
    }

    pub fn finish_hex(self) -> String {
        hex::encode(self.finish())
    }

    /// First eight digest bytes as a little-endian integer, for seed derivation.
    pub fn finish_u64(self) -> u64 {
        let d = self.finish();
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }
}

pub fn image_digest(img: &ImageBuffer) -> String {
    let mut h = Hasher::new();
    h.image(img);
    h.finish_hex()
}

pub fn order_digest(order: &PatternOrder) -> String {
    let mut h = Hasher::new();
    h.u64(order.width() as u64)
        .u64(order.height() as u64)
        .str(order.strategy().tag())
        .coords(order.sequence());
    h.finish_hex()
}
