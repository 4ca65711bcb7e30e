//! Portable 64-bit mixing used for fingerprint environment identifiers and
//! deterministic pseudo-scores.
//!
//! The construction is fixed and bit-exact on every platform:
//!
//! * state starts at [`SEED`];
//! * each absorbed word `w` updates `state = fmix64(state ^ (w * K_ABSORB)) * K_STEP`
//!   with wrapping arithmetic;
//! * the digest is `fmix64(state ^ n_words)`.
//!
//! `fmix64` is the MurmurHash3 64-bit finalizer.

/// Initial state of every [`Mixer`].
pub const SEED: u64 = 0x5DEE_CE66_D1A4_F87D;
const K_ABSORB: u64 = 0x9E37_79B9_7F4A_7C15;
const K_STEP: u64 = 0xC2B2_AE3D_27D4_EB4F;

/// MurmurHash3 64-bit finalizer.
#[inline]
pub const fn fmix64(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    x ^= x >> 33;
    x = x.wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    x ^= x >> 33;
    x
}

/// Streaming word mixer.
#[derive(Debug, Clone, Copy)]
pub struct Mixer {
    state: u64,
    words: u64,
}

impl Default for Mixer {
    fn default() -> Self {
        Self::new()
    }
}

impl Mixer {
    pub const fn new() -> Self {
        Self { state: SEED, words: 0 }
    }

    #[inline]
    pub fn word(&mut self, w: u64) -> &mut Self {
        self.state = fmix64(self.state ^ w.wrapping_mul(K_ABSORB)).wrapping_mul(K_STEP);
        self.words += 1;
        self
    }

    /// Absorbs a byte string as its length followed by 8-byte little-endian chunks.
    pub fn bytes(&mut self, data: &[u8]) -> &mut Self {
        self.word(data.len() as u64);
        for chunk in data.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.word(u64::from_le_bytes(buf));
        }
        self
    }

    pub fn finish(&self) -> u64 {
        fmix64(self.state ^ self.words)
    }
}

/// Maps a digest onto `[0, 1)` using its top 53 bits.
pub fn unit_interval(digest: u64) -> f64 {
    (digest >> 11) as f64 / (1u64 << 53) as f64
}
