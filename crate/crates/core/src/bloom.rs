//! Bloom filter with the analytic false-positive estimators.
//!
//! `p_zero` and `fp_exact` use the product form `(1 - 1/m)^(k p)`; the
//! exponential `e^(-k p / m)` is only an approximation of it and is exposed
//! separately as [`p_zero_approx`].

use crate::error::{Error, Result};
use crate::hashfns::{sha1_index, HashFamily};

/// Bytes in a serialized filter ahead of the bit data: m(4) k(1) inserted(4) epoch(4).
pub const HEADER_LEN: usize = 13;

/// How tags are turned into bit positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Indexing {
    /// One position from the truncated SHA-1 digest.
    Sha1,
    /// One position per member of the 32-bit family.
    Family(HashFamily),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    words: Vec<u64>,
    m: u32,
    indexing: Indexing,
    inserted: u32,
    ones: u32,
    epoch: u32,
}

impl BloomFilter {
    /// A filter of `m` bits indexed by the first `k` family members.
    pub fn new(m: u32, k: u8) -> Result<Self> {
        Self::with_indexing(m, Indexing::Family(HashFamily::new(k)?))
    }

    /// A single-hash filter indexed by SHA-1.
    pub fn new_sha1(m: u32) -> Result<Self> {
        Self::with_indexing(m, Indexing::Sha1)
    }

    pub fn with_indexing(m: u32, indexing: Indexing) -> Result<Self> {
        if m == 0 {
            return Err(Error::config(
                "filter_bits",
                "filter must have at least one bit",
            ));
        }
        Ok(BloomFilter {
            words: vec![0; (m as usize).div_ceil(64)],
            m,
            indexing,
            inserted: 0,
            ones: 0,
            epoch: 0,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u8 {
        match self.indexing {
            Indexing::Sha1 => 1,
            Indexing::Family(f) => f.k(),
        }
    }

    pub fn inserted(&self) -> u32 {
        self.inserted
    }

    pub fn ones(&self) -> u32 {
        self.ones
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn fill_ratio(&self) -> f64 {
        f64::from(self.ones) / f64::from(self.m)
    }

    fn positions(&self, tag: &[u8]) -> Vec<u32> {
        match self.indexing {
            Indexing::Sha1 => vec![sha1_index(tag, self.m)],
            Indexing::Family(f) => f.indices(tag, self.m).collect(),
        }
    }

    fn get(&self, i: u32) -> bool {
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Sets bit `i`, returning whether it was already set.
    fn set(&mut self, i: u32) -> bool {
        let w = &mut self.words[(i / 64) as usize];
        let mask = 1u64 << (i % 64);
        let was = *w & mask != 0;
        if !was {
            *w |= mask;
            self.ones += 1;
        }
        was
    }

    /// Membership test without inserting.
    pub fn contains(&self, tag: &[u8]) -> bool {
        self.positions(tag).into_iter().all(|i| self.get(i))
    }

    /// Reports whether `tag` was already a member, then inserts it.
    pub fn query_insert(&mut self, tag: &[u8]) -> bool {
        let mut present = true;
        for i in self.positions(tag) {
            present &= self.set(i);
        }
        self.inserted = self.inserted.saturating_add(1);
        present
    }

    /// False-positive probability at the current load.
    pub fn fp_now(&self) -> f64 {
        fp_exact(self.m, self.k(), u64::from(self.inserted))
    }

    /// Clears the filter and starts a new epoch.
    pub fn reset(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
        self.inserted = 0;
        self.ones = 0;
        self.epoch += 1;
    }

    /// Resets when the predicted false-positive rate exceeds `fp_max`.
    pub fn reset_if_saturated(&mut self, fp_max: f64) -> bool {
        if self.fp_now() > fp_max {
            self.reset();
            true
        } else {
            false
        }
    }

    /// Serialized size in bytes; depends on `m` alone.
    pub fn state_bytes(&self) -> usize {
        state_bytes_for(self.m)
    }

    /// `m`, `k`, `inserted`, `epoch` big-endian, then the bits
    /// most-significant-bit first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.state_bytes());
        out.extend_from_slice(&self.m.to_be_bytes());
        out.push(self.k());
        out.extend_from_slice(&self.inserted.to_be_bytes());
        out.extend_from_slice(&self.epoch.to_be_bytes());
        let mut byte = 0u8;
        for i in 0..self.m {
            if self.get(i) {
                byte |= 0x80 >> (i % 8);
            }
            if i % 8 == 7 || i + 1 == self.m {
                out.push(byte);
                byte = 0;
            }
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes). A `k` of 1 restores a
    /// family filter; use [`Indexing`] explicitly via
    /// [`from_bytes_with`](Self::from_bytes_with) for SHA-1 filters.
    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let k = *b
            .get(4)
            .ok_or_else(|| Error::Format("truncated filter header".into()))?;
        Self::from_bytes_with(b, Indexing::Family(HashFamily::new(k)?))
    }

    pub fn from_bytes_with(b: &[u8], indexing: Indexing) -> Result<Self> {
        if b.len() < HEADER_LEN {
            return Err(Error::Format("truncated filter header".into()));
        }
        let be = |o: usize| u32::from_be_bytes([b[o], b[o + 1], b[o + 2], b[o + 3]]);
        let m = be(0);
        let mut f = Self::with_indexing(m, indexing)?;
        if f.k() != b[4] {
            return Err(Error::Format(format!(
                "header k={} does not match indexing k={}",
                b[4],
                f.k()
            )));
        }
        if b.len() != state_bytes_for(m) {
            return Err(Error::Format(format!(
                "filter of {m} bits needs {} bytes, got {}",
                state_bytes_for(m),
                b.len()
            )));
        }
        f.inserted = be(5);
        f.epoch = be(9);
        for i in 0..m {
            if b[HEADER_LEN + (i / 8) as usize] & (0x80 >> (i % 8)) != 0 {
                f.set(i);
            }
        }
        Ok(f)
    }
}

pub fn state_bytes_for(m: u32) -> usize {
    HEADER_LEN + (m as usize).div_ceil(8)
}

/// Probability that a given bit is still 0 after `p` insertions of `k` bits
/// each into `m` bits.
pub fn p_zero(m: u32, k: u8, p: u64) -> f64 {
    let exponent = f64::from(k) * p as f64;
    // (1 - 1/m)^x computed as exp(x * ln(1 - 1/m)) to keep precision for large m.
    (exponent * (-1.0 / f64::from(m)).ln_1p()).exp()
}

/// Exponential approximation `e^(-k p / m)` of [`p_zero`].
pub fn p_zero_approx(m: u32, k: u8, p: u64) -> f64 {
    (-(f64::from(k) * p as f64) / f64::from(m)).exp()
}

/// Probability that a never-inserted tag finds all `k` of its bits set.
pub fn fp_exact(m: u32, k: u8, p: u64) -> f64 {
    (1.0 - p_zero(m, k, p)).powi(i32::from(k))
}

/// Rule-of-thumb false-positive rate `2^-k` of a filter run at half fill.
pub fn fp_approx(k: u8) -> f64 {
    0.5f64.powi(i32::from(k))
}

/// Default epoch-reset threshold: twice the half-fill rate.
pub fn default_fp_max(k: u8) -> f64 {
    2.0 * fp_approx(k)
}

/// Filter size at which `p` insertions of `k` bits leave half the bits set.
pub fn half_fill_bits(k: u8, p: u64) -> u32 {
    // Solve (1 - 1/m)^(kp) = 1/2 for m.
    let kp = f64::from(k) * p as f64;
    let m = 1.0 / -(-std::f64::consts::LN_2 / kp).exp_m1();
    m.round().max(1.0) as u32
}
