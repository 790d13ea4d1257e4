//! SHA-1 and the nine general-purpose 32-bit string hashes used to index the
//! Bloom filters.

use std::fmt;
use std::str::FromStr;

use sha1::{Digest, Sha1};

use crate::error::{Error, Result};

pub const DIGEST_LEN: usize = 20;

pub fn sha1(data: &[u8]) -> [u8; DIGEST_LEN] {
    Sha1::digest(data).into()
}

/// Reduces a SHA-1 digest to a filter index: the first four digest bytes,
/// big-endian, modulo `m`.
pub fn sha1_index(data: &[u8], m: u32) -> u32 {
    let d = sha1(data);
    u32::from_be_bytes([d[0], d[1], d[2], d[3]]) % m
}

/// A member of the 32-bit hash family. Variant order is the canonical order
/// in which a family of size `k` takes its first `k` members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HashFn {
    Rs,
    Js,
    Pjw,
    Elf,
    Bkdr,
    Sdbm,
    Djb,
    Dek,
    Ap,
}

impl HashFn {
    pub const ALL: [HashFn; 9] = [
        HashFn::Rs,
        HashFn::Js,
        HashFn::Pjw,
        HashFn::Elf,
        HashFn::Bkdr,
        HashFn::Sdbm,
        HashFn::Djb,
        HashFn::Dek,
        HashFn::Ap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HashFn::Rs => "RS",
            HashFn::Js => "JS",
            HashFn::Pjw => "PJW",
            HashFn::Elf => "ELF",
            HashFn::Bkdr => "BKDR",
            HashFn::Sdbm => "SDBM",
            HashFn::Djb => "DJB",
            HashFn::Dek => "DEK",
            HashFn::Ap => "AP",
        }
    }

    pub fn hash(self, data: &[u8]) -> u32 {
        match self {
            HashFn::Rs => rs(data),
            HashFn::Js => js(data),
            HashFn::Pjw => pjw(data),
            HashFn::Elf => elf(data),
            HashFn::Bkdr => bkdr(data),
            HashFn::Sdbm => sdbm(data),
            HashFn::Djb => djb(data),
            HashFn::Dek => dek(data),
            HashFn::Ap => ap(data),
        }
    }
}

impl fmt::Display for HashFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HashFn {
    type Err = Error;

    /// Accepts `RS`, `rs` or `RSHash` style names.
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        let base = upper.strip_suffix("HASH").unwrap_or(&upper);
        HashFn::ALL
            .into_iter()
            .find(|f| f.name() == base)
            .ok_or_else(|| Error::config("hash function", format!("unknown hash function {s:?}")))
    }
}

/// Looks a family member up by name and hashes `data` with it.
pub fn hash32(name: &str, data: &[u8]) -> Result<u32> {
    Ok(name.parse::<HashFn>()?.hash(data))
}

fn rs(data: &[u8]) -> u32 {
    let b: u32 = 378_551;
    let mut a: u32 = 63_689;
    let mut h: u32 = 0;
    for &c in data {
        h = h.wrapping_mul(a).wrapping_add(u32::from(c));
        a = a.wrapping_mul(b);
    }
    h
}

fn js(data: &[u8]) -> u32 {
    let mut h: u32 = 1_315_423_911;
    for &c in data {
        h ^= (h << 5).wrapping_add(u32::from(c)).wrapping_add(h >> 2);
    }
    h
}

fn pjw(data: &[u8]) -> u32 {
    const HIGH_BITS: u32 = 0xF000_0000;
    let mut h: u32 = 0;
    for &c in data {
        h = (h << 4).wrapping_add(u32::from(c));
        let g = h & HIGH_BITS;
        if g != 0 {
            h = (h ^ (g >> 24)) & !HIGH_BITS;
        }
    }
    h
}

// Same recurrence as PJW for a 32-bit word; kept separate so each family
// member is its own function.
fn elf(data: &[u8]) -> u32 {
    let mut h: u32 = 0;
    for &c in data {
        h = (h << 4).wrapping_add(u32::from(c));
        let x = h & 0xF000_0000;
        if x != 0 {
            h ^= x >> 24;
        }
        h &= !x;
    }
    h
}

fn bkdr(data: &[u8]) -> u32 {
    const SEED: u32 = 131;
    data.iter().fold(0u32, |h, &c| {
        h.wrapping_mul(SEED).wrapping_add(u32::from(c))
    })
}

fn sdbm(data: &[u8]) -> u32 {
    data.iter().fold(0u32, |h, &c| {
        u32::from(c)
            .wrapping_add(h << 6)
            .wrapping_add(h << 16)
            .wrapping_sub(h)
    })
}

fn djb(data: &[u8]) -> u32 {
    data.iter().fold(5381u32, |h, &c| {
        (h << 5).wrapping_add(h).wrapping_add(u32::from(c))
    })
}

fn dek(data: &[u8]) -> u32 {
    data.iter().fold(data.len() as u32, |h, &c| {
        ((h << 5) ^ (h >> 27)) ^ u32::from(c)
    })
}

fn ap(data: &[u8]) -> u32 {
    let mut h: u32 = 0xAAAA_AAAA;
    for (i, &c) in data.iter().enumerate() {
        let c = u32::from(c);
        if i % 2 == 0 {
            h ^= (h << 7) ^ c.wrapping_mul(h >> 3);
        } else {
            h ^= !((h << 11).wrapping_add(c ^ (h >> 5)));
        }
    }
    h
}

/// The first `k` members of the canonical family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFamily {
    k: u8,
}

impl HashFamily {
    pub const MAX: u8 = 9;

    pub fn new(k: u8) -> Result<Self> {
        if !(1..=Self::MAX).contains(&k) {
            return Err(Error::config(
                "k",
                format!("hash count must be in 1..=9, got {k}"),
            ));
        }
        Ok(HashFamily { k })
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn members(&self) -> &'static [HashFn] {
        &HashFn::ALL[..usize::from(self.k)]
    }

    pub fn indices<'a>(&self, data: &'a [u8], m: u32) -> impl Iterator<Item = u32> + 'a {
        self.members().iter().map(move |f| f.hash(data) % m)
    }
}

/// Filter positions for `tag`: member `i` of the family hashed, modulo `m`.
pub fn family_indices(tag: &[u8], k: u8, m: u32) -> Result<Vec<u32>> {
    if m == 0 {
        return Err(Error::config(
            "filter_bits",
            "filter must have at least one bit",
        ));
    }
    Ok(HashFamily::new(k)?.indices(tag, m).collect())
}
