//! SOPI values, the symbol-ID permutation they define, and prefix
//! generation.
//!
//! A SOPI `(A, B)` maps stream position `i` to symbol ID `A + i*B mod N`.
//! Because B is nonzero and N prime, the map is a permutation of [0, N):
//! different prefixes of the same stream never repeat a symbol ID.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{add_mod, mod_mul_add, FieldParams};
use crate::rng::SplitMix64;

/// Identifier of one encoded symbol, in [0, N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A stream-object permutation identifier: offset A in [0, N), stride B in
/// [1, N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sopi {
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "B")]
    pub b: u32,
}

impl Sopi {
    pub fn new(a: u64, b: u64, params: FieldParams) -> Result<Self> {
        let n = params.n();
        if a >= n {
            return Err(Error::InvalidOffset { a, n });
        }
        if b == 0 || b >= n {
            return Err(Error::InvalidStride { b, n });
        }
        Ok(Self {
            a: a as u32,
            b: b as u32,
        })
    }

    /// Symbol ID at stream position `i`: `(A + i*B) mod N`.
    pub fn symbol_id_at(&self, i: u64, params: FieldParams) -> Result<SymbolId> {
        let id = mod_mul_add(self.a as u64, i, self.b as u64, params)?;
        Ok(SymbolId(id as u32))
    }
}

// Canonical order is (B, A) so that designed-set output is stable.
impl Ord for Sopi {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.b, self.a).cmp(&(other.b, other.a))
    }
}

impl PartialOrd for Sopi {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Compact text form "A:B".
impl fmt::Display for Sopi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

impl FromStr for Sopi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::MalformedFile(format!("expected \"A:B\", got {s:?}"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        Ok(Self {
            a: a.trim().parse().map_err(|_| bad())?,
            b: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// A request for the first `length` positions of a stream object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixSpec {
    pub sopi: Sopi,
    pub length: u64,
}

impl PrefixSpec {
    pub fn new(sopi: Sopi, length: u64) -> Self {
        Self { sopi, length }
    }
}

/// Materializes a prefix: `[pi(P)[0], ..., pi(P)[length-1]]`.
///
/// Walks the permutation incrementally (one modular addition per position),
/// which agrees with `symbol_id_at` at every index.
pub fn prefix(spec: PrefixSpec, params: FieldParams) -> Result<Vec<SymbolId>> {
    let n = params.n();
    if spec.length > n {
        return Err(Error::PrefixTooLong {
            len: spec.length,
            n,
        });
    }
    let mut out = Vec::with_capacity(spec.length as usize);
    let mut cur = spec.sopi.a as u64;
    let b = spec.sopi.b as u64;
    for _ in 0..spec.length {
        out.push(SymbolId(cur as u32));
        cur = add_mod(cur, b, n);
    }
    Ok(out)
}

/// Draws a SOPI uniformly: A from [0, N), B from [1, N).
pub fn random_sopi(rng: &mut SplitMix64, params: FieldParams) -> Sopi {
    let n = params.n();
    Sopi {
        a: rng.next_below(n) as u32,
        b: (1 + rng.next_below(n - 1)) as u32,
    }
}
