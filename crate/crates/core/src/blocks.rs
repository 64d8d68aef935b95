//! Source-block partitioning for large objects and the 4-tuple SOPI
//! extension that interleaves symbols across blocks.
//!
//! An object of F bytes at symbol size T is split into Z source blocks of
//! nearly equal symbol counts (KL or KS, differing by at most one). The
//! 4-tuple SOPI (A, B, C, D) walks the combined stream so that every
//! aligned group of Z consecutive positions carries one symbol ID from each
//! block, in a cyclic block order shifted by C and D.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{mod_mul_add, FieldParams};
use crate::rng::SplitMix64;
use crate::sopi::{Sopi, SymbolId};

/// Split of Kt symbols into Z nearly equal blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Partition {
    #[serde(rename = "KL")]
    pub kl: u64,
    #[serde(rename = "KS")]
    pub ks: u64,
    #[serde(rename = "ZL")]
    pub zl: u64,
    #[serde(rename = "ZS")]
    pub zs: u64,
}

/// `(KL, KS, ZL, ZS)` with `KL = ceil(Kt/Z)`, `KS = floor(Kt/Z)`,
/// `ZL = Kt - KS*Z`, `ZS = Z - ZL`.
pub fn partition(kt: u64, z: u64) -> Result<Partition> {
    if z == 0 || z > kt {
        return Err(Error::InvalidPartition { kt, z });
    }
    let ks = kt / z;
    let kl = kt.div_ceil(z);
    let zl = kt - ks * z;
    Ok(Partition {
        kl,
        ks,
        zl,
        zs: z - zl,
    })
}

/// Full block layout of an object: sizes, symbol counts, and partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    #[serde(rename = "F")]
    pub f: u64,
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "WS")]
    pub ws: u64,
    #[serde(rename = "Kt")]
    pub kt: u64,
    #[serde(skip)]
    pub kmax: u64,
    #[serde(rename = "Z")]
    pub z: u64,
    #[serde(rename = "KL")]
    pub kl: u64,
    #[serde(rename = "KS")]
    pub ks: u64,
    #[serde(rename = "ZL")]
    pub zl: u64,
    #[serde(rename = "ZS")]
    pub zs: u64,
}

/// Derives the block structure from object size F, symbol size T, and the
/// maximum source-block size WS.
pub fn block_structure(f: u64, t: u64, ws: u64) -> Result<BlockStructure> {
    if t == 0 {
        return Err(Error::InvalidSymbolSize);
    }
    if f == 0 {
        return Err(Error::EmptyObject);
    }
    let kmax = ws / t;
    if kmax == 0 {
        return Err(Error::WorkingSizeTooSmall { ws, t });
    }
    let kt = f.div_ceil(t);
    let z = kt.div_ceil(kmax);
    let p = partition(kt, z)?;
    Ok(BlockStructure {
        f,
        t,
        ws,
        kt,
        kmax,
        z,
        kl: p.kl,
        ks: p.ks,
        zl: p.zl,
        zs: p.zs,
    })
}

impl BlockStructure {
    /// Source symbols in block `j`: the first ZL blocks carry KL symbols,
    /// the rest KS.
    pub fn block_symbols(&self, j: u64) -> Result<u64> {
        if j >= self.z {
            return Err(Error::InvalidPartition {
                kt: self.kt,
                z: self.z,
            });
        }
        Ok(if j < self.zl { self.kl } else { self.ks })
    }

    /// Byte range [start, end) of block `j` within the object; the final
    /// symbol of the last block is zero-padded to T bytes, so `end` may
    /// exceed F for that block.
    pub fn block_byte_range(&self, j: u64) -> Result<(u64, u64)> {
        let symbols = self.block_symbols(j)?;
        let start = if j < self.zl {
            j * self.kl * self.t
        } else {
            self.zl * self.kl * self.t + (j - self.zl) * self.ks * self.t
        };
        Ok((start, start + symbols * self.t))
    }
}

/// 4-tuple SOPI for multi-block objects: (A, B) select the symbol ID,
/// (C, D) select the block rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LargeSopi {
    #[serde(rename = "A")]
    pub a: u32,
    #[serde(rename = "B")]
    pub b: u32,
    #[serde(rename = "C")]
    pub c: u32,
    #[serde(rename = "D")]
    pub d: u32,
}

impl LargeSopi {
    pub fn new(a: u64, b: u64, c: u64, d: u64, params: FieldParams) -> Result<Self> {
        let n = params.n();
        if a >= n {
            return Err(Error::InvalidOffset { a, n });
        }
        if c >= n {
            return Err(Error::InvalidOffset { a: c, n });
        }
        if b == 0 || b >= n {
            return Err(Error::InvalidStride { b, n });
        }
        if d == 0 || d >= n {
            return Err(Error::InvalidStride { b: d, n });
        }
        Ok(Self {
            a: a as u32,
            b: b as u32,
            c: c as u32,
            d: d as u32,
        })
    }

    /// Extends a plain SOPI; any (C, D) works for Z = 1.
    pub fn from_sopi(sopi: Sopi, c: u64, d: u64, params: FieldParams) -> Result<Self> {
        Self::new(sopi.a as u64, sopi.b as u64, c, d, params)
    }
}

/// One symbol of one source block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockSymbolRef {
    pub block_index: u64,
    pub symbol_id: SymbolId,
}

/// Maps stream position `i` to `(block, symbol)`:
/// `r = floor(i/Z)`, `j = (A + r*B) mod N`, `j' = (i + C + r*D) mod Z`.
pub fn large_symbol_at(
    p: LargeSopi,
    i: u64,
    z: u64,
    params: FieldParams,
) -> Result<BlockSymbolRef> {
    let n = params.n();
    if z == 0 || i >= z.saturating_mul(n) {
        return Err(Error::StreamPositionOutOfRange { i, z });
    }
    let r = i / z;
    let j = mod_mul_add(p.a as u64, r, p.b as u64, params)?;
    let shift = i as u128 + p.c as u128 + r as u128 * p.d as u128;
    let block = (shift % z as u128) as u64;
    Ok(BlockSymbolRef {
        block_index: block,
        symbol_id: SymbolId(j as u32),
    })
}

/// Draws a 4-tuple SOPI uniformly: A, C from [0, N); B, D from [1, N).
pub fn random_large_sopi(rng: &mut SplitMix64, params: FieldParams) -> LargeSopi {
    let n = params.n();
    LargeSopi {
        a: rng.next_below(n) as u32,
        b: (1 + rng.next_below(n - 1)) as u32,
        c: rng.next_below(n) as u32,
        d: (1 + rng.next_below(n - 1)) as u32,
    }
}
