//! Deterministic construction of SOPI sets with guaranteed pairwise stride
//! distance and disjoint per-stride prefixes.
//!
//! The set is built in two layers: a stride set B in which every pair is at
//! distance >= d, and for each stride an offset progression A, A + M*B,
//! A + 2*M*B, ... whose length-M prefixes tile the permutation without
//! overlap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{centered, mod_inv, FieldParams};
use crate::overlap::{distance, distance_at_least_with_step, DiffSet};
use crate::rng::SplitMix64;
use crate::sopi::Sopi;

/// Construction parameters: field, minimum pairwise distance d, and the
/// aggregate prefix budget M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignParams {
    field: FieldParams,
    d: u64,
    m: u64,
}

impl DesignParams {
    pub fn new(field: FieldParams, d: u64, m: u64) -> Result<Self> {
        let diff = DiffSet::new(m)?;
        diff.check_design(field)?;
        if d < 2 || d > 2 * m {
            return Err(Error::DistanceOutOfRange { d, m });
        }
        Ok(Self { field, d, m })
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    fn diff(&self) -> DiffSet {
        DiffSet::new(self.m).expect("validated at construction")
    }
}

/// How the stride set is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Accept ascending candidates whose distance to every accepted stride
    /// is at least d. Memory O(|B|); works at N = 2^31 - 1.
    Incremental,
    /// Pool-deletion sieve: adding B removes every i*B*j^-1 with
    /// |i| + |j| < d from the candidate pool. Memory O(N) bits, so the
    /// modulus is capped at 2^24.
    Sieve,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Incremental => write!(f, "incremental"),
            Strategy::Sieve => write!(f, "sieve"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incremental" => Ok(Strategy::Incremental),
            "sieve" => Ok(Strategy::Sieve),
            other => Err(Error::MalformedFile(format!("unknown strategy {other:?}"))),
        }
    }
}

const SIEVE_MAX_N: u64 = 1 << 24;

/// Builds a stride set with pairwise distance >= d, stopping at `max_count`
/// elements or exhaustion of the candidate space.
pub fn build_b_set(design: &DesignParams, max_count: usize, strategy: Strategy) -> Result<Vec<u64>> {
    if max_count == 0 {
        return Err(Error::ZeroCap);
    }
    match strategy {
        Strategy::Incremental => Ok(build_b_incremental(design, max_count)),
        Strategy::Sieve => build_b_sieve(design, max_count),
    }
}

fn build_b_incremental(design: &DesignParams, max_count: usize) -> Vec<u64> {
    let params = design.field();
    let n = params.n();
    let diff = design.diff();
    let d = design.d();
    let mut accepted: Vec<u64> = Vec::new();
    for candidate in 1..n {
        let inv = mod_inv(candidate, params).expect("candidate is nonzero");
        let ok = accepted.iter().all(|&b0| {
            let step = (b0 as u128 * inv as u128 % n as u128) as u64;
            distance_at_least_with_step(step, d, diff, params)
        });
        if ok {
            accepted.push(candidate);
            if accepted.len() == max_count {
                break;
            }
        }
    }
    accepted
}

fn build_b_sieve(design: &DesignParams, max_count: usize) -> Result<Vec<u64>> {
    let params = design.field();
    let n = params.n();
    if n > SIEVE_MAX_N {
        return Err(Error::SieveModulusTooLarge(n));
    }
    let d = design.d();
    let m = design.m();
    let mut pool = vec![true; n as usize];
    pool[0] = false;
    // j ranges over +-1..j_max; inverses are reused across every added B.
    let j_max = (d - 2).min(m - 1);
    let inv: Vec<u64> = (1..=j_max)
        .map(|j| mod_inv(j, params).expect("nonzero"))
        .collect();

    let mut accepted = Vec::new();
    let mut cursor = 1usize;
    loop {
        while cursor < n as usize && !pool[cursor] {
            cursor += 1;
        }
        if cursor >= n as usize {
            break;
        }
        let b = cursor as u64;
        accepted.push(b);
        pool[cursor] = false;
        if accepted.len() == max_count {
            break;
        }
        // Only i > 0 is scanned: i*B*j^-1 = (-i)*B*(-j)^-1, so the negated
        // half deletes the same residues.
        let i_max = (d - 2).min(m - 1);
        for i in 1..=i_max {
            let upper = (d - 1 - i).min(m - 1);
            for j in 1..=upper {
                let base = (i as u128 * b as u128 % n as u128) as u64;
                let pos = (base as u128 * inv[(j - 1) as usize] as u128 % n as u128) as u64;
                if pos != 0 {
                    pool[pos as usize] = false;
                    pool[(n - pos) as usize] = false;
                }
            }
        }
    }
    Ok(accepted)
}

/// Offset progression for stride B starting from a seeded random A; yields
/// `min(max_count, floor(N/M))` offsets whose length-M prefixes are
/// pairwise disjoint.
pub fn build_a_set(b: u64, design: &DesignParams, max_count: usize, seed: u64) -> Result<Vec<u64>> {
    let params = design.field();
    if b == 0 || b >= params.n() {
        return Err(Error::InvalidStride { b, n: params.n() });
    }
    let mut rng = SplitMix64::new(seed);
    let first = rng.next_below(params.n());
    Ok(a_progression(first, b, design, max_count))
}

/// Same progression from an explicit initial offset.
pub fn build_a_set_from(first: u64, b: u64, design: &DesignParams, max_count: usize) -> Result<Vec<u64>> {
    let params = design.field();
    params.check_residue(first)?;
    if b == 0 || b >= params.n() {
        return Err(Error::InvalidStride { b, n: params.n() });
    }
    Ok(a_progression(first, b, design, max_count))
}

fn a_progression(first: u64, b: u64, design: &DesignParams, max_count: usize) -> Vec<u64> {
    let n = design.field().n();
    let count = max_count.min((n / design.m()) as usize);
    let step = (design.m() as u128 * b as u128 % n as u128) as u64;
    let mut out = Vec::with_capacity(count);
    let mut a = first;
    for _ in 0..count {
        out.push(a);
        a = crate::field::add_mod(a, step, n);
    }
    out
}

/// A designed SOPI collection with its construction provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SopiSet {
    design: DesignParams,
    strategy: Strategy,
    seed: u64,
    b_values: Vec<u64>,
    a_per_b: Vec<Vec<u64>>,
}

/// On-disk form: parameters plus the flat entry list sorted by (B, A).
#[derive(Debug, Serialize, Deserialize)]
struct SetFile {
    #[serde(rename = "N")]
    n: u64,
    d: u64,
    #[serde(rename = "M")]
    m: u64,
    seed: u64,
    strategy: Strategy,
    entries: Vec<Sopi>,
}

impl SopiSet {
    pub fn design(&self) -> &DesignParams {
        &self.design
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn b_values(&self) -> &[u64] {
        &self.b_values
    }

    pub fn a_values(&self, b_index: usize) -> &[u64] {
        &self.a_per_b[b_index]
    }

    pub fn len(&self) -> usize {
        self.a_per_b.iter().map(|a| a.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All entries in canonical (B, A) order; palette index k is stable.
    pub fn sopis(&self) -> Vec<Sopi> {
        let mut out = Vec::with_capacity(self.len());
        for (bi, &b) in self.b_values.iter().enumerate() {
            for &a in &self.a_per_b[bi] {
                out.push(Sopi {
                    a: a as u32,
                    b: b as u32,
                });
            }
        }
        out.sort();
        out
    }

    /// Re-checks both construction guarantees: every cross-stride pair at
    /// distance >= d, every same-stride offset pair prefix-disjoint.
    pub fn verify(&self) -> Result<()> {
        let params = self.design.field();
        let diff = DiffSet::new(self.design.m())?;
        for (i, &b0) in self.b_values.iter().enumerate() {
            for &b1 in &self.b_values[i + 1..] {
                let dist = distance(b0, b1, diff, params)?.distance();
                if dist < self.design.d() {
                    return Err(Error::AuditFailure(format!(
                        "strides {b0} and {b1} at distance {dist} < {}",
                        self.design.d()
                    )));
                }
            }
        }
        // Same-stride prefixes [0, M) are disjoint iff the offset gap,
        // measured in permutation steps, is at least M in both directions.
        let n = params.n();
        let m = self.design.m();
        for (bi, &b) in self.b_values.iter().enumerate() {
            let inv = mod_inv(b, params)?;
            let offsets = &self.a_per_b[bi];
            for (i, &a0) in offsets.iter().enumerate() {
                for &a1 in &offsets[i + 1..] {
                    let delta = crate::field::signed_to_residue(a1 as i64 - a0 as i64, n);
                    let steps = (delta as u128 * inv as u128 % n as u128) as u64;
                    let gap = centered(steps, n);
                    if gap.unsigned_abs() < m {
                        return Err(Error::AuditFailure(format!(
                            "offsets {a0} and {a1} of stride {b} overlap (gap {gap})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = SetFile {
            n: self.design.field().n(),
            d: self.design.d(),
            m: self.design.m(),
            seed: self.seed,
            strategy: self.strategy,
            entries: self.sopis(),
        };
        serde_json::to_string(&file).expect("set serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SetFile =
            serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))?;
        let field = FieldParams::new(file.n)?;
        let design = DesignParams::new(field, file.d, file.m)?;
        let mut b_values: Vec<u64> = Vec::new();
        let mut a_per_b: Vec<Vec<u64>> = Vec::new();
        let mut entries = file.entries;
        entries.sort();
        for s in entries {
            if s.a as u64 >= file.n || s.b == 0 || s.b as u64 >= file.n {
                return Err(Error::MalformedFile(format!("entry {s} out of range")));
            }
            if b_values.last() != Some(&(s.b as u64)) {
                b_values.push(s.b as u64);
                a_per_b.push(Vec::new());
            }
            let list = a_per_b.last_mut().expect("pushed above");
            if list.contains(&(s.a as u64)) {
                return Err(Error::MalformedFile(format!("duplicate entry {s}")));
            }
            list.push(s.a as u64);
        }
        Ok(Self {
            design,
            strategy: file.strategy,
            seed: file.seed,
            b_values,
            a_per_b,
        })
    }
}

/// Composes the stride search and the offset progressions into a full set.
/// Deterministic for a given (design, caps, seed, strategy).
pub fn build_sopi_set(
    design: &DesignParams,
    b_cap: usize,
    a_cap: usize,
    seed: u64,
    strategy: Strategy,
) -> Result<SopiSet> {
    let b_values = build_b_set(design, b_cap, strategy)?;
    let mut rng = SplitMix64::new(seed);
    let mut a_per_b = Vec::with_capacity(b_values.len());
    for &b in &b_values {
        let first = rng.next_below(design.field().n());
        a_per_b.push(a_progression(first, b, design, a_cap));
    }
    Ok(SopiSet {
        design: *design,
        strategy,
        seed,
        b_values,
        a_per_b,
    })
}

/// Guaranteed lower bounds on set capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityBounds {
    /// `(N-1) / d^2` strides.
    pub b_lower: f64,
    /// `N/M - 1` offsets per stride.
    pub a_lower: f64,
    /// `N^2 / (d^2 * M)` SOPIs in total.
    pub total_lower: f64,
}

pub fn capacity_bounds(design: &DesignParams) -> CapacityBounds {
    let n = design.field().n() as f64;
    let d = design.d() as f64;
    let m = design.m() as f64;
    CapacityBounds {
        b_lower: (n - 1.0) / (d * d),
        a_lower: n / m - 1.0,
        total_lower: n * n / (d * d * m),
    }
}
