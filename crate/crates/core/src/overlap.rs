//! Duplicate counting between stream prefixes, the pairwise B-distance
//! metric, and the closed-form overlap/failure bounds.
//!
//! Two strides B0, B1 interact through *matches*: offset pairs (d0, d1)
//! with `d0*B0 ≡ d1*B1 (mod N)`. A match shifts any symbol-ID collision
//! between the two streams to another collision, so the minimal match
//! inside the difference set D = {-M+1..-1, 1..M-1} controls the
//! worst-case overlap of prefixes totaling at most M symbols.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{add_mod, centered, mod_inv, signed_to_residue, FieldParams};
use crate::sopi::{prefix, PrefixSpec};

/// The symmetric offset range reachable within prefixes of total length M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffSet {
    m: u64,
}

impl DiffSet {
    pub fn new(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::DiffSetTooSmall(m));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn contains(&self, d: i64) -> bool {
        d != 0 && d.unsigned_abs() < self.m
    }

    /// Designed-set precondition M^2 < N/2.
    pub(crate) fn check_design(&self, params: FieldParams) -> Result<()> {
        if 2 * (self.m as u128) * (self.m as u128) >= params.n() as u128 {
            return Err(Error::DiffSetTooLarge {
                m: self.m,
                n: params.n(),
            });
        }
        Ok(())
    }
}

/// Outcome of the minimal-match search between two strides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistanceResult {
    /// Minimal matching pair, reported with d0 > 0; distance = |d0| + |d1|.
    Matched { d0: i64, d1: i64, distance: u64 },
    /// No match anywhere in D x D; distance defined as 2M.
    Unmatched { distance: u64 },
}

impl DistanceResult {
    pub fn distance(&self) -> u64 {
        match *self {
            DistanceResult::Matched { distance, .. } => distance,
            DistanceResult::Unmatched { distance } => distance,
        }
    }

    pub fn is_matched(&self) -> bool {
        matches!(self, DistanceResult::Matched { .. })
    }
}

/// True iff `d0*B0 ≡ d1*B1 (mod N)`, with signed offsets mapped to residues.
pub fn matches(d0: i64, d1: i64, b0: u64, b1: u64, params: FieldParams) -> bool {
    let n = params.n();
    let lhs = signed_to_residue(d0, n) as u128 * b0 as u128 % n as u128;
    let rhs = signed_to_residue(d1, n) as u128 * b1 as u128 % n as u128;
    lhs == rhs
}

fn check_stride(b: u64, params: FieldParams) -> Result<()> {
    if b == 0 || b >= params.n() {
        return Err(Error::InvalidStride { b, n: params.n() });
    }
    Ok(())
}

/// Finds the minimal matching pair between B0 and B1 within D x D.
///
/// For each d0 the matching d1 is determined mod N (d1 = d0*B0*B1^-1), and
/// because M^2 < N/2 at most one representative lies in D. Scanning d0
/// upward can stop once d0 + 1 reaches the best distance found, since any
/// later match is at least that far. Ties on distance keep the smaller d0.
pub fn distance(b0: u64, b1: u64, diff: DiffSet, params: FieldParams) -> Result<DistanceResult> {
    check_stride(b0, params)?;
    check_stride(b1, params)?;
    diff.check_design(params)?;
    let n = params.n();
    let m = diff.m();
    let step = mod_inv(b1, params)? as u128 * b0 as u128 % n as u128;
    let step = step as u64;

    let mut best: Option<(u64, i64, u64)> = None;
    let mut cur = 0u64;
    for d0 in 1..m {
        cur = add_mod(cur, step, n);
        let d1 = centered(cur, n);
        if diff.contains(d1) {
            let dist = d0 + d1.unsigned_abs();
            if best.is_none_or(|(_, _, b)| dist < b) {
                best = Some((d0, d1, dist));
            }
        }
        if let Some((_, _, b)) = best {
            if d0 + 1 >= b {
                break;
            }
        }
    }
    Ok(match best {
        Some((d0, d1, dist)) => DistanceResult::Matched {
            d0: d0 as i64,
            d1,
            distance: dist,
        },
        None => DistanceResult::Unmatched { distance: 2 * m },
    })
}

/// Exhaustive O(M^2) scan over D x D; test oracle for [`distance`].
pub fn distance_bruteforce(
    b0: u64,
    b1: u64,
    diff: DiffSet,
    params: FieldParams,
) -> Result<DistanceResult> {
    check_stride(b0, params)?;
    check_stride(b1, params)?;
    diff.check_design(params)?;
    let m = diff.m() as i64;
    let mut best: Option<(i64, i64, u64)> = None;
    for d0 in 1..m {
        for d1 in -(m - 1)..m {
            if d1 == 0 || !matches(d0, d1, b0, b1, params) {
                continue;
            }
            let dist = d0.unsigned_abs() + d1.unsigned_abs();
            if best.is_none_or(|(_, _, b)| dist < b) {
                best = Some((d0, d1, dist));
            }
        }
    }
    Ok(match best {
        Some((d0, d1, dist)) => DistanceResult::Matched {
            d0,
            d1,
            distance: dist,
        },
        None => DistanceResult::Unmatched {
            distance: 2 * diff.m(),
        },
    })
}

/// Decides `distance(B0, B1) >= d` given the precomputed per-unit step
/// `B0 * B1^-1 mod N`, without finding the exact minimum.
///
/// Only d0 <= d - 2 can participate in a match of distance < d, so the
/// scan is O(d) instead of O(M).
pub(crate) fn distance_at_least_with_step(
    step: u64,
    d: u64,
    diff: DiffSet,
    params: FieldParams,
) -> bool {
    let n = params.n();
    let m = diff.m();
    let mut cur = 0u64;
    let limit = d.saturating_sub(2).min(m - 1);
    for d0 in 1..=limit {
        cur = add_mod(cur, step, n);
        let d1 = centered(cur, n);
        if diff.contains(d1) && d0 + d1.unsigned_abs() < d {
            return false;
        }
    }
    true
}

/// Count of distinct symbol IDs across materialized prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DistinctCount {
    pub total: u64,
    pub distinct: u64,
    pub duplicates: u64,
}

pub fn count_distinct(prefixes: &[PrefixSpec], params: FieldParams) -> Result<DistinctCount> {
    let total: u64 = prefixes.iter().map(|p| p.length).sum();
    if total > params.n() {
        return Err(Error::AggregateTooLong {
            total,
            n: params.n(),
        });
    }
    let mut seen = HashSet::with_capacity(total as usize);
    for spec in prefixes {
        for id in prefix(*spec, params)? {
            seen.insert(id);
        }
    }
    let distinct = seen.len() as u64;
    Ok(DistinctCount {
        total,
        distinct,
        duplicates: total - distinct,
    })
}

/// Worst-case distinct-ID lower bound for a pair of prefixes of total
/// length m whose strides are at distance d: `m - floor((m-2)/d) - 1`.
pub fn pair_overlap_lower_bound(m: u64, d: u64) -> u64 {
    assert!(d >= 2, "distance must be at least 2");
    if m < 2 {
        return m;
    }
    m - (m - 2) / d - 1
}

/// Worst-case distinct-ID lower bound for s prefixes totaling m symbols
/// with pairwise stride distance at least d:
/// `m - (s-1) * ((m-s)/d + s/2)`.
pub fn multi_overlap_lower_bound(m: u64, s: u64, d: u64) -> f64 {
    assert!(s >= 1 && m >= s, "need s >= 1 and m >= s");
    assert!(d >= 2, "distance must be at least 2");
    let (m, s, d) = (m as f64, s as f64, d as f64);
    m - (s - 1.0) * ((m - s) / d + s / 2.0)
}

/// Expected distinct IDs among M symbols drawn from independently random
/// streams is at least `M - (M-1)^2 / (2N)`.
pub fn expected_distinct_lower_bound(m: u64, params: FieldParams) -> f64 {
    assert!(m >= 1, "need at least one symbol");
    let mf = m as f64;
    mf - (mf - 1.0) * (mf - 1.0) / (2.0 * params.n() as f64)
}

/// Probability bound `1 / (delta^2 * N)` that M = K/(1-delta) received
/// symbols fail to contain K distinct IDs.
pub fn theorem_failure_bound(delta: f64, params: FieldParams) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    Ok(1.0 / (delta * delta * params.n() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::mod_inv;
    use crate::rng::SplitMix64;
    use crate::sopi::Sopi;

    fn p(n: u64) -> FieldParams {
        FieldParams::new(n).unwrap()
    }

    #[test]
    fn matches_examples() {
        let params = p(10007);
        assert!(matches(2, 1, 1, 2, params));
        assert!(matches(0, 0, 3, 9999, params));
        assert!(!matches(1, 1, 3, 5, params));
        // Signed offsets: (-2, -1) is the mirror of (2, 1).
        assert!(matches(-2, -1, 1, 2, params));
    }

    #[test]
    fn distance_examples() {
        let params = p(10007);
        let diff = DiffSet::new(20).unwrap();
        assert_eq!(
            distance(3, 5, diff, params).unwrap(),
            DistanceResult::Matched {
                d0: 5,
                d1: 3,
                distance: 8
            }
        );
        assert_eq!(
            distance(7, 7, diff, params).unwrap(),
            DistanceResult::Matched {
                d0: 1,
                d1: 1,
                distance: 2
            }
        );
        assert_eq!(
            distance(1, 2, diff, params).unwrap(),
            DistanceResult::Matched {
                d0: 2,
                d1: 1,
                distance: 3
            }
        );
    }

    #[test]
    fn distance_unmatched_case() {
        // With M = 3 the only reachable ratios from B0 = 1 are
        // {1, 2, 1/2} and their negations; B1 = 7 hits none of them.
        let params = p(10007);
        let diff = DiffSet::new(3).unwrap();
        let r = distance(1, 7, diff, params).unwrap();
        assert_eq!(r, DistanceResult::Unmatched { distance: 6 });
        assert_eq!(distance_bruteforce(1, 7, diff, params).unwrap(), r);
    }

    #[test]
    fn distance_rejects_oversized_diff_set() {
        let params = p(10007);
        // 71^2 = 5041 >= 10007/2.
        let diff = DiffSet::new(71).unwrap();
        assert_eq!(
            distance(1, 2, diff, params),
            Err(Error::DiffSetTooLarge { m: 71, n: 10007 })
        );
        let ok = DiffSet::new(70).unwrap();
        assert!(distance(1, 2, ok, params).is_ok());
    }

    #[test]
    fn distance_agrees_with_bruteforce() {
        let params = p(10007);
        let diff = DiffSet::new(50).unwrap();
        let mut rng = SplitMix64::new(11);
        for _ in 0..200 {
            let b0 = 1 + rng.next_below(10006);
            let b1 = 1 + rng.next_below(10006);
            let fast = distance(b0, b1, diff, params).unwrap();
            let slow = distance_bruteforce(b0, b1, diff, params).unwrap();
            assert_eq!(fast, slow, "B0={b0} B1={b1}");
        }
    }

    #[test]
    fn threshold_scan_agrees_with_distance() {
        let params = p(10007);
        let diff = DiffSet::new(50).unwrap();
        let mut rng = SplitMix64::new(17);
        for _ in 0..500 {
            let b0 = 1 + rng.next_below(10006);
            let b1 = 1 + rng.next_below(10006);
            let d = 2 + rng.next_below(99);
            let step =
                (mod_inv(b1, params).unwrap() as u128 * b0 as u128 % 10007) as u64;
            let exact = distance(b0, b1, diff, params).unwrap().distance();
            assert_eq!(
                distance_at_least_with_step(step, d, diff, params),
                exact >= d,
                "B0={b0} B1={b1} d={d} exact={exact}"
            );
        }
    }

    #[test]
    fn match_closure_under_addition() {
        let params = p(10007);
        let mut rng = SplitMix64::new(5);
        let mut found = 0;
        while found < 50 {
            let b0 = 1 + rng.next_below(10006);
            let b1 = 1 + rng.next_below(10006);
            let diff = DiffSet::new(60).unwrap();
            if let DistanceResult::Matched { d0, d1, .. } =
                distance(b0, b1, diff, params).unwrap()
            {
                for k in 2..5i64 {
                    assert!(matches(k * d0, k * d1, b0, b1, params));
                }
                assert!(matches(d0 + d0, d1 + d1, b0, b1, params));
                found += 1;
            }
        }
    }

    #[test]
    fn matching_pair_translates_collisions() {
        let params = p(10007);
        let n = 10007u64;
        let diff = DiffSet::new(60).unwrap();
        let mut rng = SplitMix64::new(23);
        let mut found = 0;
        while found < 50 {
            let s0 = crate::sopi::random_sopi(&mut rng, params);
            let s1 = crate::sopi::random_sopi(&mut rng, params);
            let res = distance(s0.b as u64, s1.b as u64, diff, params).unwrap();
            let DistanceResult::Matched { d0, d1, .. } = res else {
                continue;
            };
            // Position pair sharing a symbol ID: p0 = 0, p1 solves
            // A0 = A1 + p1*B1.
            let delta = signed_to_residue(s0.a as i64 - s1.a as i64, n);
            let p1 = (delta as u128 * mod_inv(s1.b as u64, params).unwrap() as u128
                % n as u128) as u64;
            let id0 = s0.symbol_id_at(0, params).unwrap();
            assert_eq!(s1.symbol_id_at(p1, params).unwrap(), id0);
            // Shift both positions by the matching pair.
            let q0 = signed_to_residue(d0, n);
            let q1 = signed_to_residue(p1 as i64 + d1, n);
            assert_eq!(
                s0.symbol_id_at(q0, params).unwrap(),
                s1.symbol_id_at(q1, params).unwrap()
            );
            found += 1;
        }
    }

    #[test]
    fn count_distinct_examples() {
        let params = p(101);
        let s = Sopi::new(4, 9, params).unwrap();
        let same = [PrefixSpec::new(s, 5), PrefixSpec::new(s, 5)];
        let c = count_distinct(&same, params).unwrap();
        assert_eq!((c.total, c.distinct, c.duplicates), (10, 5, 5));

        let a = Sopi::new(0, 1, params).unwrap();
        let b = Sopi::new(2, 1, params).unwrap();
        let shifted = [PrefixSpec::new(a, 4), PrefixSpec::new(b, 4)];
        let c = count_distinct(&shifted, params).unwrap();
        assert_eq!(c.distinct, 6);

        let c = count_distinct(&[], params).unwrap();
        assert_eq!((c.total, c.distinct), (0, 0));
    }

    #[test]
    fn count_distinct_rejects_oversized_aggregate() {
        let params = p(101);
        let s = Sopi::new(0, 1, params).unwrap();
        let specs = [PrefixSpec::new(s, 60), PrefixSpec::new(s, 60)];
        assert_eq!(
            count_distinct(&specs, params),
            Err(Error::AggregateTooLong { total: 120, n: 101 })
        );
    }

    #[test]
    fn pair_bound_examples() {
        assert_eq!(pair_overlap_lower_bound(100, 101), 99);
        assert_eq!(pair_overlap_lower_bound(100, 8), 87);
        assert_eq!(pair_overlap_lower_bound(1, 5), 1);
        assert_eq!(pair_overlap_lower_bound(0, 5), 0);
    }

    #[test]
    fn multi_bound_examples() {
        let v = multi_overlap_lower_bound(30000, 10, 1000);
        assert!((v - 29685.09).abs() < 1e-9);
        assert!((30000.0 - v) / 30000.0 < 0.015);

        assert_eq!(multi_overlap_lower_bound(500, 1, 7), 500.0);

        let v = multi_overlap_lower_bound(200, 2, 101);
        assert!((v - (200.0 - (198.0 / 101.0 + 1.0))).abs() < 1e-12);
        assert!((v - 197.0396).abs() < 1e-4);
    }

    #[test]
    fn expected_distinct_examples() {
        let m31 = FieldParams::mersenne31();
        assert_eq!(expected_distinct_lower_bound(1, m31), 1.0);
        let v = expected_distinct_lower_bound(65535, m31);
        assert!((v - 65534.0).abs() < 0.001, "v={v}");
    }

    #[test]
    fn expected_distinct_holds_in_monte_carlo() {
        let params = p(10007);
        let m_total = 100u64;
        let trials = 100_000u64;
        let mut rng = SplitMix64::new(77);
        let mut sum_distinct = 0u64;
        for _ in 0..trials {
            let s0 = crate::sopi::random_sopi(&mut rng, params);
            let s1 = crate::sopi::random_sopi(&mut rng, params);
            let specs = [PrefixSpec::new(s0, 50), PrefixSpec::new(s1, 50)];
            sum_distinct += count_distinct(&specs, params).unwrap().distinct;
        }
        let mean = sum_distinct as f64 / trials as f64;
        assert!(mean >= expected_distinct_lower_bound(m_total, params));
    }

    #[test]
    fn failure_bound_examples() {
        let m31 = FieldParams::mersenne31();
        let b = theorem_failure_bound(0.01, m31).unwrap();
        assert!((b - 4.657e-6).abs() < 1e-8);
        assert!(1.0 - b >= 0.999995);

        let b = theorem_failure_bound(0.1, m31).unwrap();
        assert!((b - 4.66e-8).abs() < 1e-10);
        assert!(1.0 - b >= 0.99999995);

        let vacuous = theorem_failure_bound(1.0 / (m31.n() as f64).sqrt(), m31).unwrap();
        assert!((vacuous - 1.0).abs() < 1e-9);

        assert!(theorem_failure_bound(0.0, m31).is_err());
        assert!(theorem_failure_bound(1.0, m31).is_err());
    }

    #[test]
    fn failure_bound_monotone() {
        let m31 = FieldParams::mersenne31();
        let p10007 = p(10007);
        let mut prev = f64::INFINITY;
        for delta in [0.01, 0.05, 0.1, 0.3, 0.9] {
            let b = theorem_failure_bound(delta, m31).unwrap();
            assert!(b < prev);
            assert!(b < theorem_failure_bound(delta, p10007).unwrap());
            prev = b;
        }
    }

    #[test]
    fn lemma_bound_holds_for_random_pairs() {
        // Small-scale version of the overlap-lemma soundness sweep.
        let params = p(10007);
        let diff = DiffSet::new(60).unwrap();
        let mut rng = SplitMix64::new(31);
        for _ in 0..50 {
            let s0 = crate::sopi::random_sopi(&mut rng, params);
            let s1 = crate::sopi::random_sopi(&mut rng, params);
            let d = distance(s0.b as u64, s1.b as u64, diff, params)
                .unwrap()
                .distance();
            for m in 2..=60u64 {
                for m0 in 0..=m {
                    let specs = [PrefixSpec::new(s0, m0), PrefixSpec::new(s1, m - m0)];
                    let c = count_distinct(&specs, params).unwrap();
                    assert!(
                        c.distinct >= pair_overlap_lower_bound(m, d),
                        "B0={} B1={} m={m} m0={m0} d={d} distinct={}",
                        s0.b,
                        s1.b,
                        c.distinct
                    );
                }
            }
        }
    }
}
