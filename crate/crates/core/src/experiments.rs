//! Monte Carlo harnesses: random-SOPI duplicate trials against the failure
//! bound, designed-set overlap measurement against the worst-case bound,
//! and a multi-source download simulation over assigned SOPIs.
//!
//! Every trial derives its own RNG substream from (seed, trial_index), so
//! trials run in any order (including in parallel) and reports are
//! bit-identical for a given configuration.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{large_symbol_at, BlockStructure, LargeSopi};
use crate::coloring::{select_streams, Assignment};
use crate::design::SopiSet;
use crate::error::{Error, Result};
use crate::field::add_mod;
use crate::field::FieldParams;
use crate::overlap::theorem_failure_bound;
use crate::rng::SplitMix64;
use crate::sopi::{random_sopi, Sopi};

/// How a trial's total symbol budget is divided among its streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRule {
    /// Lengths differ by at most one.
    Equal,
    /// Uniformly random composition of the total.
    Random,
}

impl std::str::FromStr for SplitRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(SplitRule::Equal),
            "random" => Ok(SplitRule::Random),
            other => Err(Error::InvalidConfig(format!("unknown split rule {other:?}"))),
        }
    }
}

/// Parameters of a random-SOPI duplicate experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    field: FieldParams,
    k: u64,
    delta: f64,
    s: usize,
    split: SplitRule,
    trials: u64,
    seed: u64,
}

impl TrialConfig {
    pub fn new(
        field: FieldParams,
        k: u64,
        delta: f64,
        s: usize,
        split: SplitRule,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::DeltaOutOfRange(delta));
        }
        if k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if s == 0 {
            return Err(Error::InvalidConfig("need at least one stream".into()));
        }
        if trials == 0 {
            return Err(Error::InvalidConfig("need at least one trial".into()));
        }
        let cfg = Self {
            field,
            k,
            delta,
            s,
            split,
            trials,
            seed,
        };
        let m = cfg.total_symbols();
        if (m as u128) * (m as u128) > 2 * field.n() as u128 {
            return Err(Error::TheoremPreconditionViolated { m, n: field.n() });
        }
        Ok(cfg)
    }

    pub fn field(&self) -> FieldParams {
        self.field
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn streams(&self) -> usize {
        self.s
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Total received symbols `M = ceil(K / (1 - delta))`.
    pub fn total_symbols(&self) -> u64 {
        (self.k as f64 / (1.0 - self.delta)).ceil() as u64
    }

    fn split_lengths(&self, rng: &mut SplitMix64) -> Vec<u64> {
        let m = self.total_symbols();
        match self.split {
            SplitRule::Equal => equal_split(m, self.s),
            SplitRule::Random => random_split(m, self.s, rng),
        }
    }
}

fn equal_split(total: u64, parts: usize) -> Vec<u64> {
    let base = total / parts as u64;
    let extra = (total % parts as u64) as usize;
    (0..parts)
        .map(|i| base + u64::from(i < extra))
        .collect()
}

fn random_split(total: u64, parts: usize, rng: &mut SplitMix64) -> Vec<u64> {
    let mut cuts: Vec<u64> = (0..parts - 1).map(|_| rng.next_below(total + 1)).collect();
    cuts.sort_unstable();
    let mut lengths = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        lengths.push(c - prev);
        prev = c;
    }
    lengths.push(total - prev);
    lengths
}

/// Result of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialOutcome {
    pub distinct: u64,
    pub duplicates: u64,
    pub recoverable: bool,
}

/// Materializes the given prefixes and counts distinct IDs; recoverable
/// iff at least `k` are distinct. Test hook for forced stream choices.
pub fn run_trial_with_streams(
    streams: &[(Sopi, u64)],
    k: u64,
    params: FieldParams,
) -> Result<TrialOutcome> {
    let n = params.n();
    let mut ids: Vec<u32> = Vec::with_capacity(streams.iter().map(|&(_, l)| l as usize).sum());
    for &(sopi, len) in streams {
        if len > n {
            return Err(Error::PrefixTooLong { len, n });
        }
        let mut cur = sopi.a as u64;
        for _ in 0..len {
            ids.push(cur as u32);
            cur = add_mod(cur, sopi.b as u64, n);
        }
    }
    let total = ids.len() as u64;
    ids.sort_unstable();
    ids.dedup();
    let distinct = ids.len() as u64;
    Ok(TrialOutcome {
        distinct,
        duplicates: total - distinct,
        recoverable: distinct >= k,
    })
}

/// One Monte Carlo trial: draws `s` independent random SOPIs on the trial's
/// substream, splits M symbols among them, and counts distinct IDs.
pub fn run_random_trial(config: &TrialConfig, trial_index: u64) -> TrialOutcome {
    let mut rng = SplitMix64::substream(config.seed, trial_index);
    let sopis: Vec<Sopi> = (0..config.s)
        .map(|_| random_sopi(&mut rng, config.field))
        .collect();
    let lengths = config.split_lengths(&mut rng);
    let streams: Vec<(Sopi, u64)> = sopis.into_iter().zip(lengths).collect();
    run_trial_with_streams(&streams, config.k, config.field)
        .expect("config invariants bound all lengths")
}

/// Aggregate statistics over all trials of a configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub trials_run: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub theorem_bound: f64,
    /// Bound plus three binomial standard deviations at the bound level.
    pub bound_with_noise: f64,
    pub within_bound: bool,
    pub mean_duplicates: f64,
    /// Expectation bound `(M-1)^2 / (2N)` on mean duplicates.
    pub mean_duplicates_bound: f64,
    pub max_duplicates: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Runs every trial (in parallel) and checks the empirical failure rate
/// against `1/(delta^2 N)` plus sampling noise.
pub fn estimate_failure_probability(config: &TrialConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let (failures, dup_sum, dup_max) = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let o = run_random_trial(config, t);
            (u64::from(!o.recoverable), o.duplicates, o.duplicates)
        })
        .reduce(
            || (0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)),
        );
    let bound = theorem_failure_bound(config.delta, config.field)?;
    let clamped = bound.min(1.0);
    let sigma = (clamped * (1.0 - clamped) / config.trials as f64).sqrt();
    let failure_rate = failures as f64 / config.trials as f64;
    let m = config.total_symbols() as f64;
    Ok(ExperimentReport {
        trials_run: config.trials,
        failures,
        failure_rate,
        theorem_bound: bound,
        bound_with_noise: bound + 3.0 * sigma,
        within_bound: failure_rate <= bound + 3.0 * sigma,
        mean_duplicates: dup_sum as f64 / config.trials as f64,
        mean_duplicates_bound: (m - 1.0) * (m - 1.0) / (2.0 * config.field.n() as f64),
        max_duplicates: dup_max,
        wall_time: start.elapsed(),
    })
}

/// Overlap measurement over random tuples drawn from a designed set.
#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub samples: u64,
    pub streams: usize,
    pub total_symbols: u64,
    pub distance_floor: u64,
    /// Worst-case duplicate count `(s-1) * ((m-s)/d + s/2)`.
    pub bound_duplicates: f64,
    pub bound_fraction: f64,
    pub worst_duplicates: u64,
    pub worst_fraction: f64,
    pub mean_duplicates: f64,
    /// Samples exceeding the bound; any nonzero value falsifies the design.
    pub violations: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Samples `s`-subsets of the set with random prefix splits totaling `m`
/// and measures duplicates against the corollary bound.
pub fn designed_overlap_experiment(
    set: &SopiSet,
    s: usize,
    m: u64,
    samples: u64,
    seed: u64,
) -> Result<OverlapReport> {
    if s == 0 || s as u64 > set.len() as u64 {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= s <= {} set entries, got s={s}",
            set.len()
        )));
    }
    if m < s as u64 {
        return Err(Error::InvalidConfig(format!(
            "total symbols m={m} below stream count s={s}"
        )));
    }
    if m > set.design().m() {
        return Err(Error::InvalidConfig(format!(
            "m={m} exceeds the design budget M={}",
            set.design().m()
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    let start = Instant::now();
    let params = set.design().field();
    let d = set.design().d();
    let sopis = set.sopis();
    let bound = (s as f64 - 1.0) * ((m as f64 - s as f64) / d as f64 + s as f64 / 2.0);

    let (dup_sum, dup_max, violations) = (0..samples)
        .into_par_iter()
        .map(|sample| {
            let mut rng = SplitMix64::substream(seed, sample);
            let mut idx: Vec<usize> = (0..sopis.len()).collect();
            for i in 0..s {
                let j = i + rng.next_below((idx.len() - i) as u64) as usize;
                idx.swap(i, j);
            }
            let lengths = random_split(m, s, &mut rng);
            let streams: Vec<(Sopi, u64)> = idx[..s]
                .iter()
                .map(|&i| sopis[i])
                .zip(lengths)
                .collect();
            let o = run_trial_with_streams(&streams, 0, params)
                .expect("m is below the design budget");
            let violated = u64::from(o.duplicates as f64 > bound);
            (o.duplicates, o.duplicates, violated)
        })
        .reduce(
            || (0, 0, 0),
            |a, b| (a.0 + b.0, a.1.max(b.1), a.2 + b.2),
        );

    Ok(OverlapReport {
        samples,
        streams: s,
        total_symbols: m,
        distance_floor: d,
        bound_duplicates: bound,
        bound_fraction: bound / m as f64,
        worst_duplicates: dup_max,
        worst_fraction: dup_max as f64 / m as f64,
        mean_duplicates: dup_sum as f64 / samples as f64,
        violations,
        wall_time: start.elapsed(),
    })
}

/// Recovery state of one source block after a simulated download.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockRecovery {
    pub block: u64,
    pub required: u64,
    pub received: u64,
    pub distinct: u64,
    pub recovered: bool,
}

/// Outcome of a simulated multi-source download.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DownloadReport {
    pub budget: u64,
    pub streams_offered: usize,
    pub streams_used: usize,
    /// Symbols actually requested; equals the budget by construction.
    pub requested: u64,
    pub blocks: Vec<BlockRecovery>,
    pub recoverable: bool,
}

/// Downloads `budget` symbols round-robin across the deduplicated streams
/// reachable in `client_view` and reports per-block recovery.
///
/// For multi-block objects each selected stream gets a block rotation
/// (C, D) drawn from its own substream of `seed`; with Z = 1 the walk
/// reduces exactly to the plain SOPI permutation.
pub fn simulate_multi_source_download(
    structure: &BlockStructure,
    assignment: &Assignment,
    client_view: &[String],
    budget: u64,
    seed: u64,
    params: FieldParams,
) -> Result<DownloadReport> {
    if client_view.is_empty() {
        return Err(Error::EmptyClientView);
    }
    let mut offers = Vec::with_capacity(client_view.len());
    for node in client_view {
        let sopi = assignment
            .get(node)
            .ok_or_else(|| Error::UnknownNode(node.clone()))?;
        offers.push((node.clone(), sopi));
    }
    if budget < structure.kt {
        return Err(Error::BudgetTooSmall {
            budget,
            required: structure.kt,
        });
    }
    let selected = select_streams(&offers);
    let lengths = equal_split(budget, selected.len());

    let z = structure.z;
    let mut per_block: Vec<Vec<u32>> = vec![Vec::new(); z as usize];
    let mut requested = 0u64;
    for (stream_idx, ((_, sopi), len)) in selected.iter().zip(&lengths).enumerate() {
        let mut rng = SplitMix64::substream(seed, stream_idx as u64);
        let c = rng.next_below(params.n());
        let d = 1 + rng.next_below(params.n() - 1);
        let large = LargeSopi::from_sopi(*sopi, c, d, params)?;
        for i in 0..*len {
            let r = large_symbol_at(large, i, z, params)?;
            per_block[r.block_index as usize].push(r.symbol_id.0);
            requested += 1;
        }
    }

    let mut blocks = Vec::with_capacity(z as usize);
    let mut recoverable = true;
    for (j, ids) in per_block.iter_mut().enumerate() {
        let required = structure.block_symbols(j as u64)?;
        let received = ids.len() as u64;
        ids.sort_unstable();
        ids.dedup();
        let distinct = ids.len() as u64;
        let recovered = distinct >= required;
        recoverable &= recovered;
        blocks.push(BlockRecovery {
            block: j as u64,
            required,
            received,
            distinct,
            recovered,
        });
    }

    Ok(DownloadReport {
        budget,
        streams_offered: offers.len(),
        streams_used: selected.len(),
        requested,
        blocks,
        recoverable,
    })
}
