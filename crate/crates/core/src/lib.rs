//! SOPI (stream object permutation identifier) mathematics for
//! erasure-coded multi-source download coordination.
//!
//! A SOPI `(A, B)` defines the permutation `A + i*B mod N` over the N
//! symbol IDs an erasure encoder can produce for an object, N prime.
//! Clients that download prefixes of differently-permuted streams receive
//! nearly disjoint symbols. This crate provides:
//!
//! - [`field`]: prime-field arithmetic with the fast Mersenne-31 path;
//! - [`sopi`]: SOPI values, the permutation, prefix generation;
//! - [`overlap`]: duplicate counting, the pairwise stride distance, and
//!   the closed-form overlap/failure bounds;
//! - [`design`]: deterministic SOPI-set construction with guaranteed
//!   pairwise distance and capacity bounds;
//! - [`blocks`]: source-block partitioning and the 4-tuple SOPI for
//!   multi-block objects;
//! - [`coloring`]: SOPI distribution over a conflict graph plus the
//!   client-side stream dedup rule;
//! - [`experiments`]: reproducible Monte Carlo harnesses and a download
//!   simulation.

pub mod blocks;
pub mod coloring;
pub mod design;
pub mod error;
pub mod experiments;
pub mod field;
pub mod overlap;
pub mod rng;
pub mod sopi;

pub use blocks::{
    block_structure, large_symbol_at, partition, random_large_sopi, BlockStructure,
    BlockSymbolRef, LargeSopi, Partition,
};
pub use coloring::{greedy_color, select_streams, validate_assignment, Assignment, NodeGraph};
pub use design::{
    build_a_set, build_a_set_from, build_b_set, build_sopi_set, capacity_bounds, CapacityBounds,
    DesignParams, SopiSet, Strategy,
};
pub use error::{Error, Result};
pub use experiments::{
    designed_overlap_experiment, estimate_failure_probability, run_random_trial,
    run_trial_with_streams, simulate_multi_source_download, BlockRecovery, DownloadReport,
    ExperimentReport, OverlapReport, SplitRule, TrialConfig, TrialOutcome,
};
pub use field::{mersenne_reduce, mod_inv, mod_mul_add, FieldParams, MERSENNE31};
pub use overlap::{
    count_distinct, distance, distance_bruteforce, expected_distinct_lower_bound, matches,
    multi_overlap_lower_bound, pair_overlap_lower_bound, theorem_failure_bound, DiffSet,
    DistanceResult, DistinctCount,
};
pub use rng::SplitMix64;
pub use sopi::{prefix, random_sopi, PrefixSpec, Sopi, SymbolId};
