//! Communities in preference networks: fixed-point community rules, axiom
//! checkers with counterexample search, stability analysis, and hardness
//! gadgets with brute-force oracles.
//!
//! Members are dense ids `0..n` (at most 64) and subsets are bitmasks, so
//! exhaustive searches stay cheap at desk scale.

pub mod aggregation;
pub mod axioms;
pub mod dimacs;
pub mod error;
pub mod generators;
pub mod instances;
pub mod lexpref;
pub mod model;
pub mod ratio;
pub mod rules;
pub mod stability;
pub mod subset;

pub use axioms::{falsify_axiom, find_violation, AxiomId, Context, Counterexample, FalsifyConfig, FalsifyReport};
pub use aggregation::{aggregate_harmonious, aggregate_weighted, is_fixed_point, phi_votes, Aggregator, Harmonious, WeightSchema};
pub use error::{Error, Result};
pub use lexpref::{gs_witness, lex_prefers, sa_witness, GsWitness, SaWitness};
pub use model::{prefers, LinearOrder, MemberId, OrderedPartition, PreferenceNetwork, Violation};
pub use ratio::{parse_ratio, Ratio};
pub use rules::{enumerate_rule, EnumerateOptions, Rule};
pub use stability::{alpha_beta, delta_stable_harmonious, delta_strong_b3ct, delta_strong_fixed_point, delta_strong_harmonious, identify, AlphaBeta};
pub use subset::SubsetMask;
