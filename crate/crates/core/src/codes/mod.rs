//! Codes on networks: exact evaluation, search, pipe removal and the
//! coordination and correction building blocks used by the stacked protocol.

pub mod binning;
pub mod eval;
pub mod gf;
pub mod lemma1;
pub mod mds;
pub mod oracle;
pub mod search;
pub mod stacked;

pub use binning::{binning_coordination, binning_eta, binning_feasibility_factor, binning_k, BinningConfig, BinningReport};
pub use eval::{exact_error_probability, good_message_set, sample_error_probability, ErrorReport, GoodMessageSet};
pub use mds::{mds_formula, mds_pipeline, MdsCode, MdsReport};
pub use lemma1::{fix_pipe, lemma1_guarantee, lemma1_transform, Lemma1Result};
pub use oracle::{brute_force_point_to_point, oracle_instances, OracleInstance};
pub use search::{map_decoders, search_best_code, SearchBudget, SearchResult};
pub use stacked::{correction_bits, e1_bound, listener_network, repetition_code, stacked_correction_sim, stacked_gamma, StackedConfig, StackedSimReport};
